"""Residual evaluators for the absolute equation system.

These are diagnostics over trajectories: the mass-shell relation
s R + (1/2) R'' = 0, the continuity equation d rho/dt + d j/dx = 0, and the
force balance d u/dt + u u' + s' = E.  Time derivatives come either from the
stored evolution right-hand side (exact in time) or from centered differences
over snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_dilation

from .errors import ContractViolationError
from .numerics import Grid, _fd_derivative, check_field, derivative
from .schrodinger import Trajectory
from .wavefield import AbsoluteProcess, CotensorW


def _l2(values: np.ndarray, g: Grid, mask: np.ndarray | None = None) -> float:
    if mask is not None:
        values = values[mask]
    return float(np.sqrt(g.dx * np.sum(values**2)))


def residual_mass_shell(p: AbsoluteProcess) -> np.ndarray:
    """Pointwise s R + (1/2) R''."""
    return p.s * p.r_amp + 0.5 * derivative(p.r_amp, p.grid, 2)


def mass_shell_norm(p: AbsoluteProcess) -> float:
    return _l2(residual_mass_shell(p), p.grid, ~p.flagged)


@dataclass(frozen=True)
class ResidualSeries:
    times: np.ndarray
    values: np.ndarray


def _time_derivative_fd(arrays: list[np.ndarray], times: np.ndarray, i: int):
    return (arrays[i + 1] - arrays[i - 1]) / (times[i + 1] - times[i - 1])


def residual_continuity(
    traj: Trajectory, use_stored_rhs: bool = True, rho_floor: float = 1e-12
) -> ResidualSeries:
    """|| d rho/dt + d j/dx ||_2 per interior snapshot."""
    if len(traj) < 3:
        raise ContractViolationError("need at least 3 snapshots")
    procs = traj.processes(rho_floor)
    times = traj.times
    g = procs[0].grid
    vals, ts = [], []
    rhos = [p.rho for p in procs]
    for i in range(1, len(procs) - 1):
        p = procs[i]
        if use_stored_rhs:
            w, dw = traj.states[i], traj.rhs_values[i]
            drho_dt = 2.0 * np.real(np.conj(w.psi) * dw)
        else:
            drho_dt = _time_derivative_fd(rhos, times, i)
        res = drho_dt + derivative(p.j, g, 1)
        vals.append(_l2(res, g, ~p.flagged))
        ts.append(times[i])
    return ResidualSeries(times=np.array(ts), values=np.array(vals))


def residual_force(
    traj: Trajectory,
    e_field: np.ndarray,
    use_stored_rhs: bool = True,
    rho_floor: float = 1e-6,
) -> ResidualSeries:
    """|| d u/dt + u u' + s' - E ||_2 per interior snapshot (1+1D).

    The default density floor is much higher than for the other residuals:
    u and s carry a division by rho, so their values (and their spectral
    derivatives) below the floor are round-off amplified by 1/rho.  Flooring
    at 1e-6 interpolates the tails smoothly and restricts the norm to points
    where the balance is conditioned."""
    if len(traj) < 3:
        raise ContractViolationError("need at least 3 snapshots")
    procs = traj.processes(rho_floor)
    times = traj.times
    g = procs[0].grid
    e_field = check_field(np.asarray(e_field, dtype=float), g)
    us = [p.u for p in procs]
    vals, ts = [], []
    for i in range(1, len(procs) - 1):
        p = procs[i]
        # local 4th-order stencils rather than spectral derivatives: u and s
        # continue as linear extrapolations through the tails, and a global
        # (Fourier) derivative of those unbounded tails rings into the
        # resolved interior
        du_dx = _fd_derivative(p.u, g.dx, 1)
        ds_dx = _fd_derivative(p.s, g.dx, 1)
        # drop points whose stencil reaches into the interpolated region:
        # the interpolant is only C^0 there, so derivatives across the seam
        # carry O(1) kink errors
        mask = ~binary_dilation(p.flagged, iterations=3)
        if use_stored_rhs:
            w, dw = traj.states[i], traj.rhs_values[i]
            rho = p.rho
            flag = p.flagged
            safe = np.maximum(rho, 1e-150)  # safe**2 must not underflow
            wcur = np.imag(np.conj(w.psi) * derivative(w.psi, g, 1))
            wdot = np.imag(
                np.conj(dw) * derivative(w.psi, g, 1)
                + np.conj(w.psi) * derivative(dw, g, 1)
            )
            drho_dt = 2.0 * np.real(np.conj(w.psi) * dw)
            du_dt = np.where(
                flag, 0.0, (wdot * safe - wcur * drho_dt) / (safe**2)
            )
        else:
            du_dt = _time_derivative_fd(us, times, i)
            # neighbor snapshots contribute interpolated values where they
            # are flagged; exclude those points from the norm
            mask &= ~(procs[i - 1].flagged | procs[i + 1].flagged)
        res = du_dt + p.u * du_dx + ds_dx - e_field
        vals.append(_l2(res, g, mask))
        ts.append(times[i])
    return ResidualSeries(times=np.array(ts), values=np.array(vals))


def build_cotensor(p: AbsoluteProcess, density_weighted: bool = False) -> CotensorW:
    """Fill the three-cotensor component table from (eps, u)."""
    return CotensorW(
        eps=p.eps.copy(), u=p.u.copy(), rho=p.rho.copy() if density_weighted else None
    )


def recover_fields(ct: CotensorW) -> tuple[np.ndarray, np.ndarray]:
    """Invert build_cotensor: (eps, u) from the component table."""
    eps = ct.component(0, 0, 0)
    u = ct.component(1, 0, 0)
    if ct.rho is not None:
        safe = np.where(ct.rho > 0, ct.rho, 1.0)
        eps = np.where(ct.rho > 0, eps / safe, 0.0)
        u = np.where(ct.rho > 0, u / safe, 0.0)
    return eps, u
