"""Reference wave-function evolution with minimal coupling.

Dimensionless units hbar = m = e = 1 throughout.  Periodic grids use Strang
splitting with the kinetic step in Fourier space (a spatially varying vector
potential is folded in by a Peierls-type phase ramp); dirichlet grids use the
implicit midpoint rule with a direct linear solve and fixed-point iteration
on the nonlinear term.  Process-dependent nonlinear terms (NLS, logarithmic,
or a caller-supplied function of rho or of the unwrapped phase) enter as a
pointwise real potential K0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import ContractViolationError, StabilityError
from .numerics import (
    DIRICHLET,
    PERIODIC,
    Grid,
    antiderivative_periodic,
    check_field,
    derivative,
)
from .wavefield import (
    DEFAULT_RHO_FLOOR,
    AbsoluteProcess,
    WaveField,
    extract_absolute,
    polar_decompose,
)


@dataclass(frozen=True)
class Nonlinearity:
    """Pointwise real process-dependent term K0 added to the potential."""

    kind: str = "none"  # none | nls | log_bbm | custom
    k: float = 0.0
    k1: float = 0.0
    k2: float = 1.0
    custom: Callable[[np.ndarray], np.ndarray] | None = None
    custom_arg: str = "rho"  # rho | phase

    def __post_init__(self):
        if self.kind not in ("none", "nls", "log_bbm", "custom"):
            raise ValueError(f"unknown nonlinearity {self.kind!r}")
        if self.kind == "custom" and self.custom is None:
            raise ValueError("custom nonlinearity needs a callable")


NONE = Nonlinearity()


def nonlinear_potential(
    nl: Nonlinearity, w: WaveField, rho_floor: float = DEFAULT_RHO_FLOOR
) -> np.ndarray:
    """Evaluate K0 for a state; |psi| = 0 points are floored and harmless."""
    if nl.kind == "none":
        return np.zeros(w.grid.n)
    rho = np.abs(w.psi) ** 2
    if nl.kind == "nls":
        return nl.k * rho
    if nl.kind == "log_bbm":
        floor = rho_floor * max(rho.max(), 1e-300)
        r = np.sqrt(np.maximum(rho, floor))
        return nl.k1 * np.log(nl.k2 * r)
    if nl.custom_arg == "rho":
        return np.asarray(nl.custom(rho), dtype=float)
    phase = polar_decompose(w, rho_floor).phase
    return np.asarray(nl.custom(phase), dtype=float)


@dataclass
class EvolutionSpec:
    """Potentials, nonlinear term and stepping parameters for one run."""

    dt: float
    t_final: float
    a0: np.ndarray | None = None
    a1: np.ndarray | None = None
    nonlinear: Nonlinearity = NONE
    rho_floor: float = DEFAULT_RHO_FLOOR

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_final < 0:
            raise ValueError("t_final must be nonnegative")

    def potentials(self, w: WaveField) -> tuple[np.ndarray, np.ndarray]:
        a0 = w.a0 if self.a0 is None else check_field(self.a0, w.grid)
        a1 = w.a1 if self.a1 is None else check_field(self.a1, w.grid)
        return np.asarray(a0, dtype=float), np.asarray(a1, dtype=float)


def rhs(w: WaveField, spec: EvolutionSpec) -> np.ndarray:
    """d psi/dt = i[ (1/2) D^2 psi + A0 psi - K0 psi ], D = d/dx - i A1.

    A0 enters with the covariant-component sign (potential energy -A0), so
    eps = Im(psi* dpsi/dt)/rho - A0 is gauge invariant; K0 is an ordinary
    potential-energy term."""
    a0, a1 = spec.potentials(w)
    dpsi = derivative(w.psi, w.grid, 1) - 1j * a1 * w.psi
    ddpsi = derivative(dpsi, w.grid, 1) - 1j * a1 * dpsi
    k0 = nonlinear_potential(spec.nonlinear, w, spec.rho_floor)
    return 1j * (0.5 * ddpsi + (a0 - k0) * w.psi)


@dataclass
class Trajectory:
    """Time-ordered snapshots with the stored evolution right-hand side."""

    states: list = field(default_factory=list)
    rhs_values: list = field(default_factory=list)
    spec: EvolutionSpec | None = None

    @property
    def times(self) -> np.ndarray:
        return np.array([w.time for w in self.states])

    def __len__(self) -> int:
        return len(self.states)

    def append(self, w: WaveField, dpsi_dt: np.ndarray):
        self.states.append(w)
        self.rhs_values.append(dpsi_dt)

    def processes(self, rho_floor: float = DEFAULT_RHO_FLOOR) -> list:
        return [
            extract_absolute(w, dw, rho_floor)
            for w, dw in zip(self.states, self.rhs_values)
        ]


def _strang_stepper(w0: WaveField, spec: EvolutionSpec):
    g = w0.grid
    a0, a1 = spec.potentials(w0)
    abar = float(a1.mean())
    ramp = antiderivative_periodic(a1 - abar, g) if np.any(a1 != abar) else None
    kin = np.exp(-0.5j * spec.dt * (g.k - abar) ** 2)

    def step(psi: np.ndarray, t: float) -> np.ndarray:
        w = WaveField(psi, g, time=t, a0=a0, a1=a1)
        k0 = nonlinear_potential(spec.nonlinear, w, spec.rho_floor)
        psi = psi * np.exp(0.5j * spec.dt * (a0 - k0))
        if ramp is not None:
            psi = psi * np.exp(-1j * ramp)
        psi = np.fft.ifft(kin * np.fft.fft(psi))
        if ramp is not None:
            psi = psi * np.exp(1j * ramp)
        w = WaveField(psi, g, time=t, a0=a0, a1=a1)
        k0 = nonlinear_potential(spec.nonlinear, w, spec.rho_floor)
        return psi * np.exp(0.5j * spec.dt * (a0 - k0))

    return step


def _dirichlet_matrices(g: Grid, a0: np.ndarray, a1: np.ndarray) -> np.ndarray:
    """Hermitian Hamiltonian matrix with 4th-order interior stencils and
    zero ghost values outside the domain."""
    n = g.n
    d2 = np.zeros((n, n))
    c2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * g.dx**2)
    c1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * g.dx)
    for off, v2, v1 in zip(range(-2, 3), c2, c1):
        d2 += v2 * np.eye(n, k=off)
    d1 = np.zeros((n, n))
    for off, v1 in zip(range(-2, 3), c1):
        d1 += v1 * np.eye(n, k=off)
    kinetic = -0.5 * d2
    p_op = -1j * d1
    h = kinetic.astype(complex)
    if np.any(a1 != 0.0):
        da1 = np.diag(a1)
        h = h - 0.5 * (da1 @ p_op + p_op @ da1)
    h = h + np.diag(0.5 * a1**2 - a0)
    return h


def _implicit_midpoint_stepper(w0: WaveField, spec: EvolutionSpec):
    g = w0.grid
    a0, a1 = spec.potentials(w0)
    h = _dirichlet_matrices(g, a0, a1)
    ident = np.eye(g.n, dtype=complex)
    lhs = lu_factor(ident + 0.5j * spec.dt * h)
    rhs_m = ident - 0.5j * spec.dt * h
    linear = spec.nonlinear.kind == "none"

    def step(psi: np.ndarray, t: float) -> np.ndarray:
        base = rhs_m @ psi
        new = lu_solve(lhs, base)
        if linear:
            return new
        for _ in range(100):
            mid = 0.5 * (psi + new)
            w_mid = WaveField(mid, g, time=t + 0.5 * spec.dt, a0=a0, a1=a1)
            k0 = nonlinear_potential(spec.nonlinear, w_mid, spec.rho_floor)
            candidate = lu_solve(lhs, base - 1j * spec.dt * k0 * mid)
            if np.max(np.abs(candidate - new)) < 1e-13:
                return candidate
            new = candidate
        return new

    return step


def evolve(
    w0: WaveField, spec: EvolutionSpec, snapshot_every: int = 1
) -> Trajectory:
    """Evolve a normalized state to t_final, storing snapshots with rhs."""
    if abs(w0.norm_sq() - 1.0) > 1e-6:
        raise ContractViolationError("initial state must be normalized")
    if snapshot_every < 1:
        raise ValueError("snapshot_every must be >= 1")
    g = w0.grid
    if g.boundary == DIRICHLET:
        bound = g.dx**2 / np.pi
        if spec.dt > bound * (1.0 + 1e-12):
            raise StabilityError(
                f"dt={spec.dt:.3e} exceeds the dirichlet bound {bound:.3e}; "
                f"use dt <= {bound:.3e}"
            )
        stepper = _implicit_midpoint_stepper(w0, spec)
    else:
        stepper = _strang_stepper(w0, spec)

    n_steps = max(int(round(spec.t_final / spec.dt)), 0)
    a0, a1 = spec.potentials(w0)
    psi = w0.psi.copy()
    t = w0.time
    traj = Trajectory(spec=spec)

    def snapshot(psi, t):
        w = WaveField(
            psi.copy(), g, time=t, a0=a0, a1=a1, frame_velocity=w0.frame_velocity
        )
        traj.append(w, rhs(w, spec))

    snapshot(psi, t)
    for i in range(n_steps):
        psi = stepper(psi, t)
        t = w0.time + (i + 1) * spec.dt
        if (i + 1) % snapshot_every == 0 or i == n_steps - 1:
            snapshot(psi, t)
    return traj
