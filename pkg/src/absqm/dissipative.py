"""Linearly damped quantum system integrated directly in absolute variables.

Dimensionless units (characteristic scales sqrt(hbar/k), m/k, m).  The system
is d rho/dt = -dj/dx, dj/dt = -j + (1/2) d/dx { R R'' - R'^2 - 2 rho u^2 }
with R = sqrt(rho), u = j/rho.  A quasi-wave cross-check solver evolves
i dPsi/dt = -(1/2) Psi'' + S Psi with S the unwrapped phase.  Diagnostics
track Q, V, X=varQ, Y, T, P, the auxiliary Z = (X^2)'' + (X^2)' - 3 X'^2 and
K = (V^2+T+P)/2; asymptotically X^2/t -> Z* >= 1 and K ~ (sqrt(Z*)/8) t^(-1/2).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ContractViolationError,
    DegenerateInputError,
    DomainError,
    StabilityError,
    UnwrapError,
)
from .numerics import PERIODIC, Grid, check_field, derivative, integrate
from .observables import raw_moments
from .schrodinger import EvolutionSpec, Nonlinearity, _strang_stepper
from .wavefield import WaveField, polar_decompose

RHO_FLOOR_FRAC = 1e-14
STABILITY_COEFF = 0.1
BOUNDARY_DENSITY_TOL = 1e-10
MAX_STEP_HALVINGS = 8


@dataclass(frozen=True)
class DissipativeState:
    """Density and current on a grid at one instant."""

    rho: np.ndarray
    j: np.ndarray
    grid: Grid
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "rho", check_field(self.rho, self.grid))
        object.__setattr__(self, "j", check_field(self.j, self.grid))

    def velocity(self) -> np.ndarray:
        floor = RHO_FLOOR_FRAC * float(self.rho.max())
        return self.j / np.maximum(self.rho, floor)

    def norm(self) -> float:
        return float(integrate(self.rho, self.grid))


PEDESTAL_FRAC = 1e-8


def gaussian_state(
    grid: Grid,
    sigma: float = 1.0,
    center: float = 0.0,
    velocity: float = 0.0,
    pedestal: float = PEDESTAL_FRAC,
) -> DissipativeState:
    """Normalized Gaussian density with variance sigma^2 and uniform u.

    A small constant pedestal (relative to the peak) keeps the density bounded
    away from zero: the exact equations are then well posed everywhere and
    need no vacuum regularization, at the cost of an O(pedestal) perturbation
    of the moments.
    """
    rho = np.exp(-((grid.x - center) ** 2) / (2.0 * sigma**2))
    rho += pedestal * rho.max()
    rho /= integrate(rho, grid)
    return DissipativeState(rho=rho, j=velocity * rho, grid=grid)


def _rhs(rho: np.ndarray, j: np.ndarray, g: Grid):
    # R R'' - R'^2 rewritten as rho''/2 - rho'^2/(2 rho): differentiating
    # sqrt(rho) is ill-conditioned near vacuum (the cusp turns roundoff noise
    # into O(1/sqrt(noise)) curvature), while rho itself stays smooth.  The
    # divisions by rho are masked where the density is unresolved; spectral
    # noise in j divided by a floored rho would otherwise feed back
    # quadratically and blow up within a few steps.
    safe = np.maximum(rho, 1e-14 * max(float(rho.max()), 1e-300))
    drho = derivative(rho, g, 1)
    flux = 0.5 * derivative(rho, g, 2) - drho**2 / (2.0 * safe) - 2.0 * j**2 / safe
    return -derivative(j, g, 1), -j + 0.5 * derivative(flux, g, 1)


def _spectral_filter(g: Grid) -> np.ndarray:
    """Exponential high-order filter: ~e^-36 at the grid scale, < 1e-8 per
    step below a quarter of the Nyquist wavenumber.  Suppresses the sawtooth
    noise that the vacuum-tail divisions otherwise amplify."""
    k_max = float(np.max(np.abs(g.k)))
    return np.exp(-36.0 * (np.abs(g.k) / k_max) ** 16)


def _rk4(rho, j, g, dt):
    k1r, k1j = _rhs(rho, j, g)
    k2r, k2j = _rhs(rho + 0.5 * dt * k1r, j + 0.5 * dt * k1j, g)
    k3r, k3j = _rhs(rho + 0.5 * dt * k2r, j + 0.5 * dt * k2j, g)
    k4r, k4j = _rhs(rho + dt * k3r, j + dt * k3j, g)
    rho_new = rho + (dt / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
    j_new = j + (dt / 6.0) * (k1j + 2.0 * k2j + 2.0 * k3j + k4j)
    filt = _spectral_filter(g)
    rho_new = np.real(np.fft.ifft(filt * np.fft.fft(rho_new)))
    j_new = np.real(np.fft.ifft(filt * np.fft.fft(j_new)))
    return rho_new, j_new


def step_absolute(s: DissipativeState, dt: float) -> DissipativeState:
    """One RK4 method-of-lines step; rejects and halves on negative density."""
    bound = STABILITY_COEFF * s.grid.dx**2
    if dt > bound * (1.0 + 1e-12):
        raise StabilityError(
            f"dt={dt:.3e} exceeds the stability bound {bound:.3e}"
        )
    rho, j = s.rho, s.j
    sub_dt, n_sub = dt, 1
    for _ in range(MAX_STEP_HALVINGS + 1):
        r_try, j_try = rho, j
        ok = True
        for _ in range(n_sub):
            r_try, j_try = _rk4(r_try, j_try, s.grid, sub_dt)
            if float(r_try.min()) < -1e-12:
                ok = False
                break
        if ok:
            return DissipativeState(
                rho=np.maximum(r_try, 0.0), j=j_try, grid=s.grid, time=s.time + dt
            )
        sub_dt *= 0.5
        n_sub *= 2
    raise StabilityError(
        f"density stays negative beyond tolerance after {MAX_STEP_HALVINGS} "
        "step halvings"
    )


def step_quasiwave(w: WaveField, dt: float) -> WaveField:
    """One Strang step of i dPsi/dt = -(1/2) Psi'' + S Psi, S = unwrapped phase."""
    if w.grid.boundary != PERIODIC:
        raise ContractViolationError("quasi-wave stepping requires a periodic grid")
    p = polar_decompose(w)
    frac = float(p.flagged.mean())
    if frac > 0.10:
        raise UnwrapError(
            f"flagged fraction {frac:.2f} exceeds 10%; phase unwrapping is "
            "unreliable on this state"
        )
    nl = Nonlinearity(kind="custom", custom=lambda s: s, custom_arg="phase")
    spec = EvolutionSpec(dt=dt, t_final=dt, nonlinear=nl)
    stepper = _strang_stepper(w, spec)
    psi = stepper(w.psi, w.time)
    return WaveField(psi, w.grid, time=w.time + dt)


def _extend_grid(s: DissipativeState) -> DissipativeState:
    """Re-embed on a twice-wider grid (same dx) by zero padding."""
    g = s.grid
    pad = g.n // 2
    g2 = Grid(
        x_min=g.x_min - pad * g.dx,
        x_max=g.x_max + pad * g.dx,
        n=g.n + 2 * pad,
        boundary=g.boundary,
    )
    # pad with the ambient pedestal level, not zero: zero-padded vacuum would
    # reintroduce the ill-conditioned tails the pedestal exists to avoid
    rho = np.full(g2.n, float(s.rho.min()))
    j = np.zeros(g2.n)
    rho[pad : pad + g.n] = s.rho
    j[pad : pad + g.n] = s.j
    return DissipativeState(rho=rho, j=j, grid=g2, time=s.time)


@dataclass
class DissipativeRunConfig:
    sigma: float = 1.0
    q0: float = 0.0
    v0: float = 1.0
    x_min: float = -40.0
    x_max: float = 40.0
    n: int = 1024
    t_final: float = 60.0
    dt: float | None = None  # default: stability bound
    snapshot_dt: float = 0.1
    auto_extend: bool = True


def run(cfg: DissipativeRunConfig) -> list[DissipativeState]:
    """Integrate the damped system, storing snapshots every snapshot_dt.

    When the boundary density exceeds tolerance the grid is extended by zero
    padding (snapshot times are preserved; later snapshots live on the wider
    grid).
    """
    g = Grid(cfg.x_min, cfg.x_max, cfg.n)
    s = gaussian_state(g, sigma=cfg.sigma, center=cfg.q0, velocity=cfg.v0)
    dt = STABILITY_COEFF * g.dx**2 if cfg.dt is None else cfg.dt
    # ceil: rounding down would push the adjusted dt above the stability bound
    per_snap = max(int(np.ceil(cfg.snapshot_dt / dt - 1e-9)), 1)
    dt = cfg.snapshot_dt / per_snap
    n_snaps = int(round(cfg.t_final / cfg.snapshot_dt))
    out = [s]
    # ambient pedestal level: the packet has reached the boundary only when
    # the edge density rises clearly above it
    ambient = max(float(s.rho[0]), float(s.rho[-1]))
    for _ in range(n_snaps):
        for _ in range(per_snap):
            s = step_absolute(s, dt)
        edge = max(float(s.rho[0]), float(s.rho[-1]))
        if cfg.auto_extend and edge > max(
            BOUNDARY_DENSITY_TOL * float(s.rho.max()), 10.0 * ambient
        ):
            s = _extend_grid(s)
            ambient = max(float(s.rho[0]), float(s.rho[-1]))
        out.append(s)
    return out


@dataclass
class DissipativeDiagnostics:
    """Moment time series plus centered-difference checks of the moment ODEs
    X' = 2Y, Y' = -Y + T + P, (T+P)' = -2T.

    Z is stored in its algebraic form 4X(T+P) - 4Y^2, obtained by expanding
    (X^2)'' + (X^2)' - 3X'^2 with the moment ODEs; z_fd_residual reports the
    agreement with the direct centered-difference evaluation.  Z' has the
    exact form 8(Y^2 - XT)."""

    times: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    T: np.ndarray
    P: np.ndarray
    Z: np.ndarray
    Zdot: np.ndarray
    K: np.ndarray
    ode_residual_x: float
    ode_residual_y: float
    ode_residual_tp: float
    z_fd_residual: float


def _centered(series: np.ndarray, dt: float):
    d1 = (series[2:] - series[:-2]) / (2.0 * dt)
    d2 = (series[2:] - 2.0 * series[1:-1] + series[:-2]) / dt**2
    return d1, d2


def diagnostics(states: list[DissipativeState]) -> DissipativeDiagnostics:
    if len(states) < 5:
        raise ContractViolationError("need at least 5 snapshots")
    times = np.array([s.time for s in states])
    dts = np.diff(times)
    if not np.allclose(dts, dts[0], rtol=1e-9, atol=1e-12):
        raise ContractViolationError("snapshots must be uniformly spaced in time")
    dt = float(dts[0])
    rows = []
    for s in states:
        g = s.grid
        dr = derivative(np.sqrt(np.maximum(s.rho, 0.0)), g, 1)
        rows.append(raw_moments(g.x, g.dx, s.rho, s.velocity(), dr))
    Q = np.array([r["Q"] for r in rows])
    V = np.array([r["V"] for r in rows])
    X = np.array([r["varQ"] for r in rows])
    Y = np.array([r["Y"] for r in rows])
    T = np.array([r["T"] for r in rows])
    P = np.array([r["P"] for r in rows])
    K = 0.5 * (V**2 + T + P)
    Z = 4.0 * X * (T + P) - 4.0 * Y**2
    Zdot = 8.0 * (Y**2 - X * T)
    x2d1, x2d2 = _centered(X**2, dt)
    xd1, _ = _centered(X, dt)
    z_fd = x2d2 + x2d1 - 3.0 * xd1**2
    yd1, _ = _centered(Y, dt)
    tpd1, _ = _centered(T + P, dt)
    res_x = float(np.max(np.abs(xd1 - 2.0 * Y[1:-1])))
    res_y = float(np.max(np.abs(yd1 - (-Y + T + P)[1:-1])))
    res_tp = float(np.max(np.abs(tpd1 + 2.0 * T[1:-1])))
    return DissipativeDiagnostics(
        times=times, Q=Q, V=V, X=X, Y=Y, T=T, P=P, Z=Z, Zdot=Zdot, K=K,
        ode_residual_x=res_x, ode_residual_y=res_y, ode_residual_tp=res_tp,
        z_fd_residual=float(np.max(np.abs(z_fd - Z[1:-1]))),
    )


@dataclass(frozen=True)
class ExpectationLawReport:
    """Deviation from Q(t) = Q(0) + V(0)(1 - e^-t), V(t) = V(0) e^-t."""

    max_rel_dev_q: float
    max_rel_dev_v: float


def expectation_laws(diag: DissipativeDiagnostics) -> ExpectationLawReport:
    if diag.times[-1] - diag.times[0] < 5.0:
        raise ContractViolationError("run must cover at least 5 time units")
    t = diag.times - diag.times[0]
    q0, v0 = diag.Q[0], diag.V[0]
    q_law = q0 + v0 * (1.0 - np.exp(-t))
    v_law = v0 * np.exp(-t)
    q_scale = max(np.max(np.abs(q_law - q0)), abs(v0), 1e-12)
    v_scale = max(abs(v0), 1e-12)
    return ExpectationLawReport(
        max_rel_dev_q=float(np.max(np.abs(diag.Q - q_law)) / q_scale),
        max_rel_dev_v=float(np.max(np.abs(diag.V - v_law)) / v_scale),
    )


@dataclass(frozen=True)
class AsymptoticsReport:
    z_star: float
    z_drift: float  # relative change of Z over the final 10 time units
    slope_x2: float  # fitted d(X^2)/dt on t >= t_min
    slope_ratio: float  # slope_x2 / z_star (expect ~1)
    k_prefactor: float  # plateau of K sqrt(t)
    k_ratio: float  # k_prefactor / (sqrt(z_star)/8) (expect ~1)
    exponent_x2: float  # log-log slope of X^2 (expect ~1)
    exponent_k: float  # log-log slope of K (expect ~ -1/2)
    inconclusive: bool


def asymptotics(diag: DissipativeDiagnostics, t_min: float = 20.0) -> AsymptoticsReport:
    if t_min < 20.0:
        raise ContractViolationError("t_min must be at least 20")
    t_end = float(diag.times[-1])
    if t_end < t_min + 1.0:
        raise ContractViolationError("diagnostics do not cover t >= t_min")
    window = diag.times >= t_end - 10.0
    z_win, t_win = diag.Z[window], diag.times[window]
    z_star = float(np.mean(z_win))
    drift_slope = np.polyfit(t_win, z_win, 1)[0]
    z_drift = float(abs(drift_slope) * 10.0 / max(abs(z_star), 1e-12))
    fit = diag.times >= t_min
    tf, xf, kf = diag.times[fit], diag.X[fit], diag.K[fit]
    slope_x2 = float(np.polyfit(tf, xf**2, 1)[0])
    k_pref = float(np.mean(kf[tf >= t_end - 10.0] * np.sqrt(tf[tf >= t_end - 10.0])))
    exp_x2 = float(np.polyfit(np.log(tf), np.log(xf**2), 1)[0])
    exp_k = float(np.polyfit(np.log(tf), np.log(kf), 1)[0])
    return AsymptoticsReport(
        z_star=z_star,
        z_drift=z_drift,
        slope_x2=slope_x2,
        slope_ratio=slope_x2 / z_star,
        k_prefactor=k_pref,
        k_ratio=k_pref / (np.sqrt(z_star) / 8.0),
        exponent_x2=exp_x2,
        exponent_k=exp_k,
        inconclusive=z_drift > 0.05,
    )


@dataclass(frozen=True)
class StationaryReport:
    """Norm growth of R(x) = c1 e^(c0 x) + c2 e^(-c0 x) over a length ladder."""

    lengths: np.ndarray
    norms: np.ndarray
    divergence_class: str  # "exponential" | "linear"
    normalizable: bool  # always False


def stationary_analysis(
    c0: complex, c1: complex, c2: complex, L: float, n_doublings: int = 5
) -> StationaryReport:
    """Evaluate N(L) = int_{-L}^{L} R^2 for geometrically growing L.

    Exponential divergence when Re c0 != 0; linear otherwise (bounded
    oscillatory or constant R).  No parameter
    choice yields a normalizable density.
    """
    c0, c1, c2 = complex(c0), complex(c1), complex(c2)
    if c1 == 0 and c2 == 0:
        raise DegenerateInputError("R is identically zero")
    if L <= 0:
        raise DomainError("L must be positive")
    lengths = L * 2.0 ** np.arange(n_doublings + 1)
    norms = []
    for ell in lengths:
        x = np.linspace(-ell, ell, 8193)
        r = c1 * np.exp(c0 * x) + c2 * np.exp(-c0 * x)
        if np.max(np.abs(r.imag)) > 1e-9 * max(np.max(np.abs(r.real)), 1e-300):
            raise DomainError("parameters give a complex-valued R")
        norms.append(np.trapezoid(r.real**2, x))
    # the interval is symmetric, so either exponential mode diverges at one
    # end or the other whenever Re c0 != 0
    growing = abs(c0.real) > 1e-12
    return StationaryReport(
        lengths=lengths,
        norms=np.array(norms),
        divergence_class="exponential" if growing else "linear",
        normalizable=False,
    )
