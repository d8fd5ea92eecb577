"""Wave fields, polar decomposition, gauge/boost transforms and process geometry.

The absolute (frame- and gauge-free) description of a state is the field
tuple (rho, R, u, eps, s, j); `extract_absolute` produces it from a wave
function and `reconstruct` inverts the map up to a global phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ChartDomainError,
    ContractViolationError,
    DegenerateInputError,
    GridMismatchError,
    PathDependenceError,
    RangeError,
)
from .numerics import (
    DIRICHLET,
    PERIODIC,
    Grid,
    antiderivative_periodic,
    check_field,
    derivative,
    integrate,
)

DEFAULT_RHO_FLOOR = 1e-12


@dataclass
class WaveField:
    """Complex wave function on a grid at one instant, plus gauge/frame tags."""

    psi: np.ndarray
    grid: Grid
    time: float = 0.0
    a0: np.ndarray | None = None
    a1: np.ndarray | None = None
    frame_velocity: float = 0.0

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex)
        check_field(self.psi, self.grid)
        if self.a0 is None:
            self.a0 = np.zeros(self.grid.n)
        if self.a1 is None:
            self.a1 = np.zeros(self.grid.n)
        self.a0 = check_field(np.asarray(self.a0, dtype=float), self.grid)
        self.a1 = check_field(np.asarray(self.a1, dtype=float), self.grid)

    def norm_sq(self) -> float:
        return float(integrate(np.abs(self.psi) ** 2, self.grid))

    def normalized(self) -> "WaveField":
        n2 = self.norm_sq()
        if n2 <= 0:
            raise DegenerateInputError("cannot normalize a zero field")
        return replace(self, psi=self.psi / np.sqrt(n2))


@dataclass
class AbsoluteProcess:
    """The fields (rho, R, u, eps, s, j) on a grid at one instant."""

    rho: np.ndarray
    r_amp: np.ndarray
    u: np.ndarray
    eps: np.ndarray
    s: np.ndarray
    j: np.ndarray
    grid: Grid
    time: float = 0.0
    flagged: np.ndarray = None  # points where rho is below the floor

    def __post_init__(self):
        for name in ("rho", "r_amp", "u", "eps", "s", "j"):
            setattr(self, name, check_field(getattr(self, name), self.grid))
        if self.flagged is None:
            self.flagged = np.zeros(self.grid.n, dtype=bool)
        if np.any(self.rho < -1e-12):
            raise ContractViolationError("rho must be nonnegative")


@dataclass(frozen=True)
class CotensorW:
    """1+1D components of the three-cotensor built from (eps, u).

    Nonzero entries: w_{000} = eps, w_{100} = u,
    w_{110} = w_{101} = -w_{011} = -1/2.  Optionally density weighted.
    """

    eps: np.ndarray
    u: np.ndarray
    rho: np.ndarray | None = None

    def component(self, i: int, j: int, k: int) -> np.ndarray:
        idx = (i, j, k)
        n = self.eps.shape[0]
        if idx == (0, 0, 0):
            val = self.eps
        elif idx == (1, 0, 0):
            val = self.u
        elif idx in ((1, 1, 0), (1, 0, 1)):
            val = np.full(n, -0.5)
        elif idx == (0, 1, 1):
            val = np.full(n, 0.5)
        else:
            val = np.zeros(n)
        if self.rho is not None:
            return self.rho * val
        return val

    def two_cotensor(self) -> dict:
        """The two-cotensor z recovered from the same data."""
        n = self.eps.shape[0]
        return {
            (0, 0): self.eps.copy(),
            (1, 0): 0.5 * self.u,
            (0, 1): 0.5 * self.u,
            (1, 1): np.full(n, -0.5),
        }


@dataclass
class PolarDecomposition:
    r_amp: np.ndarray
    phase: np.ndarray
    flagged: np.ndarray


def _interpolate_flagged(values: np.ndarray, flagged: np.ndarray, x: np.ndarray):
    """Fill flagged points: linear interpolation inside the valid range and
    linear extrapolation (least-squares over the outermost valid points) in
    the tails, so smooth fields continue without kinks."""
    valid = ~flagged
    if valid.all() or not valid.any():
        return values
    out = values.copy()
    xv, yv = x[valid], values[valid]
    out[flagged] = np.interp(x[flagged], xv, yv)
    m = min(8, xv.size)
    if m >= 2:
        left = x < xv[0]
        if left.any():
            c = np.polyfit(xv[:m], yv[:m], 1)
            out[left] = np.polyval(c, x[left])
        right = x > xv[-1]
        if right.any():
            c = np.polyfit(xv[-m:], yv[-m:], 1)
            out[right] = np.polyval(c, x[right])
    return out


def polar_decompose(
    w: WaveField, rho_floor: float = DEFAULT_RHO_FLOOR
) -> PolarDecomposition:
    """Split psi = R exp(iS) with S unwrapped from the index of max |psi|."""
    if rho_floor <= 0:
        raise ValueError("rho_floor must be positive")
    r_amp = np.abs(w.psi)
    rho = r_amp**2
    peak = rho.max()
    if peak == 0.0:
        raise DegenerateInputError("wave function is identically zero")
    flagged = rho < rho_floor * peak
    angle = np.angle(w.psi)
    phase = np.unwrap(angle)
    i0 = int(np.argmax(r_amp))
    phase = phase - phase[i0] + angle[i0]
    phase = _interpolate_flagged(phase, flagged, w.grid.x)
    return PolarDecomposition(r_amp=r_amp, phase=phase, flagged=flagged)


def extract_absolute(
    w: WaveField,
    dpsi_dt: np.ndarray,
    rho_floor: float = DEFAULT_RHO_FLOOR,
) -> AbsoluteProcess:
    """Gauge-invariant fields from psi and the evolution right-hand side.

    u = Im(psi* dpsi/dx)/|psi|^2 - A1, eps = Im(psi* dpsi/dt)/|psi|^2 - A0;
    points with |psi|^2 below the relative floor are filled by interpolation
    and flagged.
    """
    dpsi_dt = check_field(np.asarray(dpsi_dt, dtype=complex), w.grid)
    rho = np.abs(w.psi) ** 2
    peak = rho.max()
    if peak == 0.0:
        raise DegenerateInputError("wave function is identically zero")
    flagged = rho < rho_floor * peak
    safe_rho = np.where(flagged, rho_floor * peak, rho)
    dpsi_dx = derivative(w.psi, w.grid, 1)
    u = np.imag(np.conj(w.psi) * dpsi_dx) / safe_rho - w.a1
    eps = np.imag(np.conj(w.psi) * dpsi_dt) / safe_rho - w.a0
    u = _interpolate_flagged(u, flagged, w.grid.x)
    eps = _interpolate_flagged(eps, flagged, w.grid.x)
    s = -eps - 0.5 * u**2
    return AbsoluteProcess(
        rho=rho,
        r_amp=np.sqrt(rho),
        u=u,
        eps=eps,
        s=s,
        j=rho * u,
        grid=w.grid,
        time=w.time,
        flagged=flagged,
    )


def _mass_shell_relative_residual(p: AbsoluteProcess) -> float:
    lap_r = derivative(p.r_amp, p.grid, 2)
    res = p.s * p.r_amp + 0.5 * lap_r
    ok = ~p.flagged
    scale = max(
        float(np.linalg.norm((p.eps * p.r_amp)[ok])),
        float(np.linalg.norm((0.5 * lap_r)[ok])),
        1e-30,
    )
    return float(np.linalg.norm(res[ok])) / scale


def _smoothstep_over_run(n: int, run_start: int, run_stop: int) -> np.ndarray:
    """0 before the run, smooth rise inside [run_start, run_stop), 1 after."""
    sigma = np.zeros(n)
    width = max(run_stop - run_start, 1)
    t = np.clip((np.arange(n) - run_start + 0.5) / width, 0.0, 1.0)
    sigma = t * t * (3.0 - 2.0 * t)
    return sigma


def reconstruct(
    p: AbsoluteProcess,
    a0: np.ndarray | None = None,
    a1: np.ndarray | None = None,
    phase_at_origin: float = 0.0,
    consistency_tol: float = 1e-5,
) -> WaveField:
    """Rebuild psi = R exp(iS) from an absolute process.

    The phase is the line integral of (u + A1) along the grid at fixed time;
    refused when the process is internally inconsistent (mass-shell residual
    above tolerance) or, on a periodic grid with no flagged region, when the
    winding of u + A1 is incompatible with single-valuedness.
    """
    g = p.grid
    if a0 is None:
        a0 = np.zeros(g.n)
    if a1 is None:
        a1 = np.zeros(g.n)
    a0 = check_field(np.asarray(a0, dtype=float), g)
    a1 = check_field(np.asarray(a1, dtype=float), g)

    rel = _mass_shell_relative_residual(p)
    if rel > consistency_tol:
        raise PathDependenceError(
            f"consistency residual {rel:.3e} exceeds tolerance {consistency_tol:.1e}; "
            "the fields do not define a path-independent phase"
        )

    u_tot = p.u + a1
    if g.boundary == PERIODIC:
        if not p.flagged.any():
            phase = antiderivative_periodic(u_tot, g)
            winding = float(u_tot.mean()) * g.length
            delta = winding - 2.0 * np.pi * np.round(winding / (2.0 * np.pi))
            if abs(delta) > 1e-10:
                raise PathDependenceError(
                    f"phase winding {winding:.6f} is not a multiple of 2*pi and "
                    "there is no flagged region to absorb the mismatch"
                )
        else:
            # Integrate the phase starting from the deepest-density point:
            # roll so that point sits at index 0, bridge the wrap jump of u
            # through the flagged zone, and absorb the winding mismatch by a
            # smoothstep there.  All phase surgery happens where R is
            # negligible, so extraction on resolved points is unaffected.
            shift = int(np.argmin(p.rho))
            u_r = np.roll(u_tot, -shift)
            flag_r = np.roll(p.flagged, -shift)
            j_wrap = (g.n - shift) % g.n
            if 0 < j_wrap < g.n and (flag_r[j_wrap] or flag_r[j_wrap - 1]):
                start = j_wrap
                while start > 0 and flag_r[start - 1]:
                    start -= 1
                stop = j_wrap
                while stop < g.n and flag_r[stop]:
                    stop += 1
                lo = max(start - 1, 0)
                hi = min(stop, g.n - 1)
                idx = np.arange(start, stop)
                u_r[start:stop] = np.interp(idx, [lo, hi], [u_r[lo], u_r[hi]])
            winding = float(u_r.mean()) * g.length
            delta = winding - 2.0 * np.pi * np.round(winding / (2.0 * np.pi))
            b = 1
            while b < g.n and flag_r[b]:
                b += 1
            phase_r = antiderivative_periodic(u_r, g)
            if abs(delta) > 1e-12:
                phase_r = phase_r - delta * _smoothstep_over_run(g.n, 0, b)
            phase = np.roll(phase_r, shift)
    else:
        # open line: cumulative midpoint integration, no winding constraint
        phase = np.cumsum(u_tot) * g.dx - 0.5 * u_tot * g.dx

    phase = phase - phase[0] + phase_at_origin
    psi = p.r_amp * np.exp(1j * phase)
    return WaveField(psi=psi, grid=g, time=p.time, a0=a0, a1=a1)


def gauge_transform(
    w: WaveField, alpha: np.ndarray, dalpha_dt: np.ndarray | None = None
) -> WaveField:
    """Multiply psi by exp(i alpha) and shift the potentials accordingly."""
    alpha = check_field(np.asarray(alpha, dtype=float), w.grid)
    if dalpha_dt is None:
        dalpha_dt = np.zeros(w.grid.n)
    dalpha_dt = check_field(np.asarray(dalpha_dt, dtype=float), w.grid)
    return WaveField(
        psi=w.psi * np.exp(1j * alpha),
        grid=w.grid,
        time=w.time,
        a0=w.a0 + dalpha_dt,
        a1=w.a1 + derivative(alpha, w.grid, 1),
        frame_velocity=w.frame_velocity,
    )


def _spectral_shift(f: np.ndarray, g: Grid, a: float) -> np.ndarray:
    """Periodic spectral interpolation f(x + a)."""
    fk = np.fft.fft(f)
    shifted = np.fft.ifft(fk * np.exp(1j * g.k * a))
    if np.isrealobj(f):
        return shifted.real.copy()
    return shifted


def boost_transform(w: WaveField, v: float) -> WaveField:
    """Active boost: psi'(t, x) = psi(t, x + v t) exp(i(-v^2 t/2 - v x))."""
    a = v * w.time
    if w.grid.boundary == PERIODIC:
        psi_shifted = _spectral_shift(w.psi, w.grid, a)
        a0 = _spectral_shift(w.a0, w.grid, a)
        a1 = _spectral_shift(w.a1, w.grid, a)
    else:
        if abs(a) >= w.grid.length:
            raise RangeError(
                f"boost displacement {a} exceeds the dirichlet domain extent"
            )
        x = w.grid.x
        psi_shifted = np.interp(x + a, x, w.psi.real, left=0.0, right=0.0) + (
            1j * np.interp(x + a, x, w.psi.imag, left=0.0, right=0.0)
        )
        a0 = np.interp(x + a, x, w.a0, left=0.0, right=0.0)
        a1 = np.interp(x + a, x, w.a1, left=0.0, right=0.0)
    phase = -0.5 * v * v * w.time - v * w.grid.x
    return WaveField(
        psi=psi_shifted * np.exp(1j * phase),
        grid=w.grid,
        time=w.time,
        a0=a0,
        a1=a1,
        frame_velocity=w.frame_velocity + v,
    )


def _check_pair(w1: WaveField, w2: WaveField, norm_tol: float = 1e-6):
    if w1.grid != w2.grid:
        raise GridMismatchError("states live on different grids")
    if abs(w1.time - w2.time) > 1e-12:
        raise ContractViolationError("states must be compared at equal times")
    for w in (w1, w2):
        if abs(w.norm_sq() - 1.0) > norm_tol:
            raise ContractViolationError(
                f"state not normalized: |psi|^2 integrates to {w.norm_sq():.6f}"
            )


def inner_product(w1: WaveField, w2: WaveField) -> complex:
    return complex(integrate(np.conj(w1.psi) * w2.psi, w1.grid))


def overlap_magnitude(w1: WaveField, w2: WaveField) -> float:
    """s_a = |<psi1, psi2>|, the frame/gauge/phase-free overlap."""
    _check_pair(w1, w2)
    return min(abs(inner_product(w1, w2)), 1.0)


def process_distance(w1: WaveField, w2: WaveField) -> float:
    """The process-space metric l = arccos s_a, in [0, pi/2]."""
    return float(np.arccos(np.clip(overlap_magnitude(w1, w2), 0.0, 1.0)))


def chart_coordinate(psi0: WaveField, psi: WaveField) -> np.ndarray:
    """Chart vector phi = (|c|/c)(psi - c psi0), c = <psi0, psi>.

    Orthogonal to psi0 and invariant under psi -> exp(i theta) psi.
    """
    _check_pair(psi0, psi)
    c = inner_product(psi0, psi)
    if abs(c) < 1e-12:
        raise ChartDomainError("chart undefined for (near-)orthogonal states")
    return (abs(c) / c) * (psi.psi - c * psi0.psi)


def geodesic_length(psi0: WaveField, psi: WaveField, n_steps: int = 512) -> float:
    """Length of the straight chart curve phi(t) = t phi(1), trapezoid rule.

    Converges (2nd order in 1/n_steps) to arccos s_a.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    phi1 = chart_coordinate(psi0, psi)
    g = psi0.grid

    def integrand(t: float) -> float:
        phi = t * phi1
        dphi = phi1
        nrm2 = float(integrate(np.abs(phi) ** 2, g))
        ip = complex(integrate(np.conj(phi) * dphi, g))
        dnrm2 = float(integrate(np.abs(dphi) ** 2, g))
        val = dnrm2 + ip.real**2 / max(1.0 - nrm2, 1e-300) - ip.imag**2
        return float(np.sqrt(max(val, 0.0)))

    ts = np.linspace(0.0, 1.0, n_steps + 1)
    vals = np.array([integrand(t) for t in ts])
    return float(np.trapezoid(vals, ts))


@dataclass(frozen=True)
class BoostCheckReport:
    max_deviation_eps: float
    max_deviation_u: float

    @property
    def max_deviation(self) -> float:
        return max(self.max_deviation_eps, self.max_deviation_u)


def cotensor_boost_check(p: AbsoluteProcess, v: float) -> BoostCheckReport:
    """Verify the two-cotensor boost rule reproduces the (eps, u) shifts.

    Algebraic identity; deviations are pure round-off.
    """
    z = CotensorW(eps=p.eps, u=p.u).two_cotensor()
    c00, c10, c01, c11 = z[(0, 0)], z[(1, 0)], z[(0, 1)], z[(1, 1)]
    c00p = c00 + v * (c01 + c10) + v * v * c11
    c10p = c10 + v * c11
    eps_expected = p.eps + v * p.u - 0.5 * v * v
    u_expected = p.u - v
    dev_eps = float(np.max(np.abs(c00p - eps_expected)))
    dev_u = float(np.max(np.abs(2.0 * c10p - u_expected)))
    return BoostCheckReport(max_deviation_eps=dev_eps, max_deviation_u=dev_u)
