"""Cylindrically symmetric stationary model with a finite potential wall.

Dimensionless units hbar = m = e = 1.  Inside a cylinder of radius b there is
a uniform magnetic field B0 and a scalar potential phi(r) = phi0 - B0^2 r^2/8;
outside both vanish.  The velocity field is purely tangential,
u_theta = B0 r/2 + C1/r inside and C2/r outside with C2 = C1 + B0 b^2/2.  The
radial amplitude solves a modified Bessel equation inside (regular branch
I_mu(kappa r), mu = |C1|) and a Bessel equation outside
(C5 J_nu(lambda r) + C6 Y_nu(lambda r), nu = |C2|); the system is closed by a
hard outer box R(r_out) = 0.  Matching R and R' at b makes the energy E an
eigenvalue, found by bisection on the 3x3 matching determinant.  As
phi0 -> infinity the interior density vanishes while u_theta, independent of
phi0, stays finite and nonzero inside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import ive

from .errors import BranchNotFoundError, DomainError
from .numerics import bessel, bessel_derivative

_bessel_arr = np.vectorize(bessel, otypes=[float])

N_SCAN = 800


@dataclass(frozen=True)
class ABConfig:
    b: float
    B0: float = 0.0
    C1: float = 0.0
    uz: float = 0.0
    phi0: float = 10.0
    r_out: float = 5.0
    n_r: int = 2048

    def __post_init__(self):
        if self.b <= 0:
            raise ValueError("cylinder radius b must be positive")
        if self.r_out < 3.0 * self.b:
            raise ValueError("r_out must be at least 3*b")
        if self.phi0 < 0:
            raise ValueError("phi0 must be nonnegative")
        if self.n_r < 64:
            raise ValueError("n_r must be at least 64")

    @property
    def c2(self) -> float:
        return self.C1 + 0.5 * self.B0 * self.b**2


def u_theta_profile(cfg: ABConfig, r):
    """Analytic piecewise tangential velocity; independent of phi0."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("u_theta is defined for r > 0 only")
    inside = 0.5 * cfg.B0 * r + cfg.C1 / r
    outside = cfg.c2 / r
    out = np.where(r < cfg.b, inside, outside)
    return float(out) if out.ndim == 0 else out


def _kappa(cfg: ABConfig, e: float) -> float:
    arg = cfg.phi0 - e + 0.5 * cfg.uz**2 + 0.5 * cfg.B0 * cfg.C1
    if arg <= 0:
        raise DomainError(
            "phi0 - E + uz^2/2 + B0 C1/2 <= 0: interior is not evanescent"
        )
    return float(np.sqrt(2.0 * arg))


def _lambda(cfg: ABConfig, e: float) -> float:
    arg = e - 0.5 * cfg.uz**2
    if arg <= 0:
        raise DomainError("E <= uz^2/2: exterior wavenumber not real")
    return float(np.sqrt(2.0 * arg))


def _i_log_derivative(order: float, x: float) -> float:
    """kappa-free part of I'_mu(x)/I_mu(x), computed from scaled functions
    so it stays finite for large x."""
    if order == 0.0:
        return float(ive(1.0, x) / ive(0.0, x))
    return float(
        (ive(order - 1.0, x) + ive(order + 1.0, x)) / (2.0 * ive(order, x))
    )


def _matching_matrix(cfg: ABConfig, e: float) -> np.ndarray:
    """Matching of R and R' at b plus R(r_out)=0 for the scaled unknowns
    (C3*I_mu(kappa b), C5, C6)."""
    mu, nu = abs(cfg.C1), abs(cfg.c2)
    kap, lam = _kappa(cfg, e), _lambda(cfg, e)
    jb = bessel("J", nu, lam * cfg.b)
    yb = bessel("Y", nu, lam * cfg.b)
    djb = bessel_derivative("J", nu, lam * cfg.b)
    dyb = bessel_derivative("Y", nu, lam * cfg.b)
    jo = bessel("J", nu, lam * cfg.r_out)
    yo = bessel("Y", nu, lam * cfg.r_out)
    zeta = kap * _i_log_derivative(mu, kap * cfg.b)
    return np.array(
        [
            [1.0, -jb, -yb],
            [zeta, -lam * djb, -lam * dyb],
            [0.0, jo, yo],
        ]
    )


def _det(cfg: ABConfig, e: float) -> float:
    return float(np.linalg.det(_matching_matrix(cfg, e)))


@dataclass
class RadialABSolution:
    E: float
    kappa: float
    lam: float
    mu: float
    nu: float
    C3: float
    C5: float
    C6: float
    r: np.ndarray
    R: np.ndarray
    u_theta: np.ndarray
    interior_mass: float
    config: ABConfig = field(repr=False)

    def interior_amplitude(self, r) -> np.ndarray:
        """R(r) for r <= b via scaled modified Bessel functions (no overflow
        even for very high walls)."""
        r = np.asarray(r, dtype=float)
        cfg = self.config
        scale = self.C5 * bessel("J", self.nu, self.lam * cfg.b) + self.C6 * bessel(
            "Y", self.nu, self.lam * cfg.b
        )
        ratio = ive(self.mu, self.kappa * r) / ive(self.mu, self.kappa * cfg.b)
        return scale * ratio * np.exp(self.kappa * (r - cfg.b))


def solve_radial(cfg: ABConfig, branch: int = 0) -> RadialABSolution:
    """Find the branch-th energy eigenvalue and build the matched solution."""
    if branch < 0:
        raise ValueError("branch must be nonnegative")
    e_lo = 0.5 * cfg.uz**2
    e_hi = e_lo + cfg.phi0 + 0.5 * cfg.B0 * cfg.C1
    if e_hi <= e_lo:
        raise DomainError("no energy window: phi0 + B0 C1/2 must be positive")
    span = e_hi - e_lo
    # scan uniformly in lambda: exterior roots are spaced ~ pi/(r_out - b)
    # there, while an E-uniform scan over a tall-wall window skips them
    lam_max = np.sqrt(2.0 * span)
    n_scan = max(N_SCAN, int(16.0 * lam_max * (cfg.r_out - cfg.b) / np.pi))
    lams = np.linspace(1e-6 * lam_max, lam_max * (1.0 - 1e-9), n_scan)
    es = e_lo + 0.5 * lams**2
    dets = np.array([_det(cfg, e) for e in es])
    roots = []
    for i in range(len(es) - 1):
        if dets[i] == 0.0:
            roots.append(float(es[i]))
        elif dets[i] * dets[i + 1] < 0:
            roots.append(float(brentq(lambda e: _det(cfg, e), es[i], es[i + 1],
                                      xtol=1e-13, rtol=1e-15)))
        if len(roots) > branch:
            break
    if len(roots) <= branch:
        raise BranchNotFoundError(
            f"only {len(roots)} sign changes in the energy window; "
            f"branch {branch} not found"
        )
    e = roots[branch]
    kap, lam = _kappa(cfg, e), _lambda(cfg, e)
    mu, nu = abs(cfg.C1), abs(cfg.c2)
    m = _matching_matrix(cfg, e)
    _, _, vh = np.linalg.svd(m)
    a_b, c5, c6 = vh[-1]  # null vector: (C3*I_mu(kappa b), C5, C6)
    # i_b may underflow to zero for very high walls; the interior amplitude
    # is then evaluated through scaled ratios, never through C3 itself
    i_b = ive(mu, kap * cfg.b) * np.exp(kap * cfg.b)
    c3 = a_b / i_b if np.isfinite(i_b) and i_b > 0 else 0.0

    dr = cfg.r_out / cfg.n_r
    r = (np.arange(cfg.n_r) + 0.5) * dr
    inner = r < cfg.b
    sol = RadialABSolution(
        E=e, kappa=kap, lam=lam, mu=mu, nu=nu, C3=float(c3), C5=float(c5),
        C6=float(c6), r=r, R=np.zeros_like(r), u_theta=u_theta_profile(cfg, r),
        interior_mass=0.0, config=cfg,
    )
    big = np.zeros_like(r)
    big[~inner] = c5 * _bessel_arr("J", nu, lam * r[~inner]) + c6 * _bessel_arr(
        "Y", nu, lam * r[~inner]
    )
    big[inner] = sol.interior_amplitude(r[inner])
    norm = dr * np.sum(big**2 * r)
    big /= np.sqrt(norm)
    sol.R = big
    sol.C3 /= np.sqrt(norm)
    sol.C5 = float(c5 / np.sqrt(norm))
    sol.C6 = float(c6 / np.sqrt(norm))
    sol.interior_mass = float(dr * np.sum(big[inner] ** 2 * r[inner]))
    return sol


@dataclass(frozen=True)
class WallSweepReport:
    phi0: np.ndarray
    energy: np.ndarray
    kappa: np.ndarray
    interior_mass: np.ndarray
    max_interior_R: np.ndarray
    u_theta_half_b: np.ndarray  # analytic, identical across the ladder
    decay_exponent: float  # slope of log(interior_mass) vs log(kappa)


def wall_sweep(cfg: ABConfig, phi0_ladder, branch: int = 0) -> WallSweepReport:
    """Solve along an increasing phi0 ladder; interior u_theta stays fixed
    while the interior mass decays with the wall height."""
    phi0s = [float(p) for p in phi0_ladder]
    if len(phi0s) < 4 or any(b <= a for a, b in zip(phi0s, phi0s[1:])):
        raise ValueError("phi0 ladder must be increasing with at least 4 points")
    rows = []
    for p0 in phi0s:
        c = ABConfig(b=cfg.b, B0=cfg.B0, C1=cfg.C1, uz=cfg.uz, phi0=p0,
                     r_out=cfg.r_out, n_r=cfg.n_r)
        sol = solve_radial(c, branch)
        inner = sol.r < c.b
        rows.append(
            (p0, sol.E, sol.kappa, sol.interior_mass,
             float(np.max(np.abs(sol.R[inner]))),
             float(u_theta_profile(c, 0.5 * c.b)))
        )
    arr = np.array(rows)
    exponent = float(np.polyfit(np.log(arr[:, 2]), np.log(arr[:, 3]), 1)[0])
    return WallSweepReport(
        phi0=arr[:, 0], energy=arr[:, 1], kappa=arr[:, 2],
        interior_mass=arr[:, 3], max_interior_R=arr[:, 4],
        u_theta_half_b=arr[:, 5], decay_exponent=exponent,
    )
