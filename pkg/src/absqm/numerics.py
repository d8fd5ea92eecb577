"""Uniform 1D grids, differentiation, quadrature and Bessel functions.

All physics modules share these primitives.  Grids are uniform with
midpoint sampling: the n sample points are x_min + (j + 1/2) dx,
dx = (x_max - x_min)/n, so symmetric domains have exactly symmetric
sample points and the periodic trapezoid rule reduces to dx * sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special

from .errors import DomainError, GridMismatchError, RangeError

PERIODIC = "periodic"
DIRICHLET = "dirichlet_zero"


@dataclass(frozen=True)
class Grid:
    """Uniform 1D spatial sampling."""

    x_min: float
    x_max: float
    n: int
    boundary: str = PERIODIC

    def __post_init__(self):
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.n < 8:
            raise ValueError("need at least 8 grid points")
        if self.boundary not in (PERIODIC, DIRICHLET):
            raise ValueError(f"unknown boundary mode {self.boundary!r}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n) + 0.5) * self.dx

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers for the periodic FFT representation."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)


def check_field(f: np.ndarray, g: Grid) -> np.ndarray:
    f = np.asarray(f)
    if f.shape != (g.n,):
        raise GridMismatchError(f"field of length {f.shape} on grid with n={g.n}")
    if not np.all(np.isfinite(f)):
        raise GridMismatchError("field contains non-finite values")
    return f


# 4th-order finite-difference stencils (uniform grid).  Boundary rows use
# one-sided stencils of the same order, so polynomials up to degree 4 (first
# derivative) / degree 3 (second derivative, degree 5 in the interior) are
# differentiated exactly everywhere.
_D1_INTERIOR = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D1_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_D1_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
_D2_INTERIOR = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_D2_EDGE0 = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0
_D2_EDGE1 = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0


def _fd_derivative(f: np.ndarray, dx: float, order: int) -> np.ndarray:
    n = f.size
    out = np.empty_like(f)
    if order == 1:
        core = _D1_INTERIOR
        e0, e1 = _D1_EDGE0, _D1_EDGE1
        scale = dx
    else:
        core = _D2_INTERIOR
        e0, e1 = _D2_EDGE0, _D2_EDGE1
        scale = dx * dx
    if n >= 5:
        out[2 : n - 2] = np.convolve(f, core[::-1], mode="valid")
    m = e0.size
    out[0] = e0 @ f[:m]
    out[1] = e1 @ f[:m]
    sgn = -1.0 if order == 1 else 1.0
    out[-1] = sgn * (e0 @ f[-1 : -m - 1 : -1])
    out[-2] = sgn * (e1 @ f[-1 : -m - 1 : -1])
    return out / scale


def derivative(f: np.ndarray, g: Grid, order: int = 1) -> np.ndarray:
    """Spatial derivative of a field on its grid.

    Spectral on periodic grids, 4th-order central differences (one-sided at
    the edges) on dirichlet_zero grids.
    """
    f = check_field(f, g)
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if g.boundary == PERIODIC:
        fk = np.fft.fft(f)
        if order == 1:
            dk = 1j * g.k
            # kill the unpaired Nyquist mode of the first derivative
            if g.n % 2 == 0:
                dk[g.n // 2] = 0.0
        else:
            dk = -(g.k**2)
        df = np.fft.ifft(dk * fk)
        if np.isrealobj(f):
            return df.real.copy()
        return df
    if np.iscomplexobj(f):
        return _fd_derivative(f.real, g.dx, order) + 1j * _fd_derivative(
            f.imag, g.dx, order
        )
    return _fd_derivative(f, g.dx, order)


def integrate(f: np.ndarray, g: Grid, weight: np.ndarray | None = None):
    """Quadrature of f (optionally times weight) over the grid domain.

    Midpoint/trapezoid rule dx * sum; spectrally accurate for smooth periodic
    integrands, 2nd order otherwise.
    """
    f = check_field(f, g)
    if weight is not None:
        f = f * check_field(weight, g)
    return g.dx * f.sum()


def antiderivative_periodic(f: np.ndarray, g: Grid) -> np.ndarray:
    """Spectral antiderivative on a periodic grid.

    Returns F with F' = f (spectrally) and the mean of f carried as a linear
    ramp mean(f) * x; F is only periodic when mean(f) * L is a multiple of 2pi.
    """
    f = check_field(f, g)
    mean = f.mean()
    fk = np.fft.fft(f - mean)
    with np.errstate(divide="ignore", invalid="ignore"):
        Fk = np.where(g.k != 0.0, fk / (1j * g.k), 0.0)
    Fk[0] = 0.0
    F = np.fft.ifft(Fk)
    if np.isrealobj(f):
        F = F.real
    return F + mean * g.x


_BESSEL_KINDS = {
    "J": special.jv,
    "Y": special.yv,
    "I": special.iv,
    "K": special.kv,
}

# validated accuracy envelope; outside it we refuse rather than risk silent
# inaccuracy
_BESSEL_MAX_ORDER = 150.0
_BESSEL_MAX_X = 1e4


def bessel(kind: str, order: float, x: float) -> float:
    """Bessel function of the given kind (J, Y, I, K) and real order >= 0."""
    if kind not in _BESSEL_KINDS:
        raise ValueError(f"kind must be one of {sorted(_BESSEL_KINDS)}, got {kind!r}")
    if order < 0:
        raise DomainError("order must be >= 0")
    if x < 0 or (x == 0 and kind in ("Y", "K")):
        raise DomainError(f"{kind}_nu is singular at x <= 0")
    if order > _BESSEL_MAX_ORDER or x > _BESSEL_MAX_X:
        raise RangeError(
            f"({kind}, order={order}, x={x}) outside the supported range"
        )
    # subnormal orders make the library return nan (K) or 0.0 (Y); the
    # functions are continuous in the order, so flush them to zero
    if 0.0 < order < 2.3e-308:
        order = 0.0
    val = float(_BESSEL_KINDS[kind](order, x))
    if not np.isfinite(val):
        raise RangeError(f"{kind}_{order}({x}) overflows double precision")
    return val


def bessel_derivative(kind: str, order: float, x: float) -> float:
    """d/dx of the Bessel function, via the standard recurrences."""
    if kind == "J":
        f = special.jvp
    elif kind == "Y":
        f = special.yvp
    elif kind == "I":
        f = special.ivp
    elif kind == "K":
        f = special.kvp
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if x <= 0:
        raise DomainError("derivative evaluated only for x > 0")
    if 0.0 < order < 2.3e-308:
        order = 0.0
    val = float(f(order, x))
    if not np.isfinite(val):
        raise RangeError(f"{kind}'_{order}({x}) overflows double precision")
    return val
