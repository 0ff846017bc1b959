"""Quadrature statistics, squeezing loci, g2 and Wigner functions.

Conventions fixed throughout: X = (a + a^+)/2, P = (a - a^+)/(2i), so the
vacuum variance is 1/4 and squeezing in dB is 10 log10(var / (1/4)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import (FockState, PhotonNumberDistribution, TAIL_GATE,
                   TruncationError, UndefinedQuantityError)

VACUUM_VARIANCE = 0.25


class PoleError(ArithmeticError):
    """Closed-form variance evaluated where its denominator vanishes."""


class DomainError(ValueError):
    """Locus evaluated outside the region where it is real."""


@dataclass(frozen=True)
class QuadratureStats:
    var_x: float
    var_p: float
    product: float
    squeeze_db_x: float
    squeeze_db_p: float


@dataclass(frozen=True)
class WignerGridSpec:
    """Rectangular phase-space window sampled at cell centers (midpoint rule)."""

    x_min: float = -5.0
    x_max: float = 5.0
    p_min: float = -5.0
    p_max: float = 5.0
    nx: int = 201
    np: int = 201

    def __post_init__(self):
        if self.nx < 2 or self.np < 2:
            raise ValueError("grid needs at least 2 points per axis")
        if self.x_max <= self.x_min or self.p_max <= self.p_min:
            raise ValueError("grid bounds must be increasing")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / self.np

    def x_axis(self) -> np.ndarray:
        return self.x_min + (np.arange(self.nx) + 0.5) * self.dx

    def p_axis(self) -> np.ndarray:
        return self.p_min + (np.arange(self.np) + 0.5) * self.dp


@dataclass(frozen=True, eq=False)
class WignerGrid:
    spec: WignerGridSpec
    values: np.ndarray           # indexed [ix, ip]
    coverage_warning: str | None = None

    def integral(self) -> float:
        return float(self.values.sum() * self.spec.dx * self.spec.dp)


def _ladder_moments(s: FockState) -> tuple[float, complex, complex]:
    """<n>, <a>, <a^2> from tridiagonal ladder matrix elements."""
    c = s.amplitudes
    n = np.arange(c.size, dtype=float)
    mean_n = float(np.dot(np.abs(c) ** 2, n))
    a1 = complex(np.sum(np.conj(c[:-1]) * c[1:] * np.sqrt(n[1:]))) if c.size > 1 else 0.0
    a2 = complex(np.sum(np.conj(c[:-2]) * c[2:] * np.sqrt(n[1:-1] * n[2:]))) \
        if c.size > 2 else 0.0
    return mean_n, a1, a2


def quadrature_variances(s: FockState) -> QuadratureStats:
    """Variances of X and P for a normalized state."""
    if s.tail_mass > TAIL_GATE:
        raise TruncationError(
            f"tail mass {s.tail_mass:.3e} too large for reliable variances")
    if abs(s.norm_squared() - 1.0) > 1e-10:
        raise ValueError("state must be normalized")
    mean_n, a1, a2 = _ladder_moments(s)
    mean_x = a1.real
    mean_p = a1.imag
    var_x = (1.0 + 2.0 * mean_n + 2.0 * a2.real) / 4.0 - mean_x ** 2
    var_p = (1.0 + 2.0 * mean_n - 2.0 * a2.real) / 4.0 - mean_p ** 2
    return QuadratureStats(
        var_x=var_x, var_p=var_p, product=var_x * var_p,
        squeeze_db_x=10.0 * math.log10(var_x / VACUUM_VARIANCE),
        squeeze_db_p=10.0 * math.log10(var_p / VACUUM_VARIANCE))


def _denominator(u: float, x: float) -> float:
    return 1.0 - x * (1.0 + u * (2.0 - x * (3.0 + (1.0 - x) * u)))


def variance_x_analytic(alpha: float, r2: float) -> float:
    """Closed-form X variance of the single-photon-catalyst output."""
    u = abs(alpha) ** 2
    x = r2
    den = _denominator(u, x)
    if abs(den) < 1e-14:
        raise PoleError(
            f"variance denominator vanishes at alpha={alpha}, r2={r2} "
            "(herald probability is zero there)")
    omx = 1.0 - x
    num = (omx ** 2
           - 4.0 * x * omx ** 2 * u
           + 3.0 * x ** 2 * (2.0 - 4.0 * x + 3.0 * x ** 2) * u ** 2
           - 4.0 * x ** 3 * omx ** 2 * u ** 3
           + x ** 4 * omx ** 2 * u ** 4)
    return num / (4.0 * den ** 2)


def variance_p_analytic(alpha: float, r2: float) -> float:
    """Closed-form P variance of the single-photon-catalyst output."""
    u = abs(alpha) ** 2
    x = r2
    den = _denominator(u, x)
    if abs(den) < 1e-14:
        raise PoleError(
            f"variance denominator vanishes at alpha={alpha}, r2={r2} "
            "(herald probability is zero there)")
    return 0.25 + x * x * u / (2.0 * den)


def locus_alpha_min(r2: float) -> tuple[float, float]:
    """The two alpha branches where the X variance reaches its global minimum 3/16.

    Both branches read sqrt(((2 + r2) +- sqrt(3 (4 - r2) r2)) / (2 r2 (1 - r2)))
    with the reflectivity entering as intensity.  The radicand identity
    (2 + r2)^2 - 3 (4 - r2) r2 = 4 (1 - r2)^2 >= 0 keeps the lower branch real
    on all of (0, 1); written with the difference in the other order and the
    denominator sign flipped (as sometimes quoted) the lower branch would be
    imaginary everywhere, so this ordering is fixed by checking both branches
    against a direct numeric minimization of the variance.
    """
    x = r2
    if not 0.0 < x < 1.0:
        raise DomainError(
            f"r2={r2} outside (0, 1): both branches diverge at r2=0 and the "
            "denominator vanishes at r2=1")
    root = math.sqrt(3.0 * (4.0 - x) * x)
    den = 2.0 * x * (1.0 - x)
    low = math.sqrt(max(0.0, (2.0 + x) - root) / den)
    high = math.sqrt(((2.0 + x) + root) / den)
    return low, high


def locus_alpha_max(r2: float) -> float:
    """Alpha at which the P-variance excess peaks: |alpha|^2 r2 = 1."""
    if not 0.0 < r2 <= 1.0:
        raise DomainError(f"r2={r2} outside (0, 1]: the locus diverges at r2=0")
    return 1.0 / math.sqrt(r2)


def g2(d: PhotonNumberDistribution) -> float:
    """Second-order autocorrelation <n(n-1)> / <n>^2 at zero delay."""
    n = np.arange(d.size, dtype=float)
    m1 = float(np.dot(d.probabilities, n))
    if m1 <= 0.0:
        raise UndefinedQuantityError("g2 undefined for vacuum (zero mean)")
    m2 = float(np.dot(d.probabilities, n * (n - 1.0)))
    return m2 / m1 ** 2


def _wigner_values(psi: np.ndarray, xs: np.ndarray, ps: np.ndarray) -> np.ndarray:
    """W on the grid via a stable two-index recurrence over Fock indices.

    Expands W = (2/pi) sum_{m,n} conj(c_m) c_n (-1)^n <m|D(2 beta)|n| with
    beta = x + i p.  The off-diagonal weight Q_{n,d} = |<n+d|D|n>| obeys

        Q_{n+1,d} = ((2n+1+d-y) Q_{n,d} - sqrt(n(n+d)) Q_{n-1,d})
                    / sqrt((n+1)(n+1+d)),   y = |2 beta|^2,

    seeded by Q_{0,d} = e^{-y/2} y^{d/2}/sqrt(d!); every Q is a unitary matrix
    element, so the recurrence never leaves [-1, 1] and no factorial ratios
    appear.
    """
    n_dim = psi.size
    x_grid, p_grid = np.meshgrid(xs, ps, indexing="ij")
    gamma = 2.0 * (x_grid + 1j * p_grid)
    y = np.abs(gamma) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(y > 0.0, gamma / np.where(y > 0.0, np.abs(gamma), 1.0), 1.0)
    total = np.zeros_like(y)
    q_seed = np.exp(-y / 2.0)
    phase = np.ones_like(gamma)
    for d in range(n_dim):
        if d > 0:
            q_seed = q_seed * np.sqrt(y / d)
            phase = phase * unit
            if not np.any(q_seed):
                break
        coup = np.conj(psi[d:]) * psi[:n_dim - d]
        if not np.any(coup):
            continue
        acc = np.zeros_like(y)
        q_prev = np.zeros_like(y)
        q_cur = q_seed
        sign = 1.0
        for n in range(n_dim - d):
            if d == 0:
                acc += (sign * coup[n].real) * q_cur
            else:
                acc += sign * (coup[n] * phase).real * q_cur
            sign = -sign
            q_next = ((2 * n + 1 + d - y) * q_cur
                      - math.sqrt(n * (n + d)) * q_prev) / math.sqrt((n + 1) * (n + 1 + d))
            q_prev, q_cur = q_cur, q_next
        total += acc if d == 0 else 2.0 * acc
    return (2.0 / math.pi) * total


def wigner(s: FockState, spec: WignerGridSpec | None = None) -> WignerGrid:
    """Wigner function of a normalized state on a midpoint-rule grid.

    Normalized so that the vacuum gives W(0,0) = 2/pi and the full-plane
    integral is 1.  If the window covers less than 5 standard deviations of
    the state's quadrature spread a coverage warning is recorded.
    """
    if spec is None:
        spec = WignerGridSpec()
    if abs(s.norm_squared() - 1.0) > 1e-10:
        raise ValueError("state must be normalized")
    values = _wigner_values(s.amplitudes, spec.x_axis(), spec.p_axis())
    warning = None
    stats = quadrature_variances(s) if s.tail_mass <= TAIL_GATE else None
    if stats is not None:
        _, a1, _ = _ladder_moments(s)
        sx, sp = math.sqrt(stats.var_x), math.sqrt(stats.var_p)
        if (a1.real - 5 * sx < spec.x_min or a1.real + 5 * sx > spec.x_max
                or a1.imag - 5 * sp < spec.p_min or a1.imag + 5 * sp > spec.p_max):
            warning = "grid covers less than 5 standard deviations of the state"
    return WignerGrid(spec, values, warning)


def wigner_negativity(w: WignerGrid) -> tuple[float, float]:
    """(minimum grid value, integral of |W| over the negative region)."""
    min_value = float(w.values.min())
    neg = w.values[w.values < 0.0]
    volume = float(-neg.sum() * w.spec.dx * w.spec.dp) if neg.size else 0.0
    return min_value, volume


def _fmt9(x: float) -> str:
    return f"{x:.8e}"


def wigner_to_csv(w: WignerGrid) -> str:
    """Row-major CSV with header x,p,w; 9 significant digits."""
    xs, ps = w.spec.x_axis(), w.spec.p_axis()
    lines = ["x,p,w"]
    for i in range(w.spec.nx):
        for j in range(w.spec.np):
            lines.append(f"{_fmt9(xs[i])},{_fmt9(ps[j])},{_fmt9(w.values[i, j])}")
    return "\n".join(lines) + "\n"


def wigner_to_pgm(w: WignerGrid) -> bytes:
    """16-bit NetPBM heatmap: linear map of [min, max] onto 0..65535."""
    lo = float(w.values.min())
    hi = float(w.values.max())
    if hi > lo:
        scaled = np.round((w.values - lo) / (hi - lo) * 65535.0)
    else:
        scaled = np.zeros_like(w.values)
    img = scaled.astype(">u2")
    header = f"P5\n{w.spec.np} {w.spec.nx}\n65535\n".encode("ascii")
    return header + img.tobytes()
