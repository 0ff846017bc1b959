"""Truncated Fock-space states, canonical constructors and overlap primitives."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Probability allowed to fall outside the truncation window before a
# constructor refuses to build the state.
TAIL_GATE = 1e-9


class TruncationError(ValueError):
    """The requested dimension leaves more than TAIL_GATE probability outside."""


class UndefinedQuantityError(ValueError):
    """A requested statistic is undefined for the given input (e.g. g2 of vacuum)."""


@dataclass(frozen=True, eq=False)
class FockState:
    """Single-mode pure state sum_n amplitudes[n] |n> over n = 0..dim-1.

    ``tail_mass`` is the probability lost to truncation before renormalization,
    kept so downstream consumers can gate on truncation quality.
    """

    amplitudes: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("amplitudes must be a non-empty 1d vector")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> "FockState":
        n2 = self.norm_squared()
        if n2 <= 0.0:
            raise ValueError("cannot normalize a zero vector")
        return FockState(self.amplitudes / math.sqrt(n2), self.tail_mass)


@dataclass(frozen=True, eq=False)
class PhotonNumberDistribution:
    """Probability vector over photon number."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("probabilities must be a non-empty 1d vector")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {p.sum():.12g}, expected 1")
        object.__setattr__(self, "probabilities", np.clip(p, 0.0, 1.0))

    @property
    def size(self) -> int:
        return self.probabilities.size


def default_dim(alpha: complex, k: int = 0) -> int:
    """Truncation large enough for a mean photon number |alpha|^2 plus k extra photons.

    Keeps the Poisson tail below TAIL_GATE for every parameter set used in
    practice (|alpha| <= 2.7, k <= 6), with a floor of 25.
    """
    u = abs(alpha) ** 2
    return max(25, math.ceil(u + 8.0 * math.sqrt(u + 1.0) + k + 5))


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Unnormalized-in-window coherent amplitudes e^{-|a|^2/2} a^n / sqrt(n!)."""
    amps = np.zeros(dim, dtype=complex)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps


def make_coherent(alpha: complex, dim: int | None = None,
                  allow_tail: bool = False) -> FockState:
    """Coherent state |alpha> truncated to ``dim`` levels.

    Raises TruncationError when the Poisson tail beyond the window exceeds
    TAIL_GATE, unless ``allow_tail`` is set.
    """
    if dim is None:
        dim = default_dim(alpha)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    amps = coherent_amplitudes(alpha, dim)
    tail = max(0.0, 1.0 - float(np.vdot(amps, amps).real))
    if tail > TAIL_GATE and not allow_tail:
        raise TruncationError(
            f"coherent tail mass {tail:.3e} exceeds {TAIL_GATE:.0e} at dim={dim}; "
            f"try dim={default_dim(alpha)}")
    state = FockState(amps, tail)
    return state.normalized()


def make_fock(k: int, dim: int) -> FockState:
    """Number state |k>."""
    if not 0 <= k < dim:
        raise ValueError(f"photon number k={k} out of range for dim={dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[k] = 1.0
    return FockState(amps, 0.0)


def _css_terms(alpha: float, beta: float, dim: int, displaced_cat: bool):
    """Raw CSS coefficients before normalization.

    The literal expansion uses ((beta+alpha)^n + (beta-alpha)^n)/sqrt(n!),
    which weights the two superposed branches without their coherent-state
    Gaussian factors.  With ``displaced_cat`` the branches are true displaced
    coherent states D(beta)(|alpha> + |-alpha>), i.e. each branch carries
    e^{-(beta+-alpha)^2/2}.
    """
    p = beta + alpha
    q = beta - alpha
    wp = math.exp(-p * p / 2.0) if displaced_cat else 1.0
    wq = math.exp(-q * q / 2.0) if displaced_cat else 1.0
    coeffs = np.zeros(dim, dtype=complex)
    tp, tq = wp, wq          # running  w * x^n / sqrt(n!)
    coeffs[0] = tp + tq
    for n in range(1, dim):
        tp *= p / math.sqrt(n)
        tq *= q / math.sqrt(n)
        coeffs[n] = tp + tq
    # Total squared norm of the untruncated series, for the tail estimate:
    # sum_n |w_p p^n + w_q q^n|^2 / n! = w_p^2 e^{p^2} + w_q^2 e^{q^2} + 2 w_p w_q e^{pq}
    total = (wp * wp * math.exp(p * p) + wq * wq * math.exp(q * q)
             + 2.0 * wp * wq * math.exp(p * q))
    return coeffs, total


def make_css(alpha: float, beta: float, dim: int | None = None,
             displaced_cat: bool = False, allow_tail: bool = False) -> FockState:
    """Superposition of two coherent-state branches beta+alpha and beta-alpha.

    Default is the literal Fock expansion ((beta+alpha)^n + (beta-alpha)^n)/sqrt(n!);
    ``displaced_cat=True`` builds the standard displaced even cat instead.  Both
    are kept because the two conventions differ and downstream comparisons test
    against each.
    """
    if dim is None:
        dim = default_dim(abs(beta) + abs(alpha))
    if dim < 1:
        raise ValueError("dim must be >= 1")
    coeffs, total = _css_terms(float(alpha), float(beta), dim, displaced_cat)
    inside = float(np.vdot(coeffs, coeffs).real)
    tail = max(0.0, 1.0 - inside / total) if total > 0 else 0.0
    if tail > TAIL_GATE and not allow_tail:
        raise TruncationError(
            f"CSS tail mass {tail:.3e} exceeds {TAIL_GATE:.0e} at dim={dim}")
    return FockState(coeffs, tail).normalized()


def inner_product(a: FockState, b: FockState) -> complex:
    """<a|b> with zero padding when dimensions differ."""
    n = min(a.dim, b.dim)
    # Amplitudes beyond the shorter window pair with zeros and drop out.
    return complex(np.vdot(a.amplitudes[:n], b.amplitudes[:n]))


def fidelity(a: FockState, b: FockState) -> float:
    """|<a|b>|^2 for pure states."""
    return abs(inner_product(a, b)) ** 2


def number_distribution(s: FockState) -> PhotonNumberDistribution:
    p = np.abs(s.amplitudes) ** 2
    total = p.sum()
    if abs(total - 1.0) > 1e-10:
        raise ValueError("state must be normalized before taking its distribution")
    return PhotonNumberDistribution(p / total)


def distribution_moment(d: PhotonNumberDistribution, order: int) -> float:
    """First moment <n> or second factorial moment <n(n-1)>."""
    n = np.arange(d.size, dtype=float)
    if order == 1:
        return float(np.dot(d.probabilities, n))
    if order == 2:
        return float(np.dot(d.probabilities, n * (n - 1.0)))
    raise ValueError(f"unsupported moment order {order}; expected 1 or 2")


def _fmt17(x: float) -> str:
    """Scientific notation with 17 significant digits, round-trippable."""
    return f"{x:.16e}"


def state_to_json(s: FockState) -> str:
    """Serialize to the fixed schema {dim, amplitudes: [[re, im], ...], tail_mass}."""
    rows = ",".join(
        f"[{_fmt17(a.real)},{_fmt17(a.imag)}]" for a in s.amplitudes)
    return (f'{{"dim": {s.dim}, "amplitudes": [{rows}], '
            f'"tail_mass": {_fmt17(s.tail_mass)}}}')


def state_from_json(text: str) -> FockState:
    import json

    doc = json.loads(text)
    amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
    if len(amps) != doc["dim"]:
        raise ValueError("dim does not match amplitude count")
    return FockState(amps, float(doc.get("tail_mass", 0.0)))
