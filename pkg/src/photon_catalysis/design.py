"""Parameter sweeps and derivative-free inverse design of stage reflectivities."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import (quadrature_variances, variance_p_analytic,
                       variance_x_analytic, g2, wigner, wigner_negativity,
                       VACUUM_VARIANCE)
from .catalysis import (BeamSplitter, CatalysisConfig, IteratedConfig,
                        iterated_pcoc, pcoc_oracle, pcoc_state,
                        success_probability_analytic)
from .fock import FockState, fidelity, number_distribution

__all__ = [
    "Axis", "SweepSpec", "DesignProblem", "OptimizeResult",
    "sweep", "optimize_reflectivities", "optimize_result_to_json",
    "worker_count", "METRICS",
]

METRICS = ("var_x_db", "var_p_db", "success_prob", "g2",
           "fidelity_to_target", "wigner_min")

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def worker_count() -> int:
    """Worker cap for internal parallelism, from CATALYSIS_THREADS."""
    raw = os.environ.get("CATALYSIS_THREADS", "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"CATALYSIS_THREADS={raw!r} is not an integer")
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Axis:
    """One swept parameter; values laid out inclusively from lo to hi."""

    name: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if self.name not in ("r2", "alpha", "k"):
            raise ValueError(f"unknown sweep parameter {self.name!r}")
        if self.steps < 2:
            raise ValueError("each axis needs at least 2 steps")

    def values(self) -> np.ndarray:
        vals = np.linspace(self.lo, self.hi, self.steps)
        if self.name == "k":
            vals = np.round(vals)
        return vals


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...]
    metric: str
    alpha: float = 1.0
    r2: float = 0.5
    k: int = 1
    target: FockState | None = None

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise ValueError("at least one axis required")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}; expected one of {METRICS}")
        if self.metric == "fidelity_to_target" and self.target is None:
            raise ValueError("fidelity_to_target requires a target state")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate sweep axes")


def _evaluate_point(spec: SweepSpec, params: dict) -> tuple[float, float]:
    """(metric value, success probability) at one grid point."""
    alpha = params.get("alpha", spec.alpha)
    r2 = params.get("r2", spec.r2)
    k = int(params.get("k", spec.k))
    bs = BeamSplitter(r2)

    if spec.metric in ("var_x_db", "var_p_db") and k == 1:
        # closed-form path, no state construction
        prob = success_probability_analytic(alpha, bs)
        var = variance_x_analytic(alpha, r2) if spec.metric == "var_x_db" \
            else variance_p_analytic(alpha, r2)
        return 10.0 * math.log10(var / VACUUM_VARIANCE), prob
    if spec.metric == "success_prob" and k == 1:
        prob = success_probability_analytic(alpha, bs)
        return prob, prob

    cfg = CatalysisConfig(alpha, bs, k)
    state, prob = pcoc_state(cfg) if k == 1 else pcoc_oracle(cfg)
    if spec.metric in ("var_x_db", "var_p_db"):
        stats = quadrature_variances(state)
        var = stats.var_x if spec.metric == "var_x_db" else stats.var_p
        return 10.0 * math.log10(var / VACUUM_VARIANCE), prob
    if spec.metric == "success_prob":
        return prob, prob
    if spec.metric == "g2":
        return g2(number_distribution(state)), prob
    if spec.metric == "fidelity_to_target":
        return fidelity(state, spec.target), prob
    if spec.metric == "wigner_min":
        min_w, _ = wigner_negativity(wigner(state))
        return min_w, prob
    raise AssertionError(spec.metric)


def sweep(spec: SweepSpec) -> list[tuple]:
    """Row-major table over the declared axes: (*axis values, metric, success_prob).

    Grid points are independent and may evaluate concurrently; the returned
    row order depends only on the axis declaration, never on scheduling.
    """
    grids = [a.values() for a in spec.axes]
    mesh = np.meshgrid(*grids, indexing="ij")
    points = [dict(zip((a.name for a in spec.axes), combo))
              for combo in zip(*(m.ravel() for m in mesh))]

    workers = worker_count()
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda p: _evaluate_point(spec, p), points))
    else:
        results = [_evaluate_point(spec, p) for p in points]

    rows = []
    for p, (value, prob) in zip(points, results):
        rows.append(tuple(p[a.name] for a in spec.axes) + (value, prob))
    return rows


@dataclass(frozen=True)
class DesignProblem:
    """Find stage reflectivities maximizing fidelity to a target state."""

    target: FockState
    stages: int
    ks: tuple[int, ...]
    alpha: float
    bounds: tuple[tuple[float, float], ...] = ()
    tol: float = 1e-6
    alpha_bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if self.stages < 1:
            raise ValueError("need at least one stage")
        if len(self.ks) != self.stages:
            raise ValueError("one catalyst photon number per stage required")
        bounds = self.bounds or tuple((0.0, 1.0) for _ in range(self.stages))
        if len(bounds) != self.stages:
            raise ValueError("one bounds pair per stage required")
        for lo, hi in bounds:
            if not (0.0 <= lo < hi <= 1.0):
                raise ValueError(f"stage bounds ({lo}, {hi}) invalid")
        object.__setattr__(self, "bounds", tuple(bounds))


@dataclass(frozen=True)
class OptimizeResult:
    stages: tuple[float, ...]
    alpha: float
    fidelity: float
    success_prob: float
    evaluations: int
    stagnated: bool
    local_optima: tuple[tuple[tuple[float, ...], float], ...]


def _golden_max(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Golden-section maximization on [lo, hi] to parameter tolerance tol."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    mid = 0.5 * (a + b)
    return mid, f(mid)


def _line_max(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Coarse scan for a bracket, then golden-section refinement.

    The fidelity landscape has interference zeros, so a single golden section
    over the full interval is not safe; 33 stratified probes locate the basin.
    """
    xs = np.linspace(lo, hi, 33)
    vals = [f(x) for x in xs]
    i = int(np.argmax(vals))
    a = xs[max(0, i - 1)]
    b = xs[min(len(xs) - 1, i + 1)]
    if b <= a:
        return float(xs[i]), float(vals[i])
    x, v = _golden_max(f, float(a), float(b), tol)
    if v < vals[i]:
        return float(xs[i]), float(vals[i])
    return x, v


def _start_points(problem: DesignProblem) -> list[list[float]]:
    """8 stratified starts; coordinate i uses a golden-ratio-shifted lattice."""
    dims = problem.stages + (1 if problem.alpha_bounds else 0)
    starts = []
    for j in range(8):
        point = []
        for i in range(dims):
            frac = ((j + 0.5) / 8.0 + i * _INV_PHI) % 1.0
            lo, hi = (problem.bounds[i] if i < problem.stages
                      else problem.alpha_bounds)
            point.append(lo + frac * (hi - lo))
        starts.append(point)
    return starts


def optimize_reflectivities(problem: DesignProblem) -> OptimizeResult:
    """Multi-start coordinate descent with golden-section line searches.

    Deterministic: the start set is fixed, coordinates cycle in declaration
    order, and iteration stops when no single-coordinate move larger than the
    tolerance improves the fidelity.
    """
    evaluations = 0

    def evaluate(coords: list[float]) -> tuple[float, float]:
        nonlocal evaluations
        evaluations += 1
        alpha = coords[problem.stages] if problem.alpha_bounds else problem.alpha
        stages = tuple((coords[i], problem.ks[i]) for i in range(problem.stages))
        state, prob = iterated_pcoc(IteratedConfig(alpha, stages))
        return fidelity(state, problem.target), prob

    def coord_bounds(i: int) -> tuple[float, float]:
        return problem.bounds[i] if i < problem.stages else problem.alpha_bounds

    dims = problem.stages + (1 if problem.alpha_bounds else 0)
    starts = _start_points(problem)
    best_initial = -1.0
    local_optima = []
    best = None  # (fidelity, success_prob, coords)

    for start in starts:
        coords = list(start)
        fid, prob = evaluate(coords)
        best_initial = max(best_initial, fid)
        improved = True
        passes = 0
        while improved and passes < 60:
            improved = False
            passes += 1
            for i in range(dims):
                lo, hi = coord_bounds(i)

                def along(x, i=i):
                    trial = list(coords)
                    trial[i] = float(x)
                    return evaluate(trial)[0]

                x_new, f_new = _line_max(along, lo, hi, problem.tol)
                if f_new > fid + 1e-13:
                    if abs(x_new - coords[i]) > problem.tol or f_new > fid + 1e-9:
                        improved = True
                    coords[i] = x_new
                    fid, prob = evaluate(coords)
        local_optima.append((tuple(coords[:problem.stages]), fid))
        if best is None or fid > best[0]:
            best = (fid, prob, list(coords))

    fid, prob, coords = best
    stagnated = fid <= best_initial + 1e-15
    alpha = coords[problem.stages] if problem.alpha_bounds else problem.alpha
    return OptimizeResult(
        stages=tuple(coords[:problem.stages]),
        alpha=float(alpha),
        fidelity=fid,
        success_prob=prob,
        evaluations=evaluations,
        stagnated=stagnated,
        local_optima=tuple(local_optima),
    )


def _fmt17(x: float) -> str:
    return f"{x:.16e}"


def optimize_result_to_json(res: OptimizeResult,
                            include_alpha: bool = False) -> str:
    stages = ",".join(_fmt17(r2) for r2 in res.stages)
    alpha_field = f'"alpha": {_fmt17(res.alpha)}, ' if include_alpha else ""
    return (f'{{"stages": [{stages}], {alpha_field}'
            f'"fidelity": {_fmt17(res.fidelity)}, '
            f'"success_prob": {_fmt17(res.success_prob)}, '
            f'"evaluations": {res.evaluations}, '
            f'"stagnated": {"true" if res.stagnated else "false"}}}')
