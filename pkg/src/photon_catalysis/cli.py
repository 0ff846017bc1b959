"""Command-line front end emitting states, sweeps, Wigner grids, joint click
statistics, and reflectivity fits as CSV/JSON/PGM.

Exit codes: 0 success, 2 usage or validation failure (including the
truncation gate, which means a user-chosen --dim was too small), 3 numerical
gate failure (pole in a closed form, zero-probability herald, overflow).
Identical flags produce byte-identical output files.
"""

from __future__ import annotations

import argparse
import math
import sys

from .analysis import (DomainError, PoleError, WignerGridSpec, g2,
                       quadrature_variances, wigner, wigner_negativity,
                       wigner_to_csv, wigner_to_pgm, VACUUM_VARIANCE)
from .catalysis import (BeamSplitter, CatalysisConfig, pcoc_oracle, pcoc_state)
from .design import (Axis, DesignProblem, SweepSpec, optimize_reflectivities,
                     optimize_result_to_json, sweep, METRICS)
from .detector import (JointClickDistribution, TMDConfig,
                       joint_output_distribution)
from .fock import (FockState, TruncationError, UndefinedQuantityError,
                   number_distribution, state_from_json, state_to_json)

_FMT9 = "{:.8e}"


def _die(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _parse_scan(text: str) -> list[float]:
    """Either a single value "0.5" or an inclusive scan "lo:hi:steps"."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"scan spec {text!r}; expected value or lo:hi:steps")
    lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if steps < 2:
        raise ValueError("scan needs at least 2 steps")
    return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]


def _parse_grid(text: str) -> WignerGridSpec:
    """Either a point count "201" or an extent spec "min:max:n"."""
    parts = text.split(":")
    if len(parts) == 1:
        n = int(parts[0])
        return WignerGridSpec(nx=n, np=n)
    if len(parts) != 3:
        raise ValueError(f"grid spec {text!r}; expected n or min:max:n")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    return WignerGridSpec(x_min=lo, x_max=hi, p_min=lo, p_max=hi, nx=n, np=n)


def _build_state(alpha: float, r2: float, k: int,
                 dim: int | None) -> tuple[FockState, float]:
    cfg = CatalysisConfig(alpha, BeamSplitter(r2), k, dim)
    return pcoc_state(cfg) if k == 1 else pcoc_oracle(cfg)


def _write_text(path: str, text: str):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def cmd_state(args) -> int:
    state, prob = _build_state(args.alpha, args.r2, args.k, args.dim)
    stats = quadrature_variances(state)
    g2_val = g2(number_distribution(state))
    min_w, _ = wigner_negativity(wigner(state))
    for name, value in (("success_prob", prob),
                        ("var_x_db", stats.squeeze_db_x),
                        ("var_p_db", stats.squeeze_db_p),
                        ("g2", g2_val),
                        ("wigner_min", min_w)):
        print(f"{name} = {_FMT9.format(value)}")
    if args.out:
        _write_text(args.out, state_to_json(state))
    return 0


def cmd_sweep(args) -> int:
    axes = []
    for spec_text in args.axis:
        parts = spec_text.split(":")
        if len(parts) != 4:
            raise ValueError(f"axis spec {spec_text!r}; expected name:lo:hi:steps")
        axes.append(Axis(parts[0], float(parts[1]), float(parts[2]), int(parts[3])))
    target = state_from_json(_read_file(args.target)) if args.target else None
    spec = SweepSpec(tuple(axes), args.metric, alpha=args.alpha, r2=args.r2,
                     k=args.k, target=target)
    rows = sweep(spec)
    header = ",".join([a.name for a in axes] + [args.metric, "success_prob"])
    lines = [header]
    n_axes = len(axes)
    for row in rows:
        cells = []
        for i, v in enumerate(row):
            if i < n_axes and axes[i].name == "k":
                cells.append(str(int(v)))
            else:
                cells.append(_FMT9.format(v))
        lines.append(",".join(cells))
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_wigner(args) -> int:
    state, _ = _build_state(args.alpha, args.r2, args.k, args.dim)
    grid = wigner(state, _parse_grid(args.grid))
    if grid.coverage_warning:
        print(f"warning: {grid.coverage_warning}", file=sys.stderr)
    print(f"integral = {_FMT9.format(grid.integral())}")
    if args.format == "csv":
        _write_text(args.out, wigner_to_csv(grid))
    else:
        with open(args.out, "wb") as fh:
            fh.write(wigner_to_pgm(grid))
    return 0


def cmd_joint(args) -> int:
    alpha = math.sqrt(args.alpha2)
    lines = ["r2,i,j,p"]
    for r2 in _parse_scan(args.r2):
        cfg = CatalysisConfig(alpha, BeamSplitter(r2), args.k, args.dim)
        joint = joint_output_distribution(cfg, TMDConfig(args.eta1, args.bins),
                                          TMDConfig(args.eta2, args.bins))
        r2_cell = _FMT9.format(r2)
        p = joint.probabilities
        for i in range(p.shape[0]):
            for j in range(p.shape[1]):
                lines.append(f"{r2_cell},{i},{j},{_FMT9.format(p[i, j])}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_optimize(args) -> int:
    target = state_from_json(_read_file(args.target))
    ks = tuple(int(s) for s in args.k.split(","))
    alpha_bounds = None
    if args.alpha_bounds:
        lo, hi = (float(s) for s in args.alpha_bounds.split(":"))
        alpha_bounds = (lo, hi)
    problem = DesignProblem(target=target, stages=args.stages, ks=ks,
                            alpha=args.alpha, tol=args.tol,
                            alpha_bounds=alpha_bounds)
    result = optimize_reflectivities(problem)
    text = optimize_result_to_json(result, include_alpha=alpha_bounds is not None)
    if args.out:
        _write_text(args.out, text + "\n")
    print(text)
    return 0


def _read_file(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc.strerror}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catalysis",
        description="Heralded photon catalysis: states, metrics, detector "
                    "statistics, and reflectivity design.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", help="conditioned state JSON plus metric summary")
    p.add_argument("--alpha", type=float, required=True, help="coherent amplitude")
    p.add_argument("--r2", type=float, required=True, help="intensity reflectivity")
    p.add_argument("--k", type=int, default=1, help="catalyst photon number")
    p.add_argument("--dim", type=int, default=None, help="truncation dimension")
    p.add_argument("--out", default=None, help="state JSON path")
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("sweep", help="metric table over parameter axes")
    p.add_argument("--metric", required=True, choices=METRICS)
    p.add_argument("--axis", action="append", required=True,
                   metavar="NAME:LO:HI:STEPS",
                   help="swept axis (r2, alpha, or k); repeatable, row-major")
    p.add_argument("--alpha", type=float, default=1.0, help="base value when not swept")
    p.add_argument("--r2", type=float, default=0.5, help="base value when not swept")
    p.add_argument("--k", type=int, default=1, help="base value when not swept")
    p.add_argument("--target", default=None,
                   help="state JSON for the fidelity_to_target metric")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("wigner", help="Wigner function grid as CSV or PGM")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--r2", type=float, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--grid", default="201", metavar="N|MIN:MAX:N",
                   help="points per axis, optionally with extent (default 201 over [-5,5])")
    p.add_argument("--format", choices=("csv", "pgm"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("joint", help="joint click distribution over an r2 scan")
    p.add_argument("--alpha2", type=float, required=True, help="mean photon number")
    p.add_argument("--r2", required=True, metavar="VALUE|LO:HI:STEPS")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--eta1", type=float, default=1.0, help="signal-arm efficiency")
    p.add_argument("--eta2", type=float, default=1.0, help="catalyst-arm efficiency")
    p.add_argument("--bins", type=int, default=8)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=cmd_joint)

    p = sub.add_parser("optimize", help="stage reflectivities maximizing target fidelity")
    p.add_argument("--target", required=True, help="target state JSON path")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--k", required=True, metavar="K1,K2,...",
                   help="catalyst photon number per stage")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--alpha-bounds", default=None, metavar="LO:HI",
                   help="optimize alpha within these bounds instead of fixing it")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", default=None, help="result JSON path")
    p.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TruncationError as exc:
        return _die(f"truncation gate: {exc}", 2)
    except (PoleError, UndefinedQuantityError, ArithmeticError,
            OverflowError) as exc:
        return _die(f"numerical gate: {exc}", 3)
    except (ValueError, DomainError, OSError) as exc:
        return _die(str(exc), 2)


if __name__ == "__main__":
    sys.exit(main())
