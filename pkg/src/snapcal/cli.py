"""Command-line entry point: ``snapcal {run,sweep,compare-modes,detect}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

from .detect import (
    DetectionMode,
    Flagger,
    flagged_faces,
    detect_features,
    face_jumps,
    group_faces,
)
from .calibration import GapCheck
from .experiments import (
    ExperimentConfig,
    ExperimentError,
    compare_modes,
    load_config_file,
    run_experiment,
    run_sweep,
)
from .grid import project, read_matrix_csv

_CONFIG_FLAGS = {
    "case": dict(choices=["burgers", "wave", "sod", "advection"]),
    "M": dict(type=int),
    "K": dict(type=int),
    "K1": dict(type=float),
    "K2": dict(type=float),
    "C": dict(type=float),
    "N_D": dict(type=int),
    "quad_order": dict(type=int),
    "mode": dict(choices=[m.value for m in DetectionMode]),
    "flagger": dict(choices=[f.value for f in Flagger]),
    "gap_check": dict(choices=[g.value for g in GapCheck]),
    "endpoint": dict(choices=["true", "false"]),
    "exact_integration": dict(choices=["true", "false"]),
    "write_matrices": dict(choices=["true", "false"]),
    "output": dict(),
    "components": dict(help="comma-separated 0-based component indices"),
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value file; flags override it")
    for name, kw in _CONFIG_FLAGS.items():
        p.add_argument(f"--{name}", dest=name, default=argparse.SUPPRESS, **kw)


def _config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if getattr(args, "config", None):
        try:
            values.update(load_config_file(args.config))
        except OSError as exc:
            raise ExperimentError("config", str(exc)) from exc
    for name in _CONFIG_FLAGS:
        if name in args:
            values[name] = str(getattr(args, name))
    try:
        return ExperimentConfig.from_mapping(values)
    except (TypeError, ValueError) as exc:
        raise ExperimentError("config", str(exc)) from exc


def _int_list(text: str) -> list[int]:
    """``500,700,900`` or an inclusive range ``500:2900:200``."""
    try:
        if ":" in text:
            start, stop, step = (int(v) for v in text.split(":"))
            return list(range(start, stop + 1, step))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _config(args)
    runs = run_experiment(cfg)
    for r in runs:
        print(f"{cfg.case}/{r.name}: N={r.N} subset sizes {r.calibration.partition.sizes}")
    print(f"wrote {cfg.output}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _config(args)
    reports = run_sweep(cfg, args.M_list, args.C_over_M)
    for r in reports:
        print(f"M={r.M} dx={r.dx:.6g} E={r.E:.6g} E/dx={r.E / r.dx:.3f}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _config(args)
    rows = compare_modes(cfg, args.m_max)
    for r in rows:
        if r.m == 1:
            print(f"subset {r.sub_matrix_id}: Xi_1 ratio {r.ratio:.3e}")
    return 0


def cmd_detect(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if args.matrix:
        try:
            S = read_matrix_csv(args.matrix)
        except (OSError, ValueError) as exc:
            raise ExperimentError("input", str(exc)) from exc
        if not 1 <= args.column <= S.K:
            raise ExperimentError("input", f"column {args.column} outside 1..{S.K}")
        grid, s = S.grid, S.column(args.column - 1)
    else:
        case = cfg.testcase
        grid = cfg.grid()
        q = cfg.component_ids()[0]
        f = case.solution(q)
        s = project(lambda x: f(x, args.t), grid, cfg.quad_order, args.t, q)
    try:
        det = cfg.detector
        J = face_jumps(s)
        B = flagged_faces(s.values, grid, det)
        fs = detect_features(s, grid, det)
    except (ValueError, RuntimeError) as exc:
        raise ExperimentError("detection", str(exc)) from exc
    report = {
        "t": s.t,
        "threshold": det.C * grid.dx,
        "jumps": {str(e): float(j) for e, j in zip(range(2, grid.M + 1), J)} if args.jumps else None,
        "flagged_faces": [int(b) for b in B],
        "groups": [[int(b) for b in g] for g in group_faces(B)],
        "features": [
            {"location": float(z), "identifier": int(g)} for z, g in zip(fs.interior, fs.identifiers)
        ],
    }
    print(json.dumps(report, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="snapcal", description="Snapshot calibration by feature matching.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full experiment and report bundle")
    _add_config_flags(run)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="feature-location error over grid sizes")
    _add_config_flags(sweep)
    sweep.add_argument("--M_list", type=_int_list, default=_int_list("500:2900:200"))
    sweep.add_argument("--C_over_M", type=float, default=2.5e-2)
    sweep.set_defaults(func=cmd_sweep)

    cmp_ = sub.add_parser("compare-modes", help="kinks+discontinuities against discontinuities only")
    _add_config_flags(cmp_)
    cmp_.add_argument("--m_max", type=int, default=20)
    cmp_.set_defaults(func=cmd_compare)

    det = sub.add_parser("detect", help="dump the detector internals for one snapshot")
    _add_config_flags(det)
    det.add_argument("--t", type=float, default=0.0, help="time of the exact-solution snapshot")
    det.add_argument("--matrix", help="snapshot-matrix CSV to read instead of an exact solution")
    det.add_argument("--column", type=int, default=1, help="1-based column of --matrix")
    det.add_argument("--jumps", action="store_true", help="include every face jump J_e")
    det.set_defaults(func=cmd_detect)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ExperimentError as exc:
        print(f"snapcal: error {exc}", file=sys.stderr)
        return 2 if exc.stage in ("config", "input") else 1


if __name__ == "__main__":
    sys.exit(main())
