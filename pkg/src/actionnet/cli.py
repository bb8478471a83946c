"""Command-line entry point.

    actionnet run CONFIG [--seed N] [--steps N] [--out DIR]
    actionnet compare RUN_DIR_A RUN_DIR_B

``run`` exits 0 when training converged, 2 when the step budget ran out first
and 1 on any error (bad config, divergence).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .experiment import run_scenario, summary_line, write_artifacts
from .export import read_csv
from .scenarios import ConfigError, load_config
from .solver import DivergenceError

log = logging.getLogger("actionnet")

EXIT_OK, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2


class CompareError(ValueError):
    pass


def _load_run(run_dir: Path):
    for name in ("path.csv", "surface.csv"):
        p = run_dir / name
        if p.exists():
            header, data = read_csv(p)
            summary = {}
            if (run_dir / "summary.json").exists():
                summary = json.loads((run_dir / "summary.json").read_text())
            return name, header, data, summary
    raise CompareError(f"{run_dir}: no path.csv or surface.csv found")


def compare(run_dir_a, run_dir_b) -> dict:
    """Differences between two runs' predicted paths (or surfaces) and their oracle errors."""
    name_a, head_a, a, sum_a = _load_run(Path(run_dir_a))
    name_b, head_b, b, sum_b = _load_run(Path(run_dir_b))
    if name_a != name_b or head_a != head_b:
        raise CompareError(f"incompatible runs: {name_a} {head_a} vs {name_b} {head_b}")
    n_coords = 1 if name_a == "path.csv" else 2
    if a.shape != b.shape or not np.array_equal(a[:, :n_coords], b[:, :n_coords]):
        raise CompareError("incompatible grids: the runs were sampled at different points")
    pred = head_a.index("y_pred" if n_coords == 1 else "z_pred")
    diff = np.abs(a[:, pred] - b[:, pred])
    report = {"points": int(a.shape[0]), "sup_diff": float(diff.max()), "mean_diff": float(diff.mean())}
    for tag, data, summary in (("a", a, sum_a), ("b", b, sum_b)):
        if "abs_err" in head_a and not np.all(np.isnan(data[:, head_a.index("abs_err")])):
            errs = data[:, head_a.index("abs_err")]
            report[f"oracle_sup_err_{tag}"] = float(np.nanmax(errs))
            report[f"oracle_mean_err_{tag}"] = float(np.nanmean(errs))
        for key in ("snell_residual", "el_ratio", "sup_abs_z", "film_residual_mean"):
            if key in summary:
                report[f"{key}_{tag}"] = summary[key]
    return report


def _cmd_run(args) -> int:
    overrides = {"seed": args.seed, "steps": args.steps, "output_dir": args.out}
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        result = run_scenario(cfg)
    except DivergenceError as exc:
        print(f"error: training diverged at {exc}", file=sys.stderr)
        return EXIT_ERROR
    write_artifacts(result, cfg.output_dir)
    print(summary_line(result))
    return EXIT_OK if result.converged else EXIT_BUDGET


def _cmd_compare(args) -> int:
    try:
        report = compare(args.run_dir_a, args.run_dir_b)
    except (CompareError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for k, v in report.items():
        print(f"{k}: {v:.6g}" if isinstance(v, float) else f"{k}: {v}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="actionnet", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="train a scenario and write its artifacts")
    run.add_argument("config", help="key = value scenario file")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--steps", type=int, help="override the step budget")
    run.add_argument("--out", help="override the output directory")
    run.set_defaults(func=_cmd_run)
    cmp_ = sub.add_parser("compare", help="compare the paths of two run directories")
    cmp_.add_argument("run_dir_a")
    cmp_.add_argument("run_dir_b")
    cmp_.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
