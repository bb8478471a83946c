"""Run every shipped scenario config and collect the headline metrics.

    python scripts/reproduce_figures.py [--out runs] [--only gravity,film]

Each config goes to ``<out>/<config name>/`` (paths, surfaces, SVG plots, OBJ
mesh, training history); a combined ``<out>/summary.csv`` lists the metrics.
"""

import argparse
import sys
from pathlib import Path

from actionnet.experiment import run_scenario, summary_line, write_artifacts
from actionnet.scenarios import load_config

ROOT = Path(__file__).resolve().parent.parent
KEYS = ["converged", "steps_run", "action", "max_violation", "sup_err", "snell_residual", "interface_gap",
        "crossing_pred", "crossing_oracle", "el_ratio", "sup_abs_z", "area_times_2sigma", "center_height",
        "film_residual_ratio"]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", default="runs")
    ap.add_argument("--only", help="comma-separated config names (without .cfg)")
    args = ap.parse_args(argv)
    configs = sorted((ROOT / "configs").glob("*.cfg"))
    if args.only:
        keep = set(args.only.split(","))
        configs = [c for c in configs if c.stem in keep]
    rows = []
    for path in configs:
        out = Path(args.out) / path.stem
        result = run_scenario(load_config(path, {"output_dir": str(out)}))
        write_artifacts(result, out)
        print(f"[{path.stem}] {summary_line(result)}", flush=True)
        rows.append([path.stem] + [result.metrics.get(k, "") for k in KEYS])
    Path(args.out).mkdir(parents=True, exist_ok=True)
    with open(Path(args.out) / "summary.csv", "w") as fh:
        fh.write(",".join(["config"] + KEYS) + "\n")
        for r in rows:
            fh.write(",".join(str(v) for v in r) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
