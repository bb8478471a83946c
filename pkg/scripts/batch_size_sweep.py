"""Gravity oracle error against the per-step batch size N.

    python scripts/batch_size_sweep.py [--out runs/batch_sweep] [--ns 8,32,128,512] [--seeds 5]

Writes ``errors.csv`` (one row per N and seed), ``medians.csv`` and
``error_vs_n.svg``. Takes roughly 15 minutes on one core with the defaults.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from actionnet.experiment import SWEEP_NS, SWEEP_OVERRIDES, batch_size_sweep
from actionnet.export import svg_line_chart, write_csv, write_svg
from actionnet.scenarios import load_config, with_overrides

ROOT = Path(__file__).resolve().parent.parent


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--config", default=str(ROOT / "configs" / "gravity.cfg"))
    ap.add_argument("--out", default="runs/batch_sweep")
    ap.add_argument("--ns", default=",".join(map(str, SWEEP_NS)))
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args(argv)

    base = with_overrides(load_config(args.config), **SWEEP_OVERRIDES)
    ns = [int(v) for v in args.ns.split(",")]

    def progress(n, seed, result):
        print(f"N={n:4d} seed={seed} sup_err={result.metrics['sup_err']:.3e}", flush=True)

    errors = batch_size_sweep(base, ns, range(args.seeds), progress)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "errors.csv", ["n", "seed", "sup_err"],
              ((n, s, e) for n in ns for s, e in enumerate(errors[n])))
    medians = [float(np.median(errors[n])) for n in ns]
    write_csv(out / "medians.csv", ["n", "median_sup_err"], zip(ns, medians))
    write_svg(out / "error_vs_n.svg", svg_line_chart(
        {"median sup error": (np.log2(ns), medians)}, title="gravity: oracle error vs batch size",
        xlabel="log2 N", ylabel="sup |Y - x*|", logy=True))
    for n, m in zip(ns, medians):
        print(f"N={n:4d} median sup_err={m:.3e}")
    monotone = all(a >= b for a, b in zip(medians, medians[1:]))
    print("non-increasing in N:", monotone)
    return 0 if monotone else 1


if __name__ == "__main__":
    sys.exit(main())
