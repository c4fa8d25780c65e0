#!/usr/bin/env python3
"""Convergence of ln(1/p) toward its leading term as the dimension grows.

Sweeps R in {0.4, 0.7, 1.0, 1.3} over a power-of-two grid for the dense and
fast (d' = d, m = d/4) families; the residual column isolates the
subleading behavior, plotted against C/ln(d) reference guides.
"""

import argparse
from pathlib import Path

from cplsh.lab import convergence_csv, convergence_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--dims", default="32,64,128,256,512,1024,2048,4096")
    ap.add_argument("--ref-c", default="0.25,0.5,1.0")
    ap.add_argument("--no-charts", action="store_true")
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    dims = [int(v) for v in args.dims.split(",") if v]
    refs = tuple(float(v) for v in args.ref_c.split(",") if v)
    for R in (0.4, 0.7, 1.0, 1.3):
        for kind in ("dense", "fast"):
            points = convergence_experiment(kind, R, dims, args.trials,
                                            seed=args.seed, threads=args.threads)
            tag = f"converge_{kind}_R{R:g}"
            path = args.outdir / f"{tag}.csv"
            path.write_text(convergence_csv(points))
            print(f"wrote {path}")
            if not args.no_charts:
                from cplsh.charts import convergence_chart
                svg = args.outdir / f"{tag}.svg"
                convergence_chart(svg, points, ref_constants=refs,
                                  title=f"{kind}, R={R:g}")
                print(f"wrote {svg}")


if __name__ == "__main__":
    main()
