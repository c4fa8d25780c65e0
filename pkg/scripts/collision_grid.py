#!/usr/bin/env python3
"""Collision-probability curves for d in {128, 256} and d' in {d, d/2, d/4}.

For each (d, d') panel the dense curve is the reference; the fast and
discrete (b = 10) families share the same embedded dimension m = d/4.
Writes one CSV per family per panel plus a combined SVG chart per panel.
"""

import argparse
from pathlib import Path

import numpy as np

from cplsh.families import HashFamilyConfig
from cplsh.lab import collision_csv, collision_curve


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--bits", type=int, default=10)
    ap.add_argument("--no-charts", action="store_true")
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    grid = np.linspace(0.1, 1.9, 19)
    for d in (128, 256):
        m = d // 4
        for dp in (d, d // 2, d // 4):
            families = [
                ("dense", HashFamilyConfig(kind="dense", d=d)),
                ("fast", HashFamilyConfig(kind="fast", d=d, m=m, d_prime=dp)),
                ("discrete", HashFamilyConfig(kind="discrete", d=d, m=m,
                                              d_prime=dp, bits=args.bits)),
            ]
            curves = []
            for label, family in families:
                ests = collision_curve(family, grid, args.trials, args.seed,
                                       threads=args.threads)
                path = args.outdir / f"collide_d{d}_dp{dp}_{label}.csv"
                path.write_text(collision_csv(ests))
                curves.append((label, ests))
                print(f"wrote {path}")
            if not args.no_charts:
                from cplsh.charts import collision_chart
                svg = args.outdir / f"collide_d{d}_dp{dp}.svg"
                collision_chart(svg, curves, title=f"d={d}, d'={dp}, m={m}")
                print(f"wrote {svg}")


if __name__ == "__main__":
    main()
