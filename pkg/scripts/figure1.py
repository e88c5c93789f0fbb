"""phi(p) and psi(p) on a geometric grid, as CSV and SVG."""

import argparse
from pathlib import Path

import numpy as np

from doobweights.constants import figure1_csv, figure1_data, write_figure1_svg

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--pmin", type=float, default=1.1)
ap.add_argument("--pmax", type=float, default=10.0)
ap.add_argument("--samples", type=int, default=200)
ap.add_argument("--out", type=Path, default=Path("results/figure1.csv"))
args = ap.parse_args()

rows = figure1_data(args.pmin, args.pmax, args.samples)
args.out.parent.mkdir(parents=True, exist_ok=True)
args.out.write_text(figure1_csv(rows))
write_figure1_svg(rows, args.out.with_suffix(".svg"))

gap = rows[:, 1] / rows[:, 2]
print(f"{len(rows)} rows -> {args.out} (+ .svg)")
print(f"phi/psi ranges from {gap.min():.4g} to {gap.max():.4g}; "
      f"phi >= psi everywhere: {bool(np.all(gap >= 1))}")
for p in (1.1, 2.0, 10.0):
    i = int(np.argmin(abs(rows[:, 0] - p)))
    print(f"  p={rows[i, 0]:.4g}  phi={rows[i, 1]:.6g}  psi={rows[i, 2]:.6g}")
