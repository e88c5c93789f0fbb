"""Power-weight sharpness table: how best_ratio scales with [x^alpha]_{A_p}.

Prints the table and the quantities the acceptance check looks at: the span
of [v] over the alpha list and the band of best_ratio / [v]^(1/(p-1)).
Passing a wider alpha list (e.g. down to -0.99) shows the [v] span growing.
"""

import argparse
import time

from doobweights.bounds import sharpness_experiment

ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
ap.add_argument("--p", type=float, default=2.0)
ap.add_argument("--depth", type=int, default=14)
ap.add_argument("--budget", type=int, default=50)
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--alpha", type=float, nargs="+", default=[-0.3, -0.5, -0.7, -0.9])
args = ap.parse_args()

t = time.perf_counter()
res = sharpness_experiment(args.p, args.alpha, args.depth, budget=args.budget, seed=args.seed)
dt = time.perf_counter() - t
print(f"{'alpha':>7} {'[v]':>10} {'best':>10} {'best/[v]^(1/(p-1))':>20} {'upper':>10}")
for alpha, apc, best, norm, upper in res.rows:
    print(f"{alpha:7.3f} {apc:10.5g} {best:10.5g} {norm:20.5g} {upper:10.5g}")
print(f"[v] span {res.ap_span:.4g}, normalized band {res.band:.4g} (limit 4), {dt:.2f}s")
print("closed form at the root: [x^alpha]_A2 = 1/(1 - alpha^2) -> "
      + ", ".join(f"{1 / (1 - a * a):.4g}" for a in args.alpha))
