"""Run every randomized suite and write one CSV per suite.

    python3 scripts/run_suites.py --seed 7 --out results/
"""

import argparse
import sys
import time
from pathlib import Path

from doobweights.suites import (
    principal_weighted_suite,
    bracket_suite,
    principal_suite,
    stopping_suite,
    unweighted_doob_suite,
)

SUITES = {
    "doob": lambda seed: unweighted_doob_suite(seed, trials=1000),
    "bracket": lambda seed: bracket_suite(seed, trials=1000),
    "principal": lambda seed: principal_suite(seed, trials=500),
    "principal_weighted": lambda seed: principal_weighted_suite(seed, trials=200),
    "stopping": lambda seed: stopping_suite(seed, trials=500),
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--only", choices=sorted(SUITES), nargs="*")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    status = 0
    for name in args.only or SUITES:
        t = time.perf_counter()
        res = SUITES[name](args.seed)
        dt = time.perf_counter() - t
        (args.out / f"{name}.csv").write_text(res.to_csv())
        print(f"{name:20s} {len(res.rows):6d} rows {res.checks:7d} checks "
              f"{len(res.failures):4d} failures {dt:7.2f}s")
        for fail in res.failures[:3]:
            print("   ", fail)
        status |= not res.passed
    return status


if __name__ == "__main__":
    sys.exit(main())
