"""Acceptance criteria, one test and one PASS/FAIL line each.

Run directly (``python3 tests/test_acceptance.py``) or under pytest; in the
latter case the lines are printed in the terminal summary.
"""

import time


from conftest import ACCEPTANCE_LINES
from doobweights.constants import (
    default_grid,
    figure1_csv,
    figure1_data,
    optimal_a,
    phi,
    psi,
    verify_monotonicity_and_limits,
)
from doobweights.bounds import sharpness_experiment
from doobweights.suites import (
    principal_weighted_suite,
    bracket_suite,
    principal_suite,
    stopping_suite,
    unweighted_doob_suite,
)

SEED = 20240611


def record(n, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} [{n}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def timed(fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t


def test_1_unweighted_doob():
    res, dt = timed(unweighted_doob_suite, SEED, trials=1000, ps=(1.5, 2.0, 3.0, 8.0), max_depth=10)
    slack = min(r[5] for r in res.rows)
    ok = res.passed and slack >= -1e-9 and dt < 10
    record(1, "||Mf||_p <= p'||f||_p, 1000 instances x 4 exponents", ok,
           f"{len(res.failures)} violations, min slack {slack:.3g} (>= -1e-9), {dt:.2f}s (< 10s)")
    assert ok, res.failures[:3]


def test_2_bracket():
    res, dt = timed(bracket_suite, SEED, trials=1000)
    ok = res.passed and dt < 30
    record(2, "A_p bracket on 1000 random (f, v)", ok,
           f"{len(res.failures)} violations of {res.checks} checks, {dt:.2f}s (< 30s)")
    assert ok, res.failures[:3]


def test_3_family_equality():
    res = bracket_suite(SEED + 1, trials=1000)
    errs = [abs(r[5] - r[4]) / r[4] for r in res.rows]
    worst = max(errs)
    ok = worst <= 1e-9
    record(3, "test-family formula max = [v]^(1/p)", ok, f"max relative error {worst:.3g} (<= 1e-9)")
    assert ok


def test_4_principal_sets():
    res, dt = timed(principal_suite, SEED, trials=500, max_depth=8, a_choices=(1.5, 2.0, "a0"))
    ok = res.passed and dt < 30
    record(4, "principal-set properties, sparsity constant and domination, 500 instances", ok,
           f"{len(res.failures)} failures of {res.checks} checks, {len(res.rows)} forests, {dt:.2f}s (< 30s)")
    assert ok, res.failures[:3]


def test_5_principal_weighted():
    res = principal_weighted_suite(SEED, trials=200)
    margin = min(r[5] for r in res.rows)
    ok = res.passed and margin >= 0
    record(5, "||M(f sigma)||_{L^p(v)} <= a^2 eta^(p'-1) p' [v]^(p'/p) ||f||_{L^p(sigma)}, 200 instances",
           ok, f"{len(res.failures)} failures, min global margin {margin:.3g} (>= 0)")
    assert ok, res.failures[:3]


def test_6_stopping_chain():
    res = stopping_suite(SEED, trials=500, bs=(1.05, 1.2, 2.0))
    ok = res.passed
    record(6, "stopping partition and chain incl. b-grid monotonicity, 500 instances", ok,
           f"{len(res.failures)} failures of {res.checks} checks")
    assert ok, res.failures[:3]


def test_7_constants():
    t = time.perf_counter()
    exact = abs(phi(2.0) - 6.75) <= 1e-12 and abs(psi(2.0) - 2.0) <= 1e-12 and optimal_a(2.0) == 1.5
    rep = verify_monotonicity_and_limits(default_grid(1.1, 1e6, 200))
    dt = time.perf_counter() - t
    ok = exact and rep.passed and dt < 1
    bad = rep.first_failure()
    record(7, "phi, psi closed forms, monotonicity, limits and log ratio", ok,
           f"phi(2)={phi(2.0):.15g} psi(2)={psi(2.0):.15g} a0(2)={optimal_a(2.0)!r}; "
           f"{len(rep.checks)} grid checks {'ok' if bad is None else 'first failure: ' + bad.name}; {dt:.3f}s (< 1s)")
    assert ok


def test_8_sharpness_trend():
    res, dt = timed(sharpness_experiment, 2.0, [-0.3, -0.5, -0.7, -0.9], 14, budget=50, seed=SEED)
    span_ok = res.ap_span >= 10
    band_ok = res.band < 4
    ok = span_ok and band_ok and dt < 60
    record(8, "power weights at L=14: [v]_{A_2} span >= 10 and normalized band < 4", ok,
           f"span {res.ap_span:.4g} ({'ok' if span_ok else 'below 10'}), band {res.band:.4g} "
           f"({'ok' if band_ok else 'not below 4'}), {dt:.2f}s (< 60s)")
    assert span_ok, f"[v]_A2 spans only a factor {res.ap_span:.4g} over alpha in (-0.3..-0.9)"
    assert band_ok and dt < 60


def test_9_determinism():
    runs = [
        lambda: unweighted_doob_suite(SEED, trials=200).to_csv(),
        lambda: bracket_suite(SEED, trials=200).to_csv(),
        lambda: principal_suite(SEED, trials=100).to_csv(),
        lambda: principal_weighted_suite(SEED, trials=40).to_csv(),
        lambda: stopping_suite(SEED, trials=60).to_csv(),
        lambda: sharpness_experiment(2.0, [-0.3, -0.9], 8, budget=10, seed=SEED).to_csv(),
        lambda: figure1_csv(figure1_data(1.1, 10, 200)),
    ]
    same = [run().encode() == run().encode() for run in runs]
    ok = all(same)
    record(9, "same seed gives byte-identical CSV", ok, f"{sum(same)}/{len(same)} outputs identical")
    assert ok


if __name__ == "__main__":
    import sys

    status = 0
    for name, fn in sorted((k, v) for k, v in dict(globals()).items() if k.startswith("test_")):
        try:
            fn()
        except AssertionError:
            status = 1
    sys.exit(status)
