"""Seeded randomized verification suites.

Each suite returns CSV rows (one per instance and parameter choice) and a
report whose first failure names the violated inequality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import instances as inst
from .bounds import ap_lower_test_family, verify_upper, weighted_norm
from .constants import optimal_a
from .filtration import all_leaves, build_dyadic
from .operators import cond_exp, doob_maximal, geometric_scale
from .principal import build_principal_forest, lemma_domination_check, principal_weighted_estimate, verify_properties
from .report import Report, rel_slack, to_csv
from .stopping import build_decomposition, verify_chain, verify_partition
from .weights import ap_characteristic, conjugate


@dataclass
class SuiteResult:
    name: str
    header: list[str]
    rows: list[list] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    checks: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, invariant: str, **instance) -> None:
        self.failures.append({"suite": self.name, "invariant": invariant, **instance})

    def to_csv(self) -> str:
        return to_csv(self.header, self.rows)


def _fold(result: SuiteResult, rep: Report, trial: int, **extra) -> None:
    result.checks += len(rep.checks)
    for c in rep.failures():
        result.fail(c.name, trial=trial, detail=c.detail, **extra)


def unweighted_doob_suite(seed: int, trials: int = 1000, ps=(1.5, 2.0, 3.0, 8.0),
                          max_depth: int = 10, rtol: float = 1e-9) -> SuiteResult:
    """||Mf||_p <= p' ||f||_p on random dyadic spaces with signed f."""
    res = SuiteResult("unweighted-doob", ["trial", "depth", "p", "lhs", "rhs", "slack"])
    for t, rng in enumerate(inst.instance_rngs(seed, trials)):
        space = inst.random_dyadic(rng, max_depth)
        f = inst.random_signed(rng, space.n_leaves)
        mf = doob_maximal(space, f)
        ones = np.ones(space.n_leaves)
        for p in ps:
            lhs = weighted_norm(space, mf, ones, p)
            rhs = conjugate(p) * weighted_norm(space, f, ones, p)
            s = rel_slack(lhs, rhs) if rhs > 0 else 0.0
            res.checks += 1
            res.rows.append([t, space.depth, p, lhs, rhs, s])
            if s < -rtol:
                res.fail("||Mf||_p <= p'||f||_p", trial=t, p=p, lhs=lhs, rhs=rhs)
    return res


def bracket_suite(seed: int, trials: int = 1000, p: float | None = None, depth: int | None = None,
                  max_depth: int = 8, rtol: float = 1e-9) -> SuiteResult:
    """Both sides of the A_p characterization on random (f >= 0, v) pairs.

    With ``depth`` given every instance uses the uniform dyadic space of that
    depth; otherwise depths are random up to ``max_depth`` with random masses.
    ``p`` defaults to a random choice from {1.5, 2, 3} per instance.
    """
    res = SuiteResult(
        "bracket",
        ["trial", "depth", "p", "ap_char", "ap_root_p", "family_formula", "family_observed",
         "norm_lhs", "norm_rhs", "upper_slack"],
    )
    fixed = build_dyadic(depth) if depth is not None else None
    for t, rng in enumerate(inst.instance_rngs(seed, trials)):
        space = fixed if fixed is not None else inst.random_dyadic(rng, max_depth)
        pp = float(p) if p is not None else float(rng.choice([1.5, 2.0, 3.0]))
        f = inst.random_nonneg(rng, space.n_leaves)
        v = inst.random_weight(rng, space.n_leaves)
        ap = ap_characteristic(space, v, pp).characteristic
        fam = ap_lower_test_family(space, v, pp)
        up = verify_upper(space, f, v, pp, ap=ap, rtol=rtol)
        target = ap ** (1 / pp)
        res.checks += 4
        res.rows.append([t, space.depth, pp, ap, target, fam.formula_max, fam.observed_max,
                         up.lhs, up.rhs, up.slack])
        if ap < 1 - rtol:
            res.fail("[v]_{A_p} >= 1", trial=t, ap=ap)
        if target > fam.observed_max * (1 + rtol):
            res.fail("[v]^(1/p) <= observed test-family ratio", trial=t, p=pp, target=target,
                     observed=fam.observed_max)
        if abs(fam.formula_max - target) > rtol * target:
            res.fail("test-family formula max = [v]^(1/p)", trial=t, p=pp, target=target,
                     formula=fam.formula_max)
        if not up.passed:
            res.fail("||Mf||_{L^p(v)} <= p^(1/(p-1)) p' [v]^(1/(p-1)) ||f||_{L^p(v)}", trial=t,
                     p=pp, lhs=up.lhs, rhs=up.rhs)
    return res


def principal_suite(seed: int, trials: int = 500, max_depth: int = 8,
                    a_choices=(1.5, 2.0, "a0")) -> SuiteResult:
    """Principal-set construction properties and the domination lemma on random h >= 0."""
    res = SuiteResult("principal", ["trial", "depth", "a", "base_level", "scale", "sets",
                                    "generations", "sparsity_margin", "lemma_margin"])
    for t, rng in enumerate(inst.instance_rngs(seed, trials)):
        space = inst.random_dyadic(rng, max_depth) if rng.random() < 0.75 else inst.random_tree(rng, 5)
        h = inst.random_nonneg(rng, space.n_leaves)
        choice = a_choices[int(rng.integers(len(a_choices)))]
        a = optimal_a(float(rng.choice([1.5, 2.0, 3.0]))) if choice == "a0" else float(choice)
        i = int(rng.integers(space.depth + 1))
        if rng.random() < 0.5:
            omega0 = all_leaves(space)
        else:
            keep = rng.random(space.n_nodes(i)) < 0.6
            omega0 = np.repeat(keep, space.sizes(i))
        avg = cond_exp(space, h, i)
        pos = (avg > 0) & omega0
        if not pos.any():
            continue
        for k in np.unique(geometric_scale(avg[pos], a)):
            forest = build_principal_forest(space, h, a, i, int(k), omega0)
            props = verify_properties(forest)
            lemma = lemma_domination_check(forest)
            _fold(res, props, t, a=a, i=i, k=int(k))
            _fold(res, lemma, t, a=a, i=i, k=int(k))
            res.rows.append([t, space.depth, a, i, int(k), len(forest.sets()), len(forest.generations()),
                             props.min_margin("(3)"), lemma.min_margin("*M_i(h chi_P0) <=")])
    return res


def principal_weighted_suite(seed: int, trials: int = 200, ps=(1.5, 2.0, 3.0), max_depth: int = 7) -> SuiteResult:
    """Localized and global principal-set weighted estimates with a = a0(p)."""
    res = SuiteResult("principal-weighted", ["trial", "depth", "p", "a", "local_margin", "global_margin"])
    for t, rng in enumerate(inst.instance_rngs(seed, trials)):
        space = inst.random_dyadic(rng, max_depth)
        p = float(ps[t % len(ps)])
        f = inst.random_nonneg(rng, space.n_leaves)
        v = inst.random_weight(rng, space.n_leaves)
        a = optimal_a(p)
        rep = principal_weighted_estimate(space, f, v, p, a)
        _fold(res, rep, t, p=p)
        res.rows.append([t, space.depth, p, a, rep.min_margin("localized"), rep.min_margin("global")])
    return res


def stopping_suite(seed: int, trials: int = 500, bs=(1.05, 1.2, 2.0), ps=(1.5, 2.0, 3.0),
                   max_depth: int = 6) -> SuiteResult:
    """Partition identities and the stopping-time chain, including the b -> 1+ grid."""
    res = SuiteResult("stopping", ["trial", "depth", "p", "b", "cells", "chain_margin", "final_margin"])
    for t, rng in enumerate(inst.instance_rngs(seed, trials)):
        space = inst.random_dyadic(rng, max_depth)
        p = float(ps[t % len(ps)])
        b = float(bs[(t // len(ps)) % len(bs)])
        f = inst.random_signed(rng, space.n_leaves)
        v = inst.random_weight(rng, space.n_leaves)
        dec = build_decomposition(space, f, v, p, b)
        part = verify_partition(dec, space, f)
        chain = verify_chain(dec, space, f, v, p)
        _fold(res, part, t, p=p, b=b)
        _fold(res, chain, t, p=p, b=b)
        res.rows.append([t, space.depth, p, b, len(dec.cells), chain.min_margin("(i)"), chain.min_margin("(ii)")])
    return res
