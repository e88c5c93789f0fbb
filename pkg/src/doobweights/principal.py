"""Principal sets, conditional sparsity and the tailed-maximal domination lemma.

Given ``h >= 0``, a base level ``i``, a scale ``k`` and ``a > 1``, the first
generation is the single set

    P0 = {a**(k-1) < E_i h <= a**k} ∩ Ω0.

A principal set ``P`` at level ``j`` and scale ``l`` stops at
``tau_P = first j' >= j with E_j' h > a**(l+1)`` (never off ``P``), and its
children are the nonempty sets ``{a**(l'-1) < E_j' h <= a**l'} ∩ {tau_P = j'}``.
Whatever never stops is the exceptional set ``E(P)``.
"""

from __future__ import annotations

import json
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from .constants import optimal_a
from .errors import MeasurabilityError, ParameterError
from .filtration import FilteredSpace, all_leaves, as_function, as_leafset, measure
from .operators import (
    NEVER,
    cond_exp,
    cond_exp_table,
    doob_maximal,
    first_hit,
    geometric_scale,
    power,
    tailed_maximal,
    weighted_maximal,
)
from .report import RTOL, Report, first_violation, rel_slack
from .weights import ap_characteristic, conjugate, dual_weight


@dataclass(frozen=True, eq=False)
class PrincipalSet:
    level: int
    scale: int
    support: np.ndarray = field(repr=False)
    exceptional: np.ndarray = field(repr=False)
    tau: np.ndarray = field(repr=False)
    children: tuple[PrincipalSet, ...] = ()

    def walk(self) -> Iterator[PrincipalSet]:
        yield self
        for child in self.children:
            yield from child.walk()

    def to_dict(self) -> dict:
        return {
            "K1": self.level,
            "K2": self.scale,
            "support": np.flatnonzero(self.support).tolist(),
            "exceptional": np.flatnonzero(self.exceptional).tolist(),
            "children": [c.to_dict() for c in self.children],
        }


@dataclass(frozen=True, eq=False)
class PrincipalForest:
    space: FilteredSpace = field(repr=False)
    h: np.ndarray = field(repr=False)
    a: float
    base_level: int
    base_scale: int
    omega0: np.ndarray = field(repr=False)
    root: PrincipalSet | None

    @property
    def eta(self) -> float:
        return self.a / (self.a - 1)

    @property
    def empty(self) -> bool:
        return self.root is None

    def sets(self) -> list[PrincipalSet]:
        return [] if self.root is None else list(self.root.walk())

    def generations(self) -> list[list[PrincipalSet]]:
        gens = []
        current = [] if self.root is None else [self.root]
        while current:
            gens.append(current)
            current = [c for p in current for c in p.children]
        return gens

    def to_json(self) -> str:
        return json.dumps(
            {
                "a": self.a,
                "eta": self.eta,
                "base_level": self.base_level,
                "base_scale": self.base_scale,
                "root": None if self.root is None else self.root.to_dict(),
            }
        )


def _slice_mask(values: np.ndarray, a: float, scale: int) -> np.ndarray:
    lo, hi = power(a, [scale - 1, scale])
    return (values > lo) & (values <= hi)


def build_principal_forest(
    space: FilteredSpace,
    h,
    a: float,
    i: int,
    k: int,
    omega0=None,
) -> PrincipalForest:
    """Construct every generation of principal sets rooted at P0."""
    if not a > 1:
        raise ParameterError(f"a must exceed 1, got {a!r}")
    h = as_function(space, h)
    if np.any(h < 0):
        raise ParameterError("h must be nonnegative")
    i = space.check_level(i)
    omega0 = all_leaves(space) if omega0 is None else as_leafset(space, omega0)
    if not space.is_measurable(omega0, i):
        raise MeasurabilityError(f"omega0 is not a union of level-{i} nodes")

    table = cond_exp_table(space, h)
    p0 = _slice_mask(table[i], a, k) & omega0

    def grow(support: np.ndarray, level: int, scale: int) -> PrincipalSet:
        above = table > power(a, scale + 1)
        tau_all = first_hit(above, start=level)
        tau = np.where(support, tau_all, NEVER)
        children = []
        stopped = support & (tau != NEVER)
        for j in np.unique(tau[stopped]):
            j = int(j)
            at = stopped & (tau == j)
            if not np.array_equal(at, support & (tau_all == j)):
                raise AssertionError("stopping sets of tau_P and tau disagree on P")
            scales = np.zeros(space.n_leaves, dtype=np.int64)
            scales[at] = geometric_scale(table[j, at], a)
            for l in np.unique(scales[at]):
                l = int(l)
                if not l > scale + 1:
                    raise AssertionError(f"child scale {l} does not exceed parent scale {scale} + 1")
                children.append(grow(at & (scales == l), j, l))
        exceptional = support & (tau == NEVER)
        for arr in (support, exceptional, tau):
            arr.setflags(write=False)
        return PrincipalSet(level, scale, support, exceptional, tau, tuple(children))

    root = grow(p0, i, int(k)) if p0.any() else None
    h = h.copy()
    h.setflags(write=False)
    return PrincipalForest(space, h, float(a), i, int(k), omega0, root)


def verify_properties(forest: PrincipalForest, rtol: float = RTOL) -> Report:
    """Check the six structural properties and the sparsity mass bound on every set."""
    rep = Report("principal-set properties")
    if forest.empty:
        rep.add("forest nonempty", True, note="P0 has zero mass; nothing to check")
        return rep
    space, h, a, eta, i = forest.space, forest.h, forest.a, forest.eta, forest.base_level
    root = forest.root
    table = cond_exp_table(space, h)
    n = space.n_leaves

    # (1) exceptional sets tile P0
    cover = np.zeros(n, dtype=np.int64)
    for P in forest.sets():
        cover += P.exceptional
    bad = np.flatnonzero(cover != root.support.astype(np.int64))
    rep.add("(1) E(P) disjoint and cover P0", bad.size == 0,
            leaf=int(bad[0]) if bad.size else None)

    fails = {name: None for name in ("(2)", "(3)", "(4)", "(5)", "(6)", "constant", "order")}
    margins = {name: np.inf for name in fails}

    def note(name, leaf, margin, P):
        margins[name] = min(margins[name], margin)
        if leaf is not None and fails[name] is None:
            fails[name] = {"leaf": leaf, "K1": P.level, "K2": P.scale}

    for P in forest.sets():
        j, l, S, E = P.level, P.scale, P.support, P.exceptional
        lo, hi, top = power(a, [l - 1, l, l + 1])

        if not space.is_measurable(S, j):
            note("(2)", int(np.flatnonzero(S)[0]), -np.inf, P)

        # (3) conditional sparsity on P
        frac = eta * cond_exp(space, E.astype(float), j)
        leaf, m = first_violation(np.ones(n), frac, S, rtol)
        note("(3)", leaf, m, P)
        mP, mE = measure(space, S), measure(space, E)
        leaf = None if mP <= eta * mE * (1 + rtol) else int(np.flatnonzero(S)[0])
        note("constant", leaf, rel_slack(mP, eta * mE), P)

        # (4) exact, no tolerance: these are the construction's own comparisons
        vals = table[j]
        ok4 = (vals > lo) & (vals <= hi)
        bad4 = np.flatnonzero(S & ~ok4)
        note("(4)", int(bad4[0]) if bad4.size else None, 0.0 if bad4.size == 0 else -np.inf, P)

        # (5) sup_{j' >= i} E_j'(h chi_P) <= a^(l+1) on E(P)
        tm = tailed_maximal(space, h * S, i)
        leaf, m = first_violation(tm, top, E, rtol)
        note("(5)", leaf, m, P)

        # (6) on P, levels l..tau_P - 1 stay at or below a^(l+1)
        levels = np.arange(space.depth + 1)[:, None]
        window = (levels >= j) & (levels < P.tau[None, :]) & S[None, :]
        worst = np.where(window, table, -np.inf).max(axis=0)
        leaf, m = first_violation(worst, top, S & np.isfinite(worst), rtol)
        note("(6)", leaf, m, P)

        for child in P.children:
            if not (child.level > j and child.scale > l + 1 and not np.any(child.support & ~S)):
                note("order", int(np.flatnonzero(child.support)[0]), -np.inf, child)

    labels = {
        "(2)": "(2) P is F_K1-measurable",
        "(3)": "(3) conditional sparsity chi_P <= eta E(chi_E(P)|F_K1) chi_P",
        "constant": "mu(P) <= eta mu(E(P))",
        "(4)": "(4) a^(K2-1) < E(h|F_K1) <= a^K2 on P",
        "(5)": "(5) sup_j E_j(h chi_P) <= a^(K2+1) on E(P)",
        "(6)": "(6) E_j(h) <= a^(K2+1) for K1 <= j < tau(P) on P",
        "order": "children: K1 and K2 strictly increase, supports nested",
    }
    for key, label in labels.items():
        m = margins[key]
        rep.add(label, fails[key] is None, m if np.isfinite(m) else float("nan"),
                counterexample=fails[key])
    return rep


def lemma_domination_check(forest: PrincipalForest, rtol: float = RTOL) -> Report:
    """Pointwise bound of the tailed maximal function of h chi_P0 by the principal sets."""
    rep = Report("tailed maximal domination")
    if forest.empty:
        rep.add("forest nonempty", True, note="P0 has zero mass; nothing to check")
        return rep
    space, h, a, i = forest.space, forest.h, forest.a, forest.base_level
    p0 = forest.root.support
    local = tailed_maximal(space, h * p0, i)
    full = tailed_maximal(space, h, i)

    leaf, m = first_violation(np.abs(full - local), rtol * np.maximum(np.abs(full), 1.0), p0, 0.0)
    rep.add("*M_i(h) = *M_i(h chi_P0) on P0", leaf is None, leaf=leaf)

    bound = np.zeros(space.n_leaves)
    for P in forest.sets():
        # a^2 a^(K2-1), evaluated as the construction's own threshold a^(K2+1)
        bound[P.exceptional] = power(a, P.scale + 1)
    leaf, m = first_violation(local, bound, p0, rtol)
    rep.add("*M_i(h chi_P0) <= a^2 sum a^(K2-1) chi_E(P)", leaf is None, m, leaf=leaf)
    return rep


def principal_weighted_estimate(space: FilteredSpace, f, v, p: float, a: float | None = None,
                                rtol: float = RTOL) -> Report:
    """Both sides of the localized principal-set estimate for every base level and scale.

    With sigma the dual weight and C = a^2 eta^(p'-1) p' [v]^(p'/p), checks for
    each level i and each scale k with P0 = {a^(k-1) < E_i(f sigma) <= a^k}:

      (sum over P0 of *M_i(f sigma chi_P0)^p v)^(1/p) <= C (sum over P0 of f^p sigma)^(1/p)

    plus the intermediate principal-set bounds, and finally the global
    ||M(f sigma)||_{L^p(v)} <= C ||f||_{L^p(sigma)}.
    """
    a = optimal_a(p) if a is None else a
    if not a > 1:
        raise ParameterError(f"a must exceed 1, got {a!r}")
    f = as_function(space, f)
    if np.any(f < 0):
        raise ParameterError("f must be nonnegative")
    pc = conjugate(p)
    sigma = dual_weight(v, p)
    v = np.asarray(v, dtype=float)
    mu = space.leaf_measure
    eta = a / (a - 1)
    apc = ap_characteristic(space, v, p).characteristic
    const = a * a * eta ** (pc - 1) * pc * apc ** (pc / p)
    F = f * sigma

    rep = Report("principal-set weighted estimate")
    worst = {"local": np.inf, "doob": np.inf, "energy": np.inf}
    first_bad = {key: None for key in worst}
    for i in range(space.depth + 1):
        avg = cond_exp(space, F, i)
        pos = avg > 0
        if not pos.any():
            continue
        for k in np.unique(geometric_scale(avg[pos], a)):
            k = int(k)
            forest = build_principal_forest(space, F, a, i, k)
            p0 = forest.root.support
            h = F * p0
            tm = tailed_maximal(space, h, i)
            lhs_p = float(np.sum((tm**p * v * mu)[p0]))
            rhs_p = float(np.sum((f**p * sigma * mu)[p0]))
            lhs, rhs = lhs_p ** (1 / p), const * rhs_p ** (1 / p)
            s = rel_slack(lhs, rhs)
            worst["local"] = min(worst["local"], s)
            if lhs > rhs * (1 + rtol) and first_bad["local"] is None:
                first_bad["local"] = {"i": i, "k": k, "lhs": lhs, "rhs": rhs}

            # sum over P0 of *M_i(F)^p v <= a^(2p) sum_P a^(p(K2-1)) |E(P)|_v
            sets = forest.sets()
            doob_rhs = a ** (2 * p) * sum(
                power(a, P.scale - 1) ** p * float(np.sum((v * mu)[P.exceptional])) for P in sets
            )
            full_lhs = float(np.sum((tailed_maximal(space, F, i) ** p * v * mu)[p0]))
            s = rel_slack(full_lhs, doob_rhs)
            worst["doob"] = min(worst["doob"], s)
            if full_lhs > doob_rhs * (1 + rtol) and first_bad["doob"] is None:
                first_bad["doob"] = {"i": i, "k": k, "lhs": full_lhs, "rhs": doob_rhs}

            # a^(p(K2-1)) |E(P)|_v <= eta^(p(p'-1)) [v]^p' sum over E(P) of M^sigma(f chi_P0)^p sigma
            msig = weighted_maximal(space, f * p0, sigma) ** p * sigma * mu
            for P in sets:
                e_lhs = power(a, P.scale - 1) ** p * float(np.sum((v * mu)[P.exceptional]))
                e_rhs = eta ** (p * (pc - 1)) * apc**pc * float(np.sum(msig[P.exceptional]))
                s = rel_slack(e_lhs, e_rhs)
                worst["energy"] = min(worst["energy"], s)
                if e_lhs > e_rhs * (1 + rtol) and first_bad["energy"] is None:
                    first_bad["energy"] = {"i": i, "k": k, "K1": P.level, "K2": P.scale}

    rep.add("localized estimate on every P0", first_bad["local"] is None,
            worst["local"] if np.isfinite(worst["local"]) else float("nan"),
            counterexample=first_bad["local"])
    rep.add("tailed maximal bounded by principal-set sum", first_bad["doob"] is None,
            worst["doob"] if np.isfinite(worst["doob"]) else float("nan"),
            counterexample=first_bad["doob"])
    rep.add("exceptional-set energy bound", first_bad["energy"] is None,
            worst["energy"] if np.isfinite(worst["energy"]) else float("nan"),
            counterexample=first_bad["energy"])

    lhs = float(np.sum(doob_maximal(space, F) ** p * v * mu)) ** (1 / p)
    rhs = const * float(np.sum(f**p * sigma * mu)) ** (1 / p)
    rep.add("global ||M(f sigma)||_{L^p(v)} <= C ||f||_{L^p(sigma)}", lhs <= rhs * (1 + rtol),
            rel_slack(lhs, rhs) if rhs > 0 else float("nan"), lhs=lhs, rhs=rhs, constant=const)
    return rep
