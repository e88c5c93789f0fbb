"""Stopping-time decomposition of the weighted maximal inequality.

For ``b > 1`` and integer ``k``, ``tau_k`` is the first level where
``|E_n f| > b**k``.  Conditional expectations "at F_tau" are evaluated per
leaf at level ``tau(x)``.  The cells are

    A[k, j] = {tau_k < inf} ∩ {b^j < E(sigma|F_tau_k) <= b^(j+1)}
    B[k, j] = A[k, j] ∩ {tau_(k+1) = inf}

with the discrete measure ``vartheta(k, j)`` (integral over B of
``E^v(1/v | F_tau_k)^p' v``) and ``T(k, j)`` (min over A of
``|E^sigma(f/sigma | F_tau_k)|^p``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .filtration import FilteredSpace, as_function
from .operators import (
    NEVER,
    at_stopping_time,
    check_weight,
    cond_exp_table,
    doob_maximal,
    first_hit,
    geometric_scale,
    power,
    weighted_cond_exp,
    weighted_maximal,
)
from .report import RTOL, Report, rel_slack, to_csv
from .weights import ap_characteristic, conjugate, dual_weight

B_GRID = (2.0, 1.5, 1.2, 1.1, 1.05, 1.01)


@dataclass(frozen=True, eq=False)
class Cell:
    k: int
    j: int
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    mass: float
    vartheta: float
    T: float
    margin: float  # relative slack of the per-cell step; >= 0 when it holds


@dataclass(frozen=True, eq=False)
class StoppingDecomposition:
    b: float
    p: float
    ap: float
    tau: dict[int, np.ndarray] = field(repr=False)
    cells: tuple[Cell, ...] = field(repr=False)
    maximal: np.ndarray = field(repr=False)

    @property
    def vartheta(self) -> dict[tuple[int, int], float]:
        return {(c.k, c.j): c.vartheta for c in self.cells}

    @property
    def T(self) -> dict[tuple[int, int], float]:
        return {(c.k, c.j): c.T for c in self.cells}

    def integral(self) -> float:
        """Integral of T against vartheta over the cell index set."""
        return float(sum(c.T * c.vartheta for c in self.cells))

    def to_csv(self) -> str:
        return to_csv(
            ["k", "j", "mass", "vartheta", "T", "margin"],
            [[c.k, c.j, c.mass, c.vartheta, c.T, c.margin] for c in self.cells],
        )


def _check(p: float, b: float) -> None:
    if not b > 1:
        raise ParameterError(f"b must exceed 1, got {b!r}")
    if not p > 1:
        raise ParameterError(f"p must exceed 1, got {p!r}")


def build_decomposition(space: FilteredSpace, f, v, p: float, b: float) -> StoppingDecomposition:
    _check(p, b)
    f = as_function(space, f)
    v = check_weight(space, v)
    sigma = dual_weight(v, p)
    pc = conjugate(p)
    mu = space.leaf_measure
    ap = ap_characteristic(space, v, p).characteristic

    absf = np.abs(cond_exp_table(space, f))
    mf = absf.max(axis=0)
    depth = space.depth
    sig_tab = cond_exp_table(space, sigma)
    # E^sigma(f/sigma | F_n) and E^v(1/v | F_n), built from their definitions
    fs_tab = np.stack([weighted_cond_exp(space, f / sigma, sigma, n) for n in range(depth + 1)])
    vv_tab = np.stack([weighted_cond_exp(space, 1.0 / v, v, n) for n in range(depth + 1)])

    pos = mf > 0
    ks = np.unique(geometric_scale(mf[pos], b) - 1) if pos.any() else np.array([], dtype=np.int64)

    taus: dict[int, np.ndarray] = {}

    def tau_of(k: int) -> np.ndarray:
        if k not in taus:
            taus[k] = first_hit(absf > power(b, k))
        return taus[k]

    cells = []
    for k in ks:
        k = int(k)
        tk = tau_of(k)
        level_set = (tk != NEVER) & (tau_of(k + 1) == NEVER)
        stopped = tk != NEVER
        sig_at = at_stopping_time(sig_tab, tk)
        fs_at = at_stopping_time(fs_tab, tk)
        vv_at = at_stopping_time(vv_tab, tk)
        js = np.full(space.n_leaves, np.iinfo(np.int64).min)
        js[stopped] = geometric_scale(sig_at[stopped], b) - 1
        for j in np.unique(js[stopped]):
            j = int(j)
            A = stopped & (js == j)
            B = A & level_set
            T = float(np.min(np.abs(fs_at[A]) ** p))
            vartheta = float(np.sum((vv_at[B] ** pc) * v[B] * mu[B]))
            # per-cell step: b^(kp) |B|_v <= b^p [v]^(p/(p-1)) T vartheta
            lhs = power(b, k) ** p * float(np.sum(v[B] * mu[B]))
            rhs = b**p * ap ** (p / (p - 1)) * T * vartheta
            for arr in (A, B):
                arr.setflags(write=False)
            margin = rel_slack(lhs, rhs) if B.any() else 0.0
            cells.append(Cell(k, j, A, B, float(mu[B].sum()), vartheta, T, margin))
    for t in taus.values():
        t.setflags(write=False)
    mf.setflags(write=False)
    return StoppingDecomposition(float(b), float(p), ap, dict(sorted(taus.items())), tuple(cells), mf)


def verify_partition(dec: StoppingDecomposition, space: FilteredSpace, f) -> Report:
    """Level sets of Mf versus the stopping-time sets and the B cells."""
    rep = Report("stopping-time partition")
    mf = doob_maximal(space, f)
    b = dec.b
    by_k: dict[int, np.ndarray] = {}
    cover = np.zeros(space.n_leaves, dtype=np.int64)
    for c in dec.cells:
        by_k.setdefault(c.k, np.zeros(space.n_leaves, dtype=bool))
        by_k[c.k] |= c.B
        cover += c.B
    problems = []
    for k, union_b in by_k.items():
        lo, hi = power(b, [k, k + 1])
        level = (mf > lo) & (mf <= hi)
        stops = (dec.tau[k] != NEVER) & (dec.tau[k + 1] == NEVER)
        if not np.array_equal(level, stops):
            problems.append(("level set != stopping set", k))
        if not np.array_equal(stops, union_b):
            problems.append(("stopping set != union of B", k))
    rep.add("{b^k < Mf <= b^(k+1)} = {tau_k < inf, tau_(k+1) = inf} = union_j B(k,j)",
            not problems, counterexample=problems[0] if problems else None)
    rep.add("B cells pairwise disjoint", bool(np.all(cover <= 1)))
    rep.add("B cells cover {Mf > 0}", np.array_equal(cover > 0, mf > 0))
    rep.add("B(k,j) subset of A(k,j)", all(not np.any(c.B & ~c.A) for c in dec.cells))

    # A(k,j) ∩ {tau_k = n} must be a union of level-n nodes
    measurable = True
    for c in dec.cells:
        t = dec.tau[c.k]
        if np.any(t[c.A] == NEVER):
            measurable = False
            continue
        for n in np.unique(t[c.A]):
            piece = c.A & (t == n)
            if not space.is_measurable(piece, int(n)):
                measurable = False
    rep.add("A(k,j) is F_tau_k-measurable", measurable)
    return rep


def _bound_constant(b: float, p: float, ap: float) -> float:
    """(b^(2p) p^p' p'^p [v]^(p/(p-1)))^(1/p) = b^2 p^(1/(p-1)) p' [v]^(1/(p-1))."""
    pc = conjugate(p)
    return b * b * p ** (1 / (p - 1)) * pc * ap ** (1 / (p - 1))


def verify_chain(dec: StoppingDecomposition, space: FilteredSpace, f, v, p: float,
                 b_grid=B_GRID, rtol: float = RTOL) -> Report:
    """Evaluate each link of the stopping-time chain and the b -> 1+ limit."""
    rep = Report(f"stopping-time chain (b={dec.b:g})")
    f = as_function(space, f)
    v = check_weight(space, v)
    sigma = dual_weight(v, p)
    pc = conjugate(p)
    mu = space.leaf_measure
    b, ap = dec.b, dec.ap
    mf = doob_maximal(space, f)
    lhs = float(np.sum(mf**p * v * mu))

    # level-set step: int (Mf)^p v <= b^p sum_k b^(kp) |{b^k < Mf <= b^(k+1)}|_v
    step = b**p * sum(
        power(b, k) ** p * float(np.sum((v * mu)[(dec.tau[k] != NEVER) & (dec.tau[k + 1] == NEVER)]))
        for k in {c.k for c in dec.cells}
    )
    rep.add("int (Mf)^p v <= b^p sum_k b^kp |level set|_v", lhs <= step * (1 + rtol),
            rel_slack(lhs, step) if step > 0 else float("nan"))

    cell_margin = min((c.margin for c in dec.cells), default=np.inf)
    bad = [c for c in dec.cells if c.margin < -rtol]
    rep.add("per-cell b^kp |B|_v <= b^p [v]^(p/(p-1)) T vartheta", not bad,
            cell_margin if np.isfinite(cell_margin) else float("nan"),
            counterexample=(bad[0].k, bad[0].j) if bad else None)

    chain = b ** (2 * p) * ap ** (p / (p - 1)) * dec.integral()
    rep.add("(i) int (Mf)^p v <= b^(2p) [v]^(p/(p-1)) int T dvartheta", lhs <= chain * (1 + rtol),
            rel_slack(lhs, chain) if chain > 0 else float("nan"), lhs=lhs, rhs=chain)

    msig = weighted_maximal(space, f / sigma, sigma)
    dist = p**pc * float(np.sum(msig**p * sigma * mu))
    tint = dec.integral()
    rep.add("int T dvartheta <= p^p' int M^sigma(f/sigma)^p sigma", tint <= dist * (1 + rtol),
            rel_slack(tint, dist) if dist > 0 else float("nan"))

    final = b ** (2 * p) * p**pc * pc**p * ap ** (p / (p - 1)) * float(np.sum(np.abs(f) ** p * v * mu))
    rep.add("(ii) int (Mf)^p v <= b^(2p) p^p' p'^p [v]^(p/(p-1)) int |f|^p v",
            lhs <= final * (1 + rtol), rel_slack(lhs, final) if final > 0 else float("nan"))

    # identities at stopping times
    f_tab = cond_exp_table(space, f)
    sig_tab = cond_exp_table(space, sigma)
    v_tab = cond_exp_table(space, v)
    ratio = np.stack([weighted_cond_exp(space, f / sigma, sigma, n) for n in range(space.depth + 1)])
    change_ok, ap_ok = True, True
    for k, t in dec.tau.items():
        stopped = t != NEVER
        if not stopped.any():
            continue
        ef = at_stopping_time(f_tab, t)[stopped]
        es = at_stopping_time(sig_tab, t)[stopped]
        ev = at_stopping_time(v_tab, t)[stopped]
        efs = at_stopping_time(ratio, t)[stopped]
        if np.any(np.abs(ef - efs * es) > 1e-12 * np.maximum(np.abs(ef), np.abs(efs * es)) + 1e-300):
            change_ok = False
        prod = ev * es ** (p - 1)
        if np.any(prod < 1 - rtol) or np.any(prod > ap * (1 + rtol)):
            ap_ok = False
    rep.add("E(f|F_tau) = E^sigma(f/sigma|F_tau) E(sigma|F_tau)", change_ok)
    rep.add("1 <= E(v|F_tau) E(sigma|F_tau)^(p-1) <= [v]", ap_ok)

    mv = weighted_maximal(space, 1.0 / v, v)
    cap = float(np.sum(mv**pc * v * mu))
    total = sum(c.vartheta for c in dec.cells)
    rep.add("vartheta >= 0 and total <= int M^v(1/v)^p' v",
            all(c.vartheta >= 0 for c in dec.cells) and total <= cap * (1 + rtol),
            rel_slack(total, cap))

    # b -> 1+: rebuild on the grid; constants must decrease toward the limit
    norm_f = float(np.sum(np.abs(f) ** p * v * mu)) ** (1 / p)
    norm_mf = lhs ** (1 / p)
    limit = _bound_constant(1.0, p, ap)
    consts = [_bound_constant(bb, p, ap) for bb in b_grid]
    rep.add("b-grid constants strictly decrease toward p^(1/(p-1)) p' [v]^(1/(p-1))",
            all(x > y for x, y in zip(consts, consts[1:])) and all(c > limit for c in consts),
            min(c / limit - 1 for c in consts) if consts else float("nan"),
            constants=consts, limit=limit)
    grid_ok = True
    for bb in b_grid:
        d = build_decomposition(space, f, v, p, bb)
        ch = bb ** (2 * p) * ap ** (p / (p - 1)) * d.integral()
        if lhs > ch * (1 + rtol) or norm_mf > _bound_constant(bb, p, ap) * norm_f * (1 + rtol):
            grid_ok = False
    rep.add("chain holds at every b on the grid", grid_ok)
    rep.add("limit bound ||Mf||_{L^p(v)} <= p' p^(1/(p-1)) [v]^(1/(p-1)) ||f||_{L^p(v)}",
            norm_mf <= limit * norm_f * (1 + rtol),
            rel_slack(norm_mf, limit * norm_f) if norm_f > 0 else float("nan"))
    return rep
