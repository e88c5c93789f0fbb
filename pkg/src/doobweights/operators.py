"""Conditional expectations, Doob maximal operators and stopping times.

Every function accepts arrays whose last axis runs over leaves, so a stack of
functions of shape ``(m, n)`` is processed in one call.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

from .errors import WeightError
from .filtration import FilteredSpace, as_function

# Sentinel for "the stopping time never fires".
NEVER = np.iinfo(np.int64).max


def node_averages(space: FilteredSpace, f, i: int) -> np.ndarray:
    """Average of ``f`` over each level-``i`` node, shape ``(..., n_nodes(i))``."""
    f = as_function(space, f)
    starts = space.starts(i)
    avg = np.add.reduceat(f * space.leaf_measure, starts, axis=-1) / space.node_mass(i)
    single = space.sizes(i) == 1
    avg[..., single] = f[..., starts[single]]  # exact, no mu/mu rounding
    return avg


def cond_exp(space: FilteredSpace, f, i: int) -> np.ndarray:
    """E(f | F_i): replaces f on every level-``i`` node by its average there."""
    return np.repeat(node_averages(space, f, i), space.sizes(i), axis=-1)


def cond_exp_table(space: FilteredSpace, f) -> np.ndarray:
    """All conditional expectations stacked along a new leading axis, ``(L+1, ..., n)``."""
    f = as_function(space, f)
    return np.stack([cond_exp(space, f, i) for i in range(space.depth + 1)])


def check_weight(space: FilteredSpace, w) -> np.ndarray:
    w = as_function(space, w)
    if np.any(w <= 0):
        raise WeightError("weights must be strictly positive on every leaf")
    return w


def weighted_cond_exp(space: FilteredSpace, f, w, i: int) -> np.ndarray:
    """E^w_i(f) = E_i(f w) / E_i(w)."""
    w = check_weight(space, w)
    f = as_function(space, f)
    return cond_exp(space, f * w, i) / cond_exp(space, w, i)


def tailed_maximal(space: FilteredSpace, f, i: int) -> np.ndarray:
    """max over j in i..L of |E_j f|."""
    f = as_function(space, f)
    i = space.check_level(i)
    out = np.abs(cond_exp(space, f, i))
    for j in range(i + 1, space.depth + 1):
        np.maximum(out, np.abs(cond_exp(space, f, j)), out=out)
    return out


def doob_maximal(space: FilteredSpace, f) -> np.ndarray:
    """Mf = max over all levels of |E_i f|."""
    return tailed_maximal(space, f, 0)


def weighted_maximal(space: FilteredSpace, f, w) -> np.ndarray:
    """M^w f = max over levels of |E^w_i f|."""
    w = check_weight(space, w)
    f = as_function(space, f)
    fw = f * w
    out = np.zeros(np.broadcast_shapes(f.shape, w.shape))
    for i in range(space.depth + 1):
        np.maximum(out, np.abs(cond_exp(space, fw, i) / cond_exp(space, w, i)), out=out)
    return out


def first_hit(table: np.ndarray, start: int = 0) -> np.ndarray:
    """First level ``>= start`` where the boolean ``(L+1, n)`` table is true, else NEVER."""
    sub = np.asarray(table, dtype=bool)[start:]
    hit = sub.any(axis=0)
    tau = np.where(hit, sub.argmax(axis=0) + start, NEVER)
    return tau.astype(np.int64)


def stopping_time(space: FilteredSpace, predicate: Callable[[int, int], bool]) -> np.ndarray:
    """tau(x) = first level i whose node containing x satisfies ``predicate(i, node)``.

    The predicate sees only the node, so ``{tau = i}`` is F_i-measurable.
    """
    table = np.zeros((space.depth + 1, space.n_leaves), dtype=bool)
    for i in range(space.depth + 1):
        flags = np.array([bool(predicate(i, node)) for node in range(space.n_nodes(i))])
        table[i] = np.repeat(flags, space.sizes(i))
    return first_hit(table)


def at_stopping_time(table: np.ndarray, tau: np.ndarray, fill: float = np.nan) -> np.ndarray:
    """Evaluate a level table ``(L+1, n)`` at level ``tau(x)`` per leaf; ``fill`` where tau is NEVER."""
    stopped = tau != NEVER
    out = np.full(table.shape[1:], fill, dtype=float)
    idx = np.flatnonzero(stopped)
    out[idx] = table[tau[idx], idx]
    return out


def power(base: float, exps) -> np.ndarray:
    """``base**e`` for integer exponents, evaluated once per distinct exponent.

    All thresholds go through this so that slices and stopping rules compare
    against bit-identical values.
    """
    exps = np.asarray(exps, dtype=np.int64)
    uniq, inv = np.unique(exps, return_inverse=True)
    vals = np.array([float(base) ** int(e) for e in uniq])
    return vals[inv].reshape(exps.shape)


def geometric_scale(x, base: float) -> np.ndarray:
    """Integer ``l`` with ``base**(l-1) < x <= base**l`` for each positive ``x``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("geometric_scale needs positive values")
    l = np.ceil(np.log(x) / np.log(base)).astype(np.int64)
    for _ in range(3):
        l = np.where(power(base, l) < x, l + 1, l)
        l = np.where(power(base, l - 1) >= x, l - 1, l)
    return l
