"""Finite filtered measure spaces.

A space is a rooted refinement tree.  The leaves are the atoms of the finest
sigma-algebra and carry positive masses; level ``i`` partitions the leaves
into contiguous groups, each of which is an atom of ``F_i``.  Level 0 is the
single root and level ``L`` is the partition into single leaves.

Functions on the space are plain 1-d float arrays indexed by leaf and leaf
sets are boolean masks of the same length.
"""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np

from .errors import (
    CapacityError,
    InvalidMeasureError,
    LevelError,
    MalformedDocumentError,
    RefinementError,
    ShapeError,
)

# 2**24 leaves is ~128 MB per (L+1, n) float table; larger trees are refused.
MAX_LEAVES = 1 << 24


class FilteredSpace:
    """Immutable refinement tree with positive leaf masses."""

    __slots__ = ("_mu", "_sizes", "_starts", "_labels", "_node_mass")

    def __init__(self, leaf_measure: Sequence[float], level_sizes: Sequence[Sequence[int]]):
        mu = np.array(leaf_measure, dtype=float).ravel()
        if mu.size == 0:
            raise InvalidMeasureError("space needs at least one leaf")
        if mu.size > MAX_LEAVES:
            raise CapacityError(f"{mu.size} leaves exceeds the budget of {MAX_LEAVES}")
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0):
            bad = int(np.flatnonzero(~(np.isfinite(mu) & (mu > 0)))[0])
            raise InvalidMeasureError(f"leaf {bad} has mass {mu[bad]!r}; masses must be > 0")
        n = mu.size

        sizes = []
        for i, level in enumerate(level_sizes):
            s = np.array(level, dtype=np.int64).ravel()
            if s.size == 0 or np.any(s < 1):
                raise RefinementError(f"level {i} has an empty node")
            if int(s.sum()) != n:
                raise RefinementError(f"level {i} node sizes sum to {int(s.sum())}, expected {n}")
            sizes.append(s)
        if not sizes:
            raise RefinementError("at least one level is required")
        if sizes[0].size != 1:
            raise RefinementError("level 0 must be the single root node")
        if sizes[-1].size != n:
            raise RefinementError("the deepest level must consist of single leaves")

        starts = [np.concatenate(([0], np.cumsum(s)[:-1])) for s in sizes]
        for i in range(len(sizes) - 1):
            coarse = set(starts[i].tolist())
            fine = set(starts[i + 1].tolist())
            if not coarse <= fine:
                cut = min(coarse - fine)
                raise RefinementError(
                    f"a level-{i + 1} node straddles the level-{i} boundary at leaf {cut}"
                )

        labels = [np.repeat(np.arange(s.size), s) for s in sizes]
        node_mass = [np.add.reduceat(mu, st) for st in starts]
        for arr in [mu, *sizes, *starts, *labels, *node_mass]:
            arr.setflags(write=False)
        self._mu = mu
        self._sizes = tuple(sizes)
        self._starts = tuple(starts)
        self._labels = tuple(labels)
        self._node_mass = tuple(node_mass)

    # -- structure -----------------------------------------------------------------

    @property
    def depth(self) -> int:
        return len(self._sizes) - 1

    @property
    def n_leaves(self) -> int:
        return self._mu.size

    @property
    def leaf_measure(self) -> np.ndarray:
        return self._mu

    @property
    def total_mass(self) -> float:
        return float(self._node_mass[0][0])

    def check_level(self, i: int) -> int:
        if not isinstance(i, (int, np.integer)) or not 0 <= i <= self.depth:
            raise LevelError(f"level {i!r} outside 0..{self.depth}")
        return int(i)

    def n_nodes(self, i: int) -> int:
        return self._sizes[self.check_level(i)].size

    def sizes(self, i: int) -> np.ndarray:
        return self._sizes[self.check_level(i)]

    def starts(self, i: int) -> np.ndarray:
        return self._starts[self.check_level(i)]

    def labels(self, i: int) -> np.ndarray:
        """Node index at level ``i`` of every leaf."""
        return self._labels[self.check_level(i)]

    def node_mass(self, i: int) -> np.ndarray:
        return self._node_mass[self.check_level(i)]

    def node_slice(self, i: int, node: int) -> slice:
        st = int(self.starts(i)[node])
        return slice(st, st + int(self.sizes(i)[node]))

    def node_mask(self, i: int, node: int) -> np.ndarray:
        mask = np.zeros(self.n_leaves, dtype=bool)
        mask[self.node_slice(i, node)] = True
        return mask

    def parent(self, i: int, node: int) -> int:
        if i == 0:
            raise LevelError("the root has no parent")
        return int(self.labels(i - 1)[self.starts(i)[node]])

    def is_measurable(self, mask: np.ndarray, i: int) -> bool:
        """True when the leaf set is a union of level-``i`` nodes."""
        mask = as_leafset(self, mask)
        lab = self.labels(i)
        counts = np.bincount(lab, weights=mask.astype(float), minlength=self.n_nodes(i))
        return bool(np.all((counts == 0) | (counts == self.sizes(i))))

    def is_dyadic(self) -> bool:
        """Every non-leaf node has exactly two children."""
        if any(self.n_nodes(i) != 2**i for i in range(self.depth + 1)):
            return False
        return all(
            np.array_equal(self.sizes(i)[0::2] + self.sizes(i)[1::2], self.sizes(i - 1))
            for i in range(1, self.depth + 1)
        )

    # -- comparison ------------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FilteredSpace):
            return NotImplemented
        return (
            len(self._sizes) == len(other._sizes)
            and all(np.array_equal(a, b) for a, b in zip(self._sizes, other._sizes))
            and np.array_equal(self._mu, other._mu)
        )

    def __hash__(self) -> int:
        return hash((tuple(tuple(s.tolist()) for s in self._sizes), self._mu.tobytes()))

    def __repr__(self) -> str:
        return f"FilteredSpace(depth={self.depth}, leaves={self.n_leaves}, mass={self.total_mass:g})"


# -- functions and leaf sets -----------------------------------------------------------


def as_function(space: FilteredSpace, f) -> np.ndarray:
    """Validate ``f`` as a finite function on the leaves of ``space``."""
    arr = np.asarray(f, dtype=float)
    if arr.shape[-1:] != (space.n_leaves,):
        raise ShapeError(f"function has shape {arr.shape}, space has {space.n_leaves} leaves")
    if not np.all(np.isfinite(arr)):
        raise ShapeError("function values must be finite")
    return arr


def as_leafset(space: FilteredSpace, s) -> np.ndarray:
    arr = np.asarray(s)
    if arr.dtype != bool:
        raise ShapeError("leaf sets are boolean masks")
    if arr.shape != (space.n_leaves,):
        raise ShapeError(f"leaf set has shape {arr.shape}, space has {space.n_leaves} leaves")
    return arr


def leafset(space: FilteredSpace, indices=()) -> np.ndarray:
    """Boolean mask for the given leaf indices."""
    mask = np.zeros(space.n_leaves, dtype=bool)
    idx = np.asarray(list(indices), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= space.n_leaves):
        raise ShapeError("leaf index out of range")
    mask[idx] = True
    return mask


def all_leaves(space: FilteredSpace) -> np.ndarray:
    return np.ones(space.n_leaves, dtype=bool)


def integrate(space: FilteredSpace, f, s=None) -> float:
    """Sum of ``f * mu`` over the leaves in ``s`` (all leaves by default)."""
    f = as_function(space, f)
    if s is None:
        return float(np.dot(f, space.leaf_measure))
    s = as_leafset(space, s)
    return float(np.dot(f[s], space.leaf_measure[s]))


def measure(space: FilteredSpace, s) -> float:
    s = as_leafset(space, s)
    return float(space.leaf_measure[s].sum())


# -- builders -----------------------------------------------------------------------


def build_dyadic(depth: int, leaf_measures=None) -> FilteredSpace:
    """Binary refinement tree of the given depth.

    Leaves default to mass ``2**-depth`` so the root has mass 1.
    """
    if not isinstance(depth, (int, np.integer)) or depth < 0:
        raise LevelError(f"depth must be a nonnegative integer, got {depth!r}")
    if (1 << depth) > MAX_LEAVES:
        raise CapacityError(f"depth {depth} gives {2**depth} leaves, budget is {MAX_LEAVES}")
    n = 1 << depth
    if leaf_measures is None:
        mu = np.full(n, 2.0**-depth)
    else:
        mu = np.asarray(leaf_measures, dtype=float).ravel()
        if mu.size != n:
            raise InvalidMeasureError(f"expected {n} leaf masses, got {mu.size}")
    levels = [[n >> i] * (1 << i) for i in range(depth + 1)]
    return FilteredSpace(mu, levels)


def build_uniform_tree(branching: Sequence[int], leaf_measures=None) -> FilteredSpace:
    """Tree where every level-``i`` node has ``branching[i]`` children."""
    n = int(np.prod(branching)) if len(branching) else 1
    if n > MAX_LEAVES:
        raise CapacityError(f"{n} leaves exceeds the budget of {MAX_LEAVES}")
    levels = []
    width = n
    count = 1
    levels.append([width])
    for b in branching:
        width //= b
        count *= b
        levels.append([width] * count)
    mu = np.ones(n) if leaf_measures is None else leaf_measures
    return FilteredSpace(mu, levels)


# -- documents ---------------------------------------------------------------------


def to_dict(space: FilteredSpace) -> dict:
    return {
        "depth": space.depth,
        "leaf_measures": [float(x) for x in space.leaf_measure],
        "levels": [[int(s) for s in space.sizes(i)] for i in range(space.depth + 1)],
    }


def serialize(space: FilteredSpace) -> str:
    return json.dumps(to_dict(space))


def build_from_spec(document) -> FilteredSpace:
    """Build a space from a JSON document (string, bytes or parsed mapping).

    Required fields: ``depth``, ``leaf_measures`` and ``levels`` where
    ``levels[i]`` lists the leaf counts of the level-``i`` nodes in order.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise MalformedDocumentError(f"not valid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise MalformedDocumentError("document must be a JSON object")
    missing = {"depth", "leaf_measures", "levels"} - set(document)
    if missing:
        raise MalformedDocumentError(f"missing fields: {sorted(missing)}")
    depth, masses, levels = document["depth"], document["leaf_measures"], document["levels"]
    if not isinstance(depth, int) or isinstance(depth, bool) or depth < 0:
        raise MalformedDocumentError("depth must be a nonnegative integer")
    if not isinstance(masses, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in masses
    ):
        raise MalformedDocumentError("leaf_measures must be an array of numbers")
    if not isinstance(levels, list) or not all(
        isinstance(lv, list) and all(isinstance(s, int) and not isinstance(s, bool) for s in lv)
        for lv in levels
    ):
        raise MalformedDocumentError("levels must be an array of arrays of integers")
    if len(levels) != depth + 1:
        raise MalformedDocumentError(f"depth {depth} requires {depth + 1} levels, got {len(levels)}")
    return FilteredSpace(masses, levels)


def load_space(path: str | Path) -> FilteredSpace:
    return build_from_spec(Path(path).read_text())
