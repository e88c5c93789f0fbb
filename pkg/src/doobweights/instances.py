"""Seeded random instances for the verification suites.

Generator: numpy ``PCG64`` streams derived from ``SeedSequence(seed).spawn(n)``,
one independent stream per instance, so instance ``t`` of a suite does not
depend on how many instances ran before it.
"""

from __future__ import annotations

import numpy as np

from .filtration import FilteredSpace, build_dyadic


def instance_rngs(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n)]


def random_masses(rng: np.random.Generator, n: int) -> np.ndarray:
    kind = rng.integers(3)
    if kind == 0:
        return np.full(n, 1.0 / n)
    if kind == 1:
        return rng.uniform(0.05, 1.0, n)
    return rng.lognormal(0.0, 1.0, n)


def random_dyadic(rng: np.random.Generator, max_depth: int, min_depth: int = 0) -> FilteredSpace:
    depth = int(rng.integers(min_depth, max_depth + 1))
    return build_dyadic(depth, random_masses(rng, 2**depth))


def random_tree(rng: np.random.Generator, max_depth: int, max_branch: int = 3) -> FilteredSpace:
    """Tree with random branching (including single-child nodes) per node."""
    depth = int(rng.integers(0, max_depth + 1))
    children = []
    width = 1
    for _ in range(depth):
        c = rng.integers(1, max_branch + 1, size=width)
        children.append(c)
        width = int(c.sum())
    sizes = [np.ones(width, dtype=np.int64)]
    for c in reversed(children):
        finer = sizes[0]
        bounds = np.concatenate(([0], np.cumsum(c)))
        sizes.insert(0, np.add.reduceat(finer, bounds[:-1]))
    return FilteredSpace(random_masses(rng, width), [s.tolist() for s in sizes])


def random_signed(rng: np.random.Generator, n: int) -> np.ndarray:
    kind = rng.integers(4)
    if kind == 0:
        return rng.normal(0.0, 1.0, n)
    if kind == 1:
        return rng.choice([-1.0, 1.0], n) * rng.lognormal(0.0, 1.5, n)
    if kind == 2:
        f = np.zeros(n)
        idx = rng.choice(n, size=max(1, n // 8), replace=False)
        f[idx] = rng.normal(0.0, 10.0, idx.size)
        return f
    return rng.uniform(-1.0, 1.0, n) + rng.normal()


def random_nonneg(rng: np.random.Generator, n: int) -> np.ndarray:
    f = np.abs(random_signed(rng, n))
    if rng.random() < 0.3:
        f[rng.random(n) < 0.5] = 0.0
    if not np.any(f > 0):
        f[int(rng.integers(n))] = 1.0
    return f


def random_weight(rng: np.random.Generator, n: int) -> np.ndarray:
    kind = rng.integers(3)
    if kind == 0:
        return rng.lognormal(0.0, rng.uniform(0.0, 2.0), n)
    if kind == 1:
        return rng.uniform(0.1, 10.0, n)
    x = (np.arange(n) + 0.5) / n
    return x ** rng.uniform(-0.9, 2.0)
