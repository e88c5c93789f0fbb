"""Shared strategies and slow reference implementations."""

import numpy as np
from hypothesis import settings, strategies as st

from doobweights.filtration import FilteredSpace, build_dyadic

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

masses = st.floats(0.05, 20.0, allow_nan=False)
values = st.floats(-50.0, 50.0, allow_nan=False)
positive = st.floats(0.01, 100.0, allow_nan=False)
exponents = st.sampled_from([1.25, 1.5, 2.0, 3.0, 5.0])


@st.composite
def dyadic_spaces(draw, max_depth=5):
    depth = draw(st.integers(0, max_depth))
    mu = draw(st.lists(masses, min_size=2**depth, max_size=2**depth))
    return build_dyadic(depth, mu)


@st.composite
def tree_spaces(draw, max_depth=4, max_branch=3):
    """Random refinement trees, single-child nodes allowed."""
    depth = draw(st.integers(0, max_depth))
    children = []
    width = 1
    for _ in range(depth):
        c = draw(st.lists(st.integers(1, max_branch), min_size=width, max_size=width))
        children.append(c)
        width = sum(c)
    sizes = [[1] * width]
    for c in reversed(children):
        finer, coarse, pos = sizes[0], [], 0
        for n in c:
            coarse.append(sum(finer[pos:pos + n]))
            pos += n
        sizes.insert(0, coarse)
    mu = draw(st.lists(masses, min_size=width, max_size=width))
    return FilteredSpace(mu, sizes)


@st.composite
def space_and(draw, kind, spaces=None):
    space = draw(spaces if spaces is not None else dyadic_spaces())
    n = space.n_leaves
    return space, np.array(draw(st.lists(kind, min_size=n, max_size=n)))


def node_groups(space, i):
    """Leaf index lists of every node at level i."""
    return [list(range(s, s + z)) for s, z in zip(space.starts(i), space.sizes(i))]


def brute_cond_exp(space, f, i, w=None):
    mu = space.leaf_measure
    w = np.ones_like(mu) if w is None else w
    out = np.empty(space.n_leaves)
    for idx in node_groups(space, i):
        out[idx] = sum(f[j] * w[j] * mu[j] for j in idx) / sum(w[j] * mu[j] for j in idx)
    return out


def brute_maximal(space, f, start=0, w=None):
    return np.max([np.abs(brute_cond_exp(space, f, i, w)) for i in range(start, space.depth + 1)], axis=0)


def brute_ap(space, v, p):
    sigma = v ** (-1 / (p - 1))
    best = 0.0
    for i in range(space.depth + 1):
        ev, es = brute_cond_exp(space, v, i), brute_cond_exp(space, sigma, i)
        best = max(best, float(np.max(ev * es ** (p - 1))))
    return best


# -- acceptance summary ---------------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[0].split("[")[1])):
            terminalreporter.write_line(line)
