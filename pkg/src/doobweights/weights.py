"""A_p weights on a filtered space."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .constants import conjugate
from .errors import ParameterError, WeightError
from .filtration import FilteredSpace
from .operators import check_weight, node_averages


def dual_weight(v, p: float) -> np.ndarray:
    """sigma = v**(1 - p') = v**(-1/(p-1)).

    This is the reading under which the A_p condition and the estimates built
    on it are consistent; ``v**(1/(p-1))`` is not used anywhere.
    """
    conjugate(p)
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise WeightError("weights must be strictly positive and finite")
    return v ** (-1.0 / (p - 1))


@dataclass(frozen=True)
class ApReport:
    p: float
    p_conj: float
    characteristic: float
    node_values: tuple[np.ndarray, ...] = field(repr=False)
    argmax: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "p_conj": self.p_conj,
            "characteristic": self.characteristic,
            "argmax": {"level": self.argmax[0], "node": self.argmax[1]},
            "node_values": [[float(x) for x in level] for level in self.node_values],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def ap_node_values(space: FilteredSpace, v, p: float) -> list[np.ndarray]:
    """E_j(v) * E_j(sigma)**(p-1) for every node of every level."""
    v = check_weight(space, v)
    sigma = dual_weight(v, p)
    return [
        node_averages(space, v, j) * node_averages(space, sigma, j) ** (p - 1)
        for j in range(space.depth + 1)
    ]


def ap_characteristic(space: FilteredSpace, v, p: float) -> ApReport:
    """[v]_{A_p}: the largest node value of E(v) E(sigma)^{p-1}."""
    values = ap_node_values(space, v, p)
    best, where = -np.inf, (0, 0)
    for j, vals in enumerate(values):
        node = int(np.argmax(vals))
        if vals[node] > best:
            best, where = float(vals[node]), (j, node)
    for vals in values:
        vals.setflags(write=False)
    return ApReport(p=p, p_conj=conjugate(p), characteristic=best, node_values=tuple(values), argmax=where)


def power_weight(space: FilteredSpace, alpha: float) -> np.ndarray:
    """Leaf averages of x**alpha on [0, 1), leaves placed by normalized cumulative mass."""
    if not alpha > -1:
        raise ParameterError(f"x**alpha is not integrable near 0 for alpha={alpha!r}")
    if not space.is_dyadic():
        raise ParameterError("power weights need a dyadic space")
    edges = np.concatenate(([0.0], np.cumsum(space.leaf_measure))) / space.total_mass
    edges[-1] = 1.0
    lo, hi = edges[:-1], edges[1:]
    e = alpha + 1.0
    return (hi**e - lo**e) / (e * (hi - lo))
