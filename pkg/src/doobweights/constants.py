"""Closed-form constants of the weighted Doob bound and their comparison.

    psi(p) = p**(1/(p-1))
    phi(p) = ((2p-1)/(2p-2))**2 * (2p-1)**(1/(p-1))   (min over a > 1 of a^2 eta^(p'-1))

Powers with exponent 1/(p-1) are evaluated as exp(log1p(.)/(p-1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .report import Report, to_csv

# Smallest p - 1 accepted; below this 1/(p-1) loses all meaning in double precision.
MIN_GAP = 1e-12


def _gap(p: float) -> float:
    if not p > 1:
        raise ParameterError(f"p must exceed 1, got {p!r}")
    d = p - 1.0
    if d < MIN_GAP:
        raise ParameterError(f"p - 1 = {d!r} is below the guard {MIN_GAP}")
    return d


def conjugate(p: float) -> float:
    return p / _gap(p)


def eta(a: float) -> float:
    if not a > 1:
        raise ParameterError(f"a must exceed 1, got {a!r}")
    return a / (a - 1)


def optimal_a(p: float) -> float:
    """(2p-1)/(2p-2), the minimizer of a^2 eta(a)^(p'-1)."""
    return (2 * p - 1) / (2 * _gap(p))


def log_psi(p: float) -> float:
    d = _gap(p)
    return math.log1p(d) / d


def psi(p: float) -> float:
    return math.exp(log_psi(p))


def phi1(p: float) -> float:
    return (1 + 1 / (2 * _gap(p))) ** 2


def log_phi2(p: float) -> float:
    d = _gap(p)
    return math.log1p(2 * d) / d


def phi2(p: float) -> float:
    return math.exp(log_phi2(p))


def log_phi(p: float) -> float:
    return 2 * math.log1p(1 / (2 * _gap(p))) + log_phi2(p)


def phi(p: float) -> float:
    return phi1(p) * phi2(p)


def principal_factor(a: float, p: float) -> float:
    """a^2 eta(a)^(p'-1); multiplied by p' it is the principal-set constant."""
    with np.errstate(over="ignore"):  # a near 1 legitimately gives inf
        return a * a * eta(a) ** (conjugate(p) - 1)


@dataclass(frozen=True)
class ConstantProfile:
    p: float
    p_conj: float
    psi: float
    phi: float
    phi1: float
    phi2: float
    a0: float
    bound_lerner: float
    unweighted: float

    @staticmethod
    def eta(a: float) -> float:
        return eta(a)

    def bound_principal(self, a: float) -> float:
        return principal_factor(a, self.p) * self.p_conj

    def rows(self) -> list[tuple[str, float]]:
        return [
            ("p", self.p),
            ("p_conj", self.p_conj),
            ("psi", self.psi),
            ("phi", self.phi),
            ("phi1", self.phi1),
            ("phi2", self.phi2),
            ("a0", self.a0),
            ("eta(a0)", eta(self.a0)),
            ("bound_lerner", self.bound_lerner),
            ("bound_principal(a0)", self.bound_principal(self.a0)),
            ("unweighted", self.unweighted),
        ]


def profile(p: float) -> ConstantProfile:
    pc = conjugate(p)
    s = psi(p)
    return ConstantProfile(
        p=float(p),
        p_conj=pc,
        psi=s,
        phi=phi(p),
        phi1=phi1(p),
        phi2=phi2(p),
        a0=optimal_a(p),
        bound_lerner=s * pc,
        unweighted=pc,
    )


def verify_minimizer(p: float, grid, rtol: float = 1e-12) -> Report:
    """a0 minimizes a^2 eta^(p'-1) over every grid point."""
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise ParameterError("grid must be nonempty")
    if np.any(grid <= 1):
        raise ParameterError("grid values must exceed 1")
    a0 = optimal_a(p)
    best = principal_factor(a0, p)
    vals = np.array([principal_factor(a, p) for a in grid])
    rep = Report(f"minimizer at p={p:g}")
    rep.add("a0 > 1", a0 > 1, a0 - 1)
    bad = np.flatnonzero(vals < best * (1 - rtol))
    rep.add("phi(a) >= phi(a0) on grid", bad.size == 0,
            float(np.min((vals - best) / best)), a=float(grid[bad[0]]) if bad.size else None)
    rep.add("min_a phi(a) equals closed form phi(p)", abs(best - phi(p)) <= rtol * phi(p),
            -abs(best - phi(p)) / phi(p))
    return rep


def default_grid(lo: float = 1.01, hi: float = 1e6, samples: int = 400) -> np.ndarray:
    return np.geomspace(lo, hi, samples)


def verify_monotonicity_and_limits(grid=None) -> Report:
    """Monotonicity, ordering and limiting behaviour of phi and psi."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    ph = np.array([phi(p) for p in grid])
    ps = np.array([psi(p) for p in grid])
    rep = Report("phi/psi monotonicity and limits")

    rep.add("phi strictly decreasing", bool(np.all(np.diff(ph) < 0)))
    rep.add("psi strictly decreasing", bool(np.all(np.diff(ps) < 0)))
    rep.add("phi1 strictly decreasing", bool(np.all(np.diff([phi1(p) for p in grid]) < 0)))
    rep.add("phi2 strictly decreasing", bool(np.all(np.diff([phi2(p) for p in grid]) < 0)))
    rep.add("phi >= psi", bool(np.all(ph >= ps)), float(np.min(ph - ps)))
    rep.add("ln(2p-1) > 2(p-1)/(2p-1)",
            bool(all(math.log(2 * p - 1) > 2 * (p - 1) / (2 * p - 1) for p in grid)))
    rep.add("1 - 1/p + ln(1/p) < 0", bool(all(1 - 1 / p + math.log(1 / p) < 0 for p in grid)))

    near_one = 1 + 1e-8
    err = abs(psi(near_one) - math.e)
    rep.add("psi(1+1e-8) within 1e-6 of e", err <= 1e-6, 1e-6 - err, value=psi(near_one))
    rep.add("phi(1+1e-8) > 1e15 (diverges at 1+)", phi(near_one) > 1e15, value=phi(near_one))
    err = abs(phi(1e6) - 1)
    rep.add("phi(1e6) within 1e-4 of 1", err <= 1e-4, 1e-4 - err, value=phi(1e6))
    err = abs(psi(1e6) - 1)
    rep.add("psi(1e6) within 1e-4 of 1", err <= 1e-4, 1e-4 - err, value=psi(1e6))

    big = grid[grid >= 100]
    ratio = np.array([log_phi(p) / log_psi(p) for p in big])
    cap = 1 + (1 + math.log(2)) / np.log(big)
    rep.add("ln phi / ln psi > 1 for p >= 100", bool(np.all(ratio > 1)))
    rep.add("ln phi / ln psi <= 1 + (1+ln2)/ln p for p >= 100", bool(np.all(ratio <= cap)),
            float(np.min(cap - ratio)) if big.size else float("nan"))
    rep.add("ln phi / ln psi decreasing for p >= 100", bool(np.all(np.diff(ratio) < 0)))
    return rep


def figure1_data(p_min: float, p_max: float, samples: int) -> np.ndarray:
    """Rows (p, phi(p), psi(p)) on a geometric grid."""
    if not (1 < p_min < p_max):
        raise ParameterError(f"need 1 < p_min < p_max, got {p_min!r}, {p_max!r}")
    if samples < 2:
        raise ParameterError("need at least two samples")
    ps = np.geomspace(p_min, p_max, int(samples))
    return np.array([(p, phi(p), psi(p)) for p in ps])


def figure1_csv(rows: np.ndarray) -> str:
    return to_csv(["p", "phi", "psi"], [list(r) for r in rows])


def write_figure1_svg(rows: np.ndarray, path: str | Path) -> None:
    """Line plot of phi and psi against log p; output is byte-stable for fixed rows."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "doobweights", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(rows[:, 0], rows[:, 1], label=r"$\phi(p)$")
        ax.plot(rows[:, 0], rows[:, 2], label=r"$\psi(p)$")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("p")
        ax.legend()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
