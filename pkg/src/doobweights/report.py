"""Pass/fail reports shared by all verifiers, and CSV formatting."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

RTOL = 1e-12


def fmt(x: Any) -> str:
    """Locale-free CSV cell; floats get 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def to_csv(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def rel_slack(lhs, rhs) -> np.ndarray | float:
    """(rhs - lhs) relative to the size of rhs; >= 0 means the bound holds."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(np.abs(rhs), np.finfo(float).tiny)
    out = (rhs - lhs) / scale
    return float(out) if out.ndim == 0 else out


def first_violation(lhs, rhs, mask=None, rtol: float = RTOL):
    """Index of the first leaf where ``lhs <= rhs`` fails beyond ``rtol``, else None.

    Also returns the smallest relative slack seen on the mask.
    """
    lhs = np.broadcast_to(np.asarray(lhs, dtype=float), np.shape(rhs) or np.shape(lhs))
    rhs = np.broadcast_to(np.asarray(rhs, dtype=float), lhs.shape)
    if mask is None:
        mask = np.ones(lhs.shape, dtype=bool)
    if not mask.any():
        return None, np.inf
    slack = rel_slack(lhs[mask], rhs[mask])
    bad = lhs[mask] > rhs[mask] + rtol * np.abs(rhs[mask])
    worst = float(np.min(slack))
    if bad.any():
        return int(np.flatnonzero(mask)[np.argmax(bad)]), worst
    return None, worst


@dataclass
class Check:
    name: str
    passed: bool
    margin: float = float("nan")
    detail: dict = field(default_factory=dict)


@dataclass
class Report:
    """Named collection of checks; passes iff every check passes."""

    title: str
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, passed: bool, margin: float = float("nan"), **detail) -> bool:
        self.checks.append(Check(name, bool(passed), float(margin), detail))
        return bool(passed)

    def extend(self, other: Report, prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.margin, c.detail))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def first_failure(self) -> Check | None:
        bad = self.failures()
        return bad[0] if bad else None

    def min_margin(self, prefix: str = "") -> float:
        vals = [c.margin for c in self.checks if c.name.startswith(prefix) and not np.isnan(c.margin)]
        return min(vals) if vals else float("nan")

    def summary(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            m = "" if np.isnan(c.margin) else f"  margin={c.margin:.6g}"
            lines.append(f"  [{'ok' if c.passed else 'FAIL'}] {c.name}{m}")
        return "\n".join(lines)

    def to_json(self) -> str:
        def clean(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (np.integer,)):
                return int(v)
            if isinstance(v, (np.floating,)):
                return float(v)
            return v

        return json.dumps(
            {
                "title": self.title,
                "passed": self.passed,
                "checks": [
                    {
                        "name": c.name,
                        "passed": c.passed,
                        "margin": None if np.isnan(c.margin) else c.margin,
                        "detail": {k: clean(v) for k, v in c.detail.items()},
                    }
                    for c in self.checks
                ],
            }
        )
