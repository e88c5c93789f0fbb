"""Command-line entry point.

Exit codes: 0 when every asserted inequality holds, 1 on a verification
failure (the first counterexample is printed to stderr as JSON), 2 on usage
errors.  Relative output paths are resolved against ``$DOOBWEIGHTS_OUTPUT_DIR``
when it is set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import instances as inst
from .bounds import sharpness_experiment
from .constants import figure1_csv, figure1_data, optimal_a, profile, verify_minimizer, write_figure1_svg
from .errors import DoobWeightsError
from .filtration import FilteredSpace, build_dyadic, load_space
from .operators import cond_exp, doob_maximal, geometric_scale
from .principal import build_principal_forest, lemma_domination_check, verify_properties
from .report import Report, to_csv
from .stopping import build_decomposition, verify_chain, verify_partition
from .suites import SuiteResult, bracket_suite
from .weights import ap_characteristic, power_weight

OUTPUT_ENV = "DOOBWEIGHTS_OUTPUT_DIR"
COMMANDS = ("ap", "maximal", "principal", "stopping", "verify", "sharpness", "constants", "figure1")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    dyadic: int | None = None
    space: str | None = None
    p: list[float] = field(default_factory=lambda: [2.0])
    a: float | None = None
    b: float = 2.0
    alpha: list[float] = field(default_factory=list)
    f: list[float] | None = None
    weight: list[float] | None = None
    level: int = 0
    scale: int | None = None
    seed: int = 0
    trials: int = 100
    budget: int = 0
    pmin: float = 1.1
    pmax: float = 10.0
    samples: int = 200
    output: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise DoobWeightsError(f"unknown command {self.command!r}")
        if any(not p > 1 for p in self.p):
            raise DoobWeightsError("p must exceed 1")
        if self.a is not None and not self.a > 1:
            raise DoobWeightsError("a must exceed 1")
        if not self.b > 1:
            raise DoobWeightsError("b must exceed 1")
        if any(not a > -1 for a in self.alpha):
            raise DoobWeightsError("alpha must exceed -1")
        if self.trials < 0 or self.budget < 0 or self.samples < 2:
            raise DoobWeightsError("trials and budget must be >= 0, samples >= 2")
        if self.dyadic is not None and self.space is not None:
            raise DoobWeightsError("give either --dyadic or --space, not both")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="doobweights", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, space=True):
        if space:
            sp.add_argument("--dyadic", type=int, metavar="L", help="uniform dyadic space of depth L")
            sp.add_argument("--space", metavar="PATH", help="JSON space document")
        sp.add_argument("--p", type=_floats, nargs="+", default=[[2.0]], help="exponent(s) p > 1")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--output", "-o", metavar="PATH")

    sp = sub.add_parser("ap", help="A_p characteristic of a weight")
    common(sp)
    sp.add_argument("--weight", type=_floats, nargs="+", help="leaf values of v (default: random)")
    sp.add_argument("--alpha", type=_floats, nargs="+", default=[], help="use the power weight x^alpha")

    sp = sub.add_parser("maximal", help="Doob maximal function of f")
    common(sp)
    sp.add_argument("--f", type=_floats, nargs="+", help="leaf values of f (default: random)")

    sp = sub.add_parser("principal", help="principal-set forests, properties and domination")
    common(sp)
    sp.add_argument("--f", type=_floats, nargs="+", help="leaf values of h >= 0 (default: random)")
    sp.add_argument("--a", type=float, help="a > 1 (default: (2p-1)/(2p-2))")
    sp.add_argument("--level", type=int, default=0, help="base level i")
    sp.add_argument("--scale", type=int, help="scale k (default: every scale present)")

    sp = sub.add_parser("stopping", help="stopping-time decomposition and chain")
    common(sp)
    sp.add_argument("--f", type=_floats, nargs="+")
    sp.add_argument("--weight", type=_floats, nargs="+")
    sp.add_argument("--b", type=float, default=2.0)

    sp = sub.add_parser("verify", help="A_p bracket suite on random instances")
    common(sp)
    sp.add_argument("--trials", type=int, default=100)

    sp = sub.add_parser("sharpness", help="power-weight sharpness table")
    common(sp)
    sp.add_argument("--alpha", type=_floats, nargs="+", default=[[-0.3, -0.5, -0.7, -0.9]])
    sp.add_argument("--budget", type=int, default=0)

    sp = sub.add_parser("constants", help="constant profile table")
    common(sp, space=False)

    sp = sub.add_parser("figure1", help="phi and psi curves as CSV and SVG")
    common(sp, space=False)
    sp.add_argument("--pmin", type=float, default=1.1)
    sp.add_argument("--pmax", type=float, default=10.0)
    sp.add_argument("--samples", type=int, default=200)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    keys = RunConfig.__dataclass_fields__
    args = {}
    for k, v in vars(ns).items():
        if k in keys and v is not None:
            # list flags accept "1,2,3" and "1 2 3"; each token parses to a list
            args[k] = [x for part in v for x in part] if isinstance(v, list) and v and isinstance(v[0], list) else v
    return RunConfig(**args)


def _out_path(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        _out_path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _space(cfg: RunConfig, default_depth: int = 4) -> FilteredSpace:
    if cfg.space:
        return load_space(cfg.space)
    return build_dyadic(cfg.dyadic if cfg.dyadic is not None else default_depth)


def _values(space: FilteredSpace, given, fallback) -> np.ndarray:
    if given is None:
        return fallback
    arr = np.asarray(given, dtype=float)
    if arr.size != space.n_leaves:
        raise DoobWeightsError(f"expected {space.n_leaves} leaf values, got {arr.size}")
    return arr


def _fail(report_like) -> int:
    if isinstance(report_like, Report):
        c = report_like.first_failure()
        payload = {"report": report_like.title, "invariant": c.name, "detail": c.detail}
    else:
        payload = report_like
    sys.stderr.write("verification failed: " + json.dumps(payload, default=str) + "\n")
    return EXIT_FAIL


def cmd_ap(cfg: RunConfig) -> int:
    space = _space(cfg)
    rng = inst.instance_rngs(cfg.seed, 1)[0]
    reports = []
    if cfg.alpha:
        weights = [(f"alpha={a:g}", power_weight(space, a)) for a in cfg.alpha]
    else:
        weights = [("weight", _values(space, cfg.weight, inst.random_weight(rng, space.n_leaves)))]
    for p in cfg.p:
        for label, v in weights:
            rep = ap_characteristic(space, v, p)
            reports.append({"label": label, **rep.to_dict()})
            if rep.characteristic < 1 - 1e-12:
                _emit(cfg, json.dumps(reports, indent=2) + "\n")
                return _fail({"invariant": "[v]_{A_p} >= 1", "label": label, "p": p})
    _emit(cfg, json.dumps(reports, indent=2) + "\n")
    return EXIT_OK


def cmd_maximal(cfg: RunConfig) -> int:
    space = _space(cfg)
    rng = inst.instance_rngs(cfg.seed, 1)[0]
    f = _values(space, cfg.f, inst.random_signed(rng, space.n_leaves))
    mf = doob_maximal(space, f)
    _emit(cfg, to_csv(["leaf", "f", "Mf"], [[i, f[i], mf[i]] for i in range(space.n_leaves)]))
    return EXIT_OK


def cmd_principal(cfg: RunConfig) -> int:
    space = _space(cfg)
    rng = inst.instance_rngs(cfg.seed, 1)[0]
    h = _values(space, cfg.f, inst.random_nonneg(rng, space.n_leaves))
    a = cfg.a if cfg.a is not None else optimal_a(cfg.p[0])
    i = space.check_level(cfg.level)
    avg = cond_exp(space, h, i)
    if cfg.scale is not None:
        scales = [cfg.scale]
    else:
        scales = [int(k) for k in np.unique(geometric_scale(avg[avg > 0], a))] if np.any(avg > 0) else []
    forests, status = [], EXIT_OK
    for k in scales:
        forest = build_principal_forest(space, h, a, i, k)
        props, lemma = verify_properties(forest), lemma_domination_check(forest)
        print(props.summary())
        print(lemma.summary())
        forests.append(json.loads(forest.to_json()))
        for rep in (props, lemma):
            if not rep.passed and status == EXIT_OK:
                status = _fail(rep)
    if cfg.output:
        _emit(cfg, json.dumps(forests) + "\n")
    return status


def cmd_stopping(cfg: RunConfig) -> int:
    space = _space(cfg)
    rng = inst.instance_rngs(cfg.seed, 1)[0]
    f = _values(space, cfg.f, inst.random_signed(rng, space.n_leaves))
    v = _values(space, cfg.weight, inst.random_weight(rng, space.n_leaves))
    p = cfg.p[0]
    dec = build_decomposition(space, f, v, p, cfg.b)
    part, chain = verify_partition(dec, space, f), verify_chain(dec, space, f, v, p)
    _emit(cfg, dec.to_csv())
    sys.stderr.write(part.summary() + "\n" + chain.summary() + "\n")
    for rep in (part, chain):
        if not rep.passed:
            return _fail(rep)
    return EXIT_OK


def _suite_exit(cfg: RunConfig, result: SuiteResult) -> int:
    _emit(cfg, result.to_csv())
    sys.stderr.write(f"{result.name}: {result.checks} checks, {len(result.failures)} failures\n")
    return EXIT_OK if result.passed else _fail(result.failures[0])


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.space:
        raise DoobWeightsError("verify draws its own spaces; use --dyadic L")
    merged = None
    for p in cfg.p:
        res = bracket_suite(cfg.seed, cfg.trials, p=p, depth=cfg.dyadic)
        if merged is None:
            merged = res
        else:
            merged.rows.extend(res.rows)
            merged.failures.extend(res.failures)
            merged.checks += res.checks
    return _suite_exit(cfg, merged)


def cmd_sharpness(cfg: RunConfig) -> int:
    depth = cfg.dyadic if cfg.dyadic is not None else 12
    res = sharpness_experiment(cfg.p[0], cfg.alpha, depth, budget=cfg.budget, seed=cfg.seed)
    _emit(cfg, res.to_csv())
    sys.stderr.write(f"normalized band {res.band:.6g} (limit 4), [v] span {res.ap_span:.6g}\n")
    if not res.passed:
        return _fail({"invariant": "best_ratio/[v]^(1/(p-1)) within a factor-4 band", "band": res.band})
    return EXIT_OK


def cmd_constants(cfg: RunConfig) -> int:
    rows, status = [], EXIT_OK
    for p in cfg.p:
        prof = profile(p)
        rows.extend([[p, name, value] for name, value in prof.rows()])
        rep = verify_minimizer(p, np.geomspace(1 + 1e-3, 1e3, 500))
        if not prof.phi >= prof.psi:
            rep.add("phi >= psi", False)
        if not rep.passed and status == EXIT_OK:
            status = _fail(rep)
    _emit(cfg, to_csv(["p", "name", "value"], rows))
    return status


def cmd_figure1(cfg: RunConfig) -> int:
    rows = figure1_data(cfg.pmin, cfg.pmax, cfg.samples)
    csv_path = _out_path(cfg.output or "figure1.csv")
    csv_path.write_text(figure1_csv(rows))
    write_figure1_svg(rows, csv_path.with_suffix(".svg"))
    sys.stderr.write(f"wrote {csv_path} and {csv_path.with_suffix('.svg')}\n")
    if not np.all(rows[:, 1] >= rows[:, 2]):
        return _fail({"invariant": "phi >= psi", "p": float(rows[np.argmax(rows[:, 1] < rows[:, 2]), 0])})
    if not (np.all(np.diff(rows[:, 1]) < 0) and np.all(np.diff(rows[:, 2]) < 0)):
        return _fail({"invariant": "phi and psi strictly decreasing"})
    return EXIT_OK


HANDLERS = {
    "ap": cmd_ap,
    "maximal": cmd_maximal,
    "principal": cmd_principal,
    "stopping": cmd_stopping,
    "verify": cmd_verify,
    "sharpness": cmd_sharpness,
    "constants": cmd_constants,
    "figure1": cmd_figure1,
}


def run(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        return HANDLERS[cfg.command](cfg)
    except DoobWeightsError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
