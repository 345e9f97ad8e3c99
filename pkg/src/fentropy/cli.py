"""Batch entry point: each subcommand runs one experiment and writes CSV or JSON.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 a checked
inequality or identity failed (the witness is printed to stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .bernoulli import BernoulliFinsetSystem, BernoulliSource, exact_entropy_finset_action, phi, separation_test
from .cocycle import (
    OdometerCocycle,
    OdometerSystem,
    build_skew,
    cocycle_identity_check,
    cocycle_sizes,
    odometer_flip_moments,
    odometer_skew_entropy,
)
from .engine import (
    FiniteNonsingularSystem,
    cyclic_shift_system,
    exact_entropy_finite,
    mc_entropy,
    random_finite_system,
    random_measure,
    summarize,
    two_point_swap,
)
from .finset import (
    FINSET,
    INTEGER,
    CyclicGroup,
    FinSet,
    FinsetGroup,
    MeasureFormatError,
    delta,
    expected_size_and_max,
    load_measure,
    measure,
)
from .spectral import norm_entropy_check, cyclic_gap_curve, jensen_bound_check

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VIOLATION = 4

DEFAULT_SWEEP_GRID = tuple(0.5 + 2.0**-k for k in range(2, 13))
DEFAULT_Q_GRID = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))
DEFAULT_N_LIST = tuple(2**k for k in range(1, 9))


class ConfigError(Exception):
    pass


class Violation(Exception):
    def __init__(self, message: str, records: list[dict], meta: dict | None = None):
        super().__init__(message)
        self.records = records
        self.meta = meta or {}


@dataclass
class ExperimentConfig:
    command: str = ""
    mu: str | None = None
    skew_mu: str | None = None
    p: float | None = None
    p_grid: tuple[float, ...] | None = None
    q: float = 0.3
    samples: int = 100_000
    seed: int = 42
    trunc: int = 40
    out: str | None = None
    format: str = "csv"
    threads: int = os.cpu_count() or 1
    alpha: float = 0.01
    system: str = "bernoulli"
    n_list: tuple[int, ...] = DEFAULT_N_LIST
    random: int = 0
    indices: int = 20

    def validate(self) -> None:
        if self.samples < 1:
            raise ConfigError("--samples must be >= 1")
        if self.trunc < 0:
            raise ConfigError("--trunc must be >= 0")
        if self.format not in ("csv", "json"):
            raise ConfigError("--format must be csv or json")
        if self.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("--alpha must lie in (0, 1)")
        for p in self.grid(allow_default=False):
            if not 0.0 < p < 1.0:
                raise ConfigError(f"p = {p} is outside (0, 1)")

    def grid(self, default: tuple[float, ...] = (0.75,), allow_default: bool = True) -> tuple[float, ...]:
        if self.p_grid is not None:
            return tuple(self.p_grid)
        if self.p is not None:
            return (self.p,)
        return default if allow_default else ()


# ---------------------------------------------------------------- helpers


def _load_mu(path: str | None, default, group_cls=None):
    if path is None:
        return default
    try:
        mu = load_measure(path)
    except MeasureFormatError as exc:
        raise ConfigError(f"bad measure file {path}: {exc}") from exc
    if group_cls is not None and not isinstance(mu.group, group_cls):
        raise ConfigError(f"{path}: expected a {group_cls.__name__} measure, got {mu.group.tag}")
    return mu


def _finite_system(name: str, p: float, seed: int) -> FiniteNonsingularSystem:
    if name == "swap":
        return two_point_swap(p)
    kind, _, arg = name.partition(":")
    try:
        if kind == "cycle":
            return cyclic_shift_system(int(arg))
        if kind == "random":
            return random_finite_system(np.random.default_rng([seed, int(arg)]))
    except ValueError as exc:
        raise ConfigError(f"bad system {name!r}: {exc}") from exc
    raise ConfigError(f"unknown finite system {name!r} (swap, cycle:N, random:K)")


def _default_finite_mu(system: FiniteNonsingularSystem):
    if isinstance(system.group, CyclicGroup):
        return delta(1, system.group)
    return measure([(1, 0.5), (-1, 0.5)], INTEGER)


# ---------------------------------------------------------------- commands


def cmd_entropy_exact(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    mu = _load_mu(cfg.mu, delta(FinSet([1]), FINSET), FinsetGroup)
    size, top = expected_size_and_max(mu)
    rows = [
        {"p": p, "entropy": exact_entropy_finset_action(mu, p), "expected_size": size, "expected_max": top}
        for p in cfg.grid()
    ]
    return rows, {"samples": 0, "tail": 0.0}


def cmd_sweep(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    grid = cfg.grid(DEFAULT_SWEEP_GRID)
    if not grid:
        raise ConfigError("empty p grid")
    if any(not 0.5 < p < 1.0 for p in grid):
        raise ConfigError("sweep grid values must lie in (1/2, 1)")
    if any(a <= b for a, b in zip(grid, grid[1:])):
        raise ConfigError("sweep grid must be strictly decreasing toward 1/2")
    mu = _load_mu(cfg.mu, delta(FinSet([1]), FINSET), FinsetGroup)
    skew_mu = _load_mu(cfg.skew_mu, delta(1, INTEGER))
    if skew_mu.group != INTEGER:
        raise ConfigError("the skew measure must live on the integers")
    # the base expectation does not depend on p, so one set of base samples serves every row
    sizes = summarize(cocycle_sizes(skew_mu, OdometerCocycle(), OdometerSystem(), cfg.samples, cfg.seed), cfg.seed)
    rows = []
    for p in grid:
        f = phi(p)
        rows.append(
            {
                "p": p,
                "exact_finset_entropy": exact_entropy_finset_action(mu, p),
                "odometer_skew_entropy": f * sizes.mean,
                "stderr": f * sizes.stderr,
            }
        )
    return rows, {"samples": cfg.samples, "tail": 0.0}


def cmd_cocycle_check(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    report = cocycle_identity_check(OdometerCocycle(), OdometerSystem(), cfg.samples, cfg.seed)
    sizes = summarize(cocycle_sizes(delta(1, INTEGER), OdometerCocycle(), OdometerSystem(), cfg.samples, cfg.seed), cfg.seed)
    exact_size, exact_max = odometer_flip_moments(1)
    witness = ""
    if report.witness is not None:
        g, h, x = report.witness
        witness = f"g={g} h={h} x_seed={x.seed}"
    row = {
        "system": "odometer",
        "trials": report.trials,
        "passed": report.passed,
        "witness": witness,
        "mean_flips_k1": sizes.mean,
        "stderr_flips_k1": sizes.stderr,
        "exact_flips_k1": exact_size,
        "exact_max_k1": exact_max,
    }
    if not report.passed:
        raise Violation(f"cocycle identity failed: {witness}", [row], {"samples": cfg.samples, "tail": 0.0})
    return [row], {"samples": cfg.samples, "tail": 0.0}


def cmd_mc_entropy(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    rows = []
    name = cfg.system
    for p in cfg.grid():
        if name == "bernoulli":
            system: Any = BernoulliFinsetSystem(p)
            mu = _load_mu(cfg.mu, delta(FinSet([1]), FINSET))
        elif name in ("odometer", "skew"):
            base = OdometerSystem()
            system = base if name == "odometer" else build_skew(base, OdometerCocycle(), p)
            mu = _load_mu(cfg.mu, delta(1, INTEGER))
        else:
            system = _finite_system(name, p, cfg.seed)
            mu = _load_mu(cfg.mu, _default_finite_mu(system))
        if mu.group != system.group:
            raise ConfigError(f"measure group {mu.group.tag} does not match system {name}")
        if name == "bernoulli":
            exact = exact_entropy_finset_action(mu, p)
        elif name == "odometer":
            exact = 0.0
        elif name == "skew":
            exact = odometer_skew_entropy(mu, p)
        else:
            exact = exact_entropy_finite(system, mu)
        est = mc_entropy(system, mu, cfg.samples, cfg.seed, workers=cfg.threads)
        rows.append(
            {"system": name, "p": p, "mean": est.mean, "stderr": est.stderr, "n_samples": est.n_samples, "exact": exact}
        )
    return rows, {"samples": cfg.samples, "tail": 0.0}


def _systems_for(cfg: ExperimentConfig, q_default: tuple[float, ...]):
    """(label, system, measure) triples: the named family over the p grid plus random systems."""
    out = []
    if cfg.system in ("swap", "bernoulli"):
        for q in cfg.grid(q_default):
            s = two_point_swap(q)
            out.append((f"swap:{q}", s, _load_mu(cfg.mu, _default_finite_mu(s))))
    elif cfg.system.startswith("cycle:"):
        s = _finite_system(cfg.system, 0.5, cfg.seed)
        out.append((cfg.system, s, _load_mu(cfg.mu, _default_finite_mu(s))))
    elif not cfg.system.startswith("random"):
        raise ConfigError(f"unknown system {cfg.system!r}")
    rng = np.random.default_rng(cfg.seed)
    for k in range(cfg.random):
        s = random_finite_system(rng)
        out.append((f"random:{k}", s, random_measure(s.group, rng)))
    for label, s, mu in out:
        if mu.group != s.group:
            raise ConfigError(f"measure group {mu.group.tag} does not match system {label}")
    return out


def cmd_spectral(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    meta = {"samples": 0, "tail": 2.0 ** (-cfg.trunc - 1)}
    rows = []
    bad = []
    for label, system, mu in _systems_for(cfg, (0.75,)):
        r = norm_entropy_check(system, mu, cfg.trunc)
        rows.append({"system": label, **asdict(r)})
        if not r.holds:
            bad.append(label)
    if bad:
        raise Violation(f"norm and entropy bound fails for {', '.join(bad)}", rows, meta)
    return rows, meta


def cmd_jensen(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    rows = []
    bad = []
    for label, system, _ in _systems_for(cfg, DEFAULT_Q_GRID):
        elements = system.group.elements() or list(range(-3, 4))
        for g in elements:
            r = jensen_bound_check(system, g)
            rows.append({"system": label, "g": g, "lhs": r.lhs, "rhs": r.rhs, "holds": r.holds})
            if not r.holds:
                bad.append(f"{label} g={g}")
    if bad:
        raise Violation(f"Jensen bound fails for {', '.join(bad)}", rows, {"samples": 0, "tail": 0.0})
    return rows, {"samples": 0, "tail": 0.0}


def cmd_quotient_curve(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    mu = _load_mu(cfg.mu, measure([(1, 0.5), (-1, 0.5)], INTEGER))
    if mu.group != INTEGER:
        raise ConfigError("quotient curves need a measure on the integers")
    try:
        rows = [asdict(r) for r in cyclic_gap_curve(cfg.n_list, mu, cfg.trunc)]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return rows, {"samples": 0, "tail": 2.0 ** (-cfg.trunc - 1)}


def cmd_separation(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    if cfg.samples < 30:
        raise ConfigError("separation test needs --samples >= 30")
    rows = []
    for p in cfg.grid():
        if p <= 0.5:
            raise ConfigError("separation test needs p > 1/2")
        r = separation_test(BernoulliSource(cfg.q), range(1, cfg.indices + 1), p, cfg.samples, cfg.alpha, cfg.seed)
        rows.append({"q": cfg.q, **asdict(r)})
    return rows, {"samples": cfg.samples, "tail": 0.0}


COMMANDS: dict[str, Callable[[ExperimentConfig], tuple[list[dict], dict]]] = {
    "entropy-exact": cmd_entropy_exact,
    "sweep": cmd_sweep,
    "cocycle-check": cmd_cocycle_check,
    "mc-entropy": cmd_mc_entropy,
    "spectral": cmd_spectral,
    "jensen": cmd_jensen,
    "quotient-curve": cmd_quotient_curve,
    "separation": cmd_separation,
}


# ---------------------------------------------------------------- output


def _check_finite(records: list[dict]) -> None:
    for rec in records:
        for k, v in rec.items():
            if isinstance(v, float) and not math.isfinite(v):
                raise Violation(f"non-finite value in column {k}: {rec}", records, {})


def render(records: list[dict], meta: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"meta": meta, "records": records}, indent=2) + "\n"
    buf = io.StringIO()
    cols = list(records[0]) + list(meta) if records else list(meta)
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({**rec, **meta})
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


# ---------------------------------------------------------------- argument parsing


def _float_list(s: str) -> tuple[float, ...]:
    return tuple(float(v) for v in s.split(",") if v.strip())


def _int_list(s: str) -> tuple[int, ...]:
    return tuple(int(v) for v in s.split(",") if v.strip())


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default settings; flags override it")
    common.add_argument("--mu", help="measure file")
    common.add_argument("--skew-mu", dest="skew_mu", help="measure on the integers for the odometer skew column")
    p_group = common.add_mutually_exclusive_group()
    p_group.add_argument("--p", type=float)
    p_group.add_argument("--p-grid", dest="p_grid", type=_float_list, help="comma-separated p values")
    common.add_argument("--q", type=float, help="parameter of the sampled measure for the separation test")
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--trunc", type=int)
    common.add_argument("--out")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--threads", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--system", help="bernoulli, odometer, skew, swap, cycle:N or random:K")
    common.add_argument("--n-list", dest="n_list", type=_int_list)
    common.add_argument("--random", type=int, help="number of random finite systems to add")
    common.add_argument("--indices", type=int, help="coordinates 1..K used by the separation test")

    parser = _Parser(prog="fentropy", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def make_config(argv: list[str] | None) -> ExperimentConfig:
    args = vars(build_parser().parse_args(argv))
    settings: dict[str, Any] = {}
    if args.get("config"):
        text = Path(args["config"]).read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad config file: {exc}") from exc
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        settings.update(doc)
    settings.update({k: v for k, v in args.items() if v is not None and k != "config"})
    for key in ("p_grid", "n_list"):
        if isinstance(settings.get(key), list):
            settings[key] = tuple(settings[key])
    try:
        cfg = ExperimentConfig(**settings)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def run(cfg: ExperimentConfig) -> tuple[str, int]:
    meta_base = {"seed": cfg.seed, "version": __version__}
    status = 0
    try:
        records, meta = COMMANDS[cfg.command](cfg)
        _check_finite(records)
    except Violation as v:
        records, meta = v.records, v.meta
        print(f"property violation: {v}", file=sys.stderr)
        status = EXIT_VIOLATION
    meta = {**meta_base, **meta}
    return render(records, meta, cfg.format), status


def main(argv: list[str] | None = None) -> int:
    try:
        try:
            cfg = make_config(argv)
        except SystemExit as exc:  # argparse usage errors, --help, --version
            return int(exc.code or 0)
        text, status = run(cfg)
        _emit(text, cfg.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, MeasureFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":
    sys.exit(main())
