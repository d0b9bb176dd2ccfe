"""Seeded set generators, declarative experiment sweeps and threshold scans.

Every random draw is seeded from a hash of the master seed and the cell
coordinates, so any single cell can be rerun in isolation and a whole sweep
produces identical bytes however it is parallelised.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field, fields
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import BudgetExceededError, ConfigError, FFDistError
from .expressions import parse_expression
from .field import FpSet, PrimeField, doubling_stats, is_prime
from .incidence import (
    hanson_check,
    random_lines,
    random_planes,
    random_points2,
    random_points3,
    vinh_check,
    vinh_plane_check,
)
from .theorems import (
    construction_sweep,
    coverage,
    lemma_energy_report,
    thm2_report,
    variant_bounds_report,
)

log = logging.getLogger(__name__)

__all__ = [
    "GeneratorSpec",
    "CheckSpec",
    "ExperimentConfig",
    "ReportRow",
    "ScanResult",
    "derive_seed",
    "generate_set",
    "run_experiment",
    "threshold_scan",
    "rows_to_csv",
    "rows_to_json",
    "REPORT_VERSION",
]

REPORT_VERSION = 1

_KIND_ALIASES = {
    "random": "random", "random-uniform": "random",
    "ap": "ap", "arithmetic-progression": "ap",
    "geo": "geo", "geometric-progression": "geo",
    "explicit": "explicit", "explicit-list": "explicit",
}
CHECKS = ("coverage", "thm1", "thm14", "thm15", "thm2", "lemma-energy", "variants", "incidence-fuzz")
FUZZ_KINDS = ("vinh", "hanson", "plane")


def derive_seed(master_seed: int, *coords) -> int:
    """64-bit seed from the master seed and a tuple of cell coordinates."""
    digest = hashlib.blake2b(repr((int(master_seed),) + coords).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _reject_unknown(cls, data: dict, where: str) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(data) - {f.name for f in fields(cls)}
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    size: Optional[int] = None
    seed: int = 0
    start: int = 0
    step: int = 1
    ratio: Optional[int] = None
    values: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in _KIND_ALIASES:
            raise ConfigError(f"unknown generator kind {self.kind!r}")
        object.__setattr__(self, "kind", _KIND_ALIASES[self.kind])
        if self.values is not None:
            object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if self.kind == "explicit":
            if self.values is None:
                raise ConfigError("explicit generator needs 'values'")
            if self.size is not None and self.size != len(self.values):
                raise ConfigError("explicit generator: size disagrees with the value list")
        elif self.size is None or self.size < 1:
            raise ConfigError(f"{self.kind} generator needs a positive size")

    @property
    def label(self) -> str:
        if self.kind == "ap":
            return f"ap(start={self.start},step={self.step})"
        if self.kind == "geo":
            return f"geo(start={self.start or 1},ratio={self.ratio or 'g'})"
        return self.kind

    @classmethod
    def from_json(cls, data: dict) -> "GeneratorSpec":
        _reject_unknown(cls, data, "generator")
        return cls(**data)


def _primitive_root(p: int) -> int:
    n, factors, f = p - 1, set(), 2
    while f * f <= n:
        while n % f == 0:
            factors.add(f)
            n //= f
        f += 1
    if n > 1:
        factors.add(n)
    return next(g for g in range(2, p) if all(pow(g, (p - 1) // q, p) != 1 for q in factors))


def generate_set(spec: GeneratorSpec, field: PrimeField) -> FpSet:
    """Deterministic set of exactly ``spec.size`` elements; degenerate parameters are rejected."""
    p = field.p
    if spec.kind == "explicit":
        reduced = [v % p for v in spec.values]
        if len(set(reduced)) != len(reduced):
            raise ConfigError(f"explicit values repeat modulo {p}")
        if not reduced:
            raise ConfigError("explicit generator with no values")
        return FpSet.of(field, reduced)
    n = spec.size
    if n > p:
        raise ConfigError(f"requested size {n} exceeds p = {p}")
    if spec.kind == "random":
        idx = np.random.default_rng(spec.seed).choice(p, size=n, replace=False)
        return FpSet.of(field, idx.tolist())
    if spec.kind == "ap":
        if spec.step % p == 0:
            raise ConfigError("arithmetic progression step is 0 mod p")
        return FpSet.of(field, (spec.start + i * spec.step for i in range(n)))
    start = (spec.start or 1) % p
    ratio = (spec.ratio if spec.ratio is not None else _primitive_root(p)) % p
    if start == 0 or ratio == 0:
        raise ConfigError("geometric progression needs nonzero start and ratio")
    out = FpSet.of(field, (start * pow(ratio, i, p) for i in range(n)))
    if out.size != n:
        raise ConfigError(f"ratio {ratio} has multiplicative order below {n} mod {p}")
    return out


@dataclass(frozen=True)
class CheckSpec:
    name: str
    expr: Optional[str] = None
    lam: Optional[int] = None
    fuzz: Optional[str] = None
    samples: int = 20

    def __post_init__(self):
        if self.name not in CHECKS:
            raise ConfigError(f"unknown check {self.name!r}; choose from {CHECKS}")
        if self.name == "coverage":
            if not self.expr:
                raise ConfigError("coverage check needs 'expr'")
            parse_expression(self.expr)
        if self.name == "incidence-fuzz" and self.fuzz not in FUZZ_KINDS:
            raise ConfigError(f"incidence-fuzz needs 'fuzz' in {FUZZ_KINDS}")
        if self.samples < 1:
            raise ConfigError("samples must be positive")

    @property
    def label(self) -> str:
        if self.name == "coverage":
            return f"coverage[{parse_expression(self.expr)}]"
        if self.name == "incidence-fuzz":
            return f"incidence-fuzz[{self.fuzz}]"
        return self.name

    @classmethod
    def from_json(cls, data) -> "CheckSpec":
        if isinstance(data, str):
            return cls(name=data)
        _reject_unknown(cls, data, "check")
        return cls(**data)


@dataclass(frozen=True)
class ExperimentConfig:
    primes: tuple[int, ...]
    generators: tuple[GeneratorSpec, ...]
    checks: tuple[CheckSpec, ...]
    trials: int = 1
    master_seed: int = 0
    jobs: int = 1
    record_timing: bool = False
    csv_path: Optional[str] = None
    json_path: Optional[str] = None

    def __post_init__(self):
        if not self.primes:
            raise ConfigError("config needs at least one prime")
        for p in self.primes:
            if not isinstance(p, int) or p < 3 or not is_prime(p):
                raise ConfigError(f"{p!r} is not an odd prime")
        if not self.generators:
            raise ConfigError("config needs at least one generator")
        if not self.checks:
            raise ConfigError("config needs at least one check")
        if self.trials < 0:
            raise ConfigError("trials must be nonnegative")

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        _reject_unknown(cls, data, "config")
        data = dict(data)
        try:
            data["primes"] = tuple(data["primes"])
            data["generators"] = tuple(GeneratorSpec.from_json(g) for g in data["generators"])
            data["checks"] = tuple(CheckSpec.from_json(c) for c in data["checks"])
        except KeyError as exc:
            raise ConfigError(f"config is missing {exc.args[0]!r}") from None
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        return cls.from_json(data)


@dataclass(frozen=True)
class ReportRow:
    p: int
    generator: str
    trial: int
    seed: int
    size: Optional[int]
    size_d: Optional[int]
    K: str
    check: str
    status: str  # ok | violation | error
    verdict: str
    value: str
    ratio: str
    detail: dict = dc_field(default_factory=dict)
    wall_time: str = ""


COLUMNS = [f.name for f in fields(ReportRow)]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "inf" if math.isinf(x) else f"{x:.12g}"
    return str(x)


def _fuzz(check: CheckSpec, field: PrimeField, seed: int) -> tuple[str, str, str, str, dict]:
    rng = np.random.default_rng(seed)
    p, worst, failures = field.p, 0.0, 0
    for _ in range(check.samples):
        if check.fuzz == "plane":
            n_p, n_h = (int(rng.integers(1, min(p**3, 400) + 1)) for _ in range(2))
            rep = vinh_plane_check(random_points3(field, n_p, rng), random_planes(field, n_h, rng))
        else:
            cap = min(p * p, 400)
            n_p, n_l = (int(rng.integers(1, cap + 1)) for _ in range(2))
            mult = 1 if check.fuzz == "vinh" else 5
            P = random_points2(field, n_p, rng, max_mult=mult)
            L = random_lines(field, n_l, rng, max_mult=mult)
            rep = (vinh_check if check.fuzz == "vinh" else hanson_check)(P, L)
        failures += not rep.satisfied
        if rep.error_budget > 0:
            worst = max(worst, rep.gap / rep.error_budget)
    status = "violation" if failures else "ok"
    return status, f"{failures} violations", str(check.samples), _fmt(worst), {"max_gap_over_budget": worst}


def _evaluate(check: CheckSpec, A: FpSet, seed: int) -> tuple[str, str, str, str, dict]:
    """(status, verdict, value, ratio, detail) for one check on one set."""
    if check.name == "incidence-fuzz":
        return _fuzz(check, A.field, seed)
    if check.name == "coverage":
        v = coverage(A, check.expr)
        missing = v.missing.members()
        return ("ok", "covered" if v.covered else "not-covered", str(len(missing)), "",
                {"missing": missing[:64], "missing_truncated": len(missing) > 64})
    if check.name in ("thm1", "thm14", "thm15"):
        reps = construction_sweep(A, check.name, None if check.lam is None else [check.lam])
        bad = [r.lam for r in reps if r.routes_agree is False or not r.trigger_respected or not r.satisfied]
        missed = [r.lam for r in reps if r.incidences == 0]
        lo = min(r.incidences for r in reps)
        first = reps[0]
        detail = {
            "trigger": first.trigger, "size_points": first.size_points, "size_lines": first.size_lines,
            "engine_checked": first.engine_incidences is not None, "missed_lambdas": missed[:64],
            "lambdas": len(reps), "violating_lambdas": bad[:64],
        }
        ratio = lo / float(first.main_term) if first.main_term else math.inf
        return ("violation" if bad else "ok", "all-hit" if not missed else "missed",
                str(lo), _fmt(ratio), detail)
    report = {"thm2": thm2_report, "lemma-energy": lemma_energy_report,
              "variants": variant_bounds_report}[check.name](A)
    detail = {"rhs_terms": report.rhs_terms, "extras": report.extras,
              "checks": report.checks, "observations": report.observations}
    return ("ok" if report.ok else "violation", report.regime, str(report.lhs), _fmt(report.ratio), detail)


def _run_cell(cell: tuple) -> ReportRow:
    p, gen, check, trial, seed, timing = cell
    field = PrimeField(p)
    started = time.perf_counter()
    size = size_d = None
    K = ""
    try:
        spec = gen if gen.kind != "random" else GeneratorSpec(**{**asdict(gen), "seed": seed})
        A = generate_set(spec, field)
        stats = doubling_stats(A)
        size, size_d, K = stats.size_a, stats.size_d, str(stats.K)
        status, verdict, value, ratio, detail = _evaluate(check, A, seed)
    except FFDistError as exc:
        kind = "budget" if isinstance(exc, BudgetExceededError) else "config"
        status, verdict, value, ratio, detail = "error", str(exc), "", "", {"error_kind": kind}
    elapsed = f"{time.perf_counter() - started:.6f}" if timing else ""
    return ReportRow(p, gen.label, trial, seed, size, size_d, K, check.label, status, verdict,
                     value, ratio, detail, elapsed)


def _cells(config: ExperimentConfig) -> list[tuple]:
    cells = []
    for p in config.primes:
        for gi, gen in enumerate(config.generators):
            for ci, check in enumerate(config.checks):
                for trial in range(config.trials):
                    seed = derive_seed(config.master_seed, p, gi, ci, trial)
                    cells.append((p, gen, check, trial, seed, config.record_timing))
    return cells


def run_experiment(config: ExperimentConfig, jobs: Optional[int] = None) -> Iterator[ReportRow]:
    """Evaluate every (prime, generator, check, trial) cell; rows come out in cell order."""
    cells = _cells(config)
    jobs = config.jobs if jobs is None else jobs
    log.info("running %d cells on %d worker(s)", len(cells), jobs)
    if jobs <= 1 or len(cells) <= 1:
        yield from map(_run_cell, cells)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(_run_cell, cells, chunksize=max(1, len(cells) // (4 * jobs)))


def _cell_text(row: ReportRow, name: str) -> str:
    value = getattr(row, name)
    if name == "detail":
        return json.dumps(value, sort_keys=True, separators=(",", ":"), default=str)
    return _fmt(value)


def rows_to_csv(rows: Iterable[ReportRow]) -> str:
    buf = io.StringIO()
    buf.write(f"# ffdist report v{REPORT_VERSION}; columns: {','.join(COLUMNS)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_cell_text(row, c) for c in COLUMNS])
    return buf.getvalue()


def rows_to_json(rows: Iterable[ReportRow]) -> str:
    payload = {"version": REPORT_VERSION, "columns": COLUMNS,
               "rows": [{c: getattr(r, c) for c in COLUMNS} for r in rows]}
    return json.dumps(payload, indent=1, default=str) + "\n"


@dataclass(frozen=True)
class ScanResult:
    p: int
    check: str
    generator: str
    trials: int
    minimal_size: Optional[int]
    failure_below: Optional[dict]
    references: dict[str, float]

    @property
    def message(self) -> str:
        if self.minimal_size is None:
            return f"no threshold <= p = {self.p}"
        return f"minimal size {self.minimal_size} at p = {self.p}"

    def to_json(self) -> dict:
        return {**asdict(self), "message": self.message}


def threshold_scan(p: int, kind: str, expr: str, trials: int = 3, master_seed: int = 0) -> ScanResult:
    """Smallest n at which every one of ``trials`` seeded sets of size n covers F_p.

    A binary search (assuming monotonicity) proposes n; the proposal must then
    pass a second, fresh batch of draws, and n - 1 must fail at least one draw,
    which is recorded as evidence.
    """
    field = PrimeField(p)
    parsed = str(parse_expression(expr))
    if trials < 1:
        raise ConfigError("trials must be positive")

    def draw(n: int, salt: int, i: int) -> tuple[int, FpSet]:
        seed = derive_seed(master_seed, "scan", p, kind, parsed, n, salt, i)
        return seed, generate_set(GeneratorSpec(kind, size=n, seed=seed), field)

    def first_failure(n: int, salts=(0,)) -> Optional[dict]:
        for salt in salts:
            for i in range(trials):
                seed, A = draw(n, salt, i)
                if not coverage(A, parsed).covered:
                    return {"size": n, "salt": salt, "trial": i, "seed": seed}
        return None

    refs = {"p^(13/22)": p ** (13 / 22), "p^(4/7)": p ** (4 / 7), "p^(5/8)": p ** (5 / 8)}
    label = GeneratorSpec(kind, size=1).label
    result = lambda n, ev: ScanResult(p, parsed, label, trials, n, ev, refs)
    if first_failure(p) is not None:
        return result(None, None)
    lo, hi = 1, p
    while lo < hi:
        mid = (lo + hi) // 2
        if first_failure(mid) is None:
            hi = mid
        else:
            lo = mid + 1
    n = lo
    while first_failure(n, salts=(0, 1)) is not None:
        n += 1
        if n > p:
            return result(None, None)
    while n > 1:
        evidence = first_failure(n - 1, salts=(0, 1))
        if evidence is not None:
            return result(n, evidence)
        n -= 1
    return result(n, None)
