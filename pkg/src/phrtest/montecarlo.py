"""Scenario-driven size/power simulations.

Each replication draws a fresh series from the scenario's DGP (seed derived
from ``(base_seed, replication)``), applies the preprocessing flags in the
fixed order trim -> detrend -> demean -> prewhiten, and feeds the same series
to every configured test. Rejection counts are integers reduced by
replication index, so results do not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

from .datagen import DgpSpec, derive_seed, gen_series
from .errors import InputError, PhrError, SimulationError
from .kpss import KpssConfig, kpss_test
from .phr import phr_test
from .timeseries import TimeSeries, demean, detrend, prewhiten, trim

__all__ = [
    "MIN_REPLICATIONS",
    "Preprocessing",
    "PhrSpec",
    "KpssSpec",
    "Scenario",
    "TestTally",
    "SimulationReport",
    "Table",
    "apply_preprocessing",
    "run_scenario",
    "table_sweep",
    "load_scenarios",
]

MIN_REPLICATIONS = 100
MAX_FAILURE_FRACTION = 0.01
DEFAULT_PREWHITEN_ORDER = 10


@dataclass(frozen=True)
class Preprocessing:
    itrim: float = 0.0
    idetrend: bool = False
    idemean: bool = False
    prewhiten: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"itrim": self.itrim, "idetrend": self.idetrend, "idemean": self.idemean, "prewhiten": self.prewhiten}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Preprocessing:
        pw = data.get("prewhiten")
        if pw is True:
            pw = DEFAULT_PREWHITEN_ORDER
        elif pw is False:
            pw = None
        return cls(
            itrim=float(data.get("itrim", 0.0)),
            idetrend=bool(data.get("idetrend", False)),
            idemean=bool(data.get("idemean", False)),
            prewhiten=None if pw is None else int(pw),
        )


def apply_preprocessing(series: TimeSeries, pre: Preprocessing) -> TimeSeries:
    if pre.itrim:
        series = trim(series, pre.itrim)
    if pre.idetrend:
        series = detrend(series)
    if pre.idemean:
        series = demean(series)
    if pre.prewhiten is not None:
        series, _ = prewhiten(series, pre.prewhiten)
    return series


@dataclass(frozen=True)
class PhrSpec:
    L: int | str = "auto"
    alpha: float = 0.05
    name = "PHR"

    def run(self, series: TimeSeries) -> bool:
        return phr_test(series, self.L, self.alpha, warn_small=False).result.reject

    def to_dict(self) -> dict[str, Any]:
        return {"test": "PHR", "L": self.L, "alpha": self.alpha}


@dataclass(frozen=True)
class KpssSpec:
    alpha: float = 0.05
    bandwidth: int | str = "auto"
    name = "KPSS"

    def __post_init__(self) -> None:
        KpssConfig(self.bandwidth, self.alpha)

    def run(self, series: TimeSeries) -> bool:
        return kpss_test(series, KpssConfig(self.bandwidth, self.alpha)).reject

    def to_dict(self) -> dict[str, Any]:
        return {"test": "KPSS", "alpha": self.alpha, "bandwidth": self.bandwidth}


def _test_from_dict(data: dict[str, Any]) -> PhrSpec | KpssSpec:
    kind = str(data.get("test", "")).upper()
    if kind == "PHR":
        return PhrSpec(L=data.get("L", "auto"), alpha=float(data.get("alpha", 0.05)))
    if kind == "KPSS":
        return KpssSpec(alpha=float(data.get("alpha", 0.05)), bandwidth=data.get("bandwidth", "auto"))
    raise InputError(f"unknown test in scenario: {data!r}")


@dataclass(frozen=True)
class Scenario:
    dgp: DgpSpec
    tests: tuple[PhrSpec | KpssSpec, ...]
    preprocessing: Preprocessing = field(default_factory=Preprocessing)
    replications: int = 1000
    base_seed: int = 20240101
    label: str = ""

    def __post_init__(self) -> None:
        if self.replications < MIN_REPLICATIONS:
            raise InputError(f"replications must be at least {MIN_REPLICATIONS}, got {self.replications}")
        if not self.tests:
            raise InputError("a scenario needs at least one test")
        names = [t.name for t in self.tests]
        if len(set(names)) != len(names):
            raise InputError("each test may appear only once per scenario")
        object.__setattr__(self, "tests", tuple(self.tests))

    def to_dict(self) -> dict[str, Any]:
        dgp = self.dgp.to_dict()
        dgp.pop("seed")
        return {
            "label": self.label,
            "dgp": dgp,
            "preprocessing": self.preprocessing.to_dict(),
            "tests": [t.to_dict() for t in self.tests],
            "replications": self.replications,
            "base_seed": self.base_seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Scenario:
        try:
            return cls(
                dgp=DgpSpec.from_dict(dict(data["dgp"])),
                tests=tuple(_test_from_dict(t) for t in data["tests"]),
                preprocessing=Preprocessing.from_dict(data.get("preprocessing", {})),
                replications=int(data.get("replications", 1000)),
                base_seed=int(data.get("base_seed", 20240101)),
                label=str(data.get("label", "")),
            )
        except KeyError as exc:
            raise InputError(f"scenario is missing field {exc.args[0]!r}") from None


@dataclass(frozen=True)
class TestTally:
    name: str
    rejections: int
    successes: int
    failures: int
    failure_kinds: dict[str, int] = field(default_factory=dict)

    __test__ = False

    @property
    def rejection_rate(self) -> float:
        return self.rejections / self.successes if self.successes else float("nan")

    @property
    def standard_error(self) -> float:
        p = self.rejection_rate
        return math.sqrt(p * (1.0 - p) / self.successes) if self.successes else float("nan")

    def to_dict(self) -> dict[str, Any]:
        return {
            "test": self.name,
            "rejection_rate": self.rejection_rate,
            "standard_error": self.standard_error,
            "rejections": self.rejections,
            "successes": self.successes,
            "failures": self.failures,
            "failure_kinds": dict(sorted(self.failure_kinds.items())),
        }


@dataclass(frozen=True)
class SimulationReport:
    scenario: Scenario
    tallies: tuple[TestTally, ...]

    def tally(self, name: str) -> TestTally:
        for t in self.tallies:
            if t.name == name:
                return t
        raise KeyError(name)

    def rate(self, name: str) -> float:
        return self.tally(name).rejection_rate

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario.to_dict(),
            "seed_derivation": "SeedSequence(base_seed, spawn_key=(replication,))",
            "results": [t.to_dict() for t in self.tallies],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _run_one(scenario: Scenario, index: int) -> tuple[str | bool, ...]:
    spec = scenario.dgp.with_seed(derive_seed(scenario.base_seed, index))
    try:
        series = apply_preprocessing(gen_series(spec), scenario.preprocessing)
    except PhrError as exc:
        return tuple(type(exc).__name__ for _ in scenario.tests)
    out: list[str | bool] = []
    for test in scenario.tests:
        try:
            out.append(test.run(series))
        except PhrError as exc:
            out.append(type(exc).__name__)
    return tuple(out)


def _run_chunk(scenario: Scenario, indices: range) -> list[tuple[str | bool, ...]]:
    return [_run_one(scenario, i) for i in indices]


def _chunks(n: int, parts: int) -> list[range]:
    size = math.ceil(n / parts)
    return [range(i, min(i + size, n)) for i in range(0, n, size)]


def run_scenario(scenario: Scenario, workers: int = 1) -> SimulationReport:
    """Run all replications of a scenario; ``workers > 1`` uses processes."""
    n = scenario.replications
    if workers <= 1:
        outcomes = _run_chunk(scenario, range(n))
    else:
        chunks = _chunks(n, workers * 4)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_chunk, [scenario] * len(chunks), chunks)
            outcomes = [o for part in parts for o in part]

    tallies = []
    for j, test in enumerate(scenario.tests):
        column = [o[j] for o in outcomes]
        kinds = Counter(c for c in column if isinstance(c, str))
        rejections = sum(1 for c in column if c is True)
        failures = sum(kinds.values())
        tallies.append(TestTally(test.name, rejections, n - failures, failures, dict(kinds)))

    bad = {t.name: t.failures for t in tallies if t.failures > MAX_FAILURE_FRACTION * n}
    if bad:
        detail = "; ".join(f"{t.name}: {dict(t.failure_kinds)}" for t in tallies if t.name in bad)
        raise SimulationError(
            f"scenario {scenario.label or '(unnamed)'}: more than {MAX_FAILURE_FRACTION:.0%} of replications failed ({detail})",
            bad,
        )
    return SimulationReport(scenario, tuple(tallies))


# --- tabulation -------------------------------------------------------------

_SCENARIO_FIELDS = {
    "itrim": lambda s: f"{s.preprocessing.itrim * 100:g}",
    "idetrend": lambda s: str(int(s.preprocessing.idetrend)),
    "idemean": lambda s: str(int(s.preprocessing.idemean)),
    "prewhiten": lambda s: str(int(s.preprocessing.prewhiten is not None)),
    "T": lambda s: str(s.dgp.T),
    "dgp": lambda s: {"dgp1": "1", "dgp2": "2"}.get(s.dgp.kind, s.dgp.kind),
    "kind": lambda s: s.dgp.kind,
    "m": lambda s: f"{s.dgp.variance.m:g}",
    "c": lambda s: f"{s.dgp.variance.c:g}",
    "pattern": lambda s: s.dgp.variance.pattern,
    "lambda": lambda s: f"{s.dgp.lam:g}",
    "rho": lambda s: f"{s.dgp.innovations.rho:g}",
    "distribution": lambda s: s.dgp.innovations.distribution
    + (str(s.dgp.innovations.df) if s.dgp.innovations.df else ""),
    "label": lambda s: s.label,
}
_TEST_FIELDS = {
    "test": lambda t: t.name,
    "L": lambda t: str(t.L) if isinstance(t, PhrSpec) else "",
    "alpha": lambda t: f"{t.alpha:g}",
}


def _field(name: str, scenario: Scenario, test: PhrSpec | KpssSpec) -> str:
    if name in _SCENARIO_FIELDS:
        return _SCENARIO_FIELDS[name](scenario)
    if name in _TEST_FIELDS:
        return _TEST_FIELDS[name](test)
    raise InputError(f"unknown grouping field {name!r}")


@dataclass(frozen=True)
class Table:
    """Rejection rates laid out as ``rows x columns``; missing cells are ``None``."""

    row_fields: tuple[str, ...]
    column_labels: tuple[str, ...]
    row_keys: tuple[tuple[str, ...], ...]
    cells: tuple[tuple[float | None, ...], ...]
    errors: tuple[tuple[float | None, ...], ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([*self.row_fields, *self.column_labels])
        for key, row in zip(self.row_keys, self.cells):
            writer.writerow([*key, *("" if v is None else f"{v:.3f}" for v in row)])
        return buf.getvalue()

    def to_text(self) -> str:
        header = [*self.row_fields, *self.column_labels]
        body = [[*key, *("" if v is None else f"{v:.3f}" for v in row)] for key, row in zip(self.row_keys, self.cells)]
        widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in [header, *body]]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict[str, Any]:
        return {
            "row_fields": list(self.row_fields),
            "columns": list(self.column_labels),
            "rows": [
                {"key": list(k), "rates": list(r), "standard_errors": list(e)}
                for k, r, e in zip(self.row_keys, self.cells, self.errors)
            ],
        }


def table_sweep(
    scenarios: Sequence[Scenario],
    rows: Sequence[str] = ("itrim", "idetrend", "idemean"),
    columns: Sequence[str] = ("test", "T"),
    workers: int = 1,
    reports: Sequence[SimulationReport] | None = None,
) -> tuple[Table, list[SimulationReport]]:
    """Run scenarios and arrange every (scenario, test) rate into a table.

    Rows and columns are keyed by scenario/test fields such as ``itrim``,
    ``dgp``, ``m``, ``c``, ``T``, ``L`` or ``test``; their order follows first
    appearance. Two results landing on the same cell raise ``InputError``.
    """
    if not scenarios:
        raise InputError("table_sweep needs at least one scenario")
    rows, columns = tuple(rows), tuple(columns)
    for name in (*rows, *columns):
        if name not in _SCENARIO_FIELDS and name not in _TEST_FIELDS:
            raise InputError(f"unknown grouping field {name!r}")

    def col_label(key: tuple[str, ...]) -> str:
        parts = [v for v in key if v != ""]
        if columns[0] != "test":
            parts.insert(0, columns[0])
        return ".".join(parts)

    if reports is None:
        reports = [run_scenario(s, workers) for s in scenarios]
    row_order: dict[tuple[str, ...], None] = {}
    col_order: dict[str, None] = {}
    cells: dict[tuple[tuple[str, ...], str], TestTally] = {}
    for scenario, report in zip(scenarios, reports):
        for test, tally in zip(scenario.tests, report.tallies):
            rkey = tuple(_field(r, scenario, test) for r in rows)
            clabel = col_label(tuple(_field(c, scenario, test) for c in columns))
            if (rkey, clabel) in cells:
                raise InputError(f"inconsistent grouping keys: cell {rkey} x {clabel} is produced twice")
            cells[(rkey, clabel)] = tally
            row_order.setdefault(rkey)
            col_order.setdefault(clabel)

    rate_rows, se_rows = [], []
    for rkey in row_order:
        rate_rows.append(tuple(cells[(rkey, c)].rejection_rate if (rkey, c) in cells else None for c in col_order))
        se_rows.append(tuple(cells[(rkey, c)].standard_error if (rkey, c) in cells else None for c in col_order))
    table = Table(rows, tuple(col_order), tuple(row_order), tuple(rate_rows), tuple(se_rows))
    return table, list(reports)


def load_scenarios(data: Any) -> tuple[list[Scenario], dict[str, Any]]:
    """Parse scenario JSON: one scenario, a list, or ``{"scenarios": [...], "rows": ..., "columns": ...}``."""
    layout: dict[str, Any] = {}
    if isinstance(data, dict) and "scenarios" in data:
        layout = {k: data[k] for k in ("rows", "columns") if k in data}
        data = data["scenarios"]
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list) or not data:
        raise InputError("scenario file must hold a scenario object or a non-empty array")
    scenarios = []
    for entry in data:
        if not isinstance(entry, dict):
            raise InputError("each scenario must be a JSON object")
        scenarios.append(Scenario.from_dict(entry))
    return scenarios, layout
