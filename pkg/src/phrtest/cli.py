"""Command-line interface: ``phrtest {test,simulate,describe}``.

Exit codes: 0 success (whatever the test decision), 2 usage or input error,
3 numerical degeneracy or too many failed replications.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from .errors import DegenerateError, InputError, SimulationError
from .kpss import CRITICAL_VALUES, KpssConfig, kpss_test
from .montecarlo import MIN_REPLICATIONS, load_scenarios, table_sweep
from .phr import phr_test
from .timeseries import (
    TimeSeries,
    demean,
    describe,
    detrend,
    load_csv,
    log_returns,
    prewhiten,
    rolling_variance_standardize,
    trim,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _frame_length(text: str) -> int | str:
    if text == "auto":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}") from None


def _bandwidth(text: str) -> int | str:
    if text in ("auto", "short"):
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, 'auto' or 'short', got {text!r}") from None


def _column(text: str) -> int | str:
    return int(text) if text.isdigit() else text


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="CSV file")
    p.add_argument("--column", type=_column, default=0, help="zero-based index or header name")
    p.add_argument("--skip-header", action="store_true")
    p.add_argument("--log-returns", action="store_true", help="convert prices to log returns first")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phrtest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run PHR and/or KPSS on a CSV column")
    _add_input_args(t)
    t.add_argument("--trim", type=float, default=0.0, metavar="FRAC")
    t.add_argument("--detrend", action="store_true")
    t.add_argument("--demean", action="store_true")
    t.add_argument("--prewhiten", type=int, nargs="?", const=10, default=None, metavar="MAX_ORDER")
    t.add_argument("--roll-window", type=int, default=None, metavar="N")
    t.add_argument("--phr", action="store_true")
    t.add_argument("--kpss", action="store_true")
    t.add_argument("--L", type=_frame_length, default="auto", dest="L")
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--bandwidth", type=_bandwidth, default="auto")

    s = sub.add_parser("simulate", help="run a Monte Carlo scenario file")
    s.add_argument("--scenario", required=True, help="JSON file, or the name of a bundled scenario")
    s.add_argument("--reps", type=int, default=None)
    s.add_argument("--seed", type=int, default=None, help="override every scenario's base seed")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", default=None, help="CSV path; a JSON sidecar is written next to it")
    s.add_argument("--format", choices=("json", "csv", "text"), default="csv")

    d = sub.add_parser("describe", help="descriptive statistics of a CSV column")
    _add_input_args(d)
    return parser


def _validate_test_args(args: argparse.Namespace) -> None:
    if not 0.0 < args.alpha < 1.0:
        raise InputError(f"--alpha must lie in (0, 1), got {args.alpha}")
    if not 0.0 <= args.trim <= 0.1:
        raise InputError(f"--trim must lie in [0, 0.1], got {args.trim}")
    if args.roll_window is not None and args.roll_window < 2:
        raise InputError("--roll-window must be at least 2")
    if args.prewhiten is not None and args.prewhiten < 0:
        raise InputError("--prewhiten max order must be non-negative")
    if isinstance(args.L, int) and (args.L < 4 or args.L % 2):
        raise InputError(f"--L must be an even integer >= 4, got {args.L}")
    if args.kpss:
        KpssConfig(args.bandwidth, args.alpha)
        if args.alpha not in CRITICAL_VALUES:
            raise InputError(f"KPSS --alpha must be one of {sorted(CRITICAL_VALUES)}")


def _load(args: argparse.Namespace) -> TimeSeries:
    series = load_csv(args.input, args.column, args.skip_header)
    if args.log_returns:
        series = log_returns(series)
    return series


def _results_csv(results: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    fields = ["test", "statistic", "p_value", "p_lo", "p_hi", "alpha", "reject", "L", "P", "n_pairs", "bandwidth", "preprocessing"]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in results:
        bracket = r.get("p_bracket") or [None, None]
        w.writerow({
            "test": r["test"],
            "statistic": r.get("D", r.get("statistic")),
            "p_value": r.get("p_value"),
            "p_lo": bracket[0],
            "p_hi": bracket[1],
            "alpha": r["alpha"],
            "reject": r["reject"],
            "L": r.get("L"),
            "P": r.get("P"),
            "n_pairs": r.get("n_pairs"),
            "bandwidth": r.get("bandwidth"),
            "preprocessing": ";".join(r["preprocessing"]),
        })
    return buf.getvalue()


def _results_text(results: list[dict[str, Any]]) -> str:
    lines = []
    for r in results:
        decision = "reject" if r["reject"] else "fail to reject"
        if r["test"] == "PHR":
            lines.append(
                f"PHR   D={r['D']:.6f}  p={r['p_value']:.6g}  L={r['L']} P={r['P']} pairs={r['n_pairs']}  "
                f"alpha={r['alpha']:g}: {decision}"
            )
        else:
            lo, hi = r["p_bracket"]
            lines.append(
                f"KPSS  stat={r['statistic']:.6f}  {lo:g} < p < {hi:g}  bandwidth={r['bandwidth']}  "
                f"alpha={r['alpha']:g}: {decision}"
            )
    if results and results[0]["preprocessing"]:
        lines.append("preprocessing: " + ", ".join(results[0]["preprocessing"]))
    return "\n".join(lines) + "\n"


def cmd_test(args: argparse.Namespace) -> int:
    _validate_test_args(args)
    series = _load(args)
    if args.trim:
        series = trim(series, args.trim)
    if args.detrend:
        series = detrend(series)
    if args.demean:
        series = demean(series)
    if args.prewhiten is not None:
        series, _ = prewhiten(series, args.prewhiten)
    if args.roll_window is not None:
        series = rolling_variance_standardize(series, args.roll_window)

    run_phr = args.phr or not args.kpss
    results = []
    if run_phr:
        results.append(phr_test(series, args.L, args.alpha).result.to_dict())
    if args.kpss:
        results.append(kpss_test(series, KpssConfig(args.bandwidth, args.alpha)).to_dict())

    if args.format == "json":
        sys.stdout.write(_dump(results[0] if len(results) == 1 else results))
    elif args.format == "csv":
        sys.stdout.write(_results_csv(results))
    else:
        sys.stdout.write(_results_text(results))
    return EXIT_OK


def cmd_describe(args: argparse.Namespace) -> int:
    stats = describe(_load(args)).as_dict()
    if args.format == "json":
        sys.stdout.write(_dump(stats))
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(stats), lineterminator="\n")
        w.writeheader()
        w.writerow(stats)
        sys.stdout.write(buf.getvalue())
    else:
        width = max(map(len, stats))
        sys.stdout.write("".join(f"{k.ljust(width)}  {v}\n" for k, v in stats.items()))
    return EXIT_OK


def _read_scenario_file(name: str) -> Any:
    path = Path(name)
    try:
        if path.is_file():
            text = path.read_text(encoding="utf-8")
        else:
            bundled = resources.files("phrtest") / "scenarios" / name
            if not bundled.is_file():
                raise InputError(f"scenario file not found: {name}")
            text = bundled.read_text(encoding="utf-8")
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{name}: invalid JSON ({exc})") from None


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.reps is not None and args.reps < MIN_REPLICATIONS:
        raise InputError(f"--reps must be at least {MIN_REPLICATIONS}, got {args.reps}")
    if args.workers < 1:
        raise InputError("--workers must be at least 1")
    scenarios, layout = load_scenarios(_read_scenario_file(args.scenario))
    if args.reps is not None:
        scenarios = [replace(s, replications=args.reps) for s in scenarios]
    if args.seed is not None:
        scenarios = [replace(s, base_seed=args.seed) for s in scenarios]

    table, reports = table_sweep(
        scenarios,
        rows=layout.get("rows", ("label",)),
        columns=layout.get("columns", ("test", "T")),
        workers=args.workers,
    )
    sidecar = {"table": table.to_dict(), "reports": [r.to_dict() for r in reports]}
    if args.format == "csv":
        body = table.to_csv()
    elif args.format == "text":
        body = table.to_text()
    else:
        body = _dump(sidecar)

    if args.out:
        out = Path(args.out)
        out.write_text(body, encoding="utf-8")
        out.with_suffix(out.suffix + ".json").write_text(_dump(sidecar), encoding="utf-8")
    else:
        sys.stdout.write(body)
    return EXIT_OK


COMMANDS = {"test": cmd_test, "simulate": cmd_simulate, "describe": cmd_describe}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"phrtest: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DegenerateError, SimulationError) as exc:
        print(f"phrtest: numerical error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"phrtest: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
