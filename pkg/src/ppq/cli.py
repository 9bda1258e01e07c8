"""Command-line interface: ``ppq eval|trace|verify|bench``.

Exit codes: 0 success, 1 parse/validation error, 2 undefined conditional
(zero-probability evidence), 3 oracle or internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from .bench import FAMILIES, parse_range, rows_to_csv, run_bench
from .engine import Evaluator
from .errors import KBError, QueryError, UndefinedConditionalError
from .model import load_kb_file
from .oracle import EnumerationOracle, StrictSVOracle
from .query import parse
from .verify import run_verify

EXIT_OK, EXIT_INPUT, EXIT_UNDEFINED, EXIT_INTERNAL = 0, 1, 2, 3
DEFAULT_SEED = 7


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _default_seed() -> int:
    return int(os.environ.get("PPQ_SEED", DEFAULT_SEED))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ppq", description="Propositional probability queries over an SV oracle.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a query")
    p.add_argument("kb")
    p.add_argument("query")
    p.add_argument("--cache", type=_on_off, default=True, metavar="on|off")
    p.add_argument("--trace", action="store_true", help="print the derivation tree")
    p.add_argument("--strict-oracle", action="store_true",
                   help="oracle accepts positive instantiations only")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("trace", help="print the derivation tree of a query")
    p.add_argument("kb")
    p.add_argument("query")
    p.add_argument("--cache", type=_on_off, default=True, metavar="on|off")
    p.add_argument("--strict-oracle", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("verify", help="compare against brute-force summation on random KBs")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--kind", choices=("joint", "bn"), default="joint")
    p.add_argument("--inject-fault", type=float, default=None, metavar="DELTA",
                   help=argparse.SUPPRESS)

    p = sub.add_parser("bench", help="count SV calls over a query family")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--m", required=True, metavar="A..B")
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--cache", type=_on_off, default=False, metavar="on|off")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.add_argument("--no-timing", action="store_true", help="write 0 for wall_time_us")
    return ap


def _evaluator(args, trace: bool) -> tuple[Evaluator, object]:
    kb = load_kb_file(args.kb)
    query = parse(args.query, kb)
    oracle = EnumerationOracle(kb)
    if args.strict_oracle:
        oracle = StrictSVOracle(oracle)
    return Evaluator(kb, oracle, cache=args.cache, trace=trace), query


def cmd_eval(args, out) -> int:
    ev, query = _evaluator(args, trace=args.trace)
    result = ev.evaluate(query)
    s = result.stats
    if args.json:
        doc = {"value": result.value, "stats": asdict(s)}
        if result.trace is not None:
            doc["trace"] = result.trace.to_dict()
        print(json.dumps(doc, indent=2), file=out)
        return EXIT_OK
    print(f"value: {result.value:.17g}", file=out)
    for name in ("sv_calls", "cache_hits", "m", "q", "predicted_bound"):
        print(f"{name}: {getattr(s, name)}", file=out)
    if result.trace is not None:
        print(result.trace.render(), file=out)
    return EXIT_OK


def cmd_trace(args, out) -> int:
    ev, query = _evaluator(args, trace=True)
    result = ev.evaluate(query)
    print(result.trace.to_json() if args.json else result.trace.render(), file=out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    report = run_verify(args.n, args.trials, seed, args.kind, fault=args.inject_fault)
    print(report.summary(), file=out)
    return EXIT_OK if report.passed else EXIT_INTERNAL


def cmd_bench(args, out) -> int:
    rows = run_bench(args.family, parse_range(args.m), args.r, args.cache, not args.no_timing)
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "trace": cmd_trace, "verify": cmd_verify, "bench": cmd_bench}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (KBError, QueryError, OSError, ValueError) as exc:
        print(f"ppq: error: {exc}", file=err)
        return EXIT_INPUT
    except UndefinedConditionalError as exc:
        print(f"ppq: undefined conditional: {exc}", file=err)
        return EXIT_UNDEFINED
    except Exception as exc:  # noqa: BLE001 - every other failure maps to exit 3
        print(f"ppq: internal error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
