"""
Command line front end.

Subcommands::

    bbqram prepare --input A.csv [--format csv|json] [--mode exact|fixed]
                   [--int-bits 16] [--frac-bits 16] [--out amps.json]
                   [--cost-out cost.json] [--verify] [--tol 1e-9]
    bbqram trace   (same flags as prepare) [--trace-out trace.json]
    bbqram suite   --seed 42 [--sizes 4,16,64,256,1024] [--out summary.json]

Exit codes: 0 success, 1 bad input (parse error, zero/non-finite matrix,
fixed-point overflow), 2 verification or suite criterion failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import BBQRAMError
from .layout import FixedPointFormat
from .preprocessing import DenseMatrix, pad_matrix
from .quantum_ops import Exact, FixedPoint
from .state_prep import PrepConfig, PrepResult, cost_report, prepare_state, verify_state

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2


class InputError(Exception):
    pass


# --- serialisation -------------------------------------------------------

def _num(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x!r}")
    return format(x, ".17g")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(obj, path: str | None) -> None:
    text = to_json(obj) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def amplitudes_json(result: PrepResult) -> dict:
    M, N = result.orig_shape
    amps = result.final_amplitudes
    return {
        "frobenius": result.frobenius,
        "k": result.depth,
        "amplitudes": [{"i": i, "j": j, "value": float(amps[i, j])}
                       for i in range(M) for j in range(N)],
    }


def trace_json(result: PrepResult) -> dict:
    return {"frobenius": result.frobenius, "k": result.depth, "iterations": result.trace}


# --- input ---------------------------------------------------------------

def _parse_float(tok: str, where: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise InputError(f"{where}: not a decimal number: {tok!r}") from None


def read_csv_matrix(text: str) -> list[list[float]]:
    rows = []
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        rows.append([_parse_float(c.strip(), f"line {lineno}") for c in row])
    if not rows:
        raise InputError("input is empty")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise InputError(f"ragged rows: lengths {sorted(widths)}")
    return rows


def read_json_matrix(text: str):
    if not text.strip():
        raise InputError("input is empty")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or not {"rows", "cols", "data"} <= doc.keys():
        raise InputError('expected an object with "rows", "cols" and "data"')
    data = doc["data"]
    if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
        raise InputError('"data" must be a list of rows')
    if len({len(r) for r in data}) > 1:
        raise InputError("ragged rows in data")
    for i, r in enumerate(data):
        for x in r:
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise InputError(f"row {i}: non-numeric entry {x!r}")
    return data, doc["rows"], doc["cols"]


def load_matrix(path: str, fmt: str | None) -> DenseMatrix:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    fmt = fmt or ("json" if p.suffix.lower() == ".json" else "csv")
    if fmt == "json":
        data, rows, cols = read_json_matrix(text)
        return pad_matrix(data, rows, cols)
    return pad_matrix(read_csv_matrix(text))


def config_from(args, trace: bool = False) -> PrepConfig:
    if args.mode == "fixed":
        return PrepConfig(mode=FixedPoint(FixedPointFormat(args.int_bits, args.frac_bits)), trace=trace)
    return PrepConfig(mode=Exact(), trace=trace)


# --- subcommands ---------------------------------------------------------

def _run_prepare(args, trace: bool) -> int:
    try:
        m = load_matrix(args.input, args.format)
        result = prepare_state(m, config_from(args, trace))
    except (InputError, BBQRAMError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not trace or args.out:
        write_json(amplitudes_json(result), args.out)
    if args.cost_out:
        write_json(cost_report(result).as_dict(), args.cost_out)
    if trace:
        write_json(trace_json(result), args.trace_out)
    if args.verify:
        rep = verify_state(result, m, args.tol)
        if not rep.passed:
            print(f"verification failed: max error {rep.max_abs_error:.3e} at {rep.worst_index}, "
                  f"norm deviation {rep.norm_deviation:.3e}, "
                  f"{len(rep.sign_mismatches)} sign mismatches (tol {args.tol:g})", file=sys.stderr)
            return EXIT_VERIFY
    return EXIT_OK


def cmd_prepare(args) -> int:
    return _run_prepare(args, trace=False)


def cmd_trace(args) -> int:
    return _run_prepare(args, trace=True)


def cmd_suite(args) -> int:
    from .suite import run_suite

    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        print(f"error: bad --sizes {args.sizes!r}", file=sys.stderr)
        return EXIT_INPUT
    if not sizes or any(s < 2 or s & (s - 1) for s in sizes):
        print("error: --sizes must list powers of two >= 2", file=sys.stderr)
        return EXIT_INPUT
    summary = run_suite(args.seed, sizes)
    write_json(summary, args.out)
    return EXIT_OK if summary["passed"] else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbqram", description=__doc__.split("\n")[1])
    sub = parser.add_subparsers(dest="command", required=True)

    def prep_flags(p):
        p.add_argument("--input", required=True)
        p.add_argument("--format", choices=["csv", "json"], default=None,
                       help="defaults to the file suffix (.json) or csv")
        p.add_argument("--mode", choices=["exact", "fixed"], default="exact")
        p.add_argument("--int-bits", type=int, default=16)
        p.add_argument("--frac-bits", type=int, default=16)
        p.add_argument("--out", default=None,
                       help="amplitudes JSON (prepare: stdout if omitted; trace: skipped)")
        p.add_argument("--cost-out", default=None)
        p.add_argument("--verify", action="store_true")
        p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("prepare", help="run state preparation")
    prep_flags(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("trace", help="state preparation with per-level dumps")
    prep_flags(p)
    p.add_argument("--trace-out", default=None, help="trace JSON (stdout if omitted)")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("suite", help="seeded randomized self-check")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sizes", default="4,16,64,256,1024")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:  # e.g. an invalid fixed-point format
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
