"""Command-line front end; prints exactly one JSON document on stdout"""
import argparse
import asyncio
import csv
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from gconvex.commands.router import process_command
from gconvex.config import get_settings
from gconvex.exceptions import GConvexError, InvalidArgument
from gconvex.schemas import ErrorReport, Report

logger = logging.getLogger("gconvex")

EXIT_CODES = {
    0: "success",
    2: "input or parse error, bad flags",
    3: "numerical or internal error",
    4: "no constructor applies",
    5: "pole at the point or along the geodesic",
}


def _split(text: Optional[str]) -> Optional[List[str]]:
    if text is None:
        return None
    return [part.strip() for part in text.split(",") if part.strip()]


def _floats(text: Optional[str]) -> Optional[List[float]]:
    parts = _split(text)
    if parts is None:
        return None
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise InvalidArgument(f"Expected comma-separated numbers, got {text!r}")


def _read_json(value: str) -> Dict[str, Any]:
    """Inline JSON, or the path of a JSON file"""
    text = value
    if os.path.exists(value):
        with open(value, encoding="utf-8") as handle:
            text = handle.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidArgument(f"Connection is neither a JSON file nor inline JSON: {e}")
    if not isinstance(data, dict):
        raise InvalidArgument("Connection JSON must be an object")
    return data


def _target(value: Optional[str]) -> Optional[List[List[str]]]:
    if value is None or value == "zero":
        return None
    try:
        rows = json.loads(value)
    except json.JSONDecodeError as e:
        raise InvalidArgument(f"--target must be 'zero' or a JSON matrix: {e}")
    return [[str(entry) for entry in row] for row in rows]


# ============================================================================
# PARSER
# ============================================================================

class JsonErrorParser(argparse.ArgumentParser):
    """Raises InvalidArgument on usage errors instead of exiting"""

    def error(self, message: str):
        raise InvalidArgument(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = JsonErrorParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Seed for randomized steps (default 0)")
    common.add_argument("--tol", type=float, default=None, help="Relative tolerance (default 1e-7)")
    common.add_argument("--trials", type=int, default=None, help="Monte Carlo trials (default 10000)")
    common.add_argument("--pretty", action="store_true", help="Indented JSON")
    common.add_argument("--log-level", default=None, help="Logging level for stderr")

    parser = JsonErrorParser(
        prog="gconvex",
        description="Geodesic convexity of polynomials and Levi-Civita checks for connections",
        epilog="Exit codes: " + "; ".join(f"{k} {v}" for k, v in EXIT_CODES.items()),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="Decide g-convexity")
    p.add_argument("expr")
    p.add_argument("--vars", default=None, help="Comma-separated variable order")

    p = sub.add_parser("connect", parents=[common], help="Construct a certificate connection")
    p.add_argument("expr")
    p.add_argument("--vars", default=None)
    p.add_argument("--target", default="zero", help="'zero' or a JSON matrix of expressions")

    p = sub.add_parser("holonomy", parents=[common], help="Levi-Civita check at a point")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--connection", help="Connection JSON file or inline JSON (connect output accepted)")
    source.add_argument("--expr", help="Use the connection constructed for this polynomial")
    p.add_argument("--vars", default=None)
    p.add_argument("--point", required=True, help="Comma-separated rationals, e.g. 1,0")

    p = sub.add_parser("geodesic", parents=[common], help="Convexity of f along a geodesic")
    p.add_argument("expr")
    p.add_argument("--vars", default=None)
    source = p.add_mutually_exclusive_group()
    source.add_argument("--connection", help="Connection JSON file or inline JSON; zero connection when omitted")
    source.add_argument("--construct", action="store_true", help="Use the connection constructed for expr")
    p.add_argument("--x0", default=None)
    p.add_argument("--v0", default=None)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--checks", type=int, default=0, help="Extra seeded random geodesics")
    p.add_argument("--hessian-samples", type=int, default=0)

    p = sub.add_parser("density", parents=[common], help="Density experiments")
    p.add_argument("family", choices=["univariate", "quadratic", "monomial", "separable", "psdball"])
    p.add_argument("-n", type=int, default=1)
    p.add_argument("-d", type=int, default=2)
    p.add_argument("-r", type=float, default=1.0)
    p.add_argument("--sweep", default=None, help="e.g. d=3..63, d=3..63:4 or n=1,2,3")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--csv", default=None, help="Also write rows to this CSV file")

    sub.add_parser("schema", parents=[common], help="Print the JSON schema of reports")

    p = sub.add_parser("serve", parents=[common], help="Run the HTTP API")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    return parser


def _arguments(args: argparse.Namespace) -> Dict[str, Any]:
    """Map parsed flags onto the command's request fields"""
    variables = _split(getattr(args, "vars", None))
    if args.command == "classify":
        return {"expr": args.expr, "variables": variables}
    if args.command == "connect":
        return {"expr": args.expr, "variables": variables, "target": _target(args.target), "seed": args.seed}
    if args.command == "holonomy":
        return {
            "connection": _read_json(args.connection) if args.connection else None,
            "expr": args.expr,
            "variables": variables,
            "point": _split(args.point),
            "seed": args.seed,
        }
    if args.command == "geodesic":
        return {
            "expr": args.expr,
            "variables": variables,
            "connection": _read_json(args.connection) if args.connection else None,
            "construct": args.construct,
            "x0": _floats(args.x0),
            "v0": _floats(args.v0),
            "T": args.T,
            "steps": args.steps,
            "tol": args.tol,
            "checks": args.checks,
            "hessian_samples": args.hessian_samples,
            "seed": args.seed,
        }
    if args.command == "density":
        return {
            "family": args.family,
            "n": args.n,
            "d": args.d,
            "r": args.r,
            "trials": args.trials,
            "seed": args.seed,
            "sweep": args.sweep,
            "workers": args.workers,
        }
    raise InvalidArgument(f"Unknown command {args.command!r}")


def _write_csv(path: str, rows: List[Dict[str, Any]]):
    from gconvex.engine.density import CSV_FIELDS

    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_FIELDS)
        writer.writeheader()
        writer.writerows(rows)


def _emit(document: Dict[str, Any], pretty: bool, stream=None):
    stream = sys.stdout if stream is None else stream
    stream.write(json.dumps(document, indent=2 if pretty else None, ensure_ascii=False))
    stream.write("\n")


def _schema() -> Dict[str, Any]:
    from gconvex.commands.registry import command_registry

    return {
        "report": Report.model_json_schema(),
        "error": ErrorReport.model_json_schema(),
        "commands": command_registry.get_command_specs(),
        "exit_codes": {str(k): v for k, v in EXIT_CODES.items()},
    }


# ============================================================================
# ENTRY POINT
# ============================================================================

def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    except InvalidArgument as e:
        _emit(ErrorReport(error=e.to_dict()).model_dump(), False, sys.stderr)
        return e.exit_code

    settings = get_settings()
    logging.basicConfig(stream=sys.stderr, level=(args.log_level or settings.log_level).upper())

    if args.command == "schema":
        _emit(_schema(), args.pretty)
        return 0
    if args.command == "serve":
        import uvicorn
        uvicorn.run(
            "gconvex.main:app",
            host=args.host or settings.api_host,
            port=args.port or settings.api_port,
        )
        return 0

    try:
        report = asyncio.run(process_command(args.command, _arguments(args)))
        if args.command == "density" and args.csv:
            _write_csv(args.csv, report.result["csv_rows"])
    except GConvexError as e:
        logger.debug(f"❌ {args.command} failed: {e}")
        _emit(ErrorReport(command=args.command, error=e.to_dict()).model_dump(), args.pretty, sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"❌ {args.command} failed")
        error = {"type": "InternalError", "message": str(e), "exit_code": 3}
        _emit(ErrorReport(command=args.command, error=error).model_dump(), args.pretty, sys.stderr)
        return 3
    _emit(report.model_dump(), args.pretty)
    return 0
