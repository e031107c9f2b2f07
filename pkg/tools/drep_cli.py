#!/usr/bin/env python3
"""
Derived Representation Command Line
===================================

Build matrix reductions, compute block homology, cyclic homology, trace maps,
tangent complexes and periodicity checks from `.drep` presentation files.

Usage:
    python tools/drep_cli.py check data/examples/ex2d.drep
    python tools/drep_cli.py build data/examples/ex2d.drep --dim 2
    python tools/drep_cli.py homology data/examples/kxy.drep --dim 1 --nmax 3 --wmax 8
    python tools/drep_cli.py verify ex3d-d1

Exit codes: 0 success, 1 failed check or verification, 2 input error.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.core import DRepEngine
from src.core.utils.errors import DRepError

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT_ERROR = 2


class CommandReport(BaseModel):
    """Machine-readable outcome of one command (printed with --json)"""
    command: str
    passed: bool
    data: Dict[str, Any] = {}
    error: Optional[str] = None


def _engine(args) -> DRepEngine:
    overrides: Dict[str, Any] = {}
    if args.threads is not None:
        overrides['threads'] = args.threads
    return DRepEngine(config=overrides)


def _emit(args, report: CommandReport, text: str) -> int:
    if args.json:
        print(report.model_dump_json(indent=2))
    else:
        print(text)
    return EXIT_OK if report.passed else EXIT_FAILED


def _write_csv(path: str, rows: List[tuple]) -> None:
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['n', 'w', 'dim', 'valid', 'slack'])
        writer.writerows(rows)


def cmd_check(engine: DRepEngine, args) -> int:
    report = engine.check(args.file)
    return _emit(args, CommandReport(command='check', passed=report.passed, data=_jsonable(report.to_dict())), str(report))


def cmd_build(engine: DRepEngine, args) -> int:
    text = engine.build(args.file, args.dim, nc=args.nc)
    if args.output:
        with open(args.output, 'w', encoding='utf-8') as f:
            f.write(text)
    return _emit(args, CommandReport(command='build', passed=True, data={'presentation': text}), text.rstrip("\n"))


def cmd_homology(engine: DRepEngine, args) -> int:
    table = engine.homology(args.file, args.dim, args.nmax, args.wmax, args.slack)
    if args.csv:
        _write_csv(args.csv, table.csv_rows())
    passed = all(valid for _, _, _, valid, _ in table.csv_rows())
    return _emit(args, CommandReport(command='homology', passed=passed, data=table.to_dict()), str(table))


def cmd_cyclic(engine: DRepEngine, args) -> int:
    result = engine.cyclic(args.file, args.nmax, args.wmax, hochschild=args.hochschild)
    return _emit(args, CommandReport(command='cyclic', passed=True, data=_jsonable(result.to_dict())), str(result))


def cmd_norm(engine: DRepEngine, args) -> int:
    report = engine.norm(args.algebra, args.nmax)
    return _emit(args, CommandReport(command='norm', passed=report.passed, data=_jsonable(report.to_dict())), str(report))


def cmd_trace(engine: DRepEngine, args) -> int:
    report = engine.trace(args.file, args.dim, args.nmax, args.wmax, args.gl_samples)
    return _emit(args, CommandReport(command='trace', passed=report.passed, data=report.to_dict()), str(report))


def cmd_tangent(engine: DRepEngine, args) -> int:
    result = engine.tangent(args.file, args.dim, args.rep)
    return _emit(args, CommandReport(command='tangent', passed=True, data=result.to_dict()), str(result))


def cmd_periodicity(engine: DRepEngine, args) -> int:
    report = engine.periodicity(args.file, args.dim, args.wmax)
    return _emit(args, CommandReport(command='periodicity', passed=report.passed, data=report.to_dict()), str(report))


def cmd_verify(engine: DRepEngine, args) -> int:
    names = sorted(engine.verify_targets) if args.name == 'all' else [args.name]
    results = [engine.verify(name) for name in names]
    passed = all(r.passed for r in results)
    text = "\n".join(str(r) for r in results)
    data = {'results': [_jsonable(r.to_dict()) for r in results]}
    return _emit(args, CommandReport(command='verify', passed=passed, data=data), text)


def _jsonable(value: Any) -> Any:
    return json.loads(json.dumps(value, default=str))


COMMANDS = {
    'check': cmd_check,
    'build': cmd_build,
    'homology': cmd_homology,
    'cyclic': cmd_cyclic,
    'norm': cmd_norm,
    'trace': cmd_trace,
    'tangent': cmd_tangent,
    'periodicity': cmd_periodicity,
    'verify': cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Derived representation schemes: presentations, homology, traces',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Validate a presentation (d^2 = 0, degrees, surjectivity)
  python tools/drep_cli.py check data/examples/ex2d.drep

  # Emit R_V for V = Q^2 (or the matrix reduction with --nc)
  python tools/drep_cli.py build data/examples/ex2d.drep --dim 2

  # Homology table with CSV export
  python tools/drep_cli.py homology data/examples/kxy.drep --dim 1 --nmax 3 --wmax 8 --csv out.csv

  # Cyclic homology of a builtin algebra or a weight-truncated quotient
  python tools/drep_cli.py cyclic k --nmax 6
  python tools/drep_cli.py cyclic data/examples/kxy.drep --nmax 3 --wmax 4

  # Tangent complex at a representation point
  python tools/drep_cli.py tangent data/examples/kxy.drep --dim 2 --rep data/examples/kxy_zero_d2.rep

  # Golden verification
  python tools/drep_cli.py verify ex2d-d2
  python tools/drep_cli.py verify all

Environment:
  DREP_MAX_MB   memory budget in megabytes for block matrices
        """
    )
    parser.add_argument('--threads', type=int, help='Worker threads for block computations (0 = all cores)')
    parser.add_argument('--json', action='store_true', help='Print a JSON report instead of text')
    parser.add_argument('--verbose', action='store_true', help='Debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('check', help='Parse and validate a presentation file')
    p.add_argument('file')

    p = sub.add_parser('build', help='Emit R_V (or R~ with --nc)')
    p.add_argument('file')
    p.add_argument('--dim', type=int, required=True)
    p.add_argument('--nc', action='store_true', help='Emit the noncommutative matrix reduction')
    p.add_argument('--output', help='Also write the presentation to this path')

    p = sub.add_parser('homology', help='Block homology of R_V')
    p.add_argument('file')
    p.add_argument('--dim', type=int, required=True)
    p.add_argument('--nmax', type=int)
    p.add_argument('--wmax', type=int)
    p.add_argument('--slack', type=int)
    p.add_argument('--csv', help='Write n,w,dim,valid,slack rows to this path')

    p = sub.add_parser('cyclic', help='Cyclic (or Hochschild) homology dimensions')
    p.add_argument('file', help='.drep file or builtin algebra: k, dual-numbers, kxk, m2')
    p.add_argument('--nmax', type=int, required=True)
    p.add_argument('--wmax', type=int)
    p.add_argument('--hochschild', action='store_true')

    p = sub.add_parser('norm', help='Norm map checks on a builtin algebra')
    p.add_argument('algebra', help='k, dual-numbers, kxk or m2')
    p.add_argument('--nmax', type=int, default=5)

    p = sub.add_parser('trace', help='Trace maps T_n and their chain-map check')
    p.add_argument('file')
    p.add_argument('--dim', type=int, required=True)
    p.add_argument('--nmax', type=int, required=True)
    p.add_argument('--wmax', type=int, required=True)
    p.add_argument('--gl-samples', type=int, help='GL(V) conjugation samples (default from config)')

    p = sub.add_parser('tangent', help='Tangent complex at a representation point')
    p.add_argument('file')
    p.add_argument('--dim', type=int, required=True)
    p.add_argument('--rep', required=True, help='Rep file with lines x = [[a,b],[c,d]]')

    p = sub.add_parser('periodicity', help='Row exactness and D^2 = 0 for the periodicity complexes')
    p.add_argument('file')
    p.add_argument('--dim', type=int, required=True)
    p.add_argument('--wmax', type=int, required=True)

    p = sub.add_parser('verify', help='Compare a computation against its golden file')
    p.add_argument('name', help='Target name from config/verify_targets.json, or "all"')
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(asctime)s - %(levelname)s - %(message)s'
    )
    try:
        engine = _engine(args)
        return COMMANDS[args.command](engine, args)
    except (DRepError, OSError, KeyError, ValueError) as e:
        if args.json:
            print(CommandReport(command=args.command, passed=False, error=str(e)).model_dump_json(indent=2))
        else:
            print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
