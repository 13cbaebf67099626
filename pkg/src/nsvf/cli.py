"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 parse/system error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import expr as ex
from .filippov import SystemError_
from .flow import (
    ORDER, IntegrationOptions, enumerate_branches, integrate_global, policy_from_name,
)
from .limits import minimality_evidence, omega_of_point, region_from_text
from .portrait import render_portrait
from .systems import BUILTINS, load_system

EXIT_OK, EXIT_USAGE, EXIT_SYSTEM, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _clean(obj):
    """JSON-safe copy: tuples become lists, non-finite floats become null."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write(path: Optional[str], text: str, out):
    if path is None or path == "-":
        out.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _positive(name):
    def conv(s):
        v = float(s)
        if not v > 0 or not math.isfinite(v):
            raise argparse.ArgumentTypeError(f"{name} must be a positive number, got {s!r}")
        return v
    return conv


def _count(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}")
    return v


def _add_tolerances(p):
    p.add_argument("--rtol", type=_positive("rtol"), default=1e-9, help="relative tolerance (default 1e-9)")
    p.add_argument("--atol", type=_positive("atol"), default=1e-12, help="absolute tolerance (default 1e-12)")
    p.add_argument("--max-step", type=_positive("max-step"), default=0.1, help="largest step (default 0.1)")


def _opts(args) -> IntegrationOptions:
    return IntegrationOptions(args.rtol, args.atol, args.max_step)


def build_parser() -> argparse.ArgumentParser:
    builtins = ", ".join(sorted(BUILTINS))
    parser = _Parser(prog="nsvf", description="Planar Filippov systems: Sigma classification, global "
                                               "trajectories, limit sets, minimal-set evidence.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sys_help = f"built-in name ({builtins}) or path to a system file"

    p = sub.add_parser("classify", help="segment Sigma into sewing/sliding/escaping intervals")
    p.add_argument("system", help=sys_help)
    p.add_argument("--xrange", nargs=2, type=float, required=True, metavar=("A", "B"),
                   help="abscissa interval on Sigma")
    p.add_argument("--samples", type=_count, default=400, help="sign-scan samples (default 400)")
    p.add_argument("--json", metavar="PATH", help="also write the segmentation as JSON")

    p = sub.add_parser("integrate", help="integrate a global trajectory and write CSV")
    p.add_argument("system", help=sys_help)
    p.add_argument("--x0", type=float, required=True, help="initial x")
    p.add_argument("--y0", type=float, required=True, help="initial y")
    p.add_argument("--tmax", type=_positive("tmax"), required=True, help="horizon")
    p.add_argument("--policy", default="prefer-x", choices=["prefer-x", "prefer-y", "prefer-slide", "enumerate"],
                   help="how non-unique continuations are resolved (default prefer-x)")
    p.add_argument("--direction", default="forward", choices=["forward", "backward"], help="time direction")
    p.add_argument("--max-branches", type=_count, default=64, help="branch bound for --policy enumerate")
    p.add_argument("--max-depth", type=_count, default=16, help="decision-depth bound for --policy enumerate")
    p.add_argument("--out", metavar="CSV", help="output file (default stdout)")
    _add_tolerances(p)

    p = sub.add_parser("limitset", help="omega-limit reports of the branches through a point, as JSON")
    p.add_argument("system", help=sys_help)
    p.add_argument("--x0", type=float, required=True, help="initial x")
    p.add_argument("--y0", type=float, required=True, help="initial y")
    p.add_argument("--tmax", type=_positive("tmax"), required=True, help="horizon")
    p.add_argument("--branches", type=_count, default=64, help="branch bound (default 64)")
    p.add_argument("--max-depth", type=_count, default=16, help="decision-depth bound (default 16)")
    p.add_argument("--settle", type=float, default=0.5, help="fraction of the horizon discarded (default 0.5)")
    p.add_argument("--direction", default="forward", choices=["forward", "backward"],
                   help="backward gives alpha-limits")
    p.add_argument("--out", metavar="JSON", help="output file (default stdout)")
    _add_tolerances(p)

    p = sub.add_parser("minimal-check", help="invariance, connectivity and boundary-closure evidence")
    p.add_argument("system", help=sys_help)
    p.add_argument("--region", required=True,
                   help="Lambda, Lambda-boundary, Lambda-right, or 'lower ; upper ; a ; b' (expressions in x)")
    p.add_argument("--samples", type=_count, default=25, help="sample count (default 25)")
    p.add_argument("--tmax", type=_positive("tmax"), default=30.0, help="horizon (default 30)")
    p.add_argument("--max-branches", type=_count, default=16, help="branches per sample (default 16)")
    p.add_argument("--hub", nargs=2, type=float, metavar=("X", "Y"), help="hub point for a custom region")
    p.add_argument("--out", metavar="JSON", help="output file (default stdout)")
    _add_tolerances(p)

    p = sub.add_parser("portrait", help="phase portrait as SVG")
    p.add_argument("system", help=sys_help)
    p.add_argument("--out", metavar="SVG", required=True, help="output SVG path")
    p.add_argument("--grid", type=_count, default=8, help="starts per axis (default 8)")
    p.add_argument("--tmax", type=_positive("tmax"), default=10.0, help="horizon per trajectory (default 10)")
    p.add_argument("--policy", default="prefer-x", choices=["prefer-x", "prefer-y", "prefer-slide"],
                   help="decision policy (default prefer-x)")
    _add_tolerances(p)
    return parser


# ---------------------------------------------------------------------------
# subcommands

def _contact_str(c) -> str:
    if c is None:
        return "-"
    return f"{c.visibility.value}" + (f"/{c.order}" if c.order is not None else "")


def cmd_classify(args, out) -> int:
    sys_ = load_system(args.system)
    a, b = args.xrange
    if not a < b:
        raise UsageError("classify: --xrange needs A < B")
    seg = sys_.segment_sigma(a, b, args.samples)
    lines = [f"{'kind':<10} {'a':>22} {'b':>22}"]
    for iv in seg.intervals:
        lines.append(f"{iv.kind.value:<10} {iv.a!r:>22} {iv.b!r:>22}")
    lines.append("")
    lines.append(f"{'boundary':>22} {'kind':<10} {'X contact':<16} {'Y contact':<16}")
    for c in seg.boundaries:
        lines.append(f"{c.point[0]!r:>22} {c.kind.value:<10} {_contact_str(c.x_contact):<16} "
                     f"{_contact_str(c.y_contact):<16}")
    out.write("\n".join(lines) + "\n")
    if args.json:
        doc = {
            "system": sys_.name,
            "intervals": [{"a": iv.a, "b": iv.b, "kind": iv.kind.value} for iv in seg.intervals],
            "boundaries": [
                {"x": c.point[0], "kind": c.kind.value, "singular": c.singular,
                 "xContact": None if c.x_contact is None else
                 {"order": c.x_contact.order, "visibility": c.x_contact.visibility.value},
                 "yContact": None if c.y_contact is None else
                 {"order": c.y_contact.order, "visibility": c.y_contact.visibility.value}}
                for c in seg.boundaries],
        }
        _write(args.json, dump_json(doc), out)
    return EXIT_OK


def trajectory_rows(trajs) -> list[tuple]:
    rows = []
    for tr in trajs:
        for t, x, y, regime in tr.samples():
            rows.append((t, x, y, regime.value, tr.branch_id))
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "y", "regime", "branch"])
    for t, x, y, regime, branch in rows:
        w.writerow([repr(float(t)), repr(float(x)), repr(float(y)), regime, branch])
    return buf.getvalue()


def cmd_integrate(args, out) -> int:
    sys_ = load_system(args.system)
    p0 = (args.x0, args.y0)
    if args.policy == "enumerate":
        trajs = enumerate_branches(sys_, p0, args.tmax, args.max_branches, args.max_depth,
                                   direction=args.direction, opts=_opts(args))
    else:
        trajs = [integrate_global(sys_, p0, args.tmax, policy_from_name(args.policy), direction=args.direction,
                                  opts=_opts(args))]
    _write(args.out, rows_to_csv(trajectory_rows(trajs)), out)
    for tr in trajs:
        for d in tr.diagnostics:
            print(f"warning: branch {tr.branch_id or '-'}: {d}", file=sys.stderr)
    return EXIT_OK


def _branch_key(branch_id: str):
    return [ORDER.index(c) for c in branch_id]


def cmd_limitset(args, out) -> int:
    if not 0 < args.settle < 1:
        raise UsageError("limitset: --settle must lie in (0, 1)")
    sys_ = load_system(args.system)
    reports = omega_of_point(sys_, (args.x0, args.y0), args.tmax, args.branches, args.max_depth,
                             settle=args.settle, opts=_opts(args), direction=args.direction)
    reports.sort(key=lambda r: _branch_key(r.branch_id))
    doc = {"system": sys_.name, "start": [args.x0, args.y0], "direction": args.direction,
           "reports": [r.to_json() for r in reports]}
    _write(args.out, dump_json(doc), out)
    return EXIT_OK


def cmd_minimal_check(args, out) -> int:
    sys_ = load_system(args.system)
    try:
        region = region_from_text(args.region)
    except (ValueError, ex.ParseError) as err:
        raise SystemError_(f"bad region: {err}") from err
    if args.hub is not None:
        region = replace(region, hub=tuple(args.hub))
    if region.hub is None:
        raise UsageError("minimal-check: a custom region needs --hub X Y")
    doc = minimality_evidence(sys_, region, args.samples, args.tmax, args.max_branches, opts=_opts(args))
    _write(args.out, dump_json(doc), out)
    return EXIT_OK


def cmd_portrait(args, out) -> int:
    sys_ = load_system(args.system)
    svg = render_portrait(sys_, args.grid, args.tmax, policy_from_name(args.policy), _opts(args))
    Path(args.out).write_bytes(svg)
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "integrate": cmd_integrate,
    "limitset": cmd_limitset,
    "minimal-check": cmd_minimal_check,
    "portrait": cmd_portrait,
}


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help
            return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return COMMANDS[args.command](args, out)
    except UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_USAGE
    except (SystemError_, ex.ParseError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SYSTEM
    except ArithmeticError as err:  # FlowError, EvaluationError, step underflow
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SYSTEM


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
