"""Command-line interface.

Exit codes: 0 decided and consistent, 2 undecided, 3 input error,
4 internal inconsistency or a failed check.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .catalog import CATALOG, build_catalog
from .criteria import analyze
from .dynamics import orbit
from .errors import BadParams, BudgetExceeded, InternalError, ParseError, TreeDynError, UnknownEntry, ValidationError
from .fileformat import dump, load, serialize
from .harness import cross_check, summary_text
from .plmap import DEFAULT_BUDGET
from .render import overlays_for_map, overlays_from_json, render_svg
from .report import dumps, loads, report_text, report_to_json, verify_report
from .tree import format_region, parse_rational

EXIT_OK = 0
EXIT_UNDECIDED = 2
EXIT_INPUT = 3
EXIT_INTERNAL = 4


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 3), not argparse's default 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        value = parse_rational(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_analyze(args) -> int:
    tree, f = load(args.file)
    report = analyze(f, args.depth, args.budget, K=args.chain, T=args.orbit_steps,
                     probe=not args.no_probe, mesh=args.mesh, eps=args.eps, max_iter=args.max_iter)
    params = {"mesh": args.mesh, "eps": args.eps, "max_iter": args.max_iter,
              "chain": args.chain, "orbit_steps": args.orbit_steps, "probe": not args.no_probe}
    if args.json:
        _write(args.out, dumps(report_to_json(tree, f, report, params)))
    else:
        _write(args.out, report_text(report))
    return EXIT_OK if report.decided else EXIT_UNDECIDED


def cmd_orbit(args) -> int:
    tree, f = load(args.file)
    try:
        x = tree.parse_point(args.point)
    except TreeDynError as exc:
        raise ParseError(f"--point: {exc}") from None
    rec = orbit(f, x, args.steps)
    lines = [f"{k:>4}  {p}" for k, p in enumerate(rec.points)]
    if rec.eventually_periodic:
        lines.append(f"eventually periodic: preperiod {rec.preperiod}, period {rec.period}")
    else:
        lines.append(f"no exact repetition within {args.steps} steps")
    _write(None, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_fixset(args) -> int:
    tree, f = load(args.file)
    g = f.power(args.power, args.budget)
    fixed = g.fixed_set()
    conn = tree.is_connected(fixed)
    _write(None, f"{format_region(fixed)}\n{'connected' if conn else 'disconnected'}\n")
    return EXIT_OK


def cmd_render(args) -> int:
    tree, f = load(args.file)
    title = args.title if args.title is not None else args.file
    if args.report:
        with open(args.report, encoding="utf-8") as fh:
            data = loads(fh.read())
        if data.get("instance") != serialize(tree, f):
            raise ValidationError("report was produced for a different instance")
        ov = overlays_from_json(f, data, title)
    else:
        ov = overlays_for_map(f, title)
    _write(args.out, render_svg(tree, ov, size=args.size))
    return EXIT_OK


def cmd_catalog(args) -> int:
    if args.list or args.name is None:
        for name, entry in CATALOG.items():
            params = ", ".join(f"{k}={d}" for k, (_, d) in entry.params.items())
            _write(None, f"{name}({params})  {entry.provenance}\n")
        return EXIT_OK
    params = {}
    for item in args.param:
        if "=" not in item:
            raise BadParams(f"--param expects k=v, got {item!r}")
        k, v = item.split("=", 1)
        params[k] = v
    tree, f = build_catalog(args.name, params)
    if args.out:
        dump(args.out, tree, f)
    else:
        _write(None, serialize(tree, f))
    return EXIT_OK


def cmd_verify(args) -> int:
    seeds = range(args.seed, args.seed + args.count)
    summary = cross_check(seeds, args.max_vertices, args.max_pieces, args.depth, args.budget,
                          brute=not args.no_brute, probe=not args.no_probe, catalog=args.catalog,
                          jobs=args.jobs)
    if args.json:
        _write(args.out, json.dumps(summary.to_json(), sort_keys=True, indent=2) + "\n")
    else:
        _write(args.out, summary_text(summary) + "\n")
    if args.timing:
        sys.stderr.write(f"elapsed {summary.seconds:.1f}s\n")
    return EXIT_INTERNAL if summary.breaches else EXIT_OK


def cmd_verify_cert(args) -> int:
    with open(args.report, encoding="utf-8") as fh:
        data = loads(fh.read())
    results = verify_report(data, args.budget)
    failed = False
    for name, ok in results:
        label = "pass" if ok is True else ("partial" if ok == "partial" else "FAIL")
        failed |= ok is False
        _write(None, f"{label:<8}{name}\n")
    return EXIT_INTERNAL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="treedyn", description="Equicontinuity of piecewise-linear tree maps.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="decide equicontinuity and print the certificates")
    a.add_argument("file")
    a.add_argument("--depth", type=_positive, default=12)
    a.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    a.add_argument("--mesh", type=_rational, default=Fraction(1, 64), help="probe mesh")
    a.add_argument("--eps", type=_rational, default=Fraction(1, 8), help="probe separation threshold")
    a.add_argument("--max-iter", type=_positive, default=200, help="probe iterations")
    a.add_argument("--chain", type=_positive, default=3, help="length K of backward chains")
    a.add_argument("--orbit-steps", type=_positive, default=64, help="orbit prefix T for avoidance")
    a.add_argument("--no-probe", action="store_true", help="skip the numeric sensitivity probe")
    a.add_argument("--json", action="store_true")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    o = sub.add_parser("orbit", help="exact orbit of a point")
    o.add_argument("file")
    o.add_argument("--point", required=True)
    o.add_argument("--steps", type=_positive, required=True)
    o.set_defaults(func=cmd_orbit)

    x = sub.add_parser("fixset", help="fixed set of an iterate")
    x.add_argument("file")
    x.add_argument("--power", type=_positive, required=True)
    x.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    x.set_defaults(func=cmd_fixset)

    r = sub.add_parser("render", help="draw the tree as SVG")
    r.add_argument("file")
    r.add_argument("--out", required=True)
    r.add_argument("--report", help="JSON report whose certificates are overlaid")
    r.add_argument("--size", type=_positive, default=480)
    r.add_argument("--title")
    r.set_defaults(func=cmd_render)

    c = sub.add_parser("catalog", help="write a catalog instance")
    c.add_argument("name", nargs="?")
    c.add_argument("--param", action="append", default=[], metavar="K=V")
    c.add_argument("--out")
    c.add_argument("--list", action="store_true")
    c.set_defaults(func=cmd_catalog)

    v = sub.add_parser("verify", help="cross-check the criteria over random instances")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--count", type=int, default=100)
    v.add_argument("--depth", type=_positive, default=12)
    v.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    v.add_argument("--max-vertices", type=_positive, default=8)
    v.add_argument("--max-pieces", type=_positive, default=6)
    v.add_argument("--jobs", type=_positive, default=1)
    v.add_argument("--catalog", action="store_true", help="include the catalog examples")
    v.add_argument("--no-brute", action="store_true")
    v.add_argument("--no-probe", action="store_true")
    v.add_argument("--json", action="store_true")
    v.add_argument("--timing", action="store_true", help="print elapsed time to stderr")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    vc = sub.add_parser("verify-cert", help="re-check the certificates of a JSON report")
    vc.add_argument("report")
    vc.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    vc.set_defaults(func=cmd_verify_cert)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InternalError as exc:
        sys.stderr.write(f"internal error: {exc}\n")
        return EXIT_INTERNAL
    except (ParseError, ValidationError, UnknownEntry, BadParams) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except BudgetExceeded as exc:
        sys.stderr.write(f"undecided: {exc}\n")
        return EXIT_UNDECIDED
    except OSError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except TreeDynError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
