"""Command-line driver: every verification as a named check.

Exit status is 0 when no selected check FAILs (INFO never fails a run),
1 when one does, and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable, Dict, List, Optional

from .report import FAIL, PASS, Report, sort_reports, timed, zero_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_JET_ORDER = 6
DEFAULT_COV_ORDER = 4

TARGETS = ("compatibility", "we-forms", "cont-structure", "reduced-structure",
           "theorem", "appendix", "all")


class UsageError(Exception):
    pass


def _config(args) -> Dict[str, int]:
    return {"jet_order": args.jet_order, "cov_order": args.cov_order}


def _covering(args):
    from .covering import CoveringContext

    cache = getattr(args, "_cov", None)
    if cache is None:
        cache = CoveringContext(jet_order=args.jet_order, cov_order=args.cov_order)
        args._cov = cache
    return cache


# verify targets -------------------------------------------------------------

def check_compatibility(args) -> List[Report]:
    from .covering import CoveringTruncationError

    cov = _covering(args)
    cfg = _config(args)
    out = []
    with timed() as t:
        red = cov.compatibility_residual(reduce=True)
    out.append(zero_report("covering.compatibility", red, t[0], cfg))

    # unreduced: the commutator is a combination of total derivatives of E
    with timed() as t:
        raw = cov.compatibility_residual(reduce=False)
        E = cov.eq.residual()
        dx = cov.jets.total_derivative(E, "x")
        dy = cov.jets.total_derivative(E, "y")
        cofactors = dx * cov.qs(0, 1) - dy * cov.qs(1, 0)
    out.append(zero_report("covering.compatibility.cofactors", raw - cofactors, t[0], cfg,
                           "[D~t, D~z] q00 = (DxE) q01 - (DyE) q10"))

    with timed() as t:
        try:
            table = cov.commutator_table()
        except CoveringTruncationError as e:
            raise UsageError(str(e)) from e
    per = t[0] / max(len(table), 1)
    for (a, b, i, j), val in sorted(table.items()):
        out.append(zero_report(f"covering.commutator.{a}{b}.q{i}{j}", val, per, cfg))
    return out


def check_we_forms(args) -> List[Report]:
    cov = _covering(args)
    cfg = _config(args)
    out = []
    with timed() as t:
        flat = cov.we_flatness(reduce=True)
    out.append(zero_report("covering.we.flatness", flat, t[0], cfg))
    # closed formula against the lifted action, as deep as the truncation allows
    for lvl in range(1, cov.order):
        for i in range(lvl + 1):
            j = lvl - i
            src, d = ((i - 1, j), "x") if i > 0 else ((i, j - 1), "y")
            with timed() as t:
                lifted = cov.lie_derivative(cov.we_form(*src), d)
                diff = lifted - cov.we_form(i, j)
            out.append(zero_report(f"covering.we.omega{i}{j}", diff, t[0], cfg,
                                   f"D~{d} omega{src[0]}{src[1]}"))
    return out


def check_cont_structure(args) -> List[Report]:
    from .pseudogroup import check_cont_structure as run

    ns = [args.n] if getattr(args, "n", None) else [1, 2, 3]
    out = []
    for n in ns:
        out.extend(run(n))
        if getattr(args, "control", False):
            out.extend(run(n, symmetric_f=False))
    return out


def check_reduced(args) -> List[Report]:
    from .pseudogroup import solve_reduced_structure

    return solve_reduced_structure()


def check_theorem(args) -> List[Report]:
    from .pseudogroup import verify_theorem

    branches = [args.branch] if getattr(args, "branch", None) else [1, 2]
    cov = _covering(args)
    return [verify_theorem(b, cov) for b in branches]


def check_appendix(args) -> List[Report]:
    from .abstract_eds import appendix_checks

    return appendix_checks(getattr(args, "set", None) or "all", corpus=args.corpus)


VERIFY: Dict[str, Callable] = {
    "compatibility": check_compatibility,
    "we-forms": check_we_forms,
    "cont-structure": check_cont_structure,
    "reduced-structure": check_reduced,
    "theorem": check_theorem,
    "appendix": check_appendix,
}


def cmd_verify(args) -> List[Report]:
    if args.target == "all":
        reports = []
        for fn in VERIFY.values():
            reports.extend(fn(args))
        return reports
    return VERIFY[args.target](args)


def cmd_solve(args) -> List[Report]:
    from .abstract_eds import load_system
    from .pseudogroup import solve_printed_rule

    unknowns = _names(args.unknowns)
    modulo = _names(args.modulo)
    try:
        return solve_printed_rule(args.equation, unknowns, modulo, load_system(args.corpus))
    except ValueError as e:
        raise UsageError(str(e)) from e


def cmd_parse(args) -> List[Report]:
    from .abstract_eds import parse_system
    from .syntax import ParseError

    try:
        with open(args.file) as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(str(e)) from e
    with timed() as t:
        try:
            system = parse_system(text)
        except ParseError as e:
            return [Report(f"parse.{args.file}", FAIL, f"{args.file}: {e}", t[0])]
    cfg = {"generators": len(system.order), "rules": len(system.rules),
           "unknown": len(system.unknown), "ambiguous": sorted(system.ambiguous)}
    return [Report(f"parse.{args.file}", PASS, "", t[0], cfg)]


def _names(text: Optional[str]) -> List[str]:
    if not text:
        return []
    return [p.strip() for p in text.replace(" ", ",").split(",") if p.strip()]


# argument parsing -----------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    def dflt(v):
        return argparse.SUPPRESS if suppress else v

    p.add_argument("--jet-order", type=int, default=dflt(DEFAULT_JET_ORDER),
                   help=f"jet truncation order (default {DEFAULT_JET_ORDER})")
    p.add_argument("--cov-order", type=int, default=dflt(DEFAULT_COV_ORDER),
                   help=f"covering truncation order (default {DEFAULT_COV_ORDER})")
    p.add_argument("--format", choices=("text", "json"), default=dflt("text"))
    p.add_argument("--corpus", default=dflt(None),
                   help="structure-equation file replacing the bundled corpus")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heavenly",
        description="Exact symbolic checks of a Lax-pair covering and the structure equations of its symmetries.",
    )
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="{verify,solve,parse}")
    sub.required = True

    verify = sub.add_parser("verify", help="run named verifications")
    vsub = verify.add_subparsers(dest="target", metavar="{" + ",".join(TARGETS) + "}")
    vsub.required = True
    for name in TARGETS:
        p = vsub.add_parser(name)
        _global_flags(p, suppress=True)
        if name in ("cont-structure", "all"):
            p.add_argument("--n", type=int, choices=(1, 2, 3),
                           help="number of independent variables (default: 1, 2 and 3)")
        if name == "cont-structure":
            p.add_argument("--control", action="store_true",
                           help="also run the desymmetrized negative control (expected to FAIL)")
        if name in ("theorem", "all"):
            p.add_argument("--branch", type=int, choices=(1, 2))
        if name in ("appendix", "all"):
            p.add_argument("--set", choices=("determined", "partial", "all"), default="all")

    solve = sub.add_parser("solve", help="recover unknown coefficients of a corpus rule in coordinates")
    _global_flags(solve, suppress=True)
    solve.add_argument("--equation", required=True, help="generator whose rule is solved, e.g. xi1")
    solve.add_argument("--unknowns", required=True, help="comma-separated unknown forms, e.g. eta2")
    solve.add_argument("--modulo", required=True, help="comma-separated forms they pair with, e.g. xi4")

    parse = sub.add_parser("parse", help="syntax-check a structure-equation file")
    _global_flags(parse, suppress=True)
    parse.add_argument("file")
    return parser


COMMANDS = {"verify": cmd_verify, "solve": cmd_solve, "parse": cmd_parse}


def emit(reports: List[Report], fmt: str, stream=None) -> None:
    stream = stream or sys.stdout
    if fmt == "json":
        json.dump([r.as_dict() for r in reports], stream, indent=2)
        stream.write("\n")
    else:
        for r in reports:
            stream.write(r.line() + "\n")


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 0 for --help and 2 for usage errors
        return int(e.code or 0)
    if args.jet_order < 1 or args.cov_order < 1:
        parser.print_usage(sys.stderr)
        print("heavenly: error: truncation orders must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        reports = sort_reports(COMMANDS[args.command](args))
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"heavenly: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    emit(reports, args.format)
    return EXIT_FAIL if any(r.status == FAIL for r in reports) else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
