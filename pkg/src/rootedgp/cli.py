"""Command-line driver.

Exit codes: 0 when the program succeeds (or a sweep completes), 1 when the
program fails or runs out of budget, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import re
import sys
from typing import Optional, Sequence

from .bench import (doubling_sizes, family_input, format_fits, run_once, sweep,
                    write_csv)
from .parser import ParseError, load_host_graph, save_host_graph
from .programs import (FAMILY_NAMES, PROGRAM_NAMES, Family, Grid, InvalidSize, KKStar,
                       build_input)


class UsageError(Exception):
    pass


_SIZE_RE = re.compile(r"([0-9]+)([kKmM]?)")


def parse_size(text: str) -> int:
    m = _SIZE_RE.fullmatch(text.strip())
    if m is None:
        raise UsageError(f"bad size {text!r}")
    mult = {"": 1, "k": 1000, "m": 1_000_000}[m.group(2).lower()]
    return int(m.group(1)) * mult


def parse_sizes(text: str) -> list[int]:
    """``1k..64k`` (doubling) or a comma list such as ``1000,2000,4000``."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        a, b = parse_size(lo), parse_size(hi)
        if a < 1 or b < a:
            raise UsageError(f"bad size range {text!r}")
        return doubling_sizes(a, b)
    return [parse_size(t) for t in text.split(",") if t.strip()]


def parse_size_arg(text: str) -> int:
    try:
        return parse_size(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rootedgp",
                                 description="Run rooted graph programs and benchmark them.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--program", required=True, choices=PROGRAM_NAMES)
        p.add_argument("--backend", choices=("indexed", "legacy"), default="indexed")
        p.add_argument("--csv", metavar="FILE", help="append one CSV row per run")
        p.add_argument("--seed", type=int, default=0, help="seed for --family random")
        p.add_argument("--budget", type=_positive, help="abort after N matcher steps")
        p.add_argument("--reps", type=_positive, default=1)

    run = sub.add_parser("run", help="run a program once (or --reps times)")
    common(run)
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", metavar="FILE", help="host graph in .gpg format")
    src.add_argument("--family", choices=FAMILY_NAMES + ("random",))
    run.add_argument("--size", type=parse_size_arg, help="target node count plus edge count")
    run.add_argument("--width", type=_positive)
    run.add_argument("--height", type=_positive)
    run.add_argument("--k", type=_positive)
    run.add_argument("--emit-result", metavar="FILE", help="write the output graph (.gpg)")

    sw = sub.add_parser("sweep", help="run over a range of sizes and fit steps against size")
    common(sw)
    sw.add_argument("--families", "--family", dest="families", default=",".join(FAMILY_NAMES),
                    help="comma-separated family names")
    sw.add_argument("--sizes", default="1k..16k", help="e.g. 1k..64k or 1000,2000,4000")
    return ap


def _explicit_family(args) -> Optional[Family]:
    if args.family == "grid" and (args.width or args.height):
        if not (args.width and args.height):
            raise UsageError("--width and --height go together")
        return Grid(args.width, args.height)
    if args.family == "kkstar" and args.k:
        return KKStar(args.k)
    if args.width or args.height or args.k:
        raise UsageError("--width/--height apply to grid and --k to kkstar")
    return None


def cmd_run(args, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    fam = None
    if args.family:
        fam = _explicit_family(args)
        if fam is None and args.size is None:
            raise UsageError("--family needs --size (or --width/--height, --k)")
    records = []
    status = 0
    for _ in range(args.reps):
        if args.graph:
            try:
                g = load_host_graph(args.graph, args.backend)
            except OSError as exc:
                raise UsageError(f"cannot read {args.graph}: {exc}") from None
            except ParseError as exc:
                raise UsageError(f"{args.graph}:{exc}") from None
            label = "file"
        elif fam is not None:
            g = build_input(args.program, fam, args.backend)
            label = args.family
        else:
            g = family_input(args.program, args.family, args.size, args.backend, args.seed)
            label = args.family
        rec, _ = run_once(args.program, g, label, args.budget)
        records.append(rec)
        print(f"{rec.program} on {rec.family} ({rec.nodes} nodes, {rec.edges} edges, "
              f"{rec.backend}): {rec.outcome}, {rec.steps} steps, {rec.rule_apps} rule "
              f"applications, {rec.wall_ms:.1f} ms", file=out)
        if rec.outcome == "success":
            status = 0
            if args.emit_result:
                save_host_graph(g, args.emit_result)
        else:
            status = 1
            msg = ("step budget exhausted" if rec.outcome == "budget"
                   else "program failed")
            print(f"{args.program}: {msg}", file=err)
    if args.csv:
        write_csv(records, args.csv)
    return status


def cmd_sweep(args, out=None) -> int:
    out = out or sys.stdout
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    for f in families:
        if f not in FAMILY_NAMES + ("random",):
            raise UsageError(f"unknown family {f!r}")
    sizes = parse_sizes(args.sizes)
    if len(sizes) < 5:
        raise UsageError("a sweep needs at least 5 sizes")
    records, fits = sweep(args.program, families, sizes, args.backend, args.reps,
                          args.budget, args.seed)
    if args.csv:
        write_csv(records, args.csv)
    print(f"{args.program} ({args.backend}), sizes {sizes[0]}..{sizes[-1]}", file=out)
    print(format_fits(fits), file=out)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_sweep(args)
    except (UsageError, InvalidSize) as exc:
        ap.print_usage(sys.stderr)
        print(f"rootedgp: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
