"""Command-line entry point.

Exit codes: 0 when every expectation passes, 1 when any fails, 2 on parse,
validation or usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .advisor import advise, load_answers, load_profile
from .culture import CulturePack, parse_culture_pack, validate_pack
from .errors import DisruptkitError
from .repl import default_scenario, repl
from .scenario import parse_scenario
from .session import run_session
from .suite import format_matrix, resolve_pack, run_suite

OK, FAILED, ERROR = 0, 1, 2


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _pack(path: Optional[str], name: Optional[str] = None, near: Optional[Path] = None) -> CulturePack:
    if path:
        return parse_culture_pack(_read(path))
    return resolve_pack(name, near)


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_run(args: argparse.Namespace) -> int:
    scenario = parse_scenario(_read(args.scenario))
    pack = _pack(args.pack, scenario.pack, Path(args.scenario))
    t = run_session(scenario, pack, args.arch, window=args.window, seed=args.seed)
    if args.trace:
        _write(t.text, args.out)
    else:
        keep = [ln for ln in t.lines if not ln.startswith(("  detect ", "  assess ", "  goal ", "  plan "))]
        _write("\n".join(keep) + "\n", args.out)
    return OK if t.passed else FAILED


def cmd_validate(args: argparse.Namespace) -> int:
    pack = parse_culture_pack(_read(args.pack))
    diagnostics = validate_pack(pack)
    for d in diagnostics:
        print(f"{args.pack}:{d.line}:{d.column}: {d.severity}: {d.message}")
    if any(d.severity == "error" for d in diagnostics):
        return ERROR
    print(f"{args.pack}: ok ({pack.id})")
    return OK


def cmd_repl(args: argparse.Namespace) -> int:
    pack = _pack(args.pack)
    header = parse_scenario(_read(args.scenario)) if args.scenario else default_scenario(args.occasion)
    pack.norms(header.occasion)  # fail early on an unknown occasion
    t = repl(pack, header, arch=args.arch, record=args.record)
    return OK if t.passed else FAILED


def cmd_advise(args: argparse.Namespace) -> int:
    try:
        answers = load_answers(args.answers)
        profile = load_profile(args.profile)
    except json.JSONDecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR
    sys.stdout.write(advise(answers, profile))
    return OK


def cmd_suite(args: argparse.Namespace) -> int:
    directory = Path(args.directory) if args.directory else None
    pack = parse_culture_pack(_read(args.pack)) if args.pack else None
    results = [run_suite(directory, arch, pack=pack, window=args.window) for arch in args.arch]
    sys.stdout.write(format_matrix(results))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for res in results:
            for sid, t in res.transcripts.items():
                (out / f"{sid}.arch{res.arch}.txt").write_text(t.text, encoding="utf-8")
    return OK if all(r.all_passed for r in results) else FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="disruptkit", description="Disruption detection and recovery engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario script")
    p.add_argument("scenario")
    p.add_argument("--pack", help="culture pack file (default: the pack named in the script)")
    p.add_argument("--arch", choices=["A", "B"], default="A")
    p.add_argument("--trace", action="store_true", help="include detection log and plan rationale")
    p.add_argument("--window", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a culture pack")
    p.add_argument("pack")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("repl", help="interactive session")
    p.add_argument("--pack")
    p.add_argument("--occasion", default="bar")
    p.add_argument("--scenario", help="take cast and catalog from this script")
    p.add_argument("--arch", choices=["A", "B"], default="A")
    p.add_argument("--record", help="save the typed events as a script on exit")
    p.set_defaults(func=cmd_repl)

    p = sub.add_parser("advise", help="architecture checklist report")
    p.add_argument("--answers", required=True)
    p.add_argument("--profile", required=True)
    p.set_defaults(func=cmd_advise)

    p = sub.add_parser("suite", help="run every fixture and print the coverage matrix")
    p.add_argument("directory", nargs="?", help="fixture directory (default: built-in fixtures)")
    p.add_argument("--arch", choices=["A", "B"], action="append")
    p.add_argument("--pack", help="force one pack for every fixture")
    p.add_argument("--window", type=int, default=8)
    p.add_argument("--out", help="directory for per-fixture transcripts")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "suite" and not args.arch:
        args.arch = ["A", "B"]
    try:
        return args.func(args)
    except (DisruptkitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
