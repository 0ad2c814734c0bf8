"""Command-line front end: seed, explore, report, verify, dgraph, calibrate."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from importlib import resources

from . import acampo, dgraph, explore
from .flips import FlipConfig
from .vmcore import ParseError, PrincipalType, parse, serialize, validate

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID, EXIT_CAP = 0, 1, 2, 3

log = logging.getLogger("morsecensus")


class InvalidInput(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InvalidInput(f"{path}: {exc.strerror}") from None


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise InvalidInput(f"{path}: {exc.strerror}") from None


def _config(path: str | None) -> FlipConfig:
    if path is None:
        return default_config()
    try:
        return FlipConfig.from_text(_read(path))
    except ValueError as exc:
        raise InvalidInput(f"{path}: {exc}") from None


def default_config() -> FlipConfig:
    text = resources.files("morsecensus").joinpath("data").joinpath("default.cfg").read_text()
    return FlipConfig.from_text(text)


def expected_table(name_or_path: str) -> dict:
    """Builtin table name (x9plus, x9one, x9two) or a CSV path."""
    if name_or_path in {p.value for p in PrincipalType}:
        text = resources.files("morsecensus").joinpath("data").joinpath(f"expected_{name_or_path}.csv").read_text()
    else:
        text = _read(name_or_path)
    try:
        return explore.spectrum_from_csv(text)
    except ValueError as exc:
        raise InvalidInput(f"{name_or_path}: {exc}") from None


def _load_state(path: str):
    try:
        vm = parse(_read(path))
    except ParseError as exc:
        raise InvalidInput(f"{path}: {exc}") from None
    problems = validate(vm)
    if problems:
        raise InvalidInput(f"{path}: invalid state: {'; '.join(problems)}")
    return vm


def _seeds(args, config):
    seeds = [_load_state(p) for p in args.seed or []]
    if args.ptype:
        seeds += acampo.seeds_for(PrincipalType(args.ptype), config)
    if not seeds:
        raise InvalidInput("no seed states given (use --seed or --ptype)")
    return seeds


def _load_snapshot(path: str):
    try:
        return explore.load_snapshot(path)
    except OSError as exc:
        raise InvalidInput(f"{path}: {exc.strerror}") from None
    except (explore.SnapshotError, ValueError) as exc:
        raise InvalidInput(f"{path}: {exc}") from None


def _records(u, member_of):
    if member_of is None:
        if not u.complete:
            raise InvalidInput("snapshot is partial; resume exploration first")
        return explore.partition_subsets(u)
    return explore.records_from_membership(u, member_of), member_of


def cmd_seed(args) -> int:
    config = _config(args.config)
    if args.fixture:
        try:
            vm = acampo.load_fixture(args.fixture, config)
        except KeyError:
            raise InvalidInput(f"unknown fixture {args.fixture!r}; known: {', '.join(acampo.fixture_names())}") from None
    else:
        try:
            d = acampo.load_divide(_read(args.divide))
            vm = acampo.build_seed(d, config)
        except (ParseError, acampo.InvalidDivide) as exc:
            raise InvalidInput(f"{args.divide}: {exc}") from None
    _write(args.out, serialize(vm))
    return EXIT_OK


def cmd_explore(args) -> int:
    config = _config(args.config)
    if args.max_states:
        config = config.with_choices(max_states=args.max_states)
    if args.resume:
        u, _ = _load_snapshot(args.resume)
        if u.config.codes()[:6] != config.codes()[:6]:
            raise InvalidInput("resume snapshot was written with a different flip configuration")
        u.config = config
        seeds = None
    else:
        u, seeds = None, _seeds(args, config)
    try:
        u = explore.close_universe(seeds, config, threads=args.threads, resume=u)
    except explore.CapError as exc:
        explore.save_snapshot(exc.universe, None, args.out)
        print(f"cap exceeded ({exc}); partial snapshot with {len(exc.universe)} states written to {args.out}",
              file=sys.stderr)
        return EXIT_CAP
    records, member_of = explore.partition_subsets(u)
    explore.save_snapshot(u, member_of, args.out)
    print(json.dumps({"states": len(u), "edges": len(u.edges), "subsets": len(records)}))
    return EXIT_OK


def cmd_report(args) -> int:
    u, member_of = _load_snapshot(args.snapshot)
    records, _ = _records(u, member_of)
    if args.format == "csv":
        text = explore.spectrum_to_csv(records)
    else:
        text = explore.spectrum_to_markdown(explore.spectrum(records))
    _write(args.out, text)
    return EXIT_OK


def cmd_verify(args) -> int:
    u, member_of = _load_snapshot(args.snapshot)
    if not u.complete:
        print("snapshot is partial; nothing to verify", file=sys.stderr)
        return EXIT_MISMATCH
    records, member_of = _records(u, member_of)
    expected = expected_table(args.expected)
    report = explore.compare_spectrum(explore.spectrum(records), expected)
    report["states"] = len(u)
    report["subsets"] = len(records)
    if not args.skip_invariants:
        report["invariants"] = explore.invariant_suite(u, records, member_of)
    ok = report["pass"] and all(v["ok"] for v in report.get("invariants", {}).values())
    report["pass"] = ok
    print(json.dumps(report, indent=2))
    for cell in report["diff"]:
        print(f"cell (M={cell['M']}, m+={cell['m_plus']}): missing {cell['missing']} extra {cell['extra']}",
              file=sys.stderr)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_dgraph(args) -> int:
    u, member_of = _load_snapshot(args.snapshot)
    records, member_of = _records(u, member_of)
    by_id = {r.id: r for r in records}
    if args.subset not in by_id:
        raise InvalidInput(f"no subset {args.subset}")
    rec = by_id[args.subset]
    try:
        g = dgraph.extract_dgraph(u.state(rec.representative))
    except dgraph.UnsupportedState as exc:
        raise InvalidInput(str(exc)) from None
    result = {"subset": rec.id, "card": rec.card, "extensions": dgraph.linear_extensions(g)}
    if args.dot:
        _write(args.dot, dgraph.to_dot(dgraph.canonical_relabel(g)))
    try:
        if args.split:
            left, right = dgraph.parse_split(args.split)
            found = dgraph.ade_split(g, left, right, alternating=args.alternating)
            result["split"] = [[sorted(v + 1 for v in a), sorted(v + 1 for v in b)] for a, b in found]
        if args.contains:
            found = dgraph.find_subdiagram(g, dgraph.parse_shape(args.contains))
            result["contains"] = [sorted(v + 1 for v in s) for s in found]
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    print(json.dumps(result))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    base = _config(args.config)
    if args.max_states:
        base = base.with_choices(max_states=args.max_states)
    seeds = _seeds(args, base)
    expected = expected_table(args.expected)
    try:
        space = explore.parse_space(_read(args.space)) if args.space else explore.full_space()
    except ValueError as exc:
        raise InvalidInput(f"{args.space}: {exc}") from None
    matches, runs = explore.calibrate(seeds, expected, space, base, threads=args.threads)
    for run in runs:
        print(f"{run.outcome}\t{run.states}\t{run.config.one_line()}")
    if matches:
        if args.out:
            _write(args.out, matches[0].to_text())
        return EXIT_OK
    print("no configuration reproduces the expected spectrum", file=sys.stderr)
    return EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="morsecensus", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("seed", help="write a seed state file")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--fixture")
    g.add_argument("--divide")
    s.add_argument("--config")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_seed)

    threads = os.cpu_count() or 1

    s = sub.add_parser("explore", help="close seeds under flips and partition")
    s.add_argument("--seed", action="append")
    s.add_argument("--ptype", choices=[t.value for t in PrincipalType], help="use the shipped seeds")
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=int, default=threads)
    s.add_argument("--max-states", type=int)
    s.add_argument("--resume")
    s.set_defaults(func=cmd_explore)

    s = sub.add_parser("report", help="print the Card spectrum")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--format", choices=["csv", "md"], default="csv")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("verify", help="compare with an expected table and run invariant checks")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--expected", required=True, help="CSV path or one of x9plus, x9one, x9two")
    s.add_argument("--skip-invariants", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("dgraph", help="export or query the D-graph of an all-real subset")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--subset", type=int, required=True)
    s.add_argument("--dot")
    s.add_argument("--split", help="e.g. A5+A4")
    s.add_argument("--contains", help="e.g. E7 or T3,3,1")
    s.add_argument("--alternating", action="store_true")
    s.set_defaults(func=cmd_dgraph)

    s = sub.add_parser("calibrate", help="sweep flip configurations against an expected table")
    s.add_argument("--seed", action="append")
    s.add_argument("--ptype", choices=[t.value for t in PrincipalType])
    s.add_argument("--expected", required=True)
    s.add_argument("--space")
    s.add_argument("--config")
    s.add_argument("--max-states", type=int)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_calibrate)
    return p


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
