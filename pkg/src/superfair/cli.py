"""Command line interface.

JSON (or CSV) goes to stdout, a short human summary to stderr. Exit codes:
0 ok, 1 usage or parse error, 2 domain rejection, 3 internal contradiction.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .betting import (
    BettingAutomaton,
    automaton_or_family,
    expected_capital,
    mc_capital,
    to_matrix_family,
    validate_automaton,
)
from .classify import classify_general, classify_star
from .errors import Malformed, NotSuperfair, ParseError, SuperfairError
from .examples import NAMES, example_automaton
from .family import MatrixFamily, format_word, validate
from .numerics import format_scalar, labels, parse_scalar
from .sequences import parse_source
from .support import (
    bits,
    bscc_structure,
    build_support_automaton,
    pseudo_mixing_word,
    reachability_dot,
    reachability_graph,
    star_check,
    stationary_distribution,
    support_dot,
    synchronizing_word,
    to_set,
)
from .trajectory import evolve, rate_fit, write_csv

ENV_MODE = "SUPERFAIR_MODE"


class UsageError(ParseError):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _mode(args, default: str) -> str:
    return args.mode or os.environ.get(ENV_MODE) or default


def _read_json(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise Malformed(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise Malformed(f"{path}: invalid JSON ({exc})") from None


def load_input(path: str, mode: str, force_automaton: bool = False):
    """``(family, v0 or None, automaton or None)`` from either JSON schema."""
    data = _read_json(path)
    if not isinstance(data, dict):
        raise Malformed(f"{path}: top-level JSON must be an object")
    kind = "automaton" if force_automaton else automaton_or_family(data)
    if kind == "automaton":
        b = BettingAutomaton.from_dict(data, mode)
        fam, v0 = to_matrix_family(b)
        return fam, v0, b
    return MatrixFamily.from_dict(data, mode), None, None


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _note(msg: str) -> None:
    sys.stderr.write(msg + "\n")


# -- commands ----------------------------------------------------------------

def cmd_verify(args) -> int:
    fam, _, _ = load_input(args.file, _mode(args, "exact"))
    verdict = validate(fam)
    _emit(verdict.to_dict())
    _note(f"fairness: {verdict.kind}")
    return 0 if verdict.superfair else NotSuperfair.exit_code


def cmd_classify(args) -> int:
    path = args.automaton or args.file
    if path is None:
        raise UsageError("classify needs a family file or --automaton")
    fam, _, _ = load_input(path, _mode(args, "exact"), force_automaton=bool(args.automaton))
    star = star_check(reachability_graph(fam))
    if star and not args.general:
        c = classify_star(fam)
        _emit(c.to_dict())
        _note(f"case {c.case}")
    else:
        rep = classify_general(fam, args.probe_n, args.probe_trials, args.seed, probe=not args.no_probe)
        _emit(rep.to_dict())
        _note("general: components " + ", ".join(f"{c['indices']}->case {c['case']}" for c in rep.components))
    return 0


def _parse_vector(text: str, fam: MatrixFamily):
    parts = [p for p in text.replace(" ", ",").split(",") if p]
    return fam.vector([parse_scalar(p, fam.mode) for p in parts])


def cmd_simulate(args) -> int:
    fam, v0, _ = load_input(args.file, _mode(args, "float"))
    if args.vector:
        v = _parse_vector(args.vector, fam)
    elif v0 is not None:
        v = v0
    else:
        v = fam.vector([1] * fam.dim)
    src = parse_source(args.sequence, fam.alphabet)
    x = None
    if args.dh:
        exact = fam.to_mode("exact") if fam.mode == "float" else fam
        c = classify_star(exact)
        if c.fixed is not None:
            x = tuple(float(t) for t in c.fixed.x) if fam.mode == "float" else c.fixed.x
    recs = evolve(fam, v, src, args.steps, live_diag=args.live, live_every=args.live_every, x=x)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            write_csv(recs, fh)
    else:
        write_csv(recs, sys.stdout)
    if args.fit:
        fit = rate_fit(recs, args.fit, limit=args.fit_limit)
        block = {"fit": {"target": args.fit, **fit.to_dict()}}
        if args.csv:
            _emit(block)
        else:
            sys.stdout.write("# " + json.dumps(block) + "\n")
    last = recs[-1]
    _note(f"n={last.n} log_norm={last.log_norm:.6g} dead={last.dead}")
    return 0


def cmd_expected(args) -> int:
    mode = _mode(args, "exact")
    data = _read_json(args.file)
    b = BettingAutomaton.from_dict(data, mode)
    src = parse_source(args.sequence, b.alphabet)
    out = {"steps": args.steps, "exact": format_scalar(expected_capital(b, src, args.steps))}
    if args.mc:
        trials, seed = args.mc
        est = mc_capital(b, src, args.steps, int(trials), int(seed))
        out["mc"] = est.to_dict()
    _emit(out)
    _note(f"E[C_{args.steps}] = {out['exact']}")
    return 0


def cmd_examples(args) -> int:
    b = example_automaton(args.name, p1=args.p1, p2=args.p2)
    problems = validate_automaton(b)
    if problems:
        raise Malformed("; ".join(problems))
    if args.family:
        fam, _ = to_matrix_family(b)
        text = fam.dumps()
    else:
        text = b.dumps()
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
        _note(f"wrote {args.output}")
    else:
        sys.stdout.write(text + "\n")
    return 0


def cmd_support(args) -> int:
    fam, _, _ = load_input(args.file, _mode(args, "exact"))
    g = reachability_graph(fam)
    star = star_check(g)
    aut = build_support_automaton(fam)
    bs = bscc_structure(aut, strict=star)
    sync = synchronizing_word(aut, bs)
    out = {
        "star": star,
        "states": [labels(to_set(E)) for E in aut.states],
        "contains_null": aut.contains_null,
        **bs.to_dict(),
        "synchronizing_word": format_word(fam, sync),
        "pseudo_mixing_word": None,
        "pseudo_mixing_length": None,
        "stationary": None,
    }
    if bs.nonnull_bscc is not None:
        pi = stationary_distribution(aut, bs.nonnull_bscc)
        out["stationary"] = [{"state": labels(to_set(E)), "pi": format_scalar(p)} for E, p in pi.items()]
        if star:
            w = pseudo_mixing_word(fam, bits(bs.minimal_member), bs, aut)
            out["pseudo_mixing_word"] = format_word(fam, w)
            out["pseudo_mixing_length"] = len(w)
    if args.dot:
        Path(args.dot).write_text(support_dot(aut, bs), encoding="utf-8")
    if args.reachability_dot:
        Path(args.reachability_dot).write_text(reachability_dot(g), encoding="utf-8")
    _emit(out)
    _note("only the null BSCC" if bs.only_null else f"F = {out['F']}")
    return 0


# -- entry point -------------------------------------------------------------

def build_parser() -> Parser:
    p = Parser(prog="superfair", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--mode", choices=["exact", "float"], default=None,
                   help=f"scalar mode (default: ${ENV_MODE}, else exact; simulate defaults to float)")
    p.add_argument("--seed", type=int, default=0, help="seed for Monte Carlo and probes")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    s = sub.add_parser("verify", help="fairness verdict of a family or automaton")
    s.add_argument("file")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("classify", help="Case 0/1/2 verdict, or the per-component report")
    s.add_argument("file", nargs="?")
    s.add_argument("--automaton", help="betting automaton JSON (converted first)")
    s.add_argument("--general", action="store_true", help="always produce the per-component report")
    s.add_argument("--probe-n", type=int, default=100)
    s.add_argument("--probe-trials", type=int, default=1000)
    s.add_argument("--no-probe", action="store_true")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("simulate", help="trajectory CSV along a sequence")
    s.add_argument("file")
    s.add_argument("--vector", help="starting vector, comma separated (default: e_s0 or all ones)")
    s.add_argument("--sequence", default="champernowne")
    s.add_argument("--steps", type=int, default=1000)
    s.add_argument("--live", action="store_true", help="record Live (one LP per sample)")
    s.add_argument("--live-every", type=int, default=1)
    s.add_argument("--dh", action="store_true", help="record the Hilbert distance to the fixed direction")
    s.add_argument("--csv", help="write CSV here instead of stdout")
    s.add_argument("--fit", nargs="?", const="norm", choices=["norm", "live", "dh_to_x"])
    s.add_argument("--fit-limit", type=float, default=None, help="force the limit (0 fits the log field)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("expected", help="exact expected capital of an automaton")
    s.add_argument("file")
    s.add_argument("--sequence", default="champernowne")
    s.add_argument("--steps", type=int, default=10)
    s.add_argument("--mc", nargs=2, metavar=("TRIALS", "SEED"), type=int)
    s.set_defaults(func=cmd_expected)

    s = sub.add_parser("examples", help="write one of the built-in example automata")
    s.add_argument("name", choices=NAMES)
    s.add_argument("--p1", default="3/10")
    s.add_argument("--p2", default="3/5")
    s.add_argument("--family", action="store_true", help="emit the matrix family instead")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_examples)

    s = sub.add_parser("support", help="support automaton, BSCCs and words")
    s.add_argument("file")
    s.add_argument("--dot", help="write the support automaton as DOT")
    s.add_argument("--reachability-dot", help="write the index reachability graph as DOT")
    s.set_defaults(func=cmd_support)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SuperfairError as exc:
        _emit({"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code})
        _note(f"error: {exc}")
        return exc.exit_code
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
