"""Command line front end: ``python -m ctgind <command> ...``."""

from __future__ import annotations

import argparse
import sys

from .constraints import ConstraintError
from .engine import DISPROVED, OUT_OF_BUDGET, PROVED, Options, Prover
from .spec import SpecError, load_spec, parse_nonterminal
from .terms import compact

EXIT = {PROVED: 0, DISPROVED: 1, OUT_OF_BUDGET: 2}
LOAD_ERROR = 3


def _load(path: str, out):
    try:
        return load_spec(path)
    except (SpecError, ConstraintError) as e:
        print(f"error: {path}: {e}", file=out)
    except OSError as e:
        print(f"error: {e}", file=out)
    return None


def cmd_prove(args, out, err) -> int:
    spec = _load(args.spec, err)
    if spec is None:
        return LOAD_ERROR
    opts = Options(budget=args.budget, induction_vars=args.induction_vars, max_rec_depth=args.max_rec_depth)
    outcome = Prover(spec, opts).prove()
    if args.trace:
        print(outcome.render_trace(), file=out)
    print(f"{outcome.status} after {outcome.state.steps} inferences ({len(outcome.trace)} trace steps)", file=out)
    if outcome.status == DISPROVED:
        if outcome.culprit is not None:
            print(f"CULPRIT {outcome.culprit}", file=out)
        if outcome.counterexample:
            pairs = sorted(outcome.counterexample.items(), key=lambda kv: kv[0].name)
            print("CEX " + " ".join(f"{v.name}={compact(t)}" for v, t in pairs), file=out)
        if outcome.note:
            print(f"NOTE {outcome.note}", file=out)
    if spec.expect and spec.expect.lower() != outcome.status.lower():
        print(f"warning: spec expects {spec.expect}", file=err)
    return EXIT[outcome.status]


def cmd_grammar(args, out, err) -> int:
    spec = _load(args.spec, err)
    if spec is None:
        return LOAD_ERROR
    g = spec.nf
    if args.emit_grammar:
        print(g.dump(), file=out)
    else:
        print(f"{len(g.nts)} non-terminals, {sum(len(g.productions(n)) for n in g.nts)} productions", file=out)
        for n in g.nts:
            print(f"  {n.label()} : {n.sort}", file=out)
    return 0


def cmd_enumerate(args, out, err) -> int:
    spec = _load(args.spec, err)
    if spec is None:
        return LOAD_ERROR
    try:
        nt = parse_nonterminal(spec, args.nonterminal)
    except (SpecError, ConstraintError) as e:
        print(f"error: {e}", file=err)
        return LOAD_ERROR
    for t in sorted(spec.nf.enumerate(nt, args.depth), key=lambda t: (t.depth, str(t))):
        print(compact(t), file=out)
    return 0


def cmd_check(args, out, err) -> int:
    spec = _load(args.spec, err)
    if spec is None:
        return LOAD_ERROR
    for d in spec.diagnostics:
        print(d, file=out)
    print(f"ok: {len(spec.rules.constructor_rules)} constructor rules, "
          f"{len(spec.rules.defined_rules)} defined rules, {len(spec.conjectures)} conjectures", file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ctgind", description="Induction over constrained tree grammars")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="run the induction procedure on the conjectures of a specification file")
    p.add_argument("spec")
    p.add_argument("--budget", type=int, default=500)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--induction-vars", action="store_true")
    p.add_argument("--max-rec-depth", type=int, default=2)
    p.set_defaults(run=cmd_prove)

    p = sub.add_parser("grammar", help="show the normal-form grammar")
    p.add_argument("spec")
    p.add_argument("--emit-grammar", action="store_true")
    p.set_defaults(run=cmd_grammar)

    p = sub.add_parser("enumerate", help="list the language of a non-terminal")
    p.add_argument("spec")
    p.add_argument("--nonterminal", required=True)
    p.add_argument("--depth", type=int, default=3)
    p.set_defaults(run=cmd_enumerate)

    p = sub.add_parser("check", help="load a specification file and print diagnostics")
    p.add_argument("spec")
    p.set_defaults(run=cmd_check)
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    return args.run(args, out, err)
