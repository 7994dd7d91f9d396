"""The interpretation shared by constraints, grammars and the prover.

A ``Context`` bundles the signature, the precedence and the registry of
grammars that membership atoms refer to.  It also evaluates ground atoms,
which is what witnesses and enumerations are checked against.
"""

from __future__ import annotations

from typing import Optional

from .constraints import (
    And, Atom, BoolConst, Eq, Formula, Lt, Member, Neq, Not, NotMember, NotShape, Or, Shape,
    UnknownNonTerminal,
)
from .ordering import Precedence, lpo_greater
from .terms import App, Signature, Term


class Context:
    def __init__(self, sig: Signature, prec: Precedence, witness_depth: int = 4):
        self.sig = sig
        self.prec = prec
        self.witness_depth = witness_depth
        self.grammars: dict = {}
        self.nf = None
        self._shape_kind = {}
        for f in sig.constructors():
            if f.arity and all(s == f.sort for s in f.arg_sorts):
                self._shape_kind[f.name] = "node"
            elif f.arity and all(s != f.sort for s in f.arg_sorts):
                self._shape_kind[f.name] = "leaf"
        self.shape_sorts = {sig[n].sort for n, k in self._shape_kind.items() if k == "node"}

    # grammars

    def register(self, grammar) -> None:
        self.grammars[grammar.name] = grammar
        if grammar.name == "nf":
            self.nf = grammar

    def grammar(self, name: str):
        try:
            return self.grammars[name]
        except KeyError:
            raise UnknownNonTerminal(f"no grammar named {name!r} is registered") from None

    def complement(self, nt):
        g = self.grammars.get(nt.grammar)
        return None if g is None else g.complement(nt)

    # shapes

    def shape_kind(self, name: str) -> Optional[str]:
        return self._shape_kind.get(name)

    def shape_of(self, t: Term) -> Optional[int]:
        """Depth of a balanced tree; None when the shape is undefined."""
        if not isinstance(t, App) or t.sort not in self.shape_sorts:
            return None
        kind = self._shape_kind.get(t.sym.name)
        if kind == "leaf":
            return 0
        if kind != "node":
            return None
        shapes = {self.shape_of(a) for a in t.args}
        if len(shapes) != 1 or None in shapes:
            return None
        return shapes.pop() + 1

    # evaluation of ground formulas

    def least_term(self, sort: str) -> Optional[Term]:
        """The ordering-minimal ground term of a sort when it is a constant."""
        return _least(self.sig, self.prec, sort)

    def eval_atom(self, a: Atom) -> bool:
        match a:
            case Eq(s, t):
                return s == t
            case Neq(s, t):
                return s != t
            case Lt(s, t):
                return lpo_greater(t, s, self.prec)
            case Shape(s, t):
                h = self.shape_of(s)
                return h is not None and h == self.shape_of(t)
            case NotShape(s, t):
                h = self.shape_of(s)
                return not (h is not None and h == self.shape_of(t))
            case Member(t, nt, inst):
                return inst == t and self.grammar(nt.grammar).contains(t, nt)
            case NotMember(t, nt):
                return not self.grammar(nt.grammar).contains(t, nt)
        raise TypeError(f"cannot evaluate {a!r}")

    def eval(self, f: Formula) -> bool:
        match f:
            case BoolConst(v):
                return v
            case And(items):
                return all(self.eval(i) for i in items)
            case Or(items):
                return any(self.eval(i) for i in items)
            case Not(item):
                return not self.eval(item)
        return self.eval_atom(f)


def _least(sig: Signature, prec: Precedence, sort: str) -> Optional[Term]:
    cons = sig.constructors(sort)
    if not cons:
        return None
    low = min(cons, key=lambda f: prec.rank[f.name])
    return App(low) if low.arity == 0 else None
