"""Constraint formulas, literals and constrained clauses.

Atoms are interpreted over ground constructor terms:

* ``Eq``/``Neq``  syntactic (dis)equality
* ``Lt(s, t)``    s is smaller than t in the ambient path ordering
* ``Shape``       same-shape relation for balanced binary trees
* ``Member``      membership of a term in the language of a grammar non-terminal

A membership atom carries an *instance* of the non-terminal's pattern.  The
atom ``Member(t, <ins(x, y)>, ins(a, b))`` reads "t is generated from
<ins(x, y)> and t = ins(a, b)", so a and b name the two direct subterms of t
and may be referred to by other atoms of the same constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .terms import Term, Var, apply, canonical_renaming, match_term, rename_apart


class ConstraintError(Exception):
    pass


class UnsupportedConstraint(ConstraintError):
    pass


class UnknownNonTerminal(ConstraintError):
    pass


# ---------------------------------------------------------------- non-terminals

@dataclass(frozen=True)
class NonTerminal:
    grammar: str
    key: str
    pattern: Term = field(compare=False)
    red: bool = field(default=False, compare=False)

    @property
    def sort(self) -> str:
        return self.pattern.sort

    @property
    def is_var(self) -> bool:
        return isinstance(self.pattern, Var)

    def label(self, inst: Optional[Term] = None) -> str:
        if self.red:
            text = "Red"
        elif self.is_var:
            text = self.sort
        else:
            text = str(inst if inst is not None else self.pattern)
        if self.grammar != "nf":
            text = f"{self.grammar}:{text}"
        return f"<{text}>"

    def __str__(self):
        return self.label()


# ---------------------------------------------------------------- formulas

class Formula:
    __slots__ = ()

    def substitute(self, sigma) -> "Formula":
        raise NotImplementedError

    @property
    def vars(self) -> frozenset:
        raise NotImplementedError

    def key(self):
        raise NotImplementedError

    def atoms(self) -> Iterable["Atom"]:
        raise NotImplementedError

    def subformula_keys(self) -> set:
        return {self.key()}


@dataclass(frozen=True)
class BoolConst(Formula):
    value: bool

    def substitute(self, sigma):
        return self

    @property
    def vars(self):
        return frozenset()

    def key(self):
        return ("bool", self.value)

    def atoms(self):
        return ()

    def __str__(self):
        return "true" if self.value else "false"


TRUE = BoolConst(True)
FALSE = BoolConst(False)


class Atom(Formula):
    __slots__ = ()

    def atoms(self):
        return (self,)


@dataclass(frozen=True)
class _Binary(Atom):
    s: Term
    t: Term

    symbol = "?"
    symmetric = False

    def substitute(self, sigma):
        return type(self)(apply(self.s, sigma), apply(self.t, sigma))

    @property
    def vars(self):
        return self.s.vars | self.t.vars

    def key(self):
        a, b = self.s, self.t
        if self.symmetric and str(b) < str(a):
            a, b = b, a
        return (type(self).__name__, a, b)

    def __str__(self):
        return f"{self.s} {self.symbol} {self.t}"


@dataclass(frozen=True)
class Eq(_Binary):
    symbol = "=~"
    symmetric = True


@dataclass(frozen=True)
class Neq(_Binary):
    symbol = "!~"
    symmetric = True


@dataclass(frozen=True)
class Lt(_Binary):
    """``s < t``: s is strictly smaller than t."""

    symbol = "<"


@dataclass(frozen=True)
class Shape(_Binary):
    symbol = "~"
    symmetric = True


@dataclass(frozen=True)
class NotShape(_Binary):
    symbol = "!~~"
    symmetric = True

    def __str__(self):
        return f"!({self.s} ~ {self.t})"


@dataclass(frozen=True)
class Member(Atom):
    term: Term
    nt: NonTerminal
    inst: Term

    def substitute(self, sigma):
        t = apply(self.term, sigma)
        inst = t if self.nt.is_var else apply(self.inst, sigma)
        return Member(t, self.nt, inst)

    @property
    def vars(self):
        return self.term.vars | self.inst.vars

    def key(self):
        return ("Member", self.term, self.nt, self.inst)

    def __str__(self):
        return f"{self.term} : {self.nt.label(None if self.nt.is_var else self.inst)}"


@dataclass(frozen=True)
class NotMember(Atom):
    term: Term
    nt: NonTerminal

    def substitute(self, sigma):
        return NotMember(apply(self.term, sigma), self.nt)

    @property
    def vars(self):
        return self.term.vars

    def key(self):
        return ("NotMember", self.term, self.nt)

    def __str__(self):
        return f"!({self.term} : {self.nt.label()})"


def member(t: Term, nt: NonTerminal, inst: Optional[Term] = None) -> Member:
    if nt.is_var:
        return Member(t, nt, t)
    if inst is None:
        inst, _ = rename_apart(nt.pattern)
    return Member(t, nt, inst)


@dataclass(frozen=True)
class And(Formula):
    items: tuple

    def substitute(self, sigma):
        return conj(*(i.substitute(sigma) for i in self.items))

    @property
    def vars(self):
        return frozenset().union(*(i.vars for i in self.items))

    def key(self):
        return ("and", frozenset(i.key() for i in self.items))

    def atoms(self):
        for i in self.items:
            yield from i.atoms()

    def subformula_keys(self):
        out = {self.key()}
        for i in self.items:
            out |= i.subformula_keys()
        return out

    def __str__(self):
        return ", ".join(_paren(i, And) for i in self.items)


@dataclass(frozen=True)
class Or(Formula):
    items: tuple

    def substitute(self, sigma):
        return disj(*(i.substitute(sigma) for i in self.items))

    @property
    def vars(self):
        return frozenset().union(*(i.vars for i in self.items))

    def key(self):
        return ("or", frozenset(i.key() for i in self.items))

    def atoms(self):
        for i in self.items:
            yield from i.atoms()

    def subformula_keys(self):
        out = {self.key()}
        for i in self.items:
            out |= i.subformula_keys()
        return out

    def __str__(self):
        return "(" + " | ".join(_paren(i, Or) for i in self.items) + ")"


@dataclass(frozen=True)
class Not(Formula):
    item: Formula

    def substitute(self, sigma):
        return Not(self.item.substitute(sigma))

    @property
    def vars(self):
        return self.item.vars

    def key(self):
        return ("not", self.item.key())

    def atoms(self):
        return self.item.atoms()

    def subformula_keys(self):
        return {self.key()} | self.item.subformula_keys()

    def __str__(self):
        inner = str(self.item)
        if isinstance(self.item, Or):
            return "!" + inner
        return f"!({inner})"


def _paren(f: Formula, ctx) -> str:
    s = str(f)
    if isinstance(f, And) and ctx is Or:
        return "(" + s + ")"
    return s


def conj(*items: Formula) -> Formula:
    out: list = []
    seen = set()
    for i in items:
        parts = i.items if isinstance(i, And) else (i,)
        for p in parts:
            if p == FALSE:
                return FALSE
            if p == TRUE:
                continue
            k = p.key()
            if k not in seen:
                seen.add(k)
                out.append(p)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*items: Formula) -> Formula:
    out: list = []
    seen = set()
    for i in items:
        parts = i.items if isinstance(i, Or) else (i,)
        for p in parts:
            if p == TRUE:
                return TRUE
            if p == FALSE:
                continue
            k = p.key()
            if k not in seen:
                seen.add(k)
                out.append(p)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def conjuncts(f: Formula) -> tuple:
    if f == TRUE:
        return ()
    return f.items if isinstance(f, And) else (f,)


# ---------------------------------------------------------------- negation and DNF

Complement = Callable[[NonTerminal], Optional[Sequence[NonTerminal]]]


def _no_complement(nt):
    return None


def negate_atom(a: Atom, complement: Complement = _no_complement) -> Formula:
    match a:
        case Eq(s, t):
            return Neq(s, t)
        case Neq(s, t):
            return Eq(s, t)
        case Lt(s, t):
            return disj(Lt(t, s), Eq(s, t))
        case Shape(s, t):
            return NotShape(s, t)
        case NotShape(s, t):
            return Shape(s, t)
        case NotMember(t, nt):
            return member(t, nt)
        case Member(t, nt, _):
            others = complement(nt)
            if others is None:
                return NotMember(t, nt)
            return disj(*(member(t, n) for n in others))
    raise UnsupportedConstraint(f"cannot negate {a}")


def negate(f: Formula, free: Optional[Iterable[Var]] = None,
           complement: Complement = _no_complement) -> Formula:
    """A negation-normal formula equivalent to ``not f``.

    Variables of ``f`` outside ``free`` are read as existentially bound in
    ``f``; they may only occur linked through membership instances, which
    determine them uniquely.  ``free=None`` means every variable is free.
    """
    free_set = f.vars if free is None else frozenset(free)
    return conj(*(_negate_conj(k, free_set, complement) for k in dnf(f, complement)))


def _negate_conj(atoms: Sequence[Atom], free: frozenset, complement: Complement) -> Formula:
    members = [a for a in atoms if isinstance(a, Member)]
    rest = [a for a in atoms if not isinstance(a, Member)]
    locals_ = set().union(*(a.vars for a in atoms)) - free if atoms else set()
    determined = set(free)
    sub: dict = {}
    anchored: list = []
    eqs: list = []
    pending = list(members)
    while pending:
        progress = False
        for m in list(pending):
            term = apply(m.term, sub)
            if not term.vars <= determined:
                continue
            pending.remove(m)
            progress = True
            if m.nt.is_var:
                anchored.append(Member(term, m.nt, term))
                continue
            inst = apply(m.inst, sub)
            fresh, _ = rename_apart(m.nt.pattern)
            theta = match_term(fresh, inst)
            if theta is None:
                raise UnsupportedConstraint(f"malformed membership instance {m}")
            for v, u in theta.items():
                if isinstance(u, Var) and u in locals_ and u not in sub:
                    sub[u] = v
                else:
                    eqs.append(Eq(v, u))
                determined.add(v)
            anchored.append(Member(term, m.nt, fresh))
        if not progress:
            raise UnsupportedConstraint("membership instance refers to an unbound variable")
    body = [a.substitute(sub) for a in rest] + [e.substitute(sub) for e in eqs]
    leftover = set().union(*(a.vars for a in body)) - determined if body else set()
    if leftover:
        raise UnsupportedConstraint("cannot negate a constraint with unconstrained local variables")
    branches = []
    for i, m in enumerate(anchored):
        branches.append(conj(*anchored[:i], negate_atom(m, complement)))
    branches.append(conj(*anchored, disj(*(negate_atom(a, complement) for a in body))))
    return disj(*branches)


def dnf(f: Formula, complement: Complement = _no_complement) -> list[tuple]:
    """Disjunctive normal form as a list of atom tuples; [] is false, [()] is true."""
    if isinstance(f, BoolConst):
        return [()] if f.value else []
    if isinstance(f, Atom):
        return [(f,)]
    if isinstance(f, Or):
        out = []
        for i in f.items:
            out.extend(dnf(i, complement))
        return _dedupe(out)
    if isinstance(f, And):
        acc: list = [()]
        for i in f.items:
            parts = dnf(i, complement)
            acc = [a + b for a in acc for b in parts]
            if not acc:
                return []
        return _dedupe(acc)
    if isinstance(f, Not):
        return dnf(negate(f.item, None, complement), complement)
    raise UnsupportedConstraint(f"unknown formula {f!r}")


def _dedupe(conjs: list) -> list:
    out, seen = [], set()
    for c in conjs:
        uniq, keys = [], set()
        for a in c:
            k = a.key()
            if k not in keys:
                keys.add(k)
                uniq.append(a)
        fk = frozenset(keys)
        if fk not in seen:
            seen.add(fk)
            out.append(tuple(uniq))
    return out


normalize_dnf = dnf


def from_dnf(conjs: Sequence[Sequence[Atom]]) -> Formula:
    return disj(*(conj(*c) for c in conjs))


def eliminate_eqs(atoms: Sequence[Atom]):
    """Unify the Eq atoms of a conjunction; returns (mgu, remaining atoms) or None."""
    from .terms import unify_pairs

    pairs = [(a.s, a.t) for a in atoms if isinstance(a, Eq)]
    sigma = unify_pairs(pairs)
    if sigma is None:
        return None
    rest = [a.substitute(sigma) for a in atoms if not isinstance(a, Eq)]
    return sigma, rest


# ---------------------------------------------------------------- clauses

@dataclass(frozen=True)
class Literal:
    lhs: Term
    rhs: Term
    positive: bool = True

    def substitute(self, sigma) -> "Literal":
        return Literal(apply(self.lhs, sigma), apply(self.rhs, sigma), self.positive)

    @property
    def vars(self):
        return self.lhs.vars | self.rhs.vars

    def replace(self, side: int, term: Term) -> "Literal":
        return Literal(term, self.rhs, self.positive) if side == 0 else Literal(self.lhs, term, self.positive)

    def sides(self):
        return (self.lhs, self.rhs)

    def atom(self) -> Atom:
        return Eq(self.lhs, self.rhs) if self.positive else Neq(self.lhs, self.rhs)

    def __str__(self):
        return f"{self.lhs} {'=' if self.positive else '!='} {self.rhs}"


@dataclass(frozen=True)
class Clause:
    literals: tuple
    constraint: Formula = TRUE

    def substitute(self, sigma) -> "Clause":
        return Clause(tuple(l.substitute(sigma) for l in self.literals), self.constraint.substitute(sigma))

    def with_constraint(self, c: Formula) -> "Clause":
        return Clause(self.literals, c)

    @property
    def vars(self) -> frozenset:
        return frozenset().union(*(l.vars for l in self.literals)) if self.literals else frozenset()

    @property
    def all_vars(self) -> frozenset:
        return self.vars | self.constraint.vars

    @property
    def depth(self) -> int:
        return max((max(l.lhs.depth, l.rhs.depth) for l in self.literals), default=0)

    @property
    def is_empty(self) -> bool:
        return not self.literals

    @property
    def positives(self):
        return [l for l in self.literals if l.positive]

    @property
    def negatives(self):
        return [l for l in self.literals if not l.positive]

    def is_constructor(self) -> bool:
        from .terms import symbols_of

        return all(s.constructor for l in self.literals for t in l.sides() for s in symbols_of(t))

    def as_formula(self) -> Formula:
        """The clause read as a constraint (each literal becomes an (in)equality atom)."""
        return disj(*(l.atom() for l in self.literals))

    def constraint_occurs(self, d: Formula) -> bool:
        keys = self.constraint.subformula_keys()
        if d.key() in keys or Not(d).key() in keys:
            return True
        # a negated atom may have been stored in normal form
        if isinstance(d, Atom):
            try:
                nd = negate_atom(d)
            except UnsupportedConstraint:
                return False
            return nd.key() in keys
        return False

    def __str__(self):
        return render_clause(self)


def render_clause(cl: Clause, canonical: bool = False) -> str:
    if canonical:
        cl = canonicalize(cl)
    neg = [l for l in cl.literals if not l.positive]
    pos = [l for l in cl.literals if l.positive]
    body = " \\/ ".join(str(l) for l in pos) if pos else "[]"
    if neg:
        body = ", ".join(f"{l.lhs} = {l.rhs}" for l in neg) + " => " + body
    if cl.constraint != TRUE:
        body += " || " + str(cl.constraint)
    return body


def canonicalize(cl: Clause) -> Clause:
    """Rename variables by first occurrence (literals first) and sort constraint atoms."""
    lit_terms = [t for l in cl.literals for t in l.sides()]
    ren = canonical_renaming(lit_terms)
    parts = conjuncts(cl.constraint)

    def sort_key(f):
        vs = f.vars - set(ren)
        ph = {v: Var("_", v.sort) for v in vs}
        return str(f.substitute({**ren, **ph}))

    ordered = sorted(parts, key=sort_key)
    for f in ordered:
        for t in _formula_terms(f):
            for v in _occ(t):
                if v not in ren:
                    ren[v] = Var(f"x{len(ren) + 1}", v.sort)
    new = Clause(tuple(l.substitute(ren) for l in cl.literals),
                 conj(*(f.substitute(ren) for f in ordered)))
    return new


def _occ(t: Term):
    from .terms import var_occurrences

    return var_occurrences(t)


def _formula_terms(f: Formula):
    match f:
        case _Binary(s, t):
            return [s, t]
        case Member(t, _, inst):
            return [t, inst]
        case NotMember(t, _):
            return [t]
        case And(items) | Or(items):
            return [x for i in items for x in _formula_terms(i)]
        case Not(item):
            return _formula_terms(item)
    return []
