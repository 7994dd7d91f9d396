"""Specification files: parsing, checking and printing.

A specification declares sorts, constructors, defined symbols, an optional
precedence, rules, assumptions and conjectures::

    sort Nat;
    cons 0 : Nat;
    cons s : Nat -> Nat;
    defn plus : Nat Nat -> Nat;
    rule p0: plus(0, y) -> y;
    rule p1: plus(s(x), y) -> s(plus(x, y));
    conjecture plus(x, 0) = x;

Constraints follow a rule or conjecture in square brackets.  Atoms are
``s =~ t``, ``s !~ t``, ``s < t`` (also ``>``, ``<=``, ``>=``), ``s ~ t``
and memberships ``t : <pattern>``, ``t : <Sort>``, ``t : <Red>`` or
``t : nf(Sort)``; they combine with ``,`` (and), ``|`` (or) and ``!``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .constraints import (
    FALSE, TRUE, Clause, ConstraintError, Eq, Formula, Literal, Lt, Member, Neq, NonTerminal, Not,
    NotShape, Shape, UnknownNonTerminal, conj, disj, member,
)
from .context import Context
from .ordering import Precedence
from .rewriting import Rule, RuleSet
from .terms import App, FunctionSymbol, Signature, Term, TermError, Var


class SpecError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)


class SpecSyntaxError(SpecError, SyntaxError):
    pass


class SortError(SpecError):
    pass


class UnknownSymbol(SpecError):
    pass


class NonLinearRhs(SpecError):
    pass


ASSUMPTIONS = ("sufficiently_complete", "strongly_complete", "ground_confluent")

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*|//[^\n]*)
  | (?P<op>->|=>|=~|!~|!=|\\/|<=|>=|\|\||[<>~!()\[\],;:=|&])
  | (?P<id>[A-Za-z0-9_'][A-Za-z0-9_']*)
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SpecSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        s = m.group()
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


# ---------------------------------------------------------------- raw syntax

@dataclass
class RawTerm:
    name: str
    args: Optional[list]  # None for a bare identifier
    tok: Token


@dataclass
class RawAtom:
    op: str
    left: RawTerm
    right: object  # RawTerm, or a membership target
    tok: Token


@dataclass
class RawStatement:
    kind: str
    tok: Token
    data: dict = field(default_factory=dict)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.text != text or t.kind == "eof":
            raise SpecSyntaxError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.next()

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "id":
            raise SpecSyntaxError(f"expected an identifier, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.next()

    def at(self, *texts) -> bool:
        return self.tok.kind == "op" and self.tok.text in texts

    # statements

    def statements(self) -> list[RawStatement]:
        out = []
        while self.tok.kind != "eof":
            out.append(self.statement())
        return out

    def statement(self) -> RawStatement:
        kw = self.ident()
        word = kw.text
        if word == "sort":
            names = [self.ident().text]
            while self.at(","):
                self.next()
                names.append(self.ident().text)
            st = RawStatement("sort", kw, {"names": names})
        elif word in ("cons", "defn"):
            name = self.ident().text
            self.expect(":")
            sorts = []
            while self.tok.kind == "id":
                sorts.append(self.ident().text)
            if self.at("->"):
                self.next()
                args, result = sorts, self.ident().text
            else:
                if len(sorts) != 1:
                    raise SpecSyntaxError("a profile needs '->' unless it is a single sort", kw.line, kw.col)
                args, result = [], sorts[0]
            st = RawStatement(word, kw, {"name": name, "args": args, "sort": result})
        elif word == "prec":
            chain = [self.ident().text]
            while self.at(">"):
                self.next()
                chain.append(self.ident().text)
            st = RawStatement("prec", kw, {"chain": chain})
        elif word == "rule":
            label = None
            if self.tok.kind == "id" and self.peek().text == ":" and self.peek().kind == "op":
                label = self.ident().text
                self.next()
            cond = []
            if self.tok.kind == "id" and self.tok.text == "cond":
                self.next()
                cond.append(self.equation())
                while self.at(","):
                    self.next()
                    cond.append(self.equation())
                self.expect("=>")
            lhs = self.term()
            self.expect("->")
            rhs = self.term()
            st = RawStatement("rule", kw, {"label": label, "cond": cond, "lhs": lhs, "rhs": rhs,
                                          "constraint": self.opt_constraint()})
        elif word == "assume":
            t = self.ident()
            if t.text not in ASSUMPTIONS:
                raise SpecSyntaxError(f"unknown assumption {t.text!r}", t.line, t.col)
            st = RawStatement("assume", kw, {"flag": t.text})
        elif word == "conjecture":
            label = None
            if self.tok.kind == "id" and self.peek().text == ":" and self.peek().kind == "op":
                label = self.ident().text
                self.next()
            conds, lits = self.clause_body()
            st = RawStatement("conjecture", kw, {"label": label, "cond": conds, "lits": lits,
                                                "constraint": self.opt_constraint()})
        elif word == "expect":
            t = self.ident()
            if t.text not in ("proved", "disproved"):
                raise SpecSyntaxError("expect takes 'proved' or 'disproved'", t.line, t.col)
            st = RawStatement("expect", kw, {"outcome": t.text})
        else:
            raise SpecSyntaxError(f"unknown declaration {word!r}", kw.line, kw.col)
        self.expect(";")
        return st

    def equation(self):
        l = self.term()
        t = self.tok
        if self.at("=", "!="):
            self.next()
        else:
            raise SpecSyntaxError("expected '=' or '!='", t.line, t.col)
        return (l, self.term(), t.text == "=", t)

    def clause_body(self):
        lits = [self.equation()]
        while self.at(","):
            self.next()
            lits.append(self.equation())
        if self.at("=>"):
            self.next()
            conds = lits
            lits = [] if self._empty_clause() else [self.equation()]
            while self.at("\\/"):
                self.next()
                lits.append(self.equation())
            return conds, lits
        if len(lits) > 1:
            t = self.tok
            raise SpecSyntaxError("several literals need '=>' or '\\/'", t.line, t.col)
        while self.at("\\/"):
            self.next()
            lits.append(self.equation())
        return [], lits

    def _empty_clause(self) -> bool:
        if self.at("[") and self.peek().text == "]":
            self.next()
            self.next()
            return True
        return False

    def term(self) -> RawTerm:
        t = self.ident()
        if self.at("("):
            self.next()
            args = [self.term()]
            while self.at(","):
                self.next()
                args.append(self.term())
            self.expect(")")
            return RawTerm(t.text, args, t)
        return RawTerm(t.text, None, t)

    # constraints

    def opt_constraint(self):
        if self.at("["):
            self.next()
            if self.at("]"):
                self.next()
                return None
            f = self.disjunction()
            self.expect("]")
            return f
        if self.at("||"):
            self.next()
            return self.disjunction()
        return None

    def disjunction(self):
        items = [self.conjunction()]
        while self.at("|"):
            self.next()
            items.append(self.conjunction())
        return items[0] if len(items) == 1 else ("or", items)

    def conjunction(self):
        items = [self.unary()]
        while self.at(",", "&"):
            self.next()
            items.append(self.unary())
        return items[0] if len(items) == 1 else ("and", items)

    def unary(self):
        if self.at("!") or (self.tok.kind == "id" and self.tok.text == "not"):
            self.next()
            return ("not", self.unary())
        if self.at("("):
            self.next()
            f = self.disjunction()
            self.expect(")")
            return f
        if self.tok.kind == "id" and self.tok.text in ("true", "false") and self.peek().kind in ("op", "eof") \
                and self.peek().text in ("]", ",", "|", "&", ")", ";", ""):
            return ("const", self.next().text == "true")
        left = self.term()
        op = self.tok
        if self.at(":"):
            self.next()
            return RawAtom(":", left, self.nt_ref(), op)
        if self.at("=~", "!~", "<", ">", "<=", ">=", "~", "="):
            self.next()
            return RawAtom(op.text, left, self.term(), op)
        raise SpecSyntaxError(f"expected a constraint operator after {left.name!r}", op.line, op.col)

    def nt_ref(self):
        t = self.tok
        if t.kind == "id" and t.text == "nf":
            self.next()
            self.expect("(")
            s = self.ident().text
            self.expect(")")
            return ("nf", s, t)
        self.expect("<")
        pat = self.term()
        self.expect(">")
        return ("pattern", pat, t)


# ---------------------------------------------------------------- typed specification

@dataclass
class Conjecture:
    clause: Clause
    label: str = ""
    decorated: bool = False


@dataclass
class Diagnostic:
    severity: str
    message: str
    line: int = 0

    def __str__(self):
        where = f"line {self.line}: " if self.line else ""
        return f"{self.severity}: {where}{self.message}"


@dataclass
class Specification:
    sig: Signature
    prec: Precedence
    rules: RuleSet
    assumptions: set
    conjectures: list
    expect: Optional[str]
    ctx: Context
    prec_chains: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    @property
    def nf(self):
        return self.ctx.nf


class _Typer:
    """Sort inference for one statement (rule or conjecture)."""

    def __init__(self, sig: Signature, ctx: Optional[Context]):
        self.sig = sig
        self.ctx = ctx
        self.env: dict[str, str] = {}
        self.wild = 0

    def sort_of(self, r: RawTerm) -> Optional[str]:
        if r.name in self.sig.symbols:
            return self.sig[r.name].sort
        return self.env.get(r.name)

    def infer(self, r: RawTerm, expected: Optional[str]) -> bool:
        """Record variable sorts from argument positions; returns True if env changed."""
        changed = False
        if r.name in self.sig.symbols:
            f = self.sig[r.name]
            if r.args is None:
                if f.arity:
                    raise SortError(f"{r.name} expects {f.arity} arguments", r.tok.line, r.tok.col)
                args = []
            else:
                args = r.args
                if len(args) != f.arity:
                    raise SortError(f"{r.name} expects {f.arity} arguments, got {len(args)}",
                                    r.tok.line, r.tok.col)
            if expected is not None and f.sort != expected:
                raise SortError(f"{r.name} has sort {f.sort}, expected {expected}", r.tok.line, r.tok.col)
            for a, s in zip(args, f.arg_sorts):
                changed |= self.infer(a, s)
            return changed
        if r.args is not None:
            raise UnknownSymbol(f"unknown function symbol {r.name!r}", r.tok.line, r.tok.col)
        if r.name == "_" or expected is None:
            return False
        have = self.env.get(r.name)
        if have is None:
            self.env[r.name] = expected
            return True
        if have != expected:
            raise SortError(f"variable {r.name} used with sorts {have} and {expected}", r.tok.line, r.tok.col)
        return False

    def unify_pair(self, a: RawTerm, b: RawTerm) -> bool:
        sa, sb = self.sort_of(a), self.sort_of(b)
        changed = False
        if sa is not None:
            changed |= self.infer(b, sa)
        if sb is not None:
            changed |= self.infer(a, sb)
        return changed

    def build(self, r: RawTerm, wild_sort: Optional[str] = None) -> Term:
        if r.name in self.sig.symbols:
            f = self.sig[r.name]
            args = [self.build(a, s) for a, s in zip(r.args or [], f.arg_sorts)]
            return App(f, args)
        if r.name == "_":
            if wild_sort is None:
                raise SortError("cannot infer the sort of '_'", r.tok.line, r.tok.col)
            self.wild += 1
            return Var(f"_{self.wild}", wild_sort)
        s = self.env.get(r.name, wild_sort)
        if s is None:
            raise SortError(f"cannot infer the sort of variable {r.name}", r.tok.line, r.tok.col)
        return Var(r.name, s)

    # constraint formulas

    def atoms(self, f):
        if f is None:
            return
        if isinstance(f, RawAtom):
            yield f
        elif f[0] in ("and", "or"):
            for i in f[1]:
                yield from self.atoms(i)
        elif f[0] == "not":
            yield from self.atoms(f[1])

    def infer_formula(self, f) -> bool:
        changed = False
        for a in self.atoms(f):
            if a.op == ":":
                kind, what, tok = a.right
                if kind == "nf":
                    if what not in self.sig.sorts:
                        raise SortError(f"unknown sort {what}", tok.line, tok.col)
                    changed |= self.infer(a.left, what)
                elif what.args is None and what.name not in self.sig.symbols:
                    if what.name in self.sig.sorts:
                        changed |= self.infer(a.left, what.name)
                else:
                    changed |= self.infer(what, None)
                    s = self.sort_of(what)
                    if s is not None:
                        changed |= self.infer(a.left, s)
                    else:
                        changed |= self.infer(a.left, None)
            else:
                changed |= self.infer(a.left, None) | self.infer(a.right, None)
                changed |= self.unify_pair(a.left, a.right)
        return changed

    def formula(self, f) -> Formula:
        if f is None:
            return TRUE
        if isinstance(f, RawAtom):
            return self.atom(f)
        tag = f[0]
        if tag == "const":
            return TRUE if f[1] else FALSE
        if tag == "and":
            return conj(*(self.formula(i) for i in f[1]))
        if tag == "or":
            return disj(*(self.formula(i) for i in f[1]))
        inner = self.formula(f[1])
        if isinstance(inner, Shape):
            return NotShape(inner.s, inner.t)
        return Not(inner)

    def atom(self, a: RawAtom) -> Formula:
        if a.op == ":":
            return self.membership(a)
        s, t = self.build(a.left), self.build(a.right)
        if s.sort != t.sort:
            raise SortError(f"sides of {a.op} have sorts {s.sort} and {t.sort}", a.tok.line, a.tok.col)
        match a.op:
            case "=~" | "=":
                return Eq(s, t)
            case "!~":
                return Neq(s, t)
            case "<":
                return Lt(s, t)
            case ">":
                return Lt(t, s)
            case "<=":
                return disj(Lt(s, t), Eq(s, t))
            case ">=":
                return disj(Lt(t, s), Eq(s, t))
            case "~":
                return Shape(s, t)
        raise SpecSyntaxError(f"unknown operator {a.op}", a.tok.line, a.tok.col)

    def membership(self, a: RawAtom) -> Formula:
        kind, what, tok = a.right
        if self.ctx is None or self.ctx.nf is None:
            raise ConstraintError(f"{tok.line}:{tok.col}: membership atoms are not allowed in constructor rules")
        nf = self.ctx.nf
        t = self.build(a.left)
        if kind == "nf":
            return disj(*(member(t, n) for n in nf.nonterminals(what, include_red=False)))
        if what.args is None and what.name not in self.sig.symbols:
            if what.name == "Red":
                return member(t, nf.red)
            if what.name in self.sig.sorts:
                return member(t, _lookup(nf, Var("x", what.name), tok))
            raise UnknownSymbol(f"unknown sort or symbol {what.name!r}", tok.line, tok.col)
        inst = self.build(what)
        if inst.sort != t.sort:
            raise SortError(f"{t} has sort {t.sort} but the non-terminal has sort {inst.sort}", tok.line, tok.col)
        nt = _lookup(nf, inst, tok)
        return Member(t, nt, inst)


def _lookup(nf, pattern: Term, tok: Token) -> NonTerminal:
    try:
        return nf.lookup(pattern)
    except UnknownNonTerminal as e:
        raise SpecError(str(e), tok.line, tok.col) from None


def parse_spec(text: str, witness_depth: int = 4) -> Specification:
    from .grammar import build_nf_grammar

    raw = _Parser(tokenize(text)).statements()
    if not raw:
        raise SpecSyntaxError("empty specification", 1, 1)
    sig = Signature()
    chains = []
    assumptions: set = set()
    expect = None
    for st in raw:
        try:
            if st.kind == "sort":
                for n in st.data["names"]:
                    sig.add_sort(n)
            elif st.kind in ("cons", "defn"):
                d = st.data
                sig.add_symbol(FunctionSymbol(d["name"], tuple(d["args"]), d["sort"], st.kind == "cons"))
            elif st.kind == "prec":
                chains.append(st.data["chain"])
            elif st.kind == "assume":
                assumptions.add(st.data["flag"])
            elif st.kind == "expect":
                expect = st.data["outcome"]
        except TermError as e:
            raise SortError(str(e), st.tok.line, st.tok.col) from None
    for chain in chains:
        for n in chain:
            if n not in sig.symbols:
                raise UnknownSymbol(f"unknown symbol {n!r} in precedence", 0, 0)
    empty = sig.uninhabited_sorts()
    if empty:
        raise SortError(f"sorts without ground constructor terms: {', '.join(empty)}")
    prec = Precedence.from_declarations(sig.order, chains)
    ctx = Context(sig, prec, witness_depth)
    diagnostics: list = []

    rule_stmts = [st for st in raw if st.kind == "rule"]
    rc_raw = [st for st in rule_stmts if _root_is_constructor(sig, st.data["lhs"])]
    rules: dict = {}
    labels = _rule_labels(rule_stmts)
    for st in rc_raw:
        rules[id(st)] = _build_rule(sig, None, st, labels[id(st)], diagnostics)
    build_nf_grammar(ctx, [rules[id(st)] for st in rc_raw])
    for st in rule_stmts:
        if id(st) not in rules:
            rules[id(st)] = _build_rule(sig, ctx, st, labels[id(st)], diagnostics)
    ruleset = RuleSet(rules[id(st)] for st in rule_stmts)
    conjectures = [_build_conjecture(sig, ctx, st, i) for i, st in
                   enumerate((s for s in raw if s.kind == "conjecture"), 1)]
    diagnostics.extend(_restriction_warnings(ruleset))
    return Specification(sig, prec, ruleset, assumptions, conjectures, expect, ctx, chains, diagnostics)


def _root_is_constructor(sig: Signature, r: RawTerm) -> bool:
    if r.name not in sig.symbols:
        raise UnknownSymbol(f"left-hand side must start with a function symbol, found {r.name!r}",
                            r.tok.line, r.tok.col)
    return sig[r.name].constructor


def _rule_labels(stmts) -> dict:
    out = {}
    used = {st.data["label"] for st in stmts if st.data["label"]}
    n = 0
    for st in stmts:
        if st.data["label"]:
            out[id(st)] = st.data["label"]
            continue
        n += 1
        while f"R{n}" in used:
            n += 1
        out[id(st)] = f"R{n}"
    return out


def _build_rule(sig, ctx, st: RawStatement, label: str, diagnostics: list) -> Rule:
    d = st.data
    ty = _Typer(sig, ctx)
    lhs_raw, rhs_raw = d["lhs"], d["rhs"]
    for _ in range(10):
        changed = ty.infer(lhs_raw, None)
        changed |= ty.infer(rhs_raw, ty.sort_of(lhs_raw))
        for l, r, _pos, _t in d["cond"]:
            changed |= ty.infer(l, None) | ty.infer(r, None) | ty.unify_pair(l, r)
        changed |= ty.infer_formula(d["constraint"])
        if not changed:
            break
    lhs = ty.build(lhs_raw)
    rhs = ty.build(rhs_raw)
    if lhs.sort != rhs.sort:
        raise SortError(f"rule sides have sorts {lhs.sort} and {rhs.sort}", st.tok.line, st.tok.col)
    if d["cond"] and lhs.sym.constructor:
        raise SpecError("constructor rules cannot be conditional", st.tok.line, st.tok.col)
    cond = []
    for l, r, pos, tok in d["cond"]:
        if not pos:
            raise SpecSyntaxError("rule conditions are equations", tok.line, tok.col)
        cond.append((ty.build(l), ty.build(r)))
    try:
        c = ty.formula(d["constraint"])
    except ConstraintError as e:
        raise SpecError(str(e), st.tok.line, st.tok.col) from None
    from .terms import var_occurrences

    occ = var_occurrences(rhs)
    if len(occ) != len(set(occ)):
        raise NonLinearRhs(f"right-hand side {rhs} is not linear", st.tok.line, st.tok.col)
    lhs, extra = _linearize(lhs)
    if extra:
        last = {}
        for e in extra:
            last[e.s] = e.t
        rhs = _rename_to_last(rhs, last)
        diagnostics.append(Diagnostic("info", f"rule {label}: left-hand side linearized to {lhs}", st.tok.line))
        c = conj(*extra, c)
    if not rhs.vars <= lhs.vars | c.vars:
        raise SpecError(f"rule {label}: right-hand side variables must occur on the left", st.tok.line, st.tok.col)
    return Rule(lhs, rhs, c, tuple(cond), label)


def _linearize(t: Term):
    seen: set = set()
    extra = []

    def walk(u):
        if isinstance(u, Var):
            if u in seen:
                k = 1
                while Var(u.name + "'" * k, u.sort) in seen or Var(u.name + "'" * k, u.sort) in t.vars:
                    k += 1
                v = Var(u.name + "'" * k, u.sort)
                seen.add(v)
                extra.append(Eq(u, v))
                return v
            seen.add(u)
            return u
        return App(u.sym, [walk(a) for a in u.args])

    return walk(t), extra


def _rename_to_last(t: Term, last: dict) -> Term:
    from .terms import apply

    final = {}
    for v in last:
        w = last[v]
        while w in last:
            w = last[w]
        final[v] = w
    return apply(t, final)


def _build_conjecture(sig, ctx, st: RawStatement, n: int, sorts: Optional[dict] = None) -> Conjecture:
    d = st.data
    ty = _Typer(sig, ctx)
    ty.env.update(sorts or {})
    eqs = d["cond"] + d["lits"]
    for _ in range(10):
        changed = False
        for l, r, _pos, _t in eqs:
            changed |= ty.infer(l, None) | ty.infer(r, None) | ty.unify_pair(l, r)
        changed |= ty.infer_formula(d["constraint"])
        if not changed:
            break
    lits = []
    for l, r, pos, tok in d["cond"]:
        if not pos:
            raise SpecSyntaxError("conditions are equations", tok.line, tok.col)
        lits.append(Literal(ty.build(l), ty.build(r), False))
    for l, r, pos, tok in d["lits"]:
        a, b = ty.build(l), ty.build(r)
        if a.sort != b.sort:
            raise SortError(f"sides have sorts {a.sort} and {b.sort}", tok.line, tok.col)
        lits.append(Literal(a, b, pos))
    c = ty.formula(d["constraint"])
    decorated = any(isinstance(a, Member) for a in c.atoms())
    return Conjecture(Clause(tuple(lits), c), d["label"] or f"conj{n}", decorated)


def _restriction_warnings(rules: RuleSet) -> list:
    """Warn about constructor-rule (dis)equalities outside the decidable fragment."""
    from .terms import subterms

    out = []
    for r in rules.constructor_rules:
        strict = {u for p, u in subterms(r.lhs) if p}
        for a in r.constraint.atoms():
            if isinstance(a, (Eq, Neq)):
                if a.s not in strict or a.t not in strict:
                    out.append(Diagnostic("warning", f"rule {r.label}: {a} relates terms that are not strict "
                                                     "subterms of the left-hand side"))
                elif isinstance(a, Neq) and not _siblings(r.lhs, a.s, a.t):
                    out.append(Diagnostic("warning", f"rule {r.label}: {a} compares non-sibling positions"))
    return out


def _siblings(lhs: Term, s: Term, t: Term) -> bool:
    from .terms import subterms

    for _, u in subterms(lhs):
        if isinstance(u, App) and s in u.args and t in u.args:
            return True
    return False


def load_spec(path: str, witness_depth: int = 4) -> Specification:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read(), witness_depth)


def parse_term(spec: Specification, text: str, sorts: Optional[dict] = None) -> Term:
    """A term over the specification's signature; ``sorts`` fixes variables whose sort cannot be inferred."""
    p = _Parser(tokenize(text))
    raw = p.term()
    if p.tok.kind != "eof":
        raise SpecSyntaxError(f"trailing input after {text!r}", p.tok.line, p.tok.col)
    typer = _Typer(spec.sig, spec.ctx)
    typer.env.update(sorts or {})
    typer.infer(raw, None)
    return typer.build(raw)


def parse_clause(spec: Specification, text: str, sorts: Optional[dict] = None) -> Clause:
    """A clause in conjecture syntax, e.g. ``sorted(y) = true || y : <ins(_, _)>``."""
    st = _Parser(tokenize(f"conjecture {text};")).statement()
    return _build_conjecture(spec.sig, spec.ctx, st, 0, sorts).clause


def parse_nonterminal(spec: Specification, text: str) -> NonTerminal:
    """Resolve ``ins(_,_)``, ``<ins(_, _)>``, a sort name or ``Red`` to a normal-form non-terminal."""
    body = text.strip()
    if body.startswith("<") and body.endswith(">"):
        body = body[1:-1].strip()
    if body == "Red":
        return spec.nf.red
    p = _Parser(tokenize(body))
    raw = p.term()
    if p.tok.kind != "eof":
        raise SpecSyntaxError(f"trailing input after {body!r}", p.tok.line, p.tok.col)
    if raw.args is None and raw.name in spec.sig.sorts:
        return _lookup(spec.nf, Var("x", raw.name), raw.tok)
    typer = _Typer(spec.sig, spec.ctx)
    typer.infer(raw, None)
    return _lookup(spec.nf, typer.build(raw), raw.tok)


# ---------------------------------------------------------------- printing

def print_spec(spec: Specification) -> str:
    sig = spec.sig
    lines = ["sort " + ", ".join(sig.sorts) + ";"]
    for name in sig.order:
        f = sig[name]
        kw = "cons" if f.constructor else "defn"
        prof = " ".join(f.arg_sorts) + " -> " + f.sort if f.arg_sorts else f.sort
        lines.append(f"{kw} {f.name} : {prof};")
    if list(spec.prec.names) != list(sig.order):
        lines.append("prec " + " > ".join(reversed(spec.prec.names)) + ";")
    for r in spec.rules:
        cond = ""
        if r.condition:
            cond = "cond " + ", ".join(f"{u} = {v}" for u, v in r.condition) + " => "
        text = f"rule {r.label}: {cond}{r.lhs} -> {r.rhs}"
        if r.constraint != TRUE:
            text += f" [ {r.constraint} ]"
        lines.append(text + ";")
    for flag in ASSUMPTIONS:
        if flag in spec.assumptions:
            lines.append(f"assume {flag};")
    for cj in spec.conjectures:
        lines.append(f"conjecture {cj.label}: {_clause_text(cj.clause)};")
    if spec.expect:
        lines.append(f"expect {spec.expect};")
    return "\n".join(lines) + "\n"


def _clause_text(cl: Clause) -> str:
    neg = [l for l in cl.literals if not l.positive]
    pos = [l for l in cl.literals if l.positive]
    body = " \\/ ".join(f"{l.lhs} = {l.rhs}" for l in pos) if pos else "[]"
    if neg:
        body = ", ".join(f"{l.lhs} = {l.rhs}" for l in neg) + " => " + body
    if cl.constraint != TRUE:
        body += f" [ {cl.constraint} ]"
    return body
