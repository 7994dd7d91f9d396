"""Constrained tree grammars.

A production ``<v> := f(<u1>, ..., <un>) || c`` is stored with an explicit
instance ``pi`` of each child pattern; the guard ``c`` talks about the
variables of those instances.  Children may live in another grammar (the
ground-instance grammars route variables to the normal-form grammar), so
every lookup goes through the shared :class:`~ctgind.context.Context`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

from .constraints import (
    FALSE, TRUE, Atom, Formula, Lt, Member, Neq, NonTerminal, UnknownNonTerminal, conj, conjuncts, disj,
    dnf, eliminate_eqs, from_dnf, member, negate,
)
from .terms import (
    App, FunctionSymbol, Term, Var, apply, canonical, canonical_renaming, fresh_var, match_term,
    mgi, rename_apart, subterms, term_key, unify, var_occurrences,
)


class GrammarError(Exception):
    pass


class NoMembershipAtom(GrammarError):
    pass


class ShapeViolation(GrammarError):
    pass


class EmptinessUnknown(GrammarError):
    pass


@dataclass(frozen=True)
class Production:
    lhs: NonTerminal
    sym: FunctionSymbol
    children: tuple
    patterns: tuple
    guard: Formula = TRUE

    @property
    def term(self) -> App:
        return App(self.sym, self.patterns)

    def renamed(self) -> "Production":
        vs = set().union(*(p.vars for p in self.patterns)) if self.patterns else set()
        vs |= self.guard.vars
        if not vs:
            return self
        ren = {v: fresh_var(v.sort, v.name) for v in sorted(vs, key=lambda v: v.name)}
        return Production(self.lhs, self.sym, self.children,
                          tuple(apply(p, ren) for p in self.patterns), self.guard.substitute(ren))

    def render(self) -> str:
        ren = canonical_renaming(self.patterns)
        kids = []
        for n, p in zip(self.children, self.patterns):
            q = apply(p, ren)
            if n.is_var:
                kids.append(f"<{q}:{'Red' if n.red else n.sort}>" if n.grammar == "nf" else f"{n.label()}[{q}]")
            else:
                kids.append(n.label(q))
        rhs = self.sym.name + (f"({', '.join(kids)})" if kids else "")
        guard = self.guard.substitute(ren)
        text = f"{self.lhs.label()} := {rhs}"
        if guard != TRUE:
            text += f" || {guard}"
        return text


@dataclass
class Emptiness:
    empty: bool
    witness: Optional[Term] = None

    def __bool__(self):
        return self.empty

    def __str__(self):
        return "Empty" if self.empty else f"NonEmpty({self.witness})"


class Grammar:
    def __init__(self, name: str, ctx, deterministic: bool = False, complete: bool = False):
        self.name = name
        self.ctx = ctx
        self.deterministic = deterministic
        self.complete = complete
        self.nts: list[NonTerminal] = []
        self.prods: dict[NonTerminal, list[Production]] = {}
        self.red: Optional[NonTerminal] = None
        self.unfoldable: set = set()
        self.components: dict = {}
        self._lang: dict = {}
        self._contains: dict = {}
        self._productive: Optional[set] = None
        self._finite: dict = {}

    # construction

    def add_nt(self, nt: NonTerminal) -> None:
        if nt not in self.prods:
            self.nts.append(nt)
            self.prods[nt] = []

    def add(self, p: Production) -> None:
        self.add_nt(p.lhs)
        self.prods[p.lhs].append(p)
        self._productive = None

    # lookup

    def productions(self, nt: NonTerminal, head: Optional[str] = None) -> list[Production]:
        if nt.grammar != self.name:
            return self.ctx.grammar(nt.grammar).productions(nt, head)
        if nt not in self.prods:
            raise UnknownNonTerminal(f"{nt} is not a non-terminal of grammar {self.name}")
        ps = self.prods[nt]
        return ps if head is None else [p for p in ps if p.sym.name == head]

    def nonterminals(self, sort: Optional[str] = None, include_red: bool = True) -> list[NonTerminal]:
        return [
            n for n in self.nts
            if (include_red or not n.red) and (sort is None or n.sort == sort)
        ]

    def lookup(self, pattern: Term) -> NonTerminal:
        key = _pattern_key(pattern)
        for n in self.nts:
            if n.key == key:
                return n
        raise UnknownNonTerminal(f"no non-terminal <{pattern}> in grammar {self.name}")

    def complement(self, nt: NonTerminal) -> Optional[list[NonTerminal]]:
        """Non-terminals whose languages partition the rest of the sort, or None."""
        if not (self.complete and self.deterministic) or nt.grammar != self.name:
            return None
        if nt.red:
            return [n for n in self.nts if not n.red]
        others = [n for n in self.nts if n != nt and not n.red and n.sort == nt.sort]
        if self.red is not None:
            others.append(self.red)
        return others

    def grammar_of(self, nt: NonTerminal) -> "Grammar":
        return self if nt.grammar == self.name else self.ctx.grammar(nt.grammar)

    # syntactic analyses

    def productive(self) -> set:
        if self._productive is None:
            alive: set = set()
            changed = True
            while changed:
                changed = False
                for nt in self.nts:
                    if nt in alive:
                        continue
                    for p in self.prods[nt]:
                        if p.guard != FALSE and all(self._alive(c, alive) for c in p.children):
                            alive.add(nt)
                            changed = True
                            break
            self._productive = alive
        return self._productive

    def _alive(self, nt: NonTerminal, alive: set) -> bool:
        if nt.grammar == self.name:
            return nt in alive
        return nt in self.ctx.grammar(nt.grammar).productive()

    def is_productive(self, nt: NonTerminal) -> bool:
        return nt in self.grammar_of(nt).productive()

    def finite_language(self, nt: NonTerminal, limit: int = 6) -> Optional[list[Term]]:
        """The whole language when it is finite and small, else None."""
        g = self.grammar_of(nt)
        if g is not self:
            return g.finite_language(nt, limit)
        if nt in self._finite:
            return self._finite[nt]
        result = None
        if self._acyclic_from(nt):
            terms = self.enumerate(nt, len(self.nts) + 2)
            if len(terms) <= limit:
                result = terms
        self._finite[nt] = result
        return result

    def _acyclic_from(self, start: NonTerminal) -> bool:
        state: dict = {}

        def visit(n):
            g = self.grammar_of(n)
            st = state.get(n)
            if st == 1:
                return False
            if st == 2:
                return True
            state[n] = 1
            for p in g.productions(n):
                if p.guard == FALSE:
                    continue
                for c in p.children:
                    if not visit(c):
                        return False
            state[n] = 2
            return True

        return visit(start)

    # ground semantics

    def contains(self, t: Term, nt: NonTerminal) -> bool:
        g = self.grammar_of(nt)
        if g is not self:
            return g.contains(t, nt)
        key = (t, nt)
        hit = self._contains.get(key)
        if hit is not None:
            return hit
        ok = False
        if isinstance(t, App) and (nt.red or t.sort == nt.sort):
            for p in self.productions(nt, t.sym.name):
                theta = match_term(p.term, t)
                if theta is None:
                    continue
                if all(self.contains(a, c) for a, c in zip(t.args, p.children)) and \
                        self.ctx.eval(p.guard.substitute(theta)):
                    ok = True
                    break
        self._contains[key] = ok
        return ok

    def enumerate(self, nt: NonTerminal, max_depth: int, sort: Optional[str] = None) -> list[Term]:
        """All terms of depth at most ``max_depth`` generated from ``nt``, in canonical order."""
        g = self.grammar_of(nt)
        if g is not self:
            return g.enumerate(nt, max_depth, sort)
        out = self._upto(nt, max_depth)
        if sort is not None:
            out = [t for t in out if t.sort == sort]
        return out

    def _upto(self, nt: NonTerminal, d: int) -> list[Term]:
        key = (nt, d)
        hit = self._lang.get(key)
        if hit is not None:
            return hit
        found = set()
        for p in self.prods.get(nt, ()):
            if p.guard == FALSE:
                continue
            if not p.children:
                if self.ctx.eval(p.guard):
                    found.add(p.term)
                continue
            if d == 0:
                continue
            pools = []
            for c, s in zip(p.children, p.sym.arg_sorts):
                pool = [t for t in self.grammar_of(c)._upto(c, d - 1) if t.sort == s]
                pools.append(pool)
            if not all(pools):
                continue
            pats = p.patterns
            simple_guard = p.guard == TRUE
            for combo in itertools.product(*pools):
                theta: dict = {}
                ok = True
                for pat, t in zip(pats, combo):
                    if isinstance(pat, Var):
                        theta[pat] = t
                        continue
                    th = match_term(pat, t, theta)
                    if th is None:
                        ok = False
                        break
                    theta = th
                if not ok:
                    continue
                if simple_guard or self.ctx.eval(p.guard.substitute(theta)):
                    found.add(App(p.sym, combo))
        out = sorted(found, key=term_key)
        self._lang[key] = out
        return out

    # output

    def dump(self) -> str:
        lines = ["nonterminals " + " ".join(n.label() for n in self.nts)]
        for n in self.nts:
            for p in self.prods[n]:
                lines.append(p.render())
        return "\n".join(lines)


def _pattern_key(pattern: Term) -> str:
    c = canonical(pattern)
    if isinstance(c, Var):
        return f"x^{c.sort}"
    return str(c)


def _nt(grammar: str, pattern: Term) -> NonTerminal:
    c = canonical(pattern)
    return NonTerminal(grammar, _pattern_key(c), c)


# ---------------------------------------------------------------- guard simplification

def _syntactically_unsat(atoms: Sequence[Atom]) -> bool:
    r = eliminate_eqs(atoms)
    if r is None:
        return True
    _, rest = r
    lts = set()
    for a in rest:
        if isinstance(a, Neq) and a.s == a.t:
            return True
        if isinstance(a, Lt):
            if a.s == a.t or (a.t, a.s) in lts:
                return True
            lts.add((a.s, a.t))
    return False


def simplify_guard(f: Formula) -> Formula:
    """Drop syntactically contradictory branches and disequalities implied by an order atom."""
    branches = []
    for k in dnf(f):
        if _syntactically_unsat(k):
            continue
        ordered = {frozenset((a.s, a.t)) for a in k if isinstance(a, Lt)}
        k = tuple(a for a in k if not (isinstance(a, Neq) and frozenset((a.s, a.t)) in ordered))
        branches.append(k)
    return from_dnf(branches)


# ---------------------------------------------------------------- normal-form grammar

RED_KEY = "Red"


def build_nf_grammar(ctx, rc_rules: Sequence, name: str = "nf") -> Grammar:
    """The grammar of R_C-normal forms plus the non-terminal <Red> of reducible terms."""
    sig = ctx.sig
    for r in rc_rules:
        for a in r.constraint.atoms():
            if type(a).__name__ not in ("Eq", "Neq", "Lt", "Shape", "NotShape"):
                from .constraints import UnsupportedConstraint

                raise UnsupportedConstraint(f"constructor rule constraint atom {a} is not supported")
    seeds: list[Term] = []
    for r in rc_rules:
        l = r.lhs
        strict = [u for p, u in subterms(l) if p]
        if r.trivial_constraint:
            seeds.append(l)
            seeds.extend(strict)
        else:
            seeds.extend(strict)
            if all(isinstance(a, Var) for a in l.args):
                seeds.append(l)
    patterns: dict = {}
    for s in sig.sorts:
        v = Var("x", s)
        patterns[_pattern_key(v)] = canonical(v)
    for u in seeds:
        patterns.setdefault(_pattern_key(u), canonical(u))
    changed = True
    while changed:
        changed = False
        items = [p for p in patterns.values() if isinstance(p, App)]
        for p, q in itertools.combinations(items, 2):
            if p.sort != q.sort:
                continue
            m = mgi([p, q])
            if m is not None and _pattern_key(m) not in patterns:
                patterns[_pattern_key(m)] = m
                changed = True

    def order(p):
        return (sig.sorts.index(p.sort), 0 if isinstance(p, Var) else 1, term_key(p))

    g = Grammar(name, ctx, deterministic=True, complete=True)
    ctx.register(g)
    q_nts = [_nt(name, p) for p in sorted(patterns.values(), key=order)]
    red = NonTerminal(name, RED_KEY, Var("x", "Red"), red=True)
    for n in q_nts:
        g.add_nt(n)
    g.add_nt(red)
    g.red = red
    by_sort: dict = {}
    for n in q_nts:
        by_sort.setdefault(n.sort, []).append(n)

    for f in sig.constructors():
        choices = [by_sort.get(s, []) for s in f.arg_sorts]
        for combo in itertools.product(*choices):
            pats = tuple(rename_apart(n.pattern)[0] for n in combo)
            term = App(f, pats)
            parts = []
            for r in rc_rules:
                lhs, ren = rename_apart(r.lhs)
                theta = match_term(lhs, term)
                if theta is None:
                    continue
                parts.append(r.constraint.substitute(ren).substitute(theta))
            c = disj(*parts)
            matching = [n.pattern for n in q_nts if n.sort == f.sort and match_term(n.pattern, term) is not None]
            target = _nt(name, mgi(matching)) if matching else _nt(name, Var("x", f.sort))
            if target not in g.prods:
                raise GrammarError(f"normal-form construction produced an unknown target {target}")
            nf_guard = simplify_guard(negate(c))
            red_guard = simplify_guard(c)
            if nf_guard != FALSE:
                g.add(Production(target, f, combo, pats, nf_guard))
            if red_guard != FALSE:
                g.add(Production(red, f, combo, pats, red_guard))
        red_choices = [by_sort.get(s, []) + [red] for s in f.arg_sorts]
        for combo in itertools.product(*red_choices):
            if red not in combo:
                continue
            pats = tuple(
                fresh_var(s, "r") if n.red else rename_apart(n.pattern)[0]
                for n, s in zip(combo, f.arg_sorts)
            )
            g.add(Production(red, f, combo, pats, TRUE))
    _trim(g)
    return g


def _trim(g: Grammar) -> None:
    alive = g.productive()
    g.nts = [n for n in g.nts if n in alive or n.red]
    keep = set(g.nts)
    g.prods = {
        n: [p for p in g.prods[n] if all(c in keep for c in p.children)]
        for n in g.nts
    }
    g._productive = None


# ---------------------------------------------------------------- production relation

@dataclass(frozen=True)
class ConstrainedTerm:
    term: Term
    constraint: Formula = TRUE

    def __str__(self):
        if self.constraint == TRUE:
            return str(self.term)
        return f"{self.term} || {self.constraint}"


def membership_of(constraint: Formula, v: Var) -> Optional[Member]:
    for a in conjuncts(constraint):
        if isinstance(a, Member) and a.term == v:
            return a
    return None


def produce_substitutions(ctx, constraint: Formula, v: Var):
    """One ``(substitution, new constraint)`` per production of v's non-terminal."""
    m = membership_of(constraint, v)
    if m is None:
        raise NoMembershipAtom(f"variable {v} carries no membership atom")
    g = ctx.grammar(m.nt.grammar)
    others = [a for a in conjuncts(constraint) if a != m]
    out = []
    for p in g.productions(m.nt):
        if p.guard == FALSE:
            continue
        p = p.renamed()
        ys, kids = [], []
        for n, pat in zip(p.children, p.patterns):
            y = pat if isinstance(pat, Var) else fresh_var(n.sort, "y")
            ys.append(y)
            kids.append(member(y, n, pat))
        image = App(p.sym, ys)
        link = {} if m.nt.is_var else unify(m.inst, image)
        if link is None:
            continue
        theta = {**link, v: image}
        c = conj(*(k.substitute(theta) for k in kids), p.guard.substitute(theta),
                 *(a.substitute(theta) for a in others))
        out.append((theta, c))
    return out


def produce_step(ctx, ct: ConstrainedTerm, v: Var) -> list[ConstrainedTerm]:
    return [
        ConstrainedTerm(apply(ct.term, theta), c)
        for theta, c in produce_substitutions(ctx, ct.constraint, v)
    ]


def var_depths(cl) -> dict:
    """Deepest occurrence depth of each variable in the clause's literals."""
    out: dict = {}

    def walk(t, d):
        if isinstance(t, Var):
            out[t] = max(out.get(t, 0), d)
            return
        for a in t.args:
            walk(a, d + 1)

    for l in cl.literals:
        for t in l.sides():
            walk(t, 0)
    return out


def expand_clause(ctx, cl, max_delta: int, include_zero: bool = True, sorts=None,
                  allowed=None, drop_unsat: bool = True) -> list:
    """Maximal production derivatives of a decorated clause within a depth budget.

    Returns ``(clause, substitution)`` pairs.  A variable is expanded only
    when every production of its non-terminal keeps the clause within
    ``d(cl) + max_delta``.  ``sorts`` limits expansion to variables of those
    sorts and ``allowed(clause, var)`` can restrict it further.
    """
    from .solver import refute

    limit = cl.depth + max_delta
    done = []
    work = [(cl, {}, 0)]
    while work:
        c, theta, steps = work.pop(0)
        v, m = _expandable(ctx, c, limit, sorts, allowed)
        if v is None:
            if steps or include_zero:
                done.append((c, theta))
            continue
        for sub, new_c in produce_substitutions(ctx, c.constraint, v):
            lits = tuple(l.substitute(sub) for l in c.literals)
            nxt = type(c)(lits, new_c)
            composed = {k: apply(t, sub) for k, t in theta.items()}
            for k, t in sub.items():
                composed.setdefault(k, t)
            work.append((nxt, composed, steps + 1))
    if drop_unsat:
        done = [(c, th) for c, th in done if not refute(ctx, c.constraint)]
    return done


def _expandable(ctx, cl, limit, sorts, allowed):
    depths = var_depths(cl)
    order = []
    for l in cl.literals:
        for t in l.sides():
            for v in var_occurrences(t):
                if v not in order:
                    order.append(v)
    for v in order:
        if sorts is not None and v.sort not in sorts:
            continue
        m = membership_of(cl.constraint, v)
        if m is None:
            continue
        if allowed is not None and not allowed(cl, v):
            continue
        prods = [p for p in ctx.grammar(m.nt.grammar).productions(m.nt) if p.guard != FALSE]
        if not prods:
            continue
        grows = any(p.children for p in prods)
        if depths[v] + (1 if grows else 0) <= limit:
            return v, m
    return None, None


# ---------------------------------------------------------------- decoration

def decorate(ctx, clause, grammar: Optional[Grammar] = None) -> list:
    """All sort-compatible assignments of normal-form non-terminals to the clause variables."""
    g = grammar or ctx.nf
    seen = set(a.term for a in conjuncts(clause.constraint) if isinstance(a, Member) and isinstance(a.term, Var))
    order = []
    for l in clause.literals:
        for t in l.sides():
            for v in var_occurrences(t):
                if v not in order and v not in seen:
                    order.append(v)
    choices = [g.nonterminals(v.sort, include_red=False) for v in order]
    out = []
    for combo in itertools.product(*choices):
        atoms = [member(v, n) for v, n in zip(order, combo)]
        out.append(clause.with_constraint(conj(clause.constraint, *atoms)))
    return out


# ---------------------------------------------------------------- ground-instance grammars

_gcount = itertools.count(1)


def ground_instances_grammar(ctx, t: Term, c: Formula) -> tuple[Grammar, NonTerminal]:
    from .terms import is_linear

    if not is_linear(t):
        raise ShapeViolation(f"{t} is not linear")
    deco: dict = {}
    guard_parts = []
    for a in conjuncts(c):
        if isinstance(a, Member):
            if not isinstance(a.term, Var) or a.term not in t.vars:
                raise ShapeViolation(f"membership {a} is not on a variable of {t}")
            if a.term in deco:
                raise ShapeViolation(f"variable {a.term} is decorated twice")
            if not a.nt.is_var and canonical(a.inst) != canonical(a.nt.pattern):
                raise ShapeViolation(f"membership instance {a.inst} is not a renaming of {a.nt.pattern}")
            deco[a.term] = a
        else:
            if any(isinstance(x, Member) for x in a.atoms()):
                raise ShapeViolation("memberships must be top-level conjuncts")
            guard_parts.append(a)
    d = conj(*guard_parts)
    name = f"g{next(_gcount)}"
    g = Grammar(name, ctx)
    ctx.register(g)
    nf = ctx.nf

    def options(x: Var):
        if x in deco:
            a = deco[x]
            return [(a.nt, a.inst)]
        return [(n, rename_apart(n.pattern)[0] if not n.is_var else fresh_var(x.sort, "z"))
                for n in nf.nonterminals(x.sort, include_red=True)]

    def build(u: Term, path: str, root: bool) -> NonTerminal:
        nt = NonTerminal(name, path or "root", u)
        g.add_nt(nt)
        g.unfoldable.add(nt)
        if isinstance(u, Var):
            for n, inst in options(u):
                for p in nf.grammar_of(n).productions(n):
                    p = p.renamed()
                    link = unify(inst, p.term) if not n.is_var else {}
                    if link is None:
                        continue
                    theta = {**link, u: p.term}
                    extra = d.substitute(theta) if root else TRUE
                    g.add(Production(nt, p.sym, p.children, p.patterns, conj(p.guard, extra)))
            return nt
        child_opts = []
        for i, a in enumerate(u.args, 1):
            if isinstance(a, Var):
                child_opts.append([(n, inst, {a: inst}) for n, inst in options(a)])
            else:
                child_opts.append([(build(a, f"{path}.{i}" if path else str(i), False), a, {})])
        for combo in itertools.product(*child_opts):
            theta = {}
            for _, _, th in combo:
                theta.update(th)
            kids = tuple(n for n, _, _ in combo)
            pats = tuple(apply(p, theta) for _, p, _ in combo)
            guard = d.substitute(theta) if root else TRUE
            g.add(Production(nt, u.sym, kids, pats, guard))
        return nt

    root = build(t, "", True)
    return g, root


# ---------------------------------------------------------------- intersection

def intersect(ctx, g1: Grammar, n1: NonTerminal, g2: Grammar, n2: NonTerminal) -> tuple[Grammar, NonTerminal]:
    name = f"p{next(_gcount)}"
    g = Grammar(name, ctx, deterministic=g1.deterministic and g2.deterministic and g1.name == g2.name)
    ctx.register(g)
    made: dict = {}

    def pair(a: NonTerminal, b: NonTerminal) -> NonTerminal:
        k = (a, b)
        if k in made:
            return made[k]
        if a.red:
            pat = b.pattern
        elif b.red:
            pat = a.pattern
        else:
            pat = mgi([a.pattern, b.pattern]) if a.sort == b.sort else None
        if pat is None:
            pat = a.pattern
        nt = NonTerminal(name, f"{a.grammar}:{a.key}&{b.grammar}:{b.key}", pat)
        made[k] = nt
        g.add_nt(nt)
        g.components[nt] = (a, b)
        ga, gb = ctx.grammar(a.grammar), ctx.grammar(b.grammar)
        for p in ga.productions(a):
            for q in gb.productions(b, p.sym.name):
                p2, q2 = p.renamed(), q.renamed()
                sigma = unify(p2.term, q2.term)
                if sigma is None:
                    continue
                kids = tuple(pair(x, y) for x, y in zip(p2.children, q2.children))
                pats = tuple(apply(x, sigma) for x in p2.patterns)
                guard = conj(p2.guard.substitute(sigma), q2.guard.substitute(sigma))
                if guard == FALSE:
                    continue
                g.add(Production(nt, p.sym, kids, pats, guard))
        return nt

    root = pair(n1, n2)
    return g, root


def component_memberships(ctx, nt: NonTerminal, t: Term) -> list:
    """Membership atoms equivalent to ``t : nt``, splitting product non-terminals."""
    g = ctx.grammar(nt.grammar)
    if nt in g.components:
        a, b = g.components[nt]
        return component_memberships(ctx, a, t) + component_memberships(ctx, b, t)
    return [member(t, nt)]


# ---------------------------------------------------------------- emptiness

def is_empty(ctx, g: Grammar, nt: NonTerminal, max_depth: Optional[int] = None) -> Emptiness:
    from .solver import refute

    max_depth = ctx.witness_depth + 2 if max_depth is None else max_depth
    if not g.is_productive(nt):
        return Emptiness(True)
    sorts = ctx.sig.sorts if nt.sort == "Red" else [nt.sort]
    refuted = True
    for s in sorts:
        y = fresh_var(s, "y")
        if not refute(ctx, conj(*component_memberships(ctx, nt, y))):
            refuted = False
            break
    if refuted:
        return Emptiness(True)
    for d in range(max_depth + 1):
        ts = g.enumerate(nt, d)
        if ts:
            return Emptiness(False, min(ts, key=term_key))
    raise EmptinessUnknown(f"emptiness of {nt} undecided up to depth {max_depth}")


def enumerate_language(ctx, g: Grammar, nt: NonTerminal, max_depth: int) -> list[Term]:
    return g.enumerate(nt, max_depth)
