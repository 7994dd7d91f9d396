"""Deciding constraints.

``refute`` is a sound unsatisfiability check: every DNF branch is closed by
unification, order reasoning, shape reasoning or grammar reasoning, with a
bounded amount of case splitting on memberships.  ``satisfiable`` adds a
depth-bounded witness search, so a ``Sat`` answer always carries a ground
substitution that the ground evaluator accepts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .constraints import (
    FALSE, TRUE, Clause, ConstraintError, Eq, Formula, Lt, Member, Neq, NotMember, NotShape, Shape,
    conj, conjuncts, dnf, eliminate_eqs, member, negate,
)
from .ordering import Facts, lpo_greater
from .terms import App, Var, apply, match_term, rename_apart, unify, unify_pairs

BRANCH_LIMIT = 6


class Unknown(ConstraintError):
    """Satisfiability was not settled within the configured witness depth."""


@dataclass
class Sat:
    witness: dict = field(default_factory=dict)

    def __bool__(self):
        return True

    def __str__(self):
        return "Sat(" + ", ".join(f"{v}={t}" for v, t in sorted(self.witness.items(), key=lambda i: i[0].name)) + ")"


@dataclass
class Unsat:
    def __bool__(self):
        return False

    def __str__(self):
        return "Unsat"


# ---------------------------------------------------------------- refutation

def refute(ctx, f: Formula, limit: int = BRANCH_LIMIT) -> bool:
    """True when ``f`` has no solution (sound, not complete)."""
    key = f.key()
    cache = ctx.__dict__.setdefault("_refute_cache", {})
    hit = cache.get((key, limit))
    if hit is not None:
        return hit
    branches = dnf(f, ctx.complement)
    ok = all(_refute_conj(ctx, list(b), limit) for b in branches)
    cache[(key, limit)] = ok
    return ok


def _refute_conj(ctx, atoms: list, limit: int) -> bool:
    atoms = _expand_products(ctx, atoms)
    extra = [Eq(a.term, a.inst) for a in atoms if isinstance(a, Member) and not a.nt.is_var]
    r = eliminate_eqs(atoms + extra)
    if r is None:
        return True
    _, rest = r
    rest = _simplify(ctx, rest)
    if rest is None:
        return True
    if _order_unsat(ctx, rest) or _shape_unsat(ctx, rest) or _member_unsat(ctx, rest):
        return True
    for branches, cost in _splits(ctx, rest, limit):
        if cost > limit:
            continue
        if all(_refute_conj(ctx, b, limit - cost) for b in branches):
            return True
        return False
    return False


def _expand_products(ctx, atoms):
    from .grammar import component_memberships

    out = []
    for a in atoms:
        if isinstance(a, Member):
            g = ctx.grammar(a.nt.grammar)
            if a.nt in g.components:
                out.extend(component_memberships(ctx, a.nt, a.term))
                continue
        out.append(a)
    return out


def _simplify(ctx, atoms) -> Optional[list]:
    out = []
    seen = set()
    for a in atoms:
        k = a.key()
        if k in seen:
            continue
        seen.add(k)
        if isinstance(a, Neq):
            if a.s == a.t:
                return None
            if unify(a.s, a.t) is None:
                continue
        if isinstance(a, Lt) and a.s == a.t:
            return None
        if isinstance(a, Member) and not a.nt.red and a.term.sort != a.nt.sort:
            return None
        if not a.vars:
            if not ctx.eval_atom(a):
                return None
            continue
        out.append(a)
    return out


def _order_unsat(ctx, atoms) -> bool:
    lts = [a for a in atoms if isinstance(a, Lt)]
    if not lts:
        return False
    facts = Facts((a.t, a.s) for a in lts)
    if facts.inconsistent():
        return True
    for a in lts:
        if a.s == a.t or lpo_greater(a.s, a.t, ctx.prec, facts):
            return True
        least = ctx.least_term(a.t.sort)
        if least is not None and a.t == least:
            return True
    return False


def _member_unsat(ctx, atoms) -> bool:
    by_term: dict = {}
    negs = set()
    for a in atoms:
        if isinstance(a, Member):
            g = ctx.grammar(a.nt.grammar)
            if not g.is_productive(a.nt):
                return True
            by_term.setdefault(a.term, []).append(a.nt)
        elif isinstance(a, NotMember):
            negs.add((a.term, a.nt))
    for t, nts in by_term.items():
        for n in nts:
            if (t, n) in negs:
                return True
        for n1, n2 in itertools.combinations(set(nts), 2):
            if n1.grammar == n2.grammar and ctx.grammar(n1.grammar).deterministic:
                return True
    return False


# ---------------------------------------------------------------- shapes

def _shape_unsat(ctx, atoms) -> bool:
    shaped = [a for a in atoms if isinstance(a, (Shape, NotShape))]
    if not shaped:
        return False
    uf = _OffsetUnion()
    domains: dict = {}
    defined: set = set()
    for a in atoms:
        if isinstance(a, Member) and isinstance(a.term, Var):
            dom = _nt_shapes(ctx, a.nt)
            domains[a.term] = _meet(domains.get(a.term), dom)
    zero = "0"

    def expr(t, out_eqs):
        """(variable-or-zero, offset) with shape(t) = shape(base) + offset, or None if undefined."""
        if isinstance(t, Var):
            return (t, 0) if t.sort in ctx.shape_sorts else None
        kind = ctx.shape_kind(t.sym.name)
        if kind == "leaf":
            return (zero, 0)
        if kind != "node":
            return None
        subs = [expr(a, out_eqs) for a in t.args]
        if any(s is None for s in subs):
            return None
        for s in subs[1:]:
            out_eqs.append((subs[0], s))
        b, o = subs[0]
        return (b, o + 1)

    def base_vars(e):
        return [e[0]] if isinstance(e[0], Var) else []

    # a membership instance of an always-shaped non-terminal has the member's shape
    links = [Shape(a.term, a.inst) for a in atoms
             if isinstance(a, Member) and not a.nt.red
             and a.term.sort in ctx.shape_sorts and _nt_shapes(ctx, a.nt)[0] is not None
             and not _nt_shapes(ctx, a.nt)[1]]
    for a in shaped + links:
        if isinstance(a, Shape):
            eqs: list = []
            es, et = expr(a.s, eqs), expr(a.t, eqs)
            if es is None or et is None:
                return True
            eqs.append((es, et))
            for (b1, o1), (b2, o2) in eqs:
                if not uf.union(b1, b2, o1 - o2):
                    return True
                defined.update(v for v in (b1, b2) if isinstance(v, Var))
    classes: dict = {}
    for v in list(uf.parent):
        r, o = uf.find(v)
        classes.setdefault(r, []).append((v, o))
    for r, members in classes.items():
        lo, hi = (0, 0) if r == zero else (0, None)
        for v, o in members:
            if v == zero:
                lo, hi = _intersect((lo, hi), (-o, -o))
                continue
            dom = domains.get(v)
            if dom is not None:
                iv = dom[0]
                if iv is None:
                    return True
                lo, hi = _intersect((lo, hi), (iv[0] - o, None if iv[1] is None else iv[1] - o))
            # shape(v) = shape(r) + o >= 0
            lo, hi = _intersect((lo, hi), (-o, None))
            if lo is None:
                return True
        if lo is None:
            return True
    for a in shaped:
        if isinstance(a, NotShape):
            eqs = []
            es, et = expr(a.s, eqs), expr(a.t, eqs)
            if es is None or et is None:
                continue
            (b1, o1), (b2, o2) = es, et
            if not all(_surely_defined(v, defined, domains) for v in (b1, b2)):
                continue
            if not all(_entailed(uf, e1, e2) for e1, e2 in eqs):
                continue
            r1, p1 = uf.find(b1)
            r2, p2 = uf.find(b2)
            if r1 == r2 and p1 + o1 == p2 + o2:
                return True
    return False


def _entailed(uf, e1, e2) -> bool:
    (b1, o1), (b2, o2) = e1, e2
    r1, p1 = uf.find(b1)
    r2, p2 = uf.find(b2)
    return r1 == r2 and p1 + o1 == p2 + o2


def _surely_defined(v, defined, domains) -> bool:
    if not isinstance(v, Var):
        return True
    if v in defined:
        return True
    dom = domains.get(v)
    return dom is not None and not dom[1] and dom[0] is not None


def _intersect(a, b):
    lo1, hi1 = a
    lo2, hi2 = b
    if lo1 is None or lo2 is None:
        return (None, None)
    lo = max(lo1, lo2)
    his = [h for h in (hi1, hi2) if h is not None]
    hi = min(his) if his else None
    if hi is not None and lo > hi:
        return (None, None)
    return (lo, hi)


def _meet(d1, d2):
    if d1 is None:
        return d2
    iv = None
    if d1[0] is not None and d2[0] is not None:
        lo, hi = _intersect(d1[0], d2[0])
        iv = None if lo is None else (lo, hi)
    return (iv, d1[1] and d2[1])


class _OffsetUnion:
    """Union-find where ``find(x) = (root, k)`` means value(x) = value(root) + k."""

    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        if x not in self.parent:
            self.parent[x] = (x, 0)
            return (x, 0)
        p, k = self.parent[x]
        if p == x:
            return (x, 0)
        r, k2 = self.find(p)
        self.parent[x] = (r, k + k2)
        return (r, k + k2)

    def union(self, a, b, delta) -> bool:
        """Record value(b) = value(a) + delta; False on conflict."""
        ra, ka = self.find(a)
        rb, kb = self.find(b)
        if ra == rb:
            return kb - ka == delta
        # value(rb) = value(a) + delta - kb = value(ra) + ka + delta - kb
        if rb == "0":
            self.parent[ra] = (rb, -(ka + delta - kb))
        else:
            self.parent[rb] = (ra, ka + delta - kb)
        return True


def _nt_shapes(ctx, nt):
    """(defined-shape interval or None, may be undefined) for a non-terminal's language."""
    table = ctx.__dict__.setdefault("_shape_table", {})
    if nt in table:
        return table[nt]
    g = ctx.grammar(nt.grammar)
    _compute_shapes(ctx, g, table)
    return table.get(nt, (None, True))


def _compute_shapes(ctx, g, table):
    nts = list(g.nts)
    cur = {n: (None, False) for n in nts}
    bumps = {n: 0 for n in nts}

    def get(n):
        if n.grammar != g.name:
            return _nt_shapes(ctx, n)
        return cur[n]

    for _ in range(60):
        changed = False
        for n in nts:
            iv, und = None, False
            for p in g.productions(n):
                if p.guard == FALSE:
                    continue
                kids = [get(c) for c in p.children]
                kind = ctx.shape_kind(p.sym.name) if p.sym.sort in ctx.shape_sorts else None
                if kind == "leaf":
                    iv = _hull(iv, (0, 0))
                elif kind == "node":
                    meet = (0, None)
                    for k in kids:
                        meet = _intersect(meet, k[0]) if k[0] is not None else (None, None)
                    if meet[0] is not None:
                        iv = _hull(iv, (meet[0] + 1, None if meet[1] is None else meet[1] + 1))
                    if not _guard_forces_shape(p):
                        und = True
                else:
                    und = True
            old = cur[n]
            new = (iv, und)
            if new != old:
                if old[0] is not None and iv is not None and old[0][1] is not None and \
                        (iv[1] is None or iv[1] > old[0][1]):
                    bumps[n] += 1
                    if bumps[n] > 3:
                        new = ((iv[0], None), und)
                cur[n] = new
                changed = True
        if not changed:
            break
    table.update(cur)


def _guard_forces_shape(p) -> bool:
    pats = p.patterns
    branches = dnf(p.guard)
    if not branches:
        return True
    need = {frozenset((a, b)) for a, b in zip(pats, pats[1:])}
    for b in branches:
        have = {frozenset((a.s, a.t)) for a in b if isinstance(a, Shape)}
        if not need <= have:
            return False
    return True


def _hull(a, b):
    if a is None:
        return b
    lo = min(a[0], b[0])
    hi = None if a[1] is None or b[1] is None else max(a[1], b[1])
    return (lo, hi)


# ---------------------------------------------------------------- case splits

def _splits(ctx, atoms, limit):
    """Yield at most one split: (list of branches, cost)."""

    members = [a for a in atoms if isinstance(a, Member)]
    # forced decomposition: a non-trivial term in a non-terminal
    for a in members:
        if isinstance(a.term, App) and not _is_pattern_variant(a):
            yield _decompose(ctx, a, atoms), 0
            return
    for a in members:
        if isinstance(a.term, Var):
            g = ctx.grammar(a.nt.grammar)
            if a.nt in g.unfoldable:
                yield _decompose_var(ctx, a, atoms), 0
                return
    for a in members:
        if isinstance(a.term, Var):
            lang = ctx.grammar(a.nt.grammar).finite_language(a.nt)
            if lang is not None and (a.nt.red or True):
                out = []
                for t in lang:
                    sub = {a.term: t}
                    out.append([x.substitute(sub) for x in atoms if x is not a])
                yield out, 1
                return
    # variants whose variables are constrained elsewhere
    for a in members:
        if isinstance(a.term, App):
            others = set()
            for b in atoms:
                if b is not a:
                    others |= b.vars
            if a.term.vars & others:
                yield _decompose(ctx, a, atoms), 1
                return


def _is_pattern_variant(a: Member) -> bool:
    if a.nt.is_var:
        return False
    m = match_term(a.term, a.nt.pattern) if isinstance(a.term, App) else None
    return m is not None and len(set(m.values())) == len(m) and all(isinstance(v, Var) for v in m.values())


def _decompose(ctx, a: Member, atoms):
    g = ctx.grammar(a.nt.grammar)
    rest = [x for x in atoms if x is not a]
    out = []
    for p in g.productions(a.nt, a.term.sym.name):
        if p.guard == FALSE:
            continue
        p = p.renamed()
        sigma = unify(p.term, a.term)
        if sigma is None:
            continue
        kids = [member(pat, n, pat) for n, pat in zip(p.children, p.patterns)]
        for gb in dnf(p.guard, ctx.complement):
            out.append(rest + [Eq(p.term, a.term)] + kids + list(gb))
    return out


def _decompose_var(ctx, a: Member, atoms):
    g = ctx.grammar(a.nt.grammar)
    rest = [x for x in atoms if x is not a]
    out = []
    for p in g.productions(a.nt):
        if p.guard == FALSE:
            continue
        p = p.renamed()
        kids = [member(pat, n, pat) for n, pat in zip(p.children, p.patterns)]
        for gb in dnf(p.guard, ctx.complement):
            out.append(rest + [Eq(a.term, p.term)] + kids + list(gb))
    return out


# ---------------------------------------------------------------- witnesses

def satisfiable(ctx, f: Formula, max_depth: Optional[int] = None):
    """``Sat(witness)`` or ``Unsat``; raises :class:`Unknown` when undecided."""
    r = decide(ctx, f, max_depth)
    if r is None:
        raise Unknown(f"satisfiability of {f} undecided up to depth {max_depth or ctx.witness_depth}")
    return r


def decide(ctx, f: Formula, max_depth: Optional[int] = None):
    """Tri-state: Sat, Unsat, or None."""
    if f == TRUE:
        return Sat({})
    if refute(ctx, f):
        return Unsat()
    w = find_witness(ctx, f, max_depth)
    return None if w is None else Sat(w)


def find_witness(ctx, f: Formula, max_depth: Optional[int] = None,
                 variables: Optional[Sequence[Var]] = None) -> Optional[dict]:
    """A depth-minimal ground solution of ``f``'s free variables, or None."""
    max_depth = ctx.witness_depth if max_depth is None else max_depth
    branches = dnf(f, ctx.complement)
    best = None
    for b in branches:
        w = _branch_witness(ctx, list(b), max_depth, variables)
        if w is not None:
            key = (max((t.depth for t in w.values()), default=0), sorted(str(t) for t in w.values()))
            if best is None or key < best[0]:
                best = (key, w)
    return None if best is None else best[1]


def _primary_vars(atoms, variables):
    linked = set()
    for a in atoms:
        if isinstance(a, Member) and not a.nt.is_var:
            linked |= a.inst.vars - a.term.vars
    order = []
    for a in atoms:
        for v in sorted(a.vars, key=lambda v: v.name):
            if v not in linked and v not in order:
                order.append(v)
    for v in variables or ():
        if v not in order and v not in linked:
            order.append(v)
    return order, linked


def _branch_witness(ctx, atoms, max_depth, variables):
    primary, linked = _primary_vars(atoms, variables)
    domains = {}
    for v in primary:
        nts = [a.nt for a in atoms if isinstance(a, Member) and a.term == v]
        domains[v] = nts
    members = [a for a in atoms if isinstance(a, Member) and not a.nt.is_var]
    plain = [a for a in atoms if not (isinstance(a, Member) and not a.nt.is_var)]

    def pool(v, d):
        nts = domains[v]
        if nts:
            n = nts[0]
            g = ctx.grammar(n.grammar)
            return [t for t in g.enumerate(n, d) if t.sort == v.sort]
        return ctx.sig.ground_terms(v.sort, d)

    for d in range(max_depth + 1):
        pools = [pool(v, d) for v in primary]
        if not all(pools) and primary:
            continue
        for combo in itertools.product(*pools):
            if d and primary and max(t.depth for t in combo) < d:
                continue
            sigma = dict(zip(primary, combo))
            ok = _check(ctx, sigma, members, plain)
            if ok is not None:
                return {v: t for v, t in ok.items() if v not in linked}
        if not primary:
            break
    return None


def _check(ctx, sigma, members, plain):
    sigma = dict(sigma)
    pending = list(members)
    while pending:
        progress = False
        for a in list(pending):
            t = apply(a.term, sigma)
            if not t.is_ground:
                continue
            pending.remove(a)
            progress = True
            inst = apply(a.inst, sigma)
            th = match_term(inst, t) if inst.vars else ({} if inst == t else None)
            if th is None:
                return None
            sigma.update(th)
            if not ctx.grammar(a.nt.grammar).contains(t, a.nt):
                return None
        if not progress:
            return None
    for a in plain:
        g = a.substitute(sigma)
        if g.vars or not ctx.eval_atom(g):
            return None
    return sigma


# ---------------------------------------------------------------- clauses

def is_tautology(cl: Clause) -> bool:
    eqs = [a for a in conjuncts(cl.constraint) if isinstance(a, Eq)]
    sigma = unify_pairs([(a.s, a.t) for a in eqs]) if eqs else {}
    if sigma is None:
        return False
    for l in cl.literals:
        if l.positive and apply(l.lhs, sigma) == apply(l.rhs, sigma):
            return True
    return False


def _match_literal(gl, sl, sigma):
    if gl.positive != sl.positive:
        return []
    out = []
    for a, b in ((sl.lhs, sl.rhs), (sl.rhs, sl.lhs)):
        th = match_term(gl.lhs, a, dict(sigma))
        if th is not None:
            th = match_term(gl.rhs, b, th)
            if th is not None:
                out.append(th)
    return out


def literal_matchers(general: Clause, specific: Clause):
    """Substitutions mapping general's literals into a sub-multiset of specific's."""

    def go(i, used, sigma):
        if i == len(general.literals):
            yield sigma
            return
        gl = general.literals[i]
        for j, sl in enumerate(specific.literals):
            if j in used:
                continue
            for th in _match_literal(gl, sl, sigma):
                yield from go(i + 1, used | {j}, th)

    yield from go(0, frozenset(), {})


def subsumes(ctx, general: Clause, specific: Clause) -> bool:
    shared = general.all_vars & specific.all_vars
    if shared:
        ren = {v: rename_apart(v)[0] for v in general.all_vars}
        general = general.substitute(ren)
    seen = set()
    for sigma in literal_matchers(general, specific):
        key = frozenset(sigma.items())
        if key in seen:
            continue
        seen.add(key)
        c = general.constraint.substitute(sigma)
        if c == TRUE or specific.constraint == FALSE:
            return True
        try:
            neg = negate(c, specific.all_vars, ctx.complement)
        except ConstraintError:
            continue
        if refute(ctx, conj(specific.constraint, neg)):
            return True
    return False
