"""Brute-force ground semantics used as an independent reference in tests.

Nothing here calls the solver, the grammar module or the library's ordering;
only the term and formula data classes are shared.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from ctgind.constraints import (
    FALSE, TRUE, And, Eq, Lt, Member, Neq, Not, NotMember, NotShape, Or, Shape,
)
from ctgind.terms import App, Var

# powerlist shapes: v(_) is a leaf, tie(_, _) a node
LEAF, NODE = {"v"}, {"tie"}


def gmatch(p, t, sigma=None):
    sigma = {} if sigma is None else sigma
    if isinstance(p, Var):
        if p in sigma:
            return sigma if sigma[p] == t else None
        sigma[p] = t
        return sigma
    if isinstance(t, Var) or p.sym != t.sym:
        return None
    for a, b in zip(p.args, t.args):
        if gmatch(a, b, sigma) is None:
            return None
    return sigma


def subst(t, sigma):
    if isinstance(t, Var):
        return sigma.get(t, t)
    return App(t.sym, [subst(a, sigma) for a in t.args])


def all_subterms(t):
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from all_subterms(a)


def _constructor(t):
    return isinstance(t, App) and t.sym.constructor and all(_constructor(a) for a in t.args)


class Oracle:
    def __init__(self, spec):
        self.spec = spec
        self.sig = spec.sig
        self.rank = {n: i for i, n in enumerate(spec.prec.names)}
        self.rc = [r for r in spec.rules if r.lhs.sym.constructor]
        self.rules = list(spec.rules)
        self.nts = [n for n in spec.nf.nts if not n.red]
        self.gt = lru_cache(maxsize=None)(self._gt)

    # ordering: textbook LPO on ground terms
    def _gt(self, s, t):
        if s == t:
            return False
        if any(a == t or self.gt(a, t) for a in s.args):
            return True
        f, g = s.sym.name, t.sym.name
        if self.rank[f] > self.rank[g]:
            return all(self.gt(s, b) for b in t.args)
        if f == g:
            for a, b in zip(s.args, t.args):
                if a != b:
                    return self.gt(a, b) and all(self.gt(s, c) for c in t.args)
        return False

    def shape(self, t):
        if t.sym.name in LEAF:
            return 0
        if t.sym.name in NODE:
            hs = {self.shape(a) for a in t.args}
            if len(hs) == 1 and None not in hs:
                return hs.pop() + 1
        return None

    # reducibility and normal-form languages
    def root_redex(self, t) -> bool:
        for r in self.rc:
            s = gmatch(r.lhs, t)
            if s is not None and self.holds(r.constraint, s):
                return True
        return False

    def reducible(self, t) -> bool:
        return any(self.root_redex(u) for u in all_subterms(t))

    def irreducible(self, sort, depth) -> set:
        return set(self._levels(depth)[sort])

    @lru_cache(maxsize=None)
    def _levels(self, depth):
        if depth < 0:
            return {s: frozenset() for s in self.sig.sorts}
        prev = self._levels(depth - 1)
        out = {s: set(prev[s]) for s in self.sig.sorts}
        for f in self.sig.constructors():
            for args in itertools.product(*(prev[s] for s in f.arg_sorts)):
                t = App(f, args)
                if not self.root_redex(t):
                    out[f.sort].add(t)
        return {s: frozenset(v) for s, v in out.items()}

    def ground(self, sort, depth) -> list:
        """Every ground constructor term of the sort up to the depth, reducible or not."""
        levels = [{s: [] for s in self.sig.sorts}]
        for f in self.sig.constructors():
            if not f.arg_sorts:
                levels[0][f.sort].append(App(f, ()))
        for d in range(1, depth + 1):
            cur = {s: list(v) for s, v in levels[-1].items()}
            for f in self.sig.constructors():
                if f.arg_sorts:
                    for args in itertools.product(*(levels[-1][s] for s in f.arg_sorts)):
                        t = App(f, args)
                        if t.depth == d:
                            cur[f.sort].append(t)
            levels.append(cur)
        return levels[-1][sort]

    def in_nt(self, t, nt) -> bool:
        if nt.red:
            return self.reducible(t)
        if t.sort != nt.sort or self.reducible(t) or gmatch(nt.pattern, t) is None:
            return False
        for q in self.nts:
            if q == nt or q.sort != nt.sort:
                continue
            finer = gmatch(nt.pattern, q.pattern) is not None and gmatch(q.pattern, nt.pattern) is None
            if finer and gmatch(q.pattern, t) is not None:
                return False
        return True

    def language(self, nt, depth) -> set:
        sorts = self.sig.sorts if nt.red else [nt.sort]
        if nt.red:
            return {t for s in sorts for t in self.ground(s, depth) if self.reducible(t)}
        return {t for t in self.irreducible(nt.sort, depth) if self.in_nt(t, nt)}

    # ground formula evaluation
    def holds(self, f, sigma) -> bool:
        if f == TRUE:
            return True
        if f == FALSE:
            return False
        if isinstance(f, And):
            # memberships first: they pin down the instance variables the rest may mention
            items = sorted(f.items, key=lambda g: not isinstance(g, Member))
            bound = self._bind(items, sigma)
            return all(self.holds(g, bound) for g in items)
        if isinstance(f, Or):
            return any(self.holds(g, sigma) for g in f.items)
        if isinstance(f, Not):
            return not self.holds(f.item, sigma)
        if isinstance(f, Member):
            t = subst(f.term, sigma)
            return gmatch(f.inst, t, dict(sigma)) is not None and self.in_nt(t, f.nt)
        if isinstance(f, NotMember):
            return not self.in_nt(subst(f.term, sigma), f.nt)
        s, t = subst(f.s, sigma), subst(f.t, sigma)
        if isinstance(f, Eq):
            return s == t
        if isinstance(f, Neq):
            return s != t
        if isinstance(f, Lt):
            return self.gt(t, s)
        if isinstance(f, (Shape, NotShape)):
            hs, ht = self.shape(s), self.shape(t)
            same = hs is not None and hs == ht
            return same if isinstance(f, Shape) else not same
        raise TypeError(f"no ground meaning for {f!r}")

    @staticmethod
    def _bind(items, sigma):
        """Extend sigma by the instance variables that memberships of a conjunction pin down."""
        sigma = dict(sigma)
        for m in items:
            if isinstance(m, Member) and not m.nt.red:
                t = subst(m.term, sigma)
                if not t.vars:
                    sigma = gmatch(subst(m.inst, sigma), t, dict(sigma)) or sigma
        return sigma

    # ground normalisation: any rewrite order, all normal forms
    def normal_forms(self, t, limit=5000) -> set:
        seen, todo, out = {t}, [t], set()
        while todo:
            cur = todo.pop()
            succ = list(self._one_step(cur))
            if not succ:
                out.add(cur)
            for u in succ:
                if u not in seen:
                    seen.add(u)
                    todo.append(u)
            if len(seen) > limit:
                raise RuntimeError("reduct explosion")
        return out

    def _one_step(self, t, path=()):
        for r in self.rules:
            s = gmatch(r.lhs, t)
            if s is None or r.condition:
                continue
            # constraints speak about constructor terms only
            if r.constraint != TRUE and not (all(_constructor(u) for u in s.values()) and self.holds(r.constraint, s)):
                continue
            yield subst(r.rhs, s)
        if isinstance(t, App):
            for i, a in enumerate(t.args):
                for b in self._one_step(a):
                    args = list(t.args)
                    args[i] = b
                    yield App(t.sym, args)

    def instances(self, variables, depth, constraint=TRUE):
        """Substitutions mapping the variables to normal forms that satisfy the constraint."""
        vs = sorted(variables, key=lambda v: v.name)
        pools = [sorted(self.irreducible(v.sort, depth), key=str) for v in vs]
        for combo in itertools.product(*pools):
            sigma = dict(zip(vs, combo))
            if self.holds(constraint, sigma):
                yield sigma
