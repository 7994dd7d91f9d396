"""Conditional constrained rewrite rules and ground normalisation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .constraints import (
    TRUE, Clause, ConstraintError, Formula, conj, disj, member, negate, negate_atom,
)
from .terms import (
    App, Term, Var, apply, fresh_renaming, match_term, replace_at, subterms_innermost,
)


class RewriteError(Exception):
    pass


class BudgetExceeded(RewriteError):
    pass


class PreconditionViolated(RewriteError):
    pass


@dataclass(frozen=True)
class Rule:
    lhs: App
    rhs: Term
    constraint: Formula = TRUE
    condition: tuple = ()
    label: str = ""

    @property
    def trivial_constraint(self) -> bool:
        return self.constraint == TRUE

    @property
    def is_constructor(self) -> bool:
        return self.lhs.sym.constructor

    @property
    def vars(self) -> frozenset:
        vs = self.lhs.vars | self.rhs.vars | self.constraint.vars
        for u, v in self.condition:
            vs |= u.vars | v.vars
        return vs

    def renamed(self) -> "Rule":
        return self.substitute(fresh_renaming(self.vars))

    def substitute(self, sigma) -> "Rule":
        return Rule(apply(self.lhs, sigma), apply(self.rhs, sigma), self.constraint.substitute(sigma),
                    tuple((apply(u, sigma), apply(v, sigma)) for u, v in self.condition), self.label)

    def __str__(self):
        text = f"{self.lhs} -> {self.rhs}"
        if self.condition:
            text = ", ".join(f"{u} = {v}" for u, v in self.condition) + " => " + text
        if self.constraint != TRUE:
            text += f" [ {self.constraint} ]"
        return text


class RuleSet:
    def __init__(self, rules: Iterable[Rule] = ()):
        self.rules = list(rules)
        self._by_head: dict = {}
        for r in self.rules:
            self._by_head.setdefault(r.lhs.sym.name, []).append(r)

    @property
    def constructor_rules(self) -> list[Rule]:
        return [r for r in self.rules if r.is_constructor]

    @property
    def defined_rules(self) -> list[Rule]:
        return [r for r in self.rules if not r.is_constructor]

    def with_head(self, name: str) -> list[Rule]:
        return self._by_head.get(name, [])

    def depth(self) -> int:
        return max((r.lhs.depth for r in self.rules), default=0)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)


# ---------------------------------------------------------------- ground semantics

def constraint_holds(ctx, c: Formula, sigma: dict) -> bool:
    """Ground truth of ``c sigma``; linked membership instances are resolved by matching."""
    g = c.substitute(sigma)
    if not g.vars:
        return ctx.eval(g)
    from .solver import find_witness

    return find_witness(ctx, g, 0) is not None


def redexes(ctx, t: Term, rules: RuleSet, join=None):
    """Ground redexes of t in leftmost-innermost order: (position, rule, matcher)."""
    for p, u in subterms_innermost(t):
        if isinstance(u, Var):
            continue
        for r in rules.with_head(u.sym.name):
            sigma = match_term(r.lhs, u)
            if sigma is None:
                continue
            if r.constraint != TRUE and not constraint_holds(ctx, r.constraint, sigma):
                continue
            if r.condition:
                if join is None:
                    continue
                if not all(join(apply(a, sigma), apply(b, sigma)) for a, b in r.condition):
                    continue
            yield p, r, sigma


class Normalizer:
    """Leftmost-innermost ground normalisation with a step budget."""

    def __init__(self, ctx, rules: RuleSet, budget: int = 10_000):
        self.ctx = ctx
        self.rules = rules
        self.budget = budget
        self._memo: dict = {}

    def join(self, a: Term, b: Term) -> bool:
        return self.normalize(a) == self.normalize(b)

    def normalize(self, t: Term) -> Term:
        if t in self._memo:
            return self._memo[t]
        steps = 0
        cur = t
        while True:
            if cur in self._memo:
                cur = self._memo[cur]
                break
            step = next(redexes(self.ctx, cur, self.rules, self.join), None)
            if step is None:
                break
            p, r, sigma = step
            cur = replace_at(cur, p, apply(r.rhs, sigma))
            steps += 1
            if steps > self.budget:
                raise BudgetExceeded(f"no normal form of {t} within {self.budget} steps")
        self._memo[t] = cur
        return cur


def normalize_ground(ctx, t: Term, rules: RuleSet, budget: int = 10_000) -> Term:
    if not t.is_ground:
        raise RewriteError(f"{t} is not ground")
    return Normalizer(ctx, rules, budget).normalize(t)


def all_normal_forms(ctx, t: Term, rules: RuleSet, limit: int = 2_000) -> set:
    """Normal forms reachable by any rewrite path (conditions judged by innermost normalisation)."""
    norm = Normalizer(ctx, rules)
    seen = {t}
    frontier = [t]
    out = set()
    while frontier:
        cur = frontier.pop()
        succ = [replace_at(cur, p, apply(r.rhs, s)) for p, r, s in redexes(ctx, cur, rules, norm.join)]
        if not succ:
            out.add(cur)
        for u in succ:
            if u not in seen:
                seen.add(u)
                frontier.append(u)
                if len(seen) > limit:
                    raise BudgetExceeded(f"too many reducts of {t}")
    return out


def joinability_probe(ctx, rules: RuleSet, depth: int = 2) -> Optional[tuple]:
    """A ground defined-rooted term with two distinct normal forms, or None.

    Arguments range over all constructor terms up to ``depth`` (normal or not),
    which is where constructor rules and defined rules can disagree.
    """
    sig = ctx.sig
    for f in sig.defined():
        pools = [sig.ground_terms(s, depth) for s in f.arg_sorts]
        for args in itertools.product(*pools):
            t = App(f, args)
            try:
                nfs = all_normal_forms(ctx, t, rules)
            except BudgetExceeded:
                continue
            if len(nfs) > 1:
                return t, sorted(nfs, key=str)
    return None


# ---------------------------------------------------------------- open terms

def matches(t: Term, rules: Iterable[Rule]):
    """All (position, renamed rule, matcher) with ``t|p = l sigma``, innermost-leftmost."""
    for p, u in subterms_innermost(t):
        if isinstance(u, Var):
            continue
        for r in rules:
            if r.lhs.sym != u.sym:
                continue
            r2 = r.renamed()
            sigma = match_term(r2.lhs, u)
            if sigma is not None:
                yield p, r2, sigma


def step_applies(ctx, d: Formula, rule: Rule, sigma: dict, free) -> bool:
    """``d and not c sigma`` is unsatisfiable."""
    from .solver import refute

    c = rule.constraint.substitute(sigma)
    if c == TRUE:
        return True
    try:
        neg = negate(c, free, ctx.complement)
    except ConstraintError:
        return False
    return refute(ctx, conj(d, neg))


def rewrite_step(ctx, subject, rules: RuleSet, constraint: Formula = TRUE, join=None) -> list:
    """One-step constrained rewrites of a term or clause (unconditional or ground-joinable conditions)."""
    if isinstance(subject, Clause):
        out = []
        for i, lit in enumerate(subject.literals):
            for side in (0, 1):
                t = lit.sides()[side]
                for u in rewrite_step(ctx, t, rules, subject.constraint, join):
                    lits = list(subject.literals)
                    lits[i] = lit.replace(side, u)
                    out.append(Clause(tuple(lits), subject.constraint))
        return out
    free = subject.vars | constraint.vars
    out = []
    for p, r, sigma in matches(subject, rules):
        if r.condition:
            if join is None:
                continue
            gs = [(apply(a, sigma), apply(b, sigma)) for a, b in r.condition]
            if not all(a.is_ground and b.is_ground and join(a, b) for a, b in gs):
                continue
        if step_applies(ctx, constraint, r, sigma, free):
            out.append(replace_at(subject, p, apply(r.rhs, sigma)))
    return out


# ---------------------------------------------------------------- reducibility

class Reducibility(Enum):
    REDUCIBLE = "GroundReducible"
    IRREDUCIBLE = "GroundIrreducible"
    MIXED = "Mixed"


def constructor_parts(cl: Clause) -> list[Term]:
    """Maximal constructor subterms of the clause sides (variables excluded)."""
    out = []

    def walk(t):
        if isinstance(t, Var):
            return
        if t.sym.constructor:
            if t not in out:
                out.append(t)
            return
        for a in t.args:
            walk(a)

    for l in cl.literals:
        for t in l.sides():
            walk(t)
    return out


def ground_reducibility(ctx, cl: Clause) -> Reducibility:
    from .solver import refute

    red = ctx.nf.red
    parts = constructor_parts(cl)
    var_parts = [v for v in cl.vars]
    terms = parts + [v for v in var_parts if not any(v in p.vars for p in parts)]
    irreducible = conj(cl.constraint, *(disj(*(member(t, n) for n in ctx.nf.complement(red)
                                              if n.sort == t.sort)) for t in terms))
    reducible = conj(cl.constraint, disj(*(member(t, red) for t in terms)))
    if not terms or refute(ctx, reducible):
        return Reducibility.IRREDUCIBLE
    if refute(ctx, irreducible):
        return Reducibility.REDUCIBLE
    return Reducibility.MIXED


def valid_ground_irreducible(ctx, cl: Clause) -> bool:
    from .solver import refute

    if not cl.is_constructor():
        raise PreconditionViolated("validity check needs a constructor clause")
    if ground_reducibility(ctx, cl) is not Reducibility.IRREDUCIBLE:
        raise PreconditionViolated("validity check needs a ground irreducible clause")
    neg = conj(*(negate_atom(l.atom()) for l in cl.literals))
    return refute(ctx, conj(cl.constraint, neg))
