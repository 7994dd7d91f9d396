"""Lexicographic path ordering and its extensions to multisets and clauses."""

from __future__ import annotations

from collections import Counter
from enum import Enum
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .terms import Term, Var


class Order(Enum):
    GREATER = ">"
    LESS = "<"
    EQUIVALENT = "="
    INCOMPARABLE = "?"


class Precedence:
    """A strict total order on symbol names; larger rank means greater."""

    def __init__(self, names_low_to_high: Sequence[str]):
        self.names = tuple(names_low_to_high)
        self.rank = {n: i for i, n in enumerate(self.names)}

    @classmethod
    def from_declarations(cls, declared: Sequence[str], chains: Iterable[Sequence[str]] = ()):
        """Declaration order, later symbols greater.

        Each chain ``a > b > c`` re-sorts the listed symbols among the slots
        they already occupy, leaving every other symbol in place.
        """
        order = list(declared)
        for chain in chains:
            chain = [c for c in chain if c in order]
            slots = sorted(order.index(c) for c in chain)
            for slot, name in zip(slots, reversed(chain)):
                order[slot] = name
        return cls(order)

    def greater(self, f: str, g: str) -> bool:
        return self.rank[f] > self.rank[g]

    def __eq__(self, other):
        return isinstance(other, Precedence) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return "Precedence(" + " < ".join(self.names) + ")"


class Facts:
    """Known strict relations ``a > b`` between (possibly open) terms.

    Used to compare terms under a constraint: the relations are taken from
    the constraint's ordering atoms and closed transitively.
    """

    __slots__ = ("pairs", "_hash")

    def __init__(self, pairs: Iterable[tuple[Term, Term]] = ()):
        closed = set(pairs)
        changed = True
        while changed:
            changed = False
            for a, b in list(closed):
                for c, d in list(closed):
                    if b == c and (a, d) not in closed:
                        closed.add((a, d))
                        changed = True
        self.pairs = frozenset(closed)
        self._hash = hash(self.pairs)

    def __bool__(self):
        return bool(self.pairs)

    def __eq__(self, other):
        return isinstance(other, Facts) and self.pairs == other.pairs

    def __hash__(self):
        return self._hash

    def gt(self, a: Term, b: Term) -> bool:
        return (a, b) in self.pairs

    def inconsistent(self) -> bool:
        return any(a == b for a, b in self.pairs)


NO_FACTS = Facts()


@lru_cache(maxsize=200_000)
def _gt(s: Term, t: Term, prec: Precedence, facts: Facts) -> bool:
    if s == t:
        return False
    if facts.pairs and facts.gt(s, t):
        return True
    if isinstance(s, Var):
        return False
    if any(_ge(a, t, prec, facts) for a in s.args):
        return True
    if isinstance(t, Var):
        return False
    f, g = s.sym.name, t.sym.name
    if f == g:
        for a, b in zip(s.args, t.args):
            if a != b:
                if not _gt(a, b, prec, facts):
                    return False
                break
        else:
            return False
        return all(_gt(s, b, prec, facts) for b in t.args)
    if prec.greater(f, g):
        return all(_gt(s, b, prec, facts) for b in t.args)
    return False


def _ge(s: Term, t: Term, prec: Precedence, facts: Facts) -> bool:
    return s == t or _gt(s, t, prec, facts)


def lpo_greater(s: Term, t: Term, prec: Precedence, facts: Optional[Facts] = None) -> bool:
    return _gt(s, t, prec, facts or NO_FACTS)


def lpo_compare(s: Term, t: Term, prec: Precedence, facts: Optional[Facts] = None) -> Order:
    facts = facts or NO_FACTS
    if s == t:
        return Order.EQUIVALENT
    if _gt(s, t, prec, facts):
        return Order.GREATER
    if _gt(t, s, prec, facts):
        return Order.LESS
    return Order.INCOMPARABLE


def multiset_greater(m: Iterable, n: Iterable, gt) -> bool:
    """Dershowitz-Manna extension of the strict order ``gt`` (equality is syntactic)."""
    cm, cn = Counter(m), Counter(n)
    left = cm - cn
    right = cn - cm
    if not left:
        return False
    return all(any(gt(a, b) for a in left) for b in right)


def term_multiset_greater(m: Iterable[Term], n: Iterable[Term], prec: Precedence,
                          facts: Optional[Facts] = None) -> bool:
    facts = facts or NO_FACTS
    return multiset_greater(list(m), list(n), lambda a, b: _gt(a, b, prec, facts))


# ---------------------------------------------------------------- clauses

def literal_multiset(lit) -> tuple:
    return tuple(sorted((lit.lhs, lit.rhs), key=str))


def clause_literal_multiset(clause) -> list[tuple]:
    return [literal_multiset(l) for l in clause.literals]


def literals_greater(c1, c2, prec: Precedence, facts: Optional[Facts] = None) -> bool:
    facts = facts or NO_FACTS

    def lit_gt(a, b):
        return term_multiset_greater(a, b, prec, facts)

    return multiset_greater(clause_literal_multiset(c1), clause_literal_multiset(c2), lit_gt)


def missing_constraint_count(clause, rc_rules, occurs) -> int:
    """Distinct instantiated R_C constraints over subterms of the clause not already in it.

    ``occurs(formula)`` decides whether an instantiated constraint (or its
    negation) is already a subformula of the clause constraint.
    """
    from .terms import match_term, subterms, symbols_of

    seen = set()
    for lit in clause.literals:
        for side in (lit.lhs, lit.rhs):
            for _, u in subterms(side):
                if isinstance(u, Var) or not all(f.constructor for f in symbols_of(u)):
                    continue
                for rule in rc_rules:
                    if rule.trivial_constraint:
                        continue
                    sigma = match_term(rule.lhs, u)
                    if sigma is None:
                        continue
                    d = rule.constraint.substitute(sigma)
                    if not d.vars <= u.vars:
                        continue
                    key = d.key()
                    if key not in seen and not occurs(d):
                        seen.add(key)
    return len(seen)


def clause_complexity(clause, rc_rules, occurs) -> tuple:
    return (clause_literal_multiset(clause), missing_constraint_count(clause, rc_rules, occurs))


def clause_greater(c1, c2, rc_rules=(), prec: Precedence = None, facts: Optional[Facts] = None,
                   occurs1=None, occurs2=None) -> bool:
    """Lexicographic comparison of (literal multiset, missing-constraint count)."""
    if literals_greater(c1, c2, prec, facts):
        return True
    if Counter(clause_literal_multiset(c1)) != Counter(clause_literal_multiset(c2)):
        return False
    occurs1 = occurs1 or c1.constraint_occurs
    occurs2 = occurs2 or c2.constraint_occurs
    return missing_constraint_count(c1, rc_rules, occurs1) > missing_constraint_count(c2, rc_rules, occurs2)
