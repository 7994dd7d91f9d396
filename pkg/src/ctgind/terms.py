"""Many-sorted first-order terms.

Terms are immutable and hash-consed lightly (hash cached on construction).
Substitutions are plain dicts mapping ``Var`` to ``Term``; every operation
here returns fresh dicts and never mutates its inputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union


class TermError(Exception):
    pass


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    arg_sorts: tuple[str, ...]
    sort: str
    constructor: bool = True

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)

    def __str__(self) -> str:
        return self.name


class Var:
    __slots__ = ("name", "sort", "_hash")

    def __init__(self, name: str, sort: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "sort", sort)
        object.__setattr__(self, "_hash", hash(("V", name, sort)))

    def __setattr__(self, key, value):
        raise AttributeError("Var is immutable")

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Var) and self.name == other.name and self.sort == other.sort
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r}, {self.sort!r})"

    def __str__(self):
        return self.name

    def __reduce__(self):
        return (Var, (self.name, self.sort))

    depth = 0
    size = 1

    @property
    def vars(self) -> frozenset:
        return frozenset((self,))

    @property
    def is_ground(self) -> bool:
        return False


class App:
    __slots__ = ("sym", "args", "_hash", "depth", "size", "_vars")

    def __init__(self, sym: FunctionSymbol, args: Sequence["Term"] = ()):
        args = tuple(args)
        if len(args) != sym.arity:
            raise TermError(f"{sym.name} expects {sym.arity} arguments, got {len(args)}")
        for a, s in zip(args, sym.arg_sorts):
            if a_sort(a) != s:
                raise TermError(f"ill-sorted argument {a} for {sym.name}: expected {s}")
        object.__setattr__(self, "sym", sym)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "_hash", hash((sym.name, args)))
        object.__setattr__(self, "depth", 1 + max(a.depth for a in args) if args else 0)
        object.__setattr__(self, "size", 1 + sum(a.size for a in args))
        object.__setattr__(self, "_vars", None)

    def __setattr__(self, key, value):
        raise AttributeError("App is immutable")

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, App)
            and self._hash == other._hash
            and self.sym == other.sym
            and self.args == other.args
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"App({self.sym.name!r}, {self.args!r})"

    def __str__(self):
        if not self.args:
            return self.sym.name
        return f"{self.sym.name}({', '.join(str(a) for a in self.args)})"

    def __reduce__(self):
        return (App, (self.sym, self.args))

    @property
    def vars(self) -> frozenset:
        if self._vars is None:
            vs = frozenset().union(*(a.vars for a in self.args)) if self.args else frozenset()
            object.__setattr__(self, "_vars", vs)
        return self._vars

    @property
    def is_ground(self) -> bool:
        return not self.vars

    @property
    def sort(self) -> str:
        return self.sym.sort


Term = Union[Var, App]
Substitution = dict
Position = tuple


def a_sort(t: Term) -> str:
    return t.sort


def compact(t: Term) -> str:
    """Space-free rendering, used in counterexample lines."""
    if isinstance(t, Var) or not t.args:
        return str(t) if isinstance(t, Var) else t.sym.name
    return f"{t.sym.name}({','.join(compact(a) for a in t.args)})"


# ---------------------------------------------------------------- fresh names

_counter = itertools.count(1)


def fresh_var(sort: str, base: str = "v") -> Var:
    base = base.split("#")[0]
    return Var(f"{base}#{next(_counter)}", sort)


def rename_apart(t: Term, base: Optional[str] = None) -> tuple[Term, dict]:
    ren = {v: fresh_var(v.sort, base or v.name) for v in sorted(t.vars, key=_var_key)}
    return apply(t, ren), ren


def fresh_renaming(vs: Iterable[Var]) -> dict:
    return {v: fresh_var(v.sort, v.name) for v in sorted(set(vs), key=_var_key)}


def _var_key(v: Var):
    return (v.name, v.sort)


# ---------------------------------------------------------------- positions

def positions(t: Term) -> list[Position]:
    out = [()]
    if isinstance(t, App):
        for i, a in enumerate(t.args, 1):
            out.extend((i,) + p for p in positions(a))
    return out


def subterm_at(t: Term, p: Position) -> Term:
    for i in p:
        if not isinstance(t, App) or not 1 <= i <= len(t.args):
            raise TermError(f"invalid position {p}")
        t = t.args[i - 1]
    return t


def replace_at(t: Term, p: Position, s: Term) -> Term:
    if not p:
        return s
    if not isinstance(t, App):
        raise TermError(f"invalid position {p}")
    i = p[0]
    args = list(t.args)
    args[i - 1] = replace_at(args[i - 1], p[1:], s)
    return App(t.sym, args)


def subterms(t: Term) -> Iterator[tuple[Position, Term]]:
    """Pre-order traversal yielding ``(position, subterm)``."""
    stack = [((), t)]
    while stack:
        p, u = stack.pop()
        yield p, u
        if isinstance(u, App):
            for i in range(len(u.args), 0, -1):
                stack.append((p + (i,), u.args[i - 1]))


def subterms_innermost(t: Term) -> list[tuple[Position, Term]]:
    """Post-order (leftmost-innermost first)."""
    out = []

    def walk(p, u):
        if isinstance(u, App):
            for i, a in enumerate(u.args, 1):
                walk(p + (i,), a)
        out.append((p, u))

    walk((), t)
    return out


def var_occurrences(t: Term) -> list[Var]:
    """Variables in left-to-right order, with repetitions."""
    if isinstance(t, Var):
        return [t]
    out = []
    for a in t.args:
        out.extend(var_occurrences(a))
    return out


def is_linear(t: Term) -> bool:
    occ = var_occurrences(t)
    return len(occ) == len(set(occ))


def symbols_of(t: Term) -> set:
    if isinstance(t, Var):
        return set()
    out = {t.sym}
    for a in t.args:
        out |= symbols_of(a)
    return out


# ---------------------------------------------------------------- substitutions

def apply(t: Term, sigma: Mapping) -> Term:
    if not sigma:
        return t
    if isinstance(t, Var):
        return sigma.get(t, t)
    if t.is_ground:
        return t
    return App(t.sym, [apply(a, sigma) for a in t.args])


apply_substitution = apply


def compose(sigma: Mapping, tau: Mapping) -> dict:
    """The substitution x -> (x sigma) tau."""
    out = {v: apply(t, tau) for v, t in sigma.items()}
    for v, t in tau.items():
        out.setdefault(v, t)
    return {v: t for v, t in out.items() if t != v}


def match_term(pattern: Term, subject: Term, sigma: Optional[dict] = None) -> Optional[dict]:
    sigma = dict(sigma) if sigma else {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if isinstance(p, Var):
            if p.sort != s.sort:
                return None
            bound = sigma.get(p)
            if bound is None:
                sigma[p] = s
            elif bound != s:
                return None
        elif isinstance(s, App) and s.sym == p.sym:
            stack.extend(zip(p.args, s.args))
        else:
            return None
    return sigma


def _walk(t: Term, sigma: dict) -> Term:
    while isinstance(t, Var) and t in sigma:
        t = sigma[t]
    return t


def _occurs(v: Var, t: Term, sigma: dict) -> bool:
    t = _walk(t, sigma)
    if isinstance(t, Var):
        return t == v
    return any(_occurs(v, a, sigma) for a in t.args)


def unify_pairs(pairs: Iterable[tuple[Term, Term]], sigma: Optional[Mapping] = None) -> Optional[dict]:
    """Idempotent mgu of a list of equations; left variables are bound first."""
    tri = dict(sigma) if sigma else {}
    stack = list(pairs)
    stack.reverse()
    while stack:
        s, t = stack.pop()
        s, t = _walk(s, tri), _walk(t, tri)
        if s == t:
            continue
        if s.sort != t.sort:
            return None
        if isinstance(s, Var):
            if _occurs(s, t, tri):
                return None
            tri[s] = t
        elif isinstance(t, Var):
            if _occurs(t, s, tri):
                return None
            tri[t] = s
        elif s.sym != t.sym:
            return None
        else:
            stack.extend(reversed(list(zip(s.args, t.args))))
    return _resolve(tri)


def _resolve(tri: dict) -> dict:
    out = {}

    def full(t):
        if isinstance(t, Var):
            if t in tri:
                r = full(tri[t])
                return r
            return t
        if t.is_ground:
            return t
        return App(t.sym, [full(a) for a in t.args])

    for v in tri:
        r = full(v)
        if r != v:
            out[v] = r
    return out


def unify(s: Term, t: Term, sigma: Optional[Mapping] = None) -> Optional[dict]:
    return unify_pairs([(s, t)], sigma)


def mgi(terms: Sequence[Term]) -> Optional[Term]:
    """Most general common instance, canonically renamed."""
    if not terms:
        raise TermError("mgi of an empty list")
    renamed = [rename_apart(t)[0] for t in terms]
    pairs = [(renamed[0], u) for u in renamed[1:]]
    sigma = unify_pairs(pairs)
    if sigma is None:
        return None
    return canonical(apply(renamed[0], sigma))


# ---------------------------------------------------------------- canonical forms

def canonical_renaming(terms: Iterable[Term], prefix: str = "x") -> dict:
    ren: dict = {}
    for t in terms:
        for v in var_occurrences(t):
            if v not in ren:
                ren[v] = Var(f"{prefix}{len(ren) + 1}", v.sort)
    return ren


def canonical(t: Term, prefix: str = "x") -> Term:
    return apply(t, canonical_renaming([t], prefix))


def variant(s: Term, t: Term) -> bool:
    return canonical(s) == canonical(t)


def term_key(t: Term):
    """Deterministic total order used for tie-breaking: depth, size, text."""
    return (t.depth, t.size, str(t))


def rule_depth(lhss: Iterable[Term]) -> int:
    return max((l.depth for l in lhss), default=0)


# ---------------------------------------------------------------- signatures

@dataclass
class Signature:
    sorts: list[str] = field(default_factory=list)
    symbols: dict[str, FunctionSymbol] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)  # declaration order of symbols

    def add_sort(self, name: str) -> None:
        if name in self.sorts:
            raise TermError(f"duplicate sort {name}")
        self.sorts.append(name)

    def add_symbol(self, sym: FunctionSymbol) -> None:
        if sym.name in self.symbols:
            raise TermError(f"duplicate symbol {sym.name}")
        for s in (*sym.arg_sorts, sym.sort):
            if s not in self.sorts:
                raise TermError(f"unknown sort {s} in profile of {sym.name}")
        self.symbols[sym.name] = sym
        self.order.append(sym.name)

    def __getitem__(self, name: str) -> FunctionSymbol:
        return self.symbols[name]

    def constructors(self, sort: Optional[str] = None) -> list[FunctionSymbol]:
        return [
            self.symbols[n]
            for n in self.order
            if self.symbols[n].constructor and (sort is None or self.symbols[n].sort == sort)
        ]

    def defined(self) -> list[FunctionSymbol]:
        return [self.symbols[n] for n in self.order if not self.symbols[n].constructor]

    def app(self, name: str, *args: Term) -> App:
        return App(self.symbols[name], args)

    def uninhabited_sorts(self) -> list[str]:
        inhabited: set = set()
        changed = True
        while changed:
            changed = False
            for f in self.constructors():
                if f.sort not in inhabited and all(s in inhabited for s in f.arg_sorts):
                    inhabited.add(f.sort)
                    changed = True
        return [s for s in self.sorts if s not in inhabited]

    def ground_terms(self, sort: str, max_depth: int) -> list[Term]:
        """All ground constructor terms of the sort up to the depth, by depth."""
        levels = _ground_levels(self, max_depth)
        return [t for d in range(max_depth + 1) for t in levels[d].get(sort, [])]

    def smallest_ground(self, sort: str) -> Term:
        for d in range(0, 8):
            ts = self.ground_terms(sort, d)
            if ts:
                return min(ts, key=term_key)
        raise TermError(f"sort {sort} is not inhabited")


def _ground_levels(sig: Signature, max_depth: int) -> list[dict]:
    """levels[d][sort] = constructor terms of depth exactly d."""
    levels: list[dict] = []
    upto: dict = {}
    for d in range(max_depth + 1):
        cur: dict = {}
        for f in sig.constructors():
            if d == 0:
                if f.arity == 0:
                    cur.setdefault(f.sort, []).append(App(f))
                continue
            pools = [upto.get(s, []) for s in f.arg_sorts]
            exact = [set(levels[d - 1].get(s, [])) for s in f.arg_sorts]
            for combo in itertools.product(*pools):
                if any(c in ex for c, ex in zip(combo, exact)):
                    cur.setdefault(f.sort, []).append(App(f, combo))
        levels.append(cur)
        for s, ts in cur.items():
            upto.setdefault(s, []).extend(ts)
    return levels
