"""Implicit induction: simplification, narrowing, derivations and traces."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .constraints import (
    TRUE, Clause, ConstraintError, Formula, Literal, Lt, Not, conj, conjuncts, disj, negate,
    negate_atom, render_clause,
)
from .grammar import decorate, expand_clause
from .ordering import Facts, clause_greater, lpo_greater
from .rewriting import (
    BudgetExceeded, PreconditionViolated, Reducibility, Rule, RuleSet, ground_reducibility,
    joinability_probe, normalize_ground, step_applies, valid_ground_irreducible,
)
from .solver import find_witness, is_tautology, refute, subsumes
from .terms import (
    App, Var, apply, fresh_renaming, match_term, replace_at, subterms, subterms_innermost, symbols_of,
)

PROVED = "Proved"
DISPROVED = "Disproved"
OUT_OF_BUDGET = "OutOfBudget"


@dataclass
class Options:
    budget: int = 500
    induction_vars: bool = False
    max_rec_depth: int = 2
    sub_budget: int = 60
    cex_depth: int = 3


@dataclass(frozen=True)
class Step:
    n: int
    rule: str
    clause: str
    results: tuple = ()
    labels: tuple = ()

    def render(self) -> str:
        text = f"STEP {self.n} {self.rule} {self.clause} => {', '.join(self.results) or '-'}"
        if self.labels:
            text += f" [{', '.join(self.labels)}]"
        return text


@dataclass
class ProverState:
    E: deque = field(default_factory=deque)
    H: list = field(default_factory=list)
    clauses: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)
    ancestor: dict = field(default_factory=dict)
    origin: dict = field(default_factory=dict)
    root: dict = field(default_factory=dict)
    steps: int = 0
    bottom: Optional[str] = None
    hyp_uses: list = field(default_factory=list)

    def add(self, cl: Clause, parent: Optional[str] = None, theta: Optional[dict] = None,
            ancestor: Optional[str] = None) -> str:
        cid = f"C{len(self.clauses) + 1}"
        self.clauses[cid] = cl
        if parent is not None:
            self.root[cid] = self.root[parent]
            base = self.origin[parent]
            self.origin[cid] = {v: apply(t, theta) for v, t in base.items()} if theta else base
            self.ancestor[cid] = ancestor if ancestor is not None else self.ancestor.get(parent)
        return cid

    def record(self, rule: str, cid: str, results=(), labels=()) -> None:
        self.trace.append(Step(len(self.trace) + 1, rule, cid, tuple(results), tuple(labels)))


@dataclass
class Outcome:
    status: str
    state: ProverState
    assumptions: tuple = ()
    culprit: Optional[Clause] = None
    counterexample: Optional[dict] = None
    note: str = ""

    @property
    def trace(self) -> list:
        return self.state.trace

    @property
    def proved(self) -> bool:
        return self.status == PROVED

    def render_trace(self) -> str:
        lines = ["# assume " + (", ".join(self.assumptions) or "nothing")]
        lines += [s.render() for s in self.state.trace]
        lines.append("CLAUSES")
        for cid, cl in self.state.clauses.items():
            lines.append(f"{cid}: {render_clause(cl, canonical=True)}")
        return "\n".join(lines)

    def canonical_clauses(self) -> set:
        return {render_clause(cl, canonical=True) for cl in self.state.clauses.values()}


@dataclass
class Applied:
    rule: str
    results: list
    labels: tuple = ()


def facts_of(c: Formula) -> Facts:
    return Facts((a.t, a.s) for a in conjuncts(c) if isinstance(a, Lt))


def occurs_in(c: Formula):
    """Does a formula or its negation already appear as a conjunct of c?"""
    keys = {a.key() for a in conjuncts(c)}

    def occ(d: Formula) -> bool:
        if d.key() in keys or Not(d).key() in keys:
            return True
        try:
            return negate_atom(d).key() in keys
        except (ConstraintError, TypeError, AttributeError):
            return False

    return occ


def _at(t, p):
    for i in p:
        if isinstance(t, Var) or i > len(t.args):
            return None
        t = t.args[i - 1]
    return t


def _constructor_term(t) -> bool:
    return all(f.constructor for f in symbols_of(t))


def _sites(cl: Clause):
    """(literal index, side, position, subterm), literal by literal, innermost-leftmost."""
    for i, lit in enumerate(cl.literals):
        for side, t in enumerate(lit.sides()):
            for p, u in subterms_innermost(t):
                if not isinstance(u, Var):
                    yield i, side, p, u


def _replace(cl: Clause, i: int, side: int, p, new) -> Clause:
    lits = list(cl.literals)
    lits[i] = lits[i].replace(side, replace_at(lits[i].sides()[side], p, new))
    return Clause(tuple(lits), cl.constraint)


def _rule_clause(r: Rule) -> Clause:
    lits = tuple(Literal(u, v, False) for u, v in r.condition) + (Literal(r.lhs, r.rhs, True),)
    return Clause(lits, r.constraint)


def holds_ground(ctx, cl: Clause, rules: RuleSet) -> bool:
    """Truth of a ground clause under innermost normalisation."""
    for l in cl.literals:
        same = normalize_ground(ctx, l.lhs, rules) == normalize_ground(ctx, l.rhs, rules)
        if same == l.positive:
            return True
    return False


class Prover:
    def __init__(self, spec, options: Optional[Options] = None, depth: int = 0):
        self.spec = spec
        self.ctx = spec.ctx
        self.prec = spec.prec
        self.options = options or Options()
        self.depth = depth
        self.rules = spec.rules
        self.rc = RuleSet(spec.rules.constructor_rules)
        self.rd = RuleSet(spec.rules.defined_rules)
        self.d_r = spec.rules.depth()
        self.assumptions = tuple(sorted(spec.assumptions))
        self.inductive_sorts = self._inductive_sorts()
        self.axioms = [_rule_clause(r) for r in spec.rules]

    def _inductive_sorts(self) -> set:
        out = set()
        for r in self.rd:
            for a in r.lhs.args:
                for _, u in subterms_innermost(a):
                    if not isinstance(u, Var):
                        out.add(u.sort)
        return out

    # ------------------------------------------------------------ ordering helpers

    def greater(self, c1: Clause, c2: Clause) -> bool:
        return clause_greater(c1, c2, self.rc.rules, self.prec, facts_of(c1.constraint),
                              occurs_in(c1.constraint), occurs_in(c2.constraint))

    def _entails(self, c: Formula, d: Formula, free) -> bool:
        if d == TRUE:
            return True
        try:
            neg = negate(d, free, self.ctx.complement)
        except ConstraintError:
            return False
        return refute(self.ctx, conj(c, neg))

    # ------------------------------------------------------------ simplification for constructors

    def simplify_constructor(self, cl: Clause) -> Optional[Applied]:
        ctx = self.ctx
        if is_tautology(cl) or refute(ctx, cl.constraint):
            return Applied("Deletion", [])
        done = self._rc_rewrite(cl)
        if done is not None:
            return done
        done = self._partial_split(cl)
        if done is not None:
            return done
        if cl.is_constructor():
            try:
                if ground_reducibility(ctx, cl) is Reducibility.IRREDUCIBLE and valid_ground_irreducible(ctx, cl):
                    return Applied("Validity", [])
            except PreconditionViolated:
                pass
        return None

    def _rc_candidates(self, cl: Clause):
        for i, side, p, u in _sites(cl):
            if not u.sym.constructor or not _constructor_term(u):
                continue
            for r in self.rc.with_head(u.sym.name):
                r2 = r.renamed()
                sigma = match_term(r2.lhs, u)
                if sigma is not None:
                    yield i, side, p, u, r2, sigma

    def _rc_rewrite(self, cl: Clause) -> Optional[Applied]:
        cur, used = cl, []
        facts = facts_of(cl.constraint)
        while len(used) < 200:
            for i, side, p, u, r, sigma in self._rc_candidates(cur):
                rhs = apply(r.rhs, sigma)
                if not lpo_greater(u, rhs, self.prec, facts):
                    continue
                if step_applies(self.ctx, cur.constraint, r, sigma, cur.all_vars):
                    cur = _replace(cur, i, side, p, rhs)
                    used.append(r.label)
                    break
            else:
                break
        if used and self.greater(cl, cur):
            return Applied("Rewriting", [cur], tuple(used))
        return None

    def _partial_split(self, cl: Clause) -> Optional[Applied]:
        occ = occurs_in(cl.constraint)
        for i, side, p, u, r, sigma in self._rc_candidates(cl):
            if r.trivial_constraint:
                continue
            d = r.constraint.substitute(sigma)
            if not d.vars <= u.vars or occ(d):
                continue
            pos = conj(cl.constraint, d)
            if refute(self.ctx, pos):
                continue
            rhs = apply(r.rhs, sigma)
            if not lpo_greater(u, rhs, self.prec, facts_of(pos)):
                continue
            try:
                neg = conj(cl.constraint, negate(d, cl.all_vars, self.ctx.complement))
            except ConstraintError:
                continue
            left = _replace(cl, i, side, p, rhs).with_constraint(pos)
            return Applied("PartialSplitting", [left, cl.with_constraint(neg)], (r.label,))
        return None

    # ------------------------------------------------------------ simplification for defined functions

    def simplify_defined(self, state: ProverState, cid: str, cl: Clause, pool) -> Optional[Applied]:
        if is_tautology(cl) or refute(self.ctx, cl.constraint):
            return Applied("InductiveDeletion", [])
        for attempt in (self._rd_rewrite, self._hyp_rewrite, self._contextual, self._rewrite_split):
            done = attempt(state, cid, cl, pool)
            if done is not None:
                return done
        return None

    def _rd_matches(self, u, conditional: bool):
        for r in self.rd.with_head(u.sym.name):
            if bool(r.condition) != conditional:
                continue
            r2 = r.renamed()
            sigma = match_term(r2.lhs, u)
            if sigma is not None:
                yield r2, sigma

    def _rd_rewrite(self, state, cid, cl, pool) -> Optional[Applied]:
        facts = facts_of(cl.constraint)
        for i, side, p, u in _sites(cl):
            if u.sym.constructor:
                continue
            for r, sigma in self._rd_matches(u, False):
                rhs = apply(r.rhs, sigma)
                if not lpo_greater(u, rhs, self.prec, facts):
                    continue
                if step_applies(self.ctx, cl.constraint, r, sigma, cl.all_vars):
                    return Applied("InductiveRewriting", [_replace(cl, i, side, p, rhs)], (r.label,))
            for r, sigma in self._rd_matches(u, True):
                gs = [(apply(a, sigma), apply(b, sigma)) for a, b in r.condition]
                if not all(a.is_ground and b.is_ground for a, b in gs):
                    continue
                rhs = apply(r.rhs, sigma)
                if not lpo_greater(u, rhs, self.prec, facts):
                    continue
                try:
                    ok = all(normalize_ground(self.ctx, a, self.rules) == normalize_ground(self.ctx, b, self.rules)
                             for a, b in gs)
                except BudgetExceeded:
                    ok = False
                if ok and step_applies(self.ctx, cl.constraint, r, sigma, cl.all_vars):
                    return Applied("InductiveRewriting", [_replace(cl, i, side, p, rhs)], (r.label,))
        return None

    def _guard(self, state, cid, cl, inst: Clause) -> Optional[str]:
        if self.greater(cl, inst):
            return cid
        anc = state.ancestor.get(cid)
        if anc is not None and anc != cid and self.greater(state.clauses[anc], inst):
            return anc
        return None

    def _hyp_rewrite(self, state, cid, cl, pool) -> Optional[Applied]:
        facts = facts_of(cl.constraint)
        for hid in pool:
            if hid == cid:
                continue
            psi = state.clauses[hid]
            if len(psi.literals) != 1 or not psi.literals[0].positive:
                continue
            psi = psi.substitute(fresh_renaming(psi.all_vars))
            lit = psi.literals[0]
            for l, r in ((lit.lhs, lit.rhs), (lit.rhs, lit.lhs)):
                if isinstance(l, Var) or not r.vars <= l.vars:
                    continue
                for i, side, p, u in _sites(cl):
                    sigma = match_term(l, u)
                    if sigma is None:
                        continue
                    rhs = apply(r, sigma)
                    if not lpo_greater(u, rhs, self.prec, facts):
                        continue
                    d = psi.constraint.substitute(sigma)
                    inst = Clause((Literal(u, rhs, True),), d)
                    guard = self._guard(state, cid, cl, inst)
                    if guard is None:
                        continue
                    if not self._entails(cl.constraint, d, cl.all_vars):
                        continue
                    state.hyp_uses.append((cid, hid, guard, inst))
                    return Applied("InductiveRewriting", [_replace(cl, i, side, p, rhs)],
                                   (f"hyp {hid}", f"guard {guard}"))
        return None

    def _contextual(self, state, cid, cl, pool) -> Optional[Applied]:
        if self.depth >= self.options.max_rec_depth:
            return None
        facts = facts_of(cl.constraint)
        upsilon = tuple(l for l in cl.literals if not l.positive)
        for i, side, p, u in _sites(cl):
            if u.sym.constructor:
                continue
            for r, sigma in self._rd_matches(u, True):
                rhs = apply(r.rhs, sigma)
                if not lpo_greater(u, rhs, self.prec, facts):
                    continue
                d = r.constraint.substitute(sigma)
                goals = [Clause(upsilon + (Literal(apply(a, sigma), apply(b, sigma), True),), conj(cl.constraint, d))
                         for a, b in r.condition]
                if not self._entails(cl.constraint, d, cl.all_vars):
                    continue
                if self.sub_prove(goals):
                    return Applied("ContextualRewriting", [_replace(cl, i, side, p, rhs)], (r.label,))
        return None

    def _rewrite_split(self, state, cid, cl, pool) -> Optional[Applied]:
        for i, side, p, u in _sites(cl):
            if u.sym.constructor:
                continue
            insts = list(self._rd_matches(u, False)) + list(self._rd_matches(u, True))
            if not insts:
                continue
            if any(r.condition for r, _ in insts) and "sufficiently_complete" not in self.spec.assumptions:
                continue
            branches = []
            for r, sigma in insts:
                d = r.constraint.substitute(sigma)
                c = conj(cl.constraint, d)
                rhs = apply(r.rhs, sigma)
                if not lpo_greater(u, rhs, self.prec, facts_of(c)):
                    break
                conds = tuple(Literal(apply(a, sigma), apply(b, sigma), False) for a, b in r.condition)
                new = _replace(cl, i, side, p, rhs)
                branches.append((Clause(conds + new.literals, c), r.label, d))
            else:
                cover = disj(*(d for _, _, d in branches))
                if cover != TRUE and not self._entails(cl.constraint, cover, cl.all_vars):
                    continue
                return Applied("RewriteSplitting", [b for b, _, _ in branches], tuple(lbl for _, lbl, _ in branches))
        return None

    def sub_prove(self, goals) -> bool:
        sub = Prover(self.spec, Options(budget=self.options.sub_budget, induction_vars=self.options.induction_vars,
                                        max_rec_depth=self.options.max_rec_depth), self.depth + 1)
        return sub.prove(goals, decorated=True).proved

    # ------------------------------------------------------------ narrowing

    def _allowed(self):
        """Variables at a position where some defined rule's left-hand side is not a variable."""
        if not self.options.induction_vars:
            return None
        positions = {}
        for r in self.rd:
            for p, u in subterms(r.lhs):
                if p and not isinstance(u, Var):
                    positions.setdefault(r.lhs.sym.name, set()).add(p)

        def allowed(cl, v):
            for lit in cl.literals:
                for t in lit.sides():
                    for _, u in subterms_innermost(t):
                        if isinstance(u, App) and not u.sym.constructor:
                            for p in positions.get(u.sym.name, ()):
                                if _at(u, p) == v:
                                    return True
            return False

        return allowed

    def derivatives(self, cl: Clause, include_zero: bool, restricted: bool = True) -> list:
        return expand_clause(self.ctx, cl, max(self.d_r - 1, 0), include_zero=include_zero,
                             sorts=self.inductive_sorts, allowed=self._allowed() if restricted else None,
                             drop_unsat=False)

    def _narrow(self, state: ProverState, cid: str, cl: Clause, inductive: bool, restricted: bool = True) -> bool:
        ders = self.derivatives(cl, include_zero=not inductive, restricted=restricted)
        if not ders:
            return False
        mark = (len(state.clauses), len(state.hyp_uses))
        ids = [state.add(d, cid, theta) for d, theta in ders]
        for did in ids:
            state.ancestor[did] = did
        state.H.append(cid)
        pool = list(state.E) + state.H
        outcomes = []
        for did in ids:
            d = state.clauses[did]
            done = self.simplify_defined(state, did, d, pool) if inductive else self.simplify_constructor(d)
            if done is None:
                self._rollback(state, mark)
                return False
            outcomes.append(done)
        state.record("InductiveNarrowing" if inductive else "Narrowing", cid, ids)
        for did, done in zip(ids, outcomes):
            self._commit(state, did, done)
        return True

    def _rollback(self, state: ProverState, mark) -> None:
        n, uses = mark
        for cid in list(state.clauses)[n:]:
            for table in (state.clauses, state.origin, state.root, state.ancestor):
                table.pop(cid, None)
        del state.hyp_uses[uses:]
        state.H.pop()

    def _commit(self, state: ProverState, cid: str, done: Applied) -> None:
        ids = [state.add(r, cid) for r in done.results]
        state.record(done.rule, cid, ids, done.labels)
        state.E.extend(ids)

    # ------------------------------------------------------------ derivation loop

    def _subsumed(self, state: ProverState, cid: str, cl: Clause) -> Optional[str]:
        for k, ax in enumerate(self.axioms):
            if subsumes(self.ctx, ax, cl):
                return self.rules.rules[k].label
        for other in state.E:
            if other != cid and subsumes(self.ctx, state.clauses[other], cl):
                return other
        for hid in state.H:
            psi = state.clauses[hid]
            if hid == cid or not subsumes(self.ctx, psi, cl):
                continue
            if self._subsumption_guard(state, cid, cl, psi):
                return hid
        return None

    def _subsumption_guard(self, state, cid, cl, psi) -> bool:
        # the instance of psi used is a sub-clause of cl, so it is below cl's ancestor
        # and strictly below cl once it drops a literal
        if len(psi.literals) < len(cl.literals):
            return True
        anc = state.ancestor.get(cid)
        return anc is not None and anc != cid and self.greater(state.clauses[anc], cl)

    def infer_once(self, state: ProverState) -> ProverState:
        cid = state.E.popleft()
        cl = state.clauses[cid]
        state.steps += 1
        by = self._subsumed(state, cid, cl)
        if by is not None:
            state.record("Subsumption", cid, (), (by,))
            return state
        done = self.simplify_constructor(cl)
        if done is not None:
            self._commit(state, cid, done)
            return state
        done = self.simplify_defined(state, cid, cl, list(state.E) + state.H)
        if done is not None:
            self._commit(state, cid, done)
            return state
        if self._narrow(state, cid, cl, inductive=False):
            return state
        if self._narrow(state, cid, cl, inductive=True):
            return state
        # the variable filter is a heuristic; disproof needs every position tried
        if self.options.induction_vars and any(
                self._narrow(state, cid, cl, inductive=k, restricted=False) for k in (False, True)):
            return state
        state.record("Disproof", cid)
        state.bottom = cid
        return state

    def initial_state(self, conjectures, decorated: bool = False) -> ProverState:
        state = ProverState()
        for k, cj in enumerate(conjectures):
            cl = getattr(cj, "clause", cj)
            is_dec = decorated or getattr(cj, "decorated", False)
            variants = [cl] if is_dec else decorate(self.ctx, cl)
            for v in variants:
                cid = state.add(v)
                state.root[cid] = k
                state.origin[cid] = {x: x for x in cl.vars}
                state.ancestor[cid] = None
                state.E.append(cid)
            if not variants:
                state.record("Decoration", f"conj{k + 1}", (), ("no inhabited decoration",))
        return state

    def prove(self, conjectures=None, decorated: bool = False, state: Optional[ProverState] = None,
              budget: Optional[int] = None) -> Outcome:
        conjectures = self.spec.conjectures if conjectures is None else list(conjectures)
        budget = self.options.budget if budget is None else budget
        if state is None:
            state = self.initial_state(conjectures, decorated)
            if "ground_confluent" not in self.spec.assumptions and self.depth == 0:
                bad = self._inconsistency(state, conjectures)
                if bad is not None:
                    return bad
        originals = [getattr(cj, "clause", cj) for cj in conjectures]
        used = 0
        while state.E:
            if used >= budget:
                return Outcome(OUT_OF_BUDGET, state, self.assumptions)
            self.infer_once(state)
            used += 1
            if state.bottom is not None:
                culprit = state.clauses[state.bottom]
                cex = self.counterexample(state, state.bottom, originals) if self.depth == 0 else None
                return Outcome(DISPROVED, state, self.assumptions, culprit, cex)
        return Outcome(PROVED, state, self.assumptions)

    # ------------------------------------------------------------ disproof

    def _inconsistency(self, state: ProverState, conjectures) -> Optional[Outcome]:
        probe = joinability_probe(self.ctx, self.rules, depth=2)
        if probe is None:
            return None
        t, nfs = probe
        cid = state.E[0] if state.E else None
        state.record("Disproof", cid or "-", (), ("non-joinable " + str(t),))
        state.bottom = cid
        culprit = state.clauses.get(cid) if cid else None
        note = f"{t} has normal forms {', '.join(map(str, nfs))}"
        return Outcome(DISPROVED, state, self.assumptions, culprit, None, note)

    def counterexample(self, state: ProverState, cid: str, originals) -> Optional[dict]:
        """A ground substitution of the original conjecture's variables that falsifies it."""
        ctx = self.ctx
        cl = state.clauses[cid]
        original = originals[state.root[cid]]
        origin = state.origin[cid]
        try:
            sol = find_witness(ctx, cl.constraint, self.options.cex_depth + 1)
        except ConstraintError:
            sol = None
        if sol is not None:
            sol = dict(sol)
            for v in cl.all_vars:
                sol.setdefault(v, ctx.sig.smallest_ground(v.sort))
            sigma = {v: apply(t, sol) for v, t in origin.items()}
            if self._falsifies(original, sigma):
                return sigma
        return self._search(original)

    def _falsifies(self, cl: Clause, sigma: dict) -> bool:
        for v in cl.all_vars:
            if v not in sigma:
                sigma[v] = self.ctx.sig.smallest_ground(v.sort)
        g = cl.substitute(sigma)
        if not self.ctx.eval(g.constraint):
            return False
        try:
            return not holds_ground(self.ctx, g, self.rules)
        except BudgetExceeded:
            return False

    def _search(self, cl: Clause) -> Optional[dict]:
        vs = sorted(cl.vars, key=lambda v: v.name)
        pools = [self.ctx.sig.ground_terms(v.sort, self.options.cex_depth) for v in vs]
        for combo in itertools.islice(itertools.product(*pools), 20_000):
            sigma = dict(zip(vs, combo))
            if self._falsifies(cl, sigma):
                return {v: sigma[v] for v in vs}
        return None


def prove(spec, conjectures=None, budget: int = 500, **kw) -> Outcome:
    return Prover(spec, Options(budget=budget, **kw)).prove(conjectures)
