"""Independent audits of prover outcomes, shared by the engine and acceptance tests."""

import itertools
import time

from ctgind.engine import Prover, facts_of
from ctgind.ordering import clause_greater
from ctgind.rewriting import normalize_ground

from oracle import subst


def run(spec, **options):
    from ctgind.engine import Options

    start = time.perf_counter()
    outcome = Prover(spec, Options(**options)).prove()
    return outcome, time.perf_counter() - start


def ground_instances(oracle, clause, depth):
    """Normal-form substitutions of the clause variables that satisfy its constraint."""
    vs = sorted(clause.vars, key=lambda v: v.name)
    pools = [sorted(oracle.irreducible(v.sort, depth), key=str) for v in vs]
    for combo in itertools.product(*pools):
        sigma = dict(zip(vs, combo))
        if oracle.holds(clause.constraint, sigma):
            yield sigma


def clause_holds(spec, clause, sigma):
    for lit in clause.literals:
        same = normalize_ground(spec.ctx, subst(lit.lhs, sigma), spec.rules) == \
            normalize_ground(spec.ctx, subst(lit.rhs, sigma), spec.rules)
        if same == lit.positive:
            return True
    return False


def soundness_audit(spec, oracle, depth=4):
    """(instances checked, failures) over every conjecture of a proved spec."""
    checked, bad = 0, []
    for cj in spec.conjectures:
        for sigma in ground_instances(oracle, cj.clause, depth):
            checked += 1
            if not clause_holds(spec, cj.clause, sigma):
                bad.append((cj.label, sigma))
    return checked, bad


def falsified_by(spec, oracle, clause, sigma) -> bool:
    """The ground instance violates the clause under every rewrite path."""
    sigma = dict(sigma)
    if not oracle.holds(clause.constraint, sigma):
        return False
    for lit in clause.literals:
        l, r = oracle.normal_forms(subst(lit.lhs, sigma)), oracle.normal_forms(subst(lit.rhs, sigma))
        if len(l) != 1 or len(r) != 1:
            return False
        if (l == r) == lit.positive:
            return False
    return True


def monotone_violations(spec, state):
    """Hypothesis uses whose guard is not the rewritten clause (or its ancestor) or is not bigger."""
    rc = spec.rules.constructor_rules
    bad = []
    for cid, hid, guard, inst in state.hyp_uses:
        if guard not in (cid, state.ancestor.get(cid)):
            bad.append((cid, hid, guard, "guard is unrelated"))
            continue
        g = state.clauses[guard]
        if not clause_greater(g, inst, rc, spec.prec, facts_of(g.constraint)):
            bad.append((cid, hid, guard, str(inst)))
    return bad


def depth_guard_violations(spec, state):
    limit = spec.rules.depth() - 1
    bad = []
    for step in state.trace:
        if step.rule in ("Narrowing", "InductiveNarrowing"):
            d = state.clauses[step.clause].depth
            for r in step.results:
                if state.clauses[r].depth - d > limit:
                    bad.append((step.clause, r))
    return bad


def deleted_order_clash(state) -> bool:
    """A deleted clause whose constraint says x not > y, x >= y and x != y for one pair."""
    from ctgind.constraints import Eq, Lt, Neq, Or, conjuncts

    def pair_of(f):
        if isinstance(f, Or) and len(f.items) == 2:
            lt = [a for a in f.items if isinstance(a, Lt)]
            eq = [a for a in f.items if isinstance(a, Eq)]
            if lt and eq and {lt[0].s, lt[0].t} == {eq[0].s, eq[0].t}:
                return lt[0].s, lt[0].t
        return None

    for step in state.trace:
        if step.rule != "Deletion":
            continue
        items = conjuncts(state.clauses[step.clause].constraint)
        lts = {pair_of(f) for f in items} - {None}
        for a in items:
            if isinstance(a, Neq) and (a.s, a.t) in lts and (a.t, a.s) in lts:
                return True
    return False


# ---------------------------------------------------------------- random grammars

def _instances_language(oracle, t, c, depth):
    vs = sorted(t.vars, key=lambda v: v.name)
    pools = [sorted(oracle.irreducible(v.sort, depth), key=str) for v in vs]
    out = set()
    for combo in itertools.product(*pools):
        sigma = dict(zip(vs, combo))
        u = subst(t, sigma)
        if u.depth <= depth and oracle.holds(c, sigma):
            out.add(u)
    return out


def _random_case(spec, rng):
    """A linear pattern plus a random guard over its variables."""
    from ctgind.constraints import Lt, Member, Neq, conj, member
    from ctgind.terms import App, Var

    sig = spec.sig
    n = itertools.count()

    def term(sort, d):
        if d == 0 or rng.random() < 0.4:
            return Var(f"v{next(n)}", sort)
        f = rng.choice(sig.constructors(sort))
        return App(f, [term(s, d - 1) for s in f.arg_sorts])

    sort = rng.choice([s for s in sig.sorts if len(sig.constructors(s)) > 1])
    t = term(sort, 2)
    vs = sorted(t.vars, key=lambda v: v.name)
    atoms = []
    for _ in range(rng.randint(0, 2) if vs else 0):
        a = rng.choice(vs)
        same = [v for v in vs if v.sort == a.sort and v != a]
        kind = rng.choice(["lt", "neq", "mem"])
        if kind == "mem" or not same:
            if any(isinstance(x, Member) and x.term == a for x in atoms):
                continue
            atoms.append(member(a, rng.choice(spec.nf.nonterminals(a.sort, include_red=False))))
        elif kind == "lt":
            atoms.append(Lt(a, rng.choice(same)))
        else:
            atoms.append(Neq(a, rng.choice(same)))
    return t, conj(*atoms)


def _emptiness(ctx, g, nt, lang):
    from ctgind.grammar import EmptinessUnknown, is_empty

    try:
        r = is_empty(ctx, g, nt, max_depth=5)
    except EmptinessUnknown:
        assert not lang
        return "unknown"
    if r.empty:
        assert not lang, "is_empty said empty but enumeration found terms"
        return "empty"
    assert r.witness is not None and g.contains(r.witness, nt)
    return "nonempty"


def random_grammar_audit(spec, oracle, seed=7, cases=80):
    """Ground-instance grammars and their intersections against brute force.

    Languages are compared with the oracle to depth 4 and ``is_empty`` with the
    depth-5 enumeration; any disagreement raises AssertionError.  Returns the
    tally of emptiness verdicts.
    """
    import random

    from ctgind.grammar import enumerate_language, ground_instances_grammar, intersect

    ctx = spec.ctx
    rng = random.Random(seed)
    tally = {"empty": 0, "nonempty": 0, "unknown": 0}
    made = []
    for _ in range(cases):
        t, c = _random_case(spec, rng)
        g, root = ground_instances_grammar(ctx, t, c)
        want = _instances_language(oracle, t, c, 4)
        assert set(enumerate_language(ctx, g, root, 4)) == want, (str(t), str(c))
        tally[_emptiness(ctx, g, root, enumerate_language(ctx, g, root, 5))] += 1
        made.append((g, root, want))
    pairs = [(a, b) for i, a in enumerate(made) for b in made[i + 1:i + 4] if a[1].sort == b[1].sort]
    for nt in spec.nf.nts:
        pairs += [(a, (spec.nf, nt, oracle.language(nt, 4))) for a in made[:20] if a[1].sort == nt.sort]
    for (g1, n1, w1), (g2, n2, w2) in pairs:
        g, root = intersect(ctx, g1, n1, g2, n2)
        assert set(enumerate_language(ctx, g, root, 4)) == w1 & w2
        tally[_emptiness(ctx, g, root, enumerate_language(ctx, g, root, 5))] += 1
    return tally


# ---------------------------------------------------------------- ordering laws

def _random_term(rng, sig, sort, depth, with_vars):
    from ctgind.terms import App, Var

    syms = [f for f in sig.symbols.values() if f.sort == sort]
    leaves = [f for f in syms if not f.arg_sorts]
    if with_vars and rng.random() < 0.2:
        return Var(f"{sort.lower()}{rng.randint(0, 1)}", sort)
    if depth == 0 or rng.random() < 0.3:
        return App(rng.choice(leaves), ())
    f = rng.choice(syms)
    return App(f, [_random_term(rng, sig, s, depth - 1, with_vars) for s in f.arg_sorts])


def ordering_law_audit(spec, oracle, cases=1000, seed=11):
    """Check each LPO / clause-ordering law on ``cases`` instances where its premise holds.

    Returns ``(violations, exercised)`` keyed by law name.  Conditional laws
    keep drawing until ``cases`` instances satisfy the premise (or a cap hits).
    """
    import random
    from itertools import permutations

    from ctgind.constraints import Clause, Literal
    from ctgind.ordering import clause_greater, lpo_greater
    from ctgind.terms import App, apply, subterms

    rng = random.Random(seed)
    sig, prec = spec.sig, spec.prec
    rc = spec.rules.constructor_rules
    sorts = sorted(sig.sorts)

    def gt(s, t):
        return lpo_greater(s, t, prec)

    def cg(p, q):
        return clause_greater(p, q, rc, prec)

    def term(depth=3, with_vars=True, sort=None):
        return _random_term(rng, sig, sort or rng.choice(sorts), depth, with_vars)

    def clause(with_vars=True):
        lits = []
        for _ in range(rng.randint(1, 2)):
            x = term(2, with_vars)
            lits.append(Literal(x, term(2, with_vars, x.sort), rng.random() < 0.5))
        return Clause(tuple(lits))

    def chain(items, rel):
        for a, b, c in permutations(items):
            if rel(a, b) and rel(b, c):
                return a, b, c
        return None

    def irreflexive():
        s = term()
        return True, not gt(s, s)

    def asymmetric():
        s = term()
        t = term(sort=s.sort)
        return True, not (gt(s, t) and gt(t, s))

    def subterm():
        s = term()
        subs = [u for p, u in subterms(s) if p]
        return bool(subs), all(gt(s, u) for u in subs)

    def transitive():
        s = term(3, False)
        abc = chain([s, term(3, False, s.sort), term(3, False, s.sort)], gt)
        if abc is None:
            return False, True
        return True, gt(abc[0], abc[2])

    def monotone():
        s = term()
        t = term(sort=s.sort)
        if gt(t, s):
            s, t = t, s
        if not gt(s, t):
            return False, True
        sigma = {v: term(2, False, v.sort) for v in s.vars | t.vars}
        ok = gt(apply(s, sigma), apply(t, sigma))
        ctxs = [f for f in sig.symbols.values() if s.sort in f.arg_sorts]
        if ctxs:
            f = rng.choice(ctxs)
            k = f.arg_sorts.index(s.sort)
            fill = [term(1, False, a) for a in f.arg_sorts]
            ok = ok and gt(App(f, fill[:k] + [s] + fill[k + 1:]), App(f, fill[:k] + [t] + fill[k + 1:]))
        return True, ok

    def total():
        a = term(3, False)
        b = term(3, False, a.sort)
        if a == b:
            return False, True
        return True, gt(a, b) or gt(b, a)

    def textbook():
        a = term(3, False)
        b = term(3, False, a.sort)
        return True, gt(a, b) == oracle.gt(a, b)

    def clause_irreflexive():
        c = clause()
        return True, not cg(c, c)

    def clause_asymmetric():
        c1, c2 = clause(), clause()
        return True, not (cg(c1, c2) and cg(c2, c1))

    def clause_transitive():
        abc = chain([clause(False), clause(False), clause(False)], cg)
        if abc is None:
            return False, True
        return True, cg(abc[0], abc[2])

    laws = {
        "lpo irreflexive": irreflexive, "lpo asymmetric": asymmetric, "lpo subterm": subterm,
        "lpo transitive": transitive, "lpo monotone": monotone, "lpo total on ground": total,
        "lpo textbook": textbook, "clause irreflexive": clause_irreflexive,
        "clause asymmetric": clause_asymmetric, "clause transitive": clause_transitive,
    }
    bad, exercised = {}, {}
    for name, law in laws.items():
        bad[name] = exercised[name] = 0
        for _ in range(50 * cases):
            if exercised[name] >= cases:
                break
            hit, ok = law()
            exercised[name] += hit
            bad[name] += not ok
    return bad, exercised
