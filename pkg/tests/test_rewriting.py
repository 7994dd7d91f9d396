import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctgind.constraints import Clause, Eq, Literal, Lt, Neq, conj, member
from ctgind.rewriting import (
    BudgetExceeded, PreconditionViolated, Reducibility, RewriteError, RuleSet, all_normal_forms,
    constructor_parts, ground_reducibility, joinability_probe, normalize_ground, rewrite_step,
    valid_ground_irreducible,
)
from ctgind.spec import parse_clause, parse_spec, parse_term
from ctgind.terms import App, Var

from oracle import subst

SORTS = {"x": "Nat", "x1": "Nat", "x2": "Nat", "y": "Set", "y1": "Set"}

COND = """
sort Nat;
cons 0 : Nat;
cons s : Nat -> Nat;
defn even : Nat -> Nat;
rule e0: even(0) -> s(0);
rule e1: even(s(0)) -> 0;
rule e2: cond even(x) = s(0) => even(s(s(x))) -> s(0);
rule e3: cond even(x) = 0 => even(s(s(x))) -> 0;
"""


@pytest.fixture(scope="module")
def spec(specs):
    return specs("sorted_lists")


@pytest.fixture(scope="module")
def T(spec):
    return lambda text: parse_term(spec, text, SORTS)


def C(spec, text):
    return parse_clause(spec, text, SORTS)


@pytest.mark.parametrize("term,nf", [
    ("sorted(ins(s(0), ins(0, empty)))", "true"),
    ("ins(0, ins(0, ins(s(0), empty)))", "ins(0, ins(s(0), empty))"),
    ("ins(s(0), ins(0, ins(s(0), empty)))", "ins(0, ins(s(0), empty))"),
    ("mem(s(0), ins(0, empty))", "false"),
    ("smem(s(0), ins(s(0), ins(0, empty)))", "true"),
])
def test_normalize_examples(spec, T, term, nf):
    assert normalize_ground(spec.ctx, T(term), spec.rules) == T(nf)


def test_normalize_rejects_open_terms(spec, T):
    with pytest.raises(RewriteError):
        normalize_ground(spec.ctx, T("sorted(y)"), spec.rules)


def test_budget(spec, T):
    with pytest.raises(BudgetExceeded):
        normalize_ground(spec.ctx, T("sorted(ins(s(s(0)), ins(s(0), ins(0, empty))))"), spec.rules, budget=1)


def test_conditional_rules_fire_when_the_condition_joins():
    cs = parse_spec(COND)
    t = parse_term(cs, "even(s(s(s(s(0)))))")
    assert normalize_ground(cs.ctx, t, cs.rules) == parse_term(cs, "s(0)")
    assert all_normal_forms(cs.ctx, t, cs.rules) == {parse_term(cs, "s(0)")}


def test_open_rewrite_steps(spec):
    out = rewrite_step(spec.ctx, C(spec, "sorted(ins(x1, ins(x2, y))) = true || x1 < x2"), spec.rules)
    assert [str(c) for c in out] == ["sorted(ins(x2, y)) = true || x1 < x2"]
    # the guard of s2 is not entailed without the constraint
    assert rewrite_step(spec.ctx, C(spec, "sorted(ins(x1, ins(x2, y))) = true"), spec.rules) == []
    out = rewrite_step(spec.ctx, C(spec, "mem(x1, ins(x2, y)) = true || x1 =~ x2"), spec.rules)
    assert [str(c) for c in out] == ["true = true || x1 =~ x2"]


def test_joinability_probe(specs):
    good = specs("sorted_lists")
    assert joinability_probe(good.ctx, good.rules) is None
    bad = specs("sorted_lists_inconsistent")
    t, nfs = joinability_probe(bad.ctx, bad.rules)
    assert t.sym.name == "smem" and [str(n) for n in nfs] == ["false", "true"]


def test_constructor_parts(spec):
    cl = C(spec, "smem(s(x1), ins(x2, y)) = mem(0, y)")
    assert [str(t) for t in constructor_parts(cl)] == ["s(x1)", "ins(x2, y)", "0"]


@pytest.mark.parametrize("text,want", [
    ("ins(x1, empty) != ins(x2, empty) || x1 < x2, x1 : <Nat>, x2 : <Nat>", Reducibility.IRREDUCIBLE),
    ("ins(x1, ins(x2, y)) = y || x2 < x1", Reducibility.REDUCIBLE),
    ("ins(x1, ins(x2, y)) = y || x1 < x2, x1 : <Nat>, y : <Set>, x2 : <Nat>", Reducibility.IRREDUCIBLE),
    ("ins(x1, y) = y", Reducibility.MIXED),
])
def test_ground_reducibility_examples(spec, text, want):
    assert ground_reducibility(spec.ctx, C(spec, text)) is want


def test_validity_of_irreducible_constructor_clauses(spec):
    ok = C(spec, "ins(x1, empty) != ins(x2, empty) || x1 < x2, x1 : <Nat>, x2 : <Nat>")
    assert valid_ground_irreducible(spec.ctx, ok)
    assert not valid_ground_irreducible(spec.ctx, C(spec, "x1 = x2 || x1 : <Nat>, x2 : <Nat>"))
    with pytest.raises(PreconditionViolated):
        valid_ground_irreducible(spec.ctx, C(spec, "ins(x1, y) = y"))
    with pytest.raises(PreconditionViolated):
        valid_ground_irreducible(spec.ctx, C(spec, "sorted(y) = true || y : <Set>"))


# ---------------------------------------------------------------- against brute force

def _ground(sig, sort, depth):
    leaves = [st.just(App(f, ())) for f in sig.symbols.values() if f.sort == sort and not f.arg_sorts]
    if depth == 0:
        return st.one_of(*leaves)
    nodes = [st.tuples(*(_ground(sig, s, depth - 1) for s in f.arg_sorts)).map(lambda a, f=f: App(f, a))
             for f in sig.symbols.values() if f.sort == sort and f.arg_sorts]
    return st.one_of(*leaves, *nodes)


@pytest.mark.parametrize("name", ["sorted_lists", "powerlists"])
def test_normalize_is_idempotent_and_agrees_with_every_rewrite_path(specs, oracles, name):
    spec, oracle = specs(name), oracles(name)
    sig = spec.sig
    terms = st.sampled_from(sorted(sig.sorts)).flatmap(lambda s: _ground(sig, s, 3))

    @settings(max_examples=300, deadline=None)
    @given(t=terms)
    def check(t):
        n = normalize_ground(spec.ctx, t, spec.rules)
        assert normalize_ground(spec.ctx, n, spec.rules) == n
        assert oracle.normal_forms(t) == {n}
        if all(f.constructor for f in _symbols(n)):
            assert not oracle.reducible(n)

    check()


def _symbols(t):
    yield t.sym
    for a in t.args:
        yield from _symbols(a)


def _random_clause(spec, rng):
    sig = spec.sig
    n = itertools.count()
    pool = []

    def term(sort, d):
        if d == 0 or rng.random() < 0.35:
            if pool and rng.random() < 0.3:
                same = [v for v in pool if v.sort == sort]
                if same:
                    return rng.choice(same)
            v = Var(f"v{next(n)}", sort)
            pool.append(v)
            return v
        f = rng.choice(sig.constructors(sort))
        return App(f, [term(s, d - 1) for s in f.arg_sorts])

    sort = rng.choice(["Nat", "Set"])
    lit = Literal(term(sort, 3), term(sort, 2), rng.random() < 0.5)
    atoms = []
    vs = sorted(set(pool), key=lambda v: v.name)
    for v in vs:
        if rng.random() < 0.5:
            atoms.append(member(v, rng.choice(spec.nf.nonterminals(v.sort, include_red=False))))
    for _ in range(rng.randint(0, 2) if vs else 0):
        a, b = rng.choice(vs), rng.choice(vs)
        if a.sort == b.sort and a != b:
            atoms.append(rng.choice([Lt, Neq, Eq])(a, b))
    return Clause((lit,), conj(*atoms))


def test_ground_reducibility_against_brute_force(spec, oracles):
    oracle = oracles("sorted_lists")
    rng = random.Random(3)
    seen = {r: 0 for r in Reducibility}
    for _ in range(200):
        cl = _random_clause(spec, rng)
        verdict = ground_reducibility(spec.ctx, cl)
        seen[verdict] += 1
        parts = constructor_parts(cl) + [v for v in cl.vars if not any(v in p.vars for p in constructor_parts(cl))]
        vs = sorted(cl.all_vars, key=lambda v: v.name)
        for combo in itertools.product(*(oracle.ground(v.sort, 2) for v in vs)):
            sigma = dict(zip(vs, combo))
            if not oracle.holds(cl.constraint, sigma):
                continue
            red = any(oracle.reducible(subst(p, sigma)) for p in parts)
            if verdict is Reducibility.REDUCIBLE:
                assert red, (str(cl), sigma)
            elif verdict is Reducibility.IRREDUCIBLE:
                assert not red, (str(cl), sigma)
    assert all(seen.values()), seen


def test_rule_set_views(spec):
    rs = spec.rules
    assert isinstance(rs, RuleSet)
    assert len(rs.constructor_rules) == 2 and len(rs.defined_rules) == 10
    assert rs.depth() == 3
    assert {r.label for r in rs.with_head("smem")} == {"sm0", "sm1", "sm2", "sm3"}
