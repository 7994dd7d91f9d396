"""Build the normal-form grammar of the sorted-lists spec and poke at it."""

from pathlib import Path

from ctgind import load_spec
from ctgind.grammar import ground_instances_grammar, intersect, is_empty
from ctgind.spec import parse_clause, parse_nonterminal

spec = load_spec(Path(__file__).resolve().parent.parent / "fixtures" / "sorted_lists.spec")
ctx, nf = spec.ctx, spec.nf

print(nf.dump())
print()

nt = parse_nonterminal(spec, "ins(_, _)")
print("irreducible sets up to depth 4:")
for t in nf.enumerate(nt, 4):
    print("  ", t)

# lists whose head is 0 and whose second element is bigger
goal = parse_clause(spec, "sorted(ins(0, ins(x, y))) = true || x : <Nat>")
pattern = goal.literals[0].lhs.args[0]
g, root = ground_instances_grammar(ctx, pattern, goal.constraint)
both, top = intersect(ctx, g, root, nf, nt)
r = is_empty(ctx, both, top, max_depth=5)
print()
print("instances of", pattern, "in normal form:", "none" if r.empty else f"e.g. {r.witness}")
