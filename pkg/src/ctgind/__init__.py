"""Implicit induction over constrained tree grammars."""

from .constraints import Clause, Literal, NonTerminal
from .engine import DISPROVED, OUT_OF_BUDGET, PROVED, Options, Outcome, Prover, ProverState, prove
from .grammar import Grammar, build_nf_grammar, decorate, expand_clause, intersect, is_empty
from .ordering import Precedence, clause_greater, lpo_compare, lpo_greater
from .rewriting import Rule, RuleSet, normalize_ground
from .solver import find_witness, refute, satisfiable
from .spec import Specification, load_spec, parse_spec
from .terms import App, FunctionSymbol, Signature, Var

__all__ = [
    "App", "Clause", "DISPROVED", "FunctionSymbol", "Grammar", "Literal", "NonTerminal", "OUT_OF_BUDGET",
    "Options", "Outcome", "PROVED", "Precedence", "Prover", "ProverState", "Rule", "RuleSet", "Signature",
    "Specification", "Var", "build_nf_grammar", "clause_greater", "decorate", "expand_clause", "find_witness",
    "intersect", "is_empty", "load_spec", "lpo_compare", "lpo_greater", "normalize_ground", "parse_spec",
    "prove", "refute", "satisfiable",
]
