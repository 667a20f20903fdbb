"""Satisfiability modulo local theory extensions by incremental E-matching instantiation."""
from .core import Axiom, Problem, PsiRule, Signature, TermBank
from .engine import Strategy, Verdict, decide, eager_instances, epr_export
from .frontend import ParseError, parse, parse_file, print_problem
from .preprocess import prepare

__version__ = "0.1.0"

__all__ = [
    "Axiom", "Problem", "PsiRule", "Signature", "TermBank", "Strategy", "Verdict", "decide",
    "eager_instances", "epr_export", "ParseError", "parse", "parse_file", "print_problem", "prepare",
]
