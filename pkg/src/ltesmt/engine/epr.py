"""Partial instantiation into the EPR fragment for an external MBQI solver.

Pattern-bound variables are instantiated by one E-matching pass modulo the
top-level ground equalities of the problem; variables bound by no pattern
stay universally quantified.  The result is plain SMT-LIB.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..core import And, Formula, Problem, Term, Var, apply_subst, clause_formula, formula_atoms, formula_text, iter_subterms
from ..egraph import EGraph
from ..ematch import ematch
from ..frontend import axiom_text, declarations, infer_logic, parse, quote_symbol
from ..preprocess import PreparedAxiom, PreparedProblem, prepare
from .ground import is_eq_atom


class EprExportError(Exception):
    def __init__(self, report: list[str]):
        super().__init__("; ".join(report))
        self.report = report


@dataclass
class EprExport:
    text: str
    report: list[str] = field(default_factory=list)
    instances: int = 0

    @property
    def ok(self) -> bool:
        return not self.report


def formula_violations(f: Formula) -> list[Var]:
    out: list[Var] = []
    for atom in formula_atoms(f):
        for arg in atom.args:
            if arg.is_var:
                continue
            for v in [u.head for u in iter_subterms(arg) if u.is_var]:
                if v not in out:
                    out.append(v)
    return out


def epr_violations(text: str) -> list[str]:
    """Syntactic EPR check of SMT-LIB text: no universal variable below a function symbol."""
    prob = parse(text)
    report = []
    for i, ax in enumerate(prob.axioms):
        bad = formula_violations(ax.body)
        if bad:
            names = ", ".join(v.name for v in bad)
            report.append(f"axiom {i}: variable(s) {names} below a function symbol")
    return report


def _top_equalities(f: Formula) -> list[Term]:
    if isinstance(f, Term):
        return [f] if is_eq_atom(f) else []
    if isinstance(f, And):
        return [e for a in f.args for e in _top_equalities(a)]
    return []


def _binders(variables) -> str:
    return " ".join(f"({quote_symbol(v.name)} {quote_symbol(v.sort.name)})" for v in variables)


def epr_export(problem: Union[Problem, PreparedProblem], force: bool = False) -> EprExport:
    pp = problem if isinstance(problem, PreparedProblem) else prepare(problem)
    prob = pp.problem
    eg = EGraph()
    for t in sorted(pp.initial_terms, key=lambda u: u.id):
        eg.register(t)
    for f in pp.assertions:
        for e in _top_equalities(f):
            eg.assert_eq(e.args[0], e.args[1])

    by_axiom: dict[int, list[PreparedAxiom]] = {}
    for ax in pp.axioms:
        by_axiom.setdefault(ax.index, []).append(ax)

    body: list[str] = []
    report: list[str] = []
    count = 0
    for c in pp.ground_clauses:
        body.append(formula_text(clause_formula(c)))
    for index, original in enumerate(prob.axioms):
        parts = by_axiom.get(index, [])
        if all(not ax.patterns for ax in parts):
            if formula_violations(original.body):
                report.append(f"axiom {index}: no patterns and a variable below a function symbol")
            body.append(axiom_text(original, with_patterns=False))
            continue
        for ax in parts:
            bound = tuple(v for v in ax.variables if v not in ax.free)
            matches = ematch(eg, ax.patterns, bound, candidates=pp.initial_terms) if ax.patterns else [None]
            for m in matches:
                if m is None:
                    clause = ax.clause
                else:
                    sigma = {v: prob.bank.var(v) for v in ax.free}
                    sigma.update(m.subst)
                    clause = apply_subst(prob.bank, ax.clause, sigma)
                f = clause_formula(clause)
                count += m is not None
                if ax.free:
                    bad = formula_violations(f)
                    if bad:
                        report.append(f"{ax.name}: variable(s) {', '.join(v.name for v in bad)} "
                                      "remain below a function symbol after instantiation")
                    body.append(f"(forall ({_binders(ax.free)}) {formula_text(f)})")
                else:
                    body.append(formula_text(f))
    if report and not force:
        raise EprExportError(report)
    lines = [f"(set-logic {infer_logic(prob)})"]
    lines.extend(declarations(prob, extension_marks=False))
    lines.extend(f"(assert {formula_text(f)})" for f in pp.assertions)
    lines.extend(f"(assert {b})" for b in body)
    lines.append("(check-sat)")
    return EprExport("\n".join(lines) + "\n", report, count)
