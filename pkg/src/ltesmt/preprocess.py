"""Bring axioms into flat, linear, pattern-annotated form; Psi-closure."""
from __future__ import annotations

import copy
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .core import (
    BOOL, And, Axiom, Clause, Formula, Literal, Not, Or, Problem, PsiRule, Symbol,
    Term, TermBank, Var, formula_atoms, free_vars, iter_subterms, subterms, substitute,
)


class PreprocessError(Exception):
    pass


class LocalityViolation(PreprocessError):
    """A variable occurs below an uninterpreted symbol that is not an extension symbol."""


class InvalidPattern(PreprocessError):
    pass


# --- clausal form of axiom bodies ------------------------------------------

def _nnf(f: Formula, positive: bool = True):
    if isinstance(f, Term):
        return Literal(f, positive)
    if isinstance(f, Not):
        return _nnf(f.arg, not positive)
    conj = isinstance(f, And) == positive
    parts = [_nnf(a, positive) for a in f.args]
    return ("and" if conj else "or", parts)


def _cnf(n) -> list[list[Literal]]:
    if isinstance(n, Literal):
        return [[n]]
    tag, parts = n
    if tag == "and":
        return [c for p in parts for c in _cnf(p)]
    out: list[list[Literal]] = [[]]
    for p in parts:
        out = [a + b for a in out for b in _cnf(p)]
    return out


def to_clauses(f: Formula) -> list[Clause]:
    """CNF by distribution; duplicate literals and tautologies removed."""
    result = []
    for lits in _cnf(_nnf(f)):
        seen: dict[Literal, None] = {}
        for l in lits:
            seen.setdefault(l)
        if any(l.negate() in seen for l in seen):
            continue
        clause = tuple(seen)
        if clause not in result:
            result.append(clause)
    return result


# --- flattening -------------------------------------------------------------

def _has_vars(t: Term) -> bool:
    return not t.ground


def is_pattern_term(t: Term) -> bool:
    """``f(x1, ..., xn)`` with ``f`` an extension symbol and distinct variables."""
    if not isinstance(t.head, Symbol) or not t.head.extension or not t.args:
        return False
    if not all(a.is_var for a in t.args):
        return False
    return len({a.id for a in t.args}) == len(t.args)


class _Flattener:
    def __init__(self, bank: TermBank, eq_of, variables: Sequence[Var]):
        self.bank = bank
        self.eq_of = eq_of
        self.taken = {v.name for v in variables}
        self.fresh_vars: list[Var] = []
        self.guards: list[Literal] = []
        self.claimed: set[Var] = set()
        self.memo: dict[int, Term] = {}
        self.counter = itertools.count()

    def fresh(self, sort) -> Term:
        while True:
            name = f"_v{next(self.counter)}"
            if name not in self.taken:
                break
        self.taken.add(name)
        v = Var(name, sort)
        self.fresh_vars.append(v)
        return self.bank.mk(v)

    def guard(self, lhs: Term, rhs: Term) -> None:
        atom = self.bank.mk(self.eq_of(lhs.sort), (lhs, rhs))
        self.guards.append(Literal(atom, False))

    def top(self, t: Term) -> Term:
        """Rewrite an atom argument (or the atom itself)."""
        if t.ground or t.is_var:
            return t
        head = t.head
        if head.sort == BOOL:
            return self.bank.mk(head, [self.top(a) for a in t.args])
        return self.term(t)

    def term(self, t: Term) -> Term:
        if t.ground or t.is_var:
            return t
        hit = self.memo.get(t.id)
        if hit is not None:
            return hit
        head = t.head
        if head.extension:
            new_args = []
            for a in t.args:
                if a.is_var:
                    if a.head in self.claimed or a in new_args:
                        v = self.fresh(a.sort)
                        self.guard(a, v)
                    else:
                        v = a
                    self.claimed.add(v.head)
                    new_args.append(v)
                elif a.ground:
                    v = self.fresh(a.sort)
                    self.guard(v, a)
                    self.claimed.add(v.head)
                    new_args.append(v)
                else:
                    inner = self.term(a)
                    v = self.fresh(a.sort)
                    self.guard(v, inner)
                    self.claimed.add(v.head)
                    new_args.append(v)
            r = self.bank.mk(head, new_args)
        elif head.builtin:
            # interpreted base-theory symbol: keep variables below it
            r = self.bank.mk(head, [self.term(a) for a in t.args])
        else:
            bad = [u.head.name for u in iter_subterms(t) if u.is_var]
            raise LocalityViolation(
                f"variable {bad[0]} occurs below {head.name}, which is not an extension symbol "
                f"(declare it with :extension)"
            )
        self.memo[t.id] = r
        return r


def flatten_linearize(bank: TermBank, eq_of, variables: Sequence[Var],
                      clause: Clause) -> tuple[tuple[Var, ...], Clause]:
    """Return ``(variables', clause')`` with ``clause'`` flat and linear.

    Nested extension terms ``f(..t..)`` are replaced by ``f(..z..)`` under a
    guard ``z = t``; a variable already used under another extension term is
    renamed under a guard ``x = y``.  Guards come first, as negative literals.
    ``eq_of(sort)`` returns the equality symbol of a sort.
    """
    fl = _Flattener(bank, eq_of, variables)
    body = [Literal(fl.top(l.atom), l.positive) for l in clause]
    out: dict[Literal, None] = {}
    for l in fl.guards + body:
        out.setdefault(l)
    new_clause = tuple(out)
    occurring = set(free_vars(new_clause))
    new_vars = tuple(v for v in list(variables) + fl.fresh_vars if v in occurring)
    return new_vars, new_clause


def extension_terms_with_vars(clause: Clause) -> list[Term]:
    out: dict[Term, None] = {}
    for l in clause:
        for u in iter_subterms(l.atom):
            if not u.ground and isinstance(u.head, Symbol) and u.head.extension:
                out.setdefault(u)
    return list(out)


def is_flat_linear(clause: Clause) -> bool:
    """Standalone checker for the flat/linear shape produced by flattening."""
    owner: dict[Var, Term] = {}
    for t in extension_terms_with_vars(clause):
        if not is_pattern_term(t):
            return False
        for a in t.args:
            prev = owner.setdefault(a.head, t)
            if prev is not t:
                return False
    # no nesting of variable terms below uninterpreted symbols
    for l in clause:
        for u in iter_subterms(l.atom):
            if u.ground or u.is_var or u.head.sort == BOOL:
                continue
            if not u.head.extension and not u.head.builtin:
                return False
    return True


def extract_patterns(clause: Clause, user_patterns: Optional[Sequence[Term]] = None) -> tuple[Term, ...]:
    computed = extension_terms_with_vars(clause)
    if user_patterns is None:
        return tuple(computed)
    for p in user_patterns:
        if not is_pattern_term(p):
            raise InvalidPattern(f"pattern {p!r} is not a flat extension term f(x1, ..., xn)")
        if p not in computed:
            raise InvalidPattern(f"pattern {p!r} does not occur in the flattened axiom")
    return tuple(user_patterns)


@dataclass
class PreparedAxiom:
    index: int
    variables: tuple[Var, ...]
    clause: Clause
    patterns: tuple[Term, ...]
    clause_index: int = 0
    stage: int = 0
    # variables bound by no pattern; they range over all ground terms of their sort
    free: tuple[Var, ...] = field(init=False)
    same_sort_groups: tuple[tuple[Var, ...], ...] = field(init=False)

    def __post_init__(self) -> None:
        bound = {a.head for p in self.patterns for a in p.args}
        self.free = tuple(v for v in self.variables if v not in bound)
        groups: dict = {}
        for v in self.variables:
            groups.setdefault(v.sort, []).append(v)
        self.same_sort_groups = tuple(tuple(g) for g in groups.values() if len(g) > 1)

    @property
    def epr(self) -> bool:
        """No variable occurs below any function symbol."""
        for l in self.clause:
            for a in l.atom.args:
                if not a.is_var and not a.ground:
                    return False
        return True

    @property
    def name(self) -> str:
        return f"K{self.index}" if self.clause_index == 0 else f"K{self.index}.{self.clause_index}"


def prepare_axiom(problem: Problem, axiom: Axiom, index: int) -> tuple[list[PreparedAxiom], list[Clause]]:
    """Flattened clauses of ``axiom``; ground clauses are returned separately."""
    bank, sig = problem.bank, problem.signature
    prepared: list[PreparedAxiom] = []
    ground: list[Clause] = []
    clauses = to_clauses(axiom.body)
    used_user: set[Term] = set()
    for ci, clause in enumerate(clauses):
        variables = [v for v in axiom.variables if v in set(free_vars(clause))]
        if not variables:
            ground.append(clause)
            continue
        new_vars, flat = flatten_linearize(bank, sig.eq, variables, clause)
        user = None
        if axiom.patterns is not None:
            computed = extension_terms_with_vars(flat)
            user = [p for p in axiom.patterns if p in computed]
            used_user.update(user)
        pats = extract_patterns(flat, user)
        prepared.append(PreparedAxiom(index, new_vars, flat, pats, clause_index=len(prepared)))
    if axiom.patterns is not None:
        for p in axiom.patterns:
            if not is_pattern_term(p):
                raise InvalidPattern(f"pattern {p!r} is not a flat extension term f(x1, ..., xn)")
            if p not in used_user:
                raise InvalidPattern(f"pattern {p!r} does not occur in the flattened axiom")
    return prepared, ground


# --- Psi-closure ------------------------------------------------------------

def psi_closure(bank: TermBank, ground_terms: Iterable[Term], rules: Sequence[PsiRule]) -> set[Term]:
    """One application of the Psi rules to ``ground_terms``.

    A rule ``T[x]`` contributes ``T[t]`` for each sort-compatible ``t`` whose
    proper subterms of ``T[t]`` are already present, so only the outermost
    term is new (``g(f(x))`` yields ``g(f(a))`` exactly when ``f(a)`` exists).
    """
    base = set(ground_terms)
    out = set(base)
    for rule in rules:
        for t in sorted(base, key=lambda u: u.id):
            if t.sort != rule.var.sort:
                continue
            inst = substitute(bank, rule.template, {rule.var: t})
            if inst in base:
                continue
            if all(a in base for a in inst.args):
                out.add(inst)
    return out


def instclosure_symbol(problem: Problem, sort) -> Symbol:
    name = f"instclosure_{sort.name}"
    sym = problem.signature.symbols.get(name)
    if sym is not None and sym.arg_sorts == (sort,) and sym.sort == BOOL:
        return sym
    k = 0
    while name in problem.signature.symbols:
        k += 1
        name = f"instclosure_{sort.name}_{k}"
    return problem.signature.declare_fun(name, (sort,), BOOL)


def inject_closure_witnesses(problem: Problem, psi_terms: Iterable[Term]) -> Problem:
    """Copy of ``problem`` asserting ``instclosure(t)`` for every new Psi term."""
    existing = subterms(list(problem.assertions) + list(problem.axioms))
    new_terms = sorted((t for t in psi_terms if t not in existing), key=lambda t: t.id)
    out = copy.copy(problem)
    out.signature = copy.copy(problem.signature)
    out.signature.symbols = dict(problem.signature.symbols)
    out.assertions = list(problem.assertions)
    stage_one = set(problem.stage_one)
    for t in new_terms:
        pred = instclosure_symbol(out, t.sort)
        out.assertions.append(problem.bank.mk(pred, (t,)))
        stage_one.update(u for u in iter_subterms(t) if u not in existing)
    out.stage_one = frozenset(stage_one)
    return out


# --- whole problem -----------------------------------------------------------

@dataclass
class PreparedProblem:
    problem: Problem
    axioms: list[PreparedAxiom]
    ground_clauses: list[Clause]
    initial_terms: frozenset[Term]
    stage_one: frozenset[Term]

    @property
    def bank(self) -> TermBank:
        return self.problem.bank

    @property
    def assertions(self) -> list[Formula]:
        return self.problem.assertions


def prepare(problem: Problem) -> PreparedProblem:
    """Flatten axioms, compute Psi witnesses, collect the initial term set."""
    prepared: list[PreparedAxiom] = []
    ground: list[Clause] = []
    for i, ax in enumerate(problem.axioms):
        p, g = prepare_axiom(problem, ax, i)
        prepared.extend(p)
        ground.extend(g)
    if problem.psi_rules:
        st = subterms(list(problem.assertions) + ground + [a.clause for a in prepared])
        problem = inject_closure_witnesses(problem, psi_closure(problem.bank, st, problem.psi_rules))
    initial = subterms(list(problem.assertions) + ground + [a.clause for a in prepared])
    return PreparedProblem(problem, prepared, ground, frozenset(initial), problem.stage_one)
