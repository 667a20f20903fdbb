"""Reference implementations used only by the tests.

They are deliberately naive and share no code with the package beyond the
term representation: fixpoint congruence closure over explicit term sets,
plain enumeration of local instances, and a backtracking search over atom
assignments checked with that closure.
"""
from __future__ import annotations

import itertools
import random
from typing import Iterable, Optional

from ltesmt.core import BOOL, And, Not, Or, Term, Var, formula_atoms, iter_subterms, substitute


# --- congruence closure --------------------------------------------------------

def naive_closure(terms: Iterable[Term], equalities: Iterable[tuple[Term, Term]]) -> dict[Term, int]:
    """Class label per term: least relation containing ``equalities`` and
    closed under congruence, restricted to ``terms`` (which must be subterm-closed)."""
    terms = list(terms)
    label = {t: i for i, t in enumerate(terms)}

    def relabel(a: int, b: int) -> None:
        for t, l in label.items():
            if l == b:
                label[t] = a

    for s, t in equalities:
        if label[s] != label[t]:
            relabel(label[s], label[t])
    changed = True
    while changed:
        changed = False
        for s, t in itertools.combinations(terms, 2):
            if label[s] == label[t] or s.head is not t.head or not s.args:
                continue
            if all(label[x] == label[y] for x, y in zip(s.args, t.args)):
                relabel(label[s], label[t])
                changed = True
    return label


def closure_conflict(terms, equalities, disequalities) -> bool:
    label = naive_closure(terms, equalities)
    if any(label[s] == label[t] for s, t in disequalities):
        return True
    # interpreted constants (numerals, true/false) are pairwise distinct
    values: dict[int, object] = {}
    for t in label:
        v = getattr(t.head, "value", None)
        if v is None or t.args:
            continue
        if values.setdefault(label[t], v) != v:
            return True
    return False


def subterm_closure(roots: Iterable[Term]) -> list[Term]:
    out: dict[Term, None] = {}
    for r in roots:
        for u in iter_subterms(r):
            out.setdefault(u)
    return list(out)


# --- local instances ---------------------------------------------------------------

def local_instances(pp) -> list[tuple[int, tuple[Term, ...]]]:
    """Every substitution over the ground terms of matching sort whose
    instance creates no ground term outside the initial set (arithmetic
    excepted); returned as ``(axiom position, images)``."""
    terms = sorted(pp.initial_terms, key=lambda t: t.id)
    out = []
    for pos, ax in enumerate(pp.axioms):
        domains = [[t for t in terms if t.sort == v.sort] for v in ax.variables]
        for combo in itertools.product(*domains):
            sigma = dict(zip(ax.variables, combo))
            ok = True
            for l in ax.clause:
                inst = substitute(pp.bank, l.atom, sigma)
                for u in iter_subterms(inst):
                    if u.sort == BOOL or u in pp.initial_terms:
                        continue
                    if getattr(u.head, "builtin", False) and u.head.name in ("+", "-", "*"):
                        continue
                    ok = False
                    break
                if not ok:
                    break
            if ok:
                out.append((pos, combo))
    return out


def instance_clauses(pp, instances) -> list[tuple]:
    from ltesmt.core import apply_subst
    return [apply_subst(pp.bank, pp.axioms[pos].clause, dict(zip(pp.axioms[pos].variables, imgs)))
            for pos, imgs in instances]


# --- ground satisfiability -------------------------------------------------------------

def _is_eq(t: Term) -> bool:
    return t.head.name == "=" and getattr(t.head, "builtin", False) and len(t.args) == 2


def _eval(f, assign: dict[Term, bool]) -> Optional[bool]:
    if isinstance(f, Term):
        return assign.get(f)
    if isinstance(f, Not):
        v = _eval(f.arg, assign)
        return None if v is None else not v
    vals = [_eval(a, assign) for a in f.args]
    if isinstance(f, And):
        if False in vals:
            return False
        return None if None in vals else True
    if True in vals:
        return True
    return None if None in vals else False


def _consistent(terms: list[Term], assign: dict[Term, bool]) -> bool:
    eqs = [a.args for a, v in assign.items() if v and _is_eq(a)]
    neqs = [a.args for a, v in assign.items() if not v and _is_eq(a)]
    label = naive_closure(terms, eqs)
    if any(label[s] == label[t] for s, t in neqs):
        return False
    values: dict[int, object] = {}
    for t in terms:
        v = getattr(t.head, "value", None)
        if v is not None and not t.args and values.setdefault(label[t], v) != v:
            return False
    # predicate atoms over congruent arguments must agree
    seen: dict[tuple, bool] = {}
    for a, v in assign.items():
        if _is_eq(a):
            continue
        key = (id(a.head), tuple(label[x] for x in a.args))
        if seen.setdefault(key, v) != v:
            return False
    return True


def brute_sat(formulas: list, extra_terms: Iterable[Term] = ()) -> bool:
    """Exhaustive search over truth assignments of all atoms, pruned by
    partial evaluation and checked with naive congruence closure."""
    atoms: dict[Term, None] = {}
    for f in formulas:
        for a in formula_atoms(f):
            atoms.setdefault(a)
    order = list(atoms)
    terms = subterm_closure([x for a in order for x in a.args] + list(extra_terms))

    def propagate(assign: dict[Term, bool], forced: list[Term]) -> bool:
        changed = True
        while changed:
            changed = False
            for f in formulas:
                v = _eval(f, assign)
                if v is False:
                    return False
                if v is True:
                    continue
                for a in set(formula_atoms(f)):
                    if a in assign:
                        continue
                    for guess in (True, False):
                        assign[a] = guess
                        bad = _eval(f, assign) is False
                        del assign[a]
                        if bad:
                            assign[a] = not guess
                            forced.append(a)
                            changed = True
                            break
                    if changed:
                        break
        return True

    def search(assign: dict[Term, bool]) -> bool:
        forced: list[Term] = []
        ok = propagate(assign, forced) and _consistent(terms, assign)
        if ok:
            free = [a for a in order if a not in assign]
            if not free:
                return True
            for v in (True, False):
                assign[free[0]] = v
                if search(assign):
                    return True
                del assign[free[0]]
        for a in forced:
            del assign[a]
        return False

    return search({})


def clause_as_formula(clause):
    return Or(tuple(l.atom if l.positive else Not(l.atom) for l in clause))


def oracle_verdict(pp) -> str:
    """Ground check of assertions, ground axiom clauses and all local instances."""
    formulas = list(pp.assertions) + [clause_as_formula(c) for c in pp.ground_clauses]
    formulas += [clause_as_formula(c) for c in instance_clauses(pp, local_instances(pp))]
    return "sat" if brute_sat(formulas, pp.initial_terms) else "unsat"


# --- random problems ----------------------------------------------------------------

AXIOM_POOL = {
    "inj": "(forall ((x S) (y S)) (=> (= (f x) (f y)) (= x y)))",
    "idem": "(forall ((x S)) (= (f (f x)) (f x)))",
    "inv": "(forall ((x S) (y S)) (=> (= (f x) y) (= (g y) x)))",
    "invol": "(forall ((x S)) (= (g (g x)) x))",
    "pmono": "(forall ((x S)) (=> (p x) (p (f x))))",
    "epr": "(forall ((x S)) (or (= x c0) (p x)))",
    "fix": "(forall ((x S)) (or (= (f x) x) (= (f x) c0)))",
    "ginj": "(forall ((x S) (y S)) (=> (= (g x) (g y)) (= x y)))",
}


def random_problem_text(rng: random.Random) -> str:
    """A small EUF problem: at most five constants, the extension symbols
    ``f`` and ``g``, and at most two axioms from :data:`AXIOM_POOL`."""
    k = rng.randint(2, 5)
    consts = [f"c{i}" for i in range(k)]
    axioms = rng.sample(sorted(AXIOM_POOL), rng.randint(1, 2))
    uses_g = any("(g" in AXIOM_POOL[a] for a in axioms) or rng.random() < 0.3
    funs = ["f", "g"] if uses_g else ["f"]

    def term(depth: int) -> str:
        if depth == 0 or rng.random() < 0.5:
            return rng.choice(consts)
        return f"({rng.choice(funs)} {term(depth - 1)})"

    def atom() -> str:
        if rng.random() < 0.2:
            return f"(p {term(1)})"
        return f"(= {term(2)} {term(2)})"

    def literal() -> str:
        a = atom()
        return f"(not {a})" if rng.random() < 0.4 else a

    lines = ["(declare-sort S 0)"]
    lines += [f"(declare-const {c} S)" for c in consts]
    lines += [f"(declare-fun {s} (S) S :extension)" for s in funs]
    lines.append("(declare-fun p (S) Bool)")
    if "inv" in axioms and rng.random() < 0.5:
        lines.append("(declare-psi-rule ((x S)) (g (f x)))")
    for _ in range(rng.randint(2, 5)):
        if rng.random() < 0.3:
            lines.append(f"(assert (or {literal()} {literal()}))")
        else:
            lines.append(f"(assert {literal()})")
    lines += [f"(assert {AXIOM_POOL[a]})" for a in axioms]
    return "\n".join(lines) + "\n"
