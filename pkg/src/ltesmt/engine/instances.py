"""Axiom instances: the incremental round, the eager set, and its size."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

from ..core import BOOL, Clause, Term, Var, apply_subst, iter_subterms
from ..egraph import EGraph
from ..ematch import ematch
from ..preprocess import PreparedAxiom, PreparedProblem


class InvariantViolation(AssertionError):
    pass


@dataclass(frozen=True)
class Instance:
    axiom: int                       # position in PreparedProblem.axioms
    variables: tuple[Var, ...]
    images: tuple[Term, ...]
    key: tuple[int, ...]             # class representatives when generated
    clause: Clause
    round: int = 0
    special: bool = False
    stage: int = 0

    @property
    def subst(self) -> dict[Var, Term]:
        return dict(zip(self.variables, self.images))


@dataclass
class InstanceCache:
    """Every instance generated so far; never shrinks during a solve."""

    by_axiom: dict[int, list[Instance]] = field(default_factory=dict)
    # (axiom, stage limit) -> (e-graph generation, matches); a generation
    # number is never reused, so a hit means the same e-graph state
    matches: dict = field(default_factory=dict)

    def add(self, inst: Instance) -> None:
        self.by_axiom.setdefault(inst.axiom, []).append(inst)

    def keys_now(self, axiom: int, eg: EGraph) -> set[tuple[int, ...]]:
        return {eg.canonical_key(i.images) for i in self.by_axiom.get(axiom, ())}

    def __iter__(self) -> Iterator[Instance]:
        for insts in self.by_axiom.values():
            yield from insts

    def __len__(self) -> int:
        return sum(len(v) for v in self.by_axiom.values())


def _identified(ax: PreparedAxiom, subst: dict[Var, Term], eg: EGraph) -> bool:
    """All variables of each same-sort group are mapped into one class."""
    for group in ax.same_sort_groups:
        if len({eg.find_id(subst[v]) for v in group}) > 1:
            return False
    return True


def check_no_new_terms(pp: PreparedProblem, clause: Clause) -> None:
    for l in clause:
        for u in iter_subterms(l.atom):
            if u.sort == BOOL or u in pp.initial_terms:
                continue
            if u.head.builtin and u.head.is_arith:
                continue    # flattening guards such as z = x + 1
            raise InvariantViolation(f"instance introduces new term {u!r}")


def d_t1_round(pp: PreparedProblem, cache: InstanceCache, eg: EGraph, stage_limit: int = 1,
               round_no: int = 0, special: bool = False) -> list[Instance]:
    """One instantiation round against the current model's e-graph.

    A match is new when its key differs from the current keys of all cached
    instances of the same axiom.  With ``special`` set, axioms having several
    variables of one sort only yield matches that identify those variables.
    """
    out: list[Instance] = []
    for pos, ax in enumerate(pp.axioms):
        if ax.stage > stage_limit:
            continue
        stamp = cache.matches.get((pos, stage_limit))
        if stamp is not None and stamp[0] == eg.generation:
            matches = stamp[1]
        else:
            matches = ematch(eg, ax.patterns, ax.variables, stage_limit, pp.stage_one,
                             candidates=pp.initial_terms)
            cache.matches[(pos, stage_limit)] = (eg.generation, matches)
        if not matches:
            continue
        known = cache.keys_now(pos, eg)
        for m in matches:
            if m.key in known:
                continue
            if special and ax.same_sort_groups and not _identified(ax, m.subst, eg):
                continue
            known.add(m.key)
            clause = apply_subst(pp.bank, ax.clause, m.subst)
            check_no_new_terms(pp, clause)
            inst = Instance(pos, ax.variables, m.images, m.key, clause, round_no,
                            special and bool(ax.same_sort_groups), m.stage)
            cache.add(inst)
            out.append(inst)
    return out


def _anchor_table(pp: PreparedProblem) -> dict:
    table: dict = {}
    for t in sorted(pp.initial_terms, key=lambda u: u.id):
        if t.args:
            table.setdefault(t.head, []).append(t)
    return table


def _sort_table(pp: PreparedProblem) -> dict:
    table: dict = {}
    for t in sorted(pp.initial_terms, key=lambda u: u.id):
        table.setdefault(t.sort, []).append(t)
    return table


def _axiom_bound(ax: PreparedAxiom, anchors: dict, by_sort: dict) -> int:
    n = math.prod(len(anchors.get(p.head, ())) for p in ax.patterns)
    return n * math.prod(len(by_sort.get(v.sort, ())) for v in ax.free)


def eager_bound(pp: PreparedProblem) -> int:
    """Number of local instances: anchor tuples times free-variable domains."""
    anchors, by_sort = _anchor_table(pp), _sort_table(pp)
    return sum(_axiom_bound(ax, anchors, by_sort) for ax in pp.axioms)


def eager_instances(pp: PreparedProblem, limit: Optional[int] = None) -> list[Instance]:
    """All instances whose pattern terms are existing ground terms."""
    anchors, by_sort = _anchor_table(pp), _sort_table(pp)
    out: list[Instance] = []
    for pos, ax in enumerate(pp.axioms):
        choices = [anchors.get(p.head, []) for p in ax.patterns]
        choices += [by_sort.get(v.sort, []) for v in ax.free]
        for combo in itertools.product(*choices):
            subst: dict[Var, Term] = {}
            for p, a in zip(ax.patterns, combo):
                for x, t in zip(p.args, a.args):
                    subst[x.head] = t
            subst.update(zip(ax.free, combo[len(ax.patterns):]))
            images = tuple(subst[v] for v in ax.variables)
            clause = apply_subst(pp.bank, ax.clause, subst)
            check_no_new_terms(pp, clause)
            out.append(Instance(pos, ax.variables, images, tuple(t.id for t in images), clause))
            if limit is not None and len(out) > limit:
                raise InvariantViolation(f"more than {limit} eager instances")
    return out
