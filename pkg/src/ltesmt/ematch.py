"""E-matching of flat patterns ``f(x1, ..., xn)`` modulo an e-graph.

Results are unique up to the equivalence of substitutions: two
substitutions are identified when their images are pairwise congruent, so
each result is keyed by the tuple of class representatives of its images.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .core import BOOL, Term, Var, free_vars
from .egraph import EGraph


class PatternError(Exception):
    pass


@dataclass(frozen=True)
class MatchResult:
    variables: tuple[Var, ...]
    images: tuple[Term, ...]
    key: tuple[int, ...]
    stage: int = 0

    @property
    def subst(self) -> dict[Var, Term]:
        return dict(zip(self.variables, self.images))


def _check_flat(p: Term) -> None:
    if p.ground or not p.args or not all(a.is_var for a in p.args):
        raise PatternError(f"pattern {p!r} is not of the form f(x1, ..., xn)")


def _order_vars(patterns: Sequence[Term], variables: Optional[Sequence[Var]]) -> tuple[Var, ...]:
    if variables is not None:
        return tuple(variables)
    out: dict[Var, None] = {}
    for p in patterns:
        for v in free_vars(p):
            out.setdefault(v)
    return tuple(out)


TermFilter = Callable[[Term], bool]


def _domain(eg: EGraph, sort, allowed: TermFilter) -> list[Term]:
    """One registered term per class of ``sort``, the lowest admissible id."""
    seen: set[int] = set()
    out = []
    for t in eg.registered():
        if t.sort != sort or not allowed(t):
            continue
        r = eg.find_id(t)
        if r not in seen:
            seen.add(r)
            out.append(t)
    return out


def ematch(eg: EGraph, patterns: Sequence[Term], variables: Optional[Sequence[Var]] = None,
           stage_limit: int = 1, stage_one: Iterable[Term] = frozenset(),
           candidates: Optional[Iterable[Term]] = None) -> list[MatchResult]:
    """All substitutions, modulo the e-graph, making every pattern congruent
    to a registered application.

    ``variables`` fixes the key order and may include variables bound by no
    pattern; those range over one term per class of their sort.
    ``candidates`` restricts anchors and free-variable images (default: all
    registered terms).  With ``stage_limit`` 0 no term in ``stage_one`` is
    used as an anchor or image.
    """
    for p in patterns:
        _check_flat(p)
    variables = _order_vars(patterns, variables)
    stage_one = frozenset(stage_one)
    cand = None if candidates is None else frozenset(candidates)

    def allowed(t: Term) -> bool:
        if cand is not None and t not in cand:
            return False
        return stage_limit >= 1 or t not in stage_one

    find = eg.find_id
    # partial results: var -> image, plus the stage flag
    partial: list[tuple[dict[Var, Term], int]] = [({}, 0)]
    for p in patterns:
        anchors = [a for a in eg.apps_of(p.head) if allowed(a) and all(allowed(x) for x in a.args)]
        # stage-0 anchors first so that the surviving representative is stage 0 when possible
        anchors.sort(key=lambda a: (a in stage_one or any(x in stage_one for x in a.args), a.id))
        grouped: dict[tuple[int, ...], tuple[Term, int]] = {}
        for a in anchors:
            k = tuple(find(x) for x in a.args)
            if k not in grouped:
                st = 1 if (a in stage_one or any(x in stage_one for x in a.args)) else 0
                grouped[k] = (a, st)
        extended = []
        seen_keys: set = set()
        for binding, stage in partial:
            for a, st in grouped.values():
                new = dict(binding)
                ok = True
                for pv, arg in zip(p.args, a.args):
                    v = pv.head
                    prev = new.get(v)
                    if prev is None:
                        new[v] = arg
                    elif find(prev) != find(arg):
                        ok = False
                        break
                if not ok:
                    continue
                k = tuple(sorted((v.name, find(t)) for v, t in new.items()))
                if k in seen_keys:
                    continue
                seen_keys.add(k)
                extended.append((new, max(stage, st)))
        partial = extended
        if not partial:
            return []
    bound = {a.head for p in patterns for a in p.args}
    unbound = [v for v in variables if v not in bound]
    domains = [_domain(eg, v.sort, allowed) for v in unbound]
    results: list[MatchResult] = []
    seen: set[tuple[int, ...]] = set()
    for binding, stage in partial:
        for combo in itertools.product(*domains):
            full = dict(binding)
            full.update(zip(unbound, combo))
            st = stage or int(any(t in stage_one for t in combo))
            images = tuple(full[v] for v in variables)
            key = tuple(find(t) for t in images)
            if key in seen:
                continue
            seen.add(key)
            results.append(MatchResult(variables, images, key, st))
    return results


def bf_match_oracle(eg: EGraph, patterns: Sequence[Term], variables: Optional[Sequence[Var]] = None,
                    stage_limit: int = 1, stage_one: Iterable[Term] = frozenset()) -> set[tuple[int, ...]]:
    """Brute force over every assignment of registered terms to the variables.

    An assignment matches when each instantiated pattern is congruent to an
    admissible registered application, i.e. the arguments are pairwise in
    the same classes.  Returns the keys; shares no code with :func:`ematch`.
    """
    variables = _order_vars(patterns, variables)
    stage_one = frozenset(stage_one)

    def allowed(t: Term) -> bool:
        return stage_limit >= 1 or t not in stage_one

    terms = [t for t in eg.registered() if t.sort != BOOL and allowed(t)]
    by_sort = {v: [t for t in terms if t.sort == v.sort] for v in variables}
    witnesses = {p.head: [w for w in eg.apps_of(p.head) if allowed(w) and all(allowed(x) for x in w.args)]
                 for p in patterns}
    keys: set[tuple[int, ...]] = set()
    for combo in itertools.product(*(by_sort[v] for v in variables)):
        sigma = dict(zip(variables, combo))
        if all(any(all(eg.are_equal(sigma[a.head], x) for a, x in zip(p.args, w.args))
                   for w in witnesses[p.head])
               for p in patterns):
            keys.add(tuple(eg.find_id(t) for t in combo))
    return keys
