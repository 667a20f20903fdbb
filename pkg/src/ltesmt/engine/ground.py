"""Ground DPLL over EUF.

Chronological backtracking (no clause learning), two-watched-literal unit
propagation, and the e-graph as theory checker at every decision level.
Arithmetic symbols are treated as uninterpreted here (numerals stay pairwise
distinct), which over-approximates the integer models: an UNSAT answer is
final, a SAT answer with arithmetic atoms has to be confirmed elsewhere.
"""
from __future__ import annotations

import time
from typing import Iterable, Optional

from ..core import BOOL, And, Clause, Formula, Literal, Not, Or, Signature, Term, TermBank
from ..egraph import EGraph


class SolverTimeout(Exception):
    pass


def is_eq_atom(t: Term) -> bool:
    return t.head.builtin and t.head.name == "=" and t.head.sort == BOOL


class GroundSolver:
    def __init__(self, bank: TermBank, signature: Signature) -> None:
        self.bank = bank
        self.eg = EGraph()
        self.true_term = bank.mk(signature.true)
        self.false_term = bank.mk(signature.false)
        self.eg.register(self.true_term)
        self.eg.register(self.false_term)
        self.atoms: list[Optional[Term]] = [None]     # index 0 unused; None marks an auxiliary atom
        self._atom_of: dict[int, int] = {}
        self.clauses: list[list[int]] = []
        self._clause_set: set[tuple[int, ...]] = set()
        self.watches: dict[int, list[int]] = {}
        self.units: list[int] = []
        self.empty = False
        self.priority: list[int] = []
        self._aux_cache: dict = {}
        self.val: list[Optional[bool]] = [None]
        self.trail: list[int] = []
        self.qhead = 0
        self.level_starts: list[int] = []
        self._base_scope = False
        self._theory_gen = -1
        self.decisions = 0

    # -- atoms and clauses ------------------------------------------------

    def atom(self, t: Term) -> int:
        a = self._atom_of.get(t.id)
        if a is not None:
            return a
        self._to_base()
        if is_eq_atom(t):
            for x in t.args:
                self.eg.register(x)
        else:
            self.eg.register(t)
        a = len(self.atoms)
        self.atoms.append(t)
        self.val.append(None)
        self._atom_of[t.id] = a
        return a

    def aux(self) -> int:
        a = len(self.atoms)
        self.atoms.append(None)
        self.val.append(None)
        return a

    def lit(self, l: Literal) -> int:
        a = self.atom(l.atom)
        return a if l.positive else -a

    def register(self, t: Term) -> None:
        self._to_base()
        self.eg.register(t)

    def add_clause(self, lits: Iterable[int]) -> None:
        self._to_base()
        seen: dict[int, None] = {}
        for l in lits:
            seen.setdefault(l)
        if any(-l in seen for l in seen):
            return
        c = list(seen)
        key = tuple(sorted(c))
        if key in self._clause_set:
            return
        self._clause_set.add(key)
        if not c:
            self.empty = True
        elif len(c) == 1:
            self.units.append(c[0])
        else:
            ci = len(self.clauses)
            self.clauses.append(c)
            self.watches.setdefault(c[0], []).append(ci)
            self.watches.setdefault(c[1], []).append(ci)

    def add_ground_clause(self, clause: Clause) -> None:
        self.add_clause(self.lit(l) for l in clause)

    def add_formula(self, f: Formula) -> None:
        """Clausify a ground formula; auxiliary atoms only for nested structure."""
        if isinstance(f, And):
            for a in f.args:
                self.add_formula(a)
        elif isinstance(f, Or):
            self.add_clause(self._lit_of(a) for a in f.args)
        elif isinstance(f, Not) and isinstance(f.arg, Not):
            self.add_formula(f.arg.arg)
        elif isinstance(f, Not) and isinstance(f.arg, Or):
            for a in f.arg.args:
                self.add_formula(Not(a))
        elif isinstance(f, Not) and isinstance(f.arg, And):
            self.add_clause(-self._lit_of(a) for a in f.arg.args)
        else:
            self.add_clause([self._lit_of(f)])

    def _lit_of(self, f: Formula) -> int:
        if isinstance(f, Term):
            return self.atom(f)
        if isinstance(f, Not):
            return -self._lit_of(f.arg)
        cached = self._aux_cache.get(f)
        if cached is not None:
            return cached
        parts = [self._lit_of(a) for a in f.args]
        x = self.aux()
        if isinstance(f, And):
            for p in parts:
                self.add_clause([-x, p])
            self.add_clause([x] + [-p for p in parts])
        else:
            self.add_clause([-x] + parts)
            for p in parts:
                self.add_clause([x, -p])
        self._aux_cache[f] = x
        return x

    def prefer(self, atom: int) -> None:
        """Decide ``atom`` before the default order, positive polarity first."""
        if atom not in self.priority:
            self.priority.append(atom)

    # -- assignment -------------------------------------------------------

    def value(self, lit: int) -> Optional[bool]:
        v = self.val[abs(lit)]
        if v is None:
            return None
        return v if lit > 0 else not v

    def _enqueue(self, lit: int) -> None:
        self.val[abs(lit)] = lit > 0
        self.trail.append(lit)

    def _theory_assert(self, lit: int) -> bool:
        t = self.atoms[abs(lit)]
        if t is None:
            return True
        eg = self.eg
        if is_eq_atom(t):
            if lit > 0:
                return eg.assert_eq(t.args[0], t.args[1])
            return eg.assert_diseq(t.args[0], t.args[1])
        return eg.assert_eq(t, self.true_term if lit > 0 else self.false_term)

    def _bcp(self, lit: int) -> bool:
        false_lit = -lit
        ws = self.watches.get(false_lit)
        if not ws:
            return True
        keep: list[int] = []
        conflict = False
        clauses = self.clauses
        value = self.value
        for ci in ws:
            if conflict:
                keep.append(ci)
                continue
            c = clauses[ci]
            if c[0] == false_lit:
                c[0], c[1] = c[1], c[0]
            if value(c[0]) is True:
                keep.append(ci)
                continue
            moved = False
            for k in range(2, len(c)):
                if value(c[k]) is not False:
                    c[1], c[k] = c[k], c[1]
                    self.watches.setdefault(c[1], []).append(ci)
                    moved = True
                    break
            if moved:
                continue
            keep.append(ci)
            v0 = value(c[0])
            if v0 is False:
                conflict = True
            elif v0 is None:
                self._enqueue(c[0])
        self.watches[false_lit] = keep
        return not conflict

    def _theory_propagate(self) -> bool:
        """Imply unassigned atoms already decided by congruence; True if any."""
        eg = self.eg
        if eg.generation == self._theory_gen:
            return False
        self._theory_gen = eg.generation
        implied = False
        find = eg.find_id
        t_root, f_root = find(self.true_term), find(self.false_term)
        for a in range(1, len(self.atoms)):
            if self.val[a] is not None:
                continue
            t = self.atoms[a]
            if t is None:
                continue
            if is_eq_atom(t):
                if find(t.args[0]) == find(t.args[1]):
                    self._enqueue(a)
                    implied = True
            else:
                r = find(t)
                if r == t_root:
                    self._enqueue(a)
                    implied = True
                elif r == f_root:
                    self._enqueue(-a)
                    implied = True
        return implied

    def _propagate(self) -> bool:
        while True:
            while self.qhead < len(self.trail):
                lit = self.trail[self.qhead]
                self.qhead += 1
                if not self._theory_assert(lit):
                    return False
                if not self._bcp(lit):
                    return False
            if not self._theory_propagate():
                return True

    def _new_level(self) -> None:
        self.level_starts.append(len(self.trail))
        self.eg.push()

    def _pop_level(self) -> None:
        start = self.level_starts.pop()
        for lit in self.trail[start:]:
            self.val[abs(lit)] = None
        del self.trail[start:]
        self.qhead = len(self.trail)
        self.eg.pop()
        self._theory_gen = -1

    def _to_base(self) -> None:
        while self.level_starts:
            self._pop_level()
        for lit in self.trail:
            self.val[abs(lit)] = None
        self.trail.clear()
        self.qhead = 0
        if self._base_scope:
            self.eg.pop()
            self._base_scope = False
        self._theory_gen = -1

    reset = _to_base

    def _pick(self) -> Optional[int]:
        for a in self.priority:
            if self.val[a] is None:
                return a
        for a in range(1, len(self.atoms)):
            if self.val[a] is None:
                return a
        return None

    # -- search -----------------------------------------------------------

    def solve(self, deadline: Optional[float] = None) -> bool:
        """Search from scratch; on True the e-graph holds the model's equalities."""
        self._to_base()
        if self.empty:
            return False
        self.eg.push()
        self._base_scope = True
        for u in self.units:
            v = self.value(u)
            if v is False:
                return False
            if v is None:
                self._enqueue(u)
        if not self._propagate():
            return False
        stack: list[list] = []
        while True:
            a = self._pick()
            if a is None:
                return True
            self.decisions += 1
            if deadline is not None and self.decisions % 64 == 0 and time.monotonic() > deadline:
                raise SolverTimeout()
            self._new_level()
            stack.append([a, False])
            self._enqueue(a)
            while not self._propagate():
                while stack and stack[-1][1]:
                    self._pop_level()
                    stack.pop()
                if not stack:
                    return False
                lit = stack.pop()[0]
                self._pop_level()
                self._new_level()
                stack.append([-lit, True])
                self._enqueue(-lit)

    def load_assignment(self, values: dict[Term, bool]) -> bool:
        """Install an externally found assignment of theory atoms."""
        self._to_base()
        self.eg.push()
        self._base_scope = True
        for t, v in values.items():
            a = self.atom(t) if t.id in self._atom_of else None
            if a is None:
                continue
            self._enqueue(a if v else -a)
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            if not self._theory_assert(lit):
                return False
        return True

    def model_literals(self) -> list[Literal]:
        out = []
        for a in range(1, len(self.atoms)):
            t = self.atoms[a]
            if t is not None and self.val[a] is not None:
                out.append(Literal(t, self.val[a]))
        return out

    def theory_atoms(self) -> list[Term]:
        return [t for t in self.atoms[1:] if t is not None]
