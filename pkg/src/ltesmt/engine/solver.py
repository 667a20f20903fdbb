"""The saturation loop and the strategy layer."""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

from ..core import INT, Clause, Literal, Problem, Term, clause_formula, formula_atoms, formula_text, iter_subterms
from ..frontend import declarations, infer_logic
from ..preprocess import PreparedProblem, prepare
from .backend import BackendError, ExternalBackend
from .ground import GroundSolver, SolverTimeout
from .instances import (
    Instance, InstanceCache, InvariantViolation, check_no_new_terms, d_t1_round, eager_bound,
    eager_instances,
)

MODES = ("eager", "ematch", "ematch-opt")

SplitSpec = Union[None, str, Sequence[tuple]]


class StrategyError(ValueError):
    pass


@dataclass
class Strategy:
    """Solver configuration.

    ``mode`` is ``eager`` (all local instances up front), ``ematch``
    (incremental rounds) or ``ematch-opt`` (incremental with staged Psi
    terms, special-case rounds and automatic equality splits).
    ``eq_split`` is ``None``, ``"auto"`` or a sequence of term or
    constant-name pairs.  ``backend`` is a command line for an external
    solver that decides arithmetic.
    """

    mode: str = "ematch"
    stage_psi: bool = False
    eq_split: SplitSpec = None
    special_case: bool = False
    backend: Union[None, str, ExternalBackend] = None
    timeout_ms: Optional[int] = None
    check_invariants: bool = True

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise StrategyError(f"unknown mode {self.mode!r} (expected one of {', '.join(MODES)})")

    @property
    def staged(self) -> bool:
        return self.stage_psi or self.mode == "ematch-opt"

    @property
    def special(self) -> bool:
        return self.special_case or self.mode == "ematch-opt"

    @property
    def split(self) -> SplitSpec:
        if self.eq_split is None and self.mode == "ematch-opt":
            return "auto"
        return self.eq_split


@dataclass
class Stats:
    instances: int = 0
    special_instances: int = 0
    stage_one_instances: int = 0
    rounds: int = 0
    ground_checks: int = 0
    backend_calls: int = 0
    eager_bound: int = 0
    wall_ms: float = 0.0

    def as_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            del d["wall_ms"]
        return d


@dataclass
class Verdict:
    status: str                      # sat | unsat | unknown
    reason: str = ""
    stats: Stats = field(default_factory=Stats)
    instances: list[Instance] = field(default_factory=list)
    model: list[Literal] = field(default_factory=list)

    def __str__(self) -> str:
        return self.status if not self.reason else f"{self.status} ({self.reason})"


def uses_arithmetic(pp: PreparedProblem) -> bool:
    roots: list[Term] = []
    for f in pp.assertions:
        roots.extend(formula_atoms(f))
    for c in list(pp.ground_clauses) + [a.clause for a in pp.axioms]:
        roots.extend(l.atom for l in c)
    for r in roots:
        for u in iter_subterms(r):
            if u.sort == INT or (not u.is_var and u.head.is_arith):
                return True
    return False


def split_pairs(pp: PreparedProblem, spec: SplitSpec) -> list[tuple[Term, Term]]:
    """Resolve a split specification into pairs of ground terms."""
    if spec is None:
        return []
    if spec == "auto":
        consts: dict[Term, None] = {}
        for t in sorted(pp.initial_terms, key=lambda u: u.id):
            if t.args and t.head.extension:
                for a in t.args:
                    if not a.args and a.head.value is None:
                        consts.setdefault(a)
        cs = list(consts)
        return [(a, b) for i, a in enumerate(cs) for b in cs[i + 1:] if a.sort == b.sort]
    if isinstance(spec, str):
        raise StrategyError(f"unknown split specification {spec!r}")
    out = []
    prob = pp.problem
    for a, b in spec:
        ta = a if isinstance(a, Term) else prob.mk(a)
        tb = b if isinstance(b, Term) else prob.mk(b)
        if ta.sort != tb.sort:
            raise StrategyError(f"cannot split {ta!r} and {tb!r}: sorts {ta.sort} and {tb.sort} differ")
        if not ta.ground or not tb.ground:
            raise StrategyError("split pairs must be ground terms")
        out.append((ta, tb))
    return out


class _Run:
    def __init__(self, pp: PreparedProblem, strategy: Strategy, deadline: Optional[float]) -> None:
        self.pp = pp
        self.strategy = strategy
        self.deadline = deadline
        self.stats = Stats(eager_bound=eager_bound(pp))
        self.cache = InstanceCache()
        self.arith = uses_arithmetic(pp)
        b = strategy.backend
        self.backend = ExternalBackend(b) if isinstance(b, str) else b
        self.solver = GroundSolver(pp.bank, pp.problem.signature)
        for t in sorted(pp.initial_terms, key=lambda u: u.id):
            self.solver.register(t)
        for f in pp.assertions:
            self.solver.add_formula(f)
        for c in pp.ground_clauses:
            self.solver.add_ground_clause(c)
        self.script: list[str] = []
        if self.arith and self.backend is not None:
            prob = pp.problem
            self.script.append(f"(set-logic {infer_logic(prob)})")
            self.script.extend(declarations(prob, extension_marks=False))
            self.script.extend(f"(assert {formula_text(f)})" for f in pp.assertions)
            self.script.extend(self._clause_cmd(c) for c in pp.ground_clauses)
        for a, b in split_pairs(pp, strategy.split):
            atom = pp.problem.mk("=", a, b)
            self.solver.prefer(self.solver.atom(atom))

    @staticmethod
    def _clause_cmd(c: Clause) -> str:
        return f"(assert {formula_text(clause_formula(c))})"

    def _tick(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise SolverTimeout()

    def _remaining(self) -> Optional[float]:
        if self.deadline is None:
            return None
        return max(0.01, self.deadline - time.monotonic())

    def add(self, insts: list[Instance]) -> None:
        for inst in insts:
            self.solver.add_ground_clause(inst.clause)
            if self.script:
                self.script.append(self._clause_cmd(inst.clause))
        self.stats.instances = len(self.cache)
        if self.strategy.check_invariants and self.stats.instances > self.stats.eager_bound:
            raise InvariantViolation(
                f"{self.stats.instances} instances exceed the local instance bound {self.stats.eager_bound}")

    def check(self) -> bool:
        """Ground satisfiability of the current clause set; leaves the model in the e-graph."""
        self._tick()
        self.stats.ground_checks += 1
        if not self.solver.solve(self.deadline):
            return False
        if not (self.arith and self.backend is not None):
            return True
        # the EUF abstraction was satisfiable; ask the backend for the real answer
        timeout = self._remaining()
        if timeout is not None:
            timeout = min(timeout, self.backend.timeout)
        res = self.backend.check("\n".join(self.script) + "\n", self.solver.theory_atoms(), timeout)
        self.stats.backend_calls += 1
        if res.status == "unsat":
            return False
        if res.status != "sat":
            raise BackendError("backend answered unknown")
        if not self.solver.load_assignment(res.values):
            raise BackendError("backend model contradicts congruence")
        return True

    def finish_sat(self) -> Verdict:
        model = self.solver.model_literals()
        if self.arith and self.backend is None:
            return Verdict("unknown", "arithmetic atoms need an external backend", self.stats, [], model)
        return Verdict("sat", "", self.stats, [], model)

    def run_eager(self) -> Verdict:
        insts = eager_instances(self.pp)
        for inst in insts:
            self.cache.add(inst)
        self.add(insts)
        if not self.check():
            return Verdict("unsat", "", self.stats)
        return self.finish_sat()

    def run_incremental(self) -> Verdict:
        stage = 0 if self.strategy.staged and self.pp.stage_one else 1
        special = self.strategy.special
        round_no = 0
        while True:
            if not self.check():
                return Verdict("unsat", "", self.stats)
            while True:
                self._tick()
                round_no += 1
                self.stats.rounds += 1
                eg = self.solver.eg
                new: list[Instance] = []
                if special:
                    new = d_t1_round(self.pp, self.cache, eg, stage, round_no, special=True)
                if not new:
                    new = d_t1_round(self.pp, self.cache, eg, stage, round_no)
                if new:
                    break
                if stage == 0:
                    stage = 1
                    continue
                return self.finish_sat()
            self.stats.special_instances += sum(i.special for i in new)
            self.stats.stage_one_instances += sum(i.stage == 1 for i in new)
            self.add(new)


def decide(problem: Union[Problem, PreparedProblem], strategy: Optional[Strategy] = None) -> Verdict:
    """Satisfiability of a problem's assertions modulo its extension axioms."""
    strategy = strategy or Strategy()
    start = time.perf_counter()
    deadline = None
    if strategy.timeout_ms is not None:
        deadline = time.monotonic() + strategy.timeout_ms / 1000.0
    pp = problem if isinstance(problem, PreparedProblem) else prepare(problem)
    run = _Run(pp, strategy, deadline)
    try:
        verdict = run.run_eager() if strategy.mode == "eager" else run.run_incremental()
    except SolverTimeout:
        verdict = Verdict("unknown", "timeout", run.stats)
    except BackendError as exc:
        verdict = Verdict("unknown", f"backend failure: {exc}", run.stats)
    verdict.instances = list(run.cache)
    verdict.stats.instances = len(run.cache)
    verdict.stats.wall_ms = (time.perf_counter() - start) * 1000.0
    return verdict


def recheck(problem: Union[Problem, PreparedProblem], instances: Sequence[Instance]) -> bool:
    """Independent ground check of assertions plus the given instances (EUF only)."""
    pp = problem if isinstance(problem, PreparedProblem) else prepare(problem)
    s = GroundSolver(pp.bank, pp.problem.signature)
    for t in pp.initial_terms:
        s.register(t)
    for f in pp.assertions:
        s.add_formula(f)
    for c in pp.ground_clauses:
        s.add_ground_clause(c)
    for inst in instances:
        check_no_new_terms(pp, inst.clause)
        s.add_ground_clause(inst.clause)
    return s.solve()
