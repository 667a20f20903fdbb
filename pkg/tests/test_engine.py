from __future__ import annotations

import random
import subprocess

import pytest

from ltesmt import parse, prepare
from ltesmt.core import Literal, Not, Or, clause_text
from ltesmt.engine import (
    EprExportError, GroundSolver, InstanceCache, InvariantViolation, Strategy, StrategyError, d_t1_round,
    decide, eager_bound, eager_instances, epr_export, epr_violations, recheck,
)
from ltesmt.engine.backend import BackendError, ExternalBackend
from ltesmt.harness.corpus import corpus, monotone_chain

from conftest import BACKEND, Z3, needs_z3
from oracles import brute_sat

EUF = "(declare-sort S 0)(declare-const a S)(declare-const b S)(declare-const c S)(declare-const d S)" \
      "(declare-fun f (S) S)(declare-fun p (S) Bool)"

K_MONO = {
    "(not (<= a b)) | (<= (f a) (f b))",
    "(not (<= b a)) | (<= (f b) (f a))",
    "(not (<= a a)) | (<= (f a) (f a))",
    "(not (<= b b)) | (<= (f b) (f b))",
}


def show(clause):
    return " | ".join(repr(l) for l in clause)


def ground(text):
    p = parse(EUF + text)
    s = GroundSolver(p.bank, p.signature)
    for f in p.assertions:
        s.add_formula(f)
    return p, s


# --- ground solver ------------------------------------------------------------

def test_congruence_refutes():
    _, s = ground("(assert (= a b))(assert (not (= (f a) (f b))))")
    assert not s.solve()


def test_model_equalities_are_in_the_egraph():
    p, s = ground("(assert (or (= a b) (= a c)))(assert (not (= a b)))")
    assert s.solve()
    assert s.eg.are_equal(p.mk("a"), p.mk("c"))
    assert not s.eg.are_equal(p.mk("a"), p.mk("b"))


def test_predicates_respect_congruence():
    _, s = ground("(assert (p a))(assert (not (p b)))(assert (or (= a b) (= (f a) b)))"
                  "(assert (not (= (f a) b)))")
    assert not s.solve()


def test_nested_formulas_use_auxiliary_atoms():
    _, s = ground("(assert (or (and (= a b) (not (p a))) (and (p b) (= b c))))(assert (not (= b c)))")
    assert s.solve()
    assert s.model_literals()


def _random_ground(rng):
    consts = "abcd"

    def term():
        c = rng.choice(consts)
        return f"(f {c})" if rng.random() < 0.3 else c

    def lit():
        a = f"(p {term()})" if rng.random() < 0.2 else f"(= {term()} {term()})"
        return a if rng.random() < 0.5 else f"(not {a})"

    clauses = []
    for _ in range(8):
        k = rng.randint(1, 3)
        clauses.append(lit() if k == 1 else "(or " + " ".join(lit() for _ in range(k)) + ")")
    return "".join(f"(assert {c})" for c in clauses)


def test_random_ground_problems_match_exhaustive_search():
    rng = random.Random(3)
    seen = set()
    for _ in range(300):
        p, s = ground(_random_ground(rng))
        want = brute_sat(p.assertions)
        assert s.solve() == want
        seen.add(want)
    assert seen == {True, False}


def test_solver_is_reusable_after_adding_clauses():
    p, s = ground("(assert (or (= a b) (= a c)))")
    assert s.solve()
    s.add_ground_clause((Literal(p.mk("=", p.mk("a"), p.mk("b")), False),))
    assert s.solve()
    s.add_ground_clause((Literal(p.mk("=", p.mk("a"), p.mk("c")), False),))
    assert not s.solve()


# --- rounds -------------------------------------------------------------------

def _model(pp, extra=()):
    s = GroundSolver(pp.bank, pp.problem.signature)
    for t in pp.initial_terms:
        s.register(t)
    for f in pp.assertions:
        s.add_formula(f)
    for c in extra:
        s.add_ground_clause(c)
    assert s.solve()
    return s


def test_first_round_on_monotonicity_gives_the_four_local_instances(mono):
    pp = prepare(mono)
    cache = InstanceCache()
    s = _model(pp)
    first = d_t1_round(pp, cache, s.eg)
    assert {show(i.clause) for i in first} == K_MONO
    s = _model(pp, [i.clause for i in first])
    assert d_t1_round(pp, cache, s.eg) == []


def test_psi_round_contains_the_refuting_instances(inj_psi):
    pp = prepare(inj_psi)
    s = _model(pp)
    got = {show(i.clause) for i in d_t1_round(pp, InstanceCache(), s.eg, stage_limit=1)}
    assert "(not (= (f a) (f b))) | (= (g (f b)) a)" in got or \
           "(not (= (f a) (f a))) | (= (g (f a)) a)" in got
    assert len(got) == 2
    # modulo f(a) = f(b) the two instances are the images a and b
    insts = d_t1_round(pp, InstanceCache(), s.eg)
    assert {tuple(x.name for x in i.images if not x.args) for i in insts} == {("a",), ("b",)}


def test_stage_zero_ignores_psi_terms(inj_psi):
    pp = prepare(inj_psi)
    s = _model(pp)
    assert d_t1_round(pp, InstanceCache(), s.eg, stage_limit=0) == []


def test_special_round_identifies_same_sort_variables(mono):
    pp = prepare(mono)
    s = _model(pp)
    first = d_t1_round(pp, InstanceCache(), s.eg, special=True)
    assert {show(i.clause) for i in first} == {
        "(not (<= a a)) | (<= (f a) (f a))", "(not (<= b b)) | (<= (f b) (f b))"}


# --- eager ------------------------------------------------------------------

def test_eager_instances_of_monotonicity(mono):
    pp = prepare(mono)
    insts = eager_instances(pp)
    assert {show(i.clause) for i in insts} == K_MONO
    names = {t.name for i in insts for t in i.images}
    assert names == {"a", "b"}


@pytest.mark.parametrize("n", [2, 4, 8, 16, 32])
def test_monotone_chain_bound_is_quadratic(n):
    pp = prepare(parse(monotone_chain(n)))
    assert eager_bound(pp) == n * n
    assert len(eager_instances(pp)) == n * n


def test_eager_bound_counts_free_variables():
    pp = prepare(parse(EUF + "(declare-fun g (S) S :extension)(assert (= (g a) b))"
                       "(assert (forall ((x S) (y S)) (or (= (g x) y) (p y))))"))
    # one g-application times five terms of sort S
    assert eager_bound(pp) == 1 * 3
    assert len(eager_instances(pp)) == 3


# --- decide -----------------------------------------------------------------

def test_monotonicity_without_backend_is_unknown_after_four_instances(mono):
    v = decide(mono)
    assert v.status == "unknown" and "backend" in v.reason
    assert {show(i.clause) for i in v.instances} == K_MONO


@needs_z3
def test_monotonicity_with_backend_is_sat(mono):
    v = decide(mono, Strategy(backend=BACKEND))
    assert v.status == "sat"
    assert v.stats.instances == 4 and v.stats.backend_calls >= 1


def test_psi_injectivity(inj_psi, inj_nopsi):
    assert decide(inj_psi).status == "unsat"
    assert decide(inj_nopsi).status == "sat"
    assert decide(inj_psi, Strategy(mode="eager")).status == "unsat"
    assert decide(inj_psi, Strategy(stage_psi=True)).status == "unsat"


def test_staged_run_reports_stage_one_instances(inj_psi):
    v = decide(inj_psi, Strategy(stage_psi=True))
    assert v.stats.stage_one_instances == 2


@pytest.mark.parametrize("name", sorted(n for n in corpus() if "mono" not in n and "monotone" not in n))
def test_sat_verdicts_survive_recheck(name):
    p = parse(corpus()[name])
    pp = prepare(p)
    v = decide(pp)
    assert v.stats.instances <= v.stats.eager_bound
    if v.status == "sat":
        assert recheck(pp, v.instances)
        s = _model(pp, [i.clause for i in v.instances])
        cache = InstanceCache()
        for i in v.instances:
            cache.add(i)
        assert d_t1_round(pp, cache, s.eg) == []


def test_hooks_disabled_match_plain_incremental(inj_psi, mono):
    for prob in (inj_psi, mono):
        base = decide(prob, Strategy(mode="ematch"))
        off = decide(prob, Strategy(mode="ematch", stage_psi=False, eq_split=None, special_case=False))
        assert base.stats.as_dict(timing=False) == off.stats.as_dict(timing=False)


def test_split_pairs_do_not_change_verdicts():
    for name, text in corpus().items():
        if "mono" in name or "monotone" in name:
            continue
        p = parse(text)
        assert decide(p, Strategy(eq_split="auto")).status == decide(p).status, name


@needs_z3
def test_split_never_costs_instances_on_monotone_family():
    for n in (2, 4, 8):
        p = parse(monotone_chain(n))
        plain = decide(p, Strategy(backend=BACKEND))
        split = decide(p, Strategy(backend=BACKEND, eq_split=[("c1", "c2")]))
        assert plain.status == split.status == "sat"
        assert split.stats.instances <= plain.stats.instances


def test_cross_sort_split_is_rejected():
    p = parse("(declare-sort S 0)(declare-sort T 0)(declare-const a S)(declare-const b T)(assert (= a a))")
    with pytest.raises(StrategyError):
        decide(p, Strategy(eq_split=[("a", "b")]))
    with pytest.raises(StrategyError):
        Strategy(mode="lazy")


@needs_z3
def test_special_case_round_one_on_monotonicity(mono):
    v = decide(mono, Strategy(special_case=True, backend=BACKEND))
    first = [i for i in v.instances if i.round == 1]
    assert {show(i.clause) for i in first} == {
        "(not (<= a a)) | (<= (f a) (f a))", "(not (<= b b)) | (<= (f b) (f b))"}
    assert v.status == "sat" and v.stats.instances == 4


def test_timeout_gives_unknown(inj_psi):
    v = decide(inj_psi, Strategy(timeout_ms=0))
    assert v.status == "unknown" and v.reason == "timeout"


def test_failing_backend_gives_unknown(mono):
    v = decide(mono, Strategy(backend="false"))
    assert v.status == "unknown" and "backend" in v.reason
    v = decide(mono, Strategy(backend="no-such-solver-binary"))
    assert v.status == "unknown"


def test_instance_bound_is_enforced(inj_psi):
    pp = prepare(inj_psi)
    with pytest.raises(InvariantViolation):
        eager_instances(pp, limit=1)


# --- backend ----------------------------------------------------------------

@needs_z3
def test_backend_reads_atom_values(mono):
    b = ExternalBackend(BACKEND)
    res = b.check("(declare-const a Int)(assert (> a 2))\n", [mono.mk("<=", mono.mk("a"), mono.num(0))])
    assert res.status == "sat"
    assert list(res.values.values()) == [False]
    assert b.check("(assert false)\n").status == "unsat"


@needs_z3
def test_backend_file_placeholder(tmp_path):
    b = ExternalBackend(f"{Z3} {{file}}")
    assert b.check("(declare-const q Bool)(assert q)\n").status == "sat"


def test_backend_rejects_garbage():
    with pytest.raises(BackendError):
        ExternalBackend("echo hello").check("")


# --- EPR export ----------------------------------------------------------------

def test_epr_only_problem_is_exported_verbatim():
    p = parse(EUF + "(assert (p a))(assert (forall ((x S)) (=> (p x) (= x a))))")
    out = epr_export(p)
    assert "(assert (forall ((x S)) (or (not (p x)) (= x a))))" in out.text
    assert epr_violations(out.text) == []


def test_monotonicity_export_is_ground(mono):
    out = epr_export(mono)
    assert "forall" not in out.text
    assert out.instances == 4


def test_mixed_export_keeps_only_free_variables():
    p = parse(corpus()["epr_04_sat.lte.smt2"])
    out = epr_export(p)
    assert out.ok and epr_violations(out.text) == []
    assert out.text.count("forall") == 1 + 3    # the EPR axiom plus one per f-application


def test_non_reducible_axiom_is_refused():
    p = parse("(declare-fun p (Int) Bool)(declare-const a Int)(assert (p a))"
              "(assert (forall ((x Int)) (=> (p x) (p (+ x 1)))))")
    with pytest.raises(EprExportError):
        epr_export(p)
    out = epr_export(p, force=True)
    assert out.report and epr_violations(out.text)


@needs_z3
@pytest.mark.parametrize("name", sorted(corpus()))
def test_exported_files_agree_with_decide(name, tmp_path):
    p = parse(corpus()[name])
    out = epr_export(p)
    ans = subprocess.run(["z3", "-in"], input=out.text, capture_output=True, text=True, timeout=60)
    want = decide(p, Strategy(backend=BACKEND)).status
    assert ans.stdout.split()[0] == want
