from __future__ import annotations

import random

import pytest

from ltesmt.core import Problem, Signature, TermBank
from ltesmt.egraph import EGraph, EGraphError, UnregisteredTerm

from generators import check_cc_instance, random_cc_instance, replay_script


@pytest.fixture
def p():
    sig = Signature()
    s = sig.declare_sort("S")
    for c in "abcd":
        sig.declare_fun(c, (), s)
    sig.declare_fun("f", (s,), s)
    sig.declare_fun("h", (s, s), s)
    return Problem(sig, TermBank())


def test_congruence_propagates_upward(p):
    a, b = p.mk("a"), p.mk("b")
    fa, fb = p.mk("f", a), p.mk("f", b)
    eg = EGraph()
    eg.register(p.mk("f", fa))
    eg.register(p.mk("f", fb))
    assert not eg.are_equal(fa, fb)
    assert eg.assert_eq(a, b)
    assert eg.are_equal(fa, fb)
    assert eg.are_equal(p.mk("f", fa), p.mk("f", fb))


def test_registration_after_merge_uses_congruence(p):
    a, b = p.mk("a"), p.mk("b")
    eg = EGraph()
    eg.register(p.mk("f", a))
    eg.register(b)
    eg.assert_eq(a, b)
    eg.register(p.mk("f", b))
    assert eg.are_equal(p.mk("f", a), p.mk("f", b))


def test_disequality_conflict(p):
    a, b, c = p.mk("a"), p.mk("b"), p.mk("c")
    eg = EGraph()
    for t in (p.mk("h", a, c), p.mk("h", b, c)):
        eg.register(t)
    assert eg.assert_diseq(p.mk("h", a, c), p.mk("h", b, c))
    assert eg.are_disequal(p.mk("h", b, c), p.mk("h", a, c))
    assert not eg.assert_eq(a, b)
    assert eg.inconsistent
    eg2 = EGraph()
    eg2.register(a)
    assert not eg2.assert_diseq(a, a)


def test_numerals_are_distinct():
    sig, bank = Signature(), TermBank()
    p = Problem(sig, bank)
    eg = EGraph()
    one, two = p.num(1), p.num(2)
    eg.register(one)
    eg.register(two)
    assert eg.are_disequal(one, two)
    assert not eg.assert_eq(one, two)


def test_union_prefers_larger_class_then_lower_id(p):
    a, b, c = p.mk("a"), p.mk("b"), p.mk("c")
    eg = EGraph()
    for t in (a, b, c):
        eg.register(t)
    eg.assert_eq(b, a)
    assert eg.find(b) is a
    eg.assert_eq(c, b)
    assert eg.find(c) is a
    assert [t.name for t in eg.terms_in_class(c)] == ["a", "b", "c"]


def test_push_pop_restores_exactly(p):
    a, b = p.mk("a"), p.mk("b")
    eg = EGraph()
    eg.register(p.mk("f", a))
    before = eg.snapshot()
    eg.push()
    eg.register(p.mk("f", b))
    eg.assert_eq(a, b)
    eg.assert_diseq(a, p.mk("f", a))
    eg.pop()
    assert eg.snapshot() == before
    assert p.mk("f", b) not in eg
    with pytest.raises(EGraphError):
        eg.pop()


def test_queries_on_unregistered_terms_fail(p):
    eg = EGraph()
    with pytest.raises(UnregisteredTerm):
        eg.find(p.mk("a"))


def test_dump_lists_classes(p):
    a, b = p.mk("a"), p.mk("b")
    eg = EGraph()
    eg.register(p.mk("f", a))
    eg.register(b)
    eg.assert_eq(a, b)
    assert eg.dump() == "{a, b}\n{(f a)}"


def test_random_instances_against_naive_closure():
    rng = random.Random(5)
    for _ in range(200):
        check_cc_instance(random_cc_instance(rng))


def test_random_push_pop_replay():
    rng = random.Random(6)
    assert sum(replay_script(rng) for _ in range(10)) > 0
