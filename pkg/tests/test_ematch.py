from __future__ import annotations

import random

import pytest

from ltesmt.core import Var
from ltesmt.egraph import EGraph
from ltesmt.ematch import PatternError, bf_match_oracle, ematch

from generators import random_match_case, term_universe


def setup():
    prob, s, (f, h), terms = term_universe(random.Random(0), 3, [("f", 1), ("h", 2)], count=0)
    c0, c1, c2 = terms
    eg = EGraph()
    bank = prob.bank
    x, y = Var("x", s), Var("y", s)
    return prob, bank, eg, f, h, (c0, c1, c2), (x, y)


def test_match_modulo_equalities():
    prob, bank, eg, f, h, (a, b, c), (x, y) = setup()
    fa, fb = bank.mk(f, [a]), bank.mk(f, [b])
    for t in (fa, fb, c):
        eg.register(t)
    pats = [bank.mk(f, [bank.mk(x)]), bank.mk(f, [bank.mk(y)])]
    assert len(ematch(eg, pats, [x, y])) == 4
    eg.assert_eq(a, b)
    res = ematch(eg, pats, [x, y])
    assert len(res) == 1
    assert res[0].images == (a, a)


def test_shared_variable_joins_by_class():
    prob, bank, eg, f, h, (a, b, c), (x, y) = setup()
    for t in (bank.mk(h, [a, c]), bank.mk(f, [b])):
        eg.register(t)
    pats = [bank.mk(h, [bank.mk(x), bank.mk(y)]), bank.mk(f, [bank.mk(x)])]
    assert ematch(eg, pats, [x, y]) == []
    eg.assert_eq(a, b)
    (m,) = ematch(eg, pats, [x, y])
    assert m.subst == {x: a, y: c}


def test_unbound_variable_ranges_over_classes():
    prob, bank, eg, f, h, (a, b, c), (x, y) = setup()
    for t in (bank.mk(f, [a]), b, c):
        eg.register(t)
    res = ematch(eg, [bank.mk(f, [bank.mk(x)])], [x, y])
    # y ranges over a, b, c and f(a)
    assert len(res) == 4
    eg.assert_eq(b, c)
    assert len(ematch(eg, [bank.mk(f, [bank.mk(x)])], [x, y])) == 3


def test_stage_one_terms_are_held_back():
    prob, bank, eg, f, h, (a, b, c), (x, y) = setup()
    fa, fb = bank.mk(f, [a]), bank.mk(f, [b])
    eg.register(fa)
    eg.register(fb)
    pat = [bank.mk(f, [bank.mk(x)])]
    assert len(ematch(eg, pat, stage_limit=0, stage_one={fb})) == 1
    res = ematch(eg, pat, stage_limit=1, stage_one={fb})
    assert sorted(m.stage for m in res) == [0, 1]


def test_non_flat_pattern_is_rejected():
    prob, bank, eg, f, h, (a, b, c), (x, y) = setup()
    with pytest.raises(PatternError):
        ematch(eg, [bank.mk(f, [bank.mk(f, [bank.mk(x)])])])
    with pytest.raises(PatternError):
        ematch(eg, [bank.mk(f, [a])])


def test_random_states_against_brute_force():
    rng = random.Random(11)
    for _ in range(150):
        case = random_match_case(rng)
        got = ematch(case.eg, case.patterns, case.variables, case.stage_limit, case.stage_one)
        keys = [m.key for m in got]
        assert len(keys) == len(set(keys))
        want = bf_match_oracle(case.eg, case.patterns, case.variables,
                               case.stage_limit, case.stage_one)
        assert set(keys) == want


def test_no_patterns_give_the_empty_substitution():
    eg = EGraph()
    (m,) = ematch(eg, [])
    assert m.key == () and m.images == ()
    assert bf_match_oracle(eg, []) == {()}
