import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from valuelearn.itemset import ItemSet
from valuelearn.oracles import (check_gs_triples, check_monotone, check_subadditive,
                                check_submodular, check_xos_polyhedron, polyhedron_max, run_checks)
from valuelearn.valuations import OXS, XOS, BudgetedAdditive, ExplicitTable, GoemansRank, Linear, all_values


def table3(values):
    """Table over items a, b, c from a dict keyed by strings like 'ab'."""
    out = [0.0] * 8
    for key, val in values.items():
        out[sum(1 << "abc".index(ch) for ch in key)] = val
    return out


def cap(n, c):
    return BudgetedAdditive(ItemSet.full(n), c)


def test_monotone_examples():
    assert check_monotone(cap(4, 2)) is None
    assert check_monotone(Linear([0, 1, 2])) is None
    t = ExplicitTable(2, [0, 1, 0, 0.5], validate=False)
    viol = check_monotone(t)
    assert viol.kind == "monotone" and viol.sets[0] == ItemSet.of(2, [0]) and viol.items == (1,)
    assert viol.recheck(t)


def test_subadditive_examples():
    rng = np.random.default_rng(3)
    for _ in range(5):
        assert check_subadditive(XOS(6, rng.random((3, 6)))) is None
    sq = ExplicitTable(3, [bin(m).count("1") ** 2 for m in range(8)])
    viol = check_subadditive(sq)
    assert len(viol.sets[0]) == 1 and len(viol.sets[1]) == 1 and viol.recheck(sq)
    assert check_subadditive(Linear(np.zeros(3))) is None


def test_submodular_examples():
    assert check_submodular(cap(4, 2)) is None
    t = ExplicitTable(3, table3({"a": 1, "b": 1, "c": 1, "ab": 1, "ac": 2, "bc": 2, "abc": 3}))
    viol = check_submodular(t)
    assert viol is not None and viol.recheck(t)
    rng = np.random.default_rng(4)
    for _ in range(5):
        assert check_submodular(OXS(6, rng.random((3, 6)))) is None


def test_documented_submodular_table_is_submodular():
    # singletons 1, f(ab)=1, f(abc)=2, other pairs 2: this table has decreasing marginals
    t = ExplicitTable(3, table3({"a": 1, "b": 1, "c": 1, "ab": 1, "ac": 2, "bc": 2, "abc": 2}))
    assert check_submodular(t) is None


def test_gs_triple_examples():
    rng = np.random.default_rng(5)
    for _ in range(5):
        n = 5
        g = GoemansRank(ItemSet.from_indicator(rng.random(n) < 0.5), int(rng.integers(1, 6)),
                        int(rng.integers(0, 5)))
        assert check_gs_triples(g) is None
    t = ExplicitTable(3, table3({"a": 1, "b": 1, "c": 1, "ab": 2, "ac": 1.9, "bc": 1.9, "abc": 2}))
    assert check_submodular(t) is None
    viol = check_gs_triples(t)
    assert viol is not None and viol.sets[0] == ItemSet.empty(3) and viol.items == (0, 1, 2)
    assert viol.values["f(ab)+f(c)"] == pytest.approx(3)
    assert viol.values["f(ac)+f(b)"] == pytest.approx(2.9)
    assert viol.recheck(t)
    assert check_gs_triples(cap(4, 1)) is None


def test_gs_requires_monotone():
    with pytest.raises(ValueError):
        check_gs_triples(ExplicitTable(3, [0, 1, 1, 0, 1, 1, 1, 1], validate=False))


def test_size_guards():
    with pytest.raises(ValueError):
        check_gs_triples(Linear(np.ones(13)))
    with pytest.raises(ValueError):
        check_xos_polyhedron(XOS(7, np.ones((1, 7))))


def test_polyhedron_examples():
    assert check_xos_polyhedron(XOS(3, [[1, 2, 3]])) is None
    v = XOS(2, [[2, 0], [0, 2]])
    assert polyhedron_max(all_values(v), ItemSet.full(2)) == pytest.approx(2)
    assert check_xos_polyhedron(v) is None
    rng = np.random.default_rng(6)
    for _ in range(3):
        assert check_xos_polyhedron(XOS(4, rng.random((2, 4)))) is None


def test_polyhedron_flags_non_xos():
    # pairs worth 1 cap any fractional cover of abc at 1.5, below f(abc) = 2
    t = ExplicitTable(3, table3({"a": 1, "b": 1, "c": 1, "ab": 1, "ac": 1, "bc": 1, "abc": 2}))
    assert check_subadditive(t) is None
    viol = check_xos_polyhedron(t)
    assert viol is not None and viol.recheck(t)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**31 - 1))
def test_witnesses_reproduce(n, seed):
    rng = np.random.default_rng(seed)
    vals = np.concatenate([[0.0], rng.integers(0, 6, (1 << n) - 1).astype(float)])
    t = ExplicitTable(n, vals, validate=False)
    for check in (check_monotone, check_subadditive, check_submodular):
        viol = check(t)
        if viol is not None:
            assert viol.recheck(t)


def test_run_checks_report():
    rep = run_checks(cap(3, 1), ["monotone", "gs"])
    assert rep == {"monotone": {"status": "pass"}, "gs": {"status": "pass"}}
    with pytest.raises(ValueError):
        run_checks(cap(3, 1), ["bogus"])
