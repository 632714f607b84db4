import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from valuelearn.itemset import ItemSet, masks_to_matrix
from valuelearn.oracles import check_monotone
from valuelearn.valuations import (OXS, XOS, BudgetedAdditive, ExplicitTable, GoemansRank, Linear,
                                   UnitDemand, ValuationError, all_values, build_oxs_budgeted,
                                   build_oxs_goemans, demand_set, dump_valuation, eval_oxs_bruteforce,
                                   evaluate, load_valuation, oxs_bruteforce_table, oxs_to_unit_demand_meta,
                                   oxs_to_xos, submodular_to_xos, valuation_from_dict)

A, B, C = 0, 1, 2


def S(n, *items):
    return ItemSet.of(n, items)


# -- evaluation ---------------------------------------------------------------

def test_oxs_matching_example():
    v = OXS(2, [[3, 2], [1, 5]])
    assert evaluate(v, S(2, A, B)) == 8
    assert eval_oxs_bruteforce(v, S(2, A, B)) == 8


def test_bruteforce_small_cases():
    assert eval_oxs_bruteforce(OXS(1, [[3]]), S(1, A)) == 3
    assert eval_oxs_bruteforce(OXS(1, [[3], [1]]), S(1, A)) == 3


def test_empty_set_is_zero_for_every_variant():
    vals = [Linear([1, 2]), UnitDemand([1, 2]), XOS(2, [[1, 0], [0, 1]]), OXS(2, [[1, 1]]),
            BudgetedAdditive(S(2, 0), 1), GoemansRank(S(2, 0), 1, 1),
            ExplicitTable(2, [0, 1, 1, 1])]
    for v in vals:
        assert evaluate(v, ItemSet.empty(2)) == 0


def test_goemans_formula_example():
    g = GoemansRank(S(4, 0, 1), 2, 1)
    assert evaluate(g, S(4, 0, 2)) == 2


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        evaluate(Linear([1, 2]), S(3, 0))


def test_negative_weights_rejected():
    with pytest.raises(ValuationError, match=r"trees\[1\]\[0\]"):
        XOS(2, [[1, 1], [-1, 0]])
    with pytest.raises(ValuationError, match="weights"):
        Linear([1, -2])


def test_empty_xos_and_zero_trees():
    assert evaluate(XOS(3, np.zeros((0, 3))), ItemSet.full(3)) == 0
    assert evaluate(XOS(3, [[0, 0, 0], [1, 0, 0]]), ItemSet.full(3)) == 1


def test_table_validation():
    with pytest.raises(ValuationError):
        ExplicitTable(2, [0, 1, 1, 0.5])
    with pytest.raises(ValuationError):
        ExplicitTable(1, [1, 2])
    ExplicitTable(2, [0, 1, 1, 0.5], validate=False)


def test_bruteforce_guards():
    with pytest.raises(ValueError):
        eval_oxs_bruteforce(OXS(13, np.ones((1, 13))), ItemSet.full(13))
    with pytest.raises(ValueError):
        eval_oxs_bruteforce(OXS(2, np.ones((9, 2))), ItemSet.full(2))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 5), st.integers(0, 2**31 - 1))
def test_oxs_matches_bruteforce_table(n, k, seed):
    rng = np.random.default_rng(seed)
    v = OXS(n, rng.integers(0, 10, (k, n)))
    assert np.array_equal(all_values(v), oxs_bruteforce_table(v))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**31 - 1))
def test_every_variant_monotone_and_normalized(n, seed):
    rng = np.random.default_rng(seed)
    rset = ItemSet.from_indicator(rng.random(n) < 0.5)
    for v in (Linear(rng.random(n)), UnitDemand(rng.random(n)), XOS(n, rng.random((3, n))),
              OXS(n, rng.random((3, n))), BudgetedAdditive(rset, int(rng.integers(0, n + 1))),
              GoemansRank(rset, int(rng.integers(1, n + 2)), int(rng.integers(0, n + 1)))):
        assert all_values(v)[0] == 0
        assert check_monotone(v) is None


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.floats(0, 10), st.integers(0, 2**31 - 1))
def test_scaling(n, c, seed):
    rng = np.random.default_rng(seed)
    for v in (Linear(rng.random(n)), UnitDemand(rng.random(n)), XOS(n, rng.random((2, n))),
              OXS(n, rng.random((2, n)))):
        assert np.allclose(all_values(v.scaled(c)), c * all_values(v), atol=1e-9)


def test_batch_matches_single():
    rng = np.random.default_rng(0)
    v = OXS(6, rng.random((3, 6)))
    X = masks_to_matrix(np.arange(64), 6)
    single = [v.value(ItemSet.from_indicator(x)) for x in X]
    assert np.allclose(v.values(X), single)


# -- constructions ------------------------------------------------------------

def test_budgeted_examples():
    v = build_oxs_budgeted(S(4, 1, 2, 3), 2)
    assert v.trees.shape[0] == 2 and np.array_equal(v.trees[0], [0, 1, 1, 1])
    assert evaluate(v, S(4, 1, 2, 3)) == 2
    z = build_oxs_budgeted(S(4, 1, 2), 0)
    assert z.trees.shape[0] == 0 and np.all(all_values(z) == 0)
    lin = build_oxs_budgeted(S(2, 1), 5)
    assert lin.trees.shape[0] == 1 and evaluate(lin, S(2, 1)) == 1


def test_goemans_branch_c_example():
    v = build_oxs_goemans(S(4, 0, 1), 2, 1, 4)
    assert v.trees.tolist() == [[0, 0, 1, 1], [1, 1, 1, 1]]
    assert evaluate(v, S(4, 0, 1)) == 1
    assert np.array_equal(all_values(v), all_values(GoemansRank(S(4, 0, 1), 2, 1)))


@pytest.mark.parametrize("n,rset,a,b", [(3, (0,), 5, 1), (4, (1, 2), 1, 2), (5, (0, 3), 4, 1)])
def test_goemans_branches_match_formula(n, rset, a, b):
    R = ItemSet.of(n, rset)
    assert np.array_equal(all_values(build_oxs_goemans(R, a, b, n)),
                          all_values(GoemansRank(R, a, b)))


def test_goemans_branch_b_is_budgeted():
    v = build_oxs_goemans(S(4, 0), 1, 2, 4)
    assert np.array_equal(v.trees, build_oxs_budgeted(ItemSet.full(4), 1).trees)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_budgeted_matches_formula(n, seed):
    rng = np.random.default_rng(seed)
    R = ItemSet.from_indicator(rng.random(n) < 0.5)
    c = int(rng.integers(0, n + 2))
    assert np.array_equal(all_values(build_oxs_budgeted(R, c)), all_values(BudgetedAdditive(R, c)))


# -- conversions --------------------------------------------------------------

def test_oxs_to_xos_example():
    v = OXS(3, [[3, 2, 0], [0, 0, 1]])
    x = oxs_to_xos(v)
    rows = {tuple(r) for r in x.trees.tolist()}
    assert (3, 0, 1) in rows and (0, 2, 1) in rows
    assert evaluate(x, ItemSet.full(3)) == 4
    assert np.allclose(all_values(x), all_values(v))


def test_oxs_to_xos_edge_cases():
    single = oxs_to_xos(OXS(3, [[1, 0, 2]]))
    assert sorted(map(tuple, single.trees.tolist())) == [(0, 0, 2), (1, 0, 0)]
    empty = oxs_to_xos(OXS(3, np.zeros((0, 3))))
    assert empty.trees.shape[0] == 0 and np.all(all_values(empty) == 0)


def test_oxs_to_xos_shared_items_not_double_counted():
    v = OXS(2, [[1, 1], [1, 1]])
    assert np.allclose(all_values(oxs_to_xos(v)), all_values(v))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_conversions_preserve_values(n, k, seed):
    rng = np.random.default_rng(seed)
    v = OXS(n, rng.integers(0, 5, (k, n)) * (rng.random((k, n)) < 0.6))
    f = all_values(v)
    assert np.allclose(all_values(oxs_to_xos(v)), f)
    ud, index = oxs_to_unit_demand_meta(v)
    for m in range(1 << n):
        assert ud.value(index.meta_set(ItemSet.from_mask(n, m))) == pytest.approx(f[m], abs=1e-9)


def test_meta_examples():
    v = OXS(3, [[3, 2, 0], [0, 0, 1]])
    ud, index = oxs_to_unit_demand_meta(v)
    assert ud.weights[index.id_of[(0, 2)]] == 4
    assert ud.weights[index.id_of[()]] == 0
    ud1, idx1 = oxs_to_unit_demand_meta(OXS(3, [[3, 2, 0]]))
    assert all(len(t) <= 1 for t in idx1.subsets)
    assert [ud1.weights[idx1.id_of[(i,)]] for i in range(3)] == [3, 2, 0]


def test_meta_guard():
    with pytest.raises(ValueError):
        oxs_to_unit_demand_meta(OXS(20, np.ones((5, 20))))


def test_submodular_to_xos_examples():
    f = ExplicitTable(2, [0, 1, 1, 1.5])
    x = submodular_to_xos(f)
    assert sorted(map(tuple, x.trees.tolist())) == [(0.5, 1.0), (1.0, 0.5)]
    assert evaluate(x, ItemSet.full(2)) == 1.5
    add = submodular_to_xos(Linear([1, 2, 3]))
    assert all(np.array_equal(t, [1, 2, 3]) for t in add.trees)
    rank = submodular_to_xos(ExplicitTable(2, [0, 1, 1, 1]))
    assert sorted(map(tuple, rank.trees.tolist())) == [(0, 1), (1, 0)]
    assert evaluate(rank, ItemSet.full(2)) == 1


def test_submodular_to_xos_rejects_non_submodular():
    with pytest.raises(ValueError):
        submodular_to_xos(ExplicitTable(2, [0, 1, 1, 3]))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_submodular_to_xos_preserves_values(n, seed):
    rng = np.random.default_rng(seed)
    v = OXS(n, rng.random((2, n)))
    x = submodular_to_xos(v)
    assert x.trees.shape[0] == np.prod(range(1, n + 1))
    assert np.allclose(all_values(x), all_values(v), atol=1e-9)


def test_demand_set_examples():
    assert demand_set(Linear([3, 1]), [2, 2]) == [S(2, 0)]
    assert ItemSet.full(3) in demand_set(XOS(3, [[1, 2, 0], [0, 1, 1]]), [0, 0, 0])
    assert demand_set(Linear([1, 1]), [5, 5]) == [ItemSet.empty(2)]
    with pytest.raises(ValueError):
        demand_set(Linear(np.ones(21)), np.zeros(21))


# -- JSON ---------------------------------------------------------------------

@pytest.mark.parametrize("v", [
    Linear([1, 2.5]), UnitDemand([0, 3]), XOS(2, [[1, 0], [0, 2]]), OXS(2, [[1, 2]]),
    BudgetedAdditive(S(3, 0, 2), 1), GoemansRank(S(3, 1), 2, 1), ExplicitTable(1, [0, 4]),
])
def test_json_roundtrip(v, tmp_path):
    path = tmp_path / "v.json"
    dump_valuation(v, path)
    back = load_valuation(path)
    assert type(back) is type(v)
    assert np.array_equal(all_values(back), all_values(v))


def test_json_sparse_trees():
    v = valuation_from_dict({"n": 4, "kind": "xos", "trees": [{"1": 2, "3": 1}]})
    assert v.trees.tolist() == [[0, 2, 0, 1]]


@pytest.mark.parametrize("payload,field", [
    ({"n": 2, "kind": "linear", "weights": [1, -1]}, r"weights\[1\]"),
    ({"n": 2, "kind": "oxs", "trees": [[1, 1], [0, -2]]}, r"trees\[1\]\[1\]"),
    ({"n": 3, "kind": "budgeted", "rset": [0, 5], "c": 1}, r"rset\[1\]"),
    ({"n": 3, "kind": "goemans", "rset": [0], "alpha": 2}, "beta"),
    ({"n": 3, "kind": "weird"}, "kind"),
    ({"kind": "linear"}, "n"),
    ({"n": 4, "kind": "xos", "trees": [{"7": 1}]}, r"trees\[0\]"),
])
def test_json_errors_name_field(payload, field):
    with pytest.raises(ValuationError, match=field):
        valuation_from_dict(json.loads(json.dumps(payload)))
