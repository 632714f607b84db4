import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from valuelearn.harness import (ConfigError, ExperimentReport, Mixture, Product, UniformOverFamily,
                                UniformSubsets, adversarial_demo, distribution_from_dict,
                                empirical_factor, factor_quantile, pmac_ratios, run_pmac_experiment)
from valuelearn.itemset import ItemSet
from valuelearn.learners import UnitDemandHypothesis
from valuelearn.query_learners import ScaledItemSumHypothesis
from valuelearn.valuations import Linear, UnitDemand


def test_distributions_deterministic():
    for D in (UniformSubsets(5), Product((0.1, 0.9, 0.5)),
              UniformOverFamily((ItemSet.of(3, [0]), ItemSet.of(3, [1, 2]))),
              Mixture((UniformSubsets(3), Product.constant(3, 0.0)), (1, 3))):
        a = D.sample(np.random.default_rng(1), 50)
        b = D.sample(np.random.default_rng(1), 50)
        assert a.dtype == bool and np.array_equal(a, b)
        assert distribution_from_dict(D.to_dict()) == D


def test_product_rejects_bad_probabilities():
    with pytest.raises(ValueError):
        Product((0.5, 1.5))


def test_ratio_rules():
    r = pmac_ratios([0, 2, 2, 2], [0, 1, 3, 0])
    assert r[0] == 1 and r[1] == 2 and math.isinf(r[2]) and math.isinf(r[3])


def test_empirical_factor_examples():
    v = Linear([1, 2, 3])
    D = UniformSubsets(3)
    same = ScaledItemSumHypothesis(np.array([1.0, 2, 3]), 1)
    rep = empirical_factor(same, v, D, 0.1, 500, seed=0)
    assert rep.alpha_hat == 1 and rep.violation_mass == 0
    half = ScaledItemSumHypothesis(np.array([1.0, 2, 3]), 2)
    assert empirical_factor(half, v, D, 0.1, 500, seed=0).alpha_hat == pytest.approx(2)
    with pytest.raises(ValueError):
        empirical_factor(same, v, D, 0.1, 50)


def test_overestimate_mass():
    # item 0 is overestimated; it lies in 10% of draws
    v = UnitDemand([1.0, 1.0])
    D = Product((0.1, 0.0))
    h = UnitDemandHypothesis(np.array([5.0, 1.0]))
    rep = empirical_factor(h, v, D, 0.05, 4000, seed=3)
    assert math.isinf(rep.alpha_hat) and rep.violation_mass == pytest.approx(0.1, abs=0.02)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1, 100), min_size=5, max_size=50), st.floats(0.01, 0.5), st.floats(0.01, 0.5))
def test_quantile_monotone_in_eps(ratios, e1, e2):
    lo, hi = sorted((e1, e2))
    assert factor_quantile(np.array(ratios), hi) <= factor_quantile(np.array(ratios), lo)


def _config(**kw):
    cfg = {"experiment_id": "t", "learner": "xos", "target": {"random": "xos", "n": 6},
           "distribution": {"kind": "product", "n": 6, "q": 0.5}, "m": 200, "M": 200,
           "eps": 0.1, "seeds": [0, 1]}
    cfg.update(kw)
    return cfg


def test_experiment_roundtrip_and_reproducible():
    a = run_pmac_experiment(_config())
    b = run_pmac_experiment(_config())
    assert [r["alpha_hat"] for r in a.runs] == [r["alpha_hat"] for r in b.runs]
    back = ExperimentReport.from_dict(json.loads(json.dumps(a.to_dict())))
    assert back == a
    lines = a.to_csv().strip().splitlines()
    assert lines[0] == "experiment_id,seed,m,M,eps,alpha_hat,violation_mass,wall_ms"
    assert len(lines) == 3


def test_experiment_parallel_matches_serial():
    a = run_pmac_experiment(_config())
    b = run_pmac_experiment(_config(), workers=2)
    assert [r["alpha_hat"] for r in a.runs] == [r["alpha_hat"] for r in b.runs]


@pytest.mark.parametrize("bad,field", [
    ({"learner": "svm"}, "learner"),
    ({"M": 10}, "M"),
    ({"m": -1}, "m"),
    ({"target": {"n": 2, "kind": "linear", "weights": [1, -1]}}, "target"),
    ({"distribution": {"kind": "product", "n": 3}}, "distribution.q"),
    ({"eps": 2}, "eps"),
])
def test_config_errors_name_field(bad, field):
    with pytest.raises(ConfigError, match=field):
        run_pmac_experiment(_config(**bad))


def test_other_learners_run():
    for learner, params in (("unit-demand", {}), ("oxs-r-leaves", {"R": 2}),
                            ("xos-r-trees", {"R": 4, "eta": 0.5}), ("subadditive", {})):
        rep = run_pmac_experiment(_config(learner=learner, params=params, seeds=[0]))
        assert rep.runs[0]["feasible"] in (True, False)
    rep = run_pmac_experiment(_config(learner="prices", m=500,
                                      target={"n": 3, "kind": "linear", "weights": [1, 2, 0]},
                                      distribution={"kind": "uniform", "n": 3},
                                      params={"H": 4, "eta": 1}, seeds=[0]))
    assert rep.runs[0]["feasible"] and rep.alpha_hat <= 2


def test_vq_learner_in_experiments():
    rep = run_pmac_experiment(_config(learner="vq", params={"class": "oxs-r-leaves", "R": 2},
                                      target={"random": "oxs-r-leaves", "n": 6, "params": {"R": 2}}))
    assert all(r["m"] == 6 for r in rep.runs) and rep.alpha_hat <= 2
    with pytest.raises(ConfigError, match="params.class"):
        run_pmac_experiment(_config(learner="vq", params={"R": 2}))
    with pytest.raises(ConfigError, match="params.R"):
        run_pmac_experiment(_config(learner="vq", params={"class": "xos-r-trees"}))


def test_shipped_configs_validate():
    from pathlib import Path
    from valuelearn.harness import validate_config
    paths = sorted((Path(__file__).parent.parent / "configs").glob("*.json"))
    assert len(paths) == 3
    for path in paths:
        validate_config(json.loads(path.read_text()))


def test_adversarial_demo_small_cases():
    single = adversarial_demo(4096, 1, seed=0, B=[0], m_train=20)
    assert single["unseen"] == 0 and single["median_factor_seen"] is not None
    assert single["median_factor_seen"] <= math.sqrt(4096.1) + 1e-6
    empty = adversarial_demo(4096, 8, seed=0, B=[])
    assert empty["median_factor_unseen"] == 1
    with pytest.raises(ValueError):
        adversarial_demo(1024, 4)
