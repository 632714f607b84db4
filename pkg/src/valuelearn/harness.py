"""Distributions, empirical factor measurement and experiment drivers."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .instances import build_fB, gen_intersection_family, gen_random
from .itemset import ItemSet
from .learners import (LearnerInfeasible, SampleBatch, pac_oxs_const_trees, pmac_oxs_r_leaves,
                       pmac_subadditive, pmac_xos, pmac_xos_r_trees, unit_demand_learn)
from .price_learning import AgentOracle, pmac_with_prices
from .query_learners import CLASS_TAGS, ValueOracle, vq_learn_item_based
from .valuations import Valuation, valuation_from_dict

RATIO_TOL = 1e-9
CSV_COLUMNS = ["experiment_id", "seed", "m", "M", "eps", "alpha_hat", "violation_mass", "wall_ms"]


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


# ---------------------------------------------------------------------------
# distributions


@dataclass(frozen=True)
class UniformSubsets:
    n: int

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        return rng.random((m, self.n)) < 0.5

    def to_dict(self) -> dict:
        return {"kind": "uniform", "n": self.n}


@dataclass(frozen=True)
class Product:
    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(q) for q in self.probs)
        if any(not 0 <= q <= 1 for q in probs):
            raise ValueError("inclusion probabilities must lie in [0, 1]")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def constant(cls, n: int, q: float) -> "Product":
        return cls((q,) * n)

    @property
    def n(self) -> int:
        return len(self.probs)

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        return rng.random((m, self.n)) < np.asarray(self.probs)

    def to_dict(self) -> dict:
        return {"kind": "product", "probs": list(self.probs)}


@dataclass(frozen=True)
class UniformOverFamily:
    sets: tuple[ItemSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(self.sets))
        if not self.sets:
            raise ValueError("family must be nonempty")
        if len({S.n for S in self.sets}) != 1:
            raise ValueError("family members must share a ground set")

    @property
    def n(self) -> int:
        return self.sets[0].n

    def sample_indices(self, rng: np.random.Generator, m: int) -> np.ndarray:
        return rng.integers(0, len(self.sets), m)

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        X = np.zeros((m, self.n), dtype=bool)
        for r, i in enumerate(self.sample_indices(rng, m)):
            X[r, self.sets[i].as_array()] = True
        return X

    def to_dict(self) -> dict:
        return {"kind": "family", "n": self.n, "sets": [list(S.indices) for S in self.sets]}


@dataclass(frozen=True)
class Mixture:
    components: tuple
    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.components) != w.shape[0] or not len(self.components):
            raise ValueError("need one weight per component")
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("mixture weights must be nonnegative with a positive sum")
        if len({c.n for c in self.components}) != 1:
            raise ValueError("components must share a ground set")
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "weights", tuple((w / w.sum()).tolist()))

    @property
    def n(self) -> int:
        return self.components[0].n

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        which = rng.choice(len(self.components), size=m, p=self.weights)
        X = np.zeros((m, self.n), dtype=bool)
        for c, comp in enumerate(self.components):
            rows = np.flatnonzero(which == c)
            if rows.size:
                X[rows] = comp.sample(rng, rows.size)
        return X

    def to_dict(self) -> dict:
        return {"kind": "mixture", "weights": list(self.weights),
                "components": [c.to_dict() for c in self.components]}


def distribution_from_dict(d: dict, field_name: str = "distribution"):
    kind = d.get("kind")
    try:
        if kind == "uniform":
            return UniformSubsets(int(d["n"]))
        if kind == "product":
            if "probs" in d:
                return Product(tuple(d["probs"]))
            return Product.constant(int(d["n"]), float(d["q"]))
        if kind == "family":
            n = int(d["n"])
            return UniformOverFamily(tuple(ItemSet(n, tuple(s)) for s in d["sets"]))
        if kind == "mixture":
            comps = [distribution_from_dict(c, f"{field_name}.components[{i}]")
                     for i, c in enumerate(d["components"])]
            return Mixture(tuple(comps), tuple(d["weights"]))
    except KeyError as e:
        raise ConfigError(f"{field_name}.{e.args[0]}: missing field") from None
    except ValueError as e:
        raise ConfigError(f"{field_name}: {e}") from None
    raise ConfigError(f"{field_name}.kind: unknown distribution {kind!r}")


# ---------------------------------------------------------------------------
# measurement


def pmac_ratios(f: np.ndarray, h: np.ndarray) -> np.ndarray:
    """f/h where 0 < h <= f, 1 where both vanish, +inf otherwise."""
    f = np.asarray(f, dtype=float)
    h = np.asarray(h, dtype=float)
    slack = RATIO_TOL * np.maximum(1.0, np.abs(f))
    both_zero = (np.abs(f) <= slack) & (np.abs(h) <= slack)
    ok = (h > slack) & (h <= f + slack)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(ok, f / np.where(ok, h, 1.0), np.inf)
    return np.where(both_zero, 1.0, r)


def factor_quantile(ratios: np.ndarray, eps: float) -> float:
    """The (1-eps)-quantile: sorted ratios at position ceil((1-eps) M) - 1."""
    r = np.sort(np.asarray(ratios, dtype=float))
    k = max(1, math.ceil((1 - eps) * r.shape[0] - 1e-9))
    return float(r[k - 1])


@dataclass
class ExperimentReport:
    experiment_id: str
    seeds: list[int]
    m: int
    M: int
    eps: float
    alpha_hat: float
    violation_mass: float
    wall_ms: float
    runs: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(**d)

    def csv_rows(self) -> list[list]:
        runs = self.runs or [{"seed": self.seeds[0] if self.seeds else 0, "alpha_hat": self.alpha_hat,
                              "violation_mass": self.violation_mass, "wall_ms": self.wall_ms}]
        return [[self.experiment_id, r["seed"], r.get("m", self.m), self.M, self.eps,
                 r["alpha_hat"], r["violation_mass"], r["wall_ms"]] for r in runs]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(self.csv_rows())
        return buf.getvalue()


def empirical_factor(hypothesis, target: Valuation, D, eps: float, M: int,
                     seed=0, experiment_id: str = "empirical") -> ExperimentReport:
    """Estimate the smallest alpha with Pr[h <= f* <= alpha h] >= 1 - eps on M fresh draws."""
    if M < 100:
        raise ValueError("M must be at least 100")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    X = D.sample(rng, M)
    r = pmac_ratios(target.values(X), hypothesis.predict_many(X))
    wall = (time.perf_counter() - t0) * 1000
    seed_val = seed if isinstance(seed, int) else 0
    return ExperimentReport(experiment_id, [seed_val], 0, M, eps, factor_quantile(r, eps),
                            float(np.mean(np.isinf(r))), wall,
                            summary={"median_ratio": float(np.median(r))})


# ---------------------------------------------------------------------------
# experiment driver

LEARNERS = ("xos", "subadditive", "oxs-r-leaves", "xos-r-trees", "unit-demand",
            "oxs-const-trees", "prices", "vq")


def _need(cfg: dict, key: str, prefix: str = ""):
    if key not in cfg:
        raise ConfigError(f"{prefix}{key}: missing field")
    return cfg[key]


def validate_config(cfg: dict) -> dict:
    out = dict(cfg)
    out.setdefault("experiment_id", "experiment")
    learner = _need(cfg, "learner")
    if learner not in LEARNERS:
        raise ConfigError(f"learner: unknown learner {learner!r}; choose from {list(LEARNERS)}")
    target = _need(cfg, "target")
    if not isinstance(target, dict):
        raise ConfigError("target: expected an object")
    if "random" not in target:
        try:
            valuation_from_dict(target)
        except ValueError as e:
            raise ConfigError(f"target.{e}") from None
    elif "n" not in target:
        raise ConfigError("target.n: missing field")
    distribution_from_dict(_need(cfg, "distribution"))
    for key in ("M",):
        val = _need(cfg, key)
        if not isinstance(val, int) or val < 100:
            raise ConfigError(f"{key}: expected an integer >= 100, got {val!r}")
    if learner == "vq":
        params = cfg.get("params", {})
        if params.get("class") not in CLASS_TAGS:
            raise ConfigError(f"params.class: expected one of {list(CLASS_TAGS)}")
        if "R" not in params:
            raise ConfigError("params.R: missing field")
    elif learner != "prices" or cfg.get("m") is not None:
        val = _need(cfg, "m")
        if not isinstance(val, int) or val < 0:
            raise ConfigError(f"m: expected a nonnegative integer, got {val!r}")
    eps = out.setdefault("eps", 0.1)
    if not 0 < eps < 1:
        raise ConfigError(f"eps: expected a value in (0, 1), got {eps!r}")
    seeds = out.setdefault("seeds", [0])
    if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
        raise ConfigError("seeds: expected a list of integers")
    out.setdefault("params", {})
    return out


def _train(learner: str, params: dict, target: Valuation, D, m: int | None, eps: float,
           rng: np.random.Generator):
    if learner == "prices":
        agent = AgentOracle(target, int(params.get("H", 64)))
        return pmac_with_prices(agent, D, float(params.get("approx_beta", 1.0)),
                                float(params.get("p", 1.0)), float(params.get("eta", 1.0)),
                                eps=float(params.get("eps", eps)),
                                delta=float(params.get("delta", 0.1)), m=m, rng=rng)
    if learner == "vq":
        return vq_learn_item_based(ValueOracle(target), params["class"], float(params["R"]))
    X = D.sample(rng, m)
    batch = SampleBatch.from_target(target, X)
    leps = float(params.get("learner_eps", eps))
    if learner == "xos":
        return pmac_xos(batch, leps, rng=rng)
    if learner == "subadditive":
        return pmac_subadditive(batch, leps, rng=rng)
    if learner == "oxs-r-leaves":
        return pmac_oxs_r_leaves(batch, float(params["R"]), leps, rng=rng)
    if learner == "xos-r-trees":
        return pmac_xos_r_trees(batch, float(params["R"]), float(params["eta"]), leps, rng=rng)
    if learner == "unit-demand":
        return unit_demand_learn(batch)
    return pac_oxs_const_trees(batch, int(params["R"]))


def _run_one(cfg: dict, seed: int) -> dict:
    t0 = time.perf_counter()
    target_rng, train_rng, test_rng = np.random.SeedSequence(seed).spawn(3)
    tcfg = cfg["target"]
    if "random" in tcfg:
        target = gen_random(tcfg["random"], int(tcfg["n"]), tcfg.get("params", {}),
                            seed=int(target_rng.generate_state(1)[0]))
    else:
        target = valuation_from_dict(tcfg)
    D = distribution_from_dict(cfg["distribution"])
    m = cfg.get("m")
    row = {"seed": seed, "feasible": True}
    try:
        hyp = _train(cfg["learner"], cfg["params"], target, D, m, cfg["eps"],
                     np.random.default_rng(train_rng))
    except LearnerInfeasible as e:
        row.update(alpha_hat=math.inf, violation_mass=1.0, feasible=False, error=str(e),
                   m=m if m is not None else -1)
    else:
        rep = empirical_factor(hyp, target, D, cfg["eps"], cfg["M"],
                               seed=np.random.default_rng(test_rng))
        row.update(alpha_hat=rep.alpha_hat, violation_mass=rep.violation_mass)
        if cfg["learner"] == "vq":
            row["m"] = target.n
        else:
            row["m"] = m if m is not None else _default_m(cfg, target)
    row["wall_ms"] = (time.perf_counter() - t0) * 1000
    return row


def _default_m(cfg: dict, target: Valuation) -> int:
    from .price_learning import default_sample_size
    p = cfg["params"]
    return default_sample_size(target.n, int(p.get("H", 64)), float(p.get("eta", 1.0)),
                               float(p.get("eps", cfg["eps"])), float(p.get("delta", 0.1)))


def run_pmac_experiment(config: dict, workers: int = 1) -> ExperimentReport:
    """Train and measure once per seed; the report's alpha_hat is the median over seeds."""
    cfg = validate_config(config)
    t0 = time.perf_counter()
    seeds = cfg["seeds"]
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(workers) as pool:
            runs = list(pool.map(_run_one, [cfg] * len(seeds), seeds))
    else:
        runs = [_run_one(cfg, s) for s in seeds]
    alphas = np.array([r["alpha_hat"] for r in runs])
    summary = {"alpha_hat_min": float(alphas.min()), "alpha_hat_median": float(np.median(alphas)),
               "alpha_hat_max": float(alphas.max()),
               "feasible_fraction": float(np.mean([r["feasible"] for r in runs]))}
    return ExperimentReport(cfg["experiment_id"], list(seeds), int(runs[0]["m"]), cfg["M"],
                            cfg["eps"], float(np.median(alphas)),
                            float(np.mean([r["violation_mass"] for r in runs])),
                            (time.perf_counter() - t0) * 1000, runs, summary)


# ---------------------------------------------------------------------------
# lower-bound demonstration


def adversarial_demo(n: int, k: int, seed: int = 0, m_train: int | None = None,
                     B=None, eps: float = 0.1) -> dict:
    """Train the XOS learner on draws from the family and measure it on members it never saw.

    The target is the coverage function of a random half B of the family.
    Unseen members of B have value about sqrt(n) while unseen members outside B
    have value at most log2 n, and the training data says nothing about which is
    which, so no hypothesis can do well on both.
    """
    if n < 2**12:
        raise ValueError("the demonstration needs n >= 4096")
    t0 = time.perf_counter()
    family = gen_intersection_family(n, k, seed)
    fam_rng, draw_rng, coin_rng = np.random.SeedSequence(seed).spawn(3)
    if B is None:
        B = np.random.default_rng(fam_rng).permutation(k)[: k // 2].tolist()
    B = sorted(set(int(i) for i in B))
    target = build_fB(family, B)
    D = UniformOverFamily(tuple(family.sets))
    m_train = max(1, k // 2) if m_train is None else m_train
    drawn = D.sample_indices(np.random.default_rng(draw_rng), m_train)
    X_train = np.zeros((m_train, n), dtype=bool)
    for r, i in enumerate(drawn):
        X_train[r, family.sets[i].as_array()] = True
    hyp = pmac_xos(SampleBatch.from_target(target, X_train), eps, rng=np.random.default_rng(coin_rng))

    X_all = np.zeros((k, n), dtype=bool)
    for i, S in enumerate(family.sets):
        X_all[i, S.as_array()] = True
    f = target.values(X_all)
    ratios = pmac_ratios(f, hyp.predict_many(X_all))
    seen = np.zeros(k, dtype=bool)
    seen[drawn] = True
    inB = np.zeros(k, dtype=bool)
    inB[B] = True

    def med(mask):
        return float(np.median(ratios[mask])) if mask.any() else None

    gap = None
    if inB.any() and (~inB).any():
        hi = f[~inB].max()
        gap = float(f[inB].min() / hi) if hi > 0 else math.inf
    return {"n": n, "k": k, "seed": seed, "m_train": m_train, "B_size": len(B),
            "seen": int(seen.sum()), "unseen": int((~seen).sum()),
            "median_factor_unseen": med(~seen),
            "median_factor_unseen_in_B": med(~seen & inB),
            "median_factor_unseen_not_in_B": med(~seen & ~inB),
            "median_factor_seen": med(seen),
            "value_gap": gap, "floor": math.sqrt(n) / (2 * math.log2(n)),
            "audit": family.audit(), "wall_ms": (time.perf_counter() - t0) * 1000}
