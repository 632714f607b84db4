"""Sample-based learners.

* The rooted-linear learner reduces learning f* to finding a linear separator
  between (phi(S), f*(S)^p) and (phi(S), (R+eps) f*(S)^p); its hypothesis is
  f(S) = (w . phi(S) / ((R+eps) z))^(1/p).
* The unit-demand learner sets every item to the smallest sample value among
  the samples containing it and predicts the max item value inside S.
* The meta-item learner runs the unit-demand learner over all subsets of at
  most R items.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .itemset import ItemSet, masks_to_matrix
from .linsep import SeparatorInfeasible, SeparatorProblem, solve_consistent_separator
from .valuations import XOS, MetaIndex, Valuation, all_values, meta_index

FEATURE_LIMIT = 10**6


class LearnerInfeasible(ValueError):
    """The separator problem has no solution for the chosen (R, p)."""


@dataclass(frozen=True)
class Sample:
    set: ItemSet
    value: float

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError(f"sample values must be nonnegative, got {self.value}")

    def to_dict(self) -> dict:
        return {"n": self.set.n, "set": list(self.set.indices), "value": self.value}

    @classmethod
    def from_dict(cls, d: dict) -> "Sample":
        return cls(ItemSet(d["n"], tuple(d["set"])), float(d["value"]))


@dataclass
class SampleBatch:
    """Samples as a boolean indicator matrix plus a value vector."""

    X: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=bool)
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.X.ndim != 2 or self.X.shape[0] != self.values.shape[0]:
            raise ValueError("indicator matrix and values disagree")
        if np.any(~(self.values >= 0)):
            raise ValueError("sample values must be nonnegative")

    @property
    def n(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.X.shape[0]

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], n: int | None = None) -> "SampleBatch":
        if not samples:
            if n is None:
                raise ValueError("cannot infer n from an empty sample list")
            return cls(np.zeros((0, n), dtype=bool), np.zeros(0))
        n = samples[0].set.n
        if any(s.set.n != n for s in samples):
            raise ValueError("samples mix ground-set sizes")
        X = np.array([s.set.indicator() for s in samples], dtype=bool).reshape(-1, n)
        return cls(X, [s.value for s in samples])

    @classmethod
    def from_target(cls, target: Valuation, X) -> "SampleBatch":
        X = np.asarray(X, dtype=bool)
        return cls(X, target.values(X))

    def samples(self) -> list[Sample]:
        return [Sample(ItemSet.from_indicator(x), float(v)) for x, v in zip(self.X, self.values)]


def _batch(samples, n: int | None = None) -> SampleBatch:
    return samples if isinstance(samples, SampleBatch) else SampleBatch.from_samples(list(samples), n)


# ---------------------------------------------------------------------------
# features


@dataclass(frozen=True)
class RawFeatures:
    n: int

    @property
    def dim(self) -> int:
        return self.n

    def transform(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float).reshape(-1, self.n)

    def zero_coords(self, U0: ItemSet) -> np.ndarray:
        return U0.as_array()

    def to_dict(self) -> dict:
        return {"type": "raw", "n": self.n}


@dataclass(frozen=True)
class SubsetFeatures:
    """One coordinate per nonempty subset T of [n] with |T| <= L; 1 iff T is inside S."""

    n: int
    L: int
    subsets: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be at least 1")
        count = sum(math.comb(self.n, r) for r in range(1, self.L + 1))
        if count > FEATURE_LIMIT:
            raise ValueError(f"{count} subset features exceed the limit of {FEATURE_LIMIT}")
        groups = tuple(np.array(list(itertools.combinations(range(self.n), r)), dtype=np.int64)
                       .reshape(-1, r) for r in range(1, self.L + 1))
        object.__setattr__(self, "subsets", groups)

    @property
    def dim(self) -> int:
        return sum(g.shape[0] for g in self.subsets)

    def subset_list(self) -> list[tuple[int, ...]]:
        return [tuple(row) for g in self.subsets for row in g.tolist()]

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=bool).reshape(-1, self.n)
        return np.hstack([X[:, g].all(axis=2) for g in self.subsets]).astype(float)

    def zero_coords(self, U0: ItemSet) -> np.ndarray:
        mask = U0.indicator()
        return np.flatnonzero(np.concatenate([mask[g].any(axis=1) for g in self.subsets]))

    def to_dict(self) -> dict:
        return {"type": "subsets", "n": self.n, "L": self.L}


def featurizer_from_dict(d: dict):
    if d["type"] == "raw":
        return RawFeatures(d["n"])
    if d["type"] == "subsets":
        return SubsetFeatures(d["n"], d["L"])
    raise ValueError(f"unknown featurizer {d['type']!r}")


def expand_features(S: ItemSet, L: int) -> np.ndarray:
    """Indicator over nonempty subsets of size <= L (ordered by size, then lexicographically)."""
    return SubsetFeatures(S.n, L).transform(S.indicator()[None, :])[0]


# ---------------------------------------------------------------------------
# rooted-linear learner


@dataclass
class RootedLinearHypothesis:
    w: np.ndarray
    z: float
    p: float
    R_eps: float
    U0: ItemSet
    featurizer: RawFeatures | SubsetFeatures
    scale: float = 1.0

    @property
    def n(self) -> int:
        return self.featurizer.n

    def predict_many(self, X) -> np.ndarray:
        lin = self.featurizer.transform(X) @ self.w
        base = np.maximum(lin, 0.0) / (self.R_eps * self.z)
        return self.scale * base ** (1.0 / self.p)

    def predict(self, S: ItemSet) -> float:
        return float(self.predict_many(S.indicator()[None, :])[0])

    def to_dict(self) -> dict:
        return {"type": "rooted_linear", "w": self.w.tolist(), "z": float(self.z),
                "p": self.p, "R_eps": self.R_eps, "U0": list(self.U0.indices),
                "featurizer": self.featurizer.to_dict(), "scale": self.scale}

    @classmethod
    def from_dict(cls, d: dict) -> "RootedLinearHypothesis":
        feat = featurizer_from_dict(d["featurizer"])
        return cls(np.array(d["w"], dtype=float), d["z"], d["p"], d["R_eps"],
                   ItemSet(feat.n, tuple(d["U0"])), feat, d.get("scale", 1.0))


@dataclass(frozen=True)
class LabeledPoint:
    x: np.ndarray  # features followed by the last coordinate
    label: int


def null_subcube(samples, n: int | None = None) -> ItemSet:
    """Union of the sets of all zero-valued samples."""
    b = _batch(samples, n)
    zeros = b.X[b.values == 0]
    return ItemSet.from_indicator(zeros.any(axis=0) if zeros.shape[0] else np.zeros(b.n, bool))


def _separator_arrays(Phi: np.ndarray, values: np.ndarray, R: float, eps: float,
                      p: float, coins: np.ndarray):
    if np.any(values <= 0):
        raise ValueError("zero-valued samples must be split off before building examples")
    coins = np.asarray(coins).reshape(-1)
    if coins.shape[0] != values.shape[0] or not np.all(np.isin(coins, (-1, 1))):
        raise ValueError("need one +1/-1 coin per nonzero sample")
    base = values ** p
    t = np.where(coins > 0, base, (R + eps) * base)
    return Phi, t, coins.astype(float)


def build_separator_examples(samples_nonzero, R: float, eps: float, p: float,
                             coins, featurizer=None) -> list[LabeledPoint]:
    """Heads (+1) give (phi(S), v^p); tails (-1) give (phi(S), (R+eps) v^p)."""
    b = _batch(samples_nonzero)
    feat = featurizer or RawFeatures(b.n)
    Phi, t, y = _separator_arrays(feat.transform(b.X), b.values, R, eps, p, coins)
    return [LabeledPoint(np.append(x, ti), int(yi)) for x, ti, yi in zip(Phi, t, y)]


def draw_coins(rng: np.random.Generator, m: int) -> np.ndarray:
    return np.where(rng.random(m) < 0.5, 1, -1)


def pmac_linear_learn(samples, R: float, eps: float, p: float, featurizer=None,
                      rng: np.random.Generator | int | None = None, coins=None,
                      n: int | None = None) -> RootedLinearHypothesis:
    """Learn a rooted-linear hypothesis through the separator reduction.

    Coins come from ``coins`` when given, else from ``rng`` (seed 0 by default).
    """
    if R < 1 or eps <= 0 or p <= 0:
        raise ValueError("need R >= 1, eps > 0, p > 0")
    b = _batch(samples, n)
    feat = featurizer or RawFeatures(b.n)
    if feat.n != b.n:
        raise ValueError("featurizer and samples disagree on n")
    U0 = null_subcube(b)
    nz = b.values > 0
    if coins is None:
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng or 0)
        coins = draw_coins(gen, int(nz.sum()))
    X, t, y = _separator_arrays(feat.transform(b.X[nz]), b.values[nz], R, eps, p, coins)
    prob = SeparatorProblem(X.reshape(-1, feat.dim), t, y, feat.zero_coords(U0))
    try:
        sol = solve_consistent_separator(prob)
    except SeparatorInfeasible as e:
        raise LearnerInfeasible(f"target outside guaranteed class for (R={R}, p={p}): {e}") from e
    return RootedLinearHypothesis(sol.w, float(sol.z), p, R + eps, U0, feat)


def pmac_xos(samples, eps: float, rng=None, n: int | None = None) -> RootedLinearHypothesis:
    b = _batch(samples, n)
    return pmac_linear_learn(b, R=b.n, eps=eps, p=2, rng=rng)


def pmac_subadditive(samples, eps: float, rng=None, n: int | None = None) -> RootedLinearHypothesis:
    b = _batch(samples, n)
    R = max(1.0, b.n * math.log(b.n) ** 2) if b.n > 1 else 1.0
    return pmac_linear_learn(b, R=R, eps=eps, p=2, rng=rng)


def pmac_oxs_r_leaves(samples, R: float, eps: float, rng=None,
                      n: int | None = None) -> RootedLinearHypothesis:
    return pmac_linear_learn(_batch(samples, n), R=R, eps=eps, p=1, rng=rng)


def pmac_xos_r_trees(samples, R: float, eta: float, eps: float, rng=None,
                     n: int | None = None) -> RootedLinearHypothesis:
    """Degree-L subset features with p = L = ceil(1/eta); factor (R+eps)^(1/L)."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    b = _batch(samples, n)
    L = math.ceil(1.0 / eta)
    feat = RawFeatures(b.n) if L == 1 else SubsetFeatures(b.n, L)
    return pmac_linear_learn(b, R=R, eps=eps, p=L, featurizer=feat, rng=rng)


# ---------------------------------------------------------------------------
# unit-demand learners


@dataclass
class UnitDemandHypothesis:
    item_values: np.ndarray

    @property
    def n(self) -> int:
        return self.item_values.shape[0]

    def predict_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=bool).reshape(-1, self.n)
        if self.n == 0:
            return np.zeros(X.shape[0])
        return np.where(X, self.item_values, 0.0).max(axis=1)

    def predict(self, S: ItemSet) -> float:
        return float(self.item_values[list(S.indices)].max()) if len(S) else 0.0

    def to_dict(self) -> dict:
        return {"type": "unit_demand", "item_values": self.item_values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "UnitDemandHypothesis":
        return cls(np.array(d["item_values"], dtype=float))


def unit_demand_learn(samples, n: int | None = None) -> UnitDemandHypothesis:
    """Item value = min sample value over samples containing it; 0 if uncovered."""
    b = _batch(samples, n)
    vals = np.where(b.X, b.values[:, None], np.inf).min(axis=0) if len(b) else np.full(b.n, np.inf)
    return UnitDemandHypothesis(np.where(np.isfinite(vals), vals, 0.0))


@dataclass
class MetaUnitDemandHypothesis:
    inner: UnitDemandHypothesis
    index: MetaIndex

    @property
    def n(self) -> int:
        return self.index.n

    def predict(self, S: ItemSet) -> float:
        return self.inner.predict(self.index.meta_set(S))

    def predict_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=bool).reshape(-1, self.index.n)
        return np.array([self.predict(ItemSet.from_indicator(x)) for x in X])

    def to_dict(self) -> dict:
        return {"type": "meta_unit_demand", "n": self.index.n, "R": self.index.R,
                "item_values": self.inner.item_values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "MetaUnitDemandHypothesis":
        return cls(UnitDemandHypothesis(np.array(d["item_values"], dtype=float)),
                   meta_index(d["n"], d["R"]))


def pac_oxs_const_trees(samples, R: int, n: int | None = None) -> MetaUnitDemandHypothesis:
    b = _batch(samples, n)
    index = meta_index(b.n, R)
    meta = [index.meta_set(ItemSet.from_indicator(x)) for x in b.X]
    inner = unit_demand_learn([Sample(S, float(v)) for S, v in zip(meta, b.values)],
                              n=len(index))
    return MetaUnitDemandHypothesis(inner, index)


def hypothesis_from_dict(d: dict):
    kinds = {"rooted_linear": RootedLinearHypothesis, "unit_demand": UnitDemandHypothesis,
             "meta_unit_demand": MetaUnitDemandHypothesis}
    if d.get("type") in kinds:
        return kinds[d["type"]].from_dict(d)
    from .query_learners import ScaledItemSumHypothesis
    if d.get("type") == "scaled_item_sum":
        return ScaledItemSumHypothesis.from_dict(d)
    raise ValueError(f"unknown hypothesis type {d.get('type')!r}")


# ---------------------------------------------------------------------------
# structural sandwiches the learners rely on


def _rel_tol(x):
    return 1e-9 * np.maximum(1.0, np.abs(x))


def item_sum_sandwich_violations(v: Valuation, R: float) -> int:
    """Subsets breaking f(S) <= sum_{i in S} f({i}) <= R f(S)."""
    f = all_values(v)
    singles = np.array([f[1 << i] for i in range(v.n)])
    X = masks_to_matrix(np.arange(1 << v.n), v.n)
    s = X.astype(float) @ singles
    bad = (f > s + _rel_tol(s)) | (s > R * f + _rel_tol(s))
    return int(bad.sum())


def power_sandwich_violations(v: XOS, L: int) -> int:
    """Subsets breaking (1/R) sum_j k_j^L <= max_j k_j^L <= sum_j k_j^L, k_j = tree sums."""
    R = v.trees.shape[0]
    if R == 0:
        return 0
    X = masks_to_matrix(np.arange(1 << v.n), v.n).astype(float)
    K = (X @ v.trees.T) ** L
    total, top = K.sum(axis=1), K.max(axis=1)
    bad = (total / R > top + _rel_tol(top)) | (top > total + _rel_tol(total))
    return int(bad.sum())


def max_item_sandwich_violations(v: Valuation, R: float) -> int:
    """Subsets breaking max_{i in S} f({i}) <= f(S) <= R max_{i in S} f({i})."""
    f = all_values(v)
    singles = np.array([f[1 << i] for i in range(v.n)])
    X = masks_to_matrix(np.arange(1 << v.n), v.n)
    mx = np.where(X, singles, 0.0).max(axis=1) if v.n else np.zeros(1)
    bad = (mx > f + _rel_tol(f)) | (f > R * mx + _rel_tol(f))
    return int(bad.sum())
