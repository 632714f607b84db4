"""Value-query learners that look only at singleton values.

Four restricted classes and the hypothesis each one gets:

    oxs-r-leaves, xos-r-trees  ->  f(S) = (1/R) * sum_{i in S} f*({i})
    oxs-r-trees,  xos-r-leaves ->  f(S) = max_{i in S} f*({i})

Each satisfies f(S) <= f*(S) <= R f(S) on every S under its class assumption.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .itemset import ItemSet, masks_to_matrix
from .learners import UnitDemandHypothesis
from .valuations import Valuation, evaluate

SUM_TAGS = ("oxs-r-leaves", "xos-r-trees")
MAX_TAGS = ("oxs-r-trees", "xos-r-leaves")
CLASS_TAGS = SUM_TAGS + MAX_TAGS
CHECK_MAX_N = 16


class ValueOracle:
    """Exact value answers for one hidden valuation, with a query counter."""

    def __init__(self, valuation: Valuation, memoize: bool = True):
        self._v = valuation
        self._cache: dict | None = {} if memoize else None
        self.queries = 0

    @property
    def n(self) -> int:
        return self._v.n

    def value(self, S: ItemSet) -> float:
        if self._cache is not None and S in self._cache:
            return self._cache[S]
        self.queries += 1
        out = evaluate(self._v, S)
        if self._cache is not None:
            self._cache[S] = out
        return out

    def values_all(self) -> np.ndarray:
        """Every subset's value, for verification only (not counted as queries)."""
        if self.n > CHECK_MAX_N:
            raise ValueError(f"exhaustive verification needs n <= {CHECK_MAX_N}")
        X = masks_to_matrix(np.arange(1 << self.n), self.n)
        return self._v.values(X)


@dataclass
class ScaledItemSumHypothesis:
    item_values: np.ndarray
    R: float

    @property
    def n(self) -> int:
        return self.item_values.shape[0]

    def predict_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=bool).reshape(-1, self.n)
        return X.astype(float) @ self.item_values / self.R

    def predict(self, S: ItemSet) -> float:
        return float(self.item_values[list(S.indices)].sum() / self.R) if len(S) else 0.0

    def to_dict(self) -> dict:
        return {"type": "scaled_item_sum", "item_values": self.item_values.tolist(), "R": self.R}

    @classmethod
    def from_dict(cls, d: dict) -> "ScaledItemSumHypothesis":
        return cls(np.array(d["item_values"], dtype=float), d["R"])


def item_hypothesis(item_values, class_tag: str, R: float):
    item_values = np.asarray(item_values, dtype=float)
    if class_tag in SUM_TAGS:
        return ScaledItemSumHypothesis(item_values, float(R))
    if class_tag in MAX_TAGS:
        return UnitDemandHypothesis(item_values)
    raise ValueError(f"unknown class tag {class_tag!r}; choose from {list(CLASS_TAGS)}")


def vq_learn_item_based(oracle: ValueOracle, class_tag: str, R: float):
    """Query the n singletons and return the class's item-based hypothesis."""
    if class_tag not in CLASS_TAGS:
        raise ValueError(f"unknown class tag {class_tag!r}; choose from {list(CLASS_TAGS)}")
    singles = [oracle.value(ItemSet(oracle.n, (i,))) for i in range(oracle.n)]
    return item_hypothesis(singles, class_tag, R)


@dataclass
class CheckResult:
    ok: bool
    worst_set: ItemSet
    worst_ratio: float
    failures: int = 0

    def to_dict(self) -> dict:
        return {"ok": self.ok, "worst_set": list(self.worst_set.indices),
                "worst_ratio": self.worst_ratio, "failures": self.failures}


def vq_hypothesis_check(oracle: ValueOracle, hypothesis, R: float, tol: float = 1e-9) -> CheckResult:
    """Verify f(S) <= f*(S) <= R f(S) on every subset.

    The worst set is the one with the largest f*/f ratio (an overestimate,
    or f = 0 < f*, counts as infinite).
    """
    if oracle.n > CHECK_MAX_N:
        raise ValueError(f"exhaustive verification needs n <= {CHECK_MAX_N}")
    X = masks_to_matrix(np.arange(1 << oracle.n), oracle.n)
    f = oracle.values_all()
    h = hypothesis.predict_many(X)
    scale = np.maximum(1.0, np.abs(f))
    over = h > f + tol * scale
    under = f > R * h + tol * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(f <= tol, 1.0, f / h)
    ratio = np.where(over | (h <= 0) & (f > tol), np.inf, ratio)
    k = int(np.argmax(ratio))
    fails = int((over | under).sum())
    return CheckResult(fails == 0, ItemSet.from_mask(oracle.n, k), float(ratio[k]), fails)
