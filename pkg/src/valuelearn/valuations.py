"""Valuation representations, exact evaluation and representation conversions.

Every valuation is an immutable object over the ground set [n] with

    value(S)   -> float     for one ItemSet
    values(X)  -> ndarray   for a boolean (m, n) matrix of indicator rows

OXS values are max-weight matchings between the items of S and the MAX trees.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .itemset import ItemSet, masks_to_matrix, matrix_to_masks, popcounts

MAX_TABLE_N = 20
BRUTEFORCE_MAX_ITEMS = 12
BRUTEFORCE_MAX_TREES = 8
CONVERSION_LIMIT = 10**6
TOL = 1e-9


class ValuationError(ValueError):
    """Invalid valuation payload; the message names the offending field."""


def _weights(w, field: str, n: int | None = None) -> np.ndarray:
    arr = np.array(w, dtype=float)
    if arr.ndim != 1:
        raise ValuationError(f"{field}: expected a vector, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValuationError(f"{field}: expected length {n}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValuationError(f"{field}: non-finite weight")
    bad = np.flatnonzero(arr < 0)
    if bad.size:
        raise ValuationError(f"{field}[{bad[0]}]: negative weight {arr[bad[0]]}")
    arr.flags.writeable = False
    return arr


def _tree_matrix(trees, field: str, n: int) -> np.ndarray:
    rows = [_weights(t, f"{field}[{j}]", n) for j, t in enumerate(trees)]
    mat = np.vstack(rows) if rows else np.zeros((0, n))
    mat.flags.writeable = False
    return mat


def _as_matrix(X, n: int) -> np.ndarray:
    X = np.asarray(X, dtype=bool)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != n:
        raise ValueError(f"indicator rows have length {X.shape[1]}, valuation has n={n}")
    return X


class Valuation:
    """Base class. Subclasses set ``n`` and implement ``values``."""

    kind: str = ""
    n: int

    def value(self, S: ItemSet) -> float:
        return float(self.values(S.indicator()[None, :])[0])

    def values(self, X) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def scaled(self, c: float) -> "Valuation":
        raise TypeError(f"{self.kind} valuations have no weight payload to scale")

    def to_dict(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, S: ItemSet) -> float:
        return evaluate(self, S)


@dataclass(frozen=True, eq=False)
class Linear(Valuation):
    weights: np.ndarray
    kind = "linear"

    def __post_init__(self):
        object.__setattr__(self, "weights", _weights(self.weights, "weights"))

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def value(self, S: ItemSet) -> float:
        return float(self.weights[list(S.indices)].sum()) if len(S) else 0.0

    def values(self, X) -> np.ndarray:
        return _as_matrix(X, self.n).astype(float) @ self.weights

    def scaled(self, c: float) -> "Linear":
        return Linear(self.weights * c)

    def to_dict(self) -> dict:
        return {"n": self.n, "kind": self.kind, "weights": self.weights.tolist()}


@dataclass(frozen=True, eq=False)
class UnitDemand(Valuation):
    weights: np.ndarray
    kind = "unit_demand"

    def __post_init__(self):
        object.__setattr__(self, "weights", _weights(self.weights, "weights"))

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def value(self, S: ItemSet) -> float:
        return float(self.weights[list(S.indices)].max()) if len(S) else 0.0

    def values(self, X) -> np.ndarray:
        X = _as_matrix(X, self.n)
        if self.n == 0:
            return np.zeros(X.shape[0])
        return np.where(X, self.weights, 0.0).max(axis=1)

    def scaled(self, c: float) -> "UnitDemand":
        return UnitDemand(self.weights * c)

    def to_dict(self) -> dict:
        return {"n": self.n, "kind": self.kind, "weights": self.weights.tolist()}


@dataclass(frozen=True, eq=False)
class XOS(Valuation):
    """MAX over SUM trees; ``trees`` has one nonnegative weight row per tree."""

    n: int
    trees: np.ndarray
    kind = "xos"

    def __post_init__(self):
        object.__setattr__(self, "trees", _tree_matrix(self.trees, "trees", self.n))

    def value(self, S: ItemSet) -> float:
        if not len(S) or not self.trees.shape[0]:
            return 0.0
        return float(self.trees[:, list(S.indices)].sum(axis=1).max())

    def values(self, X) -> np.ndarray:
        X = _as_matrix(X, self.n)
        if not self.trees.shape[0]:
            return np.zeros(X.shape[0])
        return (X.astype(float) @ self.trees.T).max(axis=1)

    def scaled(self, c: float) -> "XOS":
        return XOS(self.n, self.trees * c)

    def to_dict(self) -> dict:
        return {"n": self.n, "kind": self.kind, "trees": self.trees.tolist()}


@dataclass(frozen=True, eq=False)
class OXS(Valuation):
    """SUM over unit-demand MAX trees; row j holds the leaf weights of tree j."""

    n: int
    trees: np.ndarray
    kind = "oxs"

    def __post_init__(self):
        object.__setattr__(self, "trees", _tree_matrix(self.trees, "trees", self.n))

    @property
    def unit_demands(self) -> list[UnitDemand]:
        return [UnitDemand(t) for t in self.trees]

    def leaves(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.trees[j] > 0)

    def _match(self, idx) -> float:
        if not len(idx) or not self.trees.shape[0]:
            return 0.0
        W = self.trees[:, idx]
        W = W[W.max(axis=1) > 0]
        if not W.shape[0]:
            return 0.0
        rows, cols = linear_sum_assignment(W, maximize=True)
        return float(W[rows, cols].sum())

    def value(self, S: ItemSet) -> float:
        return self._match(list(S.indices))

    def values(self, X) -> np.ndarray:
        X = _as_matrix(X, self.n)
        return np.array([self._match(np.flatnonzero(row)) for row in X], dtype=float)

    def scaled(self, c: float) -> "OXS":
        return OXS(self.n, self.trees * c)

    def to_dict(self) -> dict:
        return {"n": self.n, "kind": self.kind, "trees": self.trees.tolist()}


@dataclass(frozen=True, eq=False)
class BudgetedAdditive(Valuation):
    """f(S) = min(c, |S & rset|), evaluated in integer arithmetic."""

    rset: ItemSet
    c: int
    kind = "budgeted"

    def __post_init__(self):
        if int(self.c) != self.c or self.c < 0:
            raise ValuationError(f"c: expected a nonnegative integer, got {self.c}")
        object.__setattr__(self, "c", int(self.c))

    @property
    def n(self) -> int:
        return self.rset.n

    def int_value(self, S: ItemSet) -> int:
        return min(self.c, len(S & self.rset))

    def value(self, S: ItemSet) -> float:
        return float(self.int_value(S))

    def values(self, X) -> np.ndarray:
        X = _as_matrix(X, self.n)
        hits = X[:, list(self.rset.indices)].sum(axis=1).astype(np.int64)
        return np.minimum(self.c, hits).astype(float)

    def to_dict(self) -> dict:
        return {"n": self.n, "kind": self.kind, "rset": list(self.rset.indices), "c": self.c}


@dataclass(frozen=True, eq=False)
class GoemansRank(Valuation):
    """f(S) = min(beta + |S \\ rset|, |S|, alpha_p), a matroid rank function."""

    rset: ItemSet
    alpha_p: int
    beta: int
    kind = "goemans"

    def __post_init__(self):
        for name in ("alpha_p", "beta"):
            val = getattr(self, name)
            if int(val) != val or val < 0:
                raise ValuationError(f"{name}: expected a nonnegative integer, got {val}")
            object.__setattr__(self, name, int(val))

    @property
    def n(self) -> int:
        return self.rset.n

    def int_value(self, S: ItemSet) -> int:
        outside = len(S) - len(S & self.rset)
        return min(self.beta + outside, len(S), self.alpha_p)

    def value(self, S: ItemSet) -> float:
        return float(self.int_value(S))

    def values(self, X) -> np.ndarray:
        X = _as_matrix(X, self.n)
        size = X.sum(axis=1).astype(np.int64)
        inside = X[:, list(self.rset.indices)].sum(axis=1).astype(np.int64)
        out = np.minimum(np.minimum(self.beta + size - inside, size), self.alpha_p)
        return out.astype(float)

    def to_dict(self) -> dict:
        return {"n": self.n, "kind": self.kind, "rset": list(self.rset.indices),
                "alpha": self.alpha_p, "beta": self.beta}


@dataclass(frozen=True, eq=False)
class ExplicitTable(Valuation):
    """Value per subset, indexed by bitmask (bit i set iff item i in S).

    Tables are checked to be monotone with f(empty) = 0 unless ``validate`` is
    False; unvalidated tables exist so the oracles can be shown violations.
    """

    n: int
    table: np.ndarray
    validate: bool = True
    kind = "table"

    def __post_init__(self):
        if not 0 <= self.n <= MAX_TABLE_N:
            raise ValuationError(f"n: explicit tables need n <= {MAX_TABLE_N}, got {self.n}")
        arr = np.array(self.table, dtype=float)
        if arr.shape != (1 << self.n,):
            raise ValuationError(f"values: expected {1 << self.n} entries, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValuationError("values: non-finite entry")
        if self.validate:
            if arr[0] != 0:
                raise ValuationError(f"values[0]: value of the empty set must be 0, got {arr[0]}")
            for i in range(self.n):
                b = 1 << i
                masks = np.arange(1 << self.n)
                lo = masks[(masks & b) == 0]
                bad = np.flatnonzero(arr[lo | b] < arr[lo] - TOL)
                if bad.size:
                    m = int(lo[bad[0]])
                    raise ValuationError(f"values[{m | b}]: not monotone (below values[{m}])")
        arr.flags.writeable = False
        object.__setattr__(self, "table", arr)

    @classmethod
    def from_function(cls, n: int, f, validate: bool = True) -> "ExplicitTable":
        return cls(n, [f(ItemSet.from_mask(n, m)) for m in range(1 << n)], validate)

    def value(self, S: ItemSet) -> float:
        if S.n != self.n:
            raise ValueError(f"set over n={S.n}, valuation has n={self.n}")
        return float(self.table[S.mask])

    def values(self, X) -> np.ndarray:
        X = _as_matrix(X, self.n)
        return self.table[matrix_to_masks(X)] if self.n else np.zeros(X.shape[0])

    def scaled(self, c: float) -> "ExplicitTable":
        return ExplicitTable(self.n, self.table * c, self.validate)

    def to_dict(self) -> dict:
        return {"n": self.n, "kind": self.kind, "values": self.table.tolist()}


# ---------------------------------------------------------------------------
# evaluation


def evaluate(v: Valuation, S: ItemSet) -> float:
    if S.n != v.n:
        raise ValueError(f"dimension mismatch: set over n={S.n}, valuation over n={v.n}")
    return v.value(S)


def evaluate_many(v: Valuation, X) -> np.ndarray:
    return v.values(X)


def all_values(v: Valuation) -> np.ndarray:
    """Values on every subset, indexed by bitmask."""
    if v.n > MAX_TABLE_N:
        raise ValueError(f"enumerating 2^{v.n} subsets is beyond n <= {MAX_TABLE_N}")
    if isinstance(v, ExplicitTable):
        return v.table.copy()
    masks = np.arange(1 << v.n)
    out = np.empty(masks.shape[0])
    chunk = 1 << 16
    for start in range(0, masks.shape[0], chunk):
        block = masks[start:start + chunk]
        out[start:start + chunk] = v.values(masks_to_matrix(block, v.n))
    return out


def as_table(v: Valuation, validate: bool = True) -> ExplicitTable:
    return ExplicitTable(v.n, all_values(v), validate)


@lru_cache(maxsize=16)
def _submask_pairs(s: int):
    """All (mask, sub) with sub a submask of mask over s bits, grouped by mask."""
    masks = np.zeros(1, dtype=np.int64)
    subs = np.zeros(1, dtype=np.int64)
    for i in range(s):
        b = 1 << i
        masks = np.concatenate([masks, masks | b, masks | b])
        subs = np.concatenate([subs, subs, subs | b])
    order = np.argsort(masks, kind="stable")
    masks, subs = masks[order], subs[order]
    starts = np.searchsorted(masks, np.arange(1 << s))
    return masks, subs, starts


def _max_table(w: np.ndarray) -> np.ndarray:
    """g[T] = max_{i in T} w[i] for every mask T over len(w) bits."""
    g = np.zeros(1 << w.shape[0])
    for i, wi in enumerate(w):
        b = 1 << i
        g[b:2 * b] = np.maximum(g[:b], wi)
    return g


def _partition_dp(trees: np.ndarray) -> np.ndarray:
    s = trees.shape[1]
    masks, subs, starts = _submask_pairs(s)
    dp = np.zeros(1 << s)
    for w in trees:
        cand = dp[masks ^ subs] + _max_table(w)[subs]
        dp = np.maximum.reduceat(cand, starts)
    return dp


def eval_oxs_bruteforce(v: OXS, S: ItemSet) -> float:
    """Best split of S among the MAX trees, by exhaustive subset DP.

    dp_j[A] = max over B subset of A of dp_{j-1}[A \\ B] + max_{i in B} w_j[i];
    items left out of every block are discarded. Independent of the matching
    evaluator, so it serves as its oracle.
    """
    if len(S) > BRUTEFORCE_MAX_ITEMS or v.trees.shape[0] > BRUTEFORCE_MAX_TREES:
        raise ValueError(f"brute force limited to |S| <= {BRUTEFORCE_MAX_ITEMS} and "
                         f"<= {BRUTEFORCE_MAX_TREES} trees")
    if S.n != v.n:
        raise ValueError(f"dimension mismatch: set over n={S.n}, valuation over n={v.n}")
    if not len(S):
        return 0.0
    return float(_partition_dp(v.trees[:, list(S.indices)])[-1])


def oxs_bruteforce_table(v: OXS) -> np.ndarray:
    """Brute-force OXS values on all 2^n subsets (n <= 12)."""
    if v.n > BRUTEFORCE_MAX_ITEMS or v.trees.shape[0] > BRUTEFORCE_MAX_TREES:
        raise ValueError("instance too large for the brute-force table")
    return _partition_dp(v.trees)


# ---------------------------------------------------------------------------
# constructions


def build_oxs_budgeted(rset: ItemSet, c: int) -> OXS:
    """OXS trees for min(c, |S & rset|): copies of one MAX tree over rset."""
    if c < 0:
        raise ValueError("c must be nonnegative")
    copies = min(int(c), len(rset))
    row = rset.indicator(float)
    return OXS(rset.n, np.tile(row, (copies, 1)))


def build_oxs_goemans(rset: ItemSet, alpha_p: int, beta: int, n: int) -> OXS:
    """OXS trees for min(beta + |S \\ rset|, |S|, alpha_p)."""
    if alpha_p < 0 or beta < 0:
        raise ValueError("alpha_p and beta must be nonnegative")
    if rset.n != n:
        raise ValueError(f"rset is over n={rset.n}, expected {n}")
    outside = rset.complement()
    if n <= alpha_p:
        singles = np.zeros((len(outside), n))
        singles[np.arange(len(outside)), outside.as_array()] = 1.0
        return OXS(n, np.vstack([build_oxs_budgeted(rset, beta).trees, singles]))
    if alpha_p <= beta:
        return build_oxs_budgeted(ItemSet.full(n), alpha_p)
    return OXS(n, np.vstack([np.tile(outside.indicator(float), (alpha_p - beta, 1)),
                             np.ones((beta, n))]))


def oxs_to_xos(v: OXS) -> XOS:
    """One SUM tree per choice of at most one leaf from each MAX tree.

    Choices that pick the same item twice are skipped, since an item can sit
    in only one block of a partition.
    """
    leaves = [v.leaves(j) for j in range(v.trees.shape[0])]
    if math.prod(len(l) + 1 for l in leaves) > CONVERSION_LIMIT:
        raise ValueError("OXS to XOS conversion exceeds 10^6 trees")
    rows = []
    for choice in itertools.product(*[[None, *l.tolist()] for l in leaves]):
        picked = [(j, i) for j, i in enumerate(choice) if i is not None]
        items = [i for _, i in picked]
        if not picked or len(set(items)) != len(items):
            continue
        row = np.zeros(v.n)
        for j, i in picked:
            row[i] = v.trees[j, i]
        rows.append(row)
    return XOS(v.n, np.array(rows).reshape(-1, v.n))


@dataclass(frozen=True)
class MetaIndex:
    """Meta-items: one per subset of [n] with at most ``R`` items."""

    n: int
    R: int
    subsets: tuple[tuple[int, ...], ...]

    @property
    def id_of(self) -> dict:
        return _meta_ids(self)

    def __len__(self) -> int:
        return len(self.subsets)

    def meta_set(self, S: ItemSet) -> ItemSet:
        ids = self.id_of
        members = [ids[t] for r in range(min(self.R, len(S)) + 1)
                   for t in itertools.combinations(S.indices, r)]
        return ItemSet(len(self.subsets), tuple(members))


@lru_cache(maxsize=8)
def _meta_ids(index: MetaIndex) -> dict:
    return {t: k for k, t in enumerate(index.subsets)}


def meta_index(n: int, R: int) -> MetaIndex:
    if n ** R > CONVERSION_LIMIT:
        raise ValueError(f"n^R = {n}^{R} exceeds 10^6 meta-items")
    subsets = tuple(t for r in range(R + 1) for t in itertools.combinations(range(n), r))
    return MetaIndex(n, R, subsets)


def oxs_to_unit_demand_meta(v: OXS) -> tuple[UnitDemand, MetaIndex]:
    index = meta_index(v.n, v.trees.shape[0])
    w = [v.value(ItemSet(v.n, t)) for t in index.subsets]
    return UnitDemand(w), index


def submodular_to_xos(v: Valuation) -> XOS:
    """MAX of n! SUM trees of marginal values along each permutation."""
    from .oracles import check_submodular

    if v.n > 7:
        raise ValueError("submodular to XOS conversion supports n <= 7")
    table = all_values(v)
    viol = check_submodular(v)
    if viol is not None:
        raise ValueError(f"input is not submodular: {viol}")
    rows = []
    for perm in itertools.permutations(range(v.n)):
        row = np.zeros(v.n)
        mask = 0
        for i in perm:
            row[i] = table[mask | 1 << i] - table[mask]
            mask |= 1 << i
        rows.append(np.maximum(row, 0.0))
    return XOS(v.n, np.array(rows).reshape(-1, v.n))


def demand_set(v: Valuation, prices) -> list[ItemSet]:
    """All payoff-maximizing bundles at per-item prices (ties within 1e-9)."""
    prices = np.asarray(prices, dtype=float)
    if prices.shape != (v.n,) or not np.all(np.isfinite(prices)):
        raise ValueError(f"prices: expected {v.n} finite entries")
    if v.n > MAX_TABLE_N:
        raise ValueError(f"demand enumeration needs n <= {MAX_TABLE_N}")
    masks = np.arange(1 << v.n)
    cost = np.zeros(masks.shape[0])
    for i, p in enumerate(prices):
        cost += np.where(masks >> i & 1, p, 0.0)
    payoff = all_values(v) - cost
    best = payoff.max()
    return [ItemSet.from_mask(v.n, int(m)) for m in np.flatnonzero(payoff >= best - TOL)]


# ---------------------------------------------------------------------------
# JSON schema


def _index_list(raw, field: str, n: int) -> ItemSet:
    if not isinstance(raw, list):
        raise ValuationError(f"{field}: expected a list of item indices")
    for k, i in enumerate(raw):
        if not isinstance(i, int) or isinstance(i, bool) or not 0 <= i < n:
            raise ValuationError(f"{field}[{k}]: index {i!r} out of range [0, {n})")
    return ItemSet(n, tuple(raw))


def _tree_rows(raw, field: str, n: int) -> list:
    if not isinstance(raw, list):
        raise ValuationError(f"{field}: expected a list of trees")
    rows = []
    for j, tree in enumerate(raw):
        if isinstance(tree, dict):
            row = np.zeros(n)
            for key, w in tree.items():
                i = int(key)
                if not 0 <= i < n:
                    raise ValuationError(f"{field}[{j}]: index {i} out of range [0, {n})")
                if w < 0:
                    raise ValuationError(f"{field}[{j}][{i}]: negative weight {w}")
                row[i] = w
            rows.append(row)
        else:
            rows.append(tree)
    return rows


def valuation_from_dict(d: dict[str, Any]) -> Valuation:
    try:
        n = d["n"]
        kind = d["kind"]
    except KeyError as e:
        raise ValuationError(f"{e.args[0]}: missing field") from None
    if not isinstance(n, int) or n < 0:
        raise ValuationError(f"n: expected a nonnegative integer, got {n!r}")

    def need(key):
        if key not in d:
            raise ValuationError(f"{key}: missing field for kind {kind!r}")
        return d[key]

    if kind == "linear":
        return Linear(_weights(need("weights"), "weights", n))
    if kind == "unit_demand":
        return UnitDemand(_weights(need("weights"), "weights", n))
    if kind in ("xos", "oxs"):
        rows = _tree_rows(need("trees"), "trees", n)
        return (XOS if kind == "xos" else OXS)(n, rows)
    if kind == "budgeted":
        return BudgetedAdditive(_index_list(need("rset"), "rset", n), need("c"))
    if kind == "goemans":
        return GoemansRank(_index_list(need("rset"), "rset", n), need("alpha"), need("beta"))
    if kind == "table":
        return ExplicitTable(n, need("values"))
    raise ValuationError(f"kind: unknown valuation kind {kind!r}")


def valuation_to_dict(v: Valuation) -> dict:
    return v.to_dict()


def load_valuation(path) -> Valuation:
    with open(path) as fh:
        return valuation_from_dict(json.load(fh))


def dump_valuation(v: Valuation, path) -> None:
    with open(path, "w") as fh:
        json.dump(v.to_dict(), fh)
