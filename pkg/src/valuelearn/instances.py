"""Instance generators: the sparse intersection family and its coverage targets,
the matroid-rank pair that value queries cannot tell apart, and random members
of every valuation class."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .itemset import ItemSet
from .valuations import (BudgetedAdditive, GoemansRank, Linear, OXS, UnitDemand, Valuation, XOS,
                         build_oxs_budgeted, build_oxs_goemans)

MAX_REJECTIONS = 10**4
MAX_FAMILY = 256


@dataclass
class IntersectionFamily:
    n: int
    sets: list[ItemSet]
    sizes: list[int]
    max_intersection: int
    size_bounds: tuple[float, float]
    intersection_bound: float
    rejections: int
    seed: int

    @property
    def k(self) -> int:
        return len(self.sets)

    def audit(self) -> dict:
        return {"n": self.n, "k": self.k, "seed": self.seed,
                "min_size": min(self.sizes), "max_size": max(self.sizes),
                "size_bounds": list(self.size_bounds),
                "max_intersection": self.max_intersection,
                "intersection_bound": self.intersection_bound,
                "intersection_log_base": 2, "rejections": self.rejections,
                "ok": self.audit_ok()}

    def audit_ok(self) -> bool:
        lo, hi = self.size_bounds
        return (all(lo <= s <= hi for s in self.sizes)
                and self.max_intersection <= self.intersection_bound)

    def to_dict(self) -> dict:
        return {"n": self.n, "seed": self.seed, "sets": [list(S.indices) for S in self.sets],
                "audit": self.audit()}


def gen_intersection_family(n: int, k: int, seed: int = 0) -> IntersectionFamily:
    """k random sets, each item kept with probability 1/sqrt(n), re-drawn until
    sqrt(n)/2 <= |A_i| <= 2 sqrt(n) and |A_i & A_j| <= log2(n) for all earlier j."""
    if n < 1024 or n & (n - 1):
        raise ValueError(f"n must be a power of two >= 1024, got {n}")
    if not 1 <= k <= min(n, MAX_FAMILY):
        raise ValueError(f"k must lie in [1, {min(n, MAX_FAMILY)}], got {k}")
    rng = np.random.default_rng(seed)
    root = math.sqrt(n)
    lo, hi = root / 2, 2 * root
    bound = math.log2(n)
    member = np.zeros((k, n), dtype=bool)
    sets, sizes = [], []
    rejections = 0
    max_inter = 0
    while len(sets) < k:
        size = rng.binomial(n, 1.0 / root)
        idx = np.sort(rng.choice(n, size=size, replace=False))
        inter = member[:len(sets)][:, idx].sum(axis=1) if sets else np.zeros(0, dtype=int)
        if not lo <= size <= hi or (inter.size and inter.max() > bound):
            rejections += 1
            if rejections > MAX_REJECTIONS:
                raise RuntimeError(f"gave up after {MAX_REJECTIONS} rejections; parameters too aggressive")
            continue
        if inter.size:
            max_inter = max(max_inter, int(inter.max()))
        member[len(sets), idx] = True
        sets.append(ItemSet(n, tuple(idx.tolist())))
        sizes.append(int(size))
    fam = IntersectionFamily(n, sets, sizes, max_inter, (lo, hi), bound, rejections, seed)
    assert fam.audit_ok()
    return fam


def build_fB(family: IntersectionFamily, B) -> XOS:
    """f_B(S) = max over A_i with i in B of |S & A_i|: one 0/1 SUM tree per member of B."""
    B = sorted(set(int(i) for i in B))
    if B and (B[0] < 0 or B[-1] >= family.k):
        raise ValueError(f"B must index into the family of size {family.k}")
    trees = np.zeros((len(B), family.n))
    for row, i in enumerate(B):
        trees[row, family.sets[i].as_array()] = 1.0
    return XOS(family.n, trees)


@dataclass
class GoemansPair:
    n: int
    x: float
    alpha_p: int
    beta: int
    rset: ItemSet
    g23: BudgetedAdditive
    gR: GoemansRank
    g23_oxs: OXS = field(repr=False)
    gR_oxs: OXS = field(repr=False)

    def __iter__(self):
        return iter((self.g23, self.gR, self.rset))

    def to_dict(self) -> dict:
        return {"n": self.n, "x": self.x, "alpha": self.alpha_p, "beta": self.beta,
                "rset": list(self.rset.indices), "g23": self.g23.to_dict(), "gR": self.gR.to_dict()}


def gen_goemans_pair(n: int, x: float, seed: int = 0) -> GoemansPair:
    """g23(S) = min(|S|, a) and gR(S) = min(b + |S \\ R|, |S|, a) with a = x sqrt(n)/5,
    b = x^2/5 and R a uniform random a-subset."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if x < 4 * math.sqrt(math.log2(n)):
        raise ValueError(f"x must be at least 4 sqrt(log2 n) = {4 * math.sqrt(math.log2(n)):.3f}")
    alpha_p = int(round(x * math.sqrt(n) / 5))
    beta = int(round(x * x / 5))
    if not 1 <= alpha_p <= n:
        raise ValueError(f"alpha' = {alpha_p} must lie in [1, n]")
    rng = np.random.default_rng(seed)
    rset = ItemSet(n, tuple(rng.choice(n, size=alpha_p, replace=False).tolist()))
    full = ItemSet.full(n)
    return GoemansPair(n, x, alpha_p, beta, rset,
                       BudgetedAdditive(full, alpha_p), GoemansRank(rset, alpha_p, beta),
                       build_oxs_budgeted(full, alpha_p), build_oxs_goemans(rset, alpha_p, beta, n))


# ---------------------------------------------------------------------------
# random class members

RANDOM_TAGS = ("linear", "unit_demand", "xos", "oxs", "budgeted", "goemans",
               "oxs-r-leaves", "oxs-r-trees", "xos-r-leaves", "xos-r-trees")


def _weights(rng, shape, p: dict) -> np.ndarray:
    low, high = float(p.get("low", 0.0)), float(p.get("high", 1.0))
    if p.get("integer", False):
        w = rng.integers(int(low), int(high) + 1, size=shape).astype(float)
    else:
        w = rng.uniform(low, high, size=shape)
    density = float(p.get("density", 1.0))
    if density < 1.0:
        w = w * (rng.random(shape) < density)
    return w


def _sparse_rows(rng, k: int, n: int, R: int, p: dict) -> np.ndarray:
    rows = np.zeros((k, n))
    for j in range(k):
        leaves = rng.choice(n, size=int(rng.integers(1, min(R, n) + 1)), replace=False)
        rows[j, leaves] = _weights(rng, leaves.shape[0], {**p, "density": 1.0})
    return rows


def gen_random(class_tag: str, n: int, size_params: dict | None = None, seed: int = 0) -> Valuation:
    """Random member of a class. Recognized size_params: trees, R, low, high,
    integer, density. The -r- tags bound either leaves per tree or tree count by R."""
    p = dict(size_params or {})
    rng = np.random.default_rng(seed)
    R = int(p.get("R", 2))
    trees = p.get("trees")
    k = int(trees) if trees is not None else int(rng.integers(1, 5))
    if class_tag == "linear":
        return Linear(_weights(rng, n, p))
    if class_tag == "unit_demand":
        return UnitDemand(_weights(rng, n, p))
    if class_tag == "xos":
        return XOS(n, _weights(rng, (k, n), p))
    if class_tag == "oxs":
        return OXS(n, _weights(rng, (k, n), p))
    if class_tag == "oxs-r-leaves":
        return OXS(n, _sparse_rows(rng, k, n, R, p))
    if class_tag == "xos-r-leaves":
        return XOS(n, _sparse_rows(rng, k, n, R, p))
    if class_tag == "oxs-r-trees":
        k = int(trees) if trees is not None else int(rng.integers(1, R + 1))
        return OXS(n, _weights(rng, (min(k, R), n), p))
    if class_tag == "xos-r-trees":
        k = int(trees) if trees is not None else int(rng.integers(1, R + 1))
        return XOS(n, _weights(rng, (min(k, R), n), p))
    if class_tag == "budgeted":
        rset = ItemSet.from_indicator(rng.random(n) < 0.5)
        return BudgetedAdditive(rset, int(p.get("c", rng.integers(0, n + 1))))
    if class_tag == "goemans":
        rset = ItemSet.from_indicator(rng.random(n) < 0.5)
        alpha_p = int(p.get("alpha", rng.integers(1, n + 2)))
        beta = int(p.get("beta", rng.integers(0, n + 1)))
        return GoemansRank(rset, alpha_p, beta)
    raise ValueError(f"unknown class tag {class_tag!r}; choose from {list(RANDOM_TAGS)}")
