"""Learning from buy/no-buy answers to posted bundle prices.

The agent holds an integral valuation bounded by H and only ever reveals
whether it would buy a bundle at a quoted price. Two protocols:

* pmac_with_prices: quote a random grid price per sampled bundle, turn each
  decision into a labeled point, and fit a rooted-linear hypothesis through
  the same separator used by the sample learners.
* vq_with_prices: probe every item at prices 1, 2, 4, ..., H to learn item
  values within a factor of 2, then build an item-based hypothesis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .itemset import ItemSet
from .learners import LabeledPoint, LearnerInfeasible, RawFeatures, RootedLinearHypothesis
from .linsep import SeparatorInfeasible, SeparatorProblem, solve_consistent_separator
from .query_learners import CLASS_TAGS, item_hypothesis
from .valuations import (BudgetedAdditive, ExplicitTable, GoemansRank, Linear, OXS, UnitDemand,
                         Valuation, XOS)


def _is_integral(v: Valuation) -> bool:
    if isinstance(v, (Linear, UnitDemand)):
        arr = v.weights
    elif isinstance(v, (XOS, OXS)):
        arr = v.trees
    elif isinstance(v, ExplicitTable):
        arr = v.table
    elif isinstance(v, (BudgetedAdditive, GoemansRank)):
        return True
    else:
        return False
    return bool(np.all(arr == np.round(arr)))


class AgentOracle:
    """Answers only "would you buy S at price q", i.e. q <= f*(S)."""

    def __init__(self, valuation: Valuation, H: int):
        if not _is_integral(valuation):
            raise ValueError("price learning needs an integral-valued valuation")
        top = valuation.value(ItemSet.full(valuation.n))
        if H < 1 or top > H:
            raise ValueError(f"H={H} must be >= 1 and bound f([n]) = {top:g}")
        self.__v = valuation
        self.n = valuation.n
        self.H = int(H)
        self.queries = 0

    def buy(self, S: ItemSet, q: float) -> bool:
        self.queries += 1
        return bool(q <= self.__v.value(S))

    def buy_many(self, X, q) -> np.ndarray:
        X = np.asarray(X, dtype=bool).reshape(-1, self.n)
        self.queries += X.shape[0]
        return np.asarray(q, dtype=float) <= self.__v.values(X)


@dataclass(frozen=True)
class PriceGrid:
    eta: float
    H: int
    prices: np.ndarray = field(repr=False)

    @property
    def ratio(self) -> float:
        return 1.0 + self.eta / 3.0

    @property
    def N(self) -> int:
        return self.prices.shape[0] - 2


def price_grid(H: int, eta: float) -> PriceGrid:
    """Prices (1+eta/3)^i for i = 0..N+1 with N = floor(log_{1+eta/3} H)."""
    if H < 1 or eta <= 0:
        raise ValueError("need H >= 1 and eta > 0")
    ratio = 1.0 + eta / 3.0
    N = int(math.floor(math.log(H) / math.log(ratio)))
    while ratio ** (N + 1) <= H:
        N += 1
    while N > 0 and ratio ** N > H:
        N -= 1
    return PriceGrid(eta, int(H), ratio ** np.arange(N + 2))


def quote_and_label(S: ItemSet, q: float, bought: bool, approx_beta: float, p: float) -> LabeledPoint:
    """Buy gives ((chi(S), q^p), +1); no buy gives ((chi(S), approx_beta q^p), -1)."""
    if q <= 0:
        raise ValueError("prices must be positive")
    last = q ** p if bought else approx_beta * q ** p
    return LabeledPoint(np.append(S.indicator(float), last), 1 if bought else -1)


def default_sample_size(n: int, H: int, eta: float, eps: float, delta: float) -> int:
    """4 (n log2 H / (eta eps)) ln(n log2 H / (eta eps delta))."""
    base = n * max(1.0, math.log2(H)) / (eta * eps)
    return int(math.ceil(4 * base * math.log(base / delta)))


def _draw(sampler, rng, m):
    return np.asarray(sampler.sample(rng, m) if hasattr(sampler, "sample") else sampler(rng, m),
                      dtype=bool)


@dataclass
class PricingRound:
    round: int
    set: ItemSet
    price: float
    bought: bool
    explore: bool

    def csv_row(self) -> list:
        return [self.round, " ".join(map(str, self.set.indices)), repr(self.price), int(self.bought)]


def mixed_pricing(agent: AgentOracle, sampler, base_pricer, explore_prob: float,
                  approx_beta: float, p: float, eta: float, eps: float = 0.1,
                  delta: float = 0.1, m: int | None = None,
                  rng: np.random.Generator | int | None = None):
    """Quote base_pricer(S) with probability 1-explore_prob, else a random grid price.

    Only exploration rounds feed the learner; the log records every round.
    Returns (hypothesis, log).
    """
    if not 0 < explore_prob <= 1:
        raise ValueError("explore_prob must lie in (0, 1]")
    if approx_beta < 1 or p <= 0:
        raise ValueError("need approx_beta >= 1 and p > 0")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng or 0)
    n, H = agent.n, agent.H
    grid = price_grid(H, eta)
    if m is None:
        m = default_sample_size(n, H, eta, eps, delta)
    X = _draw(sampler, gen, m).reshape(-1, n)
    explore = np.ones(m, dtype=bool) if explore_prob == 1 else gen.random(m) < explore_prob
    q = grid.prices[gen.integers(0, grid.prices.shape[0], m)]
    for r in np.flatnonzero(~explore):
        q[r] = float(base_pricer(ItemSet.from_indicator(X[r])))
    bought = agent.buy_many(X, q)
    log = [PricingRound(r, ItemSet.from_indicator(X[r]), float(q[r]), bool(bought[r]),
                        bool(explore[r])) for r in range(m)]

    Xe, qe, be = X[explore], q[explore], bought[explore]
    zero = ~be & (qe <= 1.0)
    U0 = ItemSet.from_indicator(Xe[zero].any(axis=0) if zero.any() else np.zeros(n, bool))
    keep = ~zero
    t = np.where(be[keep], qe[keep] ** p, approx_beta * qe[keep] ** p)
    y = np.where(be[keep], 1.0, -1.0)
    prob = SeparatorProblem(Xe[keep].astype(float).reshape(-1, n), t, y, U0.as_array())
    try:
        sol = solve_consistent_separator(prob)
    except SeparatorInfeasible as e:
        raise LearnerInfeasible(
            f"decisions not separable for approx_beta={approx_beta}, p={p}: {e}") from e
    hyp = RootedLinearHypothesis(sol.w, float(sol.z), p, approx_beta, U0, RawFeatures(n),
                                 scale=1.0 / grid.ratio)
    return hyp, log


def pmac_with_prices(agent: AgentOracle, sampler, approx_beta: float, p: float, eta: float,
                     eps: float = 0.1, delta: float = 0.1, m: int | None = None,
                     rng: np.random.Generator | int | None = None, return_log: bool = False):
    """Every round explores; hypothesis is (1/(1+eta/3)) (w.chi / (approx_beta z))^(1/p)."""
    hyp, log = mixed_pricing(agent, sampler, None, 1.0, approx_beta, p, eta, eps, delta, m, rng)
    return (hyp, log) if return_log else hyp


def probe_item_value(agent: AgentOracle, i: int, H: int | None = None) -> int:
    """Largest price in 1, 2, 4, ..., H at which {i} is bought, or 0."""
    H = agent.H if H is None else int(H)
    if H < 1 or H & (H - 1):
        raise ValueError(f"H must be a power of two, got {H}")
    S = ItemSet(agent.n, (i,))
    best, q = 0, 1
    while q <= H and agent.buy(S, q):
        best, q = q, 2 * q
    return best


def vq_with_prices(agent: AgentOracle, class_tag: str, R: float, H: int | None = None):
    """Item-based hypothesis from probed item values; factor 2R under the class assumption."""
    if class_tag not in CLASS_TAGS:
        raise ValueError(f"unknown class tag {class_tag!r}; choose from {list(CLASS_TAGS)}")
    est = [probe_item_value(agent, i, H) for i in range(agent.n)]
    return item_hypothesis(est, class_tag, R)
