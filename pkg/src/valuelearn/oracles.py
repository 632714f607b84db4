"""Exhaustive class-membership checks for small ground sets.

Each check returns None on pass or a Violation whose witness, re-evaluated
through ``evaluate``, reproduces the failed inequality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .itemset import ItemSet, masks_to_matrix
from .linsep import lp_maximize
from .valuations import Valuation, all_values, evaluate

TOL = 1e-9
POLY_TOL = 1e-6

LIMITS = {"monotone": 16, "subadditive": 14, "submodular": 14, "gs_triple": 12, "polyhedron": 6}


@dataclass
class Violation:
    kind: str
    sets: tuple[ItemSet, ...]
    items: tuple[int, ...] = ()
    values: dict = field(default_factory=dict)

    def recheck(self, v: Valuation) -> bool:
        """True iff the witness still violates its inequality on ``v``."""
        f = lambda S: evaluate(v, S)  # noqa: E731
        if self.kind == "monotone":
            S, = self.sets
            i, = self.items
            return f(S.add(i)) < f(S) - TOL
        if self.kind == "subadditive":
            S, T = self.sets
            return f(S | T) > f(S) + f(T) + TOL
        if self.kind == "submodular":
            S, = self.sets
            i, j = self.items
            return f(S.add(i).add(j)) - f(S.add(i)) > f(S.add(j)) - f(S) + TOL
        if self.kind == "gs_triple":
            sums = _triple_sums(f, self.sets[0], self.items)
            return _unique_max(np.array([sums]))[0] >= 0
        if self.kind == "polyhedron":
            T, = self.sets
            opt = polyhedron_max(all_values(v), T)
            return abs(opt - f(T)) > POLY_TOL
        raise ValueError(f"unknown violation kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sets": [list(S.indices) for S in self.sets],
                "items": list(self.items), "values": self.values}

    def __str__(self) -> str:
        sets = ", ".join(map(str, self.sets))
        vals = ", ".join(f"{k}={v:g}" for k, v in self.values.items())
        return f"{self.kind} violation at sets ({sets}) items {list(self.items)}: {vals}"


def _guard(v: Valuation, kind: str) -> np.ndarray:
    if v.n > LIMITS[kind]:
        raise ValueError(f"{kind} check enumerates subsets and needs n <= {LIMITS[kind]}")
    return all_values(v)


def _free_masks(n: int, bits: int) -> np.ndarray:
    masks = np.arange(1 << n)
    return masks[(masks & bits) == 0]


def check_monotone(v: Valuation) -> Violation | None:
    f = _guard(v, "monotone")
    for i in range(v.n):
        b = 1 << i
        lo = _free_masks(v.n, b)
        bad = np.flatnonzero(f[lo | b] < f[lo] - TOL)
        if bad.size:
            m = int(lo[bad[0]])
            return Violation("monotone", (ItemSet.from_mask(v.n, m),), (i,),
                             {"f(S)": f[m], "f(S+i)": f[m | b]})
    return None


def check_subadditive(v: Valuation) -> Violation | None:
    f = _guard(v, "subadditive")
    masks = np.arange(1 << v.n)
    for s in range(1 << v.n):
        t = masks[s:]
        bad = np.flatnonzero(f[s | t] > f[s] + f[t] + TOL)
        if bad.size:
            u = int(t[bad[0]])
            return Violation("subadditive", (ItemSet.from_mask(v.n, s), ItemSet.from_mask(v.n, u)),
                             values={"f(S)": f[s], "f(T)": f[u], "f(S|T)": f[s | u]})
    return None


def check_submodular(v: Valuation) -> Violation | None:
    f = _guard(v, "submodular")
    for i, j in itertools.combinations(range(v.n), 2):
        bi, bj = 1 << i, 1 << j
        S = _free_masks(v.n, bi | bj)
        lhs = f[S | bi | bj] - f[S | bi]
        rhs = f[S | bj] - f[S]
        for a, b, l, r in ((i, j, lhs, rhs), (j, i, f[S | bi | bj] - f[S | bj], f[S | bi] - f[S])):
            bad = np.flatnonzero(l > r + TOL)
            if bad.size:
                m = int(S[bad[0]])
                return Violation("submodular", (ItemSet.from_mask(v.n, m),), (a, b),
                                 {"f(S+i+j)-f(S+i)": float(l[bad[0]]),
                                  "f(S+j)-f(S)": float(r[bad[0]])})
    return None


def _unique_max(sums: np.ndarray) -> np.ndarray:
    """Index of a strict unique maximizer per row (beating both by > TOL), else -1."""
    out = np.full(sums.shape[0], -1)
    for k in range(3):
        others = np.delete(sums, k, axis=1).max(axis=1)
        out[sums[:, k] > others + TOL] = k
    return out


def _triple_sums(f, S: ItemSet, abc) -> tuple[float, float, float]:
    a, b, c = abc
    base = f(S)
    m = lambda *xs: f(S.union(ItemSet(S.n, xs))) - base  # noqa: E731
    return m(a, b) + m(c), m(a, c) + m(b), m(b, c) + m(a)


def check_gs_triples(v: Valuation) -> Violation | None:
    """No unique maximizer among f^S(ab)+f^S(c), f^S(ac)+f^S(b), f^S(bc)+f^S(a).

    f^S(T) = f(S | T) - f(S). Requires a monotone input.
    """
    f = _guard(v, "gs_triple")
    if check_monotone(v) is not None:
        raise ValueError("triple condition is only defined here for monotone valuations")
    names = ("f(ab)+f(c)", "f(ac)+f(b)", "f(bc)+f(a)")
    for a, b, c in itertools.combinations(range(v.n), 3):
        ba, bb, bc = 1 << a, 1 << b, 1 << c
        S = _free_masks(v.n, ba | bb | bc)
        fS = f[S]
        m = lambda bits: f[S | bits] - fS  # noqa: E731
        sums = np.column_stack([m(ba | bb) + m(bc), m(ba | bc) + m(bb), m(bb | bc) + m(ba)])
        which = _unique_max(sums)
        bad = np.flatnonzero(which >= 0)
        if bad.size:
            k = bad[0]
            s = int(S[k])
            vals = {nm: float(x) for nm, x in zip(names, sums[k])}
            vals.update({"f^S(a)": float(m(ba)[k]), "f^S(b)": float(m(bb)[k]),
                         "f^S(c)": float(m(bc)[k]), "f^S(ab)": float(m(ba | bb)[k]),
                         "f^S(ac)": float(m(ba | bc)[k]), "f^S(bc)": float(m(bb | bc)[k])})
            return Violation("gs_triple", (ItemSet.from_mask(v.n, s),), (a, b, c), vals)
    return None


def polyhedron_max(table: np.ndarray, T: ItemSet) -> float:
    """max sum_{i in T} x_i over x >= 0 with sum_{i in S} x_i <= f(S) for all S."""
    n = T.n
    A = masks_to_matrix(np.arange(1, 1 << n), n).astype(float)
    res = lp_maximize(T.indicator(float), A, table[1:])
    if res.status != "optimal":
        raise RuntimeError(f"polyhedron LP returned {res.status}")
    return res.value


def check_xos_polyhedron(v: Valuation) -> Violation | None:
    """f(T) equals the LP optimum over the polyhedron of f, for every T."""
    f = _guard(v, "polyhedron")
    for t in range(1, 1 << v.n):
        T = ItemSet.from_mask(v.n, t)
        opt = polyhedron_max(f, T)
        if abs(opt - f[t]) > POLY_TOL:
            return Violation("polyhedron", (T,), values={"f(T)": f[t], "lp": opt})
    return None


CHECKS = {
    "monotone": check_monotone,
    "subadd": check_subadditive,
    "submod": check_submodular,
    "gs": check_gs_triples,
    "polyhedron": check_xos_polyhedron,
}


def run_checks(v: Valuation, names) -> dict:
    report = {}
    for name in names:
        if name not in CHECKS:
            raise ValueError(f"unknown check {name!r}; choose from {sorted(CHECKS)}")
        try:
            viol = CHECKS[name](v)
        except ValueError as e:
            report[name] = {"status": "error", "message": str(e)}
            continue
        report[name] = {"status": "pass"} if viol is None else {"status": "violation", **viol.to_dict()}
    return report
