"""Dense simplex LP solver and the consistent linear-separator problem.

The separator problem asks for w >= 0 and z >= 1 with

    y * (w . x - z * t) >= 1        for every labeled point ((x, t), y)

and w_j = 0 on a set of forced-zero coordinates. Strict separation is
normalized to margin 1, which only rescales (w, z).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
MARGIN_TOL = 1e-7
DEGENERATE_STREAK = 50
STALL_TOL = 1e-11
PERTURB = 1e-7


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float = float("nan")
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    pivots: int = 0


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    nz = np.flatnonzero(col)
    if nz.size:
        T[nz] -= np.outer(col[nz], T[r])


def _run_simplex(T: np.ndarray, basis: np.ndarray, allowed: int) -> tuple[str, int]:
    """Maximize over a tableau whose last row holds reduced costs.

    Columns >= ``allowed`` (excluding the rhs) never enter. Pivoting follows
    Dantzig's rule. After a run of pivots that leave the objective unchanged,
    the right-hand side is perturbed by small random amounts to break
    degeneracy; a second stall switches to Bland's rule for good, which
    guarantees termination. The exact right-hand side is carried alongside
    and restored at the end, with dual simplex pivots repairing any rows the
    perturbation left infeasible.
    """
    m = T.shape[0] - 1
    bland = perturbed = False
    exact = None
    streak = 0
    pivots = 0
    limit = 200 * (m + allowed) + 1000

    def step(r: int, c: int) -> None:
        nonlocal pivots
        if exact is not None:
            col = T[:, c].copy()
            exact[r] /= col[r]
            col[r] = 0.0
            exact[:] -= col * exact[r]
        _pivot(T, r, c)
        basis[r] = c
        pivots += 1
        if pivots > limit:
            raise RuntimeError("simplex exceeded its pivot limit")

    while True:
        red = T[-1, :allowed]
        if bland:
            cand = np.flatnonzero(red < -COST_TOL)
            c = int(cand[0]) if cand.size else -1
        else:
            c = int(np.argmin(red))
            if red[c] >= -COST_TOL:
                c = -1
        if c < 0:
            break
        col = T[:m, c]
        pos = np.flatnonzero(col > PIVOT_TOL)
        if not pos.size:
            return "unbounded", pivots
        ratios = T[pos, -1] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        r = int(ties[np.argmin(basis[ties])])
        before = T[-1, -1]
        step(r, c)
        rhs = T[:m, -1]
        rhs[np.abs(rhs) <= PIVOT_TOL] = 0.0
        stalled = abs(T[-1, -1] - before) <= STALL_TOL * max(1.0, abs(before))
        streak = streak + 1 if stalled else 0
        if streak > DEGENERATE_STREAK:
            streak = 0
            if not perturbed:
                perturbed = True
                exact = T[:, -1].copy()
                noise = np.random.default_rng(m).uniform(1.0, 2.0, m)
                T[:m, -1] += PERTURB * noise * (1.0 + np.abs(T[:m, -1]))
            else:
                bland = True

    if exact is not None:
        T[:, -1] = exact
        _dual_repair(T, basis, allowed, step)
    return "optimal", pivots


def _dual_repair(T: np.ndarray, basis: np.ndarray, allowed: int, step) -> None:
    """Dual simplex pivots until every right-hand side is nonnegative.

    Reduced costs stay nonnegative, so the basis remains optimal."""
    m = T.shape[0] - 1
    while True:
        rhs = T[:m, -1]
        rhs[np.abs(rhs) <= PIVOT_TOL] = 0.0
        neg = np.flatnonzero(rhs < 0)
        if not neg.size:
            return
        r = int(neg[0])
        row = T[r, :allowed]
        cand = np.flatnonzero(row < -PIVOT_TOL)
        if not cand.size:
            raise RuntimeError("simplex lost feasibility while restoring the right-hand side")
        ratios = np.maximum(T[-1, cand], 0.0) / -row[cand]
        step(r, int(cand[np.argmin(ratios)]))


def lp_maximize(c, A_ub, b_ub, nonneg: bool = True) -> LPResult:
    """max c.x subject to A_ub x <= b_ub (and x >= 0 when ``nonneg``)."""
    c = np.asarray(c, dtype=float)
    nv = c.shape[0]
    A = np.asarray(A_ub, dtype=float).reshape(-1, nv)
    b = np.asarray(b_ub, dtype=float).reshape(-1)
    if A.shape[0] != b.shape[0]:
        raise ValueError("constraint matrix and bound vector disagree in length")
    if not nonneg:
        res = lp_maximize(np.concatenate([c, -c]), np.hstack([A, -A]), b)
        if res.x is not None:
            res.x = res.x[:nv] - res.x[nv:]
        return res

    m = A.shape[0]
    flip = b < 0
    sign = np.where(flip, -1.0, 1.0)
    arts = np.flatnonzero(flip)
    k = arts.size
    ncol = nv + m + k
    T = np.zeros((m + 1, ncol + 1))
    T[:m, :nv] = A * sign[:, None]
    T[:m, nv:nv + m] = np.diag(sign)
    T[arts, nv + m + np.arange(k)] = 1.0
    T[:m, -1] = b * sign
    basis = np.arange(nv, nv + m)
    basis[arts] = nv + m + np.arange(k)
    pivots = 0

    if k:
        T[-1] = -T[arts].sum(axis=0)
        T[-1, nv + m:ncol] = 0.0
        status, p = _run_simplex(T, basis, ncol)
        pivots += p
        if T[-1, -1] < -1e-7 * max(1.0, np.abs(b).max()):
            return LPResult("infeasible", pivots=pivots)
        keep = np.ones(m, dtype=bool)
        for r in np.flatnonzero(basis >= nv + m):
            row = T[r, :nv + m]
            nz = np.flatnonzero(np.abs(row) > PIVOT_TOL)
            if nz.size:
                _pivot(T, r, int(nz[0]))
                basis[r] = int(nz[0])
            else:
                keep[r] = False
        T = np.vstack([T[:m][keep], T[-1:]])
        T = np.delete(T, np.arange(nv + m, ncol), axis=1)
        basis = basis[keep]
        m_eff = T.shape[0] - 1
    else:
        m_eff = m

    cost = np.zeros(nv + m)
    cost[:nv] = c
    T[-1, :-1] = cost[basis] @ T[:m_eff, :-1] - cost
    T[-1, -1] = cost[basis] @ T[:m_eff, -1]
    status, p = _run_simplex(T, basis, nv + m)
    pivots += p
    if status == "unbounded":
        return LPResult("unbounded", pivots=pivots)
    x = np.zeros(nv + m)
    x[basis] = T[:m_eff, -1]
    duals = T[-1, nv:nv + m].copy()
    return LPResult("optimal", float(c @ x[:nv]), x[:nv].copy(), duals, pivots)


# ---------------------------------------------------------------------------
# separator


class SeparatorInfeasible(RuntimeError):
    """No (w, z) separates the labeled points."""


@dataclass
class SeparatorProblem:
    X: np.ndarray                 # (m, d) feature part of each point
    t: np.ndarray                 # (m,) last coordinate of each point
    y: np.ndarray                 # (m,) labels in {+1, -1}
    zero_coords: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim == 1:
            self.X = self.X.reshape(-1, 0) if self.X.size == 0 else self.X[None, :]
        self.t = np.asarray(self.t, dtype=float).reshape(-1)
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        self.zero_coords = np.asarray(self.zero_coords, dtype=np.int64).reshape(-1)
        m = self.X.shape[0]
        if self.t.shape[0] != m or self.y.shape[0] != m:
            raise ValueError("points, last coordinates and labels differ in count")
        if not np.all(np.isin(self.y, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.t))):
            raise ValueError("points must be finite")
        d = self.X.shape[1]
        if self.zero_coords.size and (self.zero_coords.min() < 0 or self.zero_coords.max() >= d):
            raise ValueError(f"zero_coords must lie in [0, {d})")

    @classmethod
    def from_points(cls, points, zero_coords=()) -> "SeparatorProblem":
        """Build from ((x_1..x_d, t), label) pairs."""
        if not points:
            raise ValueError("use the array constructor for an empty problem")
        P = np.array([np.asarray(p, dtype=float) for p, _ in points])
        y = np.array([lab for _, lab in points], dtype=float)
        return cls(P[:, :-1], P[:, -1], y, np.asarray(zero_coords, dtype=np.int64))

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def margins(self, w: np.ndarray, z: float) -> np.ndarray:
        return self.y * (self.X @ w - z * self.t)


@dataclass
class SeparatorSolution:
    w: np.ndarray
    z: float


def solve_consistent_separator(prob: SeparatorProblem) -> SeparatorSolution:
    """Find w >= 0, z >= 1 with every margin >= 1, minimizing sum(w) + z.

    With more points than unknowns the LP dual is solved instead; its origin
    is feasible, so no phase one is needed, and the primal optimum is read
    off the dual's reduced costs.
    """
    d = prob.dim
    m = prob.X.shape[0]
    w = np.zeros(d)
    if m == 0:
        return SeparatorSolution(w, 1.0)
    active = np.ones(d, dtype=bool)
    active[prob.zero_coords] = False
    active &= np.any(prob.X != 0, axis=0)
    cols = np.flatnonzero(active)
    # variables: w over active columns, then z' = z - 1 >= 0
    A = np.hstack([-prob.y[:, None] * prob.X[:, cols], (prob.y * prob.t)[:, None]])
    b = -1.0 - prob.y * prob.t
    nvar = A.shape[1]

    u = None
    if m > nvar:
        dual = lp_maximize(-b, -A.T, np.ones(nvar))
        if dual.status == "unbounded":
            raise SeparatorInfeasible("separator LP is infeasible")
        if dual.status == "optimal":
            u = np.maximum(dual.duals, 0.0)
            if np.min(prob.margins(_scatter(u, cols, d), 1.0 + u[-1])) < 1 - MARGIN_TOL:
                u = None
    if u is None:
        primal = lp_maximize(-np.ones(nvar), A, b)
        if primal.status != "optimal":
            raise SeparatorInfeasible("separator LP is infeasible")
        u = np.maximum(primal.x, 0.0)
    w = _scatter(u, cols, d)
    z = 1.0 + u[-1]
    worst = float(np.min(prob.margins(w, z)))
    if worst < 1 - MARGIN_TOL:
        raise SeparatorInfeasible(f"solver returned margin {worst:.3g} < 1")
    return SeparatorSolution(w, z)


def _scatter(u: np.ndarray, cols: np.ndarray, d: int) -> np.ndarray:
    w = np.zeros(d)
    w[cols] = u[:-1]
    return w
