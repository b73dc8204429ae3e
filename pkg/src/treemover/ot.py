"""Exact discrete optimal transport: assignments and transportation plans.

Two solvers cover everything the distance needs. `solve_assignment` handles
unnormalised transport between equal-mass multisets, which reduces to linear
assignment once the smaller side is padded. `solve_transport` handles general
non-negative marginals and is used for dataset-level distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog


@dataclass(frozen=True)
class TransportPlan:
    """Solution of a transport problem.

    Exactly one of `permutation` (assignment problems; permutation[i] is the
    column assigned to row i of the padded matrix) and `flow` (general
    problems; dense matrix of shipped mass) is set.
    """

    cost: float
    permutation: np.ndarray = None
    flow: np.ndarray = None
    normalized: bool = False


def _check_cost(c, square=False):
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2:
        raise ValueError(f"cost matrix must be 2-D, got shape {c.shape}")
    if square and c.shape[0] != c.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {c.shape}")
    if c.size and not np.all(np.isfinite(c)):
        raise ValueError("cost matrix must be finite")
    if c.size and c.min() < 0:
        raise ValueError("cost matrix must be non-negative")
    return c


def _assignment_cost(c):
    """Minimum assignment cost without plan extraction (hot path)."""
    rows, cols = linear_sum_assignment(c)
    return float(c[rows, cols].sum())


def _lexmin_assignment(c, best):
    """Lexicographically smallest permutation among the optimal ones.

    Greedy per row: commit to the smallest column whose best completion still
    meets the optimal value. Ties are exact in well-posed inputs; the epsilon
    only absorbs float noise from re-solved subproblems.
    """
    m = c.shape[0]
    tol = 1e-12 * max(1.0, abs(best))
    avail = list(range(m))
    prefix = 0.0
    perm = np.empty(m, dtype=np.intp)
    for i in range(m):
        for j in avail:
            rest = [col for col in avail if col != j]
            tail = 0.0
            if rest:
                tail = _assignment_cost(c[i + 1 :, rest])
            if prefix + c[i, j] + tail <= best + tol:
                perm[i] = j
                prefix += c[i, j]
                avail.remove(j)
                break
        else:  # pragma: no cover - defensive; optimum is always completable
            raise RuntimeError("no completion met the optimal value")
    return perm


def solve_assignment(cost):
    """Minimum-cost perfect matching on a square non-negative cost matrix.

    Returns the optimal value and, among all optimal permutations, the
    lexicographically smallest one, so equal inputs always yield the same
    plan.
    """
    c = _check_cost(cost, square=True)
    m = c.shape[0]
    if m == 0:
        return TransportPlan(cost=0.0, permutation=np.empty(0, dtype=np.intp))
    best = _assignment_cost(c)
    perm = _lexmin_assignment(c, best)
    total = float(c[np.arange(m), perm].sum())
    return TransportPlan(cost=total, permutation=perm)


def _peel_flows(support, row_mass, col_mass):
    """Recover vertex flows on an acyclic support by leaf peeling.

    Repeatedly resolves the first (row-major) support cell that is alone in
    its row or column, so every flow is a plain signed sum of the input
    marginals. Returns None when the support contains a cycle.
    """
    m, n = len(row_mass), len(col_mass)
    rows_rem = [float(x) for x in row_mass]
    cols_rem = [float(x) for x in col_mass]
    cells = sorted(support)
    flow = np.zeros((m, n))
    while cells:
        row_count = {}
        col_count = {}
        for i, j in cells:
            row_count[i] = row_count.get(i, 0) + 1
            col_count[j] = col_count.get(j, 0) + 1
        leaf = None
        for i, j in cells:
            if row_count[i] == 1:
                leaf = (i, j, "row")
                break
            if col_count[j] == 1:
                leaf = (i, j, "col")
                break
        if leaf is None:
            return None
        i, j, side = leaf
        f = rows_rem[i] if side == "row" else cols_rem[j]
        if f < -1e-9:
            return None
        f = max(f, 0.0)
        flow[i, j] = f
        rows_rem[i] -= f
        cols_rem[j] -= f
        cells.remove((i, j))
    scale = max(1.0, sum(float(x) for x in row_mass))
    if any(abs(r) > 1e-9 * scale for r in rows_rem):
        return None
    if any(abs(c) > 1e-9 * scale for c in cols_rem):
        return None
    return flow


def _flow_cost(c, flow):
    """Canonical objective: row-major accumulation over positive-flow cells."""
    total = 0.0
    m, n = flow.shape
    for i in range(m):
        for j in range(n):
            f = flow[i, j]
            if f > 0.0:
                total += c[i, j] * f
    return total


def solve_transport(cost, row_mass, col_mass):
    """Exact minimum-cost transport between non-negative marginals.

    Masses must balance to within 1e-9 (relative). The returned flow is a
    vertex of the transportation polytope with marginals reproduced to
    additive float accuracy.
    """
    c = _check_cost(cost)
    a = np.asarray(row_mass, dtype=np.float64).reshape(-1)
    b = np.asarray(col_mass, dtype=np.float64).reshape(-1)
    m, n = c.shape
    if a.shape[0] != m or b.shape[0] != n:
        raise ValueError(
            f"marginal lengths ({a.shape[0]}, {b.shape[0]}) do not match cost shape {c.shape}"
        )
    if (a.size and not np.all(np.isfinite(a))) or (b.size and not np.all(np.isfinite(b))):
        raise ValueError("marginals must be finite")
    if (a.size and a.min() < 0) or (b.size and b.min() < 0):
        raise ValueError("marginals must be non-negative")
    ta, tb = float(a.sum()), float(b.sum())
    if abs(ta - tb) > 1e-9 * max(1.0, ta, tb):
        raise ValueError(f"marginal masses differ: {ta} vs {tb}")
    if m == 0 or n == 0 or ta == 0.0:
        return TransportPlan(cost=0.0, flow=np.zeros((m, n)))

    row_eq = np.zeros((m, m * n))
    for i in range(m):
        row_eq[i, i * n : (i + 1) * n] = 1.0
    col_eq = np.tile(np.eye(n), m)
    res = linprog(
        c.ravel(),
        A_eq=np.vstack([row_eq, col_eq]),
        b_eq=np.concatenate([a, b]),
        bounds=(0, None),
        method="highs",
    )
    if not res.success:  # pragma: no cover - feasible by construction
        raise RuntimeError(f"transport LP failed: {res.message}")
    x = np.maximum(res.x.reshape(m, n), 0.0)
    thresh = 1e-10 * max(1.0, ta)
    support = [(i, j) for i in range(m) for j in range(n) if x[i, j] > thresh]
    flow = _peel_flows(support, a, b)
    if flow is None:
        flow = x
    return TransportPlan(cost=_flow_cost(c, flow), flow=flow)


def _padded_matrix(core, row_norms, col_norms):
    m, n = core.shape
    s = max(m, n)
    out = np.zeros((s, s))
    out[:m, :n] = core
    if m < s:
        out[m:, :n] = col_norms[None, :]
    if n < s:
        out[:m, n:] = row_norms[:, None]
    return out


def augmented_ot(core, row_norms, col_norms, normalized=False):
    """Transport between unequal multisets after padding the smaller with blanks.

    core[i, j] is the cost between real elements; row_norms[i] / col_norms[j]
    are the costs of matching an element to a blank (blank-blank pairs cost
    zero). The result is an assignment on the max(m, n)-sized padded matrix,
    divided by the padded size when `normalized` is set.
    """
    c = _check_cost(core)
    rn = np.asarray(row_norms, dtype=np.float64).reshape(-1)
    cn = np.asarray(col_norms, dtype=np.float64).reshape(-1)
    m, n = c.shape
    if rn.shape[0] != m or cn.shape[0] != n:
        raise ValueError(
            f"norm vector lengths ({rn.shape[0]}, {cn.shape[0]}) do not match core shape {c.shape}"
        )
    for name, vec in (("row", rn), ("col", cn)):
        if vec.size and (not np.all(np.isfinite(vec)) or vec.min() < 0):
            raise ValueError(f"{name} norms must be finite and non-negative")
    s = max(m, n)
    if s == 0:
        return TransportPlan(cost=0.0, permutation=np.empty(0, dtype=np.intp),
                             normalized=normalized)
    plan = solve_assignment(_padded_matrix(c, rn, cn))
    total = plan.cost / s if normalized else plan.cost
    return TransportPlan(cost=float(total), permutation=plan.permutation,
                         normalized=normalized)


def _augmented_cost(core, row_norms, col_norms, mean):
    """Value-only augmented transport; assumes validated inputs (hot path)."""
    m, n = core.shape
    s = max(m, n)
    if s == 0:
        return 0.0
    if m == 0:
        total = float(col_norms.sum())
    elif n == 0:
        total = float(row_norms.sum())
    elif m == n:
        total = _assignment_cost(core)
    else:
        total = _assignment_cost(_padded_matrix(core, row_norms, col_norms))
    return total / s if mean else total
