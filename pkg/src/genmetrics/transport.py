"""Exact earth mover's distance between weighted point sets.

The transport linear program is solved exactly, never approximately:

* uniform equal-size marginals (the common case for set-vs-set scoring)
  reduce to an assignment problem -- the LP optimum sits on a permutation
  matrix -- which goes to scipy's shortest-augmenting-path assignment
  solver;
* general marginals (unequal sizes or non-uniform weights) run through the
  transportation simplex implemented below: northwest-corner start, then
  potential/reduced-cost pivots with most-negative pricing, switching to
  Bland's smallest-index rule after a run of degenerate pivots so the
  solve cannot cycle.

``brute_force_emd`` enumerates permutations outright and exists purely to
cross-check the solvers on tiny instances.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from genmetrics.errors import (
    DimensionError,
    SolverFailureError,
    UnsupportedError,
    ValidationError,
)
from genmetrics.featureset import FeatureSet, euclidean_matrix

_MARGINAL_TOL = 1e-8
_WEIGHT_FLOOR = -1e-12
_BRUTE_FORCE_MAX = 9


@dataclass(frozen=True)
class TransportPlan:
    """A feasible coupling: weights[i, j] moves mass from a_i to b_j."""

    weights: np.ndarray
    row_marginals: np.ndarray
    col_marginals: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        pr = np.asarray(self.row_marginals, dtype=np.float64)
        pg = np.asarray(self.col_marginals, dtype=np.float64)
        if w.ndim != 2 or pr.ndim != 1 or pg.ndim != 1:
            raise ValidationError("plan weights must be 2-D with 1-D marginals")
        if w.shape != (pr.shape[0], pg.shape[0]):
            raise ValidationError(
                f"plan shape {w.shape} does not match marginals ({pr.shape[0]}, {pg.shape[0]})"
            )
        if w.min() < _WEIGHT_FLOOR:
            raise ValidationError(f"plan weights must be >= {_WEIGHT_FLOOR}, min {w.min():.3g}")
        if abs(pr.sum() - 1.0) > _MARGINAL_TOL or abs(pg.sum() - 1.0) > _MARGINAL_TOL:
            raise ValidationError("marginals must each sum to 1 within 1e-8")
        row_err = float(np.abs(w.sum(axis=1) - pr).max())
        col_err = float(np.abs(w.sum(axis=0) - pg).max())
        if row_err > _MARGINAL_TOL or col_err > _MARGINAL_TOL:
            raise ValidationError(
                f"plan violates marginal constraints (row err {row_err:.3g}, col err {col_err:.3g})"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "row_marginals", pr)
        object.__setattr__(self, "col_marginals", pg)


def _check_weights(p, n, side) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (n,):
        raise ValidationError(f"{side} weights must have shape ({n},), got {p.shape}")
    if not np.isfinite(p).all():
        raise ValidationError(f"{side} weights must be finite")
    if p.min() < 0.0:
        raise ValidationError(f"{side} weights must be non-negative")
    if abs(p.sum() - 1.0) > _MARGINAL_TOL:
        raise ValidationError(f"{side} weights must sum to 1 within 1e-8, got {p.sum()!r}")
    return p


def emd(a: FeatureSet, b: FeatureSet, p_a=None, p_b=None) -> tuple[float, TransportPlan]:
    """Exact optimal-transport cost and an optimal plan under Euclidean distance.

    Weights default to uniform. The returned score is the exact LP optimum;
    a solver that cannot certify optimality raises instead of returning a
    feasible-but-suboptimal answer.
    """
    if a.d != b.d:
        raise DimensionError(f"dimension mismatch: {a.d} vs {b.d}")
    n, m = a.n, b.n
    uniform_a = p_a is None
    uniform_b = p_b is None
    pa = np.full(n, 1.0 / n) if uniform_a else _check_weights(p_a, n, "row")
    pb = np.full(m, 1.0 / m) if uniform_b else _check_weights(p_b, m, "col")
    if not uniform_a and np.all(pa == 1.0 / n):
        uniform_a = True
    if not uniform_b and np.all(pb == 1.0 / m):
        uniform_b = True

    dist = euclidean_matrix(a, b)
    if n == m and uniform_a and uniform_b:
        rows, cols = linear_sum_assignment(dist)
        weights = np.zeros((n, m))
        weights[rows, cols] = 1.0 / n
        score = float(dist[rows, cols].sum() / n)
    else:
        weights = _transportation_simplex(dist, pa, pb)
        score = float((weights * dist).sum())
    return score, TransportPlan(weights, pa, pb)


def brute_force_emd(a: FeatureSet, b: FeatureSet) -> float:
    """(1/n) min over all permutations of the matched-pair distance sum.

    Exact for balanced uniform marginals (the LP optimum is a permutation),
    and deliberately implemented by full enumeration so it shares no code
    with the solvers it validates.
    """
    if a.d != b.d:
        raise DimensionError(f"dimension mismatch: {a.d} vs {b.d}")
    if a.n != b.n:
        raise UnsupportedError(f"brute force needs equal sizes, got {a.n} and {b.n}")
    n = a.n
    if n > _BRUTE_FORCE_MAX:
        raise UnsupportedError(f"brute force capped at n <= {_BRUTE_FORCE_MAX}, got {n}")
    dist = euclidean_matrix(a, b)
    best = np.inf
    rows = np.arange(n)
    for perm in itertools.permutations(range(n)):
        cost = dist[rows, perm].sum()
        if cost < best:
            best = cost
    return float(best / n)


def _northwest_corner(supply, demand):
    """Initial basic feasible solution; returns (flow, basic-cell list)."""
    n, m = supply.shape[0], demand.shape[0]
    flow = np.zeros((n, m))
    cells = []
    s = supply.copy()
    d = demand.copy()
    i = j = 0
    while True:
        q = min(s[i], d[j])
        flow[i, j] = q
        cells.append((i, j))
        s[i] -= q
        d[j] -= q
        if i == n - 1 and j == m - 1:
            break
        if s[i] <= 0.0 and i < n - 1:
            i += 1
        elif j < m - 1:
            j += 1
        else:
            i += 1
    return flow, cells


def _transportation_simplex(cost, supply, demand, max_iter=None):
    """Exact dense transportation solve; returns the optimal flow matrix.

    Nodes are rows (0..n-1) and columns (n..n+m-1); the basis is a spanning
    tree of n+m-1 cells. Per pivot: recompute potentials by tree traversal,
    price every cell at once, walk the unique tree cycle the entering cell
    closes, and shift flow around it.
    """
    n, m = cost.shape
    if max_iter is None:
        max_iter = 2000 + 200 * (n + m)
    flow, cells = _northwest_corner(supply, demand)
    basis = np.zeros((n, m), dtype=bool)
    adj = [set() for _ in range(n + m)]
    for i, j in cells:
        basis[i, j] = True
        adj[i].add(n + j)
        adj[n + j].add(i)

    tol = 1e-10 * max(1.0, float(np.abs(cost).max()))
    degenerate_run = 0
    bland_after = 10 * (n + m)

    for _ in range(max_iter):
        pot = _potentials(cost, adj, n, m)
        reduced = cost - pot[:n, None] - pot[None, n:]
        reduced[basis] = 0.0
        if degenerate_run > bland_after:
            candidates = np.flatnonzero(reduced.ravel() < -tol)
            if candidates.size == 0:
                break
            enter = int(candidates[0])
        else:
            enter = int(np.argmin(reduced.ravel()))
            if reduced.ravel()[enter] >= -tol:
                break
        ei, ej = divmod(enter, m)

        path_cells = _tree_path_cells(adj, ei, n + ej, n)
        # walking the path backwards from the column end, cells alternate
        # -theta, +theta, -theta, ... (the entering cell itself takes +theta)
        rev = list(reversed(path_cells))
        minus = rev[0::2]
        plus = rev[1::2]

        leave = minus[0]
        theta = flow[leave]
        for cell in minus[1:]:
            f = flow[cell]
            if f < theta or (f == theta and cell < leave):
                theta = f
                leave = cell

        flow[ei, ej] += theta
        for cell in plus:
            flow[cell] += theta
        for cell in minus:
            flow[cell] -= theta
        flow[leave] = 0.0

        basis[leave] = False
        li, lj = leave
        adj[li].discard(n + lj)
        adj[n + lj].discard(li)
        basis[ei, ej] = True
        adj[ei].add(n + ej)
        adj[n + ej].add(ei)

        degenerate_run = degenerate_run + 1 if theta <= 0.0 else 0
    else:
        raise SolverFailureError(
            f"transport solve exceeded {max_iter} pivots without proving optimality"
        )

    np.clip(flow, 0.0, None, out=flow)
    return flow


def _potentials(cost, adj, n, m):
    """Solve u_i + v_j = cost[i, j] over the basis tree (root potential 0)."""
    pot = np.full(n + m, np.nan)
    pot[0] = 0.0
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for nb in adj[node]:
            if np.isnan(pot[nb]):
                if node < n:
                    pot[nb] = cost[node, nb - n] - pot[node]
                else:
                    pot[nb] = cost[nb, node - n] - pot[node]
                queue.append(nb)
    if np.isnan(pot).any():
        raise SolverFailureError("transport basis lost tree connectivity")
    return pot


def _tree_path_cells(adj, start, goal, n):
    """Cells along the unique tree path between a row node and a column node."""
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nb in adj[node]:
            if nb not in parent:
                parent[nb] = node
                queue.append(nb)
    if goal not in parent:
        raise SolverFailureError("transport basis lost tree connectivity")
    nodes = [goal]
    while parent[nodes[-1]] is not None:
        nodes.append(parent[nodes[-1]])
    nodes.reverse()  # start ... goal
    cells = []
    for u, v in zip(nodes, nodes[1:]):
        if u < n:
            cells.append((u, v - n))
        else:
            cells.append((v, u - n))
    return cells
