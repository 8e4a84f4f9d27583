"""Exact min-cost bipartite assignment with an infeasibility threshold.

The solver is lexicographic: among matchings that use only feasible entries
it first maximizes cardinality, then minimizes total cost. Infeasibility is
enforced before solving, never by pruning an unconstrained optimum, so a
rejected pairing can never shadow a feasible alternative.

Implementation: the rectangular problem is embedded in a square matrix with
one dummy column per row and one dummy row per column (leaving an index
unmatched costs nothing), feasible costs are shifted down by a constant large
enough that every extra match beats any cost difference, and the result is
solved exactly with scipy's O(n^3) rectangular assignment solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = ["Assignment", "solve", "min_cost_assignment"]


@dataclass(frozen=True)
class Assignment:
    """Result of a matching: matched (row, col) pairs plus leftovers.

    matches is sorted by row index; every row and column index appears
    exactly once across matches and the unmatched lists.
    """

    matches: list[tuple[int, int]] = field(default_factory=list)
    unmatched_rows: list[int] = field(default_factory=list)
    unmatched_cols: list[int] = field(default_factory=list)

    def total_cost(self, cost: np.ndarray) -> float:
        return float(sum(cost[r, c] for r, c in self.matches))


def _empty(n_rows: int, n_cols: int) -> Assignment:
    return Assignment([], list(range(n_rows)), list(range(n_cols)))


def solve(cost, feasible=None) -> Assignment:
    """Maximum-cardinality, then minimum-cost matching over feasible entries.

    cost: (n, m) array of finite values (non-finite entries are treated as
    infeasible). feasible: optional boolean mask of the same shape; entries
    marked False can never be matched.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise ValueError(f"cost must be 2-dimensional, got shape {cost.shape}")
    n, m = cost.shape
    mask = np.isfinite(cost)
    if feasible is not None:
        feasible = np.asarray(feasible, dtype=bool)
        if feasible.shape != cost.shape:
            raise ValueError("feasible mask shape must match the cost matrix")
        mask &= feasible
    if n == 0 or m == 0 or not mask.any():
        return _empty(n, m)

    usable = cost[mask]
    span = float(usable.max() - min(0.0, usable.min()))
    big = span * min(n, m) + 1.0

    padded = np.full((n + m, n + m), np.inf)
    block = np.full((n, m), np.inf)
    block[mask] = cost[mask] - big
    padded[:n, :m] = block
    padded[np.arange(n), m + np.arange(n)] = 0.0
    padded[n + np.arange(m), np.arange(m)] = 0.0
    padded[n:, m:] = 0.0

    rows, cols = linear_sum_assignment(padded)
    matches = sorted(
        (int(r), int(c)) for r, c in zip(rows, cols) if r < n and c < m
    )
    matched_rows = {r for r, _ in matches}
    matched_cols = {c for _, c in matches}
    return Assignment(
        matches,
        [r for r in range(n) if r not in matched_rows],
        [c for c in range(m) if c not in matched_cols],
    )


def min_cost_assignment(cost, min_iou: float = 0.2) -> Assignment:
    """Tracking-flavoured wrapper: costs are 1 - IoU and pairings with
    IoU below min_iou are rejected (entries with cost > 1 - min_iou are
    infeasible before solving)."""
    if not 0.0 <= min_iou < 1.0:
        raise ValueError(f"min_iou must be in [0, 1), got {min_iou}")
    cost = np.asarray(cost, dtype=float)
    return solve(cost, feasible=cost <= 1.0 - min_iou)
