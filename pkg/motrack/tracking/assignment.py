"""Maximum-affinity bipartite matching on top of scipy's Kuhn-Munkres."""
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import ContractViolation


@dataclass(frozen=True)
class AssignmentResult:
    matches: List[Tuple[int, int]] = field(default_factory=list)
    unmatched_rows: List[int] = field(default_factory=list)
    unmatched_cols: List[int] = field(default_factory=list)

    def total(self, matrix) -> float:
        matrix = np.asarray(matrix, dtype=np.float64)
        return float(sum(matrix[row, col] for row, col in self.matches))


def _as_matrix(matrix) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.size == 0:
        return matrix.reshape(matrix.shape if matrix.ndim == 2 else (0, 0))
    if matrix.ndim != 2:
        raise ContractViolation(f'expected a 2-d matrix, got {matrix.ndim}-d')
    if np.isnan(matrix).any():
        raise ContractViolation('affinity matrix contains NaN')
    if not np.isfinite(matrix).all():
        raise ContractViolation('affinity matrix contains infinite values')
    return matrix


def _result(rows: int, cols: int, matches) -> AssignmentResult:
    matches = sorted(matches)
    matched_rows = {row for row, _ in matches}
    matched_cols = {col for _, col in matches}
    return AssignmentResult(
        matches=matches,
        unmatched_rows=[r for r in range(rows) if r not in matched_rows],
        unmatched_cols=[c for c in range(cols) if c not in matched_cols],
    )


def solve_max(matrix) -> AssignmentResult:
    """Match rows to columns maximizing the summed affinity.

    The problem is negated into a cost minimization and padded to a square
    with a cost strictly worse than any real entry, so every real row or
    column that can be matched is.
    """
    matrix = _as_matrix(matrix)
    rows, cols = matrix.shape
    if rows == 0 or cols == 0:
        return _result(rows, cols, [])
    size = max(rows, cols)
    cost = -matrix
    padded = np.full((size, size), cost.max() + 1.0)
    padded[:rows, :cols] = cost
    row_ind, col_ind = linear_sum_assignment(padded)
    return _result(rows, cols, [
        (int(r), int(c)) for r, c in zip(row_ind, col_ind)
        if r < rows and c < cols
    ])


def solve_max_gated(matrix, tau: float) -> AssignmentResult:
    """:func:`solve_max`, then drop every match whose affinity is below tau."""
    matrix = _as_matrix(matrix)
    solved = solve_max(matrix)
    rows, cols = matrix.shape
    return _result(rows, cols, [
        (row, col) for row, col in solved.matches if matrix[row, col] >= tau
    ])
