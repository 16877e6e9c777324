from itertools import permutations

import numpy as np
import pytest
from tracking.assignment import solve_max, solve_max_gated
from tracking.exceptions import ContractViolation

EXAMPLE = [[0.9, 0.1], [0.2, 0.8]]


def brute_force_total(matrix: np.ndarray) -> float:
    if matrix.shape[0] > matrix.shape[1]:
        matrix = matrix.T
    rows, cols = matrix.shape
    choices = np.array(list(permutations(range(cols), rows)))
    return matrix[np.arange(rows), choices].sum(axis=1).max()


def test_two_by_two_matrix():
    result = solve_max(EXAMPLE)
    assert result.matches == [(0, 0), (1, 1)]
    assert result.total(EXAMPLE) == pytest.approx(1.7)


def test_single_cell_and_rectangular():
    assert solve_max([[0.5]]).matches == [(0, 0)]
    result = solve_max([[0.1, 0.9, 0.3], [0.8, 0.2, 0.4]])
    assert result.matches == [(0, 1), (1, 0)]
    assert result.unmatched_cols == [2] and result.unmatched_rows == [], (
        "Make sure a 2x3 problem leaves exactly one column unmatched."
    )


def test_empty_matrix():
    result = solve_max(np.zeros((0, 3)))
    assert result.matches == [] and result.unmatched_cols == [0, 1, 2]


def test_nan_is_rejected():
    with pytest.raises(ContractViolation):
        solve_max([[0.5, np.nan]])


@pytest.mark.parametrize(
    ("tau", "matches", "unmatched_rows", "unmatched_cols"),
    [
        (0.85, [(0, 0)], [1], [1]),
        (-np.inf, [(0, 0), (1, 1)], [], []),
        (0.95, [], [0, 1], [0, 1]),
    ],
    ids=["gate drops weak match", "no gate", "gate drops all"],
)
def test_gated(tau, matches, unmatched_rows, unmatched_cols):
    result = solve_max_gated(EXAMPLE, tau)
    assert result.matches == matches
    assert result.unmatched_rows == unmatched_rows
    assert result.unmatched_cols == unmatched_cols


def test_matches_brute_force_oracle(rng):
    for trial in range(1000):
        rows, cols = rng.integers(1, 8, 2)
        if trial % 2:
            matrix = rng.integers(-20, 20, (rows, cols)).astype(float)
        else:
            matrix = rng.uniform(-1, 1, (rows, cols))
        result = solve_max(matrix)
        assert len(result.matches) == min(rows, cols)
        assert result.total(matrix) == pytest.approx(
            brute_force_total(matrix), abs=1e-12
        ), "Make sure the solver finds the maximum total affinity."


def test_row_permutation_equivariance(rng):
    matrix = rng.uniform(0, 1, (5, 6))
    order = rng.permutation(5)
    original = dict(solve_max(matrix).matches)
    permuted = dict(solve_max(matrix[order]).matches)
    for new_row, old_row in enumerate(order):
        assert permuted[new_row] == original[old_row]


def test_constant_shift(rng):
    matrix = rng.uniform(0, 1, (4, 4))
    shifted = matrix + 3.0
    result = solve_max(shifted)
    assert result.total(shifted) == pytest.approx(
        solve_max(matrix).total(matrix) + 4 * 3.0
    )
    assert result.total(matrix) == pytest.approx(brute_force_total(matrix))
