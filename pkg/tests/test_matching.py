import itertools
import random

import pytest

from litcurate.matching import Assignment, hungarian_max

from oracles import brute_force_assignment


def pair_rc(assignment: Assignment):
    return [(r, c) for r, c, _ in assignment.pairs]


def test_empty_matrix_yields_empty_assignment():
    assignment = hungarian_max([])
    assert assignment.pairs == ()
    assert assignment.total == 0.0


def test_identity_matrix_matches_diagonal():
    matrix = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    assignment = hungarian_max(matrix)
    assert pair_rc(assignment) == [(0, 0), (1, 1), (2, 2)]
    assert assignment.total == 3.0
    assert assignment.unmatched_rows == ()
    assert assignment.unmatched_cols == ()


def test_rectangular_two_by_three():
    matrix = [[0.9, 0.1, 0.2], [0.2, 0.8, 0.1]]
    assignment = hungarian_max(matrix)
    # frozen from the exhaustive permutation oracle
    assert pair_rc(assignment) == [(0, 0), (1, 1)]
    assert assignment.total == pytest.approx(1.7)
    assert assignment.unmatched_cols == (2,)
    assert assignment.unmatched_rows == ()


def test_tall_matrix_leaves_rows_unmatched():
    matrix = [[5.0], [9.0], [1.0]]
    assignment = hungarian_max(matrix)
    assert pair_rc(assignment) == [(1, 0)]
    assert assignment.unmatched_rows == (0, 2)


def test_non_finite_entries_rejected():
    with pytest.raises(ValueError):
        hungarian_max([[float("nan"), 1.0]])
    with pytest.raises(ValueError):
        hungarian_max([[float("inf")]])


def test_all_decimal_grid_3x3_matches_brute_force():
    values = [i / 10 for i in range(10)]
    rng = random.Random(7)
    for _ in range(300):
        matrix = [[rng.choice(values) for _ in range(3)] for _ in range(3)]
        expected_total = max(
            sum(matrix[r][c] for r, c in enumerate(perm))
            for perm in itertools.permutations(range(3))
        )
        assert hungarian_max(matrix).total == pytest.approx(expected_total, abs=1e-12)


def test_matches_brute_force_up_to_6x6_dyadic():
    # dyadic rationals make float sums exact, so totals must match exactly
    rng = random.Random(42)
    for _ in range(250):
        rows = rng.randint(1, 6)
        cols = rng.randint(1, 6)
        matrix = [[rng.randint(0, 255) / 256 for _ in range(cols)] for _ in range(rows)]
        expected_total, expected_pairs = brute_force_assignment(matrix)
        assignment = hungarian_max(matrix)
        assert assignment.total == expected_total
        assert pair_rc(assignment) == expected_pairs


def test_lexicographic_tie_break_on_constant_matrix():
    matrix = [[1.0, 1.0], [1.0, 1.0]]
    assert pair_rc(hungarian_max(matrix)) == [(0, 0), (1, 1)]


def test_lexicographic_tie_break_prefers_smaller_columns_first():
    # two optima: (0,0),(1,1) and (0,1),(1,0) — both total 2
    matrix = [[1.0, 1.0], [1.0, 1.0]]
    assert pair_rc(hungarian_max(matrix)) == [(0, 0), (1, 1)]
    # asymmetric tie: optima are (0,1),(1,0) and (0,0),(1,1)? totals differ now
    matrix = [[0.0, 1.0], [1.0, 0.0]]
    assert pair_rc(hungarian_max(matrix)) == [(0, 1), (1, 0)]


def test_lexicographic_tie_break_matches_oracle_under_ties():
    rng = random.Random(99)
    for _ in range(200):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 4)
        # coarse grid forces frequent ties
        matrix = [[rng.choice([0.0, 0.5, 1.0]) for _ in range(cols)] for _ in range(rows)]
        expected_total, expected_pairs = brute_force_assignment(matrix)
        assignment = hungarian_max(matrix)
        assert assignment.total == expected_total
        assert pair_rc(assignment) == expected_pairs


def test_row_permutation_equivariance():
    rng = random.Random(5)
    for _ in range(50):
        n = rng.randint(2, 5)
        # wide-range dyadics: optimum unique with overwhelming probability
        matrix = [[rng.randint(0, 1 << 30) / (1 << 20) for _ in range(n)] for _ in range(n)]
        base = {r: c for r, c, _ in hungarian_max(matrix).pairs}
        perm = list(range(n))
        rng.shuffle(perm)
        permuted = [matrix[perm[i]] for i in range(n)]
        permuted_assign = {r: c for r, c, _ in hungarian_max(permuted).pairs}
        for new_row, old_row in enumerate(perm):
            assert permuted_assign[new_row] == base[old_row]
