"""Maximum-weight one-to-one assignment (Hungarian algorithm).

Maximization is solved as min-cost via negation with the O(n^3)
shortest-augmenting-path formulation. Rectangular inputs are handled by
orienting the smaller side as rows; |pairs| = min(rows, cols).

Among equally scoring optima the lexicographically smallest pair list is
returned, so results are deterministic and testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_INF = float("inf")


@dataclass(frozen=True)
class Assignment:
    pairs: tuple[tuple[int, int, float], ...]  # (row, col, score), sorted by row
    unmatched_rows: tuple[int, ...]
    unmatched_cols: tuple[int, ...]
    total: float


def _solve_min(cost: list[list[float]]) -> list[int]:
    """Row->col assignment minimizing total cost; requires rows <= cols."""
    n = len(cost)
    m = len(cost[0])
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)  # p[j]: 1-based row matched to col j
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [_INF] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = _INF
            j1 = 0
            row = cost[i0 - 1]
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    assign = [-1] * n
    for j in range(1, m + 1):
        if p[j]:
            assign[p[j] - 1] = j - 1
    return assign


def _max_value(matrix, row_idx: list[int], col_idx: list[int]) -> float:
    """Optimal total over a sub-matrix given by row/col index lists."""
    if not row_idx or not col_idx:
        return 0.0
    transposed = len(row_idx) > len(col_idx)
    if transposed:
        cost = [[-matrix[r][c] for r in row_idx] for c in col_idx]
    else:
        cost = [[-matrix[r][c] for c in col_idx] for r in row_idx]
    assign = _solve_min(cost)
    total = 0.0
    for a, b in enumerate(assign):
        if b < 0:
            continue
        r, c = (row_idx[b], col_idx[a]) if transposed else (row_idx[a], col_idx[b])
        total += matrix[r][c]
    return total


def hungarian_max(matrix) -> Assignment:
    """Maximum-total assignment with lexicographic tie-breaking.

    An empty matrix yields an empty assignment. Entries must be finite.
    """
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    if rows and any(len(r) != cols for r in matrix):
        raise ValueError("matrix rows have unequal lengths")
    if rows == 0 or cols == 0:
        return Assignment(
            pairs=(),
            unmatched_rows=tuple(range(rows)),
            unmatched_cols=tuple(range(cols)),
            total=0.0,
        )
    for r in range(rows):
        for c in range(cols):
            if not math.isfinite(matrix[r][c]):
                raise ValueError(f"non-finite entry at ({r}, {c})")

    # Fix pairs row by row, always taking the smallest column that still
    # permits an optimal completion; a row is skipped only when no column
    # does (possible only with more rows than columns).
    remaining = _max_value(matrix, list(range(rows)), list(range(cols)))
    free_cols = list(range(cols))
    chosen: list[tuple[int, int]] = []
    tol_base = max(1.0, max(abs(matrix[r][c]) for r in range(rows) for c in range(cols)))
    tol = 1e-9 * tol_base * max(rows, cols)
    for r in range(rows):
        rest_rows = list(range(r + 1, rows))
        matched = False
        for c in free_cols:
            rest_cols = [x for x in free_cols if x != c]
            candidate = matrix[r][c] + _max_value(matrix, rest_rows, rest_cols)
            if abs(candidate - remaining) <= tol:
                chosen.append((r, c))
                free_cols = rest_cols
                remaining -= matrix[r][c]
                matched = True
                break
        if not matched:
            # row sits out; the optimum must be achievable without it
            remaining_check = _max_value(matrix, rest_rows, free_cols)
            if abs(remaining_check - remaining) > tol:
                raise AssertionError("assignment refinement lost the optimum")

    pairs = tuple((r, c, matrix[r][c]) for r, c in chosen)
    matched_rows = {r for r, _ in chosen}
    matched_cols = {c for _, c in chosen}
    total = 0.0
    for r, c, score in pairs:
        total += score
    return Assignment(
        pairs=pairs,
        unmatched_rows=tuple(r for r in range(rows) if r not in matched_rows),
        unmatched_cols=tuple(c for c in range(cols) if c not in matched_cols),
        total=total,
    )
