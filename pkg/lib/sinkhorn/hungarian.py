from collections import deque

import numpy as np
from numpy.typing import NDArray
from ..config.enums import Objective
from ..nn.matrix import Matrix, as_matrix, require_finite, require_square

type Assignment = list[int]


def _solve_min(cost: Matrix) -> tuple[NDArray[np.int64], Matrix]:
    """Shortest augmenting path solver with row/column potentials.

    Returns the column of each row and the reduced cost matrix, which is
    nonnegative and zero on the returned assignment.
    """
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    # owner[j] is the 1-based row holding column j (1-based); 0 is the virtual column
    owner = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)

    for row in range(1, n + 1):
        owner[0] = row
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = np.flatnonzero(~used[1:]) + 1
            reduced = cost[i0 - 1, free - 1] - u[i0] - v[free]
            better = reduced < minv[free]
            minv[free[better]] = reduced[better]
            way[free[better]] = j0

            j1 = free[np.argmin(minv[free])]
            delta = minv[j1]
            taken = np.flatnonzero(used)
            u[owner[taken]] += delta
            v[taken] -= delta
            minv[free] -= delta
            j0 = j1
            if owner[j0] == 0:
                break

        while j0 != 0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1

    assignment = np.empty(n, dtype=np.int64)
    assignment[owner[1:] - 1] = np.arange(n)
    reduced = cost - u[1:].reshape(-1, 1) - v[1:].reshape(1, -1)
    return assignment, reduced


def _reroute(
    tight: NDArray[np.bool_],
    assignment: NDArray[np.int64],
    owner: NDArray[np.int64],
    row: int,
    column: int,
) -> bool:
    """Move `row` onto the earlier tight `column`, keeping rows < `row` fixed.

    The displaced row must reach the column `row` gives up through an
    alternating path of tight edges among rows > `row`.
    """
    start = int(owner[column])
    if start < row:
        return False
    freed = int(assignment[row])

    took: dict[int, tuple[int, int]] = {start: (-1, -1)}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for col in np.flatnonzero(tight[current]):
            col = int(col)
            if col == column:
                continue
            if col == freed:
                path = [(current, col)]
                step = current
                while step != start:
                    parent, parent_col = took[step]
                    path.append((parent, parent_col))
                    step = parent
                for moved_row, moved_col in path:
                    assignment[moved_row] = moved_col
                    owner[moved_col] = moved_row
                assignment[row] = column
                owner[column] = row
                return True
            nxt = int(owner[col])
            if nxt <= row or nxt in took:
                continue
            took[nxt] = (current, col)
            queue.append(nxt)
    return False


def hungarian(matrix: Matrix, objective: Objective) -> Assignment:
    """Exact linear assignment: row i is assigned column result[i].

    Among all optimal assignments the lexicographically smallest one (by row
    order, lowest column first) is returned.
    """
    matrix = as_matrix(matrix, name="assignment matrix")
    require_square(matrix, name="assignment matrix")
    require_finite(matrix, name="assignment matrix")

    cost = -matrix if objective == Objective.MAXIMIZE else matrix
    n = cost.shape[0]
    assignment, reduced = _solve_min(cost)

    tolerance = 1e-12 * (1.0 + float(np.abs(cost).max())) * n
    tight = reduced <= tolerance
    owner = np.empty(n, dtype=np.int64)
    owner[assignment] = np.arange(n)
    for row in range(n):
        for column in np.flatnonzero(tight[row, : assignment[row]]):
            if _reroute(tight, assignment, owner, row, int(column)):
                break

    return [int(col) for col in assignment]


def assignment_matrix(assignment: Assignment) -> Matrix:
    n = len(assignment)
    result = np.zeros((n, n))
    result[np.arange(n), assignment] = 1.0
    return result


def round_plan(soft: Matrix) -> Matrix:
    """Project onto the permutation matrix collecting the most mass from `soft`."""
    return assignment_matrix(hungarian(soft, Objective.MAXIMIZE))
