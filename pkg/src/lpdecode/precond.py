"""Greedy searches for high-weight triangular column sets of a constraint matrix.

Every search returns a :class:`TriangularSet` of ``p`` columns of the
``p x q`` augmented constraint matrix ``A = [A_std | I]`` such that the
selected submatrix can be permuted to triangular form with nonzero diagonal.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .linsolve import SparseMatrix, TriangularFactor, TriangularPreconditioner, ZeroPivotError
from .tanner import TannerGraph

LOWER = "lower"
UPPER = "upper"


@dataclass(frozen=True)
class TriangularSet:
    """Pivot pairs ``(rows[k], columns[k])`` of a triangular submatrix ``A_M``.

    ``orientation`` describes ``T[k, l] = A[rows[k], columns[l]]``.
    """

    columns: tuple
    rows: tuple
    orientation: str
    weight: float

    def factor(self, a: SparseMatrix) -> TriangularFactor:
        return TriangularFactor(a, self.rows, self.columns, lower=self.orientation == LOWER)

    def preconditioner(self, a: SparseMatrix, d2) -> TriangularPreconditioner:
        return TriangularPreconditioner(self.factor(a), d2)

    def is_valid(self, a: SparseMatrix) -> bool:
        """Direct check: p distinct columns whose permuted submatrix is triangular."""
        if len(self.columns) != a.shape[0]:
            return False
        try:
            self.factor(a)
        except (ZeroPivotError, ValueError):
            return False
        return True


@dataclass(frozen=True)
class Triangulation:
    """Outcome of the triangulation step on a column subset."""

    success: bool
    columns: tuple
    rows: tuple
    residual: frozenset


def _as_sparse(a) -> SparseMatrix:
    return a if isinstance(a, SparseMatrix) else SparseMatrix(a)


def _std_count(a: SparseMatrix) -> int:
    p, q = a.shape
    n = q - p
    if n < 0:
        raise ValueError("matrix has fewer columns than rows")
    return n


def extended_tanner_graph(a) -> TannerGraph:
    """Bipartite view of ``A``: one check per row, one variable per column."""
    a = _as_sparse(a)
    p, q = a.shape
    return TannerGraph(p, q, [a.row(j)[0].tolist() for j in range(p)])


def check_slack_structure(a) -> None:
    """Raise unless the last ``p`` columns of ``A`` form an identity block."""
    a = _as_sparse(a)
    p, q = a.shape
    n = _std_count(a)
    for j in range(p):
        rows, vals = a.col(n + j)
        if rows.tolist() != [j] or vals[0] == 0:
            raise ValueError(f"column {n + j} is not the slack column of row {j}")


def triangulation_step(a, s: Iterable[int]) -> Triangulation:
    """Peel the columns ``s``: repeatedly take the lowest-index row with one live column.

    Succeeds iff ``A_s`` permutes to lower-triangular form; on failure the
    columns that could not be peeled are returned as ``residual``.
    """
    a = _as_sparse(a)
    s = sorted(set(int(i) for i in s))
    if len(s) > a.shape[0]:
        raise ValueError("column subset larger than the row count")
    alive = set(s)
    count: dict[int, int] = {}
    for i in s:
        for j in a.col(i)[0]:
            count[j] = count.get(j, 0) + 1
    heap = [j for j, c in count.items() if c == 1]
    heapq.heapify(heap)
    cols, rows = [], []
    while heap:
        j = heapq.heappop(heap)
        if count[j] != 1:
            continue
        i = next(int(c) for c in a.row(j)[0] if c in alive)
        alive.discard(i)
        cols.append(i)
        rows.append(int(j))
        for k in a.col(i)[0]:
            count[k] -= 1
            if count[k] == 1:
                heapq.heappush(heap, k)
    return Triangulation(not alive, tuple(cols), tuple(rows), frozenset(alive))


def _sorted_desc(d) -> list:
    # descending weight, ties to the lower column index
    return sorted(range(len(d)), key=lambda i: (-d[i], i))


def greedy_incremental(a, d, *, batch: int = 1, seed_size: int = 0) -> TriangularSet:
    """Scan columns by decreasing weight, keeping each one that leaves the set triangulable.

    Parameters
    ----------
    batch : int
        Try ``batch`` columns per triangulation call, falling back to single
        columns on failure. The output does not depend on it.
    seed_size : int
        Accept the first ``seed_size`` columns without testing. Only valid if
        every ``seed_size`` columns are triangulable (``seed_size`` below the
        smallest stopping-set size); output is then unchanged.
    """
    a = _as_sparse(a)
    d = np.asarray(d, dtype=float)
    p, q = a.shape
    if d.shape != (q,):
        raise ValueError("weight vector length must equal the column count")
    order = _sorted_desc(d)
    members = list(order[:min(seed_size, p)])
    pos = len(members)
    while len(members) < p and pos < q:
        k = min(batch, p - len(members), q - pos)
        chunk = order[pos:pos + k]
        if k > 1 and triangulation_step(a, members + chunk).success:
            members.extend(chunk)
        else:
            for i in chunk:
                if len(members) < p and triangulation_step(a, members + [i]).success:
                    members.append(i)
        pos += k
    tri = triangulation_step(a, members)
    if not tri.success or len(members) != p:
        raise AssertionError("incremental search failed to complete a triangular set")
    return TriangularSet(tri.columns, tri.rows, LOWER, float(d[members].sum()))


def _columnwise(a: SparseMatrix, d, row_subset: Optional[list] = None,
                col_subset: Optional[list] = None):
    """Pick max-weight degree-1 columns until every row is used; returns (cols, rows)."""
    p, q = a.shape
    rows_alive = set(range(p)) if row_subset is None else set(row_subset)
    cand = range(q) if col_subset is None else col_subset
    allowed = set(cand)
    deg = {}
    for i in cand:
        deg[i] = sum(1 for j in a.col(i)[0] if j in rows_alive)
    heap = [(-d[i], i) for i in cand if deg[i] == 1]
    heapq.heapify(heap)
    cols, rows = [], []
    chosen = set()
    target = len(rows_alive)
    while len(cols) < target:
        if not heap:
            raise AssertionError("no degree-1 column left; slack columns missing")
        _, i = heapq.heappop(heap)
        if i in chosen or deg[i] != 1:
            continue
        j = next(int(r) for r in a.col(i)[0] if r in rows_alive)
        chosen.add(i)
        cols.append(i)
        rows.append(j)
        rows_alive.discard(j)
        for c in a.row(j)[0]:
            c = int(c)
            if c in allowed and c not in chosen:
                deg[c] -= 1
                if deg[c] == 1:
                    heapq.heappush(heap, (-d[c], c))
    return cols, rows


def greedy_columnwise(a, d) -> TriangularSet:
    """Repeatedly select the heaviest degree-1 column and delete its row (upper triangular)."""
    a = _as_sparse(a)
    d = np.asarray(d, dtype=float)
    if d.shape != (a.shape[1],):
        raise ValueError("weight vector length must equal the column count")
    cols, rows = _columnwise(a, d)
    return TriangularSet(tuple(cols), tuple(rows), UPPER, float(d[cols].sum()))


DIAGONAL = "diagonal"
TRIANGULAR = "triangular"


def greedy_rowwise(a, d, expansion: str = DIAGONAL) -> TriangularSet:
    """Consume degree-1 rows; when none exists, delete the lightest remaining column.

    Rows left unrepresented are completed either with their slack columns
    (``expansion="diagonal"``) or by a column-wise search over the columns
    that avoid every represented row (``expansion="triangular"``).
    """
    a = _as_sparse(a)
    d = np.asarray(d, dtype=float)
    p, q = a.shape
    if d.shape != (q,):
        raise ValueError("weight vector length must equal the column count")
    if expansion not in (DIAGONAL, TRIANGULAR):
        raise ValueError(f"unknown expansion {expansion!r}")
    n = _std_count(a)
    rowdeg = np.diff(a.csr.indptr).astype(int)
    col_alive = np.diff(a.csc.indptr) > 0
    ascending = sorted(range(q), key=lambda i: (d[i], i))
    cursor = 0
    deg1 = [j for j in range(p) if rowdeg[j] == 1]
    heapq.heapify(deg1)
    nonzero_cols = int(col_alive.sum())
    cols, rows = [], []

    def zero_column(i):
        nonlocal nonzero_cols
        col_alive[i] = False
        nonzero_cols -= 1
        for j in a.col(i)[0]:
            if rowdeg[j] > 0:
                rowdeg[j] -= 1
                if rowdeg[j] == 1:
                    heapq.heappush(deg1, int(j))

    while nonzero_cols > 0:
        while deg1 and rowdeg[deg1[0]] != 1:
            heapq.heappop(deg1)
        if deg1:
            j = heapq.heappop(deg1)
            i = next(int(c) for c in a.row(j)[0] if col_alive[c])
            cols.append(i)
            rows.append(j)
            zero_column(i)
        else:
            while not col_alive[ascending[cursor]]:
                cursor += 1
            zero_column(ascending[cursor])

    used = set(rows)
    missing = [j for j in range(p) if j not in used]
    if missing and expansion == DIAGONAL:
        for j in missing:
            cols.append(n + j)
            rows.append(j)
    elif missing:
        chosen = set(cols)
        free = [i for i in range(q)
                if i not in chosen and not any(int(r) in used for r in a.col(i)[0])]
        c2, r2 = _columnwise(a, d, row_subset=missing, col_subset=free)
        cols.extend(reversed(c2))
        rows.extend(reversed(r2))
    return TriangularSet(tuple(cols), tuple(rows), LOWER, float(d[cols].sum()))


SEARCHES = {
    "incremental": lambda a, d: greedy_incremental(a, d),
    "columnwise": lambda a, d: greedy_columnwise(a, d),
    "rowwise": lambda a, d: greedy_rowwise(a, d, DIAGONAL),
    "rowwise-triangular": lambda a, d: greedy_rowwise(a, d, TRIANGULAR),
}


def find_triangular_set(a, d, method: str) -> TriangularSet:
    try:
        search = SEARCHES[method]
    except KeyError:
        raise ValueError(f"unknown preconditioner {method!r}; "
                         f"choose from {sorted(SEARCHES)}") from None
    return search(_as_sparse(a), np.asarray(d, dtype=float))
