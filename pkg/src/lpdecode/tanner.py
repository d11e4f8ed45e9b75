"""Tanner graphs of binary LDPC codes, alist I/O and the peeling erasure decoder."""

from __future__ import annotations

import io
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class AlistError(ValueError):
    """Malformed alist input. ``lineno`` is 1-based."""

    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class AlistHeaderError(AlistError):
    pass


class AlistDegreeError(AlistError):
    pass


class AlistIndexError(AlistError):
    pass


class AlistTransposeError(AlistError):
    pass


class RankDeficientWarning(UserWarning):
    """Parity-check matrix does not have full row rank over GF(2)."""


class TannerGraph:
    """Sparse binary parity-check matrix stored as a pair of adjacency lists.

    Indices are 0-based. Instances are immutable after construction.

    Parameters
    ----------
    m, n : int
        Number of check nodes and variable nodes.
    check_adj : sequence of sequences of int
        ``check_adj[j]`` lists the variables in the neighborhood of check ``j``.
    """

    __slots__ = ("m", "n", "check_adj", "var_adj", "nnz", "_dense")

    def __init__(self, m: int, n: int, check_adj: Sequence[Iterable[int]]):
        if m < 0 or n < 0:
            raise ValueError("dimensions must be nonnegative")
        if len(check_adj) != m:
            raise ValueError(f"expected {m} check lists, got {len(check_adj)}")
        checks = []
        var_adj: list[list[int]] = [[] for _ in range(n)]
        for j, nbrs in enumerate(check_adj):
            row = tuple(sorted(int(i) for i in nbrs))
            if len(set(row)) != len(row):
                raise ValueError(f"duplicate variable in check {j}")
            for i in row:
                if not 0 <= i < n:
                    raise ValueError(f"variable index {i} out of range in check {j}")
                var_adj[i].append(j)
            checks.append(row)
        self.m = m
        self.n = n
        self.check_adj = tuple(checks)
        self.var_adj = tuple(tuple(v) for v in var_adj)
        self.nnz = sum(len(r) for r in checks)
        self._dense = None

    @classmethod
    def from_dense(cls, h) -> "TannerGraph":
        h = np.asarray(h)
        if h.ndim != 2:
            raise ValueError("parity-check matrix must be 2-D")
        if not np.isin(h, (0, 1)).all():
            raise ValueError("parity-check matrix must be binary")
        m, n = h.shape
        return cls(m, n, [np.flatnonzero(row).tolist() for row in h])

    def to_dense(self) -> np.ndarray:
        if self._dense is None:
            h = np.zeros((self.m, self.n), dtype=np.int8)
            for j, row in enumerate(self.check_adj):
                h[j, list(row)] = 1
            h.setflags(write=False)
            self._dense = h
        return self._dense

    def check_degree(self, j: int) -> int:
        return len(self.check_adj[j])

    def syndrome(self, bits) -> np.ndarray:
        """Return ``H @ bits mod 2``."""
        bits = np.asarray(bits, dtype=np.int64)
        return np.array(
            [int(bits[list(row)].sum()) & 1 for row in self.check_adj], dtype=np.int8
        )

    def is_codeword(self, bits) -> bool:
        return not self.syndrome(bits).any()

    def rank_gf2(self) -> int:
        return rank_gf2(self.to_dense())

    def subgraph(self, checks: Iterable[int]) -> "TannerGraph":
        """Tanner graph keeping only the given check nodes (all variables kept)."""
        checks = sorted(set(checks))
        return TannerGraph(len(checks), self.n, [self.check_adj[j] for j in checks])

    def validate(self) -> None:
        """Assert transpose consistency and sortedness of both adjacency views."""
        edges_c = {(j, i) for j, row in enumerate(self.check_adj) for i in row}
        edges_v = {(j, i) for i, col in enumerate(self.var_adj) for j in col}
        if edges_c != edges_v:
            raise AssertionError("check and variable adjacency disagree")
        for lst in (*self.check_adj, *self.var_adj):
            if any(a >= b for a, b in zip(lst, lst[1:])):
                raise AssertionError("adjacency list not strictly sorted")
        if self.nnz != len(edges_c):
            raise AssertionError("edge count mismatch")

    def __eq__(self, other) -> bool:
        if not isinstance(other, TannerGraph):
            return NotImplemented
        return (self.m, self.n, self.check_adj) == (other.m, other.n, other.check_adj)

    def __hash__(self) -> int:
        return hash((self.m, self.n, self.check_adj))

    def __repr__(self) -> str:
        return f"TannerGraph(m={self.m}, n={self.n}, nnz={self.nnz})"


def rank_gf2(h) -> int:
    """Rank of a binary matrix over GF(2) by Gaussian elimination."""
    a = np.array(h, dtype=np.uint8) & 1
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        pivots = np.flatnonzero(a[rank:, c])
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        if p != rank:
            a[[rank, p]] = a[[p, rank]]
        below = np.flatnonzero(a[:, c])
        below = below[below != rank]
        a[below] ^= a[rank]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# alist format
# ---------------------------------------------------------------------------

def _int_fields(line: str, lineno: int, exc=AlistHeaderError) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise exc(f"non-integer token in {line.strip()!r}", lineno) from None


def load_alist(source, *, warn_rank: bool = True) -> TannerGraph:
    """Parse an alist description of a parity-check matrix.

    Parameters
    ----------
    source : str, path-like or text stream
        Either alist text (if it contains a newline), a filename, or an open
        text file.
    warn_rank : bool
        Emit :class:`RankDeficientWarning` if H lacks full row rank mod 2.

    Returns
    -------
    TannerGraph
    """
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source) as fh:
            text = fh.read()

    lines = [(k + 1, ln) for k, ln in enumerate(text.splitlines()) if ln.strip()]
    if not lines:
        raise AlistHeaderError("empty input", 1)
    it = iter(lines)

    def take(what: str, exc=AlistHeaderError):
        try:
            lineno, ln = next(it)
        except StopIteration:
            raise AlistHeaderError(f"unexpected end of input reading {what}",
                                   lines[-1][0] + 1) from None
        return lineno, _int_fields(ln, lineno, exc)

    lineno, hdr = take("header")
    if len(hdr) != 2 or min(hdr) <= 0:
        raise AlistHeaderError("header must be two positive integers 'n m'", lineno)
    n, m = hdr
    lineno, maxdeg = take("max degrees")
    if len(maxdeg) != 2 or min(maxdeg) < 0:
        raise AlistHeaderError("max-degree line must hold two nonnegative integers",
                               lineno)
    max_col, max_row = maxdeg

    lineno, col_deg = take("column degrees", AlistDegreeError)
    if len(col_deg) != n:
        raise AlistDegreeError(f"expected {n} column degrees, got {len(col_deg)}", lineno)
    if any(d < 0 or d > max_col for d in col_deg):
        raise AlistDegreeError("column degree outside [0, max column degree]", lineno)
    lineno, row_deg = take("row degrees", AlistDegreeError)
    if len(row_deg) != m:
        raise AlistDegreeError(f"expected {m} row degrees, got {len(row_deg)}", lineno)
    if any(d < 0 or d > max_row for d in row_deg):
        raise AlistDegreeError("row degree outside [0, max row degree]", lineno)
    if sum(col_deg) != sum(row_deg):
        raise AlistDegreeError("column and row degree totals differ", lineno)

    def read_lists(count, degrees, limit, kind):
        out = []
        for k in range(count):
            lineno, vals = take(f"{kind} list {k + 1}", AlistIndexError)
            nz = [v for v in vals if v != 0]
            if len(nz) != degrees[k]:
                raise AlistDegreeError(
                    f"{kind} {k + 1} lists {len(nz)} entries, degree says {degrees[k]}",
                    lineno)
            if any(v < 1 or v > limit for v in nz):
                raise AlistIndexError(f"{kind} {k + 1} has index outside 1..{limit}",
                                      lineno)
            if len(set(nz)) != len(nz):
                raise AlistIndexError(f"{kind} {k + 1} repeats an index", lineno)
            out.append((lineno, [v - 1 for v in nz]))
        return out

    col_lists = read_lists(n, col_deg, m, "column")
    row_lists = read_lists(m, row_deg, n, "row")

    g = TannerGraph(m, n, [r for _, r in row_lists])
    for i, (lineno, col) in enumerate(col_lists):
        if sorted(col) != list(g.var_adj[i]):
            raise AlistTransposeError(
                f"column {i + 1} list disagrees with the row lists", lineno)
    if warn_rank and g.rank_gf2() < m:
        warnings.warn(f"parity-check matrix has GF(2) rank {g.rank_gf2()} < m={m}",
                      RankDeficientWarning, stacklevel=2)
    return g


def save_alist(g: TannerGraph, dest=None) -> str:
    """Serialize ``g`` in alist format (zero-padded lists). Returns the text."""
    col_deg = [len(c) for c in g.var_adj]
    row_deg = [len(r) for r in g.check_adj]
    max_col = max(col_deg, default=0)
    max_row = max(row_deg, default=0)
    buf = io.StringIO()
    buf.write(f"{g.n} {g.m}\n{max_col} {max_row}\n")
    buf.write(" ".join(map(str, col_deg)) + "\n")
    buf.write(" ".join(map(str, row_deg)) + "\n")
    for col in g.var_adj:
        vals = [j + 1 for j in col] + [0] * (max_col - len(col))
        buf.write(" ".join(map(str, vals)) + "\n")
    for row in g.check_adj:
        vals = [i + 1 for i in row] + [0] * (max_row - len(row))
        buf.write(" ".join(map(str, vals)) + "\n")
    text = buf.getvalue()
    if dest is not None:
        if hasattr(dest, "write"):
            dest.write(text)
        else:
            with open(dest, "w") as fh:
                fh.write(text)
    return text


# ---------------------------------------------------------------------------
# Peeling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeelingResult:
    success: bool
    peel_order: tuple[tuple[int, int], ...]
    residual: frozenset[int] = field(default_factory=frozenset)


def _peel(check_adj, var_adj, erased) -> PeelingResult:
    # live[j] = number of still-erased neighbors of check j
    erased = set(erased)
    live: dict[int, int] = {}
    for i in erased:
        for j in var_adj[i]:
            live[j] = live.get(j, 0) + 1
    queue = deque(sorted(j for j, c in live.items() if c == 1))
    order = []
    while queue:
        j = queue.popleft()
        if live[j] != 1:
            continue
        i = next(v for v in check_adj[j] if v in erased)
        erased.discard(i)
        order.append((j, i))
        for k in var_adj[i]:
            live[k] -= 1
            if live[k] == 1:
                queue.append(k)
    return PeelingResult(not erased, tuple(order), frozenset(erased))


def peel_erasures(g: TannerGraph, erasures: Iterable[int]) -> PeelingResult:
    """Run the peeling decoder on the erased positions ``erasures``.

    Degree-1 checks are processed FIFO, lowest index first among those
    available at the start, so ``peel_order`` is deterministic.
    """
    erasures = set(int(i) for i in erasures)
    if any(not 0 <= i < g.n for i in erasures):
        raise ValueError("erasure index out of range")
    return _peel(g.check_adj, g.var_adj, erasures)


def contains_stopping_set(g: TannerGraph, s: Iterable[int]) -> bool:
    """True iff the variable set ``s`` contains a nonempty stopping set."""
    return not peel_erasures(g, s).success


def is_stopping_set(g: TannerGraph, s: Iterable[int]) -> bool:
    """True iff ``s`` itself is a nonempty stopping set (no check sees it exactly once)."""
    s = set(s)
    if not s:
        return False
    for row in g.check_adj:
        if sum(1 for i in row if i in s) == 1:
            return False
    return True
