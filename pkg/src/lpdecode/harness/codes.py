"""Random regular LDPC codes and a GF(2) encoder."""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from ..tanner import TannerGraph


class CodeConstructionError(RuntimeError):
    """No valid graph was found within the retry budget."""


def _bad_edges(var: np.ndarray, chk: np.ndarray) -> set[int]:
    """One edge from every repeated edge and from every 4-cycle."""
    by_check = defaultdict(list)
    seen = set()
    bad = set()
    for k, (v, c) in enumerate(zip(var.tolist(), chk.tolist())):
        if (v, c) in seen:
            bad.add(k)
        else:
            seen.add((v, c))
            by_check[c].append(k)
    # two variables sharing two checks close a 4-cycle
    shared = {}
    for c in sorted(by_check):
        edges = by_check[c]
        for a in range(len(edges)):
            for b in range(a + 1, len(edges)):
                pair = tuple(sorted((var[edges[a]], var[edges[b]])))
                if pair in shared:
                    bad.add(edges[a])
                else:
                    shared[pair] = c
    return bad


def generate_regular_code(d_v: int, d_c: int, n: int, seed: int = 0, *,
                          max_passes: int = 2000, retries: int = 20) -> TannerGraph:
    """Random (d_v, d_c)-regular Tanner graph without repeated edges or 4-cycles.

    Edges come from a configuration model: variable sockets are matched to a
    random permutation of check sockets. Offending edges then swap their
    check endpoint with a random edge until the graph is clean.

    Parameters
    ----------
    d_v, d_c : int
        Variable and check degrees.
    n : int
        Number of variables; ``n * d_v`` must be divisible by ``d_c``.
    seed : int
        The output is a deterministic function of the arguments.

    Raises
    ------
    ValueError
        Degrees or length are inconsistent.
    CodeConstructionError
        Repair failed in every retry, which happens for very short codes.
    """
    if d_v < 1 or d_c < 1 or n < 1:
        raise ValueError("degrees and length must be positive")
    if (n * d_v) % d_c:
        raise ValueError(f"n*d_v = {n * d_v} is not divisible by d_c = {d_c}")
    m = n * d_v // d_c
    if d_c > n or d_v > m:
        raise ValueError("degree exceeds the number of nodes on the other side")
    rng = np.random.default_rng(seed)
    var = np.repeat(np.arange(n), d_v)
    n_edges = var.size
    for _ in range(retries):
        chk = rng.permutation(np.repeat(np.arange(m), d_c))
        for _ in range(max_passes):
            bad = _bad_edges(var, chk)
            if not bad:
                h = np.zeros((m, n), dtype=np.int8)
                h[chk, var] = 1
                return TannerGraph.from_dense(h)
            for k in sorted(bad):
                l = int(rng.integers(n_edges))
                chk[k], chk[l] = chk[l], chk[k]
    raise CodeConstructionError(
        f"no ({d_v},{d_c})-regular graph with n={n} after {retries} retries")


def girth_at_least_six(g: TannerGraph) -> bool:
    """True when no two variables share more than one check."""
    seen = set()
    for nbrs in g.check_adj:
        for a in range(len(nbrs)):
            for b in range(a + 1, len(nbrs)):
                pair = (nbrs[a], nbrs[b])
                if pair in seen:
                    return False
                seen.add(pair)
    return True


def nullspace_gf2(h: np.ndarray) -> np.ndarray:
    """Basis of the binary null space of ``h``, one vector per row."""
    a = (np.asarray(h) % 2).astype(np.uint8)
    m, n = a.shape
    a = a.copy()
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        rows = np.nonzero(a[r:, c])[0]
        if rows.size == 0:
            continue
        p = r + rows[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for row, pc in enumerate(pivots):
            basis[k, pc] = a[row, f]
    return basis


class Encoder:
    """Maps information words to codewords of ``g`` via a null-space basis."""

    def __init__(self, g: TannerGraph):
        self.graph = g
        self.generator = nullspace_gf2(g.to_dense())

    @property
    def dimension(self) -> int:
        return self.generator.shape[0]

    def encode(self, info) -> np.ndarray:
        info = np.asarray(info, dtype=np.uint8) % 2
        if info.shape != (self.dimension,):
            raise ValueError(f"expected {self.dimension} information bits")
        return ((info.astype(np.int64) @ self.generator) % 2).astype(np.uint8)

    def random_codeword(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(info, codeword)`` for uniformly random information bits."""
        info = rng.integers(0, 2, self.dimension, dtype=np.uint8)
        return info, self.encode(info)
