"""Irrigation subgraphs S_n(r, c) of a visibility graph.

Every vertex ranks its visible neighbors by a uniform random permutation
(sorting i.i.d. 64-bit keys). Taking the first ``c`` entries of each ranking
draws ``c`` neighbors without replacement, and since one ranking serves every
``c`` the subgraphs are nested: ``edges(S(c)) <= edges(S(c + 1))``.
"""

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import _rng
from .errors import InvalidParameters, NTooSmall

_BLOCK_ARCS = 4_000_000


@dataclass(frozen=True)
class PreferenceTable:
    """Ranked neighbor lists, truncated to ``depth`` entries per vertex.

    ``ranked[indptr[i]:indptr[i+1]]`` holds the first ``min(depth, deg(i))``
    neighbors of ``i`` in preference order. The ranking is a pure function of
    ``(seed, i, neighbor)``, so tables of different depth agree on their
    common prefix.
    """

    seed: int
    depth: int
    indptr: np.ndarray
    ranked: np.ndarray
    degrees: np.ndarray

    @property
    def n(self):
        return len(self.indptr) - 1

    @property
    def is_full(self):
        return self.n == 0 or self.depth >= int(self.degrees.max(initial=0))

    def covers(self, c):
        return c <= self.depth or self.is_full

    def permutation(self, i):
        return self.ranked[self.indptr[i]:self.indptr[i + 1]]


def preference_keys(seed, rows, neighbors):
    """Ranking keys of the arcs ``(rows[k], neighbors[k])``; distinct within a row."""
    base = _rng.stream_base(seed, _rng.STREAM_PREFS)
    return _rng.counter_keys(_rng.vertex_streams(base, rows), neighbors)


def assign_preferences(G, seed, depth=None):
    """Draw an independent uniform ranking of every vertex's visible neighbors.

    With ``depth`` set only the leading ``depth`` entries are materialised;
    they coincide with the first entries of the full ranking. Selection uses a
    per-vertex key threshold so that only about ``depth`` keys per row get sorted.
    """
    deg = G.degrees
    n = G.n
    maxdeg = int(deg.max(initial=0))
    if depth is None or depth >= maxdeg:
        depth = maxdeg
    take = np.minimum(deg, depth)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(take, out=indptr[1:])
    ranked = np.empty(int(indptr[-1]), dtype=G.indices.dtype)

    base = _rng.stream_base(seed, _rng.STREAM_PREFS)
    row_lo = 0
    while row_lo < n:
        # rows [row_lo, row_hi) holding roughly _BLOCK_ARCS arcs
        row_hi = int(np.searchsorted(G.indptr, G.indptr[row_lo] + _BLOCK_ARCS, side="right")) - 1
        row_hi = min(n, max(row_hi, row_lo + 1))
        a0, a1 = G.indptr[row_lo], G.indptr[row_hi]
        bdeg = deg[row_lo:row_hi]
        btake = take[row_lo:row_hi]
        local = np.repeat(np.arange(row_hi - row_lo, dtype=np.int64), bdeg)
        nbr = G.indices[a0:a1]
        streams = _rng.vertex_streams(base, np.arange(row_lo, row_hi, dtype=np.int64))
        keys = _rng.counter_keys(np.repeat(streams, bdeg), nbr)

        if depth >= int(bdeg.max(initial=0)):
            sel = slice(None)
        else:
            frac = np.minimum(1.0, (btake + 4.0 * np.sqrt(btake) + 8.0) / np.maximum(bdeg, 1))
            thr = np.full(len(frac), np.iinfo(np.uint64).max, dtype=np.uint64)
            part = frac < 1.0
            thr[part] = (frac[part] * 2.0**64).astype(np.uint64)
            sel = keys <= np.repeat(thr, bdeg)
            got = np.bincount(local[sel], minlength=len(bdeg))
            short = got < btake
            if short.any():
                sel |= np.repeat(short, bdeg)
        s_local, s_keys, s_nbr = local[sel], keys[sel], nbr[sel]
        order = np.lexsort((s_keys, s_local))
        s_local, s_nbr = s_local[order], s_nbr[order]
        cnt = np.bincount(s_local, minlength=len(bdeg))
        first = np.cumsum(cnt) - cnt
        pos = np.arange(len(s_local), dtype=np.int64) - np.repeat(first, cnt)
        keep = pos < btake[s_local]
        ranked[indptr[row_lo]:indptr[row_hi]] = s_nbr[keep]
        row_lo = row_hi
    return PreferenceTable(int(seed), int(depth), indptr, ranked, deg.copy())


@dataclass(frozen=True)
class IrrigationGraph:
    """A realised S_n(r, c).

    ``arcs[arcs_indptr[i]:arcs_indptr[i+1]]`` are the picks of vertex ``i``;
    ``edges`` is the sorted array of distinct undirected pairs ``u < v``.
    """

    n: int
    c: int
    arcs_indptr: np.ndarray
    arcs: np.ndarray
    edges: np.ndarray
    mode: str = "prefix"

    def chosen(self, i):
        return self.arcs[self.arcs_indptr[i]:self.arcs_indptr[i + 1]]

    def edge_set(self):
        return set(map(tuple, self.edges.tolist()))

    def to_csr(self):
        u, v = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(u), dtype=np.int8)
        return sparse.csr_matrix((data, (np.concatenate([u, v]), np.concatenate([v, u]))),
                                 shape=(self.n, self.n))

    def degrees(self):
        return (np.bincount(self.edges[:, 0], minlength=self.n)
                + np.bincount(self.edges[:, 1], minlength=self.n))


def _undirected_edges(n, indptr, targets):
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    dst = targets.astype(np.int64)
    code = np.minimum(src, dst) * n + np.maximum(src, dst)
    code = np.unique(code)
    return np.stack([code // n, code % n], axis=1)


def _prefix_arcs(prefs, c):
    take = np.minimum(prefs.degrees, c)
    indptr = np.zeros(prefs.n + 1, dtype=np.int64)
    np.cumsum(take, out=indptr[1:])
    first = np.repeat(prefs.indptr[:-1], take)
    pos = np.arange(int(indptr[-1]), dtype=np.int64) - np.repeat(indptr[:-1], take)
    return indptr, prefs.ranked[first + pos]


def realize(G, prefs, c):
    """S(c): every vertex keeps the first ``min(c, deg)`` neighbors of its ranking."""
    if c < 1:
        raise InvalidParameters(f"c must be >= 1, got {c}")
    if not prefs.covers(c):
        prefs = assign_preferences(G, prefs.seed, depth=c)
    indptr, arcs = _prefix_arcs(prefs, c)
    return IrrigationGraph(G.n, int(c), indptr, arcs, _undirected_edges(G.n, indptr, arcs))


def first_round_size(n, eps):
    """``ceil(sqrt((2 + eps/2) ln n / ln ln n))``."""
    lln = math.log(math.log(n)) if n > 1 else float("-inf")
    if not lln > 0:
        raise NTooSmall(f"ln ln n must be positive, got n = {n}")
    return math.ceil(math.sqrt((2 + eps / 2) * math.log(n) / lln))


def realize_staged(G, c, eps, L, seed):
    """Round-based sampler: ``c_hat`` picks without replacement, then rounds of ``L`` picks with replacement.

    The number of replacement rounds is ``(c - c_hat) // L``. Duplicates are
    kept in the per-vertex arcs and collapse in the edge set.
    """
    if L < 1:
        raise InvalidParameters(f"L must be >= 1, got {L}")
    c_hat = first_round_size(G.n, eps)
    if c_hat > c:
        raise InvalidParameters(f"first-round size {c_hat} exceeds c = {c}")
    rounds = (c - c_hat) // L
    prefs = assign_preferences(G, seed, depth=c_hat)
    p_indptr, p_arcs = _prefix_arcs(prefs, c_hat)

    deg = G.degrees
    extra = rounds * L
    n_extra = np.where(deg > 0, extra, 0)
    counts = np.diff(p_indptr) + n_extra
    indptr = np.zeros(G.n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    arcs = np.empty(int(indptr[-1]), dtype=G.indices.dtype)

    first_len = np.diff(p_indptr)
    dst_first = np.repeat(indptr[:-1], first_len) + (
        np.arange(len(p_arcs), dtype=np.int64) - np.repeat(p_indptr[:-1], first_len))
    arcs[dst_first] = p_arcs

    if extra:
        active = np.nonzero(deg > 0)[0]
        base = _rng.stream_base(seed, _rng.STREAM_STAGED)
        streams = np.repeat(_rng.vertex_streams(base, active), extra)
        t = np.tile(np.arange(extra, dtype=np.int64), len(active))
        u = _rng.keys_to_unit(_rng.counter_keys(streams, t))
        adeg = np.repeat(deg[active], extra)
        pick = np.minimum((u * adeg).astype(np.int64), adeg - 1)
        arcs_extra = G.indices[np.repeat(G.indptr[active], extra) + pick]
        dst = np.repeat(indptr[active] + first_len[active], extra) + t
        arcs[dst] = arcs_extra
    return IrrigationGraph(G.n, int(c), indptr, arcs, _undirected_edges(G.n, indptr, arcs), mode="staged")


def write_edge_list(S, path, meta=None):
    """Write ``S`` as ``u,v`` rows (``u < v``) preceded by a ``# {json}`` metadata line."""
    header = {"n": S.n, "c": S.c, "sampler": S.mode}
    header.update(meta or {})
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write("u,v\n")
        for u, v in S.edges.tolist():
            fh.write(f"{u},{v}\n")


def read_edge_list(path):
    """Return ``(meta, edges)`` from a file written by :func:`write_edge_list`."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ValueError(f"{path}: missing metadata line")
        meta = json.loads(first[2:])
        if fh.readline().strip() != "u,v":
            raise ValueError(f"{path}: missing u,v header")
        rows = [tuple(map(int, line.split(","))) for line in fh if line.strip()]
    return meta, np.array(rows, dtype=np.int64).reshape(-1, 2)
