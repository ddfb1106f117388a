"""Connectivity, isolated cliques, hop diameter and spanning ratio of S_n."""

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from . import _rng
from .errors import NotConnected

DISCONNECTED = "disconnected"


def _csr(S):
    return S.to_csr() if hasattr(S, "to_csr") else sparse.csr_matrix(S)


@dataclass(frozen=True)
class ComponentSummary:
    component_id: np.ndarray
    sizes: np.ndarray
    count: int
    smallest: int
    is_connected: bool

    @property
    def largest(self):
        return int(self.sizes.max(initial=0))


def components(S):
    """Label connected components of ``S``.

    Each label is the smallest vertex id of its component; ``sizes`` is sorted.
    """
    n = S.n
    if n == 0:
        return ComponentSummary(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), 0, 0, False)
    count, raw = csgraph.connected_components(_csr(S), directed=False)
    rep = np.full(count, n, dtype=np.int64)
    np.minimum.at(rep, raw, np.arange(n, dtype=np.int64))
    labels = rep[raw]
    sizes = np.sort(np.bincount(raw, minlength=count))
    return ComponentSummary(labels, sizes, int(count), int(sizes[0]), count == 1)


@dataclass(frozen=True)
class CliqueWitness:
    vertices: tuple
    k: int


def find_isolated_cliques(S, k, summary=None):
    """Every component of size exactly ``k`` whose induced subgraph is complete."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    summary = summary or components(S)
    labels = summary.component_id
    size_of = np.bincount(labels, minlength=S.n)
    edges_in = np.bincount(labels[S.edges[:, 0]], minlength=S.n) if len(S.edges) else np.zeros(S.n, int)
    hits = np.nonzero((size_of == k) & (edges_in == k * (k - 1) // 2))[0]
    if len(hits) == 0:
        return []
    order = np.argsort(labels, kind="stable")
    starts = np.searchsorted(labels[order], hits)
    return [CliqueWitness(tuple(order[s:s + k].tolist()), k) for s in starts]


@dataclass(frozen=True)
class HopDiameter:
    """``mode`` is ``"exact"``, ``"bounds"`` or ``"disconnected"``; for exact, lower == upper."""

    lower: int
    upper: int
    mode: str

    @property
    def value(self):
        return DISCONNECTED if self.mode == DISCONNECTED else self.upper


def _bfs(A, source):
    dist, pred = csgraph.shortest_path(A, unweighted=True, directed=False, indices=source,
                                       return_predecessors=True)
    return dist, pred


def exact_diameter(S, chunk=256):
    """Maximum BFS eccentricity over all sources, or None when disconnected."""
    A = _csr(S)
    n = A.shape[0]
    best = 0
    for lo in range(0, n, chunk):
        dist = csgraph.shortest_path(A, unweighted=True, directed=False,
                                     indices=np.arange(lo, min(n, lo + chunk)))
        if np.isinf(dist).any():
            return None
        best = max(best, int(dist.max()))
    return best


def double_sweep_bounds(S, sweeps=4, start=0):
    """``(lower, upper)`` hop-diameter bounds, or None when disconnected.

    Lower: iterated double sweep (eccentricity of the last BFS root).
    Upper: ``2 * ecc(v)`` for the midpoint ``v`` of each sweep's longest path.
    """
    A = _csr(S)
    n = A.shape[0]
    if n <= 1:
        return 0, 0
    dist, _ = _bfs(A, start)
    if np.isinf(dist).any():
        return None
    lower = int(dist.max())
    upper = 2 * lower
    a = int(np.argmax(dist))
    for _ in range(sweeps):
        dist, pred = _bfs(A, a)
        b = int(np.argmax(dist))
        ecc = int(dist[b])
        lower = max(lower, ecc)
        v = b
        for _ in range(ecc // 2):
            v = int(pred[v])
        mid_dist, _ = _bfs(A, v)
        upper = min(upper, 2 * int(mid_dist.max()))
        if b == a or lower == upper:
            break
        a = b
    return lower, upper


def hop_diameter(S, exact_cutoff=3000):
    """Exact hop diameter for ``n <= exact_cutoff``, double-sweep bounds above it."""
    if S.n > exact_cutoff:
        bounds = double_sweep_bounds(S)
        if bounds is None:
            return HopDiameter(None, None, DISCONNECTED)
        return HopDiameter(bounds[0], bounds[1], "bounds")
    d = exact_diameter(S)
    if d is None:
        return HopDiameter(None, None, DISCONNECTED)
    return HopDiameter(d, d, "exact")


def spanning_ratio(S, points, r, mode="exact", k_sources=16, seed=0, chunk=64):
    """Modified spanning ratio: max of path length / distance over pairs farther apart than ``r``.

    Path length is the shortest path with Euclidean edge weights. ``mode`` is
    ``"exact"`` (all sources) or ``"sampled"`` (``k_sources`` uniform sources;
    a lower bound on the exact value). Returns 1.0 when no pair is eligible.
    """
    coords = points.coords if hasattr(points, "coords") else np.asarray(points)
    n = S.n
    if not components(S).is_connected:
        raise NotConnected("spanning ratio needs a connected graph")
    u, v = S.edges[:, 0], S.edges[:, 1]
    w = np.sqrt(((coords[u] - coords[v]) ** 2).sum(axis=1))
    # zero-length edges would vanish from a sparse matrix
    w = np.maximum(w, np.finfo(float).tiny)
    A = sparse.csr_matrix((np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
                          shape=(n, n))
    if mode == "exact":
        sources = np.arange(n)
    elif mode == "sampled":
        rng = _rng.generator(seed, _rng.STREAM_SAMPLING)
        sources = np.sort(rng.choice(n, size=min(k_sources, n), replace=False))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    r2 = r * r
    best = 1.0
    for lo in range(0, len(sources), chunk):
        src = sources[lo:lo + chunk]
        path = csgraph.dijkstra(A, directed=False, indices=src)
        diff = coords[None, :, :] - coords[src][:, None, :]
        d2 = (diff * diff).sum(axis=2)
        eligible = d2 > r2
        if eligible.any():
            ratio = path[eligible] / np.sqrt(d2[eligible])
            best = max(best, float(ratio.max()))
    return best
