"""Point sets, grid geometry and the visibility graph G_n(r).

All logarithms are natural. Coordinates live in the half-open cube [0, 1)^d and
cells are half-open boxes, so every point belongs to exactly one cell.
"""

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.special import gamma as gamma_fn

from . import _rng
from .errors import InvalidDimension, InvalidParameters, RadiusOutOfRange


def unit_ball_volume(d):
    return math.pi ** (d / 2) / gamma_fn(d / 2 + 1)


def critical_gamma(d):
    """Radius multiplier at which G_n(gamma (log n / n)^(1/d)) becomes connected.

    Equal to ``1 / Vol(B(0,1))^(1/d)``.
    """
    if d < 1:
        raise InvalidDimension(f"dimension must be >= 1, got {d}")
    return 1.0 / unit_ball_volume(d) ** (1.0 / d)


def safe_gamma(d):
    """Default multiplier ``2 * 3^(1/d)`` for which the cell density bounds hold."""
    return 2.0 * 3.0 ** (1.0 / d)


def radius_for(n, d, gamma):
    return gamma * (math.log(n) / n) ** (1.0 / d)


def gamma_for(n, d, r):
    return r / (math.log(n) / n) ** (1.0 / d)


@dataclass(frozen=True)
class ModelParams:
    """Model parameters; exactly one of ``gamma`` and ``r`` is given, the other derived."""

    n: int
    d: int = 2
    gamma: float = None
    r: float = None
    c: int = 1
    seed: int = 0
    eps: float = 0.1

    def __post_init__(self):
        if self.d < 1:
            raise InvalidDimension(f"dimension must be >= 1, got {self.d}")
        if self.n < 2:
            raise InvalidParameters(f"n must be >= 2, got {self.n}")
        if self.c < 1:
            raise InvalidParameters(f"c must be >= 1, got {self.c}")
        if not 0 < self.eps < 2:
            raise InvalidParameters(f"eps must lie in (0, 2), got {self.eps}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameters("seed must be a 64-bit unsigned integer")
        if (self.gamma is None) == (self.r is None):
            raise InvalidParameters("exactly one of gamma and r must be supplied")
        if self.gamma is not None:
            if self.gamma <= 0:
                raise InvalidParameters(f"gamma must be > 0, got {self.gamma}")
            object.__setattr__(self, "r", radius_for(self.n, self.d, self.gamma))
        else:
            object.__setattr__(self, "gamma", gamma_for(self.n, self.d, self.r))
        if not 0 < self.r < 1:
            raise RadiusOutOfRange(
                f"r = {self.r!r} is outside (0, 1); n = {self.n} is too small for gamma = {self.gamma!r}")


def derive_geometry(params):
    """Return ``(r, ell, m)`` with ``ell = 1 / (3 floor(1/r))`` and ``m = 3 floor(1/r)``."""
    r = params.r
    if not 0 < r < 1:
        raise RadiusOutOfRange(f"r = {r!r} is outside (0, 1)")
    k = math.floor(1.0 / r)
    m = 3 * k
    return r, 1.0 / m, m


@dataclass(frozen=True)
class PointSet:
    coords: np.ndarray
    seed: int = None

    @property
    def dim(self):
        return self.coords.shape[1]

    def __len__(self):
        return self.coords.shape[0]

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["vertex"] + [f"x{k}" for k in range(self.dim)])
            for i, row in enumerate(self.coords.tolist()):
                w.writerow([i] + [repr(v) for v in row])

    @classmethod
    def from_csv(cls, path, seed=None):
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        d = len(rows[0]) - 1
        coords = np.array([[float(v) for v in row[1:]] for row in rows[1:]], dtype=np.float64)
        return cls(coords.reshape(-1, d), seed)


def sample_points(n, d, seed):
    """Draw ``n`` i.i.d. uniform points in [0, 1)^d from the seeded PCG64 stream."""
    if d < 1:
        raise InvalidDimension(f"dimension must be >= 1, got {d}")
    if n < 0:
        raise InvalidParameters(f"n must be >= 0, got {n}")
    coords = _rng.point_generator(seed).random((n, d))
    return PointSet(coords, seed)


def cell_indices(coords, m):
    """Integer cell coordinates ``floor(x * m)`` of each point, clipped to [0, m-1]."""
    idx = np.floor(np.asarray(coords) * m).astype(np.int64)
    np.clip(idx, 0, m - 1, out=idx)
    return idx


@dataclass(frozen=True)
class CellGrid:
    """Tiling of [0,1)^d by ``cells_per_side^d`` half-open cubes.

    ``order`` lists vertices sorted by flat cell id (ties by vertex id) and the
    members of flat cell ``f`` are ``order[starts[f]:starts[f+1]]``.
    """

    cells_per_side: int
    dim: int
    cell_of_vertex: np.ndarray
    order: np.ndarray
    starts: np.ndarray

    @property
    def ell(self):
        return 1.0 / self.cells_per_side

    @property
    def n_cells(self):
        return self.cells_per_side ** self.dim

    @classmethod
    def build(cls, points, cells_per_side):
        coords = points.coords if isinstance(points, PointSet) else np.asarray(points)
        d = coords.shape[1]
        cov = cell_indices(coords, cells_per_side)
        flat = flatten_cells(cov, cells_per_side)
        order = np.argsort(flat, kind="stable")
        counts = np.bincount(flat, minlength=cells_per_side**d)
        starts = np.zeros(counts.size + 1, dtype=np.int64)
        np.cumsum(counts, out=starts[1:])
        return cls(cells_per_side, d, cov, order, starts)

    @classmethod
    def for_radius(cls, points, r, coarse=False):
        """The ell-grid (``3 floor(1/r)`` per side) or, if ``coarse``, the 3ell-grid."""
        k = math.floor(1.0 / r)
        return cls.build(points, k if coarse else 3 * k)

    def counts(self):
        return np.diff(self.starts)

    def flat_of_vertex(self):
        return flatten_cells(self.cell_of_vertex, self.cells_per_side)

    def members(self, cell):
        f = int(flatten_cells(np.asarray(cell)[None, :], self.cells_per_side)[0])
        return self.order[self.starts[f]:self.starts[f + 1]]

    def unflatten(self, flat):
        return np.stack(np.unravel_index(flat, (self.cells_per_side,) * self.dim), axis=-1)


def flatten_cells(cells, m):
    cells = np.asarray(cells, dtype=np.int64)
    d = cells.shape[-1]
    strides = m ** np.arange(d - 1, -1, -1, dtype=np.int64)
    return cells @ strides


def _window(d, w):
    return np.array(list(itertools.product(range(-w, w + 1), repeat=d)), dtype=np.int64)


def ball_candidates(grid, centers, radius, max_pairs=4_000_000):
    """Yield ``(center_idx, vertex_idx)`` arrays of candidates within the cell window of each center.

    The window has Chebyshev radius ``ceil(radius * m)`` in cell units, which
    covers every point at Euclidean distance < ``radius``. Candidates come out
    grouped by ascending center index.
    """
    centers = np.asarray(centers, dtype=np.float64)
    m = grid.cells_per_side
    w = max(1, int(math.ceil(radius * m * (1 + 1e-12))))
    offs = _window(grid.dim, w)
    ccells = cell_indices(centers, m)
    density = max(1.0, len(grid.order) / grid.n_cells)
    step = max(1, int(max_pairs // (len(offs) * density)))
    for lo in range(0, len(centers), step):
        hi = min(lo + step, len(centers))
        cells = ccells[lo:hi, None, :] + offs[None, :, :]
        valid = np.all((cells >= 0) & (cells < m), axis=2)
        cid, kid = np.nonzero(valid)
        flat = flatten_cells(cells[cid, kid], m)
        first = grid.starts[flat]
        cnt = grid.starts[flat + 1] - first
        total = int(cnt.sum())
        if total == 0:
            continue
        offsets = np.cumsum(cnt) - cnt
        within = np.arange(total, dtype=np.int64) - np.repeat(offsets, cnt)
        yield np.repeat(cid + lo, cnt), grid.order[np.repeat(first, cnt) + within]


def squared_distances(columns, i, j):
    """``sum_k (x_ik - x_jk)^2`` accumulated axis by axis; ``columns`` holds one array per axis."""
    acc = np.zeros(len(i), dtype=np.float64)
    for col in columns:
        diff = np.take(col, i)
        diff -= np.take(col, j)
        diff *= diff
        acc += diff
    return acc


def coordinate_columns(coords):
    return [np.ascontiguousarray(coords[:, k]) for k in range(coords.shape[1])]


@dataclass(frozen=True)
class VisibilityGraph:
    """G_n(r) in CSR form; row ``i`` lists the visible neighbors of ``i`` in increasing order."""

    radius: float
    indptr: np.ndarray
    indices: np.ndarray
    grid: CellGrid = field(default=None, repr=False)

    @property
    def n(self):
        return len(self.indptr) - 1

    @property
    def degrees(self):
        return np.diff(self.indptr)

    def neighbors(self, i):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def adjacency(self):
        return [self.neighbors(i).tolist() for i in range(self.n)]

    def edges(self):
        """Undirected edges as an ``(E, 2)`` array with ``u < v``, lexicographically sorted."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        mask = rows < self.indices
        return np.stack([rows[mask], self.indices[mask].astype(np.int64)], axis=1)

    def to_csr(self):
        data = np.ones(len(self.indices), dtype=np.int8)
        return sparse.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))


def build_visibility(points, r, grid=None):
    """Build G_n(r): ``j`` is adjacent to ``i`` iff ``||X_i - X_j||^2 < r^2``.

    Neighbor search scans the ``7^d`` cells of the ell-grid around each point.
    """
    if not 0 < r < 1:
        raise RadiusOutOfRange(f"r = {r!r} is outside (0, 1)")
    coords = points.coords
    n = coords.shape[0]
    if grid is None:
        grid = CellGrid.for_radius(points, r)
    cols = coordinate_columns(coords)
    r2 = r * r
    idx_type = np.int32 if n < 2**31 else np.int64
    counts = np.zeros(n, dtype=np.int64)
    chunks = []
    for ci, pj in ball_candidates(grid, coords, r):
        keep = (squared_distances(cols, ci, pj) < r2) & (ci != pj)
        ci = ci[keep]
        pj = pj[keep]
        if len(ci) == 0:
            continue
        lo, hi = ci[0], ci[-1] + 1
        local = ci - lo
        # row-major key within the chunk; int32 whenever it fits (faster sort)
        span = (hi - lo) * n
        key = local.astype(np.int32 if span < 2**31 else np.int64)
        key *= n
        key += pj.astype(key.dtype)
        key.sort()
        counts[lo:hi] += np.bincount(local, minlength=hi - lo)
        chunks.append((key % n).astype(idx_type, copy=False))
    indices = np.concatenate(chunks) if chunks else np.zeros(0, dtype=idx_type)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return VisibilityGraph(r, indptr, indices, grid)
