"""Grid diagnostics: cell densities, black/white cell coloring, properties (i)-(iv), moon counts.

Two tilings are used. The fine grid has side ``ell = 1 / (3 floor(1/r))``; the
coarse grid groups ``3^d`` fine cubes into cells of side ``3 ell`` and carries
the coloring.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse import csgraph

from . import _rng
from .analysis import components
from .model import CellGrid, ball_candidates, coordinate_columns, unit_ball_volume

EMPTY, BLACK, WHITE = 0, 1, 2


def density_gap(x):
    """``x ln x - x + 1`` (continuous extension 1 at 0)."""
    return 1.0 if x == 0 else x * math.log(x) - x + 1.0


def _bisect(g, lo, hi):
    glo = g(lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return lo if abs(g(lo)) <= abs(g(hi)) else hi


def solve_alpha_beta():
    """Roots of ``x ln x - x + 1 = 1/2`` below and above 1, by bisection on (1e-9, 1) and (1, 8)."""
    assert density_gap(1.0) == 0.0

    def g(x):
        return density_gap(x) - 0.5

    return _bisect(g, 1e-9, 1.0), _bisect(g, 1.0, 8.0)


@dataclass(frozen=True)
class DensityReport:
    alpha: float
    beta: float
    lower: float
    upper: float
    violations: list
    all_ok: bool
    max_count: int = 0
    min_count: int = 0


def density_report(points, grid, n=None):
    """Compare every fine-cell count with ``[alpha n ell^d, beta n ell^d]``."""
    n = len(points) if n is None else n
    alpha, beta = solve_alpha_beta()
    vol = grid.ell ** grid.dim
    lower, upper = alpha * n * vol, beta * n * vol
    counts = grid.counts()
    bad = np.nonzero((counts < lower) | (counts > upper))[0]
    cells = grid.unflatten(bad)
    violations = [(tuple(int(v) for v in cell), int(counts[f])) for cell, f in zip(cells, bad)]
    return DensityReport(alpha, beta, lower, upper, violations, len(bad) == 0,
                         int(counts.max(initial=0)), int(counts.min()) if counts.size else 0)


@dataclass(frozen=True)
class CellColoring:
    """Coloring of the coarse grid.

    ``color`` holds EMPTY, BLACK or WHITE per cell; ``face_links[k]`` has
    shape ``m`` in every axis except ``m - 1`` along ``k`` and flags whether an
    S-edge joins cell ``x`` to ``x + e_k``.
    """

    cell_side: float
    color: np.ndarray
    occupancy: np.ndarray
    star_white_components: list
    face_links: tuple = field(repr=False)

    @property
    def black(self):
        return self.color == BLACK

    @property
    def max_white_component(self):
        return max(self.star_white_components, default=0)

    @property
    def all_faces_linked(self):
        return all(bool(f.all()) for f in self.face_links)


def star_components(mask):
    """Sizes (descending) of the components of ``mask`` under corner adjacency."""
    structure = np.ones((3,) * mask.ndim, dtype=bool)
    labels, count = ndimage.label(mask, structure=structure)
    sizes = np.bincount(labels.ravel(), minlength=count + 1)[1:]
    return sorted(sizes.tolist(), reverse=True)


def color_cells(S, points, grid3):
    """Black cells are those whose vertices are connected using intra-cell S-edges only."""
    m, d, n = grid3.cells_per_side, grid3.dim, S.n
    shape = (m,) * d
    flat = grid3.flat_of_vertex()
    u, v = S.edges[:, 0], S.edges[:, 1]
    inside = flat[u] == flat[v]
    A = sparse.csr_matrix((np.ones(int(inside.sum()), dtype=np.int8), (u[inside], v[inside])), shape=(n, n))
    _, labels = csgraph.connected_components(A, directed=False)
    occupancy = np.bincount(flat, minlength=m**d)
    pairs = np.unique(flat.astype(np.int64) * max(n, 1) + labels)
    pieces = np.bincount(pairs // max(n, 1), minlength=m**d)
    color = np.full(m**d, WHITE, dtype=np.int8)
    color[occupancy == 0] = EMPTY
    color[pieces == 1] = BLACK
    color = color.reshape(shape)

    cu, cv = grid3.cell_of_vertex[u], grid3.cell_of_vertex[v]
    delta = cv - cu
    face = np.abs(delta).sum(axis=1) == 1
    links = []
    for k in range(d):
        lk_shape = tuple(m - 1 if a == k else m for a in range(d))
        lk = np.zeros(lk_shape, dtype=bool)
        sel = face & (delta[:, k] != 0)
        low = np.minimum(cu[sel], cv[sel])
        if len(low):
            lk[tuple(low.T)] = True
        links.append(lk)
    return CellColoring(1.0 / m, color, occupancy.reshape(shape),
                        star_components(color == WHITE), tuple(links))


@dataclass(frozen=True)
class PropertyReport:
    prop_i: bool
    prop_ii: bool
    prop_iii: bool
    prop_iv: bool
    q: float
    s: float
    lambda_occ: float
    observed: dict
    side_conditions: dict


def property_report(S, coloring, density, params, summary=None):
    """Evaluate properties (i)-(iv) with ``q = 2 (ln n)^(2/3)``, ``s = exp((ln n)^(1/3))``
    and ``lambda = 3^d beta gamma^d``."""
    n, d, r, gamma = params.n, params.d, params.r, params.gamma
    ln = math.log(n)
    q = 2.0 * ln ** (2.0 / 3.0)
    s = math.exp(ln ** (1.0 / 3.0))
    lam = 3**d * density.beta * gamma**d
    summary = summary or components(S)
    max_white = coloring.max_white_component
    max_occ = int(coloring.occupancy.max(initial=0))
    prop_i = bool((coloring.occupancy > 0).all()) and coloring.all_faces_linked
    cond_q = q < (1.0 / (d + 1)) * r ** (-(1.0 - 1.0 / d))
    cond_s = d > 1 and s / (lam * ln) > ((d + 1) * q) ** (d / (d - 1))
    return PropertyReport(
        prop_i=prop_i,
        prop_ii=max_white <= q,
        prop_iii=summary.smallest >= s,
        prop_iv=max_occ <= lam * ln,
        q=q, s=s, lambda_occ=lam,
        observed={"max_white_star_component": max_white,
                  "smallest_component": summary.smallest,
                  "max_cell_occupancy": max_occ,
                  "white_cells": int((coloring.color == WHITE).sum()),
                  "empty_cells": int((coloring.color == EMPTY).sum())},
        side_conditions={"q_small": bool(cond_q), "s_large": bool(cond_s)},
    )


class MoonReport(NamedTuple):
    min_count: int
    max_count: int


def moon_bounds(n, r, d, sigma_factor=0.5, rho_factor=2.0):
    """Count bounds ``factor * theta_d 2^-d n r^d`` for moons (defaults: 1/2 and 2)."""
    base = unit_ball_volume(d) * 2.0**-d * n * r**d
    return sigma_factor * base, rho_factor * base


def sample_moon_centers(d, r, pairs, rng):
    """``x`` uniform in the cube, ``y`` uniform in ``B(x, 5r/4)`` restricted to the cube."""
    reach = 1.25 * r
    x = rng.random((pairs, d))
    y = np.empty_like(x)
    pending = np.arange(pairs)
    while len(pending):
        off = rng.uniform(-reach, reach, (len(pending), d))
        cand = x[pending] + off
        ok = ((off * off).sum(axis=1) < reach * reach) & np.all((cand >= 0) & (cand < 1), axis=1)
        y[pending[ok]] = cand[ok]
        pending = pending[~ok]
    return x, y


def moon_counts(points, r, x, y, grid=None):
    """Number of points in ``B(x_k, r) & B(y_k, r/2)`` for each center pair."""
    coords = points.coords
    grid = grid or CellGrid.for_radius(points, r)
    counts = np.zeros(len(y), dtype=np.int64)
    if len(coords) == 0 or len(y) == 0:
        return counts
    cols = coordinate_columns(coords)
    xcols = coordinate_columns(np.asarray(x, dtype=np.float64))
    ycols = coordinate_columns(np.asarray(y, dtype=np.float64))
    half2, r2 = (r / 2) ** 2, r * r
    for ci, pj in ball_candidates(grid, y, r / 2):
        dy = np.zeros(len(ci))
        dx = np.zeros(len(ci))
        for k in range(len(cols)):
            a = np.take(cols[k], pj)
            t = a - np.take(ycols[k], ci)
            dy += t * t
            t = a - np.take(xcols[k], ci)
            dx += t * t
        hit = (dy < half2) & (dx < r2)
        counts += np.bincount(ci[hit], minlength=len(y))
    return counts


def moon_report(points, r, pair_samples, seed, grid=None):
    """Extremes of moon counts over ``pair_samples`` random center pairs."""
    if pair_samples < 1:
        raise ValueError("pair_samples must be >= 1")
    rng = _rng.generator(seed, _rng.STREAM_MOONS)
    x, y = sample_moon_centers(points.dim, r, pair_samples, rng)
    counts = moon_counts(points, r, x, y, grid)
    return MoonReport(int(counts.min()), int(counts.max()))
