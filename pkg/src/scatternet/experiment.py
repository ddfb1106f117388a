"""Threshold formulas, Monte Carlo trials, per-trial threshold search and parameter sweeps.

A trial is identified by ``(master_seed, trial_index)``; its point seed and
preference seed come from ``SeedSequence([master_seed, trial_index])``. All c
values of a sweep share the trial's preference table, so connectivity is
monotone in c row by row.
"""

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.stats import binomtest

from . import _rng
from .analysis import components, find_isolated_cliques, hop_diameter, spanning_ratio
from .errors import InvalidParameters, NTooSmall
from .irrigation import assign_preferences, realize, realize_staged
from .model import CellGrid, ModelParams, build_visibility, radius_for, sample_points
from .percolation import color_cells, density_report, moon_bounds, moon_report, property_report

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
INFINITY = "infinity"


@dataclass(frozen=True)
class ThresholdFormulas:
    n: int
    d: int
    r: float
    eps: float
    c_upper: float
    c_lower: float
    lam: float
    c_lower_general: int


def c_upper(n, eps):
    return math.sqrt((2 + eps) * math.log(n) / math.log(math.log(n)))


def c_lower(n, eps):
    return math.sqrt((2 - eps) * math.log(n) / math.log(math.log(n)))


def reference_threshold(n):
    """``sqrt(2 ln n / ln ln n)``."""
    return math.sqrt(2 * math.log(n) / math.log(math.log(n)))


def diameter_c(n, mu=2.0):
    """Choice count ``ceil(mu sqrt(ln n))`` for the diameter regime."""
    return math.ceil(mu * math.sqrt(math.log(n)))


def c_lower_general(n, r, d, eps):
    """General lower bound ``floor(sqrt((1-eps) lam/(lam-1/2) ln n / ln(n r^d)))``.

    Returns ``(c, lam)`` with ``lam = ln(n r^d) / ln ln n``; ``c`` is None
    outside the admissible range (``lam <= 1/2`` or ``eps`` not in (0, 1)).
    """
    lln = math.log(math.log(n))
    lnr = math.log(n * r**d)
    lam = lnr / lln
    if not 0 < eps < 1 or lam <= 0.5 or lnr <= 0:
        return None, lam
    factor = 1.0 if math.isinf(lam) else lam / (lam - 0.5)
    return math.floor(math.sqrt((1 - eps) * factor * math.log(n) / lnr)), lam


def theoretical_thresholds(n, d, gamma=None, r=None, eps=0.1):
    if n < 3 or not math.log(math.log(n)) > 0:
        raise NTooSmall(f"ln ln n must be positive, got n = {n}")
    if (gamma is None) == (r is None):
        raise InvalidParameters("exactly one of gamma and r must be supplied")
    if not 0 < eps < 2:
        raise InvalidParameters(f"eps must lie in (0, 2), got {eps}")
    if r is None:
        r = radius_for(n, d, gamma)
    general, lam = c_lower_general(n, r, d, eps)
    return ThresholdFormulas(n, d, r, eps, c_upper(n, eps), c_lower(n, eps), lam, general)


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep configuration; ``gamma`` and ``r`` are mutually exclusive grids."""

    n: tuple = (1000,)
    d: int = 2
    gamma: tuple = (4.0,)
    r: tuple = None
    c: tuple = (1, 2, 3, 4, 5)
    eps: float = 0.1
    seed: int = 0
    trials: int = 1
    workers: int = 1
    cstar: bool = False
    diameter: bool = False
    exact_cutoff: int = 3000
    spanning: str = None
    k_sources: int = 8
    diagnostics: bool = False
    moon_pairs: int = 1000
    sampler: str = "prefix"
    L: int = 4
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        for name in ("n", "gamma", "r", "c"):
            v = getattr(self, name)
            if v is not None and not isinstance(v, tuple):
                object.__setattr__(self, name, tuple(v) if isinstance(v, (list, tuple)) else (v,))
        if (self.gamma is None) == (self.r is None):
            raise InvalidParameters("exactly one of gamma and r grids must be given")
        if not self.n or not self.c or not (self.gamma or self.r):
            raise InvalidParameters("grids must be nonempty")
        if self.trials < 1:
            raise InvalidParameters("trials must be >= 1")
        if min(self.c) < 1:
            raise InvalidParameters("c values must be >= 1")
        if self.sampler not in ("prefix", "staged"):
            raise InvalidParameters(f"unknown sampler {self.sampler!r}")
        if self.spanning not in (None, "exact", "sampled"):
            raise InvalidParameters(f"unknown spanning mode {self.spanning!r}")
        if self.schema_version != SCHEMA_VERSION:
            raise InvalidParameters(f"unsupported config schema_version {self.schema_version}")

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidParameters(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "r" in data and data["r"] is not None and "gamma" not in data:
            data["gamma"] = None
        return cls(**data)

    def to_dict(self):
        out = asdict(self)
        for k in ("n", "gamma", "r", "c"):
            if out[k] is not None:
                out[k] = list(out[k])
        return out

    def echo(self):
        """Config as written to result files: ``workers`` is left out since it cannot change results."""
        out = self.to_dict()
        out.pop("workers")
        return out

    def radii(self):
        """``(kind, value)`` for each point of the radius grid, kind being ``"gamma"`` or ``"r"``."""
        if self.gamma is not None:
            return [("gamma", float(g)) for g in self.gamma]
        return [("r", float(r)) for r in self.r]


@dataclass
class TrialResult:
    trial_index: int
    point_seed: int
    pref_seed: int
    n: int
    d: int
    gamma: float
    r: float
    c: int
    is_connected: bool = None
    n_components: int = None
    smallest_component: int = None
    c_star_trial: object = None
    diameter: object = None
    diameter_upper: int = None
    diameter_mode: str = None
    spanning_ratio: float = None
    isolated_cliques_found: int = None
    diagnostics: dict = None
    error: str = None
    wall_time: float = field(default=0.0, compare=False)

    def row(self):
        """CSV row; timing and embedded diagnostics are left out so rows stay reproducible."""
        return [
            self.n, self.d, _fmt(self.gamma), _fmt(self.r), self.c, self.trial_index,
            self.point_seed, self.pref_seed, _fmt(self.is_connected), _fmt(self.n_components),
            _fmt(self.smallest_component), _fmt(self.c_star_trial), _fmt(self.diameter),
            _fmt(self.diameter_upper), _fmt(self.diameter_mode), _fmt(self.spanning_ratio),
            _fmt(self.isolated_cliques_found), _fmt(self.error),
        ]

    def to_json(self):
        out = asdict(self)
        out.pop("wall_time")
        return jsonable(out)


CSV_COLUMNS = [
    "n", "d", "gamma", "r", "c", "trial", "point_seed", "pref_seed", "is_connected",
    "n_components", "smallest_component", "c_star", "diameter", "diameter_upper",
    "diameter_mode", "spanning_ratio", "isolated_cliques", "error",
]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, float):
        return INFINITY if math.isinf(v) else repr(v)
    return str(v)


def model_params(n, d, kind, value, c=1):
    if kind == "gamma":
        return ModelParams(n=n, d=d, gamma=value, c=c)
    return ModelParams(n=n, d=d, r=value, c=c)


def minimal_connecting_c(G, pref_seed, depth=32, prefs=None):
    """Smallest ``c`` with S(c) connected, or ``inf`` when G itself is disconnected.

    Uses one ranking for every c (connectivity is then monotone in c):
    doubling from c = 1 up to the first connected c, then bisection.
    """
    maxdeg = int(G.degrees.max(initial=0))
    if G.n <= 1:
        return 1
    if maxdeg == 0:
        return math.inf
    table = {"prefs": prefs or assign_preferences(G, pref_seed, depth=min(depth, maxdeg))}
    seen = {}

    def connected(c):
        if c not in seen:
            if not table["prefs"].covers(c):
                table["prefs"] = assign_preferences(G, pref_seed)
            seen[c] = components(realize(G, table["prefs"], c)).is_connected
        return seen[c]

    lo, hi = 0, 1
    while not connected(hi):
        if hi >= maxdeg:
            return math.inf
        lo, hi = hi, min(2 * hi, maxdeg)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if connected(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _diagnostics(S, points, params, G, summary, config, moon_seed):
    grid = G.grid
    dens = density_report(points, grid, params.n)
    grid3 = CellGrid.for_radius(points, params.r, coarse=True)
    coloring = color_cells(S, points, grid3)
    props = property_report(S, coloring, dens, params, summary)
    moons = moon_report(points, params.r, config.moon_pairs, moon_seed, grid)
    lo, hi = moon_bounds(params.n, params.r, params.d)
    return {
        "density": {"alpha": dens.alpha, "beta": dens.beta, "lower": dens.lower, "upper": dens.upper,
                    "violations": len(dens.violations), "all_ok": dens.all_ok,
                    "min_count": dens.min_count, "max_count": dens.max_count},
        "coloring": {"cell_side": coloring.cell_side, "black": int(coloring.black.sum()),
                     "white": props.observed["white_cells"], "empty": props.observed["empty_cells"],
                     "max_white_star_component": coloring.max_white_component,
                     "all_faces_linked": coloring.all_faces_linked},
        "properties": {"prop_i": props.prop_i, "prop_ii": props.prop_ii, "prop_iii": props.prop_iii,
                       "prop_iv": props.prop_iv, "q": props.q, "s": props.s,
                       "lambda_occ": props.lambda_occ, "observed": props.observed,
                       "side_conditions": props.side_conditions},
        "moons": {"min_count": moons.min_count, "max_count": moons.max_count,
                  "lower_bound": lo, "upper_bound": hi},
    }


def run_unit(config, n, kind, value, trial_index, c_values=None):
    """Run one ``(n, radius, trial)`` cell of the grid for every requested c."""
    c_values = tuple(c_values or config.c)
    point_seed, pref_seed = _rng.trial_seeds(config.seed, trial_index)
    results = []
    t0 = time.perf_counter()
    try:
        params = model_params(n, config.d, kind, value)
        base = dict(trial_index=trial_index, point_seed=point_seed, pref_seed=pref_seed,
                    n=n, d=config.d, gamma=params.gamma, r=params.r)
        points = sample_points(n, config.d, point_seed)
        G = build_visibility(points, params.r)
        prefs = assign_preferences(G, pref_seed, depth=max(max(c_values), 32 if config.cstar else 1))
        c_star = minimal_connecting_c(G, pref_seed, prefs=prefs) if config.cstar else None
    except Exception as exc:  # recorded in the rows, not raised
        log.warning("trial %d (n=%d, %s=%r) failed: %s", trial_index, n, kind, value, exc)
        return [TrialResult(trial_index, point_seed, pref_seed, n, config.d,
                            value if kind == "gamma" else None, value if kind == "r" else None, c,
                            error=f"{type(exc).__name__}: {exc}") for c in c_values]
    for c in c_values:
        t1 = time.perf_counter()
        res = TrialResult(c=c, **base)
        try:
            if config.sampler == "staged":
                S = realize_staged(G, c, config.eps, config.L, pref_seed)
            else:
                S = realize(G, prefs, c)
            summary = components(S)
            res.is_connected = summary.is_connected
            res.n_components = summary.count
            res.smallest_component = summary.smallest
            res.c_star_trial = c_star
            res.isolated_cliques_found = len(find_isolated_cliques(S, c + 1, summary)) if c + 1 <= n else 0
            if config.diameter:
                hd = hop_diameter(S, config.exact_cutoff)
                res.diameter, res.diameter_upper, res.diameter_mode = hd.value, hd.upper, hd.mode
            if config.spanning and summary.is_connected:
                res.spanning_ratio = spanning_ratio(S, points, params.r, config.spanning,
                                                    config.k_sources, seed=pref_seed)
            if config.diagnostics:
                res.diagnostics = _diagnostics(S, points, params, G, summary, config, pref_seed)
        except Exception as exc:
            log.warning("trial %d c=%d failed: %s", trial_index, c, exc)
            res.error = f"{type(exc).__name__}: {exc}"
        res.wall_time = time.perf_counter() - t1 + (t1 - t0) / len(c_values)
        results.append(res)
    return results


def run_trial(config, trial_index):
    """Single trial at the first grid point (``n[0]``, first radius, ``c[0]``)."""
    kind, value = config.radii()[0]
    return run_unit(config, config.n[0], kind, value, trial_index, (config.c[0],))[0]


def _units(config):
    return [(n, kind, value, t) for n in config.n for kind, value in config.radii()
            for t in range(config.trials)]


def _run_unit_args(args):
    config, n, kind, value, t = args
    return run_unit(config, n, kind, value, t)


def _execute(config, fn, units):
    jobs = [(config,) + u for u in units]
    if config.workers <= 1 or len(jobs) == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(fn, jobs))


def wilson_interval(successes, trials, confidence=0.95):
    ci = binomtest(successes, trials).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


def aggregate(rows):
    """Pr[connected] with Wilson 95% interval per ``(n, gamma, c)``, from CSV-style row dicts."""
    groups = {}
    for row in rows:
        key = (int(row["n"]), float(row["gamma"]) if row["gamma"] else None, int(row["c"]))
        g = groups.setdefault(key, [0, 0])
        if row["is_connected"] in ("0", "1"):
            g[0] += 1
            g[1] += row["is_connected"] == "1"
    out = []
    for (n, gamma, c), (trials, ok) in sorted(groups.items(), key=lambda kv: (kv[0][0], -1.0 if kv[0][1] is None else kv[0][1], kv[0][2])):
        lo, hi = wilson_interval(ok, trials) if trials else (None, None)
        out.append({"n": n, "gamma": gamma, "c": c, "trials": trials, "connected": ok,
                    "p_connected": ok / trials if trials else None, "wilson_low": lo, "wilson_high": hi})
    return out


def cstar_summary(values, n):
    """Median, quartiles and the ratio to ``sqrt(2 ln n / ln ln n)`` of per-trial c*."""
    arr = np.array([math.inf if v in (math.inf, INFINITY) else float(v) for v in values])
    q1, med, q3 = (float(x) for x in np.percentile(arr, [25, 50, 75], method="lower"))
    return jsonable({"trials": len(arr), "median": med, "q1": q1, "q3": q3,
                     "infinite": int(np.isinf(arr).sum()), "reference": reference_threshold(n),
                     "ratio": med / reference_threshold(n)})


def jsonable(obj):
    """Replace infinite floats by ``"infinity"`` and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return INFINITY
    return obj


@dataclass
class SweepTable:
    config: ExperimentConfig
    results: list
    aggregates: list

    def rows(self):
        """Rows as the CSV reader would return them (all values strings)."""
        return [dict(zip(CSV_COLUMNS, map(str, r.row()))) for r in self.results]

    def csv_text(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.results:
            w.writerow(r.row())
        return buf.getvalue()


def _row_key(res):
    return (res.n, res.gamma if res.gamma is not None else -1.0, res.r if res.r is not None else -1.0,
            res.c, res.trial_index)


def _check_writable(out_dir, names):
    os.makedirs(out_dir, exist_ok=True)
    for name in names:
        with open(os.path.join(out_dir, name), "a", encoding="utf-8"):
            pass


def sweep(config, out_dir=None, rows_name="rows.csv", summary_name="summary.json"):
    """Run the full grid; write ``rows.csv`` and ``summary.json`` when ``out_dir`` is given.

    The output directory is checked before any trial runs (``OSError`` on failure).
    """
    if out_dir is not None:
        _check_writable(out_dir, (rows_name, summary_name))
    batches = _execute(config, _run_unit_args, _units(config))
    results = sorted((r for b in batches for r in b), key=_row_key)
    table = SweepTable(config, results, [])
    table.aggregates = aggregate(table.rows())
    if out_dir is not None:
        text = table.csv_text()
        with open(os.path.join(out_dir, rows_name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        summary = {"config": config.echo(), "generator_version": _rng.GENERATOR_VERSION,
                   "rows_file": rows_name, "aggregates": table.aggregates}
        if config.cstar:
            summary["c_star"] = _cstar_blocks(results)
        with open(os.path.join(out_dir, summary_name), "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return table


def _cstar_blocks(results):
    per = {}
    for r in results:
        if r.c_star_trial is not None:
            per.setdefault((r.n, r.gamma), {})[r.trial_index] = r.c_star_trial
    return [dict(n=n, gamma=g, **cstar_summary(list(v.values()), n)) for (n, g), v in sorted(per.items())]


def _cstar_unit(args):
    config, n, kind, value, t = args
    point_seed, pref_seed = _rng.trial_seeds(config.seed, t)
    params = model_params(n, config.d, kind, value)
    G = build_visibility(sample_points(n, config.d, point_seed), params.r)
    return {"n": n, "gamma": params.gamma, "r": params.r, "trial": t,
            "c_star": jsonable(minimal_connecting_c(G, pref_seed))}


def estimate_c_star(config):
    """Per-trial c* for every ``(n, radius)`` grid point plus summary statistics."""
    per_trial = _execute(config, _cstar_unit, _units(config))
    per_trial.sort(key=lambda x: (x["n"], x["gamma"], x["trial"]))
    summaries = []
    for key in sorted({(p["n"], p["gamma"]) for p in per_trial}):
        vals = [p["c_star"] for p in per_trial if (p["n"], p["gamma"]) == key]
        summaries.append(dict(n=key[0], gamma=key[1], **cstar_summary(vals, key[0])))
    return {"per_trial": per_trial, "summary": summaries}


PRESETS = {
    "coupling": dict(n=[2000], gamma=[4.0], c=list(range(1, 11)), trials=100),
    "phase_transition": dict(n=[100000], gamma=[4.0], c=list(range(1, 11)), trials=30, cstar=True),
    "scaling": dict(n=[10000, 100000, 400000], gamma=[4.0], c=[1], trials=11, cstar=True),
    "diameter": dict(n=[100000], gamma=[6.0], c=[diameter_c(100000)], trials=30, diameter=True, spanning="sampled"),
    "percolation": dict(n=[100000], gamma=[6.0], c=[12], trials=50, diagnostics=True, moon_pairs=10000),
    "smoke": dict(n=[500], gamma=[4.0], c=[1, 2, 3, 4], trials=3, cstar=True, diameter=True),
}


def preset(name, **overrides):
    if name not in PRESETS:
        raise InvalidParameters(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    data = dict(PRESETS[name])
    data.update(overrides)
    return ExperimentConfig.from_dict(data)

