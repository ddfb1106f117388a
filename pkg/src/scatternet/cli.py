"""Command line interface.

Exit codes: 0 success, 1 invalid configuration, 2 I/O failure.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import asdict

from . import _rng
from .errors import ScatternetError
from .experiment import (CSV_COLUMNS, ExperimentConfig, PRESETS, estimate_c_star, jsonable, model_params, run_unit,
                         sweep, theoretical_thresholds)
from .irrigation import assign_preferences, realize, realize_staged, write_edge_list
from .model import build_visibility, sample_points

EXIT_INVALID = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--n", type=int, nargs="+", help="vertex count(s)")
    p.add_argument("--d", type=int, help="dimension")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gamma", type=float, nargs="+", help="radius multiplier(s)")
    g.add_argument("--r", type=float, nargs="+", help="explicit radius (radii)")
    p.add_argument("--c", type=int, nargs="+", help="choice count(s)")
    p.add_argument("--c-min", type=int)
    p.add_argument("--c-max", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--config", help="JSON config file; its keys override flags")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser():
    common = _common()
    parser = _Parser(prog="scatternet", description="Random Bluetooth graphs on random geometric graphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("generate", parents=[common], help="write points and visibility-graph dumps")
    s = sub.add_parser("sample", parents=[common], help="write the S_n edge list")
    s.add_argument("--staged", action="store_true", help="use the round-based sampler")
    s.add_argument("--L", type=int, help="picks per replacement round")
    a = sub.add_parser("analyze", parents=[common], help="single-instance metrics")
    a.add_argument("--spanning", choices=("exact", "sampled"))
    a.add_argument("--k-sources", type=int)
    a.add_argument("--exact-cutoff", type=int)
    dg = sub.add_parser("diagnose", parents=[common], help="density/coloring/property/moon reports")
    dg.add_argument("--moon-pairs", type=int)
    sw = sub.add_parser("sweep", parents=[common], help="grid of trials to CSV + JSON")
    sw.add_argument("--cstar", action="store_true")
    sw.add_argument("--diameter", action="store_true")
    sw.add_argument("--spanning", choices=("exact", "sampled"))
    sw.add_argument("--diagnostics", action="store_true")
    sub.add_parser("cstar", parents=[common], help="per-trial minimal connecting c")
    sub.add_parser("formulas", parents=[common], help="theoretical thresholds")
    return parser


_FLAG_KEYS = ("n", "d", "gamma", "r", "c", "eps", "seed", "trials", "workers", "L", "k_sources",
              "exact_cutoff", "moon_pairs", "spanning")


def resolve_config(args, **extra):
    """Preset, then command-line flags, then the ``--config`` file (highest precedence)."""
    data = dict(PRESETS[args.preset]) if args.preset else {}
    for key in _FLAG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            data[key] = v
    if args.r is not None:
        data["gamma"] = None
    if args.c_min is not None or args.c_max is not None:
        lo = args.c_min if args.c_min is not None else 1
        hi = args.c_max if args.c_max is not None else lo
        data["c"] = list(range(lo, hi + 1))
    for flag in ("cstar", "diameter", "diagnostics"):
        if getattr(args, flag, False):
            data[flag] = True
    data.update(extra)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ScatternetError("config file must hold a JSON object")
        if "r" in loaded and loaded["r"] is not None:
            data["gamma"] = None
        data.update(loaded)
    return ExperimentConfig.from_dict(data)


def _emit(obj, fmt, out=None, name=None):
    text = json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n" if fmt == "json" else obj
    if out:
        os.makedirs(out, exist_ok=True)
        with open(os.path.join(out, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _instance(config):
    n, (kind, value) = config.n[0], config.radii()[0]
    point_seed, pref_seed = _rng.trial_seeds(config.seed, 0)
    params = model_params(n, config.d, kind, value)
    points = sample_points(n, config.d, point_seed)
    return params, points, build_visibility(points, params.r), point_seed, pref_seed


def _meta(config, params, point_seed, pref_seed, **more):
    meta = {"n": params.n, "d": params.d, "gamma": params.gamma, "r": params.r, "master_seed": config.seed,
            "point_seed": point_seed, "pref_seed": pref_seed, "generator_version": _rng.GENERATOR_VERSION}
    meta.update(more)
    return meta


def cmd_generate(args, config):
    params, points, G, ps, qs = _instance(config)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    points.to_csv(os.path.join(out, "points.csv"))
    with open(os.path.join(out, "visibility.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("# " + json.dumps(_meta(config, params, ps, qs, graph="visibility"), sort_keys=True) + "\n")
        fh.write("u,v\n")
        for u, v in G.edges().tolist():
            fh.write(f"{u},{v}\n")


def cmd_sample(args, config):
    params, points, G, ps, qs = _instance(config)
    c = config.c[0]
    if args.staged:
        S = realize_staged(G, c, config.eps, config.L, qs)
    else:
        S = realize(G, assign_preferences(G, qs, depth=c), c)
    meta = _meta(config, params, ps, qs, eps=config.eps, L=config.L if args.staged else None)
    path = os.path.join(args.out, "edges.csv") if args.out else None
    if path:
        os.makedirs(args.out, exist_ok=True)
        write_edge_list(S, path, meta)
    else:
        sys.stdout.write("# " + json.dumps(dict({"n": S.n, "c": S.c, "sampler": S.mode}, **meta), sort_keys=True) + "\n")
        sys.stdout.write("u,v\n")
        sys.stdout.writelines(f"{u},{v}\n" for u, v in S.edges.tolist())


def _single(config):
    n, (kind, value) = config.n[0], config.radii()[0]
    return run_unit(config, n, kind, value, 0, (config.c[0],))[0]


def cmd_analyze(args, config):
    res = _single(config)
    if args.format == "json":
        _emit(res.to_json(), "json", args.out, "analysis.json")
    else:
        _emit(_csv_text(CSV_COLUMNS, [res.row()]), "csv", args.out, "analysis.csv")
    return res


def cmd_diagnose(args, config):
    res = _single(config)
    if res.error:
        raise ScatternetError(res.error)
    _emit({"params": {"n": res.n, "d": res.d, "gamma": res.gamma, "r": res.r, "c": res.c},
           "diagnostics": res.diagnostics}, "json", args.out, "diagnostics.json")


def cmd_sweep(args, config):
    table = sweep(config, args.out or "sweep_out")
    logging.getLogger(__name__).info("wrote %d rows", len(table.results))


def cmd_cstar(args, config):
    result = estimate_c_star(config)
    if args.format == "json":
        _emit(dict(result, config=config.echo(), generator_version=_rng.GENERATOR_VERSION),
              "json", args.out, "cstar.json")
    else:
        rows = [[p["n"], repr(p["gamma"]), repr(p["r"]), p["trial"], p["c_star"]] for p in result["per_trial"]]
        _emit(_csv_text(["n", "gamma", "r", "trial", "c_star"], rows), "csv", args.out, "cstar.csv")


def cmd_formulas(args, config):
    rows = []
    for n in config.n:
        for kind, value in config.radii():
            f = theoretical_thresholds(n, config.d, eps=config.eps, **{kind: value})
            rows.append(asdict(f))
    if args.format == "json":
        _emit(rows, "json", args.out, "formulas.json")
    else:
        header = list(rows[0])
        _emit(_csv_text(header, [[repr(v) if isinstance(v, float) else v for v in r.values()] for r in rows]),
              "csv", args.out, "formulas.csv")


COMMANDS = {"generate": cmd_generate, "sample": cmd_sample, "analyze": cmd_analyze, "diagnose": cmd_diagnose,
            "sweep": cmd_sweep, "cstar": cmd_cstar, "formulas": cmd_formulas}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        extra = {}
        if args.command == "analyze":
            extra = {"diameter": True}
        elif args.command == "diagnose":
            extra = {"diagnostics": True}
        config = resolve_config(args, **extra)
        COMMANDS[args.command](args, config)
    except (ScatternetError, ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"scatternet: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"scatternet: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
