"""Command-line entry point.

Every subcommand validates ``(p, q)`` first.  With ``--out-dir`` (or the
``HYPERGIBBS_OUT_DIR`` environment variable) outputs are written there
together with ``manifest.json`` listing a sha256 digest per file.

Exit codes: 0 success, 1 invalid input, 2 internal consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import HyperGibbsError
from .gibbs import (DEFAULT_BETA, SimulationConfig, interface_rigidity_probe,
                    radius_consistency, sample)
from .interfaces import (build_interface, corona, count_interface_prefixes,
                         dobrushin_on_ball, parse_selector)
from .isoperimetry import brute_force_ic, region_scan, sparsity_check
from .lattice import (depth_for_radius, dual, fit_recurrence, generate, layer_counts,
                      predict_recurrence, validate_params)
from .spin import SpinConfiguration, broken_bonds, excess_energy_sweep
from .svg import render_svg

OUT_DIR_ENV = "HYPERGIBBS_OUT_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ------------------------------------------------------------- outputs

def _csv_text(rows: list[dict], fields=None) -> str:
    buf = io.StringIO()
    if fields is None:
        fields = list(rows[0]) if rows else []
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return v


def _clean(o):
    # strict JSON has no NaN / inf
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def _json_text(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default,
                      allow_nan=False) + "\n"


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


class Run:
    """Collects output files and writes them plus the manifest."""

    def __init__(self, args, command: str):
        self.args = args
        self.command = command
        self.files: dict[str, str] = {}
        out = args.out_dir or os.environ.get(OUT_DIR_ENV)
        self.out_dir = Path(out) if out else None

    def add(self, name: str, text: str):
        self.files[name] = text

    def finish(self, summary, human: str):
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            digests = {}
            for name, text in sorted(self.files.items()):
                data = text.encode("utf-8")
                (self.out_dir / name).write_bytes(data)
                digests[name] = hashlib.sha256(data).hexdigest()
            params = {k: v for k, v in sorted(vars(self.args).items())
                      if k not in ("func", "out_dir", "json", "params")}
            manifest = {
                "command": self.command,
                "parameters": params,
                "seed": params.get("seed"),
                "version": __version__,
                "outputs": digests,
            }
            (self.out_dir / "manifest.json").write_text(_json_text(manifest), encoding="utf-8")
        if self.args.json:
            sys.stdout.write(_json_text(summary))
        else:
            sys.stdout.write(human.rstrip("\n") + "\n")
            if self.out_dir is not None:
                sys.stdout.write(f"wrote {len(self.files)} file(s) to {self.out_dir}\n")


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# ------------------------------------------------------------ commands

def cmd_gen(args):
    lat = generate(args.params, args.layers)
    run = Run(args, "gen")
    run.add("lattice.json", lat.to_json() + "\n")
    if args.svg:
        run.add("lattice.svg", render_svg(lat, args.svg_layers))
    S, B = layer_counts(lat)
    summary = {"p": lat.p, "q": lat.q, "n_layers": lat.n_layers, "n_vertices": lat.n_vertices,
               "n_edges": int(len(lat.edges())), "n_faces": lat.n_faces, "S": S, "B": B}
    if run.out_dir is None and args.svg and not args.json:
        sys.stdout.write(run.files["lattice.svg"])
        return
    run.finish(summary, f"{{{lat.p},{lat.q}}} depth {lat.n_layers}: {lat.n_vertices} vertices, "
                        f"{summary['n_edges']} edges, {lat.n_faces} faces")


def cmd_counts(args):
    lat = generate(args.params, args.layers)
    S, B = layer_counts(lat)
    rows = [{"n": n, "S": s, "B": b} for n, (s, b) in enumerate(zip(S, B))]
    summary = {"p": lat.p, "q": lat.q, "S": S, "B": B}
    seq = S[1:]
    if len(seq) >= 6:
        coeffs = fit_recurrence(seq[:4], 2)
        pred = predict_recurrence(seq[:4], coeffs, len(seq) - 4)
        summary["recurrence"] = [str(c) for c in coeffs]
        summary["predicted"] = [str(x) for x in pred]
        summary["prediction_exact"] = [int(x) if x.denominator == 1 else None for x in pred] == seq[4:]
    run = Run(args, "counts")
    run.add("counts.csv", _csv_text(rows))
    run.add("counts.json", _json_text(summary))
    human = _csv_text(rows)
    if "recurrence" in summary:
        human += f"S(n+1) = {summary['recurrence'][0]} S(n) + {summary['recurrence'][1]} S(n-1); " \
                 f"predicts n=5.. exactly: {summary['prediction_exact']}"
    run.finish(summary, human)


def cmd_ic(args):
    rep = sparsity_check(args.p, args.q, args.delta_max)
    out = rep.to_dict()
    if args.brute_max_size:
        lat = generate(args.params, args.brute_layers)
        ratio, witness = brute_force_ic(lat, args.brute_max_size)
        out["brute_force"] = {"max_size": args.brute_max_size, "ratio": ratio,
                              "witness": sorted(witness),
                              "above_formula": ratio >= rep.ic - 1e-9}
    run = Run(args, "ic")
    run.add("ic.json", _json_text(out))
    run.finish(out, _json_text(out))


def cmd_region_scan(args):
    rows = region_scan(args.p_max, args.q_max, args.p_min, args.q_min)
    text = _csv_text(rows, ["p", "q", "ic", "in_region"])
    run = Run(args, "region-scan")
    run.add("region.csv", text)
    run.finish(rows, text)


def cmd_energy(args):
    depth = depth_for_radius(args.params, args.radius)
    lat = generate(args.params, depth)
    trials = excess_energy_sweep(lat, args.radius, args.trials, args.seed, args.max_contour)
    rows = [t.row() for t in trials]
    text = _csv_text(rows, list(rows[0]) if rows else None)
    run = Run(args, "energy")
    run.add("energy.csv", text)
    summary = {"trials": len(rows), "identity_holds": True,
               "bound_satisfied": all(r["bound_satisfied"] for r in rows)}
    run.finish(summary, text)


def _interface_setup(params, depth, selector):
    lat = generate(params, depth)
    cor = corona(dual(lat), depth)
    iface = build_interface(cor, selector[0], selector[1], selector[2], selector[3], depth)
    return lat, cor, iface


def cmd_interface(args):
    sel = (args.tree_a, args.branch_a, args.tree_b, args.branch_b)
    lat, cor, iface = _interface_setup(args.params, args.depth, sel)
    crossed = sorted(iface.crossed_primal_edges)
    out = {"depth": args.depth, "dual_path": list(iface.dual_path), "crossed_edges": crossed,
           "n_prefixes": count_interface_prefixes(cor, args.depth)}
    touched: dict[int, int] = {}
    for e in crossed:
        for v in e:
            touched[v] = touched.get(v, 0) + 1
    out["delta_broken"] = max(touched.values(), default=0)
    try:
        conf = dobrushin_on_ball(lat, cor, iface, args.window_radius)
        out["separated"] = True
        out["window_radius"] = args.window_radius
        out["window_delta_broken"] = broken_bonds(lat, conf).delta_broken
    except HyperGibbsError as e:
        out["separated"] = False
        out["reason"] = str(e)
    run = Run(args, "interface")
    run.add("interface.json", _json_text(out))
    run.add("interface.svg", render_svg(lat, min(args.depth, 4), crossed_edges=crossed,
                                        dual_path=iface.dual_path))
    run.finish(out, f"{len(crossed)} crossed edges, delta_broken {out['delta_broken']}, "
                    f"separated: {out['separated']}")


def _boundary(args, radius):
    """Boundary string -> (lattice, SpinConfiguration or str, interface info)."""
    b = args.boundary
    if b in ("plus", "minus"):
        depth = depth_for_radius(args.params, radius)
        return generate(args.params, depth), b, None
    if b.startswith("dobrushin:"):
        sel = parse_selector(b[len("dobrushin:"):])
        depth = max(len(sel[1]), len(sel[3])) + 1
        lat, cor, iface = _interface_setup(args.params, depth, sel)
        return lat, dobrushin_on_ball(lat, cor, iface, radius), iface
    if b.startswith("file:"):
        data = json.loads(Path(b[len("file:"):]).read_text())
        depth = depth_for_radius(args.params, radius)
        lat = generate(args.params, depth)
        vals = {int(k): int(v) for k, v in data["values"].items()}
        region = frozenset(int(v) for v in data["region"])
        return lat, SpinConfiguration(region, vals), None
    raise ValueError(f"unknown boundary {b!r}; use plus, minus, dobrushin:<selector> or file:<path>")


def cmd_simulate(args):
    lat, bd, iface = _boundary(args, args.radius)
    region = bd.region if isinstance(bd, SpinConfiguration) else None
    cfg = SimulationConfig(beta=args.beta, radius=args.radius, sweeps=args.sweeps,
                           burn_in=args.burn_in, seed=args.seed, boundary=bd,
                           chains=args.chains, batches=args.batches, region=region)
    obs = sample(lat, cfg)
    run = Run(args, "simulate")
    run.add("observables.csv", _csv_text(obs.rows(), ["vertex", "layer", "mean", "se"]))
    summary = {"origin_mean": obs.origin_mean, "origin_se": obs.origin_se,
               "flip_rate": obs.flip_rate, "n_sites": len(obs.vertices),
               "mean_energy": float(obs.energy[:, args.burn_in:].mean())}
    if iface is not None:
        rep = interface_rigidity_probe(lat, bd, iface.crossed_primal_edges, args.beta,
                                       args.sweeps, args.seed, args.burn_in, args.chains)
        run.add("profile.csv", _csv_text(rep.profile, ["distance", "side", "mean", "n"]))
    if args.svg:
        top = int(lat.layer[obs.vertices].max())
        run.add("heatmap.svg", render_svg(lat, top, values=obs.as_dict(),
                                          only=obs.vertices.tolist(),
                                          crossed_edges=iface.crossed_primal_edges if iface else ()))
    run.finish(summary, f"origin magnetization {obs.origin_mean:.4f} +- {obs.origin_se:.4f} "
                        f"over {len(obs.vertices)} sites")


def cmd_probe(args):
    args.boundary = "dobrushin:" + args.selector
    lat, omega, iface = _boundary(args, args.radius)
    rep = interface_rigidity_probe(lat, omega, iface.crossed_primal_edges, args.beta,
                                   args.sweeps, args.seed, args.burn_in, args.chains)
    n_samples = (args.sweeps - (args.burn_in if args.burn_in is not None else args.sweeps // 10)) * args.chains
    out = {"n_probed": int(len(rep.vertices)), "min_agreement": rep.min_agreement,
           "mean_agreement": rep.mean_agreement, "samples_per_vertex": n_samples,
           "profile": rep.profile}
    run = Run(args, "probe-rigidity")
    run.add("rigidity.json", _json_text(out))
    run.add("profile.csv", _csv_text(rep.profile, ["distance", "side", "mean", "n"]))
    run.finish(out, f"{out['n_probed']} vertices at distance >= 2: agreement min "
                    f"{rep.min_agreement:.4f}, mean {rep.mean_agreement:.4f}")


def cmd_radius(args):
    rmax = max(args.radii)
    if args.boundary.startswith("dobrushin:"):
        sel = parse_selector(args.boundary[len("dobrushin:"):])
        depth = max(len(sel[1]), len(sel[3])) + 1
        lat, cor, iface = _interface_setup(args.params, depth, sel)
        bd = lambda r: dobrushin_on_ball(lat, cor, iface, r)  # noqa: E731
    elif args.boundary in ("plus", "minus"):
        lat = generate(args.params, depth_for_radius(args.params, rmax))
        bd = args.boundary
    else:
        raise ValueError("radius-consistency takes plus, minus or dobrushin:<selector>")
    rep = radius_consistency(lat, bd, args.beta, args.r_small, args.radii, args.sweeps,
                             args.seed, args.burn_in, args.chains)
    rows = [{"r1": a, "r2": b, "max_abs_diff": d} for (a, b), d in sorted(rep.discrepancy.items())]
    out = {"radii": list(rep.radii), "max_discrepancy": rep.max_discrepancy, "pairs": rows}
    run = Run(args, "radius-consistency")
    run.add("radius_consistency.csv", _csv_text(rows, ["r1", "r2", "max_abs_diff"]))
    run.finish(out, _csv_text(rows, ["r1", "r2", "max_abs_diff"]))


# -------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--p", type=int, required=True, help="face size")
    common.add_argument("--q", type=int, required=True, help="vertex degree")
    common.add_argument("--out-dir", default=None,
                        help=f"output directory (default: ${OUT_DIR_ENV})")
    common.add_argument("--json", action="store_true", help="machine-readable stdout")

    plain = _Parser(add_help=False)
    plain.add_argument("--out-dir", default=None,
                       help=f"output directory (default: ${OUT_DIR_ENV})")
    plain.add_argument("--json", action="store_true", help="machine-readable stdout")

    sim = _Parser(add_help=False)
    sim.add_argument("--beta", type=float, default=DEFAULT_BETA, help="inverse temperature")
    sim.add_argument("--sweeps", type=int, default=2000, help="sweeps per chain")
    sim.add_argument("--burn-in", type=int, default=200, help="discarded initial sweeps")
    sim.add_argument("--seed", type=int, default=0, help="base RNG seed")
    sim.add_argument("--chains", type=int, default=1, help="independent chains")

    ap = _Parser(prog="hypergibbs", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("gen", parents=[common], help="generate a truncation")
    s.add_argument("--layers", type=int, required=True, help="number of face rings")
    s.add_argument("--svg", action="store_true", help="also write lattice.svg")
    s.add_argument("--svg-layers", type=int, default=None, help="layers drawn in the SVG")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("counts", parents=[common], help="layer counts and recurrence")
    s.add_argument("--layers", type=int, required=True, help="number of face rings")
    s.set_defaults(func=cmd_counts)

    s = sub.add_parser("ic", parents=[common], help="isoperimetric constant and sparsity")
    s.add_argument("--delta-max", type=int, default=1, help="broken bonds allowed per vertex")
    s.add_argument("--brute-max-size", type=int, default=0,
                   help="also run the brute-force search up to this set size (0 skips it)")
    s.add_argument("--brute-layers", type=int, default=8, help="truncation depth for the search")
    s.set_defaults(func=cmd_ic)

    s = sub.add_parser("region-scan", parents=[plain], help="validity region grid")
    s.add_argument("--p-max", type=int, required=True, help="largest face size")
    s.add_argument("--q-max", type=int, required=True, help="largest vertex degree")
    s.add_argument("--p-min", type=int, default=3, help="smallest face size")
    s.add_argument("--q-min", type=int, default=3, help="smallest vertex degree")
    s.set_defaults(func=cmd_region_scan)

    s = sub.add_parser("energy", parents=[common], help="excess-energy sweep")
    s.add_argument("--radius", type=int, default=4, help="sweep region ball(radius)")
    s.add_argument("--trials", type=int, default=200, help="random (sigma0, contour) pairs")
    s.add_argument("--seed", type=int, default=0, help="RNG seed")
    s.add_argument("--max-contour", type=int, default=8, help="largest contour size")
    s.set_defaults(func=cmd_energy)

    s = sub.add_parser("interface", parents=[common], help="build a dual interface")
    s.add_argument("--depth", type=int, required=True,
                   help="dual vertices per side, origin included")
    s.add_argument("--tree-a", type=int, required=True, help="first tree index")
    s.add_argument("--branch-a", type=_int_list, default=(), help="child choices, e.g. 0,1,0")
    s.add_argument("--tree-b", type=int, required=True, help="second, non-neighbouring tree")
    s.add_argument("--branch-b", type=_int_list, default=(), help="child choices, e.g. 1,1,0")
    s.add_argument("--window-radius", type=int, default=2, help="Dobrushin region ball(r)")
    s.set_defaults(func=cmd_interface)

    s = sub.add_parser("simulate", parents=[common, sim], help="heat-bath sampling")
    s.add_argument("--radius", type=int, default=2, help="window ball(radius)")
    s.add_argument("--boundary", default="plus",
                   help="plus | minus | dobrushin:TA:B,B,..:TB:B,B,.. | file:PATH")
    s.add_argument("--batches", type=int, default=16, help="batch-means batches (>= 16)")
    s.add_argument("--svg", action="store_true", help="also write heatmap.svg")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("probe-rigidity", parents=[common, sim], help="interface rigidity")
    s.add_argument("--radius", type=int, default=4, help="window ball(radius)")
    s.add_argument("--selector", required=True, help="TA:B,B,..:TB:B,B,..")
    s.set_defaults(func=cmd_probe)

    s = sub.add_parser("radius-consistency", parents=[common, sim], help="weak-limit probe")
    s.add_argument("--r-small", type=int, default=1, help="compare means on ball(r_small)")
    s.add_argument("--radii", type=_int_list, default=(3, 4, 5), help="window radii, e.g. 3,4,5")
    s.add_argument("--boundary", default="plus",
                   help="plus | minus | dobrushin:TA:B,B,..:TB:B,B,..")
    s.set_defaults(func=cmd_radius)
    return ap


def dispatch(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        if hasattr(args, "p"):
            args.params = validate_params(args.p, args.q)
        args.func(args)
        return 0
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except AssertionError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 2
    except (HyperGibbsError, ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
