"""Batch command-line interface.

Subcommands: field | trace | classify | ensemble | measure |
search-scenario | plot.  All inputs come from scenario JSON files and
flags; outputs are CSV/JSON/SVG files that are byte-identical across
repeated runs with the same scenario, flags and seed.

Exit codes: 0 success, 2 parse/input error, 3 physics invariant
violation, 4 precondition violation, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from . import scenario as sc_mod
from .csvio import read_csv, write_csv, write_json
from .ensembles import equivariance_test, run_measurement, sample_density
from .errors import (ExcessNodeAborts, PhysicsInvariantViolated,
                     PreconditionViolated, ScenarioError, StepLimitExceeded,
                     UnresolvedExcess, WindowTooSmall)
from .flows import STATUS_REACHED_END, flow, nonrel_rhs
from .guidance import integrate_nonrel, integrate_rel
from .search import search_prediction_scenario
from .sigma import (LABEL_NAMES, SIGMA_MINUS, SIGMA_PLUS, mc_first_crossing,
                    l1_distance, predict_density)
from .svgplot import density_figure, worldline_figure

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PHYSICS = 3
EXIT_PRECONDITION = 4
EXIT_NUMERICAL = 5


def _meta(scenario, command, **params):
    meta = {"scenario_digest": scenario.digest if scenario else "-",
            "command": command}
    for k in sorted(params):
        meta[k] = params[k]
    return meta


def _load(path):
    return sc_mod.load(path)


def _outdir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


# -- field ---------------------------------------------------------------


def cmd_field(args):
    sc = _load(args.scenario)
    if sc.kind not in ("rel_field", "window"):
        raise ScenarioError(f"field command needs a rel_field/window scenario, got {sc.kind}")
    field = sc_mod.build_rel_field(sc)
    t = args.t if args.t is not None else float(sc.physics.get("t1", 0.0))
    n = sc.run_param("grid", args.grid)
    xs = (np.arange(n) + 0.5) * (field.box_length / n)
    ts = np.full(n, t)
    psi = field.psi(ts, xs)
    j0, jv = field.current(ts, xs)
    dens = (psi * psi.conj()).real
    R = np.sqrt(dens)
    with np.errstate(all="ignore"):
        box_ratio = field.dalembertian_R_over_R(ts, xs)
    ok = dens > field.node_threshold
    Q = np.where(ok, box_ratio / (2.0 * field.mass), np.nan)
    meff2 = np.where(ok, field.mass**2 + box_ratio, np.nan)
    out = os.path.join(_outdir(args), "field.csv")
    write_csv(out, [("t", ts), ("x", xs),
                    ("re_psi", psi.real), ("im_psi", psi.imag),
                    ("j0", j0), ("jx", jv[:, 0]), ("R", R),
                    ("Q", Q), ("meff2", meff2)],
              _meta(sc, "field", t=t, grid=n))
    return [out]


# -- trace ---------------------------------------------------------------


def _parse_span(text):
    a, _, b = text.partition(":")
    return float(a), float(b)


def cmd_trace(args):
    sc = _load(args.scenario)
    outs = []
    if not args.start:
        print("warning: no start points given", file=sys.stderr)
        return outs
    span = _parse_span(args.span)
    outdir = _outdir(args)
    for i, start in enumerate(args.start):
        vals = [float(v) for v in start.split(",")]
        if sc.kind in ("rel_field", "window"):
            field = sc_mod.build_rel_field(sc)
            t1 = sc.physics.get("t1")
            traj = integrate_rel(field, vals, span,
                                 record_hyperplanes=[float(t1)] if t1 is not None else [])
            cols = _rel_traj_columns(traj)
        elif sc.kind == "nonrel_field":
            field = sc_mod.build_nonrel_field(sc)
            traj = integrate_nonrel(field, vals, span)
            cols = [("s", traj.params), ("t", traj.params),
                    ("x", traj.coords[:, 0]),
                    ("speed_ratio", np.full(len(traj.points), np.nan)),
                    ("event", [""] * len(traj.points))]
        else:
            raise ScenarioError(f"trace does not support scenario kind {sc.kind}")
        out = os.path.join(outdir, f"trajectory_{i:03d}.csv")
        write_csv(out, cols, _meta(sc, "trace", start=start, span=args.span,
                                   termination=traj.termination.value))
        outs.append(out)
    return outs


def _rel_traj_columns(traj):
    rows = [(p.param, p.coords[0], p.coords[1], p.speed_ratio, "")
            for p in traj.points]
    rows += [(e.param, e.coords[0], e.coords[1], np.nan,
              f"{e.kind}{'' if e.direction == 0 else ':%+d' % e.direction}")
             for e in traj.events]
    rows.sort(key=lambda r: r[0])
    return [("s", [r[0] for r in rows]), ("t", [r[1] for r in rows]),
            ("x", [r[2] for r in rows]), ("speed_ratio", [r[3] for r in rows]),
            ("event", [r[4] for r in rows])]


# -- classify ------------------------------------------------------------


def cmd_classify(args):
    sc = _load(args.scenario)
    if sc.kind != "window":
        raise ScenarioError(f"classify needs a window scenario, got {sc.kind}")
    window = sc_mod.build_window(sc)
    n = sc.run_param("grid", args.grid)
    cls = predict_density(window, n)
    outdir = _outdir(args)
    csv_path = os.path.join(outdir, "classification.csv")
    write_csv(csv_path, [("x", cls.grid),
                         ("label", [LABEL_NAMES[c] for c in cls.labels]),
                         ("j0", cls.j0), ("rho", cls.density)],
              _meta(sc, "classify", grid=n))
    summary = {"flux": cls.flux, "cell_counts": cls.counts(),
               "indeterminate_count": int(np.sum(cls.labels == 3)),
               "grid": n, "t0": window.t0, "t1": window.t1,
               "scenario_digest": sc.digest,
               "diagnostics": cls.diagnostics}
    json_path = os.path.join(outdir, "summary.json")
    write_json(json_path, summary)
    return [csv_path, json_path]


# -- ensemble ------------------------------------------------------------


def cmd_ensemble(args):
    sc = _load(args.scenario)
    n = int(sc.run_param("n", args.n))
    seed = int(sc.run_param("seed", args.seed))
    bins = int(sc.run_param("bins", args.bins))
    outdir = _outdir(args)
    if sc.kind == "nonrel_field":
        return _ensemble_nonrel(sc, n, seed, bins, outdir)
    if sc.kind == "window":
        return _ensemble_window(sc, n, seed, bins, outdir,
                                sc.run_param("grid", args.grid))
    raise ScenarioError(f"ensemble does not support scenario kind {sc.kind}")


def _ensemble_nonrel(sc, n, seed, bins, outdir):
    field = sc_mod.build_nonrel_field(sc)
    t0 = float(sc.physics.get("t0", 0.0))
    t1 = float(sc.physics["t1"])
    from .ensembles import exact_bin_masses
    ens = sample_density(field, t0, n, seed)
    res = flow(nonrel_rhs(field), np.atleast_2d(ens.positions).T, t0, p_end=t1)
    ok = res.status == STATUS_REACHED_END
    final = res.y[ok, 0]
    window = field.sampling_window(t1)
    edges = np.linspace(window[0][0], window[0][1], bins + 1)
    counts, _ = np.histogram(final, bins=edges)
    p_hat = counts / max(int(np.sum(ok)), 1)
    p_exact = exact_bin_masses(field, t1, edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    csv_path = os.path.join(outdir, "histogram.csv")
    write_csv(csv_path, [("bin_center", centers), ("mass_mc", p_hat),
                         ("mass_exact", p_exact)],
              _meta(sc, "ensemble", n=n, seed=seed, bins=bins))
    comparison = {"l1": float(np.sum(np.abs(p_hat - p_exact))),
                  "n": n, "seed": seed, "bins": bins,
                  "t0": t0, "t1": t1,
                  "n_aborted": res.n_aborted,
                  "scenario_digest": sc.digest}
    json_path = os.path.join(outdir, "comparison.json")
    write_json(json_path, comparison)
    return [csv_path, json_path]


def _ensemble_window(sc, n, seed, bins, outdir, grid):
    window = sc_mod.build_window(sc)
    cls = predict_density(window, int(grid))
    mc = mc_first_crossing(window, n, seed, bins)
    pred = cls.bin_masses(mc.edges)
    centers = 0.5 * (mc.edges[:-1] + mc.edges[1:])
    csv_path = os.path.join(outdir, "histogram.csv")
    write_csv(csv_path, [("bin_center", centers), ("mass_mc", mc.masses),
                         ("mass_pred", pred)],
              _meta(sc, "ensemble", n=n, seed=seed, bins=bins, grid=grid))
    dx = cls.cell_width
    cell_idx = np.clip((mc.crossings / dx).astype(int), 0, len(cls.grid) - 1)
    excluded = np.isin(cls.labels[cell_idx], [SIGMA_PLUS, SIGMA_MINUS])
    comparison = {"l1": l1_distance(mc.masses, pred),
                  "flux": cls.flux,
                  "mass_in_excluded": float(np.sum(excluded)) / n,
                  "n": n, "seed": seed, "bins": bins, "grid": int(grid),
                  "n_aborted": mc.n_aborted, "n_lost": mc.n_lost,
                  "scenario_digest": sc.digest}
    json_path = os.path.join(outdir, "comparison.json")
    write_json(json_path, comparison)
    return [csv_path, json_path]


# -- measure -------------------------------------------------------------


def cmd_measure(args):
    sc = _load(args.scenario)
    if sc.kind != "measurement":
        raise ScenarioError(f"measure needs a measurement scenario, got {sc.kind}")
    scenario = sc_mod.build_measurement(sc)
    n = int(sc.run_param("n", args.n))
    seed = int(sc.run_param("seed", args.seed))
    outcome = run_measurement(scenario, n, seed)
    targets = [abs(c.coefficient) ** 2 for c in scenario.channels]
    doc = {"counts": outcome.counts, "frequencies": outcome.frequencies,
           "born_probabilities": targets,
           "unresolved": outcome.unresolved, "n": n, "seed": seed,
           "n_aborted": outcome.n_aborted,
           "separation_time": scenario.separation_time,
           "final_time": scenario.final_time,
           "scenario_digest": sc.digest}
    json_path = os.path.join(_outdir(args), "outcome.json")
    write_json(json_path, doc)
    return [json_path]


# -- search-scenario -----------------------------------------------------


def cmd_search(args):
    result = search_prediction_scenario(seed=int(args.seed))
    run = {"grid": 2000, "n": 100_000, "bins": 100, "seed": 1}
    scn = sc_mod.rel_field_scenario(result.field, t0=0.0, t1=result.t1, run=run)
    sc_mod.save(scn, args.out)
    print(f"found on trial {result.trial}: t1={result.t1:.6g}, "
          f"min j0(t0)={result.min_j0_t0:.4g}, "
          f"min j0(t1)={result.min_j0_t1:.4g} -> {args.out}")
    return [args.out]


# -- plot ----------------------------------------------------------------


def cmd_plot(args):
    if not args.inputs:
        raise ScenarioError("plot needs at least one input CSV")
    path = args.inputs[0]
    if not os.path.exists(path):
        raise ScenarioError(f"no such file: {path}")
    meta, cols = read_csv(path)
    if not cols:
        raise ScenarioError(f"empty input: {path}")
    if {"s", "t", "x"} <= set(cols):
        fig = _plot_worldline(cols)
    elif {"x", "j0", "rho"} <= set(cols):
        fig = _plot_classification(path, cols)
    elif "bin_center" in cols:
        curves = [v for k, v in cols.items() if k != "bin_center"]
        labels = [k for k in cols if k != "bin_center"]
        fig = density_figure(cols["bin_center"], curves, labels=labels,
                             title="histogram")
    else:
        raise ScenarioError(f"unrecognized columns in {path}")
    fig.save(args.out)
    return [args.out]


def _plot_worldline(cols):
    order = np.argsort(cols["s"])
    t, x, s = cols["t"][order], cols["x"][order], cols["s"][order]
    keep = np.concatenate([[True], np.diff(s) > 0])  # event rows duplicate params
    t, x = t[keep], x[keep]
    if len(t) < 2:
        raise ScenarioError("trajectory has fewer than two points")
    # forward/backward flag per point from the coordinate-time increments
    dirs = np.sign(np.concatenate([np.diff(t), [t[-1] - t[-2]]]))
    return worldline_figure(t, x, dirs)


def _plot_classification(path, cols):
    labels_meta, raw = {}, []
    with open(path, encoding="utf-8") as fh:
        names = None
        for line in fh:
            if line.startswith("#"):
                continue
            if names is None:
                names = line.strip().split(",")
                continue
            raw.append(line.strip().split(","))
    li = names.index("label")
    bands, lo = [], None
    xs = cols["x"]
    dx = xs[1] - xs[0] if len(xs) > 1 else 1.0
    for i, row in enumerate(raw):
        zeroed = row[li] in ("sigma_plus", "sigma_minus")
        if zeroed and lo is None:
            lo = xs[i] - 0.5 * dx
        elif not zeroed and lo is not None:
            bands.append((lo, xs[i] - 0.5 * dx))
            lo = None
    if lo is not None:
        bands.append((lo, xs[-1] + 0.5 * dx))
    return density_figure(xs, [cols["j0"], cols["rho"]], zero_bands=bands,
                          labels=["j0 at t1", "measurable density"],
                          title="hyperplane classification")


# -- driver --------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="pilotwave",
                                 description="Bohmian trajectory laboratory")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True)
        p.add_argument("--out", default="out")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--grid", type=int, default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--bins", type=int, default=None)
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("field", help="tabulate psi, j, R, Q, meff2 on a grid")
    common(p)
    p.add_argument("--t", type=float, default=None)
    p.set_defaults(fn=cmd_field)

    p = sub.add_parser("trace", help="integrate trajectories from start points")
    common(p)
    p.add_argument("--start", action="append", default=[],
                   help="comma-separated start coordinates (repeatable)")
    p.add_argument("--span", default="0:10", help="parameter span a:b")
    p.set_defaults(fn=cmd_trace)

    p = sub.add_parser("classify", help="Sigma-classify the measurement hyperplane")
    common(p)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("ensemble", help="Monte Carlo ensemble vs exact/predicted density")
    common(p)
    p.set_defaults(fn=cmd_ensemble)

    p = sub.add_parser("measure", help="von Neumann channel measurement statistics")
    common(p)
    p.set_defaults(fn=cmd_measure)

    p = sub.add_parser("search-scenario", help="search for a prediction scenario")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--out", default="prediction_scenario.json")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=cmd_search)

    p = sub.add_parser("plot", help="render result CSVs to SVG")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--out", default="plot.svg")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.time()
    try:
        artifacts = args.fn(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PhysicsInvariantViolated as exc:
        print(f"physics invariant violated: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except PreconditionViolated as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (StepLimitExceeded, ExcessNodeAborts, UnresolvedExcess,
            WindowTooSmall) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if not getattr(args, "quiet", False):
        record = {"command": args.command, "version": __version__,
                  "started": started, "elapsed": time.time() - started,
                  "artifacts": artifacts}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
