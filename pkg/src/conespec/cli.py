"""Batch front end.

Subcommands: eigens, resolvent, specmeasure, zeromode, propagate,
fit-decay, oracle-box, indexset, legendrian. Every run writes a JSON
summary (schema_version, config echo, predicted vs measured quantities,
pass/fail of any invoked checks) plus CSV outputs and a gnuplot script per
CSV. Outputs are byte-deterministic for a fixed config and version.

Exit codes: 0 success, 1 configuration error, 2 positivity/no-resonance
hypothesis violation, 3 numerical convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

import conespec
from conespec import cone_kernels as ck
from conespec import config as cfg
from conespec import cross_section as cs
from conespec import index_sets as ix
from conespec import legendrian as lg
from conespec import oracle as orc
from conespec import propagators as pr
from conespec import radial_scattering as rs
from conespec.errors import (ConeSpecError, ConfigError, ConvergenceError,
                             HypothesisError, SolverError)

SCHEMA_VERSION = 1

SUBCOMMANDS = ("eigens", "resolvent", "specmeasure", "zeromode", "propagate",
               "fit-decay", "oracle-box", "indexset", "legendrian")


def _summary_skeleton(args, data):
    return {
        "schema_version": SCHEMA_VERSION,
        "version": conespec.__version__,
        "backend": conespec.backend(),
        "subcommand": args.subcommand,
        "config": data,
        "checks": {},
    }


def _write_summary(outdir, summary):
    path = os.path.join(outdir, "summary.json")
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=repr)
        fh.write("\n")
    return path


def _write_plot_script(outdir, csv_name, columns, title, loglog=False):
    """Companion gnuplot script (never invoked automatically)."""
    path = os.path.join(outdir, csv_name.replace(".csv", ".gp"))
    with open(path, "w") as fh:
        fh.write("set datafile separator ','\n")
        fh.write(f"set title '{title}'\nset key outside\n")
        if loglog:
            fh.write("set logscale xy\n")
        plots = ", ".join(
            f"'{csv_name}' using 1:{i} with linespoints title '{name}'"
            for i, name in columns)
        fh.write(f"plot {plots}\n")
    return path


def _points(run):
    triples = cfg.parse_points(run.task.get("points", "1.0:0.0:2.0"))
    return [(ck.ConePoint(r, th), ck.ConePoint(rp, 0.0))
            for r, th, rp in triples]


def _threads(args):
    return max(1, args.threads)


def _map_ordered(fn, items, nthreads):
    if nthreads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        return list(pool.map(fn, items))


# -- subcommand implementations ------------------------------------------


def cmd_eigens(args, run, outdir, summary):
    rows = [(j, m.nu, m.nu * m.nu, m.multiplicity)
            for j, m in enumerate(run.spectrum.modes)]
    path = os.path.join(outdir, "eigens.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "nu", "nu_sq", "multiplicity"])
        for row in rows:
            w.writerow([row[0], repr(row[1]), repr(row[2]), row[3]])
    _write_plot_script(outdir, "eigens.csv", [(2, "nu")], "cross-section modes")
    summary["measured"] = {"nu0": run.spectrum.nu0, "nu1": run.spectrum.nu1,
                           "count": len(run.spectrum.modes)}
    summary["checks"]["hyp_positive"] = True
    return 0


def cmd_resolvent(args, run, outdir, summary):
    lam_grid = cfg.parse_grid(run.task.get("lambda", "1.0"))
    sign = +1 if run.task.get("sign", "+") in ("+", "+1", "plus") else -1
    pairs = _points(run)
    jobs = [(lam, L, R) for lam in lam_grid for (L, R) in pairs]

    def one(job):
        lam, L, R = job
        return ck.resolvent_kernel(run.spectrum, lam, L, R, sign,
                                   tol=args.tol or run.tol)

    samples = _map_ordered(one, jobs, _threads(args))
    path = os.path.join(outdir, "resolvent.csv")
    ck.write_kernel_csv(path, samples, kind="resolvent")
    _write_plot_script(outdir, "resolvent.csv", [(5, "re"), (6, "im")],
                       "resolvent kernel")
    summary["measured"] = {"samples": len(samples)}
    return 0


def cmd_specmeasure(args, run, outdir, summary):
    lam_grid = cfg.parse_grid(run.task.get("lambda_grid", "0.1:2.0:16:log"))
    pairs = _points(run)
    tol = args.tol or run.tol

    def one(job):
        lam, L, R = job
        val = run.model.density(lam, L, R, tol=tol)
        return ck.KernelSample(lam, L, R, complex(val, 0.0), 0, 0.0)

    jobs = [(lam, L, R) for lam in lam_grid for (L, R) in pairs]
    samples = _map_ordered(one, jobs, _threads(args))
    path = os.path.join(outdir, "specmeasure.csv")
    ck.write_kernel_csv(path, samples, kind="density")
    _write_plot_script(outdir, "specmeasure.csv", [(5, "density")],
                       "spectral measure density", loglog=True)
    summary["measured"] = {"samples": len(samples)}
    if args.fit or run.task.get("fit", "false").lower() == "true":
        L, R = pairs[0]
        slope, coeff, pslope, pcoeff = rs.low_energy_fit(
            run.model, L, R, lam_grid, tol=min(tol, 1e-15))
        summary["measured"].update({
            "slope": slope, "coefficient": coeff,
            "predicted_slope": pslope, "predicted_coefficient": pcoeff})
        summary["checks"]["slope_within_1pc"] = bool(
            abs(slope - pslope) <= 0.01 * pslope)
    return 0


def cmd_zeromode(args, run, outdir, summary):
    zm = run.model.zero_mode()
    radii = cfg.parse_grid(run.task.get("radii", "0.1:10.0:64:log"))
    path = os.path.join(outdir, "zeromode.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u0", "w"])
        for r in radii:
            w.writerow([repr(float(r)), repr(zm.u0(r)), repr(zm.w_eval(r))])
    _write_plot_script(outdir, "zeromode.csv", [(3, "w")], "zero mode")
    summary["measured"] = {"nu0": zm.nu0, "a_coeff": zm.a_coeff,
                           "b_coeff": zm.b_coeff,
                           "w_at_1": zm.w_eval(1.0)}
    summary["checks"]["no_zero_resonance"] = True
    return 0


def cmd_propagate(args, run, outdir, summary):
    kind = args.kind or run.task.get("kind", "wave_sin")
    lam_c = float(run.task.get("lambda_c", 1.0))
    cutoff = pr.Cutoff(lam_c)
    t_grid = cfg.parse_grid(run.task.get("t_grid", "200:6:dyadic"))
    pairs = _points(run)
    L, R = pairs[0]
    tol = args.tol or run.tol
    n_lambda = run.raw["numerics"].get("n_lambda")
    dense = run.raw["numerics"].get("dense_points")
    values = pr.stone_series(run.model, kind, cutoff, t_grid, L, R, tol=tol,
                             n_lambda=int(n_lambda) if n_lambda else None,
                             dense_points=int(dense) if dense else None)
    path = os.path.join(outdir, "propagate.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "re", "im", "abs"])
        for t, v in zip(sorted(map(float, t_grid)), values):
            w.writerow([repr(t), repr(v.real), repr(v.imag), repr(abs(v))])
    _write_plot_script(outdir, "propagate.csv", [(4, "abs")],
                       f"{kind} kernel decay", loglog=True)
    pe, pc = pr.predicted_constants(run.model, kind, L, R)
    fit = pr.fit_decay(sorted(map(float, t_grid)), values,
                       predicted_exponent=pe, predicted_coefficient=pc)
    summary["measured"] = {
        "kind": kind, "lambda_c": lam_c,
        "exponent": fit.exponent, "ci_exponent": fit.ci_exponent,
        "coefficient_re": fit.coefficient.real,
        "coefficient_im": fit.coefficient.imag,
        "oscillatory": fit.oscillatory,
        "predicted_exponent": pe,
        "predicted_coefficient_re": complex(pc).real,
        "predicted_coefficient_im": complex(pc).imag,
    }
    if abs(complex(pc)) > 0.0:
        summary["checks"]["exponent_within_5pc"] = bool(
            abs(fit.exponent - pe) <= 0.05 * pe)
        summary["checks"]["coefficient_within_5pc"] = bool(
            abs(fit.coefficient - complex(pc)) <= 0.05 * abs(complex(pc)))
    return 0


def cmd_fit_decay(args, run, outdir, summary):
    src = run.task.get("file")
    if not src:
        raise ConfigError("fit-decay needs task.file = <csv with t, re, im>")
    ts, vs = [], []
    with open(src, "r") as fh:
        for row in csv.reader(fh):
            if not row or row[0] == "t":
                continue
            ts.append(float(row[0]))
            vs.append(complex(float(row[1]), float(row[2])))
    fit = pr.fit_decay(ts, vs)
    summary["measured"] = {
        "exponent": fit.exponent, "ci_exponent": fit.ci_exponent,
        "coefficient_re": fit.coefficient.real,
        "coefficient_im": fit.coefficient.imag,
        "oscillatory": fit.oscillatory,
    }
    return 0


def cmd_oracle_box(args, run, outdir, summary):
    nu = float(run.task.get("nu", run.spectrum.nu0))
    sigma = float(run.task.get("sigma", 0.07))
    lam_grid = cfg.parse_grid(run.task.get("lambda_grid", "0.5:2.0:4:lin"))
    r = float(run.task.get("r", 1.0))
    rp = float(run.task.get("r_prime", 1.0))
    box_r = float(run.task.get("box_r", 150.0))
    box_n = int(run.task.get("box_n", 1500))
    r0 = float(run.task.get("r0", 1e-3))
    worst, rows = orc.compare_with_modes(run.model, nu, sigma, lam_grid, r,
                                         rp, r0=r0, R=box_r, N=box_n)
    path = os.path.join(outdir, "oracle_box.csv")
    orc.write_box_csv(path, rows)
    _write_plot_script(outdir, "oracle_box.csv",
                       [(2, "mode"), (3, "box")], "box oracle", loglog=False)
    summary["measured"] = {"max_relative_deviation": float(worst), "sigma": sigma,
                           "box_R": box_r, "box_N": box_n}
    summary["checks"]["within_5pc"] = bool(worst <= 0.05)
    return 0


def cmd_indexset(args, run, outdir, summary):
    expr = run.task.get("expr")
    if not expr:
        raise ConfigError("indexset needs task.expr = <prefix expression>")
    result = ix.evaluate_expression(expr)
    text = ix.format_result(result)
    print(text)
    summary["measured"] = {"expr": expr, "result": text}
    return 0


def cmd_legendrian(args, run, outdir, summary):
    seed = int(run.task.get("seed", 0))
    grid = int(run.task.get("grid", 20))
    step = float(run.task.get("step", 1e-4))
    n = int(run.raw["geometry"].get("n", 3))
    rng = np.random.default_rng(seed)
    gc = lg.random_great_circle(n, rng)
    path = os.path.join(outdir, "legendrian.csv")
    lg.write_leaf_csv(path, gc, grid=grid, step=step)
    rows = lg.leaf_grid_residuals(gc, grid, step)
    worst = max(r[2] for r in rows)
    _write_plot_script(outdir, "legendrian.csv", [(6, "residual")],
                       "contact residuals")
    summary["measured"] = {"max_residual": float(worst), "grid": grid, "step": step}
    summary["checks"]["residual_below_1e-7"] = bool(worst <= 1e-7)
    return 0


_DISPATCH = {
    "eigens": cmd_eigens,
    "resolvent": cmd_resolvent,
    "specmeasure": cmd_specmeasure,
    "zeromode": cmd_zeromode,
    "propagate": cmd_propagate,
    "fit-decay": cmd_fit_decay,
    "oracle-box": cmd_oracle_box,
    "indexset": cmd_indexset,
    "legendrian": cmd_legendrian,
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="conespec",
        description="Spectral measures, resolvents and propagator decay on "
                    "metric cones")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="run configuration file")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--fit", action="store_true",
                   help="fit the low-energy law where applicable")
    p.add_argument("--tol", type=float, default=None,
                   help="override the numerics tolerance")
    p.add_argument("--modes", type=int, default=None,
                   help="override the number of angular levels")
    p.add_argument("--kind", default=None, choices=pr.KINDS,
                   help="propagator kind (propagate subcommand)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        data = cfg.parse_config_file(args.config)
        run = cfg.build_run_config(data, l_max_override=args.modes,
                                   tol_override=args.tol)
    except HypothesisError as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, OSError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    os.makedirs(args.out, exist_ok=True)
    summary = _summary_skeleton(args, data)
    try:
        rc = _DISPATCH[args.subcommand](args, run, args.out, summary)
    except HypothesisError as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        summary["error"] = str(exc)
        _write_summary(args.out, summary)
        return 2
    except (ConvergenceError, SolverError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        summary["error"] = str(exc)
        _write_summary(args.out, summary)
        return 3
    except (ConfigError, ConeSpecError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        summary["error"] = str(exc)
        _write_summary(args.out, summary)
        return 1
    summary["ok"] = rc == 0
    path = _write_summary(args.out, summary)
    print(f"summary: {path}")
    return rc


if __name__ == "__main__":
    sys.exit(main())
