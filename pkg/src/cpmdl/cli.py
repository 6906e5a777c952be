"""Command-line surface: fit, predict, simulate.

Exit statuses: 0 success, 1 computational failure, 2 usage error.
No plotting; commands emit JSON documents and plot-ready CSV tables.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys

import numpy as np

from . import __version__
from .data import build_anchor_set
from .errors import CpmError, InvalidProbabilityError, UnknownProfileColumnError
from .io import dump_document, fit_from_document, fit_to_document, load_document, read_csv
from .quantities import (
    cdf_curve,
    conditional_cdf,
    conditional_quantile,
    conditional_quantile_interval,
)
from .simulation import ESTIMATORS, ScenarioSpec, run_study
from .solver import FitOptions, fit


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpmdl",
        description="Cumulative probability models for outcomes with detection limits")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a CPM to a CSV dataset")
    p_fit.add_argument("--data", required=True, help="input CSV path")
    p_fit.add_argument("--link", default="logit",
                       choices=["logit", "probit", "loglog", "cloglog"])
    p_fit.add_argument("--config", help="JSON file with fit options / column names")
    p_fit.add_argument("--out", help="output JSON path (default: stdout)")

    p_pred = sub.add_parser("predict", help="conditional CDFs and quantiles from a fit")
    p_pred.add_argument("--fit", required=True, help="fit document JSON path")
    p_pred.add_argument("--profile", action="append", default=[],
                        help='covariate profile, e.g. "x=1.5,sex=0"; repeatable')
    p_pred.add_argument("--cdf-at", type=float, nargs="*", default=[],
                        help="outcome values at which to evaluate the CDF")
    p_pred.add_argument("--quantile", type=float, nargs="*", default=[],
                        help="quantile probabilities in (0,1)")
    p_pred.add_argument("--level", type=float, default=0.95)
    p_pred.add_argument("--out", help="output CSV path (default: stdout)")

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo scenario study")
    p_sim.add_argument("--family", required=True, choices=["single", "multi", "misspec"])
    p_sim.add_argument("--scenario", type=int, default=1)
    p_sim.add_argument("--n", type=int, default=100)
    p_sim.add_argument("--reps", type=int, default=1000)
    p_sim.add_argument("--seed", type=int, default=20240801)
    p_sim.add_argument("--link", default="probit",
                       choices=["logit", "probit", "loglog", "cloglog"])
    p_sim.add_argument("--estimators", default="cpm",
                       help=f"comma list from {','.join(ESTIMATORS)}")
    p_sim.add_argument("--out", required=True,
                       help="output prefix; writes <out>.csv, <out>.json, <out>.manifest.json")
    return parser


def _cmd_fit(args) -> int:
    config = load_document(args.config) if args.config else {}
    table = read_csv(args.data,
                     outcome_col=config.get("outcome_col"),
                     censor_col=config.get("censor_col"),
                     round_digits=config.get("round_digits"))
    opt_fields = {f.name for f in dataclasses.fields(FitOptions)}
    options = FitOptions(**{k: v for k, v in config.items() if k in opt_fields})
    model = fit(table.dataset, link=config.get("link", args.link), options=options)
    doc = fit_to_document(model, covariate_names=table.covariate_names)
    if args.out:
        dump_document(doc, args.out)
    else:
        json.dump(doc, sys.stdout, indent=2)
        print()
    return 0


def _parse_profile(raw: str, names: list) -> np.ndarray:
    x = np.zeros(len(names))
    seen = set()
    for part in raw.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise UnknownProfileColumnError(f"bad profile entry {part!r}")
        key, val = part.split("=", 1)
        key = key.strip()
        if key not in names:
            raise UnknownProfileColumnError(f"unknown profile column {key!r}")
        x[names.index(key)] = float(val)
        seen.add(key)
    return x


def _qv_cell(qv):
    if qv.is_numeric:
        return repr(qv.value), ""
    kind = "below_dl" if qv.kind == "below_lowest" else "above_dl"
    return json.dumps({"kind": kind, "label": qv.label}), qv.label


def _cmd_predict(args) -> int:
    model, names = fit_from_document(load_document(args.fit))
    profiles = args.profile or [""]
    if any(not 0 < p < 1 for p in args.quantile):
        raise InvalidProbabilityError("quantile probabilities must be in (0,1)")

    writer = csv.writer(open(args.out, "w", newline="") if args.out else sys.stdout)
    writer.writerow(["profile", "quantity", "at", "estimate", "se",
                     "ci_lo", "ci_hi", "level"])
    for raw in profiles:
        x = _parse_profile(raw, names)
        curve = cdf_curve(model, x, level=args.level)
        for y in args.cdf_at:
            est, se = conditional_cdf(model, x, y)
            m = int(np.searchsorted(curve.eval_points, y, side="right")) - 1
            if m < 0:
                lo, hi = 0.0, 0.0
            else:
                lo, hi = float(curve.ci_lo[m]), float(curve.ci_hi[m])
            writer.writerow([raw, "cdf", repr(y), repr(est), repr(se),
                             repr(lo), repr(hi), args.level])
        for p in args.quantile:
            qv = conditional_quantile(model, x, p)
            lo_q, hi_q = conditional_quantile_interval(model, x, p, level=args.level)
            est_cell, _ = _qv_cell(qv)
            lo_cell, _ = _qv_cell(lo_q)
            hi_cell, _ = _qv_cell(hi_q)
            writer.writerow([raw, "quantile", repr(p), est_cell, "",
                             lo_cell, hi_cell, args.level])
    return 0


def _cmd_simulate(args) -> int:
    estimators = tuple(e.strip() for e in args.estimators.split(",") if e.strip())
    spec = ScenarioSpec(family=args.family, scenario=args.scenario, n=args.n,
                        replicates=args.reps, seed=args.seed, link=args.link,
                        estimators=estimators)
    result = run_study(spec)

    fields = [f.name for f in dataclasses.fields(result.rows[0])] if result.rows else []
    with open(args.out + ".csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in result.rows:
            writer.writerow([getattr(row, f) for f in fields])
    dump_document({"rows": [dataclasses.asdict(r) for r in result.rows]},
                  args.out + ".json")
    dump_document({
        "version": __version__,
        "spec": dataclasses.asdict(spec),
        "excluded_replicates": result.n_excluded,
    }, args.out + ".manifest.json")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"fit": _cmd_fit, "predict": _cmd_predict, "simulate": _cmd_simulate}
    try:
        return handlers[args.command](args)
    except CpmError as e:
        json.dump({"error": type(e).__name__, "message": str(e)}, sys.stderr)
        print(file=sys.stderr)
        return 1
    except OSError as e:
        json.dump({"error": "Io", "message": str(e)}, sys.stderr)
        print(file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
