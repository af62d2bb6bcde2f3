"""Command-line front end emitting CSV/JSON artifacts.

Subcommands: theory, simulate, phase-diagram, estimate, fit-slope,
optimal-lambda.  A JSON config file may supply any flag (flags given on the
command line win).  Every command writes a run manifest next to its outputs;
identical manifests reproduce outputs byte-for-byte.

Exit codes: 0 success, 2 usage, 3 numerical failure, 4 data/schema problem.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .dataspec import (
    KernelSpec,
    cumulative_tails,
    estimate_alpha_r,
    feature_decomposition,
    gram_matrix,
    load_dataset_csv,
    tails_to_csv,
)
from .errors import (
    InvalidParameterError,
    SchemaError,
    SolverError,
)
from .regimes import RegimeQuery, classify, optimal_decay, phase_diagram, \
    write_crossover_lines_csv, write_phase_diagram_csv
from .simulator import LamSchedule, LearningCurve, SimConfig, fit_decay_exponent, \
    learning_curve
from .spectrum import DEFAULT_P_SIMULATION, DEFAULT_P_THEORY, PowerLawParams, \
    power_law_spectrum
from .theory import excess_error_closed, optimal_lambda

OUTDIR_ENV = "KRR_REGIMES_OUTDIR"

USAGE_EXIT = 2
NUMERICAL_EXIT = 3
DATA_EXIT = 4


@dataclass
class RunManifest:
    """Everything needed to reproduce a command's outputs bit-exactly."""

    command: str
    version: str
    params: dict
    master_seed: int | None
    outputs: list[str] = field(default_factory=list)
    wall_time_s: float = 0.0

    def write(self, path) -> None:
        with open(path, "w") as f:
            json.dump(asdict(self), f, indent=2, sort_keys=True, default=_json_default)
            f.write("\n")


def _json_default(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    raise TypeError(f"not JSON serializable: {value!r}")


def _outdir() -> str:
    return os.environ.get(OUTDIR_ENV, ".")


def _outpath(args, name: str) -> str:
    base = args.out if args.out else name
    if os.path.dirname(base):
        return base
    return os.path.join(_outdir(), base)


def _int_list(text: str) -> list[int]:
    try:
        return [int(float(tok)) for tok in text.split(",") if tok]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {err}")


def _float_pair(text: str) -> tuple[float, float]:
    toks = text.split(",")
    if len(toks) != 2:
        raise argparse.ArgumentTypeError("expected lo,hi")
    return float(toks[0]), float(toks[1])


def _int_pair(text: str) -> tuple[int, int]:
    toks = text.split(",")
    if len(toks) != 2:
        raise argparse.ArgumentTypeError("expected lo,hi")
    return int(toks[0]), int(toks[1])


def _log_grid(text: str) -> np.ndarray:
    toks = text.split(",")
    if len(toks) != 3:
        raise argparse.ArgumentTypeError("expected min,max,count")
    lo, hi, count = float(toks[0]), float(toks[1]), int(toks[2])
    if not 0 < lo <= hi or count < 1 or (lo == hi and count != 1):
        raise argparse.ArgumentTypeError("grid needs 0 < min <= max and count >= 1")
    return np.geomspace(lo, hi, count)


def _lin_grid(text: str) -> np.ndarray:
    toks = text.split(",")
    if len(toks) != 3:
        raise argparse.ArgumentTypeError("expected min,max,count")
    lo, hi, count = float(toks[0]), float(toks[1]), int(toks[2])
    if lo > hi or count < 1 or (lo == hi and count != 1):
        raise argparse.ArgumentTypeError("grid needs min <= max and count >= 1")
    return np.linspace(lo, hi, count)


def _ell_lambda0_of(args) -> tuple[float, float]:
    """(ell, lambda0) equivalent of the command's ridge flags, for labeling."""
    if getattr(args, "ell", None) is not None:
        return args.ell, args.lambda0
    lam = args.lam
    if lam == 0.0:
        return math.inf, 1.0
    return 0.0, lam


def _write_rows_csv(path, header, rows) -> None:
    import csv as _csv

    with open(path, "w", newline="") as f:
        w = _csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def cmd_theory(args) -> int:
    t0 = time.time()
    spectrum = power_law_spectrum(PowerLawParams(args.alpha, args.r, args.p))
    ell, lambda0 = _ell_lambda0_of(args)
    rows = []
    for n in args.n:
        lam = args.lam if args.ell is None else (
            0.0 if math.isinf(args.ell) else args.lambda0 * float(n) ** (-args.ell))
        dec = excess_error_closed(n, lam, args.sigma, spectrum)
        label = classify(RegimeQuery(alpha=args.alpha, r=args.r, sigma=args.sigma,
                                     ell=ell, n=float(n), lambda0=lambda0))
        rows.append([n, _fmt(lam), _fmt(dec.sample_variance), _fmt(dec.noise_variance),
                     _fmt(dec.total), label.region.value, _fmt(label.exponent)])
    out = _outpath(args, "theory_curve.csv")
    _write_rows_csv(out, ["n", "lambda", "sample_variance", "noise_variance",
                          "excess", "region", "exponent"], rows)
    manifest = RunManifest("theory", __version__, _params_of(args), None, [out],
                           time.time() - t0)
    manifest.write(out + ".manifest.json")
    print(out)
    return 0


def cmd_simulate(args) -> int:
    t0 = time.time()
    spectrum = power_law_spectrum(PowerLawParams(args.alpha, args.r, args.p))
    theory_spectrum = None
    if args.theory_p is not None and args.theory_p != args.p:
        theory_spectrum = power_law_spectrum(PowerLawParams(args.alpha, args.r, args.theory_p))
    if args.cv:
        schedule = LamSchedule("cv")
    elif args.ell is not None:
        schedule = LamSchedule("power", lambda0=args.lambda0, ell=args.ell)
    else:
        schedule = LamSchedule("fixed", lam=args.lam)
    config = SimConfig(spectrum=spectrum, n_values=tuple(args.n), sigma=args.sigma,
                       lam_schedule=schedule, trials=args.trials,
                       master_seed=args.seed, theory_spectrum=theory_spectrum,
                       regime_params=(args.alpha, args.r), workers=args.workers)
    curve = learning_curve(config)
    out = _outpath(args, "learning_curve.csv")
    curve.to_csv(out)
    manifest = RunManifest("simulate", __version__, _params_of(args), args.seed, [out],
                           time.time() - t0)
    manifest.write(out + ".manifest.json")
    print(out)
    return 0


def cmd_phase_diagram(args) -> int:
    t0 = time.time()
    diagram = phase_diagram(args.alpha, args.r, args.sigma, args.lambda0,
                            args.n_grid, args.ell_grid)
    base = args.out if args.out else "phase_diagram"
    if not os.path.dirname(base):
        base = os.path.join(_outdir(), base)
    grid_out = base + "_grid.csv"
    lines_out = base + "_lines.csv"
    write_phase_diagram_csv(diagram, grid_out)
    write_crossover_lines_csv(diagram.lines, lines_out)
    manifest = RunManifest("phase-diagram", __version__, _params_of(args), None,
                           [grid_out, lines_out], time.time() - t0)
    manifest.params["optimal_point"] = list(diagram.lines.optimal_point)
    manifest.write(base + ".manifest.json")
    print(grid_out)
    print(lines_out)
    return 0


def cmd_estimate(args) -> int:
    t0 = time.time()
    features, labels = load_dataset_csv(args.dataset)
    if labels is None:
        raise SchemaError(f"{args.dataset}: missing required label column 'y'")
    n_tot = features.shape[0]
    if n_tot > args.cap and args.subsample is None:
        raise SchemaError(
            f"dataset has {n_tot} rows, above the dense-eigendecomposition cap "
            f"{args.cap}; pass --subsample to draw a random subset")
    if args.subsample is not None and args.subsample < n_tot:
        rng = np.random.default_rng(args.seed)
        keep = np.sort(rng.choice(n_tot, size=args.subsample, replace=False))
        features, labels = features[keep], labels[keep]
        n_tot = args.subsample

    kernel = KernelSpec(args.kernel, gamma=args.gamma, degree=args.degree)
    gram = gram_matrix(features, kernel)
    dec = feature_decomposition(gram, labels, floor_rel=args.eigen_floor)
    cap_tail, src_tail = cumulative_tails(dec.eigenvalues, dec.theta_star ** 2)
    est = estimate_alpha_r(cap_tail, src_tail, args.fit_range_capacity,
                           args.fit_range_source)

    m_hat = min(est.r_hat, 1.0)
    a_hat = est.alpha_hat
    ell = args.ell
    report = {
        "alpha_hat": a_hat,
        "r_hat": est.r_hat,
        "r2_capacity": est.r2_capacity,
        "r2_source": est.r2_source,
        "fit_range_capacity": list(est.fit_range_capacity),
        "fit_range_source": list(est.fit_range_source),
        "n_tot": n_tot,
        "eigenvalue_floor": dec.floor,
        "n_floored": dec.n_floored,
        "predicted_exponents": {
            "GreenNoiselessUnreg": 2.0 * a_hat * m_hat,
            "RedNoisyUnreg": 0.0,
            "BlueNoiselessReg_at_ell": 2.0 * ell * m_hat,
            "OrangeNoisyReg_at_ell": (a_hat - ell) / a_hat,
            "ell_used": ell,
            "noisy_optimal": 2.0 * a_hat * m_hat / (1.0 + 2.0 * a_hat * m_hat),
            "optimal_decay_ell": a_hat / (1.0 + 2.0 * a_hat * m_hat),
        },
    }
    base = args.out if args.out else "estimate"
    if not os.path.dirname(base):
        base = os.path.join(_outdir(), base)
    json_out = base + "_estimate.json"
    tails_out = base + "_tails.csv"
    with open(json_out, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    tails_to_csv(cap_tail, src_tail, tails_out)
    outputs = [json_out, tails_out]
    if args.decomposition_out:
        dec.to_csv(args.decomposition_out)
        outputs.append(args.decomposition_out)
    manifest = RunManifest("estimate", __version__, _params_of(args), args.seed,
                           outputs, time.time() - t0)
    manifest.write(base + ".manifest.json")
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_fit_slope(args) -> int:
    curve = LearningCurve.from_csv(args.curve)
    lo, hi = args.window if args.window else (0, len(curve.rows) - 1)
    slope, stderr = fit_decay_exponent(curve, (lo, hi))
    report = {"slope": slope, "stderr": stderr, "window": [lo, hi],
              "points": hi - lo + 1}
    if args.out:
        with open(_outpath(args, "slope.json"), "w") as f:
            json.dump(report, f, indent=2, sort_keys=True)
            f.write("\n")
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_optimal_lambda(args) -> int:
    t0 = time.time()
    spectrum = power_law_spectrum(PowerLawParams(args.alpha, args.r, args.p))
    grid = np.concatenate([[0.0], args.lam_grid]) if args.include_zero else args.lam_grid
    rows = []
    for n in args.n:
        lam_star, excess_star = optimal_lambda(n, args.sigma, spectrum, grid)
        decay = optimal_decay(args.alpha, args.r, args.sigma, float(n))
        rows.append([n, _fmt(lam_star), _fmt(excess_star), decay.zone])
    out = _outpath(args, "optimal_lambda.csv")
    _write_rows_csv(out, ["n", "lam_star", "excess_star", "zone"], rows)
    manifest = RunManifest("optimal-lambda", __version__, _params_of(args), None, [out],
                           time.time() - t0)
    manifest.write(out + ".manifest.json")
    print(out)
    return 0


def _params_of(args) -> dict:
    skip = {"func", "config"}
    params = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(value, np.ndarray):
            value = [float(v) for v in value]
        params[key] = value
    return params


def build_parser():
    parser = argparse.ArgumentParser(
        prog="krr-regimes",
        description="Learning-curve regimes for ridge regression with power-law spectra.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--config", help="JSON file supplying flag defaults")
        p.add_argument("--out", help="output path or prefix")
        p.set_defaults(func=func)
        subparsers[name] = p
        return p

    p = add("theory", cmd_theory, help="closed-form learning curve")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--lam", type=float, help="fixed regularization")
    group.add_argument("--ell", type=float, help="decay exponent of lambda0 * n^-ell ('inf' for zero)")
    p.add_argument("--lambda0", type=float, default=1.0)
    p.add_argument("--p", type=int, default=DEFAULT_P_THEORY)
    p.add_argument("--n", type=_int_list, required=True, help="comma-separated sample counts")

    p = add("simulate", cmd_simulate, help="Monte-Carlo learning curve with theory column")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--lam", type=float)
    group.add_argument("--ell", type=float)
    group.add_argument("--cv", action="store_true", help="pick lambda by cross-validation")
    p.add_argument("--lambda0", type=float, default=1.0)
    p.add_argument("--p", type=int, default=DEFAULT_P_SIMULATION)
    p.add_argument("--theory-p", type=int, default=None,
                   help="separate truncation for the theory column")
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)

    p = add("phase-diagram", cmd_phase_diagram, help="regime grid plus crossover lines")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--lambda0", type=float, default=1.0)
    p.add_argument("--n-grid", type=_log_grid, default=_log_grid("1,1e6,25"))
    p.add_argument("--ell-grid", type=_lin_grid, default=_lin_grid("0,4,33"))

    p = add("estimate", cmd_estimate, help="capacity/source estimation from a dataset CSV")
    p.add_argument("dataset")
    p.add_argument("--kernel", choices=["rbf", "polynomial", "linear"], required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--degree", type=int, default=5)
    p.add_argument("--fit-range-capacity", type=_int_pair, default=None)
    p.add_argument("--fit-range-source", type=_int_pair, default=None)
    p.add_argument("--cap", type=int, default=8000,
                   help="refuse datasets above this size unless --subsample is given")
    p.add_argument("--subsample", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eigen-floor", type=float, default=1e-12)
    p.add_argument("--ell", type=float, default=1.0,
                   help="decay used for the regularized-regime exponent report")
    p.add_argument("--decomposition-out", default=None)

    p = add("fit-slope", cmd_fit_slope, help="log-log slope of a learning-curve CSV")
    p.add_argument("curve")
    p.add_argument("--window", type=_int_pair, default=None,
                   help="inclusive 0-based row range lo,hi")

    p = add("optimal-lambda", cmd_optimal_lambda, help="per-n optimal regularization")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--p", type=int, default=DEFAULT_P_THEORY)
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--lam-grid", type=_log_grid, default=_log_grid("1e-10,1e2,301"))
    p.add_argument("--include-zero", action="store_true", default=True)

    return parser, subparsers


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, subparsers = build_parser()
    if "--config" in argv:
        try:
            with open(argv[argv.index("--config") + 1]) as f:
                config = json.load(f)
        except (IndexError, OSError, json.JSONDecodeError) as err:
            print(f"error: cannot read config file: {err}", file=sys.stderr)
            return USAGE_EXIT
        for p in subparsers.values():
            p.set_defaults(**config)
            # values supplied through the file satisfy required flags/groups
            for action in p._actions:
                if action.dest in config:
                    action.required = False
            for group in p._mutually_exclusive_groups:
                if group.required and any(a.dest in config for a in group._group_actions):
                    group.required = False
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    try:
        return args.func(args)
    except InvalidParameterError as err:
        print(f"error: {err}", file=sys.stderr)
        return USAGE_EXIT
    except SolverError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return NUMERICAL_EXIT
    except (SchemaError, ValueError, OSError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
