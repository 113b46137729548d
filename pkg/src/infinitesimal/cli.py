"""Command line entry point: ``infinitesimal <subcommand> ...``.

Exit codes: 0 on success, 2 for configuration or parameter errors, 3 when a
computation fails (extinction, overflow, ...).
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, preset
from .diagnostics import dirac_selection_gap, verify_moment_bounds, verify_w2_contraction
from .errors import ConfigError, ModelError, NumericalError
from .experiments import run_simulate, summary_lines
from .gaussian_oracle import GaussianState, eigenpair, gaussian_trajectory
from .grid import Grid, gaussian_profile
from .initial import STEP_PRESETS, GaussianDatum, rescaled_log
from .operators import ModelParams, iterate
from .pedigree import mc_profile_ratio

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _emit(rows: list[list[str]], out: str | None, name: str) -> None:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    if out is None:
        sys.stdout.write(buf.getvalue())
        return
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(buf.getvalue())


def cmd_simulate(args) -> int:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ConfigError("simulate needs --config or --preset")
    if args.seed is not None:
        cfg.seed = args.seed
    if args.iters is not None:
        cfg.n_iters = args.iters
    out = args.out or cfg.outputs
    result = run_simulate(cfg, out)
    for line in summary_lines(result):
        print(line)
    print(f"outputs written to {out}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    states = gaussian_trajectory(
        GaussianState(args.mass, args.mean, args.variance), args.alpha, args.n
    )
    rows = [["n", "mass", "mean", "variance"]]
    for n, s in enumerate(states):
        rows.append([str(n), f"{s.mass:.17g}", f"{s.mean_scalar:.17g}", f"{s.variance:.17g}"])
    _emit(rows, args.out, "oracle.csv")
    return EXIT_OK


def cmd_eigen(args) -> int:
    e = eigenpair(args.alpha, args.dim)
    rows = [e.row()]
    if args.header:
        rows.insert(0, ["alpha", "dim", "lambda", "sigma2", "k_bar", "r_bar"])
    _emit(rows, args.out, "eigen.csv")
    return EXIT_OK


def parse_initial(spec: str, alpha: float):
    """'eigen', a step preset name, or 'gaussian:MEAN:VARIANCE'."""
    if spec == "eigen":
        return GaussianDatum(0.0, eigenpair(alpha).sigma2)
    if spec in STEP_PRESETS:
        return STEP_PRESETS[spec]
    if spec.startswith("gaussian:"):
        try:
            _, mu, var = spec.split(":")
            return GaussianDatum(float(mu), float(var))
        except ValueError as exc:
            raise ConfigError(f"bad gaussian spec {spec!r}, expected gaussian:MEAN:VARIANCE") from exc
    raise ConfigError(f"unknown initial datum {spec!r}")


def cmd_pedigree_mc(args) -> int:
    datum = parse_initial(args.initial, args.alpha)
    xs = np.array(args.x, dtype=float)
    seed = 0 if args.seed is None else args.seed
    est = mc_profile_ratio(xs, rescaled_log(datum, args.alpha), args.n, args.alpha,
                           args.samples, seed)
    grid = Grid(-args.half_width, args.half_width, args.dx)
    traj = iterate(datum.profile(grid), ModelParams(args.alpha), args.n, keep={args.n})
    f = traj.profiles[args.n]
    ref = np.array([f.at(x) for x in xs]) / f.at(0.0)
    rows = [["x", "ratio_mc", "std_err", "ratio_grid", "abs_z"]]
    for x, r, se, g in zip(xs, est.ratio, est.std_error, ref):
        z = abs(r - g) / se if se > 0 else (0.0 if r == g else float("inf"))
        rows.append([f"{x:.17g}", f"{r:.17g}", f"{se:.17g}", f"{g:.17g}", f"{z:.17g}"])
    _emit(rows, args.out, "pedigree_mc.csv")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    alpha = args.alpha
    grid = Grid(-20.0, 20.0, 0.005)
    rows = [["check", "lhs", "rhs", "slack", "ok"]]

    c = verify_w2_contraction(gaussian_profile(grid, 0, 1), gaussian_profile(grid, 0, 4))
    rows.append(["w2_contraction_gaussians", f"{c.lhs:.17g}", f"{c.rhs:.17g}",
                 f"{c.rhs - c.lhs:.17g}", str(c.ok)])

    e = eigenpair(alpha)
    report = verify_moment_bounds(gaussian_profile(grid, 0, e.sigma2), alpha, args.eta,
                                  args.theta, args.chi)
    rows.extend(b.row() for b in report.checks)

    w_in, w_out = dirac_selection_gap(args.h, args.eps, alpha)
    # selection is not Lipschitz for W2: the output gap exceeds the input gap
    rows.append(["dirac_gap", f"{w_in:.17g}", f"{w_out:.17g}", f"{w_out - w_in:.17g}",
                 str(w_out >= w_in)])

    print(f"diagnostics at alpha={alpha}: M={report.M:.6g}, C={report.C:.6g}, "
          f"delta={report.delta:.6g}")
    for r in rows[1:]:
        print(f"  {r[0]:28s} lhs={float(r[1]):.6g} rhs={float(r[2]):.6g} ok={r[4]}")
    if args.out:
        _emit(rows, args.out, "diagnose.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment configuration")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--preset", choices=["weak", "strong"])

    p = argparse.ArgumentParser(prog="infinitesimal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="run the grid solver")
    s.add_argument("--iters", type=int, default=None, help="override n_iters")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("oracle", parents=[common], help="closed-form Gaussian trajectory")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--mass", type=float, default=1.0)
    s.add_argument("--mean", type=float, default=0.0)
    s.add_argument("--variance", type=float, required=True)
    s.add_argument("-n", type=int, default=40)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("eigen", parents=[common], help="Gaussian eigenpair as one CSV row")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--dim", type=int, default=1)
    s.add_argument("--header", action="store_true")
    s.set_defaults(func=cmd_eigen)

    s = sub.add_parser("pedigree-mc", parents=[common], help="tree Monte Carlo profile ratio")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--x", type=float, nargs="+", default=[-2.0, -1.0, 1.0, 2.0])
    s.add_argument("--samples", type=int, default=10**6)
    s.add_argument("--initial", default="eigen",
                   help="eigen | central-step | four-block | gaussian:MEAN:VARIANCE")
    s.add_argument("--dx", type=float, default=0.001, help="grid step of the reference solver")
    s.add_argument("--half-width", type=float, default=20.0)
    s.set_defaults(func=cmd_pedigree_mc)

    s = sub.add_parser("diagnose", parents=[common], help="inequality and gap checks")
    s.add_argument("--alpha", type=float, default=0.4)
    s.add_argument("--eta", type=float, default=0.9)
    s.add_argument("--theta", type=float, default=0.1)
    s.add_argument("--chi", type=float, default=1.0)
    s.add_argument("--h", type=float, default=2.0)
    s.add_argument("--eps", type=float, default=0.1)
    s.set_defaults(func=cmd_diagnose)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
