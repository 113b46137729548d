"""End-to-end runs shared by the command line and the scripts."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .diagnostics import RateFit, fit_geometric_rate
from .errors import InsufficientPoints, NonPositiveError
from .gaussian_oracle import Eigenpair, GaussianState, eigenpair
from .grid import mean, write_csv
from .operators import Trajectory, iterate

RATE_METRICS = ("kl", "w2sq", "mass", "variance", "mean")


@dataclass
class SimulationResult:
    config: ExperimentConfig
    eigen: Eigenpair
    reference: GaussianState
    trajectory: Trajectory
    rates: dict[str, RateFit | None]


def error_series(traj: Trajectory, ref: GaussianState) -> dict[str, np.ndarray]:
    """(n, ε_n) pairs for every tracked error, generation 0 included when defined."""
    n = traj.column("n")
    series = {
        "kl": traj.column("kl"),
        "w2sq": traj.column("w2") ** 2,
        "mass": traj.column("eps_mass"),
        "variance": np.abs(traj.column("variance") - ref.variance),
        "mean": np.abs(traj.column("mean") - ref.mean_scalar),
    }
    out = {}
    for name, eps in series.items():
        keep = np.isfinite(eps)
        out[name] = np.column_stack([n[keep], eps[keep]])
    return out


def fit_rates(traj: Trajectory, ref: GaussianState, windows=None) -> dict[str, RateFit | None]:
    windows = windows or {}
    rates = {}
    for name, pairs in error_series(traj, ref).items():
        w = windows.get(name)
        try:
            rates[name] = fit_geometric_rate(pairs, tuple(w) if w else None)
        except (InsufficientPoints, NonPositiveError):
            rates[name] = None
    return rates


def run_simulate(config: ExperimentConfig, out_dir: str | Path | None = None) -> SimulationResult:
    grid = config.grid.build()
    f0 = config.initial.profile(grid)
    params = config.params()
    e = eigenpair(config.alpha)
    # flat selection relaxes to the linkage-equilibrium Gaussian around the initial mean
    mu_ref = mean(f0) if config.alpha == 0 else 0.0
    ref = GaussianState(e.lam, mu_ref, e.sigma2)
    traj = iterate(f0, params, config.n_iters, ref, keep=set(config.snapshot_generations))
    rates = fit_rates(traj, ref, config.rate_windows)
    result = SimulationResult(config, e, ref, traj, rates)
    if out_dir is not None:
        write_outputs(result, Path(out_dir))
    return result


def write_outputs(result: SimulationResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(result.config.to_yaml())
    result.trajectory.write_csv(out / "trajectory.csv")
    for n, f in sorted(result.trajectory.profiles.items()):
        write_csv(f, out / f"profile_{n:04d}.csv")
    with open(out / "eigen.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "dim", "lambda", "sigma2", "k_bar", "r_bar"])
        w.writerow(result.eigen.row())
    with open(out / "rates.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "rate", "log_intercept", "n_lo", "n_hi", "residual_rms"])
        for name in RATE_METRICS:
            fit = result.rates.get(name)
            if fit is None:
                w.writerow([name, "nan", "nan", "", "", "nan"])
            else:
                w.writerow(
                    [name, f"{fit.rate:.17g}", f"{fit.log_intercept:.17g}", fit.window[0],
                     fit.window[1], f"{fit.residual_rms:.17g}"]
                )


def summary_lines(result: SimulationResult) -> list[str]:
    last = result.trajectory.records[-1]
    e = result.eigen
    lines = [
        f"alpha={e.alpha}  lambda_bar={e.lam:.6f}  sigma2_bar={e.sigma2:.6f}  "
        f"k_bar={e.k_bar:.6f}  r_bar={e.r_bar:.6f}",
        f"generation {last.n}: lambda_n={last.lambda_n:.6f}  mean={last.mean:.6f}  "
        f"variance={last.variance:.6f}",
    ]
    for name in RATE_METRICS:
        fit = result.rates.get(name)
        if fit is None:
            lines.append(f"  {name:9s} rate: n/a (errors at noise floor)")
        else:
            lines.append(
                f"  {name:9s} rate: {fit.rate:.4f}  window {fit.window[0]}..{fit.window[1]}"
            )
    return lines
