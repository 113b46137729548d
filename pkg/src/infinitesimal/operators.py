"""The infinitesimal mixing operator B, quadratic selection, and the generation loop.

B is evaluated with two linear FFT convolutions: the self-convolution of F,
read back onto the grid as a midpoint density, and the Gaussian segregation
kernel.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import fftconvolve

from .errors import NegativeAlpha, ZeroMass
from .gaussian_oracle import GaussianState
from .grid import (
    ZERO_MASS_TOL,
    GridDistribution,
    gaussian_profile,
    kl_to_gaussian,
    mass,
    mean,
    normalize,
    variance,
    wasserstein2,
)

# the unit Gaussian kernel is truncated where it is below double precision
KERNEL_HALF_WIDTH = 40.0


class Mode(enum.Enum):
    NON_OVERLAPPING = "non-overlapping"
    OVERLAPPING = "overlapping"


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    beta: float = 1.0
    mode: Mode = Mode.NON_OVERLAPPING

    def __post_init__(self):
        if self.alpha < 0 or math.isnan(self.alpha):
            raise NegativeAlpha(f"alpha must be non-negative, got {self.alpha}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class TrajectoryRecord:
    n: int
    log_mass: float
    lambda_n: float
    mean: float
    variance: float
    kl: float = math.nan
    w2: float = math.nan
    eps_mass: float = math.nan

    FIELDS = ("n", "log_mass", "lambda_n", "mean", "variance", "kl", "w2", "eps_mass")

    def row(self) -> list[str]:
        return [str(self.n)] + [f"{getattr(self, k):.17g}" for k in self.FIELDS[1:]]


@dataclass
class Trajectory:
    params: ModelParams
    records: list[TrajectoryRecord] = field(default_factory=list)
    profiles: dict[int, GridDistribution] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TrajectoryRecord.FIELDS)
            for r in self.records:
                w.writerow(r.row())


def _selection_factor(x: np.ndarray, alpha: float) -> np.ndarray:
    return np.exp(-0.5 * alpha * x**2)


def midpoint_density(f: GridDistribution) -> np.ndarray:
    """Density of (x1+x2)/2 under f⊗f, on the grid of f (total mass ‖f‖²)."""
    dx = f.grid.dx
    conv = np.clip(fftconvolve(f.values, f.values) * dx, 0.0, None)
    # conv[j] is the density of x1+x2 at 2*x_min + j*dx, i.e. of the midpoint
    # at x_min + j*dx/2: even j land on grid point j/2, odd j halfway between
    # two grid points and are shared equally, which keeps mass and mean exact
    mid = conv[::2].copy()
    odd = conv[1::2]
    mid[:-1] += 0.5 * odd
    mid[1:] += 0.5 * odd
    return mid


def _gaussian_kernel(dx: float, half_width: float) -> tuple[np.ndarray, int]:
    k = int(math.ceil(half_width / dx))
    s = dx * np.arange(-k, k + 1)
    return np.exp(-0.5 * s**2) / math.sqrt(2 * math.pi), k


def mixing_B(f: GridDistribution) -> GridDistribution:
    z = mass(f)
    if z <= ZERO_MASS_TOL:
        raise ZeroMass()
    grid = f.grid
    mid = midpoint_density(f)
    half = min(KERNEL_HALF_WIDTH, grid.x_max - grid.x_min)
    g, k = _gaussian_kernel(grid.dx, half)
    out = fftconvolve(mid, g)[k : k + grid.n_points] * grid.dx
    return GridDistribution(grid, np.clip(out, 0.0, None) / z)


def apply_T(f: GridDistribution, params: ModelParams) -> GridDistribution:
    b = mixing_B(f)
    return GridDistribution(
        f.grid, params.beta * _selection_factor(f.grid.points, params.alpha) * b.values
    )


def selection_M(f: GridDistribution, alpha: float) -> GridDistribution:
    return normalize(GridDistribution(f.grid, _selection_factor(f.grid.points, alpha) * f.values))


def normalized_step_S(f: GridDistribution, params: ModelParams) -> GridDistribution:
    return normalize(apply_T(f, params))


def step(f: GridDistribution, params: ModelParams) -> GridDistribution:
    """One generation, in either generation mode."""
    born = apply_T(f, params)
    if params.mode is Mode.NON_OVERLAPPING:
        return born
    survivors = _selection_factor(f.grid.points, params.alpha) * f.values
    return GridDistribution(f.grid, survivors + born.values)


def growth_rate_via_H(f: GridDistribution, alpha: float) -> float:
    """Mass ratio ‖T[F]‖/‖F‖ written as a midpoint integral against H."""
    z = mass(f)
    if z <= ZERO_MASS_TOL:
        raise ZeroMass()
    x = f.grid.points
    H = np.exp(-0.5 * alpha / (1 + alpha) * x**2) / math.sqrt(1 + alpha)
    return float(np.sum(midpoint_density(f) * H) * f.grid.dx / z**2)


def fit_tail_variance(f: GridDistribution, lo: float = 1e-12, hi: float = 1e-4) -> float:
    """Variance of the Gaussian that best matches log F on its tails."""
    nu = normalize(f).values
    x = f.grid.points
    sel = (nu >= lo) & (nu <= hi)
    if sel.sum() < 3:
        raise ValueError("too few tail points to fit")
    A = np.column_stack([np.ones(sel.sum()), x[sel], -0.5 * x[sel] ** 2])
    coef, *_ = np.linalg.lstsq(A, np.log(nu[sel]), rcond=None)
    return 1.0 / coef[2]


def _record(n, log_m, lam, f, ref_profile, ref):
    kl = w2 = eps = math.nan
    if ref_profile is not None:
        kl = kl_to_gaussian(f, ref.mean_scalar, ref.variance)
        w2 = wasserstein2(f, ref_profile)
        if not math.isnan(lam):
            eps = abs(lam - ref.mass)
    return TrajectoryRecord(n, log_m, lam, mean(f), variance(f), kl, w2, eps)


def iterate(
    f0: GridDistribution,
    params: ModelParams,
    n_iters: int,
    eigen_ref: GaussianState | None = None,
    keep: set[int] | None = None,
) -> Trajectory:
    """Run n_iters generations from f0.

    Profiles are renormalized every step and the mass is tracked through
    ``log_mass``. ``keep`` selects which normalized profiles to store;
    ``None`` stores all of them. ``eigen_ref`` supplies the reference
    (mass = expected growth rate, mean, variance) for the error columns.
    """
    ref_profile = None
    if eigen_ref is not None:
        ref_profile = gaussian_profile(f0.grid, eigen_ref.mean_scalar, eigen_ref.variance)
    z = mass(f0)
    if z <= ZERO_MASS_TOL:
        raise ZeroMass(step=0)
    f = f0.scaled(1 / z)
    log_m = math.log(z)
    traj = Trajectory(params)
    traj.records.append(_record(0, log_m, math.nan, f, ref_profile, eigen_ref))
    if keep is None or 0 in keep:
        traj.profiles[0] = f
    for n in range(1, n_iters + 1):
        try:
            g = step(f, params)
        except ZeroMass as exc:
            raise ZeroMass(step=n) from exc
        lam = mass(g)
        if lam <= ZERO_MASS_TOL:
            raise ZeroMass(step=n)
        f = g.scaled(1 / lam)
        log_m += math.log(lam)
        traj.records.append(_record(n, log_m, lam, f, ref_profile, eigen_ref))
        if keep is None or n in keep:
            traj.profiles[n] = f
    return traj
