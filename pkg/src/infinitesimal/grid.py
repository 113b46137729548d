"""Trait densities sampled on a uniform one-dimensional grid.

Every integral uses the left rectangle rule: the value at ``x_k`` stands for
the cell ``[x_k, x_k + dx)`` and the last grid point carries no weight.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .errors import GridMismatch, NonPositiveVariance, Overflow, SupportViolation, ZeroMass

ZERO_MASS_TOL = 1e-300
KL_TOL = 1e-10
# exp() overflows beyond this exponent in double precision
_LOG_MAX = 709.0


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    dx: float

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError(f"dx must be positive, got {self.dx}")
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")

    @property
    def n_points(self) -> int:
        return int(round((self.x_max - self.x_min) / self.dx)) + 1

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    def index_of(self, x: float) -> int:
        """Index of the grid point nearest to ``x``."""
        k = int(round((x - self.x_min) / self.dx))
        if not 0 <= k < self.n_points:
            raise ValueError(f"{x} lies outside the grid [{self.x_min}, {self.x_max}]")
        return k


@dataclass(frozen=True)
class GridDistribution:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} values, got shape {values.shape}"
            )
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite and non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    def scaled(self, c: float) -> "GridDistribution":
        return GridDistribution(self.grid, self.values * c)

    def at(self, x: float) -> float:
        """Linear interpolation of the density at ``x``."""
        return float(np.interp(x, self.grid.points, self.values))


def _check_same_grid(p: GridDistribution, q: GridDistribution) -> None:
    if p.grid != q.grid:
        raise GridMismatch(f"{p.grid} != {q.grid}")


def mass(f: GridDistribution) -> float:
    return float(np.sum(f.values[:-1]) * f.grid.dx)


def normalize(f: GridDistribution) -> GridDistribution:
    z = mass(f)
    if z <= ZERO_MASS_TOL:
        raise ZeroMass()
    return GridDistribution(f.grid, f.values / z)


def _weights(f: GridDistribution) -> np.ndarray:
    """Left-rule quadrature weights of the normalized density."""
    z = mass(f)
    if z <= ZERO_MASS_TOL:
        raise ZeroMass()
    w = f.values * (f.grid.dx / z)
    w[-1] = 0.0
    return w


def gaussian_profile(grid: Grid, mu: float, sigma2: float) -> GridDistribution:
    if not sigma2 > 0:
        raise NonPositiveVariance(f"variance must be positive, got {sigma2}")
    x = grid.points
    values = np.exp(-((x - mu) ** 2) / (2.0 * sigma2)) / math.sqrt(2.0 * math.pi * sigma2)
    return GridDistribution(grid, values)


def mean(f: GridDistribution) -> float:
    return float(np.dot(_weights(f), f.grid.points))


def moment(f: GridDistribution, p: int, centered: bool = False) -> float:
    w = _weights(f)
    x = f.grid.points
    if centered:
        x = x - np.dot(w, x)
    return float(np.dot(w, x**p))


def variance(f: GridDistribution) -> float:
    return moment(f, 2, centered=True)


def exp_moment(f: GridDistribution, theta: float) -> float:
    w = _weights(f)
    x = f.grid.points
    pos = w > 0
    log_terms = theta * x[pos] ** 2 + np.log(w[pos])
    if log_terms.size and log_terms.max() > _LOG_MAX:
        raise Overflow(f"exponential moment with theta={theta} overflows on this grid")
    return float(np.sum(np.exp(log_terms)))


def kl_divergence(p: GridDistribution, q: GridDistribution) -> float:
    """Relative entropy of ``p`` with respect to ``q`` after normalizing both."""
    _check_same_grid(p, q)
    wp = _weights(p)
    wq = _weights(q)
    pos = wp > 0
    if np.any(wq[pos] == 0):
        raise SupportViolation("p has mass where q vanishes")
    return float(np.sum(wp[pos] * np.log(wp[pos] / wq[pos])))


def kl_to_gaussian(p: GridDistribution, mu: float, sigma2: float) -> float:
    """KL from ``p`` to the grid-normalized Gaussian, with the Gaussian kept in log space.

    Far tails of the reference underflow in double precision even where ``p``
    still has (tiny) mass; working with log q avoids a spurious infinity.
    """
    if not sigma2 > 0:
        raise NonPositiveVariance(f"variance must be positive, got {sigma2}")
    wp = _weights(p)
    x = p.grid.points
    log_q = -((x - mu) ** 2) / (2.0 * sigma2)
    log_q -= logsumexp(log_q[:-1] + math.log(p.grid.dx))
    pos = wp > 0
    return float(np.sum(wp[pos] * (np.log(wp[pos] / p.grid.dx) - log_q[pos])))


def quantile_function(f: GridDistribution, q: np.ndarray) -> np.ndarray:
    """Generalized inverse of the piecewise-linear CDF of ``normalize(f)``."""
    w = _weights(f)[:-1]
    cdf = np.concatenate(([0.0], np.cumsum(w)))
    cdf /= cdf[-1]
    # segment k covers (cdf[k], cdf[k+1]]; empty segments are never selected
    k = np.searchsorted(cdf, q, side="left") - 1
    k = np.clip(k, 0, len(w) - 1)
    lo = cdf[k]
    width = cdf[k + 1] - lo
    frac = np.divide(q - lo, width, out=np.zeros_like(q), where=width > 0)
    return f.grid.x_min + f.grid.dx * (k + np.clip(frac, 0.0, 1.0))


def wasserstein2(p: GridDistribution, q: GridDistribution, mesh_factor: int = 4) -> float:
    _check_same_grid(p, q)
    m = mesh_factor * p.grid.n_points
    levels = (np.arange(m) + 0.5) / m
    diff = quantile_function(p, levels) - quantile_function(q, levels)
    return math.sqrt(float(np.mean(diff**2)))


def write_csv(f: GridDistribution, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "value"])
        for x, v in zip(f.grid.points, f.values):
            writer.writerow([f"{x:.17g}", f"{v:.17g}"])


def read_csv(path: str | Path) -> GridDistribution:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x, values = data[:, 0], data[:, 1]
    if len(x) < 2:
        raise ValueError(f"{path}: need at least two grid points")
    dx = float(np.median(np.diff(x)))
    grid = Grid(float(x[0]), float(x[-1]), dx)
    if grid.n_points != len(x) or not np.allclose(np.diff(x), dx, rtol=1e-6, atol=0):
        raise ValueError(f"{path}: grid points are not uniformly spaced")
    return GridDistribution(grid, values)
