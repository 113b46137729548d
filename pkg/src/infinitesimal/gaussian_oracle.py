"""Closed-form Gaussian dynamics under quadratic selection.

Gaussians are mapped to Gaussians by T, so a (mass, mean, variance) triple
evolves exactly. These formulas are the reference for every grid computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EtaOutOfRange, InvalidLowerSeed, NegativeAlpha, NonPositiveVariance


@dataclass(frozen=True)
class GaussianState:
    mass: float
    mean: np.ndarray | float
    variance: float
    dim: int = 1

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not self.variance > 0:
            raise NonPositiveVariance(f"variance must be positive, got {self.variance}")
        mu = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        if mu.shape != (self.dim,):
            raise ValueError(f"mean has shape {mu.shape}, expected ({self.dim},)")

    @property
    def mu(self) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.mean, dtype=np.float64))

    @property
    def mean_scalar(self) -> float:
        return float(self.mu[0])


@dataclass(frozen=True)
class Eigenpair:
    alpha: float
    dim: int
    lam: float
    sigma2: float
    k_bar: float
    r_bar: float
    # at alpha = 0 every translate of the eigenprofile is also an eigenprofile
    unique: bool = True

    def row(self) -> list[str]:
        return [repr(self.alpha), str(self.dim)] + [
            f"{v:.17g}" for v in (self.lam, self.sigma2, self.k_bar, self.r_bar)
        ]


def _check_alpha(alpha: float) -> None:
    if alpha < 0 or math.isnan(alpha):
        raise NegativeAlpha(f"alpha must be non-negative, got {alpha}")


def eigenpair(alpha: float, dim: int = 1) -> Eigenpair:
    _check_alpha(alpha)
    s = math.sqrt((1 + 2 * alpha) ** 2 + 8 * alpha)
    if alpha == 0:
        sigma2 = 2.0
    else:
        # rationalized form of (s - (1+2a)) / (2a), stable for small alpha
        sigma2 = 4.0 / (s + 1 + 2 * alpha)
    lam = (1 + alpha * (1 + sigma2 / 2)) ** (-dim / 2)
    k_bar = ((3 + 2 * alpha) - s) / 4
    r_bar = 8.0 / ((2 * alpha + 3) + s) ** 2
    return Eigenpair(alpha, dim, lam, sigma2, k_bar, r_bar, unique=alpha > 0)


def evaluate_on_gaussian(state: GaussianState, alpha: float) -> GaussianState:
    """Image of m·G_{μ,σ²} under T, again a weighted Gaussian."""
    _check_alpha(alpha)
    d = state.dim
    D = 1 + alpha * (1 + state.variance / 2)
    mu = state.mu
    mass = state.mass * math.exp(-0.5 * alpha * float(mu @ mu) / D) / D ** (d / 2)
    new_mu = mu / D
    return GaussianState(
        mass,
        new_mu if d > 1 else float(new_mu[0]),
        (1 + state.variance / 2) / D,
        d,
    )


def gaussian_trajectory(state0: GaussianState, alpha: float, n: int) -> list[GaussianState]:
    """States 0..n, n+1 entries."""
    out = [state0]
    for _ in range(n):
        out.append(evaluate_on_gaussian(out[-1], alpha))
    return out


def gaussian_kl(mu: float, sigma2: float, ref_sigma2: float, dim: int = 1) -> float:
    """KL from G_{μ,σ²} to the centred reference G_{0,σ̄²}."""
    r = sigma2 / ref_sigma2
    return mu**2 / (2 * ref_sigma2) + 0.5 * dim * (r - 1 - math.log(r))


def coefficients(alpha: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Return (k, kappa): k[m-1] = k_m for m = 1..n and kappa[m] for m = 0..n."""
    _check_alpha(alpha)
    if n < 1:
        raise ValueError("need n >= 1")
    k = np.empty(n)
    k[0] = 1 / (2 * (1 + alpha))
    for m in range(1, n):
        k[m] = 1 / (3 + 2 * alpha - 2 * k[m - 1])
    kappa = np.concatenate(([1.0], np.cumprod(k)))
    return k, kappa


def tail_variance_barriers(
    alpha: float, n: int, sigma_lower_1: float
) -> tuple[np.ndarray, np.ndarray]:
    """Upper and lower variance barriers for generations 1..n."""
    if not alpha > 0:
        raise NegativeAlpha("tail barriers need alpha > 0")
    if not 0 < sigma_lower_1 < 1 / (1 + alpha):
        raise InvalidLowerSeed(
            f"lower seed must lie in (0, {1 / (1 + alpha)}), got {sigma_lower_1}"
        )
    upper = np.empty(n)
    lower = np.empty(n)
    upper[0] = 1 / alpha
    lower[0] = sigma_lower_1
    for i in range(1, n):
        upper[i] = 1 / (alpha + 1 / (1 + upper[i - 1] / 2))
        lower[i] = 1 / (alpha + 1 / (1 + lower[i - 1] / 2))
    return upper, lower


def moment_gamma(alpha: float, eta: float) -> float:
    """Symmetric choice gamma = delta with (1-γ)(1-δ) = 1/(2η(1+α)²)."""
    lo = 1 / (2 * (1 + alpha) ** 2)
    if not alpha > 0:
        raise NegativeAlpha("moment bounds need alpha > 0")
    if not lo < eta < 1:
        raise EtaOutOfRange(f"eta must lie in ({lo}, 1), got {eta}")
    return 1 - (2 * eta * (1 + alpha) ** 2) ** -0.5


def moment_bound_constants(alpha: float, eta: float) -> float:
    """Additive constant M in  ∫x² S[F] ≤ M + η ∫x² F/‖F‖."""
    g = moment_gamma(alpha, eta)
    return 1 / (1 + alpha) + 2 / (math.e * g * g) / (alpha * (1 + alpha))
