"""Rate fitting and inequality checks for the grid solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientPoints, InvalidGeometry, NonPositiveError, ParameterRangeError
from .gaussian_oracle import moment_bound_constants
from .grid import GridDistribution, exp_moment, mean, moment, wasserstein2
from .operators import ModelParams, mixing_B, normalized_step_S

MIN_FIT_POINTS = 5
SLOPE_TOL = 0.05
NOISE_FACTOR = 1e3
MEAN_TOL = 1e-8


@dataclass(frozen=True)
class RateFit:
    rate: float
    log_intercept: float
    window: tuple[int, int]
    residual_rms: float


def _trim_window(n: np.ndarray, eps: np.ndarray) -> tuple[int, int]:
    """Index range [lo, hi) left after removing the transient and the noise floor."""
    floor = NOISE_FACTOR * np.finfo(float).eps * np.max(eps)
    above = np.nonzero(eps >= floor)[0]
    hi = int(above[-1]) + 1 if above.size else 0
    if hi < MIN_FIT_POINTS:
        raise InsufficientPoints(f"only {hi} points above the noise floor")
    e = eps[:hi]
    if np.any(e <= 0):
        raise NonPositiveError("non-positive error inside the fit window")
    slopes = np.diff(np.log(e)) / np.diff(n[:hi])
    # longest run of local slopes within SLOPE_TOL of the run's mean; this drops
    # the transient and any plateau left by a quadrature floor. Later runs win ties.
    best = (hi - MIN_FIT_POINTS, hi)
    best_len = 0
    for i in range(len(slopes)):
        lo_s = hi_s = total = 0.0
        for j in range(i, len(slopes)):
            s = slopes[j]
            lo_s = s if j == i else min(lo_s, s)
            hi_s = s if j == i else max(hi_s, s)
            total += s
            m = total / (j - i + 1)
            if max(hi_s - m, m - lo_s) > SLOPE_TOL * abs(m):
                break
            # slopes i..j join points i..j+1
            if j - i + 2 >= best_len:
                best, best_len = (i, j + 2), j - i + 2
    if best_len < MIN_FIT_POINTS:
        return max(0, hi - MIN_FIT_POINTS), hi
    return best


def fit_geometric_rate(errors, window: tuple[int, int] | None = None) -> RateFit:
    """Least-squares fit of log ε_n = a + n·log(rate).

    ``errors`` is a sequence of (n, ε_n) pairs. ``window`` = (n_lo, n_hi),
    inclusive, restricts the fit; otherwise the window is chosen automatically.
    """
    arr = np.asarray(errors, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("errors must be a sequence of (n, eps) pairs")
    n, eps = arr[:, 0], arr[:, 1]
    if window is None:
        lo, hi = _trim_window(n, eps)
    else:
        sel = np.nonzero((n >= window[0]) & (n <= window[1]))[0]
        if sel.size == 0:
            raise InsufficientPoints(f"window {window} is empty")
        lo, hi = int(sel[0]), int(sel[-1]) + 1
    n, eps = n[lo:hi], eps[lo:hi]
    if len(n) < MIN_FIT_POINTS:
        raise InsufficientPoints(f"need {MIN_FIT_POINTS} points, got {len(n)}")
    if np.any(eps <= 0):
        raise NonPositiveError("non-positive error inside the fit window")
    slope, intercept = np.polyfit(n, np.log(eps), 1)
    resid = np.log(eps) - (intercept + slope * n)
    return RateFit(
        float(math.exp(slope)),
        float(intercept),
        (int(n[0]), int(n[-1])),
        float(np.sqrt(np.mean(resid**2))),
    )


def dirac_selection_gap(h: float, eps: float, alpha: float) -> tuple[float, float]:
    """W₂ before and after selection for ½(δ_{−h}+δ_h) against its ε-translate."""
    if not 0 < eps < h:
        raise InvalidGeometry(f"need 0 < eps < h, got eps={eps}, h={h}")
    if alpha < 0:
        raise ParameterRangeError("alpha must be non-negative")
    # ½ − p_ε with p_ε = 1/(1 + e^{2αhε}), written to stay accurate for tiny ε
    half_minus_p = 0.5 * math.tanh(alpha * h * eps)
    w2_out = math.sqrt(eps**2 + 4 * h * (h - eps) * half_minus_p)
    return eps, w2_out


@dataclass(frozen=True)
class ContractionCheck:
    lhs: float
    rhs: float
    ok: bool
    # "contraction" (equal means, squared distances) or "non-expansive"
    kind: str


def verify_w2_contraction(
    p: GridDistribution, q: GridDistribution, mean_tol: float = MEAN_TOL
) -> ContractionCheck:
    bp, bq = mixing_B(p), mixing_B(q)
    if abs(mean(p) - mean(q)) <= mean_tol:
        lhs = wasserstein2(bp, bq) ** 2
        rhs = 0.5 * wasserstein2(p, q) ** 2
        return ContractionCheck(lhs, rhs, lhs <= rhs + 1e-6, "contraction")
    lhs = wasserstein2(bp, bq)
    rhs = wasserstein2(p, q)
    return ContractionCheck(lhs, rhs, lhs <= rhs + 1e-6, "non-expansive")


@dataclass(frozen=True)
class BoundCheck:
    check: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs

    def row(self) -> list[str]:
        return [self.check, f"{self.lhs:.17g}", f"{self.rhs:.17g}", f"{self.slack:.17g}", str(self.ok)]


@dataclass(frozen=True)
class MomentBoundReport:
    alpha: float
    eta: float
    theta: float
    chi: float
    M: float
    C: float
    delta: float
    checks: list[BoundCheck] = field(default_factory=list)

    @property
    def violations(self) -> list[BoundCheck]:
        return [c for c in self.checks if not c.ok]


def exp_moment_constants(alpha: float, theta: float, chi: float, dim: int = 1) -> tuple[float, float]:
    """(C, δ) with δ solved so that the exponent coefficient equals ``chi``."""
    if not 0 <= theta < alpha / 2:
        raise ParameterRangeError(f"need 0 <= theta < alpha/2, got theta={theta}")
    c0 = ((1 + alpha) / (1 + alpha - 2 * theta)) ** (dim / 2)
    K = alpha * theta / ((1 + alpha) * (1 + alpha - 2 * theta) * (alpha - 2 * theta))
    if theta == 0:
        return c0, 1.0
    if not chi > K / 2:
        raise ParameterRangeError(f"need chi > {K / 2}, got {chi}")
    delta = 1 - K / (2 * chi)
    return c0 * max(1 / delta, 1.0), delta


def verify_moment_bounds(
    f: GridDistribution, alpha: float, eta: float, theta: float, chi: float
) -> MomentBoundReport:
    M = moment_bound_constants(alpha, eta)
    C, delta = exp_moment_constants(alpha, theta, chi)
    s = normalized_step_S(f, ModelParams(alpha))
    q = moment(f, 2)
    quad = BoundCheck("quadratic_moment", moment(s, 2), M + eta * q)
    try:
        growth = math.exp(chi * q)
    except OverflowError:
        growth = math.inf
    expo = BoundCheck("exponential_moment", exp_moment(s, theta), C * (1 + growth))
    return MomentBoundReport(alpha, eta, theta, chi, M, C, delta, [quad, expo])
