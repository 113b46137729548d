import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from infinitesimal.diagnostics import (
    BoundCheck,
    dirac_selection_gap,
    exp_moment_constants,
    fit_geometric_rate,
    verify_moment_bounds,
    verify_w2_contraction,
)
from infinitesimal.errors import (
    InsufficientPoints,
    InvalidGeometry,
    NonPositiveError,
    ParameterRangeError,
)
from infinitesimal.grid import Grid, gaussian_profile

from conftest import bump_mixture

grid = Grid(-20.0, 20.0, 0.005)


@given(st.floats(0.05, 0.99), st.floats(-5, 5))
def test_fit_exact_geometric(r, c):
    errs = [(n, math.exp(c) * r**n) for n in range(30)]
    fit = fit_geometric_rate(errs, (0, 29))
    assert fit.rate == pytest.approx(r, rel=1e-10)
    assert fit.log_intercept == pytest.approx(c, abs=1e-8)
    assert fit.residual_rms < 1e-10


def test_fit_window_is_inclusive():
    errs = [(n, 0.5**n if n < 10 else 0.9**n) for n in range(30)]
    assert fit_geometric_rate(errs, (0, 9)).rate == pytest.approx(0.5)
    assert fit_geometric_rate(errs, (0, 9)).window == (0, 9)
    assert fit_geometric_rate(errs, (12, 29)).rate == pytest.approx(0.9)


def test_auto_window_drops_transient_and_floor():
    n = np.arange(60)
    eps = 0.3**n + 5 * 0.9**n * (n < 3)
    eps = np.maximum(eps, 1e-17)
    fit = fit_geometric_rate(np.column_stack([n, eps]))
    assert fit.rate == pytest.approx(0.3, rel=1e-6)
    assert fit.window[0] >= 2 and fit.window[1] <= 33


def test_auto_window_ignores_plateau():
    # a geometric phase followed by a quadrature plateau
    n = np.arange(40)
    eps = 0.6**n + 1e-6
    fit = fit_geometric_rate(np.column_stack([n, eps]))
    assert fit.rate == pytest.approx(0.6, abs=0.01)


def test_fit_errors():
    with pytest.raises(InsufficientPoints):
        fit_geometric_rate([(0, 1.0), (1, 0.5)], (0, 1))
    with pytest.raises(InsufficientPoints):
        fit_geometric_rate([(n, 0.5**n) for n in range(10)], (20, 30))
    with pytest.raises(NonPositiveError):
        fit_geometric_rate([(n, 0.5**n if n != 3 else 0.0) for n in range(10)], (0, 9))
    with pytest.raises(ValueError):
        fit_geometric_rate([1.0, 2.0])


def _atoms_w2(xa, wa, xb, wb):
    cost = (np.subtract.outer(xa, xb) ** 2).ravel()
    na, nb = len(xa), len(xb)
    A = np.vstack([np.kron(np.eye(na), np.ones(nb)), np.kron(np.ones(na), np.eye(nb))])
    res = linprog(cost, A_eq=A, b_eq=np.r_[wa, wb], bounds=(0, None), method="highs")
    return math.sqrt(res.fun)


def _selected(x, alpha):
    w = np.exp(-0.5 * alpha * x**2)
    return w / w.sum()


@pytest.mark.parametrize("h,eps,alpha", [(2.0, 0.1, 1.0), (1.0, 0.5, 0.3), (3.0, 0.01, 2.0)])
def test_dirac_gap_against_transport(h, eps, alpha):
    xa, xb = np.array([-h, h]), np.array([-h + eps, h + eps])
    want = _atoms_w2(xa, _selected(xa, alpha), xb, _selected(xb, alpha))
    w_in, w_out = dirac_selection_gap(h, eps, alpha)
    assert w_in == eps
    assert w_out == pytest.approx(want, rel=1e-9)


def test_dirac_gap_frozen_value():
    assert dirac_selection_gap(2.0, 0.1, 1.0)[1] == pytest.approx(1.2288419075329708, rel=1e-14)


def test_dirac_gap_square_root_blowup():
    h, alpha = 2.0, 1.0
    eps = np.logspace(-8, -4, 9)
    out = np.array([dirac_selection_gap(h, e, alpha)[1] for e in eps])
    slope = np.polyfit(np.log(eps), np.log(out), 1)[0]
    assert slope == pytest.approx(0.5, abs=0.02)
    assert out[0] == pytest.approx(h * math.sqrt(2 * alpha * h * eps[0]), rel=1e-3)


def test_dirac_gap_no_selection():
    assert dirac_selection_gap(1.0, 0.2, 0.0) == (0.2, pytest.approx(0.2))


@pytest.mark.parametrize("h,eps", [(1.0, 0.0), (1.0, 1.0), (1.0, -0.1)])
def test_dirac_gap_geometry(h, eps):
    with pytest.raises(InvalidGeometry):
        dirac_selection_gap(h, eps, 1.0)


def test_w2_contraction_gaussians():
    c = verify_w2_contraction(gaussian_profile(grid, 0, 1), gaussian_profile(grid, 0, 4))
    assert c.kind == "contraction" and c.ok
    assert c.lhs == pytest.approx((math.sqrt(1.5) - math.sqrt(3)) ** 2, abs=1e-4)
    assert c.rhs == pytest.approx(0.5, abs=1e-4)


def test_w2_non_expansive_translation():
    p = bump_mixture(grid, [-1, 1], [0.5, 0.5], [1, 1])
    c = verify_w2_contraction(p, bump_mixture(grid, [-1, 1], [0.5, 0.5], [1, 1], shift=1.0))
    assert c.kind == "non-expansive" and c.ok
    # B commutes with translations, so a pure shift is not contracted
    assert c.lhs == pytest.approx(c.rhs, abs=1e-3)


def test_bound_check_row():
    b = BoundCheck("q", 1.0, 2.5)
    assert b.ok and b.slack == 1.5
    assert b.row() == ["q", "1", "2.5", "1.5", "True"]


def test_exp_moment_constants():
    assert exp_moment_constants(1.0, 0.0, 0.3) == (1.0, 1.0)
    C, delta = exp_moment_constants(1.0, 0.2, 1.0)
    K = 0.2 / (2 * 1.6 * 0.6)
    assert delta == pytest.approx(1 - K / 2)
    assert C == pytest.approx((2 / 1.6) ** 0.5 / delta)
    with pytest.raises(ParameterRangeError):
        exp_moment_constants(1.0, 0.6, 1.0)
    with pytest.raises(ParameterRangeError):
        exp_moment_constants(1.0, 0.2, K / 4)


@pytest.mark.parametrize("alpha", [0.1, 0.4, 1.0])
def test_moment_bounds_on_mixtures(alpha):
    f = bump_mixture(grid, [-3, 0, 4], [0.5, 1.0, 2.0], [1, 2, 1])
    eta = 0.5 * (1 / (2 * (1 + alpha) ** 2) + 1)
    r = verify_moment_bounds(f, alpha, eta, alpha / 4, 1.0)
    assert not r.violations
    assert [c.check for c in r.checks] == ["quadratic_moment", "exponential_moment"]
