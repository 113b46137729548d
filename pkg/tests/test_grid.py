import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from infinitesimal.errors import (
    GridMismatch,
    NonPositiveVariance,
    Overflow,
    SupportViolation,
    ZeroMass,
)
from infinitesimal.grid import (
    Grid,
    GridDistribution,
    exp_moment,
    gaussian_profile,
    kl_divergence,
    kl_to_gaussian,
    mass,
    mean,
    moment,
    normalize,
    read_csv,
    variance,
    wasserstein2,
    write_csv,
)
from infinitesimal.initial import REFERENCE_GRID, FOUR_BLOCK_STEP

from conftest import bump_mixture

unit = Grid(0.0, 1.0, 0.1)
wide = Grid(-20.0, 20.0, 0.01)


def mixtures(grid):
    """Random positive mixtures of two to four bumps."""
    bump = st.tuples(
        st.floats(-6, 6), st.floats(0.3, 3.0), st.floats(0.1, 1.0)
    )
    return st.lists(bump, min_size=2, max_size=4).map(
        lambda bs: bump_mixture(grid, *zip(*bs))
    )


def test_grid_points():
    g = Grid(-1.0, 1.0, 0.25)
    assert g.n_points == 9
    assert np.allclose(g.points, np.linspace(-1, 1, 9))


@pytest.mark.parametrize("kw", [dict(x_min=0, x_max=1, dx=0), dict(x_min=1, x_max=0, dx=0.1)])
def test_grid_rejects_bad_geometry(kw):
    with pytest.raises(ValueError):
        Grid(**kw)


def test_mass_unit_box():
    assert mass(GridDistribution(unit, np.ones(11))) == pytest.approx(1.0, abs=1e-15)


def test_mass_zero():
    assert mass(GridDistribution(unit, np.zeros(11))) == 0.0


def test_mass_step_datum():
    raw = FOUR_BLOCK_STEP.profile(REFERENCE_GRID, normalized=False)
    assert mass(raw) == pytest.approx(870.0, abs=0.2)


def test_normalize_constant():
    f = normalize(GridDistribution(unit, np.full(11, 2.0)))
    assert np.allclose(f.values, 1.0)


def test_normalize_step_datum_heights():
    raw = FOUR_BLOCK_STEP.profile(REFERENCE_GRID, normalized=False)
    f = normalize(raw)
    assert f.at(-5.0) == pytest.approx(30 / 870, rel=1e-3)


def test_normalize_zero_raises():
    with pytest.raises(ZeroMass):
        normalize(GridDistribution(unit, np.zeros(11)))


@given(mixtures(wide), st.floats(1e-250, 1e250))
def test_normalize_unit_mass_and_idempotent(f, c):
    g = normalize(f.scaled(c))
    assert mass(g) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(normalize(g).values, g.values, rtol=1e-14)


def test_gaussian_mode():
    g = gaussian_profile(Grid(-1, 1, 0.5), 0.0, 1.0)
    assert g.at(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))


def test_gaussian_mass_on_wide_grid():
    assert mass(gaussian_profile(Grid(-13, 17, 0.001), 2.0, 2.25)) == pytest.approx(1, abs=1e-9)


def test_gaussian_rejects_bad_variance():
    with pytest.raises(NonPositiveVariance):
        gaussian_profile(unit, 0.0, 0.0)


def test_symmetric_mean():
    f = gaussian_profile(wide, 0.0, 1.0)
    assert abs(moment(f, 1)) <= wide.dx


def test_gaussian_variance_on_reference_grid():
    f = gaussian_profile(REFERENCE_GRID, 0.0, 2.0)
    assert moment(f, 2, centered=True) == pytest.approx(2.0, abs=1e-6)


def test_step_second_moment_closed_form():
    # the left rule carries an O(dx) error, so this runs on a fine grid
    fine = Grid(-15.0, 60.0, 1e-5)
    exact = 433639 / 348
    assert moment(FOUR_BLOCK_STEP.profile(fine), 2) == pytest.approx(exact, abs=1e-3)


def test_step_second_moment_left_rule_bias():
    # predicted left-rule defect: -(dx/2) Σ h (b² - a²) / Z
    d = FOUR_BLOCK_STEP
    bias = -0.5 * REFERENCE_GRID.dx * sum(
        h * (b * b - a * a) for (a, b), h in zip(d.intervals, d.heights)
    ) / d.total
    got = moment(d.profile(REFERENCE_GRID), 2) - d.moment(2)
    assert got == pytest.approx(bias, abs=1e-5)


def test_exp_moment_theta_zero():
    assert exp_moment(gaussian_profile(wide, 1.0, 2.0), 0.0) == pytest.approx(1.0)


@pytest.mark.parametrize("s2,theta", [(1.0, 0.2), (2.0, 0.1), (0.5, 0.9)])
def test_exp_moment_gaussian(s2, theta):
    got = exp_moment(gaussian_profile(wide, 0.0, s2), theta)
    assert got == pytest.approx((1 - 2 * theta * s2) ** -0.5, abs=1e-5)


def test_exp_moment_shifted_gaussian():
    got = exp_moment(gaussian_profile(wide, 1.0, 1.0), 0.25)
    assert got == pytest.approx(math.exp(0.5) / math.sqrt(0.5), abs=1e-5)
    assert got == pytest.approx(2.3316, abs=1e-4)


def test_exp_moment_overflow():
    with pytest.raises(Overflow):
        exp_moment(GridDistribution(wide, np.ones(wide.n_points)), 5.0)


def test_kl_self_is_zero():
    p = gaussian_profile(wide, 0.3, 1.7)
    assert abs(kl_divergence(p, p)) <= 1e-10


@pytest.mark.parametrize(
    "p,q,expected",
    [
        ((1.0, 2.0), (0.0, 2.0), 0.25),
        ((0.0, 1.0), (0.0, 2.0), 0.5 * (0.5 - 1) - 0.5 * math.log(0.5)),
    ],
)
def test_kl_gaussian_closed_form(p, q, expected):
    got = kl_divergence(gaussian_profile(wide, *p), gaussian_profile(wide, *q))
    assert got == pytest.approx(expected, abs=1e-4)
    assert kl_to_gaussian(gaussian_profile(wide, *p), *q) == pytest.approx(expected, abs=1e-4)


def test_kl_matches_log_space_version():
    p = bump_mixture(wide, [-1, 2], [0.5, 1.0], [1, 2])
    q = gaussian_profile(wide, 0.5, 3.0)
    assert kl_to_gaussian(p, 0.5, 3.0) == pytest.approx(kl_divergence(p, q), rel=1e-10)


def test_kl_support_violation():
    p = gaussian_profile(wide, 0, 1)
    q = GridDistribution(wide, np.where(wide.points > 0, 1.0, 0.0))
    with pytest.raises(SupportViolation):
        kl_divergence(p, q)


def test_kl_grid_mismatch():
    with pytest.raises(GridMismatch):
        kl_divergence(gaussian_profile(wide, 0, 1), gaussian_profile(Grid(-20, 20, 0.02), 0, 1))


@given(mixtures(wide), mixtures(wide))
def test_gibbs_inequality(p, q):
    assert kl_divergence(p, q) >= -1e-10


def test_w2_identity():
    p = bump_mixture(wide, [-2, 1], [0.4, 1.2], [1, 3])
    assert wasserstein2(p, p) <= 1e-6


@pytest.mark.parametrize("c", [0.5, 1.37, -3.0])
def test_w2_translation(c):
    p = bump_mixture(wide, [-1, 1], [0.5, 0.8], [1, 2])
    q = bump_mixture(wide, [-1, 1], [0.5, 0.8], [1, 2], shift=c)
    assert wasserstein2(p, q) == pytest.approx(abs(c), abs=1e-3)


def test_w2_gaussians_closed_form():
    got = wasserstein2(gaussian_profile(wide, 0, 1), gaussian_profile(wide, 0, 4))
    assert got == pytest.approx(1.0, abs=1e-3)


def _lp_w2(p: GridDistribution, q: GridDistribution) -> float:
    """Brute-force discrete optimal transport between the left-rule atoms."""
    x = p.grid.points[:-1]
    a = p.values[:-1] / p.values[:-1].sum()
    b = q.values[:-1] / q.values[:-1].sum()
    n = len(x)
    cost = (x[:, None] - x[None, :]) ** 2
    rows = np.kron(np.eye(n), np.ones(n))
    cols = np.kron(np.ones(n), np.eye(n))
    res = linprog(
        cost.ravel(), A_eq=np.vstack([rows, cols]), b_eq=np.concatenate([a, b]),
        bounds=(0, None), method="highs",
    )
    return math.sqrt(res.fun)


def test_w2_against_transport_solver():
    coarse = Grid(-10.0, 10.0, 20 / 199)
    assert coarse.n_points == 200
    p, q = gaussian_profile(coarse, 0, 1), gaussian_profile(coarse, 0, 4)
    # atoms versus piecewise-constant cells differ at order dx
    assert wasserstein2(p, q) == pytest.approx(_lp_w2(p, q), abs=coarse.dx)
    assert _lp_w2(p, q) == pytest.approx(1.0, abs=coarse.dx)


@given(mixtures(wide), mixtures(wide), mixtures(wide))
def test_w2_metric_axioms(p, q, r):
    pq, qp = wasserstein2(p, q), wasserstein2(q, p)
    assert pq == pytest.approx(qp, abs=1e-6)
    assert pq <= wasserstein2(p, r) + wasserstein2(r, q) + 1e-6


@pytest.mark.parametrize("mu,s2", [(0.0, 1.0), (1.5, 0.5), (-2.0, 3.0)])
def test_gaussian_pairs_match_closed_forms(mu, s2):
    p, q = gaussian_profile(wide, mu, s2), gaussian_profile(wide, 0.0, 2.0)
    w2 = math.sqrt(mu**2 + (math.sqrt(s2) - math.sqrt(2)) ** 2)
    kl = mu**2 / 4 + 0.5 * (s2 / 2 - 1) - 0.5 * math.log(s2 / 2)
    assert wasserstein2(p, q) == pytest.approx(w2, abs=1e-3)
    assert kl_divergence(p, q) == pytest.approx(kl, abs=1e-3)


def test_csv_round_trip(tmp_path):
    f = bump_mixture(Grid(-3, 3, 0.1), [0.0], [1.0], [1.0])
    write_csv(f, tmp_path / "f.csv")
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "x,value"
    g = read_csv(tmp_path / "f.csv")
    assert g.grid.n_points == f.grid.n_points
    assert np.array_equal(g.values, f.values)


def test_values_are_read_only():
    f = gaussian_profile(unit, 0, 1)
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_rejects_negative_values():
    with pytest.raises(ValueError):
        GridDistribution(unit, -np.ones(11))


def test_variance_and_mean_helpers():
    f = gaussian_profile(wide, 1.25, 0.8)
    assert mean(f) == pytest.approx(1.25, abs=1e-6)
    assert variance(f) == pytest.approx(0.8, abs=1e-6)
