import math

import numpy as np
import pytest
import scipy.integrate
import scipy.stats

from twistdist import (
    CharFnGrid,
    ComplexSampleSet,
    FamilyConfig,
    SADIKOVA_CONSTANT,
    berry_esseen_bound,
    berry_esseen_convergence,
    choose_inversion_box,
    discrepancy,
    empirical_char_grid,
    family_sweep,
    hat_phi,
    invert_density,
    mc_value_set,
    model_char_grid,
    mp_factor,
    phi_empirical,
    phi_rand,
    phi_rand_tail_estimate,
    prime_sum_diagnostics,
    small_values,
)
from twistdist.coeffs import SatakeProvider
from twistdist.errors import (
    DimensionMismatchError,
    EmptySampleError,
    GridCoverageError,
    InsufficientDecayError,
    SingularFactorError,
)

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _samples(values, dimension=2, **meta):
    return ComplexSampleSet(np.asarray(values, dtype=np.complex128),
                            dimension=dimension, meta=meta)


# --------------------------------------------------------------------------
# local factors and the model characteristic function

def test_mp_factor_is_probability_total_at_origin(trivial, degree2):
    for prov in (trivial, degree2):
        for p in (2, 3, 13):
            assert mp_factor(p, 0.0, 0.0, 0.0, prov) == pytest.approx(1.0, abs=1e-14)


def test_mp_factor_against_monte_carlo(trivial):
    # E[exp(i u Re W_2)] with W_2 the p = 2 term of the product form
    p, u = 2, 1.0
    exact = mp_factor(p, u, 0.0, 0.0, trivial)
    rng = np.random.Generator(np.random.Philox(key=99))
    draws = rng.random(10**6)
    x = np.zeros(len(draws))
    x[draws < 2 / 3] = -1.0
    x[draws < 1 / 3] = 1.0
    w = np.where(
        x == 0.0, 0.0, math.log(p) * x / (p - x)
    )  # alpha = 1: log p * x/(p - x)
    emp = np.exp(1j * u * w).mean()
    sigma = float(np.std(np.exp(1j * u * w).real)) / math.sqrt(len(draws))
    assert abs(exact - emp) < 6.0 * sigma
    assert abs(exact) <= 1.0 + 1e-12


def test_mp_factor_conjugate_symmetry(trivial, degree2):
    for prov in (trivial, degree2):
        for (u, v) in [(1.3, -0.4), (0.0, 2.0), (5.0, 5.0)]:
            a = mp_factor(3, -u, -v, 0.4, prov)
            b = mp_factor(3, u, v, 0.4, prov)
            assert a == pytest.approx(b.conjugate(), abs=1e-15)


def test_mp_factor_magnitude_bounded(trivial, degree2):
    rng = np.random.Generator(np.random.Philox(key=3))
    for prov in (trivial, degree2):
        for _ in range(50):
            u, v = rng.normal(size=2) * 10
            p = int(rng.choice([2, 3, 5, 11, 61]))
            assert abs(mp_factor(p, u, v, 0.2, prov)) <= 1.0 + 1e-12


def test_mp_factor_singular_alpha():
    bad = SatakeProvider(
        degree=1, theta=0.9, self_dual_twist=None, source="bad",
        table={2: (2.5 + 0j,)},
    )
    with pytest.raises(SingularFactorError):
        mp_factor(2, 1.0, 0.0, 0.0, bad)


def test_phi_rand_origin_and_bound(trivial):
    assert phi_rand(0.0, 0.0, 0.0, trivial, P=1000) == 1.0 + 0.0j
    for u in (0.5, 2.0, 7.0):
        assert abs(phi_rand(u, 0.3, 0.0, trivial, P=2000)) <= 1.0 + 1e-9


def test_phi_rand_decay(trivial):
    a3 = abs(phi_rand(3.0, 0.0, 0.0, trivial, P=10**5))
    a10 = abs(phi_rand(10.0, 0.0, 0.0, trivial, P=10**5))
    a30 = abs(phi_rand(30.0, 0.0, 0.0, trivial, P=10**5))
    assert a3 > a10 > a30


def test_phi_rand_cutoff_stability(trivial):
    us = np.linspace(-10.0, 10.0, 41)
    a = model_char_grid(0.0, trivial, us, P=10**5)
    b = model_char_grid(0.0, trivial, us, P=2 * 10**5)
    assert np.abs(a.values - b.values).max() < 1e-3


def test_phi_rand_tail_estimate_positive_and_small(trivial):
    est = phi_rand_tail_estimate(10.0, 0.0, trivial, P=10**5)
    assert 0.0 < est < 1e-2


def test_model_grid_validates(trivial):
    us = np.linspace(-6.0, 6.0, 25)
    grid2 = model_char_grid(0.4, trivial, us, us, P=2000)
    grid2.validate()
    grid1 = model_char_grid(0.0, trivial, us, P=2000)
    grid1.validate()
    assert grid1.value_at(0.0) == 1.0 + 0.0j
    assert grid2.meta["prime_cutoff"] == 2000


def test_model_grid_matches_pointwise_op(trivial):
    us = np.linspace(-4.0, 4.0, 9)
    grid = model_char_grid(0.3, trivial, us, us, P=500)
    for i in (0, 3, 8):
        for j in (1, 4, 7):
            direct = phi_rand(us[i], us[j], 0.3, trivial, P=500)
            assert grid.values[i, j] == pytest.approx(direct, abs=1e-12)


# --------------------------------------------------------------------------
# empirical characteristic functions

def test_phi_empirical_basics():
    s = _samples([0.0])
    for (u, v) in [(0.0, 0.0), (1.0, 2.0), (-3.0, 0.5)]:
        assert phi_empirical(s, u, v) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(EmptySampleError):
        phi_empirical(_samples([]), 1.0, 0.0)
    t = _samples([1 + 1j, 2 - 1j, 0.5])
    direct = np.mean(
        [np.exp(1j * (0.7 * w.real + 1.1 * w.imag)) for w in t.values]
    )
    assert phi_empirical(t, 0.7, 1.1) == pytest.approx(complex(direct), abs=1e-15)


def test_empirical_grid_matches_pointwise(trivial):
    draws = mc_value_set(50.0, 0.6, trivial, count=2000, seed=4)
    us = np.linspace(-5.0, 5.0, 11)
    grid = empirical_char_grid(draws, us, us)
    grid.validate()
    for i in (0, 5, 7):
        for j in (2, 5, 10):
            assert grid.values[i, j] == pytest.approx(
                phi_empirical(draws, us[i], us[j]), abs=1e-12
            )
    assert grid.value_at(0.0, 0.0) == 1.0 + 0.0j


def test_hat_phi_vanishes_on_axes_and_products(trivial):
    us = np.linspace(-4.0, 4.0, 17)
    draws = mc_value_set(50.0, 0.6, trivial, count=1000, seed=8)
    grid = empirical_char_grid(draws, us, us)
    for v in (-4.0, 0.0, 2.0):
        assert abs(hat_phi(grid, 0.0, v)) < 1e-12
        assert abs(hat_phi(grid, v, 0.0)) < 1e-12
    # product-form phi has identically zero hat
    g = np.exp(-us**2 / 2.0)
    prod_grid = CharFnGrid(us, us, np.outer(g, g), "model")
    for u in (1.0, -2.5):
        for v in (0.5, 3.0):
            assert abs(hat_phi(prod_grid, u, v)) < 1e-15


def test_hat_phi_two_point_hand_value():
    # values {1+i, -1-i}: phi(u,v) = cos(u+v)
    s = _samples([1 + 1j, -1 - 1j])
    us = np.array([-1.0, 0.0, 1.0])
    grid = empirical_char_grid(s, us, us)
    expected = math.cos(2.0) - math.cos(1.0) ** 2
    assert hat_phi(grid, 1.0, 1.0) == pytest.approx(expected, abs=1e-12)


# --------------------------------------------------------------------------
# Berry-Esseen evaluator

def _gaussian_grid(us, shift=0.0, rho=0.0):
    u = us[:, None]
    v = us[None, :]
    vals = np.exp(1j * shift * u) * np.exp(-(u**2 + 2 * rho * u * v + v**2) / 2.0)
    return CharFnGrid(us, us, vals, "model")


def test_bound_reduces_to_smoothing_term_when_equal(trivial):
    us = np.linspace(-8.0, 8.0, 65)
    draws = mc_value_set(50.0, 0.6, trivial, count=500, seed=2)
    f = empirical_char_grid(draws, us, us)
    for R, A1, A2 in [(8.0, 0.3, 0.4), (4.0, 1.0, 0.0)]:
        bound = berry_esseen_bound(f, f, R, A1, A2)
        assert bound == SADIKOVA_CONSTANT * 2.0 * (A1 + A2) / R
    assert berry_esseen_bound(f, f, 8.0, 0.0, 0.0) == 0.0


def test_bound_halves_when_r_doubles(trivial):
    us = np.linspace(-8.0, 8.0, 65)
    draws = mc_value_set(50.0, 0.6, trivial, count=500, seed=2)
    f = empirical_char_grid(draws, us, us)
    b1 = berry_esseen_bound(f, f, 4.0, 0.5, 0.5)
    b2 = berry_esseen_bound(f, f, 8.0, 0.5, 0.5)
    assert b2 == pytest.approx(b1 / 2.0, rel=1e-14)


def test_bound_requires_coverage(trivial):
    us = np.linspace(-2.0, 2.0, 17)
    draws = mc_value_set(50.0, 0.6, trivial, count=100, seed=2)
    f = empirical_char_grid(draws, us, us)
    with pytest.raises(GridCoverageError):
        berry_esseen_bound(f, f, 4.0, 0.1, 0.1)


def test_bound_mean_shift_gaussian_oracle():
    # mean-shifted standard normals: hats vanish, I3 vanishes, and
    # I2 = (2/pi) int e^{-u^2/2} |1 - e^{i d u}| / |u| du has a quadrature
    # oracle; the true sup-CDF distance is 2 Phi(d/2) - 1
    delta = 0.5
    us = np.linspace(-8.0, 8.0, 321)
    f = _gaussian_grid(us)
    g = _gaussian_grid(us, shift=delta)
    A = INV_SQRT_2PI  # sup of the shifted-normal marginal densities
    R = 8.0
    bound = berry_esseen_bound(f, g, R, A, A)
    smoothing = SADIKOVA_CONSTANT * 2.0 * (A + A) / R

    def integrand(u):
        return math.exp(-(u**2) / 2.0) * abs(1.0 - np.exp(1j * delta * u)) / abs(u)

    oracle, err = scipy.integrate.quad(integrand, -R, R, points=[0.0], limit=200)
    assert bound - smoothing == pytest.approx((2.0 / math.pi) * oracle, rel=2e-3)
    true_sup = 2.0 * scipy.stats.norm.cdf(delta / 2.0) - 1.0
    assert bound >= true_sup


def test_bound_correlated_gaussian_small_rho():
    # independent vs correlated normals: only the double integral survives
    # with I1 ~ |rho|/pi for small rho
    rho = 0.05
    us = np.linspace(-8.0, 8.0, 321)
    f = _gaussian_grid(us)
    g = _gaussian_grid(us, rho=rho)
    bound = berry_esseen_bound(f, g, 8.0, 0.0, 0.0)
    assert bound == pytest.approx(rho / math.pi, rel=0.02)


def test_bound_convergence_estimate(trivial):
    us = np.linspace(-8.0, 8.0, 321)
    f = _gaussian_grid(us)
    g = _gaussian_grid(us, shift=0.3)
    bound, change = berry_esseen_convergence(f, g, 8.0, INV_SQRT_2PI, INV_SQRT_2PI)
    assert change < 0.005
    assert bound > 0.0


def test_bound_validity_on_live_pipeline(trivial):
    # 2D configuration: family against the model; the evaluated bound must
    # dominate the measured corner discrepancy of matched sample sets
    cfg = FamilyConfig(N=10**4, t=0.3, provider=trivial)
    sweep = family_sweep(cfg)
    draws = mc_value_set(10**4, 0.3, trivial, count=20000, seed=5)
    report = discrepancy(sweep, draws, seed=1)
    R = 4.0
    us = np.linspace(-R, R, 65)
    f = empirical_char_grid(sweep, us, us)
    g = empirical_char_grid(draws, us, us)
    # density sups of the model, from a moderate inversion of its grid
    mg = model_char_grid(0.3, trivial, np.linspace(-16, 16, 129),
                         np.linspace(-16, 16, 129), P=20000)
    xs = np.linspace(-3.0, 3.0, 61)
    dens = invert_density(mg, 16.0, xs, xs, validate=False)
    wy = np.gradient(xs)
    a1 = float((dens.density * wy[None, :]).sum(axis=1).max())
    a2 = float((dens.density * wy[:, None]).sum(axis=0).max())
    bound = berry_esseen_bound(f, g, R, a1, a2)
    assert np.isfinite(bound) and bound > 0
    assert bound >= report.sup_cdf_diff


# --------------------------------------------------------------------------
# discrepancy

def test_discrepancy_identical_sets_zero(trivial):
    a = mc_value_set(30.0, 0.0, trivial, count=1000, seed=1)
    assert discrepancy(a, a).sup_cdf_diff == 0.0
    b = mc_value_set(30.0, 0.5, trivial, count=1000, seed=1)
    assert discrepancy(b, b).sup_cdf_diff == 0.0


def test_discrepancy_point_masses():
    a = _samples([0.0], dimension=1)
    b = _samples([1.0], dimension=1)
    report = discrepancy(a, b)
    assert report.sup_cdf_diff == 1.0
    assert report.rect_bound == 2.0


def test_discrepancy_symmetric_and_bounded(trivial):
    a = mc_value_set(30.0, 0.0, trivial, count=500, seed=1)
    b = mc_value_set(30.0, 0.0, trivial, count=800, seed=2)
    r1 = discrepancy(a, b)
    r2 = discrepancy(b, a)
    assert r1.sup_cdf_diff == pytest.approx(r2.sup_cdf_diff, abs=1e-15)
    assert 0.0 <= r1.sup_cdf_diff <= 1.0


def test_discrepancy_1d_matches_scipy():
    rng = np.random.Generator(np.random.Philox(key=12))
    a = _samples(rng.normal(size=400), dimension=1)
    b = _samples(rng.normal(size=700) * 1.3 + 0.2, dimension=1)
    want = scipy.stats.ks_2samp(a.values.real, b.values.real, method="exact")
    got = discrepancy(a, b)
    assert got.sup_cdf_diff == pytest.approx(float(want.statistic), abs=1e-12)


def _brute_corner_sup(av, bv):
    xs = np.unique(np.concatenate([av.real, bv.real]))
    ys = np.unique(np.concatenate([av.imag, bv.imag]))
    best = 0.0
    for x in xs:
        for y in ys:
            for ox in (False, True):
                for oy in (False, True):
                    ax = av.real < x if ox else av.real <= x
                    ay = av.imag < y if oy else av.imag <= y
                    bx = bv.real < x if ox else bv.real <= x
                    by = bv.imag < y if oy else bv.imag <= y
                    fa = np.mean(ax & ay)
                    fb = np.mean(bx & by)
                    best = max(best, abs(fa - fb))
    return best


def test_discrepancy_2d_matches_brute_force():
    rng = np.random.Generator(np.random.Philox(key=14))
    for trial in range(3):
        a = rng.normal(size=40) + 1j * rng.normal(size=40)
        b = rng.normal(size=55) * 1.4 + 1j * (rng.normal(size=55) - 0.3)
        ra = _samples(a)
        rb = _samples(b)
        got = discrepancy(ra, rb)
        assert got.sup_cdf_diff == pytest.approx(
            _brute_corner_sup(ra.values, rb.values), abs=1e-12
        )
        assert got.rect_bound == pytest.approx(4 * got.sup_cdf_diff, abs=1e-12)


def test_discrepancy_dimension_mismatch(trivial):
    a = mc_value_set(30.0, 0.0, trivial, count=100, seed=1)
    b = mc_value_set(30.0, 0.5, trivial, count=100, seed=1)
    with pytest.raises(DimensionMismatchError):
        discrepancy(a, b)
    with pytest.raises(EmptySampleError):
        discrepancy(_samples([], dimension=1), a)


def test_discrepancy_2d_reduces_to_1d_on_real_data():
    rng = np.random.Generator(np.random.Philox(key=15))
    ar = rng.normal(size=300)
    br = rng.normal(size=500) * 1.2
    a1 = _samples(ar, dimension=1)
    b1 = _samples(br, dimension=1)
    a2 = _samples(ar, dimension=2)
    b2 = _samples(br, dimension=2)
    one = discrepancy(a1, b1)
    two = discrepancy(a2, b2)
    assert two.sup_cdf_diff == pytest.approx(one.sup_cdf_diff, abs=1e-12)


def test_discrepancy_subsampling_recorded_and_deterministic(trivial):
    a = mc_value_set(30.0, 0.5, trivial, count=6000, seed=1)
    b = mc_value_set(30.0, 0.5, trivial, count=5000, seed=2)
    r1 = discrepancy(a, b, corner_budget=2000, seed=7)
    r2 = discrepancy(a, b, corner_budget=2000, seed=7)
    assert r1.sup_cdf_diff == r2.sup_cdf_diff
    assert r1.meta["subsampled"] == ["A", "B"]
    assert "subsampled" in r1.grid


# --------------------------------------------------------------------------
# Fourier inversion

def test_invert_density_gaussian_oracle_1d():
    us = np.linspace(-8.0, 8.0, 257)
    grid = CharFnGrid(us, None, np.exp(-us**2 / 2.0).astype(complex), "model")
    xs = np.linspace(-4.0, 4.0, 161)
    dens = invert_density(grid, 8.0, xs)
    i0 = len(xs) // 2
    assert dens.density[i0] == pytest.approx(INV_SQRT_2PI, abs=1e-6)
    ref = INV_SQRT_2PI * np.exp(-xs**2 / 2.0)
    assert np.abs(dens.density - ref).max() < 1e-6
    assert abs(dens.mass - 1.0) < 1e-3
    assert dens.imag_residue < 1e-12


def test_invert_density_gaussian_oracle_2d():
    us = np.linspace(-8.0, 8.0, 129)
    vals = np.exp(-(us[:, None] ** 2 + us[None, :] ** 2) / 2.0).astype(complex)
    grid = CharFnGrid(us, us, vals, "model")
    xs = np.linspace(-3.0, 3.0, 61)
    dens = invert_density(grid, 8.0, xs, xs, validate=False)
    i0 = len(xs) // 2
    assert dens.density[i0, i0] == pytest.approx(1.0 / (2 * math.pi), abs=1e-6)
    assert abs(dens.mass - 0.9973**2) < 2e-3  # mass inside |x|,|y| <= 3


def test_invert_density_decay_precondition():
    us = np.linspace(-8.0, 8.0, 65)
    grid = CharFnGrid(us, None, np.ones(65, dtype=complex), "model")
    with pytest.raises(InsufficientDecayError, match="enlarge U"):
        invert_density(grid, 8.0, np.linspace(-2, 2, 21))


def test_invert_density_coverage_error(trivial):
    us = np.linspace(-4.0, 4.0, 33)
    grid = model_char_grid(0.0, trivial, us, P=2000)
    with pytest.raises(GridCoverageError):
        invert_density(grid, 8.0, np.linspace(-2, 2, 21))


def test_model_density_positive_and_normalised(trivial):
    U = choose_inversion_box(lambda u: phi_rand(u, 0.0, 0.0, trivial, P=10**5))
    us = np.linspace(-U, U, 2 * int(16 * U) + 1)
    grid = model_char_grid(0.0, trivial, us, P=10**5)
    xs = np.linspace(-4.0, 4.0, 401)
    dens = invert_density(grid, U, xs)
    dens.validate()
    assert dens.density[200] > 0.0  # x = 0
    assert abs(dens.mass - 1.0) < 0.01
    assert dens.density.min() >= -1e-3


def test_choose_inversion_box_rejects_constant():
    with pytest.raises(InsufficientDecayError):
        choose_inversion_box(lambda u: 1.0, max_box=64.0)


def test_empirical_density_converges_to_model(trivial):
    # inversion of the empirical characteristic function approaches the
    # inversion of the model product as the number of draws grows
    U = 8.0
    us = np.linspace(-U, U, 257)
    model = model_char_grid(0.0, trivial, us, P=10**5)
    xs = np.linspace(-2.0, 2.0, 81)
    ref = invert_density(model, U, xs, validate=False).density
    sups = []
    for count in (10**4, 10**5):
        draws = mc_value_set(10**4, 0.0, trivial, count=count, seed=31)
        emp = empirical_char_grid(draws, us)
        dens = invert_density(emp, U, xs, decay_tol=0.08, validate=False)
        sups.append(float(np.abs(dens.density - ref).max()))
    assert sups[1] < sups[0]


# --------------------------------------------------------------------------
# small values and prime-sum diagnostics

def test_small_values_examples():
    s = _samples([3 + 4j])
    count, m_n = small_values(s, 5.0)
    assert (count, m_n) == (1, 5.0)
    t = _samples([1.0, -2.0, 0.5 + 0.5j])
    count, m_n = small_values(t, 100.0)
    assert count == len(t)
    assert m_n == pytest.approx(math.hypot(0.5, 0.5), rel=1e-15)
    with pytest.raises(EmptySampleError):
        small_values(_samples([]), 1.0)
    with pytest.raises(ValueError):
        small_values(t, 0.0)


def test_prime_sum_diagnostics_matches_pnt(trivial):
    d = prime_sum_diagnostics(trivial, 10**3, 10**7)
    assert d.abs_comparator == pytest.approx(math.log(10**3) / 10**3, rel=1e-12)
    assert abs(d.abs_tail - d.abs_comparator) / d.abs_comparator < 0.25
    # trivial coefficients are real, so both sums agree at t = 0
    assert d.twist_tail == pytest.approx(d.abs_tail, rel=1e-12)
    assert d.twist_comparator == pytest.approx(d.abs_comparator, rel=1e-12)


def test_prime_sum_diagnostics_edges(trivial):
    d = prime_sum_diagnostics(trivial, 10**4, 10**4)
    assert d.abs_tail == 0.0
    assert d.twist_tail == 0j
    with pytest.raises(ValueError):
        prime_sum_diagnostics(trivial, 100, 50)


def test_prime_sum_diagnostics_decreasing_in_x(trivial):
    tails = [
        prime_sum_diagnostics(trivial, X, 10**6).abs_tail
        for X in (10**3, 2 * 10**3, 4 * 10**3)
    ]
    assert tails[0] > tails[1] > tails[2]
