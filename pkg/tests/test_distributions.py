"""Distribution oracle tests: sampler laws, closed-form entropies against
quadrature, CDF goodness of fit, ball masses, and tail moments."""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy import integrate

from entropykit import (
    BallMassPrecision,
    Cauchy,
    ConfigError,
    Counterexample,
    CounterexampleDraw,
    Exponential,
    IsotropicGaussian,
    LogPoint,
    PointSample,
    PrecisionUnachievable,
    UniformCube,
    ks_one_sample,
    sample,
    spec_from_config,
    spec_to_config,
)

ALL_SPECS = [
    UniformCube(d=1, side=1.0),
    UniformCube(d=3, side=2.0),
    IsotropicGaussian(d=1, sigma=1.0),
    IsotropicGaussian(d=4, sigma=0.5),
    Exponential(rate=1.0),
    Cauchy(scale=1.0),
    Counterexample(clamp_j=512),
]


def entropy_by_quadrature(pdf, lo, hi):
    """Independent oracle: -int f ln f by adaptive quadrature."""

    def integrand(x):
        f = pdf(x)
        return 0.0 if f == 0.0 else -f * math.log(f)

    value, _ = integrate.quad(integrand, lo, hi, limit=200)
    return value


# ---------------------------------------------------------------------------
# Samplers


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.label())
def test_sampler_determinism(spec):
    a = sample(spec, 500, seed=99)
    b = sample(spec, 500, seed=99)
    if isinstance(spec, Counterexample):
        assert a == b
    else:
        np.testing.assert_array_equal(a.points, b.points)
    c = sample(spec, 500, seed=100)
    if isinstance(spec, Counterexample):
        assert a != c
    else:
        assert not np.array_equal(a.points, c.points)


def test_uniform_mean_clt_bound():
    pts = sample(UniformCube(1, 1.0), 10**5, seed=1).points
    assert 0.49 <= pts.mean() <= 0.51


def test_counterexample_first_interval_frequency():
    draws = sample(Counterexample(512), 10**5, seed=2)
    freq = np.mean([d.y == 1 for d in draws])
    assert 0.495 <= freq <= 0.505


def test_exponential_tail_probability():
    pts = sample(Exponential(1.0), 10**5, seed=3).points
    assert 0.36 <= (pts > 1.0).mean() <= 0.38


def test_counterexample_draws_are_structured_and_clamped():
    spec = Counterexample(clamp_j=4)
    draws = sample(spec, 20_000, seed=4)
    assert all(isinstance(d, CounterexampleDraw) for d in draws)
    ys = np.array([d.y for d in draws])
    us = np.array([d.u for d in draws])
    assert ys.min() >= 1 and ys.max() <= 4
    assert np.all((0.0 <= us) & (us < 1.0))
    # clamp lumps P{Y >= 4} = 1/4 into the top interval
    assert abs((ys == 4).mean() - 0.25) < 0.01
    assert draws[0].log_point == LogPoint(draws[0].y, draws[0].u)


def test_sample_rejects_nonpositive_n():
    with pytest.raises(ValueError):
        sample(UniformCube(1), 0, seed=0)


# ---------------------------------------------------------------------------
# Exact entropies


def test_exact_entropies_closed_forms():
    assert UniformCube(1, 1.0).exact_entropy() == 0.0
    assert UniformCube(2, 3.0).exact_entropy() == pytest.approx(2 * math.log(3.0))
    assert IsotropicGaussian(1, 1.0).exact_entropy() == pytest.approx(
        0.5 * math.log(2 * math.pi * math.e), rel=1e-15)
    assert Exponential(1.0).exact_entropy() == 1.0
    assert Cauchy(1.0).exact_entropy() == pytest.approx(math.log(4 * math.pi), rel=1e-15)
    assert Counterexample(512).exact_entropy() == 0.0
    assert Counterexample(8).exact_entropy() == 0.0


def test_gaussian_entropy_against_quadrature():
    for sigma in (0.5, 1.0, 2.0):
        pdf = lambda x: math.exp(-0.5 * (x / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
        oracle = entropy_by_quadrature(pdf, -np.inf, np.inf)
        assert IsotropicGaussian(1, sigma).exact_entropy() == pytest.approx(oracle, abs=1e-9)


def test_exponential_entropy_against_quadrature():
    for rate in (0.5, 1.0, 3.0):
        pdf = lambda x: rate * math.exp(-rate * x)
        oracle = entropy_by_quadrature(pdf, 0.0, np.inf)
        assert Exponential(rate).exact_entropy() == pytest.approx(oracle, abs=1e-9)


def test_cauchy_entropy_against_quadrature():
    for scale in (1.0, 2.0):
        pdf = lambda x: scale / (math.pi * (scale**2 + x**2))
        oracle = entropy_by_quadrature(pdf, -np.inf, np.inf)
        assert Cauchy(scale).exact_entropy() == pytest.approx(oracle, abs=1e-8)


# ---------------------------------------------------------------------------
# CDFs match the samplers


@pytest.mark.parametrize("spec", [
    UniformCube(1, 1.0), UniformCube(1, 2.5),
    IsotropicGaussian(1, 1.0), IsotropicGaussian(1, 0.3),
    Exponential(1.0), Exponential(2.0),
    Cauchy(1.0), Cauchy(0.5),
], ids=lambda s: s.label())
def test_empirical_cdf_matches_analytic(spec):
    pts = sample(spec, 10**5, seed=5).points[:, 0]
    assert ks_one_sample(pts, spec.cdf) < 0.01


def test_counterexample_cdf_matches_draws():
    spec = Counterexample(512)
    draws = sample(spec, 10**5, seed=6)
    u = spec.cdf_of_draws([d.y for d in draws], [d.u for d in draws])
    # probability integral transform: F(X) must be uniform on [0, 1]
    assert ks_one_sample(u) < 0.01


def test_counterexample_cdf_hand_values():
    spec = Counterexample(clamp_j=4)
    # below-y interval masses telescope to 1 - 1/y
    assert spec.cdf_of_draws([1], [0.0])[0] == 0.0
    assert spec.cdf_of_draws([2], [0.0])[0] == pytest.approx(0.5)
    assert spec.cdf_of_draws([3], [0.5])[0] == pytest.approx(2 / 3 + 0.5 / 12)
    assert spec.cdf_of_draws([4], [1.0])[0] == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# Ball masses


def test_ball_mass_hand_cases_uniform():
    cube = UniformCube(1, 1.0)
    assert cube.ball_mass(0.5, 0.25) == pytest.approx(0.5, rel=1e-15)
    assert cube.ball_mass(0.5, 1.0) == 1.0
    assert cube.ball_mass(0.5, 0.0) == 0.0


def test_ball_mass_gaussian_normal_table():
    gauss = IsotropicGaussian(1, 1.0)
    assert gauss.ball_mass(0.0, 1.959964) == pytest.approx(0.95, abs=1e-6)


@pytest.mark.parametrize("spec", [
    UniformCube(1, 1.0), IsotropicGaussian(1, 2.0), IsotropicGaussian(3, 1.0),
    Exponential(1.5), Cauchy(1.0),
], ids=lambda s: s.label())
def test_ball_mass_monotone_and_limits(spec):
    x = np.zeros(spec.d) + 0.3 if spec.d > 1 else 0.3
    radii = [0.0, 0.01, 0.1, 0.5, 1.0, 5.0, 100.0, 1e12]
    masses = [float(np.asarray(spec.ball_mass(x, r))) for r in radii]
    assert masses[0] == 0.0
    assert all(b >= a for a, b in zip(masses, masses[1:]))
    assert masses[-1] == pytest.approx(1.0, abs=1e-9)


def test_gaussian_ball_mass_exact_vs_monte_carlo():
    # Dual route: the noncentral chi-square closed form against plain MC.
    spec = IsotropicGaussian(3, 1.0)
    x = np.array([0.5, -0.25, 1.0])
    rng = np.random.default_rng(7)
    draws = rng.standard_normal((400_000, 3))
    for r in (0.5, 1.0, 2.0):
        mc = np.mean(((draws - x) ** 2).sum(axis=1) <= r * r)
        se = math.sqrt(mc * (1 - mc) / draws.shape[0])
        assert spec.ball_mass(x, r) == pytest.approx(mc, abs=5 * se + 1e-6)


def test_cube_monte_carlo_ball_mass():
    spec = UniformCube(2, 1.0)
    est, se = spec.ball_mass_estimate(np.array([0.5, 0.5]), 0.25, rng=11)
    assert se <= 1e-3
    assert est == pytest.approx(math.pi * 0.25**2, abs=5 * se + 1e-4)


def test_cube_monte_carlo_needs_rng():
    with pytest.raises(ValueError):
        UniformCube(2, 1.0).ball_mass(np.array([0.5, 0.5]), 0.25)


def test_cube_monte_carlo_precision_unachievable():
    tight = BallMassPrecision(target_se=1e-6, max_draws=10_000)
    with pytest.raises(PrecisionUnachievable):
        UniformCube(2, 1.0).ball_mass(np.array([0.5, 0.5]), 0.25,
                                      precision=tight, rng=12)


def test_cube_monte_carlo_monotone_with_shared_seed():
    spec = UniformCube(3, 1.0)
    x = np.array([0.5, 0.5, 0.5])
    masses = [spec.ball_mass(x, r, rng=13) for r in (0.1, 0.2, 0.4, 0.8)]
    assert all(b >= a for a, b in zip(masses, masses[1:]))


def test_counterexample_interval_masses_telescope_exactly():
    for j_max in (2, 5, 64, 512):
        total = sum((Fraction(1, j * (j + 1)) for j in range(1, j_max)),
                    Fraction(1, j_max))
        assert total == 1
        masses = Counterexample(j_max).interval_masses()
        assert masses.shape == (j_max,)
        assert float(sum(masses)) == pytest.approx(1.0, abs=1e-15)


def test_counterexample_ball_mass_hand_cases():
    spec = Counterexample(clamp_j=512)
    # center x = a_2 = 16, radius 12: covers all of [4, 4.5] and all of
    # interval 2; intervals >= 3 start at 256.
    assert spec.ball_mass(LogPoint(2, 0.0), 12.0) == pytest.approx(0.5 + 1 / 6, rel=1e-12)
    # radius 11.75: ball reaches down to 4.25, half of interval 1.
    assert spec.ball_mass(LogPoint(2, 0.0), 11.75) == pytest.approx(0.25 + 1 / 6, rel=1e-9)
    # radius 11.5 exactly touches the top edge of interval 1.
    assert spec.ball_mass(LogPoint(2, 0.0), 11.5) == pytest.approx(1 / 6, rel=1e-12)
    # center x = a_1 = 4, radius 12.1 reaches 0.1 into interval 2.
    assert spec.ball_mass(LogPoint(1, 0.0), 12.1) == pytest.approx(0.5 + 0.1, rel=1e-9)
    # tiny radius: only the local neighborhood within interval 1
    assert spec.ball_mass(LogPoint(1, 0.5), 0.05) == pytest.approx(0.1, rel=1e-12)
    assert spec.ball_mass(LogPoint(1, 0.5), 0.0) == 0.0


def test_counterexample_ball_mass_log_domain_far_intervals():
    spec = Counterexample(clamp_j=512)
    # ln r just above ln(a_40 - a_1): ball centered at a_1 swallows
    # everything up to interval 40 (2**(2**40) is far beyond float range).
    log_r = float(np.exp2(40)) * math.log(2.0)
    mass = spec.ball_mass_log(LogPoint(1, 0.0), log_r)
    expected = 1.0 - 1.0 / 41.0  # intervals 1..40 inclusive
    assert mass == pytest.approx(expected, rel=1e-12)
    # enormous radius covers every clamped interval
    assert spec.ball_mass_log(LogPoint(1, 0.0), float(np.exp2(513))) == pytest.approx(1.0)


def test_counterexample_ball_mass_monotone_in_log_radius():
    spec = Counterexample(clamp_j=64)
    center = LogPoint(3, 0.5)
    grid = [-5.0, -1.0, 1.0, 10.0, 100.0, 1e3, 1e6, 1e15]
    masses = [spec.ball_mass_log(center, lr) for lr in grid]
    assert all(b >= a for a, b in zip(masses, masses[1:]))
    assert all(0.0 <= m <= 1.0 for m in masses)


# ---------------------------------------------------------------------------
# Log-tail moments


def test_log_tail_moments():
    assert UniformCube(1, 1.0).log_tail_moment() == 0.0
    # quadrature oracle for the exponential: int_1^inf ln(x) e^-x dx
    oracle, _ = integrate.quad(lambda x: math.log(x) * math.exp(-x), 1.0, np.inf)
    assert Exponential(1.0).log_tail_moment() == pytest.approx(oracle, abs=1e-10)
    assert Exponential(1.0).log_tail_moment() == pytest.approx(0.21938393439552062, abs=1e-12)
    assert Counterexample(512).log_tail_moment() == math.inf


def test_cauchy_log_tail_matches_catalan():
    # For scale 1 the moment is 2 * Catalan / pi.
    expected = float(2 * mpmath.catalan / mpmath.pi)
    assert Cauchy(1.0).log_tail_moment() == pytest.approx(expected, rel=1e-10)


def test_gaussian_log_tail_against_quadrature():
    oracle, _ = integrate.quad(
        lambda x: 2 * math.log(x) * math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi),
        1.0, np.inf)
    assert IsotropicGaussian(1, 1.0).log_tail_moment() == pytest.approx(oracle, abs=1e-9)


def test_uniform_cube_log_tail_side_above_one():
    # d = 1, side s > 1: (s (ln s - 1) + 1) / s, checked by quadrature.
    side = 3.0
    oracle, _ = integrate.quad(lambda x: math.log(x) / side, 1.0, side)
    assert UniformCube(1, side).log_tail_moment() == pytest.approx(oracle, rel=1e-12)


def test_uniform_cube_log_tail_d2_monte_carlo_is_plausible():
    # MC path; wide tolerance against a direct polar-coordinate bound.
    value = UniformCube(2, 1.0).log_tail_moment()
    assert 0.0 < value < math.log(math.sqrt(2.0))


# ---------------------------------------------------------------------------
# Config round-trips


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.label())
def test_config_round_trip(spec):
    assert spec_from_config(spec_to_config(spec)) == spec


def test_config_rejects_unknown_family_and_keys():
    with pytest.raises(ConfigError):
        spec_from_config({"family": "pareto", "alpha": 2.0})
    with pytest.raises(ConfigError):
        spec_from_config({"family": "uniform_cube", "d": 1, "sides": 2.0})
    with pytest.raises(ConfigError):
        spec_from_config({"d": 1})
    with pytest.raises(ConfigError):
        spec_from_config({"family": "exponential", "rate": -1.0})
    with pytest.raises(ConfigError):
        spec_from_config("uniform_cube")


def test_parameter_validation():
    with pytest.raises(ValueError):
        UniformCube(d=0)
    with pytest.raises(ValueError):
        IsotropicGaussian(d=2, sigma=0.0)
    with pytest.raises(ValueError):
        Exponential(rate=-2.0)
    with pytest.raises(ValueError):
        Cauchy(scale=math.inf)
    with pytest.raises(ValueError):
        Counterexample(clamp_j=0)


def test_samples_are_point_samples():
    for spec in ALL_SPECS:
        drawn = sample(spec, 10, seed=8)
        if isinstance(spec, Counterexample):
            assert isinstance(drawn, list)
        else:
            assert isinstance(drawn, PointSample)
            assert drawn.points.shape == (10, spec.d)
