"""Estimator tests: hand-computed values, algebraic identities, invariances,
and the log-domain path against the raw-coordinate estimator."""

import math

import mpmath
import numpy as np
import pytest

from entropykit import (
    EULER_MASCHERONI,
    DimensionMismatch,
    InvalidDimension,
    LogPoint,
    ell_statistic,
    kl_entropy,
    kl_entropy_logdomain,
    one_nn_density,
    unit_ball_volume,
)

LN2 = math.log(2.0)


def test_euler_mascheroni_value():
    # C_E = -int_0^inf e^-t ln t dt, checked against quadrature in mpmath.
    oracle = float(-mpmath.quad(lambda t: mpmath.e**(-t) * mpmath.log(t), [0, 1, mpmath.inf]))
    assert EULER_MASCHERONI == pytest.approx(oracle, abs=1e-15)
    assert EULER_MASCHERONI == 0.5772156649015329


# ---------------------------------------------------------------------------
# Unit-ball volume


def test_unit_ball_volume_small_dimensions():
    assert unit_ball_volume(1) == pytest.approx(2.0, rel=1e-15)
    assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-15)


@pytest.mark.parametrize("d", [50, 170, 171, 400, 1000])
def test_unit_ball_volume_large_dimensions(d):
    oracle = float(mpmath.pi ** (d / 2) / mpmath.gamma(d / 2 + 1))
    assert unit_ball_volume(d) == pytest.approx(oracle, rel=1e-12)


@pytest.mark.parametrize("bad", [0, -3, 2.5, True])
def test_unit_ball_volume_rejects_bad_dimension(bad):
    with pytest.raises(InvalidDimension):
        unit_ball_volume(bad)


# ---------------------------------------------------------------------------
# kl_entropy


def test_hand_example_two_points():
    est = kl_entropy([[0.0], [1.0]])
    assert abs(est.value - (LN2 + EULER_MASCHERONI)) < 1e-12
    assert (est.n, est.d, est.backend, est.log_domain) == (2, 1, "index", False)
    assert est.euler_mascheroni == EULER_MASCHERONI


def test_hand_example_three_points():
    # r = [1, 1, 2]: H_3 = (1/3)(ln 4 + ln 4 + ln 8) + C_E = (7/3) ln 2 + C_E.
    est = kl_entropy([[0.0], [1.0], [3.0]])
    assert abs(est.value - ((7.0 / 3.0) * LN2 + EULER_MASCHERONI)) < 1e-12


def test_translation_invariance_exact():
    rng = np.random.default_rng(1)
    pts = rng.integers(0, 2**20, size=(300, 2)).astype(np.float64) / 2.0**20
    base = kl_entropy(pts).value
    for shift in ((5.0, -9.0), (2.0**14, -2.0**18)):
        assert kl_entropy(pts + np.array(shift)).value == base


def test_scaling_covariance():
    rng = np.random.default_rng(2)
    for d in (1, 2, 5):
        pts = rng.normal(size=(200, d))
        base = kl_entropy(pts).value
        for s in (0.5, 2.0, 10.0):
            assert kl_entropy(pts * s).value - base == pytest.approx(
                d * math.log(s), abs=1e-9)


def test_permutation_invariance_exact():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(150, 3))
    assert kl_entropy(pts[rng.permutation(150)]).value == kl_entropy(pts).value


def test_backends_agree():
    rng = np.random.default_rng(4)
    pts = rng.random((300, 2))
    assert kl_entropy(pts, "brute").value == kl_entropy(pts, "index").value


# ---------------------------------------------------------------------------
# 1-NN leave-one-out density and the cross-validation identity


def test_density_hand_example():
    dens = one_nn_density([[0.0], [1.0]])
    expected = 1.0 / (2.0 * math.exp(EULER_MASCHERONI))
    np.testing.assert_allclose(dens.values, expected, rtol=1e-15)


def test_cross_validation_identity():
    # H_n = -(1/n) sum ln f_i on 100 random Gaussian samples.
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(2, 120))
        d = int(rng.integers(1, 4))
        pts = rng.normal(size=(n, d))
        h = kl_entropy(pts).value
        f = one_nn_density(pts).values
        assert np.all(f > 0) and np.all(np.isfinite(f))
        assert abs(-np.mean(np.log(f)) - h) < 1e-10


def test_density_scaling():
    rng = np.random.default_rng(6)
    for d in (1, 3):
        pts = rng.normal(size=(80, d))
        base = one_nn_density(pts).values
        for s in (0.5, 4.0):
            np.testing.assert_allclose(
                one_nn_density(pts * s).values, base / s**d, rtol=1e-12)


# ---------------------------------------------------------------------------
# ell statistic


def test_ell_hand_examples():
    assert ell_statistic([[0.0], [1.0]]) == pytest.approx(-1.0, abs=1e-15)
    assert ell_statistic([[0.0], [0.5]]) == pytest.approx(0.0, abs=1e-15)


def test_ell_requires_one_dimension():
    with pytest.raises(DimensionMismatch):
        ell_statistic([[0.0, 0.0], [1.0, 1.0]])


def test_ell_relation_to_entropy():
    # H_n = -(ln 2) ell_n + ln(2 (n-1)/n) + C_E on 50 uniform samples.
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(2, 200))
        pts = rng.random((n, 1))
        h = kl_entropy(pts).value
        ell = ell_statistic(pts)
        reconstructed = -LN2 * ell + math.log(2.0 * (n - 1) / n) + EULER_MASCHERONI
        assert abs(h - reconstructed) < 1e-10


def test_ell_accepts_lattice_points():
    # (1, 0), (1, 0.5): z = 0.25 both, n = 2: ell = log2(1/(2*0.25)) = 1.
    ell = ell_statistic([LogPoint(1, 0.0), LogPoint(1, 0.5)])
    assert ell == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# Log-domain estimator


def test_logdomain_hand_examples():
    est = kl_entropy_logdomain([LogPoint(1, 0.0), LogPoint(1, 0.5)])
    assert est.value == pytest.approx(math.log(0.5) + EULER_MASCHERONI, abs=1e-12)
    assert est.log_domain and est.backend == "logdomain" and est.d == 1

    est = kl_entropy_logdomain([LogPoint(1, 0.0), LogPoint(2, 0.0)])
    assert est.value == pytest.approx(math.log(24.0) + EULER_MASCHERONI, abs=1e-12)


def test_logdomain_agrees_with_raw_estimator():
    from entropykit.nn import interval_length

    pts = [LogPoint(1, 0.05), LogPoint(1, 0.55), LogPoint(2, 0.2), LogPoint(2, 0.9),
           LogPoint(3, 0.4), LogPoint(3, 0.8), LogPoint(4, 0.3), LogPoint(5, 0.6),
           LogPoint(6, 0.2), LogPoint(7, 0.7), LogPoint(8, 0.5)]
    raw = np.array([2.0 ** (2.0**j) + u * float(interval_length(j)) for j, u in pts])
    assert kl_entropy_logdomain(pts).value == pytest.approx(
        kl_entropy(raw.reshape(-1, 1)).value, abs=1e-9)


def test_logdomain_estimate_is_finite_at_full_clamp():
    pts = [LogPoint(512, 0.25), LogPoint(512, 0.75), LogPoint(1, 0.5), LogPoint(400, 0.5)]
    value = kl_entropy_logdomain(pts).value
    assert math.isfinite(value)
    assert value > 1e100  # the lone point at j=400 sees a ~2**(2**512) gap


def test_clamp_monotonicity():
    # Folding indices down can only shrink distances, never grow them.
    pts = [LogPoint(1, 0.3), LogPoint(5, 0.6), LogPoint(40, 0.1),
           LogPoint(200, 0.9), LogPoint(450, 0.2)]
    values = [kl_entropy_logdomain(pts, clamp_j=j).value
              for j in (512, 256, 64, 16, 4)]
    assert all(a >= b for a, b in zip(values, values[1:]))
