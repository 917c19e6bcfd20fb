"""Proof-level diagnostics for the nearest-neighbor entropy estimate.

The estimate decomposes exactly as

    H_n = tilde_H_n + M_n + C_E

where M_n = (1/n) * sum_i ln((n-1) * mu(B(X_i, r_i))) is distribution-free
with mean -C_E + O(1/n), and tilde_H_n = -(1/n) * sum_i ln(mu_i / lambda_i)
is the ball-averaged log-density term that converges to the true entropy.
This module computes those statistics against a distribution's exact
ball-mass oracle, plus the empirical log-tail moment that governs L1
convergence and a Kolmogorov-Smirnov check of the uniform ball-mass law.

Ball masses must be exact for the identities to hold to float precision,
so by default these functions accept only specs with closed-form masses
(every d = 1 family, isotropic Gaussians in any d); Monte Carlo masses sit
behind an explicit opt-in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Counterexample, IsotropicGaussian, UniformCube
from .errors import DimensionMismatch, SampleTooSmall
from .estimators import EULER_MASCHERONI, _entropy_from_log_r, unit_ball_volume
from .nn import as_sample, coerce_log_points, log_coordinate, nn_distances

# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov machinery: exact statistics, asymptotic thresholds.


def ks_one_sample(values, cdf=None) -> float:
    """Exact one-sample KS statistic sup_x |F_n(x) - F(x)|.

    ``cdf`` defaults to the identity, i.e. a test against Uniform[0, 1].
    """
    v = np.sort(np.asarray(values, dtype=np.float64).reshape(-1))
    m = v.shape[0]
    if m < 1:
        raise SampleTooSmall("KS statistic needs at least one value")
    f = v if cdf is None else np.asarray(cdf(v), dtype=np.float64)
    i = np.arange(1, m + 1, dtype=np.float64)
    return float(max(np.max(i / m - f), np.max(f - (i - 1.0) / m)))


def ks_two_sample(a, b) -> float:
    """Exact two-sample KS statistic sup_x |F_a(x) - F_b(x)|."""
    a = np.sort(np.asarray(a, dtype=np.float64).reshape(-1))
    b = np.sort(np.asarray(b, dtype=np.float64).reshape(-1))
    if a.size < 1 or b.size < 1:
        raise SampleTooSmall("KS statistic needs at least one value per sample")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_critical_value(m: int, alpha: float = 0.01) -> float:
    """Asymptotic one-sample threshold sqrt(-ln(alpha/2) / 2) / sqrt(m)."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) / math.sqrt(m)


def ks_two_sample_critical_value(n1: int, n2: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample threshold c(alpha) * sqrt((n1 + n2)/(n1 * n2))."""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) * math.sqrt((n1 + n2) / (n1 * n2))


# ---------------------------------------------------------------------------
# Ball-mass plumbing.


def _exact_masses(sample, spec, centers, radii, *, allow_monte_carlo=False,
                  precision=None, rng=None) -> np.ndarray:
    if isinstance(spec, Counterexample):
        raise TypeError(
            "counterexample samples are structured lattice points; "
            "raw-coordinate diagnostics do not apply")
    if spec.d != sample.d:
        raise DimensionMismatch(
            f"sample has d = {sample.d} but spec has d = {spec.d}")
    if spec.d == 1 or isinstance(spec, IsotropicGaussian):
        return np.asarray(spec.ball_mass(centers, radii), dtype=np.float64).reshape(-1)
    if isinstance(spec, UniformCube) and allow_monte_carlo:
        centers2 = np.asarray(centers, dtype=np.float64).reshape(-1, spec.d)
        radii = np.asarray(radii, dtype=np.float64).reshape(-1)
        return np.array([
            spec.ball_mass(c, r, precision=precision, rng=rng)
            for c, r in zip(centers2, radii)
        ])
    raise ValueError(
        f"{spec.label()} has no exact ball mass in d = {spec.d}; "
        "pass allow_monte_carlo=True to accept a Monte Carlo estimate")


def _sample_masses(sample, spec, backend, **mass_kw):
    s = as_sample(sample)
    nnd = nn_distances(s, backend, with_log=True)
    mu = _exact_masses(s, spec, s.points, nnd.r, **mass_kw)
    return s, nnd, mu


# ---------------------------------------------------------------------------
# The statistics.


def m_statistic(sample, spec, backend: str = "index", **mass_kw) -> float:
    """M_n = (1/n) * sum_i ln((n-1) * mu(B(X_i, r_i))).

    Distribution-free: for a sample genuinely drawn from ``spec`` its law
    does not depend on the density, with mean -C_E + O(1/n).
    """
    s, _, mu = _sample_masses(sample, spec, backend, **mass_kw)
    return float(np.mean(np.log((s.n - 1.0) * mu)))


def tilde_h(sample, spec, backend: str = "index", **mass_kw) -> float:
    """tilde_H_n = -(1/n) * sum_i ln(mu_i / lambda_i), the ball-averaged
    log-density term; lambda_i = v_d * r_i**d is evaluated in log form."""
    s, nnd, mu = _sample_masses(sample, spec, backend, **mass_kw)
    log_lambda = math.log(unit_ball_volume(s.d)) + s.d * nnd.log_r
    return float(np.mean(log_lambda - np.log(mu)))


def ball_mass_sum(sample, spec, backend: str = "index", **mass_kw) -> float:
    """sum_i mu(B(X_i, r_i)); converges to 1 for any density."""
    _, _, mu = _sample_masses(sample, spec, backend, **mass_kw)
    return float(mu.sum())


def empirical_log_tail(sample) -> float:
    """(1/n) * sum_i (ln ||X_i||)^+, the empirical log-tail moment.

    Accepts raw samples or structured lattice points, for which
    ln ||x|| = 2**j * ln 2 plus a negligible correction.
    """
    if not isinstance(sample, np.ndarray) and _has_log_points(sample):
        j, u = coerce_log_points(sample)
        log_norms = log_coordinate(j, u)
    else:
        s = as_sample(sample)
        sq = (s.points * s.points).sum(axis=1)
        log_norms = np.full(s.n, -np.inf)
        positive = sq > 0.0
        log_norms[positive] = 0.5 * np.log(sq[positive])
    return float(np.mean(np.maximum(log_norms, 0.0)))


def _has_log_points(values) -> bool:
    try:
        first = next(iter(values))
    except (TypeError, StopIteration):
        return False
    return hasattr(first, "log_point") or (
        isinstance(first, tuple) and len(first) == 2)


def uniform_ball_mass_check(sample, spec, **mass_kw) -> float:
    """KS statistic of {mu(B(X_n, ||X_i - X_n||))}_{i<n} against Uniform[0,1].

    For X_i drawn from ``spec`` these masses are exactly uniform, whatever
    the density, so the statistic should stay below the usual critical
    values. Needs n >= 50.
    """
    s = as_sample(sample)
    if s.n < 50:
        raise SampleTooSmall(f"uniform ball-mass check needs n >= 50, got {s.n}")
    center = s.points[-1]
    diff = s.points[:-1] - center
    radii = np.sqrt((diff * diff).sum(axis=1))
    centers = np.broadcast_to(center, (s.n - 1, s.d))
    mu = _exact_masses(s, spec, centers, radii, **mass_kw)
    return ks_one_sample(mu)


@dataclass(frozen=True)
class DiagnosticsReport:
    """All per-sample diagnostics in one record."""

    h_n: float
    m_n: float
    tilde_h_n: float
    ball_mass_sum: float
    empirical_log_tail: float
    ks_ball_mass_uniform: float | None
    n: int
    d: int
    spec_id: str

    @property
    def decomposition_gap(self) -> float:
        """h_n - tilde_h_n - m_n - C_E; zero in exact arithmetic."""
        return self.h_n - self.tilde_h_n - self.m_n - EULER_MASCHERONI


def diagnose(sample, spec, backend: str = "index", **mass_kw) -> DiagnosticsReport:
    """Compute the full diagnostics report for one sample.

    The KS field needs n >= 50 and is None below that.
    """
    s, nnd, mu = _sample_masses(sample, spec, backend, **mass_kw)
    log_mu = np.log(mu)
    log_lambda = math.log(unit_ball_volume(s.d)) + s.d * nnd.log_r
    # Same arithmetic as kl_entropy, reusing the distances computed here.
    h_n = _entropy_from_log_r(nnd.log_r, s.n, s.d)
    report = DiagnosticsReport(
        h_n=h_n,
        m_n=float(np.mean(np.log(s.n - 1.0) + log_mu)),
        tilde_h_n=float(np.mean(log_lambda - log_mu)),
        ball_mass_sum=float(mu.sum()),
        empirical_log_tail=empirical_log_tail(s),
        ks_ball_mass_uniform=(
            uniform_ball_mass_check(s, spec, **mass_kw) if s.n >= 50 else None),
        n=s.n,
        d=s.d,
        spec_id=spec.label(),
    )
    return report
