"""Oracle distributions: samplers, closed-form entropies, CDFs, ball masses.

Each family knows how to draw reproducible samples, report its exact
differential entropy in nats, evaluate its CDF (d = 1), and compute the
probability mass mu(B(x, r)) of a Euclidean ball. Ball masses are exact
wherever the geometry allows (all d = 1 families via CDF differences,
isotropic Gaussians in any dimension via noncentral chi-square); the
remaining case (cube, d > 1) falls back to Monte Carlo with an explicit
precision budget.

The counterexample family is uniform-type on the sparse interval lattice
A = union_j [a_j, a_j + delta_j] with a_j = 2**(2**j) and
delta_j = 1/(j*(j+1)). Its samples are returned in structured form
(interval index, offset) because the raw coordinates overflow floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import ClassVar, Union

import numpy as np
from scipy import integrate, special, stats

from .errors import ConfigError, PrecisionUnachievable
from .nn import (
    DEFAULT_CLAMP_J,
    LN2,
    LogPoint,
    PointSample,
    interval_length,
)
from .seeding import as_generator


@dataclass(frozen=True)
class BallMassPrecision:
    """Accuracy budget for Monte Carlo ball-mass estimates."""

    target_se: float = 1e-3
    max_draws: int = 10**6
    batch: int = 1 << 16


@dataclass(frozen=True)
class CounterexampleDraw:
    """One structured draw from the counterexample law: interval index y
    (already clamped) and uniform offset u within that interval."""

    y: int
    u: float

    @property
    def log_point(self) -> LogPoint:
        return LogPoint(self.y, self.u)


def _require_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")


def _require_dimension(d: int) -> None:
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")


def _as_centers(x, d: int) -> np.ndarray:
    pts = np.asarray(x, dtype=np.float64)
    if d == 1:
        return pts.reshape(-1)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.shape[-1] != d:
        raise ValueError(f"center has dimension {pts.shape[-1]}, spec has d = {d}")
    return pts


def _cdf_ball_mass(cdf, x, r):
    x_arr = np.asarray(x, dtype=np.float64)
    scalar = x_arr.ndim == 0 and np.ndim(r) == 0
    x_arr = x_arr.reshape(-1)
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    out = cdf(x_arr + r) - cdf(x_arr - r)
    return float(out.reshape(-1)[0]) if scalar else out


def _monte_carlo_ball_mass(spec, x, r, precision: BallMassPrecision | None, rng):
    """Estimate mu(B(x, r)) by direct sampling; returns (estimate, se)."""
    precision = precision or BallMassPrecision()
    if rng is None:
        raise ValueError(
            "Monte Carlo ball mass needs an explicit rng (seed or Generator)")
    gen = as_generator(rng)
    center = np.asarray(x, dtype=np.float64).reshape(1, -1)
    r = float(r)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    hits = 0
    total = 0
    while True:
        m = min(precision.batch, precision.max_draws - total)
        draws = spec.sample(m, gen).points
        diff = draws - center
        hits += int(np.count_nonzero((diff * diff).sum(axis=1) <= r * r))
        total += m
        p = hits / total
        se = math.sqrt(p * (1.0 - p) / total)
        if se <= precision.target_se:
            return p, se
        if total >= precision.max_draws:
            raise PrecisionUnachievable(
                f"standard error {se:.3g} > target {precision.target_se:.3g} "
                f"after {total} draws")


@dataclass(frozen=True)
class UniformCube:
    """Uniform distribution on the axis-aligned cube [0, side]^d."""

    d: int = 1
    side: float = 1.0

    family: ClassVar[str] = "uniform_cube"

    def __post_init__(self):
        _require_dimension(self.d)
        _require_positive("side", self.side)

    def sample(self, n: int, seed) -> PointSample:
        if n < 1:
            raise ValueError(f"need n >= 1, got {n}")
        rng = as_generator(seed)
        return PointSample(rng.random((n, self.d)) * self.side)

    def exact_entropy(self) -> float:
        return self.d * math.log(self.side)

    def cdf(self, x):
        if self.d != 1:
            raise ValueError("cdf is defined for d = 1 only")
        return np.clip(np.asarray(x, dtype=np.float64) / self.side, 0.0, 1.0)

    def ball_mass(self, x, r, *, precision=None, rng=None):
        if self.d == 1:
            return _cdf_ball_mass(self.cdf, x, r)
        value, _ = _monte_carlo_ball_mass(self, x, r, precision, rng)
        return value

    def ball_mass_estimate(self, x, r, *, precision=None, rng=None):
        """Monte Carlo ball mass with its standard error, for d > 1."""
        if self.d == 1:
            return _cdf_ball_mass(self.cdf, x, r), 0.0
        return _monte_carlo_ball_mass(self, x, r, precision, rng)

    def log_tail_moment(self) -> float:
        # E[(ln ||X||)^+]; zero whenever the cube sits inside the unit ball.
        if self.side * math.sqrt(self.d) <= 1.0:
            return 0.0
        if self.d == 1:
            # (1/side) * int_1^side ln x dx
            return (self.side * (math.log(self.side) - 1.0) + 1.0) / self.side
        # No tractable closed form for the cube-ball overlap; a fixed-stream
        # Monte Carlo average of (ln ||X||)^+ is accurate to ~1e-3 here.
        rng = as_generator(20_200_524)
        draws = self.sample(2_000_000, rng).points
        norms = np.sqrt((draws * draws).sum(axis=1))
        tail = np.zeros(norms.shape)
        mask = norms > 1.0
        tail[mask] = np.log(norms[mask])
        return float(tail.mean())

    def label(self) -> str:
        return f"uniform_cube(d={self.d}, side={self.side:g})"


@dataclass(frozen=True)
class IsotropicGaussian:
    """Centered Gaussian with covariance sigma**2 * I in R^d."""

    d: int = 1
    sigma: float = 1.0

    family: ClassVar[str] = "isotropic_gaussian"

    def __post_init__(self):
        _require_dimension(self.d)
        _require_positive("sigma", self.sigma)

    def sample(self, n: int, seed) -> PointSample:
        if n < 1:
            raise ValueError(f"need n >= 1, got {n}")
        rng = as_generator(seed)
        return PointSample(rng.standard_normal((n, self.d)) * self.sigma)

    def exact_entropy(self) -> float:
        return 0.5 * self.d * math.log(2.0 * math.pi * math.e * self.sigma**2)

    def cdf(self, x):
        if self.d != 1:
            raise ValueError("cdf is defined for d = 1 only")
        return special.ndtr(np.asarray(x, dtype=np.float64) / self.sigma)

    def ball_mass(self, x, r, *, precision=None, rng=None):
        # ||X - x||^2 / sigma^2 is noncentral chi-square with d degrees of
        # freedom and noncentrality ||x||^2 / sigma^2, so the mass is exact
        # in every dimension.
        if self.d == 1:
            return _cdf_ball_mass(self.cdf, x, r)
        scalar = np.ndim(x) == 1 and np.ndim(r) == 0
        centers = _as_centers(x, self.d)
        r = np.asarray(r, dtype=np.float64)
        if np.any(r < 0):
            raise ValueError("radius must be nonnegative")
        sq = (centers * centers).sum(axis=-1)
        nc = sq / self.sigma**2
        q = (r / self.sigma) ** 2
        nc, q = np.broadcast_arrays(nc, q)
        out = np.where(
            nc == 0.0,
            stats.chi2.cdf(q, df=self.d),
            stats.ncx2.cdf(q, df=self.d, nc=np.where(nc == 0.0, 1.0, nc)),
        )
        return float(out.reshape(-1)[0]) if scalar else out

    def log_tail_moment(self) -> float:
        # ||X|| / sigma follows a chi distribution with d degrees of freedom.
        value, _ = integrate.quad(
            lambda s: math.log(self.sigma * s) * stats.chi.pdf(s, df=self.d),
            1.0 / self.sigma,
            np.inf,
        )
        return float(value)

    def label(self) -> str:
        return f"isotropic_gaussian(d={self.d}, sigma={self.sigma:g})"


@dataclass(frozen=True)
class Exponential:
    """Exponential distribution on (0, inf) with the given rate (d = 1)."""

    rate: float = 1.0

    family: ClassVar[str] = "exponential"

    def __post_init__(self):
        _require_positive("rate", self.rate)

    @property
    def d(self) -> int:
        return 1

    def sample(self, n: int, seed) -> PointSample:
        if n < 1:
            raise ValueError(f"need n >= 1, got {n}")
        rng = as_generator(seed)
        # Inverse CDF keeps the draw fully determined by the raw uniforms.
        return PointSample(-np.log1p(-rng.random((n, 1))) / self.rate)

    def exact_entropy(self) -> float:
        return 1.0 - math.log(self.rate)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.where(x > 0.0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def ball_mass(self, x, r, *, precision=None, rng=None):
        return _cdf_ball_mass(self.cdf, x, r)

    def log_tail_moment(self) -> float:
        # int_1^inf ln(x) rate e^(-rate x) dx integrates by parts to E1(rate).
        return float(special.exp1(self.rate))

    def label(self) -> str:
        return f"exponential(rate={self.rate:g})"


@dataclass(frozen=True)
class Cauchy:
    """Centered Cauchy with the given scale (d = 1).

    Heavy-tailed with no mean, yet E[(ln |X|)^+] is finite, so it probes
    the unbounded-support regime where the estimator still converges.
    """

    scale: float = 1.0

    family: ClassVar[str] = "cauchy"

    def __post_init__(self):
        _require_positive("scale", self.scale)

    @property
    def d(self) -> int:
        return 1

    def sample(self, n: int, seed) -> PointSample:
        if n < 1:
            raise ValueError(f"need n >= 1, got {n}")
        rng = as_generator(seed)
        return PointSample(self.scale * np.tan(math.pi * (rng.random((n, 1)) - 0.5)))

    def exact_entropy(self) -> float:
        return math.log(4.0 * math.pi * self.scale)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        return 0.5 + np.arctan(x / self.scale) / math.pi

    def ball_mass(self, x, r, *, precision=None, rng=None):
        return _cdf_ball_mass(self.cdf, x, r)

    def log_tail_moment(self) -> float:
        # 2 * int_1^inf ln(x) * (s/pi)/(s^2 + x^2) dx, mapped to [0, 1]
        # via x = 1/t so quadrature sees a finite integrable integrand.
        s = self.scale
        value, _ = integrate.quad(lambda t: -math.log(t) / (s * s * t * t + 1.0), 0.0, 1.0)
        return float(2.0 * s / math.pi * value)

    def label(self) -> str:
        return f"cauchy(scale={self.scale:g})"


@dataclass(frozen=True)
class Counterexample:
    """Uniform-type law on the sparse interval lattice (d = 1).

    The unclamped law is uniform on A = union_j [a_j, a_j + delta_j] with
    a_j = 2**(2**j) and delta_j = 1/(j*(j+1)); total length 1, so its
    differential entropy is 0 while E[(ln |X|)^+] diverges. The sampler
    folds all interval indices above ``clamp_j`` into interval ``clamp_j``
    (which then carries probability 1/clamp_j), keeping every log-distance
    within double range; clamping only attenuates the estimator's blowup.
    """

    clamp_j: int = DEFAULT_CLAMP_J

    family: ClassVar[str] = "counterexample"

    def __post_init__(self):
        if isinstance(self.clamp_j, bool) or not isinstance(self.clamp_j, (int, np.integer)):
            raise ValueError(f"clamp_j must be an integer >= 1, got {self.clamp_j!r}")
        if self.clamp_j < 1:
            raise ValueError(f"clamp_j must be >= 1, got {self.clamp_j}")

    @property
    def d(self) -> int:
        return 1

    def sample(self, n: int, seed) -> list[CounterexampleDraw]:
        if n < 1:
            raise ValueError(f"need n >= 1, got {n}")
        rng = as_generator(seed)
        v = rng.random(n)
        # P{floor(1/(1-V)) = j} = 1/j - 1/(j+1) = delta_j for j >= 1.
        y = np.minimum(np.floor(1.0 / (1.0 - v)), float(self.clamp_j)).astype(np.int64)
        u = rng.random(n)
        return [CounterexampleDraw(int(yi), float(ui)) for yi, ui in zip(y, u)]

    def interval_masses(self) -> np.ndarray:
        """Probability of each interval 1..clamp_j under the clamped law."""
        masses = interval_length(np.arange(1, self.clamp_j + 1))
        masses[-1] = 1.0 / self.clamp_j
        return masses

    def exact_entropy(self) -> float:
        # Entropy of the unclamped target law. The clamped sampler's own
        # entropy is -ln(clamp_j + 1)/clamp_j, vanishing as clamp_j grows.
        return 0.0

    def cdf_of_draws(self, y, u) -> np.ndarray:
        """Exact CDF values F(x) at structured points x = a_y + delta_y * u.

        Interval masses below y telescope to 1 - 1/y, so the value never
        needs the (overflowing) raw coordinate.
        """
        y = np.asarray(y, dtype=np.float64)
        u = np.asarray(u, dtype=np.float64)
        masses = np.where(y < self.clamp_j, interval_length(y), 1.0 / self.clamp_j)
        return (1.0 - 1.0 / y) + masses * u

    def ball_mass(self, x, r, *, precision=None, rng=None):
        r = float(r)
        if r < 0:
            raise ValueError("radius must be nonnegative")
        if r == 0.0:
            return 0.0
        return self.ball_mass_log(x, math.log(r))

    def ball_mass_log(self, x, log_r: float) -> float:
        """Mass of the ball B(x, r) given ln(r), all in the log domain.

        ``x`` is a structured point (LogPoint, draw, or (j, u) pair). The
        mass is assembled interval by interval from exact interval
        intersections; edges that land inside an astronomically distant
        interval are resolved through log1p/expm1 so nothing overflows.
        """
        if hasattr(x, "log_point"):
            x = x.log_point
        y, u = int(x[0]), float(x[1])
        if y < 1:
            raise ValueError("interval index must be >= 1")
        if not 0.0 <= u <= 1.0:
            raise ValueError("offset must lie in [0, 1]")
        y = min(y, self.clamp_j)
        j = np.arange(1, self.clamp_j + 1)
        masses = self.interval_masses()
        lengths = interval_length(j)
        frac = np.zeros(self.clamp_j)

        # Own interval: work in local offset coordinates [0, delta_y].
        dy = float(interval_length(y))
        t = dy * u
        if log_r >= math.log(dy):
            frac[y - 1] = 1.0
        else:
            r = math.exp(log_r)
            frac[y - 1] = max(0.0, min(dy, t + r) - max(0.0, t - r)) / dy

        e_y = float(np.exp2(y))
        off = t * float(np.exp2(-e_y))  # (delta_y * u) / a_y

        below = j < y
        if below.any():
            e_j = np.exp2(j[below].astype(np.float64))
            ratio = np.exp2(e_j - e_y)  # a_j / a_y
            span = lengths[below] * np.exp2(-e_y)  # delta_j / a_y
            log_far = e_y * LN2 + np.log1p(off - ratio)  # ln(x - a_j)
            log_near = e_y * LN2 + np.log1p(off - ratio - span)  # ln(x - a_j - delta_j)
            frac[below] = _edge_fractions(log_near, log_far, lengths[below], log_r)

        above = j > y
        if above.any():
            e_j = np.exp2(j[above].astype(np.float64))
            ratio = np.exp2(e_y - e_j)  # a_y / a_j
            off_j = t * np.exp2(-e_j)  # (delta_y * u) / a_j
            span = lengths[above] * np.exp2(-e_j)  # delta_j / a_j
            log_near = e_j * LN2 + np.log1p(-ratio - off_j)  # ln(a_j - x)
            log_far = e_j * LN2 + np.log1p(span - ratio - off_j)  # ln(a_j + delta_j - x)
            frac[above] = _edge_fractions(log_near, log_far, lengths[above], log_r)

        return float(np.dot(frac, masses))

    def log_tail_moment(self) -> float:
        # The unclamped target diverges. The clamped sampler's moment is
        # finite but astronomically large (~ 2**clamp_j * ln(2) / clamp_j).
        return math.inf

    def label(self) -> str:
        return f"counterexample(clamp_j={self.clamp_j})"


def _edge_fractions(log_near: np.ndarray, log_far: np.ndarray,
                    lengths: np.ndarray, log_r: float) -> np.ndarray:
    """Covered fraction of intervals whose near/far edge distances from the
    ball center are given as logs."""
    frac = np.zeros(log_near.shape)
    full = log_r >= log_far
    frac[full] = 1.0
    partial = ~full & (log_r > log_near)
    if partial.any():
        # covered length = r - near = near * expm1(log_r - log_near)
        covered = np.exp(
            log_near[partial]
            + np.log(np.expm1(log_r - log_near[partial]))
            - np.log(lengths[partial])
        )
        frac[partial] = np.clip(covered, 0.0, 1.0)
    return frac


DistributionSpec = Union[UniformCube, IsotropicGaussian, Exponential, Cauchy, Counterexample]

_FAMILIES: dict[str, type] = {
    cls.family: cls
    for cls in (UniformCube, IsotropicGaussian, Exponential, Cauchy, Counterexample)
}


def sample(spec: DistributionSpec, n: int, seed):
    """Draw n points; deterministic given (spec, n, seed)."""
    return spec.sample(n, seed)


def exact_entropy(spec: DistributionSpec) -> float:
    """Closed-form differential entropy in nats."""
    return spec.exact_entropy()


def ball_mass(spec: DistributionSpec, x, r, *, precision=None, rng=None):
    """Probability mass mu(B(x, r)) of the closed Euclidean ball."""
    return spec.ball_mass(x, r, precision=precision, rng=rng)


def exact_log_tail_moment(spec: DistributionSpec) -> float:
    """E[(ln ||X||)^+], the tail moment governing L1 convergence."""
    return spec.log_tail_moment()


def spec_to_config(spec: DistributionSpec) -> dict:
    """JSON-ready dict naming the family and its parameters."""
    cfg = {"family": spec.family}
    for f in fields(spec):
        cfg[f.name] = getattr(spec, f.name)
    return cfg


def spec_from_config(cfg) -> DistributionSpec:
    """Parse a config dict; unknown families or keys are rejected."""
    if not isinstance(cfg, dict):
        raise ConfigError(f"distribution spec must be an object, got {type(cfg).__name__}")
    if "family" not in cfg:
        raise ConfigError("distribution spec needs a 'family' key")
    family = cfg["family"]
    cls = _FAMILIES.get(family)
    if cls is None:
        raise ConfigError(
            f"unknown family {family!r}; expected one of {sorted(_FAMILIES)}")
    allowed = {f.name for f in fields(cls)}
    params = {k: v for k, v in cfg.items() if k != "family"}
    unknown = set(params) - allowed
    if unknown:
        raise ConfigError(f"unknown keys for {family}: {sorted(unknown)}")
    try:
        return cls(**params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid parameters for {family}: {exc}") from exc
