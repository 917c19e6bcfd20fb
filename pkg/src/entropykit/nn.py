"""Nearest-neighbor distances.

Everything downstream reduces to the Euclidean distance from each sample
point to its closest other sample point. Two interchangeable backends are
provided -- a quadratic reference scan and a kd-tree -- which return
bit-identical results: both compare squared distances produced by the same
termwise reduction and apply a single square root at the end.

A third path handles one-dimensional samples whose coordinates sit on the
doubly exponential interval lattice a(j) = 2**(2**j): those coordinates
overflow any fixed-width float, so points are kept in the structured form
(interval index j, offset u) and all distances are produced directly in
the log domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import DuplicatePoints, InvalidDimension, SampleTooSmall

LN2 = float(np.log(2.0))

# Interval indices above this are folded into the top interval before any
# log-domain distance is computed; 2**512 * ln 2 ~ 9.3e153 keeps every
# log-distance (and every estimate built from one) inside double range.
DEFAULT_CLAMP_J = 512

# Number of kd-tree neighbors (including self) whose distances are
# recomputed exactly; min over them matches the brute-force min.
_CANDIDATES = 5


class LogPoint(NamedTuple):
    """Structured 1-d point a(j) + delta(j) * u on the sparse lattice
    a(j) = 2**(2**j), delta(j) = 1/(j*(j+1))."""

    j: int
    u: float


@dataclass(frozen=True)
class PointSample:
    """A finite set of n points in R^d, stored as an (n, d) float64 array.

    Coordinates must be finite; a 1-d input array is treated as a single
    column. The stored array is a read-only copy.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise ValueError(f"points must be an (n, d) array, got shape {pts.shape}")
        if pts.shape[1] < 1:
            raise InvalidDimension("points need at least one coordinate")
        if not np.all(np.isfinite(pts)):
            raise ValueError("all coordinates must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class NnDistances:
    """Per-point nearest-neighbor distances r[i], optionally with ln r[i]."""

    r: np.ndarray
    log_r: np.ndarray | None = None


def as_sample(sample) -> PointSample:
    """Coerce an array-like (or pass through a PointSample)."""
    if isinstance(sample, PointSample):
        return sample
    return PointSample(sample)


def _sq_norms(diff: np.ndarray) -> np.ndarray:
    # Termwise squared length over the last axis. Both backends funnel
    # through this one reduction so their distances agree bit-for-bit.
    return (diff * diff).sum(axis=-1)


def _min_sq_brute(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = points.shape[0]
    best = np.empty(n)
    best_j = np.empty(n, dtype=np.intp)
    chunk = max(1, int(4_000_000 // n))
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        sq = _sq_norms(points[start:stop, None, :] - points[None, :, :])
        sq[np.arange(stop - start), np.arange(start, stop)] = np.inf
        arg = sq.argmin(axis=1)
        best[start:stop] = sq[np.arange(stop - start), arg]
        best_j[start:stop] = arg
    return best, best_j


def _min_sq_index(points: np.ndarray, workers: int) -> tuple[np.ndarray, np.ndarray]:
    n = points.shape[0]
    tree = cKDTree(points)
    k = min(n, _CANDIDATES)
    _, idx = tree.query(points, k=k, workers=workers)
    sq = _sq_norms(points[:, None, :] - points[idx])
    sq[idx == np.arange(n)[:, None]] = np.inf
    arg = sq.argmin(axis=1)
    rows = np.arange(n)
    return sq[rows, arg], idx[rows, arg]


def nn_distances(sample, backend: str = "index", *, workers: int = 1,
                 with_log: bool = False) -> NnDistances:
    """Distance from every point to its nearest distinct-index neighbor.

    Parameters
    ----------
    sample : PointSample or array-like, shape (n, d)
    backend : "index" (kd-tree) or "brute" (quadratic reference scan).
        Both return identical distances.
    workers : worker count for partitioning kd-tree queries; results do
        not depend on it.
    with_log : also fill ``log_r = ln r``.

    Raises SampleTooSmall for n < 2 and DuplicatePoints when two points
    coincide exactly.
    """
    s = as_sample(sample)
    if s.n < 2:
        raise SampleTooSmall(f"nearest-neighbor query needs n >= 2, got n = {s.n}")
    if backend == "brute":
        sq, nbr = _min_sq_brute(s.points)
    elif backend == "index":
        sq, nbr = _min_sq_index(s.points, workers)
    else:
        raise ValueError(f"unknown backend {backend!r}; expected 'brute' or 'index'")
    zeros = np.flatnonzero(sq == 0.0)
    if zeros.size:
        i = int(zeros[0])
        j = int(nbr[i])
        raise DuplicatePoints(min(i, j), max(i, j))
    r = np.sqrt(sq)
    return NnDistances(r=r, log_r=np.log(r) if with_log else None)


# ---------------------------------------------------------------------------
# Log-domain path for the sparse interval lattice.

def interval_length(j) -> np.ndarray:
    """delta(j) = 1 / (j * (j + 1)); the lengths telescope to total 1."""
    j = np.asarray(j, dtype=np.float64)
    return 1.0 / (j * (j + 1.0))


def log_interval_start(j) -> np.ndarray:
    """ln a(j) for a(j) = 2**(2**j)."""
    j = np.asarray(j, dtype=np.float64)
    return np.exp2(j) * LN2


def log_coordinate(j, u) -> np.ndarray:
    """ln(a(j) + delta(j) * u), computed without forming the coordinate."""
    j = np.asarray(j, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    e = np.exp2(j)
    return e * LN2 + np.log1p(interval_length(j) * u * np.exp2(-e))


def coerce_log_points(values, *, clamp_j: int = DEFAULT_CLAMP_J) -> tuple[np.ndarray, np.ndarray]:
    """Normalize a sequence of lattice points to (j, u) arrays.

    Accepts LogPoint instances, objects with a ``log_point`` attribute
    (e.g. counterexample draws), or plain (j, u) pairs. Indices are
    validated (integer, >= 1), offsets must lie in [0, 1], and indices
    above ``clamp_j`` are folded down to ``clamp_j``.
    """
    if clamp_j < 1:
        raise ValueError(f"clamp_j must be >= 1, got {clamp_j}")
    js, us = [], []
    for item in values:
        if hasattr(item, "log_point"):
            item = item.log_point
        j, u = item
        js.append(j)
        us.append(u)
    j_arr = np.asarray(js, dtype=np.float64)
    u_arr = np.asarray(us, dtype=np.float64)
    if not np.all(np.isfinite(j_arr)) or np.any(j_arr < 1) or np.any(j_arr != np.floor(j_arr)):
        raise ValueError("interval indices must be integers >= 1")
    if not np.all(np.isfinite(u_arr)) or np.any(u_arr < 0.0) or np.any(u_arr > 1.0):
        raise ValueError("offsets must lie in [0, 1]")
    return np.minimum(j_arr.astype(np.int64), clamp_j), u_arr


def _adjacent_log_gaps(j: np.ndarray, u: np.ndarray) -> np.ndarray:
    """ln distance between consecutive points, sorted ascending by (j, u)."""
    j1, u1 = j[:-1], u[:-1]
    j2, u2 = j[1:], u[1:]
    out = np.empty(j1.shape)
    same = j1 == j2
    if same.any():
        out[same] = np.log(interval_length(j1[same])) + np.log(u2[same] - u1[same])
    cross = ~same
    if cross.any():
        e1 = np.exp2(j1[cross].astype(np.float64))
        e2 = np.exp2(j2[cross].astype(np.float64))
        # distance = a(j2) + d2*u2 - a(j1) - d1*u1; factor out a(j2) so the
        # correction is a well-conditioned log1p argument in (-1/4, 1].
        near = (interval_length(j2[cross]) * u2[cross]
                - interval_length(j1[cross]) * u1[cross]) * np.exp2(-e2)
        out[cross] = e2 * LN2 + np.log1p(near - np.exp2(e1 - e2))
    return out


def log_nn_distances_1d(values, *, clamp_j: int = DEFAULT_CLAMP_J) -> np.ndarray:
    """ln of each lattice point's nearest-neighbor distance.

    Points are sorted (the lattice intervals are disjoint and increasing,
    so 1-d nearest neighbors are sort-adjacent) and each gap is evaluated
    stably: within one interval as ln(delta * |u - u'|), across intervals
    as 2**j2 * ln 2 plus a log1p correction. Raises DuplicatePoints if two
    points coincide exactly after clamping.
    """
    j, u = coerce_log_points(values, clamp_j=clamp_j)
    n = j.shape[0]
    if n < 2:
        raise SampleTooSmall(f"nearest-neighbor query needs n >= 2, got n = {n}")
    order = np.lexsort((u, j))
    js, us = j[order], u[order]
    dup = (js[:-1] == js[1:]) & (us[:-1] == us[1:])
    if dup.any():
        k = int(np.flatnonzero(dup)[0])
        a, b = int(order[k]), int(order[k + 1])
        raise DuplicatePoints(min(a, b), max(a, b))
    gaps = _adjacent_log_gaps(js, us)
    sorted_lr = np.empty(n)
    sorted_lr[0] = gaps[0]
    sorted_lr[-1] = gaps[-1]
    if n > 2:
        sorted_lr[1:-1] = np.minimum(gaps[:-1], gaps[1:])
    out = np.empty(n)
    out[order] = sorted_lr
    return out
