"""Config-driven Monte Carlo experiment runner.

A run is a grid of (sample size, replicate) cells. Each cell draws a fresh
sample from its own derived random stream, estimates the entropy, and
optionally attaches diagnostics; cells are independent, so they can be
farmed out to a worker pool without changing a single bit of the output.
Results persist as a CSV plus a JSON run manifest.

Three regimes are covered by the same machinery: convergence on compact
support, convergence under a finite log-tail moment (e.g. Cauchy), and
blowup on the counterexample lattice law, which runs through the
log-domain estimator and reports the base-2 ell statistic alongside H_n.
"""

from __future__ import annotations

import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .diagnostics import ball_mass_sum as _ball_mass_sum
from .diagnostics import empirical_log_tail, m_statistic, tilde_h
from .distributions import (
    Counterexample,
    DistributionSpec,
    exact_entropy,
    spec_from_config,
    spec_to_config,
)
from .errors import ConfigError, EmptyInput, EntropyKitError
from .estimators import ell_statistic, kl_entropy, kl_entropy_logdomain
from .jsonfmt import dumps
from .seeding import derive_rng

#: Diagnostics that can be toggled per run; names match the CSV columns.
DIAGNOSTIC_TOGGLES = ("m_n", "tilde_h_n", "ball_mass_sum", "log_tail", "ell_n")

CSV_HEADER = ("n", "replicate", "h_n", "true_entropy", "abs_error",
              "m_n", "tilde_h_n", "ball_mass_sum", "log_tail", "ell_n",
              "wall_time_ms")

_BACKENDS = ("index", "brute")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one Monte Carlo run."""

    spec: DistributionSpec
    n_grid: tuple[int, ...]
    replicates: int
    seed: int
    backend: str = "index"
    diagnostics: frozenset[str] = frozenset()
    output_path: str = "results.csv"

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        object.__setattr__(self, "diagnostics", frozenset(self.diagnostics))
        if not grid:
            raise ConfigError("n_grid must not be empty")
        if any(n < 2 for n in grid):
            raise ConfigError("every n in n_grid must be >= 2")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("n_grid must be strictly ascending")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.backend not in _BACKENDS:
            raise ConfigError(f"backend must be one of {_BACKENDS}, got {self.backend!r}")
        unknown = self.diagnostics - set(DIAGNOSTIC_TOGGLES)
        if unknown:
            raise ConfigError(f"unknown diagnostics: {sorted(unknown)}")
        if not isinstance(self.output_path, str) or not self.output_path:
            raise ConfigError("output_path must be a non-empty string")


_CONFIG_KEYS = ("spec", "n_grid", "replicates", "seed", "backend",
                "diagnostics", "output_path")


def config_from_dict(cfg) -> ExperimentConfig:
    """Strict field-for-field parse of a config object."""
    if not isinstance(cfg, dict):
        raise ConfigError(f"config must be an object, got {type(cfg).__name__}")
    unknown = set(cfg) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = {"spec", "n_grid", "replicates", "seed"} - set(cfg)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    spec = spec_from_config(cfg["spec"])
    try:
        n_grid = tuple(int(n) for n in cfg["n_grid"])
        replicates = int(cfg["replicates"])
        seed = int(cfg["seed"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    kwargs = {}
    if "backend" in cfg:
        kwargs["backend"] = cfg["backend"]
    if "diagnostics" in cfg:
        toggles = cfg["diagnostics"]
        if isinstance(toggles, str) or not isinstance(toggles, (list, tuple)):
            raise ConfigError("diagnostics must be a list of toggle names")
        kwargs["diagnostics"] = frozenset(toggles)
    if "output_path" in cfg:
        kwargs["output_path"] = cfg["output_path"]
    return ExperimentConfig(spec=spec, n_grid=n_grid, replicates=replicates,
                            seed=seed, **kwargs)


def config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "spec": spec_to_config(config.spec),
        "n_grid": list(config.n_grid),
        "replicates": config.replicates,
        "seed": config.seed,
        "backend": config.backend,
        "diagnostics": sorted(config.diagnostics),
        "output_path": config.output_path,
    }


@dataclass(frozen=True)
class ResultRow:
    """Per-replicate output record. ``h_n`` is None when the cell failed."""

    n: int
    replicate: int
    h_n: Optional[float]
    true_entropy: Optional[float]
    abs_error: Optional[float]
    m_n: Optional[float] = None
    tilde_h_n: Optional[float] = None
    ball_mass_sum: Optional[float] = None
    log_tail: Optional[float] = None
    ell_n: Optional[float] = None
    wall_time_ms: float = 0.0
    error: Optional[str] = None


@dataclass(frozen=True)
class SummaryRow:
    """Aggregates over the non-failed replicates at one sample size."""

    n: int
    mean_h: Optional[float]
    median_h: Optional[float]
    sd_h: Optional[float]
    mean_abs_error: Optional[float]
    replicates: int
    failed: int = 0


def run_cell(config: ExperimentConfig, n: int, replicate: int) -> ResultRow:
    """Compute one (n, replicate) cell; reproducible in isolation."""
    spec = config.spec
    divergent = isinstance(spec, Counterexample)
    start = time.perf_counter()
    try:
        rng = derive_rng(config.seed, n, replicate, purpose="sample")
        draws = spec.sample(n, rng)
        true_h = exact_entropy(spec)
        extras: dict[str, Optional[float]] = {}
        if divergent:
            h = kl_entropy_logdomain(draws, clamp_j=spec.clamp_j).value
            extras["ell_n"] = ell_statistic(draws, clamp_j=spec.clamp_j)
            if "log_tail" in config.diagnostics:
                extras["log_tail"] = empirical_log_tail(draws)
        else:
            h = kl_entropy(draws, config.backend).value
            if "m_n" in config.diagnostics:
                extras["m_n"] = m_statistic(draws, spec, config.backend)
            if "tilde_h_n" in config.diagnostics:
                extras["tilde_h_n"] = tilde_h(draws, spec, config.backend)
            if "ball_mass_sum" in config.diagnostics:
                extras["ball_mass_sum"] = _ball_mass_sum(draws, spec, config.backend)
            if "log_tail" in config.diagnostics:
                extras["log_tail"] = empirical_log_tail(draws)
            if "ell_n" in config.diagnostics and spec.d == 1:
                extras["ell_n"] = ell_statistic(draws, config.backend)
        wall = (time.perf_counter() - start) * 1e3
        return ResultRow(
            n=n, replicate=replicate, h_n=h, true_entropy=true_h,
            abs_error=abs(h - true_h) if np.isfinite(true_h) else None,
            wall_time_ms=wall, **extras)
    except EntropyKitError as exc:
        wall = (time.perf_counter() - start) * 1e3
        return ResultRow(n=n, replicate=replicate, h_n=None,
                         true_entropy=exact_entropy(spec), abs_error=None,
                         wall_time_ms=wall, error=f"{type(exc).__name__}: {exc}")


def _run_cell_args(args) -> ResultRow:
    return run_cell(*args)


def run_experiment(config: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    """Run every cell of the grid; output is independent of ``threads``."""
    cells = [(config, n, rep)
             for n in config.n_grid for rep in range(config.replicates)]
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads == 1 or len(cells) == 1:
        rows = [run_cell(*cell) for cell in cells]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_run_cell_args, cells, chunksize=1))
    rows.sort(key=lambda r: (r.n, r.replicate))
    return rows


def run_convergence(config: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    """Monte Carlo convergence run; rejects the counterexample spec."""
    if isinstance(config.spec, Counterexample):
        raise ConfigError("convergence runs need a spec with finite-coordinate "
                          "samples; use run_divergence for the counterexample")
    return run_experiment(config, threads)


def run_divergence(config: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    """Blowup run on the counterexample law (log-domain estimator)."""
    if not isinstance(config.spec, Counterexample):
        raise ConfigError("divergence runs need the counterexample spec")
    return run_experiment(config, threads)


def summarize(rows: Sequence[ResultRow]) -> list[SummaryRow]:
    """Group rows by n; failed rows are excluded from the statistics and
    reported in the ``failed`` count. Median uses the lower-middle value
    for even counts."""
    rows = list(rows)
    if not rows:
        raise EmptyInput("no rows to summarize")
    out = []
    for n in sorted({r.n for r in rows}):
        group = [r for r in rows if r.n == n]
        ok = [r for r in group if r.h_n is not None]
        failed = len(group) - len(ok)
        if not ok:
            out.append(SummaryRow(n=n, mean_h=None, median_h=None, sd_h=None,
                                  mean_abs_error=None, replicates=0, failed=failed))
            continue
        h = np.array([r.h_n for r in ok])
        errs = [r.abs_error for r in ok if r.abs_error is not None]
        out.append(SummaryRow(
            n=n,
            mean_h=float(h.mean()),
            median_h=float(np.sort(h)[(h.size - 1) // 2]),
            sd_h=float(h.std(ddof=1)) if h.size > 1 else 0.0,
            mean_abs_error=float(np.mean(errs)) if errs else None,
            replicates=len(ok),
            failed=failed,
        ))
    return out


# ---------------------------------------------------------------------------
# Persistence: CSV rows plus a JSON run manifest, written atomically.


def _fmt_field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: Sequence[ResultRow], *, include_wall_time: bool = False) -> str:
    """Render rows under the documented schema.

    Measured wall time varies run to run, so the column is left empty
    unless ``include_wall_time`` is set; everything else is reproducible
    byte for byte.
    """
    lines = [",".join(CSV_HEADER)]
    for r in rows:
        fields = [str(r.n), str(r.replicate), _fmt_field(r.h_n),
                  _fmt_field(r.true_entropy), _fmt_field(r.abs_error),
                  _fmt_field(r.m_n), _fmt_field(r.tilde_h_n),
                  _fmt_field(r.ball_mass_sum), _fmt_field(r.log_tail),
                  _fmt_field(r.ell_n),
                  _fmt_field(r.wall_time_ms) if include_wall_time else ""]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_rows(rows: Sequence[ResultRow], path: str, *,
               include_wall_time: bool = False) -> None:
    _atomic_write(path, rows_to_csv(rows, include_wall_time=include_wall_time))


def _parse_field(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def read_rows(path: str) -> list[ResultRow]:
    """Parse a results CSV back into rows (inverse of write_rows)."""
    with open(path, "r", newline="") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or tuple(lines[0].split(",")) != CSV_HEADER:
        raise ConfigError(f"{path} does not carry the results schema {CSV_HEADER}")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(CSV_HEADER):
            raise ConfigError(f"bad row in {path}: {line!r}")
        rows.append(ResultRow(
            n=int(parts[0]), replicate=int(parts[1]),
            h_n=_parse_field(parts[2]), true_entropy=_parse_field(parts[3]),
            abs_error=_parse_field(parts[4]), m_n=_parse_field(parts[5]),
            tilde_h_n=_parse_field(parts[6]), ball_mass_sum=_parse_field(parts[7]),
            log_tail=_parse_field(parts[8]), ell_n=_parse_field(parts[9]),
            wall_time_ms=_parse_field(parts[10]) or 0.0))
    return rows


def manifest_path(output_path: str) -> str:
    return output_path + ".manifest.json"


def write_manifest(config: ExperimentConfig, rows: Sequence[ResultRow],
                   started_utc: str, finished_utc: str) -> None:
    failures = [
        {"n": r.n, "replicate": r.replicate, "error": r.error}
        for r in rows if r.error is not None
    ]
    manifest = {
        "schema_version": 1,
        "kind": "run_manifest",
        "code_version": __version__,
        "started_utc": started_utc,
        "finished_utc": finished_utc,
        "config": config_to_dict(config),
        "row_count": len(rows),
        "failure_count": len(failures),
        "failures": failures,
        "total_wall_time_ms": float(sum(r.wall_time_ms for r in rows)),
    }
    _atomic_write(manifest_path(config.output_path), dumps(manifest) + "\n")


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def run_and_persist(config: ExperimentConfig, threads: int = 1, *,
                    include_wall_time: bool = False):
    """Run the grid, write CSV + manifest atomically, return (rows, summaries)."""
    started = _utc_now()
    if isinstance(config.spec, Counterexample):
        rows = run_divergence(config, threads)
    else:
        rows = run_convergence(config, threads)
    write_rows(rows, config.output_path, include_wall_time=include_wall_time)
    write_manifest(config, rows, started, _utc_now())
    return rows, summarize(rows)
