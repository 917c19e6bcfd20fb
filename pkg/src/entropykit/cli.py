"""Command-line interface: estimate, diagnose, experiment, version.

Standard output carries only the result payload (JSON or the experiment
summary table); messages go to standard error. Exit codes are stable:

    0  success
    2  malformed input (CSV, spec JSON, config), including too-few points
    3  duplicate points in the sample
    4  dimension mismatch between sample and spec
    5  output path not writable
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .diagnostics import diagnose
from .distributions import spec_from_config, spec_to_config
from .errors import (
    ConfigError,
    CsvFormatError,
    DimensionMismatch,
    DuplicatePoints,
    EntropyKitError,
    SampleTooSmall,
)
from .estimators import kl_entropy
from .experiments import config_from_dict, run_and_persist
from .jsonfmt import dumps
from .nn import PointSample

THREADS_ENV_VAR = "ENTROPYKIT_THREADS"

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_DUPLICATES = 3
EXIT_DIMENSION = 4
EXIT_UNWRITABLE = 5


def read_points_csv(path: str) -> PointSample:
    """One point per line, comma-separated finite numbers, consistent d."""
    rows: list[list[float]] = []
    d = None
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            parts = text.split(",")
            try:
                values = [float(p) for p in parts]
            except ValueError:
                raise CsvFormatError(lineno, f"not a number in {text!r}") from None
            if not all(v == v and abs(v) != float("inf") for v in values):
                raise CsvFormatError(lineno, "coordinates must be finite")
            if d is None:
                d = len(values)
            elif len(values) != d:
                raise CsvFormatError(
                    lineno, f"expected {d} coordinates, found {len(values)}")
            rows.append(values)
    if not rows:
        raise CsvFormatError(1, "no points in file")
    return PointSample(rows)


def _load_spec(spec_arg: str):
    """Accept a path to a spec JSON file, or inline JSON starting with '{'."""
    text = spec_arg
    if not spec_arg.lstrip().startswith("{"):
        with open(spec_arg, "r") as fh:
            text = fh.read()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"spec is not valid JSON: {exc}") from exc
    return spec_from_config(cfg)


def _resolve_threads(flag_value) -> int:
    if flag_value is not None:
        threads = flag_value
    else:
        env = os.environ.get(THREADS_ENV_VAR)
        if env is None:
            return 1
        try:
            threads = int(env)
        except ValueError:
            raise ConfigError(
                f"{THREADS_ENV_VAR} must be an integer, got {env!r}") from None
    if threads < 0:
        raise ConfigError(f"--threads must be >= 0, got {threads}")
    return threads


def cmd_estimate(args) -> int:
    sample = read_points_csv(args.input)
    estimate = kl_entropy(sample, backend=args.backend)
    payload = {
        "schema_version": 1,
        "h_n": estimate.value,
        "n": estimate.n,
        "d": estimate.d,
        "backend": estimate.backend,
    }
    print(dumps(payload))
    return EXIT_OK


def cmd_diagnose(args) -> int:
    sample = read_points_csv(args.input)
    spec = _load_spec(args.spec)
    if spec.d != sample.d:
        raise DimensionMismatch(
            f"input has d = {sample.d} but spec has d = {spec.d}")
    report = diagnose(sample, spec)
    payload = {
        "schema_version": 1,
        "spec": spec_to_config(spec),
        "n": report.n,
        "d": report.d,
        "h_n": report.h_n,
        "m_n": report.m_n,
        "tilde_h_n": report.tilde_h_n,
        "ball_mass_sum": report.ball_mass_sum,
        "empirical_log_tail": report.empirical_log_tail,
        "ks_ball_mass_uniform": report.ks_ball_mass_uniform,
        "decomposition_gap": report.decomposition_gap,
    }
    print(dumps(payload))
    return EXIT_OK


def _format_summary(summaries) -> str:
    head = f"{'n':>9}  {'reps':>5}  {'mean_h':>14}  {'median_h':>14}  " \
           f"{'sd_h':>12}  {'mean_abs_err':>13}  {'failed':>6}"
    lines = [head]
    for s in summaries:
        def cell(v, width):
            return f"{'-':>{width}}" if v is None else f"{v:>{width}.6g}"
        lines.append(
            f"{s.n:>9}  {s.replicates:>5}  {cell(s.mean_h, 14)}  "
            f"{cell(s.median_h, 14)}  {cell(s.sd_h, 12)}  "
            f"{cell(s.mean_abs_error, 13)}  {s.failed:>6}")
    return "\n".join(lines)


def cmd_experiment(args) -> int:
    try:
        with open(args.config, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg_dict = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    config = config_from_dict(cfg_dict)
    threads = _resolve_threads(args.threads)
    try:
        _, summaries = run_and_persist(config, threads=threads,
                                       include_wall_time=args.timings)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    print(_format_summary(summaries))
    return EXIT_OK


def cmd_version(args) -> int:
    print(dumps({"schema_version": 1, "name": "entropykit", "version": __version__}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entropykit",
        description="Nearest-neighbor differential entropy estimation and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate entropy of a CSV of points")
    est.add_argument("--input", required=True, help="CSV file, one point per line")
    est.add_argument("--backend", choices=("index", "brute"), default="index")
    est.set_defaults(func=cmd_estimate)

    diag = sub.add_parser("diagnose", help="per-sample diagnostics against a spec")
    diag.add_argument("--input", required=True, help="CSV file, one point per line")
    diag.add_argument("--spec", required=True,
                      help="distribution spec: JSON file path or inline JSON")
    diag.set_defaults(func=cmd_diagnose)

    exp = sub.add_parser("experiment", help="run a config-driven Monte Carlo grid")
    exp.add_argument("--config", required=True, help="experiment config JSON file")
    exp.add_argument("--threads", type=int, default=None,
                     help=f"worker cap, 0 = auto (fallback: ${THREADS_ENV_VAR})")
    exp.add_argument("--timings", action="store_true",
                     help="write measured wall times into the CSV "
                          "(forfeits byte-identical reruns)")
    exp.set_defaults(func=cmd_experiment)

    ver = sub.add_parser("version", help="print version info")
    ver.set_defaults(func=cmd_version)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DuplicatePoints as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DUPLICATES
    except DimensionMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (CsvFormatError, ConfigError, SampleTooSmall) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (EntropyKitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
