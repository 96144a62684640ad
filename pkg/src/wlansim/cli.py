"""Experiment runner front end.

Parses a plan (INI or JSON config plus flag overrides), sweeps the Cartesian
product of protocols, rates, station counts, and seeds, and writes per-run
trace and metrics files plus one experiment_summary.csv. Replaying a plan
with the same seeds reproduces every output byte for byte; existing outputs
are never overwritten unless forced.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .bianchi import DcfModelParams, solve_fixed_point
from .engine import ConfigError, SimConfig, run_experiment
from .metrics import MetricsReport
from .phy import SUPPORTED_RATES
from .protocols import ProtocolKind
from .schedule import DEFAULT_TABLE, ScheduleRow, ScheduleTable

SUMMARY_COLUMNS = ("protocol", "rate_mbps", "n", "seed", "station",
                   "throughput_mbps", "jfi", "min_max_ratio", "iat_mean_us",
                   "iat_std_us", "loss_fraction", "convergence_us",
                   "bianchi_p", "iat_over_cfmac")
METRICS_COLUMNS = ("station", "throughput_mbps", "jfi", "min_max_ratio",
                   "iat_mean_us", "iat_std_us", "iat_min_us", "iat_max_us",
                   "loss_fraction", "convergence_us")

_PROTOCOLS = {p.value: p for p in ProtocolKind}
_EXPERIMENT_KEYS = {"protocol", "protocols", "rate", "rates", "stations",
                    "seed", "seeds", "duration", "warmup", "payload",
                    "cca_error"}
_OUTPUT_KEYS = {"directory", "format"}


@dataclass
class ExperimentPlan:
    """A validated sweep: every axis combination becomes one run."""

    protocols: list[ProtocolKind] = field(
        default_factory=lambda: [ProtocolKind.CF_MAC])
    rates: list[int] = field(default_factory=lambda: [6])
    stations: list[int] = field(default_factory=lambda: [12])
    seeds: list[int] = field(default_factory=lambda: [1])
    duration_s: float = 90.0
    warmup_s: float = 5.0
    payload_bytes: int = 1470
    cca_error_prob: float = 0.0
    schedule: ScheduleTable = DEFAULT_TABLE
    out_dir: Path = Path("results")
    fmt: str = "csv"

    def run_keys(self) -> list[tuple[str, int, int, int]]:
        keys = sorted((p.value, r, n, s) for p in self.protocols
                      for r in self.rates for n in self.stations
                      for s in self.seeds)
        return keys

    def sim_config(self, key: tuple[str, int, int, int]) -> SimConfig:
        proto, rate, n, seed = key
        return SimConfig(n_stations=n, protocol=_PROTOCOLS[proto], rate=rate,
                         payload_bytes=self.payload_bytes,
                         duration_s=self.duration_s, seed=seed,
                         cca_error_prob=self.cca_error_prob,
                         warmup_s=self.warmup_s, schedule=self.schedule)

    def validate(self) -> None:
        for name, axis in (("protocols", self.protocols),
                           ("rates", self.rates),
                           ("stations", self.stations),
                           ("seeds", self.seeds)):
            if not axis:
                raise ConfigError(f"{name}: empty sweep axis")
            if len(set(axis)) != len(axis):
                raise ConfigError(f"{name}: duplicate values")
        for rate in self.rates:
            if rate not in SUPPORTED_RATES:
                raise ConfigError(f"rate: unsupported value {rate} "
                                  f"(supported: {SUPPORTED_RATES})")
        for n in self.stations:
            if n < 1:
                raise ConfigError(f"stations: must be at least 1, got {n}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format: must be csv or json, got {self.fmt}")
        # surface per-run problems (duration, warmup, schedule coverage) now
        for key in self.run_keys():
            self.sim_config(key).validate()


def _as_list(value) -> list[str]:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [tok for tok in str(value).replace(",", " ").split() if tok]


def _parse_protocols(value) -> list[ProtocolKind]:
    out = []
    for name in _as_list(value):
        if name not in _PROTOCOLS:
            raise ConfigError(f"protocol: unknown name {name!r} "
                              f"(choose from {sorted(_PROTOCOLS)})")
        out.append(_PROTOCOLS[name])
    return out


def _parse_ints(key: str, value) -> list[int]:
    try:
        return [int(tok) for tok in _as_list(value)]
    except ValueError:
        raise ConfigError(f"{key}: expected integers, got {value!r}") from None


def _parse_float(key: str, value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _parse_schedule(section: dict) -> ScheduleTable:
    rows = dict(DEFAULT_TABLE.rows)
    for key, value in section.items():
        try:
            rate = int(key)
        except ValueError:
            raise ConfigError(f"schedule: rate keys must be integers, "
                              f"got {key!r}") from None
        parts = _as_list(value)
        if len(parts) != 2:
            raise ConfigError(f"schedule.{key}: expected 'share, epsilon', "
                              f"got {value!r}")
        rows[rate] = ScheduleRow(share_us=_parse_float(f"schedule.{key}", parts[0]),
                                 epsilon_us=_parse_float(f"schedule.{key}", parts[1]))
    return ScheduleTable(rows=rows)


def _sections_from_file(path: Path) -> dict[str, dict]:
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be an object")
        return {str(k): dict(v) for k, v in data.items()}
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"config: {exc}") from None
    return {name: dict(parser[name]) for name in parser.sections()}


def parse_config(path: str | Path) -> ExperimentPlan:
    """Load and validate a plan; an empty file yields the default plan."""
    sections = _sections_from_file(Path(path))
    plan = ExperimentPlan()
    for name in sections:
        if name not in ("experiment", "output", "schedule"):
            raise ConfigError(f"unknown config section: {name}")
    exp = sections.get("experiment", {})
    for key in exp:
        if key not in _EXPERIMENT_KEYS:
            raise ConfigError(f"unknown config key: experiment.{key}")
    if "protocol" in exp or "protocols" in exp:
        plan.protocols = _parse_protocols(exp.get("protocols", exp.get("protocol")))
    if "rate" in exp or "rates" in exp:
        plan.rates = _parse_ints("rates", exp.get("rates", exp.get("rate")))
    if "stations" in exp:
        plan.stations = _parse_ints("stations", exp["stations"])
    if "seed" in exp or "seeds" in exp:
        plan.seeds = _parse_ints("seeds", exp.get("seeds", exp.get("seed")))
    if "duration" in exp:
        plan.duration_s = _parse_float("duration", exp["duration"])
    if "warmup" in exp:
        plan.warmup_s = _parse_float("warmup", exp["warmup"])
    if "payload" in exp:
        plan.payload_bytes = _parse_ints("payload", exp["payload"])[0]
    if "cca_error" in exp:
        plan.cca_error_prob = _parse_float("cca_error", exp["cca_error"])
    out = sections.get("output", {})
    for key in out:
        if key not in _OUTPUT_KEYS:
            raise ConfigError(f"unknown config key: output.{key}")
    if "directory" in out:
        plan.out_dir = Path(out["directory"])
    if "format" in out:
        plan.fmt = str(out["format"])
    if "schedule" in sections:
        plan.schedule = _parse_schedule(sections["schedule"])
    plan.validate()
    return plan


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_metrics_csv(path: str, report: MetricsReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for i, thr in enumerate(report.per_station_throughput):
            stats = report.interarrival.get(i)
            writer.writerow([
                i, _fmt(thr), "", "",
                _fmt(stats.mean if stats else None),
                _fmt(stats.std if stats else None),
                _fmt(stats.min if stats else None),
                _fmt(stats.max if stats else None),
                _fmt(report.per_station_loss[i]), "",
            ])
        writer.writerow(["aggregate", _fmt(report.aggregate_throughput),
                         _fmt(report.jfi), _fmt(report.min_max_ratio),
                         "", "", "", "", _fmt(report.aggregate_loss),
                         _fmt(report.convergence_us)])


def _write_metrics(path: str, fmt: str, report: MetricsReport) -> None:
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(report.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        _write_metrics_csv(path, report)


def _execute(job):
    """One sweep cell; failures are reported, not raised, so a bad run
    cannot take the rest of the sweep down with it."""
    key, cfg, trace_path, metrics_path, fmt = job
    try:
        trace, report = run_experiment(cfg)
        trace.write_csv(trace_path)
        _write_metrics(metrics_path, fmt, report)
    except Exception as exc:
        return key, None, f"{type(exc).__name__}: {exc}"
    return key, report, None


def run_plan(plan: ExperimentPlan, force: bool = False, jobs: int = 1) -> int:
    """Execute every run in the plan and write the summary; returns the
    process exit status (0 ok, 2 if any run failed)."""
    plan.validate()
    out_dir = plan.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_path = out_dir / "experiment_summary.csv"
    jobs_list = []
    for key in plan.run_keys():
        stem = f"{key[0]}_r{key[1]}_n{key[2]}_s{key[3]}"
        jobs_list.append((key, plan.sim_config(key),
                          str(out_dir / f"trace_{stem}.csv"),
                          str(out_dir / f"metrics_{stem}.{plan.fmt}"),
                          plan.fmt))
    if not force:
        targets = [summary_path] + [Path(j[2]) for j in jobs_list] \
                  + [Path(j[3]) for j in jobs_list]
        for target in targets:
            if target.exists():
                raise ConfigError(f"output exists, pass --force to "
                                  f"overwrite: {target}")

    results: dict[tuple, tuple] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for key, report, error in pool.map(_execute, jobs_list):
                results[key] = (report, error)
    else:
        for job in jobs_list:
            key, report, error = _execute(job)
            results[key] = (report, error)

    failed = [(key, error) for key, (_, error) in sorted(results.items())
              if error is not None]
    for key, error in failed:
        print(f"run {key} failed: {error}", file=sys.stderr)

    # reference mean gap per (rate, n, seed) for the normalized column
    cfmac_ref: dict[tuple[int, int, int], float] = {}
    for key, (report, error) in results.items():
        if error is None and key[0] == ProtocolKind.CF_MAC.value:
            means = [s.mean for s in report.interarrival.values()
                     if s is not None]
            if means:
                cfmac_ref[key[1:]] = sum(means) / len(means)

    model_p: dict[int, float] = {}
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for key in plan.run_keys():
            report, error = results[key]
            if error is not None:
                continue
            proto, rate, n, seed = key
            if n not in model_p:
                model_p[n] = solve_fixed_point(DcfModelParams(n=n))[1]
            ref = cfmac_ref.get((rate, n, seed))
            for i, thr in enumerate(report.per_station_throughput):
                stats = report.interarrival.get(i)
                norm = None
                if stats is not None and ref:
                    norm = stats.mean / ref
                writer.writerow([
                    proto, rate, n, seed, i, _fmt(thr), "", "",
                    _fmt(stats.mean if stats else None),
                    _fmt(stats.std if stats else None),
                    _fmt(report.per_station_loss[i]), "",
                    _fmt(model_p[n]), _fmt(norm),
                ])
            writer.writerow([
                proto, rate, n, seed, "aggregate",
                _fmt(report.aggregate_throughput), _fmt(report.jfi),
                _fmt(report.min_max_ratio), "", "",
                _fmt(report.aggregate_loss), _fmt(report.convergence_us),
                _fmt(model_p[n]), "",
            ])
    return 2 if failed else 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="wlansim",
                     description="deterministic WLAN contention simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment plan")
    run.add_argument("--config", type=Path, help="INI or JSON plan file")
    run.add_argument("--protocol", choices=sorted(_PROTOCOLS),
                     help="override: single protocol")
    run.add_argument("--stations", type=int, help="override: station count")
    run.add_argument("--rate", type=int, help="override: data rate in Mb/s")
    run.add_argument("--duration", type=float, help="simulated seconds")
    run.add_argument("--seed", type=int, help="override: single seed")
    run.add_argument("--cca-error", type=float, dest="cca_error",
                     help="carrier sense flip probability")
    run.add_argument("--warmup", type=float,
                     help="seconds excluded from metrics")
    run.add_argument("--out", type=Path, help="output directory")
    run.add_argument("--format", choices=("csv", "json"), dest="fmt",
                     help="per-run metrics file format")
    run.add_argument("--force", action="store_true",
                     help="overwrite existing outputs")
    run.add_argument("--jobs", type=int, default=1,
                     help="concurrent runs (results merge deterministically)")

    model = sub.add_parser("model", help="print the fixed-point model table")
    model.add_argument("--stations", default="2,4,8,12,24",
                       help="comma-separated station counts")
    return parser


def _plan_from_args(args) -> ExperimentPlan:
    plan = parse_config(args.config) if args.config else ExperimentPlan()
    if args.protocol is not None:
        plan.protocols = [_PROTOCOLS[args.protocol]]
    if args.stations is not None:
        plan.stations = [args.stations]
    if args.rate is not None:
        plan.rates = [args.rate]
    if args.seed is not None:
        plan.seeds = [args.seed]
    if args.duration is not None:
        plan.duration_s = args.duration
    if args.warmup is not None:
        plan.warmup_s = args.warmup
    if args.cca_error is not None:
        plan.cca_error_prob = args.cca_error
    if args.out is not None:
        plan.out_dir = args.out
    if args.fmt is not None:
        plan.fmt = args.fmt
    plan.validate()
    return plan


def _cmd_model(args) -> int:
    counts = _parse_ints("stations", args.stations)
    print("n,tau,p")
    for n in counts:
        tau, p = solve_fixed_point(DcfModelParams(n=n))
        print(f"{n},{tau!r},{p!r}")
    return 0


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.command == "model":
            return _cmd_model(args)
        plan = _plan_from_args(args)
        if args.jobs < 1:
            raise ConfigError("jobs: must be at least 1")
        return run_plan(plan, force=args.force, jobs=args.jobs)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
