"""Run metrics computed from a transmission trace.

Per-station throughput counts a success toward the window its transmission
started in. Inter-arrival times are start-to-start gaps between a station's
consecutive transmission attempts (collisions included: retries are part of
the access delay being measured). Loss is the fraction of attempts that went
unacknowledged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .protocols import Mode, ProtocolKind
from .trace import Outcome, TraceLog


@dataclass(frozen=True)
class IatStats:
    mean: float  # [us]
    std: float   # [us]
    min: float   # [us]
    max: float   # [us]


@dataclass(frozen=True)
class MetricsReport:
    window: tuple[int, int]
    per_station_throughput: list[float]       # [Mb/s]
    aggregate_throughput: float               # [Mb/s]
    jfi: float | None
    min_max_ratio: float | None
    interarrival: dict[int, IatStats | None]
    per_station_loss: list[float | None]
    aggregate_loss: float | None
    convergence_us: int | None

    def as_dict(self) -> dict:
        return {
            "window_us": list(self.window),
            "per_station_throughput_mbps": self.per_station_throughput,
            "aggregate_throughput_mbps": self.aggregate_throughput,
            "jfi": self.jfi,
            "min_max_ratio": self.min_max_ratio,
            "interarrival_us": {
                str(i): None if s is None else
                {"mean": s.mean, "std": s.std, "min": s.min, "max": s.max}
                for i, s in sorted(self.interarrival.items())
            },
            "per_station_loss": self.per_station_loss,
            "aggregate_loss": self.aggregate_loss,
            "convergence_us": self.convergence_us,
        }


def _default_window(trace: TraceLog, window: tuple[int, int] | None) -> tuple[int, int]:
    if window is None:
        return trace.warmup_us, trace.duration_us
    lo, hi = window
    if hi <= lo:
        raise ValueError("window must have positive length")
    return lo, hi


def jfi(values: list[float]) -> float:
    """Jain's fairness index: (sum x)^2 / (n * sum x^2), in (0, 1]."""
    if not values:
        raise ValueError("fairness is undefined for an empty allocation")
    total = float(sum(values))
    square_sum = float(sum(v * v for v in values))
    if square_sum == 0.0:
        raise ValueError("fairness is undefined when every share is zero")
    return total * total / (len(values) * square_sum)


def min_max_ratio(values: list[float]) -> float:
    if not values or max(values) <= 0.0:
        raise ValueError("min/max ratio is undefined without a positive maximum")
    return min(values) / max(values)


def loss_fraction(failures: int, successes: int) -> float:
    attempts = failures + successes
    if attempts == 0:
        raise ValueError("loss is undefined with no attempts")
    return failures / attempts


def throughput_per_station(trace: TraceLog, window: tuple[int, int] | None = None,
                           payload_bytes: int | None = None) -> list[float]:
    """Delivered payload rate per station over the window, in Mb/s."""
    lo, hi = _default_window(trace, window)
    payload = trace.payload_bytes if payload_bytes is None else payload_bytes
    counts = [0] * trace.n_stations
    for r in trace.records:
        if r.outcome is Outcome.SUCCESS and lo <= r.start < hi:
            counts[r.station] += 1
    # bits per microsecond is numerically Mb/s
    return [c * payload * 8 / (hi - lo) for c in counts]


def interarrival_stats(trace: TraceLog,
                       window: tuple[int, int] | None = None) -> dict[int, IatStats | None]:
    """Start-to-start gap statistics per station; None below two attempts."""
    lo, hi = _default_window(trace, window)
    starts: dict[int, list[int]] = {i: [] for i in range(trace.n_stations)}
    for r in trace.records:
        if lo <= r.start < hi:
            starts[r.station].append(r.start)
    out: dict[int, IatStats | None] = {}
    for i, s in starts.items():
        if len(s) < 2:
            out[i] = None
            continue
        gaps = np.diff(np.asarray(s, dtype=np.int64))
        out[i] = IatStats(mean=float(gaps.mean()), std=float(gaps.std()),
                          min=float(gaps.min()), max=float(gaps.max()))
    return out


def normalized_interarrival(stats: dict[int, IatStats | None],
                            reference_mean_us: float) -> dict[int, float | None]:
    """Per-station mean gaps as a multiple of a reference mean gap."""
    if reference_mean_us <= 0:
        raise ValueError("reference mean must be positive")
    return {i: None if s is None else s.mean / reference_mean_us
            for i, s in stats.items()}


def per_station_loss(trace: TraceLog,
                     window: tuple[int, int] | None = None) -> list[float | None]:
    lo, hi = _default_window(trace, window)
    f = [0] * trace.n_stations
    s = [0] * trace.n_stations
    for r in trace.records:
        if lo <= r.start < hi:
            if r.outcome is Outcome.SUCCESS:
                s[r.station] += 1
            else:
                f[r.station] += 1
    return [None if f[i] + s[i] == 0 else loss_fraction(f[i], s[i])
            for i in range(trace.n_stations)]


def convergence_time(trace: TraceLog) -> int | None:
    """When the run stopped colliding, or None if it never settled.

    Returns 0 for a run with no collisions at all. A CSMA/CA run that did
    collide never settles by construction; a CF-MAC run only counts as settled
    once a deterministic schedule exists (some Deterministic-mode record) and
    at least one success follows the last collision.
    """
    collision_like = [r for r in trace.records if r.outcome is not Outcome.SUCCESS]
    if not collision_like:
        return 0
    if trace.protocol is ProtocolKind.CSMA_CA:
        return None
    if trace.protocol is ProtocolKind.CF_MAC:
        if not any(r.mode is Mode.DETERMINISTIC for r in trace.records):
            return None
    settled_at = max(r.end for r in collision_like)
    if not any(r.outcome is Outcome.SUCCESS and r.start >= settled_at
               for r in trace.records):
        return None
    return settled_at


def steady_state_start(trace: TraceLog) -> int | None:
    """Earliest time after which only Deterministic-mode successes remain.

    None when the trace never reaches that regime (no deterministic records,
    or disturbances run to the end of the trace).
    """
    if not any(r.mode is Mode.DETERMINISTIC for r in trace.records):
        return None
    disturbances = [r.end for r in trace.records
                    if r.outcome is not Outcome.SUCCESS or r.mode is Mode.LEGACY]
    start = max(disturbances) if disturbances else 0
    if not any(r.outcome is Outcome.SUCCESS and r.start >= start for r in trace.records):
        return None
    return start


def compute_report(trace: TraceLog, window: tuple[int, int] | None = None) -> MetricsReport:
    lo, hi = _default_window(trace, window)
    throughput = throughput_per_station(trace, (lo, hi))
    try:
        fairness = jfi(throughput)
        ratio = min_max_ratio(throughput)
    except ValueError:
        fairness = None
        ratio = None
    losses = per_station_loss(trace, (lo, hi))
    f_total = sum(1 for r in trace.records
                  if r.outcome is not Outcome.SUCCESS and lo <= r.start < hi)
    s_total = sum(1 for r in trace.records
                  if r.outcome is Outcome.SUCCESS and lo <= r.start < hi)
    aggregate_loss = None if f_total + s_total == 0 else loss_fraction(f_total, s_total)
    return MetricsReport(
        window=(lo, hi),
        per_station_throughput=throughput,
        aggregate_throughput=float(sum(throughput)),
        jfi=fairness,
        min_max_ratio=ratio,
        interarrival=interarrival_stats(trace, (lo, hi)),
        per_station_loss=losses,
        aggregate_loss=aggregate_loss,
        convergence_us=convergence_time(trace),
    )
