"""Transmission trace: what happened on the channel, one record per attempt."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .protocols import Mode, ProtocolKind

TRACE_COLUMNS = ("station", "start_us", "end_us", "outcome", "mode")


class Outcome(Enum):
    SUCCESS = "success"
    COLLISION = "collision"
    CCA_ERROR = "cca_error"  # collision caused by a false-idle carrier sample


@dataclass(frozen=True)
class TransmissionRecord:
    station: int
    start: int  # [us]
    end: int    # [us] end of the data frame itself
    outcome: Outcome
    mode: Mode  # station mode at transmission time


@dataclass
class TraceLog:
    """Complete channel history of one run plus the parameters that shaped it."""

    protocol: ProtocolKind
    n_stations: int
    rate: int
    payload_bytes: int
    duration_us: int
    warmup_us: int
    seed: int
    cycle_us: int  # deterministic rotation period for this (n, rate)
    records: list[TransmissionRecord] = field(default_factory=list)
    successes: list[int] = field(default_factory=list)  # per-station tallies
    failures: list[int] = field(default_factory=list)

    def station_records(self, station: int) -> list[TransmissionRecord]:
        return [r for r in self.records if r.station == station]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for r in self.records:
                writer.writerow((r.station, r.start, r.end, r.outcome.value, r.mode.value))


def read_trace_csv(path: str | Path) -> list[TransmissionRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [TransmissionRecord(station=int(row["station"]), start=int(row["start_us"]),
                                   end=int(row["end_us"]), outcome=Outcome(row["outcome"]),
                                   mode=Mode(row["mode"]))
                for row in reader]
