"""Event-driven channel contention engine.

Time is integer microseconds. The channel alternates between idle spans and
busy periods, and during an idle span every station has a computable next
attempt instant:

  legacy            anchor + DIFS + b slots (counted from the idle onset the
                    station observed)
  deterministic     its absolute deadline, unaligned to any slot grid
  hold carry-over   the exact channel-release instant
  reduced backoff   anchor + DIFS + rb slots

The loop repeatedly takes the earliest such instant, lets every station due
at it start transmitting (simultaneous starts collide), and resolves the
busy period that follows: data frames that overlap in time form one
collision, a lone frame is a success and its ACK arrives SIFS after it
ends. Outcomes are applied at the channel-release instant; the ACK timeout
is folded into that release rather than modeled as a separate observable,
which keeps every legacy station on one shared post-busy slot grid.

Channel occupancy is bookkept conservatively:

  success    [tx_start, data_end + SIFS + ACK)  the ACK exchange holds the
                                                medium end to end
  collision  [tx_start, data_end + DIFS)        wreckage plus an EIFS-style
                                                penalty

A deterministic deadline that falls inside a busy period is probed at the
deadline instant against this bookkept state: the station holds for up to
two slots hoping the channel clears, transmits at the release instant if it
does, and otherwise arms a reduced backoff that counts idle slots after the
release. One such episode is tolerated; the next busy finding (a new
transmission interrupting the countdown, a busy sample at its fire instant,
or a busy deadline probe) reverts the station to legacy contention.

Optional CCA noise flips the observed channel state with probability
cca_error_prob at exactly two kinds of instants: deadline probes and
reduced-backoff fire instants. Legacy slot sensing is always faithful. A
false-idle sample during someone else's data frame produces a staggered
overlap, recorded as CcaError for the sampler and Collision for its
victims; a false-idle sample landing in a busy tail that no data frame
covers goes through clean and is recorded as a Success.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, replace

from .metrics import MetricsReport, compute_report
from .phy import (MAC_OVERHEAD_BYTES, FrameSpec, ack_airtime, data_airtime,
                  phy_profile)
from .protocols import (Mode, ProbeAction, ProtocolKind, RandomSource,
                        cfmac_probe, initial_station, on_failure, on_success)
from .schedule import DEFAULT_TABLE, ScheduleTable, cycle_timer
from .trace import Outcome, TraceLog, TransmissionRecord


class ConfigError(ValueError):
    """Raised for an invalid simulation configuration."""


# scheduling kinds inside the loop
_LEGACY = 0     # slot cadence driven by the backoff counter
_SCHEDULED = 1  # deterministic, waiting for an absolute deadline
_CARRY = 2      # deterministic, fires at the channel-release instant
_REDUCED = 3    # deterministic, reduced backoff armed on the slot cadence


@dataclass
class SimConfig:
    """One run: homogeneous stations, fixed rate, saturated uplink."""

    n_stations: int
    protocol: ProtocolKind
    rate: int  # [Mb/s]
    payload_bytes: int = 1470
    duration_s: float = 90.0
    seed: int = 1
    cca_error_prob: float = 0.0
    warmup_s: float = 5.0
    schedule: ScheduleTable = DEFAULT_TABLE

    def validate(self) -> None:
        if self.n_stations < 1:
            raise ConfigError("n_stations must be at least 1")
        if self.duration_s <= 0:
            raise ConfigError("duration must be positive")
        if not 0 <= self.warmup_s < self.duration_s:
            raise ConfigError("warmup must be non-negative and shorter than "
                              "the run")
        if not 0.0 <= self.cca_error_prob <= 1.0:
            raise ConfigError("cca_error_prob must lie in [0, 1]")
        if self.payload_bytes <= 0:
            raise ConfigError("payload_bytes must be positive")
        profile = phy_profile(self.rate)
        # a shorter cycle could re-schedule a deadline inside the busy
        # period that produced it, which the loop does not support
        floor = frame_exchange_us(self.rate, self.payload_bytes) + profile.difs
        if self.schedule.row(self.rate).total_us < floor:
            raise ConfigError(f"schedule total for rate {self.rate} is too "
                              f"short to cover one frame exchange ({floor} us)")


@dataclass(frozen=True)
class ActiveTransmission:
    station: int
    start: int  # [us]
    end: int    # [us]


def frame_exchange_us(rate: int, payload_bytes: int) -> int:
    """Airtime of one data + SIFS + ACK exchange in microseconds."""
    profile = phy_profile(rate)
    data = data_airtime(FrameSpec(payload_bytes + MAC_OVERHEAD_BYTES, rate))
    return data + profile.sifs + ack_airtime(profile)


def cca_sample(truly_idle: bool, rng: RandomSource, error_prob: float) -> bool:
    """Observed channel state: the truth, flipped with probability error_prob.

    With error_prob = 0 no randomness is consumed, so error-free runs keep
    the same draw sequence no matter how often the channel is sensed.
    """
    if error_prob <= 0.0:
        return truly_idle
    if rng.chance(error_prob):
        return not truly_idle
    return truly_idle


def _overlap_groups(txs: list[ActiveTransmission]) -> list[list[ActiveTransmission]]:
    """Connected components of transmissions under strict temporal overlap."""
    groups: list[list[ActiveTransmission]] = []
    group: list[ActiveTransmission] = []
    group_end = 0
    for tx in sorted(txs, key=lambda t: (t.start, t.station)):
        if group and tx.start < group_end:
            group.append(tx)
            group_end = max(group_end, tx.end)
        else:
            if group:
                groups.append(group)
            group = [tx]
            group_end = tx.end
    if group:
        groups.append(group)
    return groups


def resolve_overlap(active) -> dict[int, Outcome]:
    """Success for a lone transmission, Collision for every overlapping one."""
    out: dict[int, Outcome] = {}
    for group in _overlap_groups(list(active)):
        verdict = Outcome.SUCCESS if len(group) == 1 else Outcome.COLLISION
        for tx in group:
            out[tx.station] = verdict
    return out


def _release_time(groups: list[list[ActiveTransmission]],
                  sifs_ack_us: int, difs_us: int) -> int:
    """When the channel reads idle again after these transmissions."""
    release = 0
    for group in groups:
        end = max(tx.end for tx in group)
        tail = sifs_ack_us if len(group) == 1 else difs_us
        release = max(release, end + tail)
    return release


def run_experiment(config: SimConfig) -> tuple[TraceLog, MetricsReport]:
    """Simulate one saturated run and compute its metrics."""
    config.validate()
    profile = phy_profile(config.rate)
    slot, difs = profile.slot, profile.difs
    data_us = data_airtime(FrameSpec(config.payload_bytes + MAC_OVERHEAD_BYTES,
                                     config.rate))
    sifs_ack_us = profile.sifs + ack_airtime(profile)
    hold_us = 2 * slot
    n = config.n_stations
    rate = config.rate
    table = config.schedule
    duration_us = round(config.duration_s * 1_000_000)
    warmup_us = round(config.warmup_s * 1_000_000)
    p_err = config.cca_error_prob

    rng = RandomSource(config.seed)
    states = [initial_station(i, config.protocol, rng) for i in range(n)]
    kind = [_LEGACY] * n
    anchor = [0] * n    # [us] idle-onset reference for the slot cadences
    rb_slots = [0] * n  # reduced-backoff draw, valid while kind is _REDUCED
    carry_at = [0] * n  # fire instant, valid while kind is _CARRY
    has_det = config.protocol is ProtocolKind.CF_MAC
    records: list[TransmissionRecord] = []
    clock = 0

    while True:
        t_next = None
        winners: list[int] = []
        for i in range(n):
            k = kind[i]
            if k == _LEGACY:
                c = anchor[i] + difs + states[i].backoff.b * slot
            elif k == _SCHEDULED:
                c = states[i].deadline
            elif k == _CARRY:
                c = carry_at[i]
            else:
                c = anchor[i] + difs + rb_slots[i] * slot
            if t_next is None or c < t_next:
                t_next = c
                winners = [i]
            elif c == t_next:
                winners.append(i)
        if t_next >= duration_us:
            break
        assert t_next >= clock, "event scheduled in the past"
        clock = t_next

        # stations due now fire unless a CCA flip makes them see a phantom
        # busy; flipped scheduled stations start a hold window, flipped
        # reduced-backoff stations take the busy finding as final and revert
        txers: list[int] = []
        flip_holders: list[int] = []
        for i in winners:
            if kind[i] in (_SCHEDULED, _REDUCED) \
                    and not cca_sample(True, rng, p_err):
                decision = cfmac_probe(states[i], False, t_next, rng)
                states[i] = decision.state
                if decision.action is ProbeAction.HOLD_PROBE:
                    flip_holders.append(i)
                else:
                    kind[i] = _LEGACY
                    anchor[i] = t_next
            else:
                txers.append(i)

        if not txers:
            # nothing actually transmitted; the phantom holds fail against a
            # channel that never clears in their eyes and arm the fallback
            for i in flip_holders:
                decision = cfmac_probe(states[i], False, t_next + hold_us, rng)
                states[i] = decision.state
                kind[i] = _REDUCED
                rb_slots[i] = decision.slots
                anchor[i] = t_next + hold_us
            continue

        # --- busy period ---
        t0 = t_next
        due = set(winners)
        active = [ActiveTransmission(i, t0, t0 + data_us) for i in txers]
        mode_at = {i: states[i].mode for i in txers}
        flip_joins: set[int] = set()
        handled = due | set(flip_holders)

        for i in range(n):
            if i in due:
                continue
            if kind[i] == _LEGACY:
                # bank the idle slots that elapsed before the channel went busy
                elapsed = (t0 - anchor[i] - difs) // slot
                if elapsed > 0:
                    st = states[i]
                    b = st.backoff.b - elapsed
                    assert b >= 1, "non-winner backoff ran out unnoticed"
                    states[i] = replace(st, backoff=replace(st.backoff, b=b))
            elif kind[i] == _REDUCED:
                # a new transmission interrupted the countdown: that is the
                # second busy finding, the station abandons its claim
                decision = cfmac_probe(states[i], False, t0, rng)
                states[i] = decision.state
                kind[i] = _LEGACY

        free_at = _release_time(_overlap_groups(active), sifs_ack_us, difs)
        holders: dict[int, int] = {i: t0 for i in flip_holders}

        if has_det:
            # deadline probes and hold expiries inside the busy span, in
            # time order; false-idle samples join mid-air and push the
            # release further out, uncovering later deadlines
            events: list[tuple[int, int, int]] = []
            for i in flip_holders:
                heapq.heappush(events, (t0 + hold_us, 1, i))

            def cover(lo: int, hi: int, inclusive: bool) -> None:
                for j in range(n):
                    if j in handled or kind[j] != _SCHEDULED:
                        continue
                    d = states[j].deadline
                    if (d > lo or (inclusive and d == lo)) and d < hi:
                        handled.add(j)
                        heapq.heappush(events, (d, 0, j))

            cover(t0, free_at, False)
            while events and events[0][0] < free_at:
                tme, tag, i = heapq.heappop(events)
                if tag == 0:
                    if cca_sample(False, rng, p_err):
                        # phantom idle: transmit into the ongoing traffic
                        active.append(ActiveTransmission(i, tme, tme + data_us))
                        mode_at[i] = states[i].mode
                        flip_joins.add(i)
                        grown = _release_time(_overlap_groups(active),
                                              sifs_ack_us, difs)
                        if grown > free_at:
                            cover(free_at, grown, True)
                            free_at = grown
                        continue
                    decision = cfmac_probe(states[i], False, tme, rng)
                    states[i] = decision.state
                    if decision.action is ProbeAction.HOLD_PROBE:
                        holders[i] = tme
                        heapq.heappush(events, (tme + hold_us, 1, i))
                    else:
                        kind[i] = _LEGACY
                else:
                    decision = cfmac_probe(states[i], False, tme, rng)
                    states[i] = decision.state
                    kind[i] = _REDUCED
                    rb_slots[i] = decision.slots
                    del holders[i]

        # holds that outlast the busy span fire at the release instant
        for i in sorted(holders):
            kind[i] = _CARRY
            carry_at[i] = free_at

        groups = _overlap_groups(active)
        outcome: dict[int, Outcome] = {}
        for group in groups:
            for tx in group:
                if len(group) == 1:
                    outcome[tx.station] = Outcome.SUCCESS
                elif tx.station in flip_joins:
                    outcome[tx.station] = Outcome.CCA_ERROR
                else:
                    outcome[tx.station] = Outcome.COLLISION

        for tx in sorted(active, key=lambda t: (t.start, t.station)):
            records.append(TransmissionRecord(tx.station, tx.start, tx.end,
                                              outcome[tx.station],
                                              mode_at[tx.station]))

        for tx in sorted(active, key=lambda t: t.station):
            i = tx.station
            if outcome[i] is Outcome.SUCCESS:
                states[i] = on_success(states[i], tx.start, n, rate, rng, table)
            else:
                states[i] = on_failure(states[i], rng, tx_start_us=tx.start,
                                       n=n, rate=rate, table=table)
            kind[i] = _SCHEDULED if states[i].mode is Mode.DETERMINISTIC \
                else _LEGACY
            assert states[i].deadline is None or states[i].deadline >= free_at

        for i in range(n):
            if kind[i] in (_LEGACY, _REDUCED):
                anchor[i] = free_at
        clock = free_at

    trace = TraceLog(protocol=config.protocol, n_stations=n, rate=rate,
                     payload_bytes=config.payload_bytes,
                     duration_us=duration_us, warmup_us=warmup_us,
                     seed=config.seed,
                     cycle_us=cycle_timer(n, rate, table),
                     records=records,
                     successes=[s.successes for s in states],
                     failures=[s.failures for s in states])
    return trace, compute_report(trace)
