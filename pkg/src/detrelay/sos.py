"""Single-round ordered schedules for the reduced 4-user network.

Bits are grouped into four uplink segments (keyed by source, weakest
first) and four downlink segments (keyed by destination, weakest first).
Opposite-direction partners share one channel level: the relay receives
their XOR and forwards it verbatim, so it only permutes levels between the
uplink and downlink layouts.  Segment sizes against the cumulative reach
of each segment owner are exactly the feasibility conditions checked by
:func:`detrelay.region.sos_feasible`; the builder fails precisely when one
of them is violated.

Absolute level positions are a construction choice (segments are stacked
bottom-up from level 1), validated end-to-end by the simulator.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import (
    Edge,
    NodeOrdering,
    ReducedRateTuple,
    RelayNetworkError,
    USERS,
)
from .reduction import ReducedNetwork


def bit_id(stream: Edge, index: int) -> str:
    """Deterministic label of the index-th bit of a stream, e.g. ``b12^2``."""
    return f"b{stream[0]}{stream[1]}^{index}"


@dataclass(frozen=True)
class PairedBits:
    """The first ``count`` bits of two opposite streams, XOR-combined."""

    stream_a: Edge
    stream_b: Edge
    count: int


@dataclass(frozen=True)
class SingleBits:
    """Unpaired bits of one stream: indices first_index..first_index+count-1."""

    stream: Edge
    count: int
    first_index: int


@dataclass(frozen=True)
class Segment:
    """Bits scheduled for one owner (source on uplink, destination on downlink)."""

    owner: int
    paired: tuple[PairedBits, ...]
    singles: tuple[SingleBits, ...]

    @property
    def size(self) -> int:
        return sum(p.count for p in self.paired) + sum(s.count for s in self.singles)


def build_segments(
    rates: ReducedRateTuple, ordering: NodeOrdering
) -> tuple[tuple[Segment, ...], tuple[Segment, ...]]:
    """Construct the four uplink and four downlink segments.

    Uplink segments are returned in stacking order (weakest source first);
    downlink segments likewise (weakest destination first).  A bit consumed
    by a lower segment never reappears in a higher one.  Within a segment,
    paired entries precede singles, partners in ascending node id.
    """
    uplink = []
    rem = rates.as_map()
    for src in reversed(ordering.uplink):  # weakest source first
        paired = []
        singles = []
        for p in sorted(k for k in USERS if k != src):
            phi = min(rem[(src, p)], rem[(p, src)])
            if phi:
                paired.append(PairedBits((src, p), (p, src), phi))
                rem[(src, p)] -= phi
                rem[(p, src)] -= phi
        for p in sorted(k for k in USERS if k != src):
            left = rem[(src, p)]
            if left:
                first = rates.r(src, p) - left + 1
                singles.append(SingleBits((src, p), left, first))
                rem[(src, p)] = 0
        uplink.append(Segment(src, tuple(paired), tuple(singles)))

    downlink = []
    rem = rates.as_map()
    for dst in reversed(ordering.downlink):  # weakest destination first
        paired = []
        singles = []
        for p in sorted(k for k in USERS if k != dst):
            phi = min(rem[(dst, p)], rem[(p, dst)])
            if phi:
                paired.append(PairedBits((dst, p), (p, dst), phi))
                rem[(dst, p)] -= phi
                rem[(p, dst)] -= phi
        for p in sorted(k for k in USERS if k != dst):
            left = rem[(p, dst)]
            if left:
                first = rates.r(p, dst) - left + 1
                singles.append(SingleBits((p, dst), left, first))
                rem[(p, dst)] = 0
        downlink.append(Segment(dst, tuple(paired), tuple(singles)))

    return tuple(uplink), tuple(downlink)


@dataclass(frozen=True)
class ScheduledBit:
    """Payload template of one channel level.

    ``streams`` holds (i->j, j->i) for an XOR pair or a single stream;
    ``index`` is the 1-based bit number within each stream.
    """

    streams: tuple[Edge, ...]
    index: int

    @property
    def is_pair(self) -> bool:
        return len(self.streams) == 2

    def key(self) -> tuple:
        if self.is_pair:
            lo = min(self.streams)
            return ("pair", lo, self.index)
        return ("single", self.streams[0], self.index)

    def label(self) -> str:
        parts = [bit_id(s, self.index) for s in self.streams]
        return "+".join(parts)


class InfeasibleScheduleError(RelayNetworkError):
    """A segment stack does not fit under its owner's reduced reach."""

    def __init__(self, failures: Sequence[str]):
        self.failures = tuple(failures)
        super().__init__("; ".join(failures))


def _expand(segment: Segment) -> list[ScheduledBit]:
    out = []
    for p in segment.paired:
        for n in range(1, p.count + 1):
            out.append(ScheduledBit((p.stream_a, p.stream_b), n))
    for s in segment.singles:
        for n in range(s.first_index, s.first_index + s.count):
            out.append(ScheduledBit((s.stream,), n))
    return out


@dataclass(frozen=True)
class LevelSchedule:
    """A one-round schedule: level layouts plus the relay's permutation."""

    uplink_levels: Mapping[int, ScheduledBit]
    downlink_levels: Mapping[int, ScheduledBit]
    relay_map: Mapping[int, int]
    round: int = 0

    @property
    def width(self) -> int:
        return len(self.uplink_levels)

    def uplink_placement(self, node: int) -> tuple[tuple[str, int], ...]:
        """(bit id, level) pairs this node transmits, bottom level first."""
        out = []
        for level in sorted(self.uplink_levels):
            item = self.uplink_levels[level]
            for stream in item.streams:
                if stream[0] == node:
                    out.append((bit_id(stream, item.index), level))
        return tuple(out)

    def downlink_receivers(self, level: int) -> tuple[int, ...]:
        item = self.downlink_levels[level]
        return tuple(sorted({s[1] for s in item.streams}))

    def transmitters(self, level: int) -> tuple[int, ...]:
        item = self.uplink_levels[level]
        return tuple(sorted({s[0] for s in item.streams}))


def build_sos_schedule(
    reduced: ReducedNetwork, rates: ReducedRateTuple | None = None
) -> LevelSchedule:
    """Build the single-round schedule for an ordered-feasible rate tuple.

    ``rates`` defaults to the reduced network's own tuple; pass the
    detour-equivalent tuple to schedule a detoured instance.  Raises
    :class:`InfeasibleScheduleError` iff a cumulative segment-size bound
    fails, which coincides with the tuple not being ordered-feasible.
    """
    if rates is None:
        rates = reduced.rates
    ordering = reduced.ordering()
    up_segments, down_segments = build_segments(rates, ordering)

    failures = []
    cum = 0
    for seg in up_segments:
        cum += seg.size
        reach = reduced.uplink[seg.owner - 1]
        if cum > reach:
            failures.append(
                f"uplink segments through node {seg.owner} need {cum} levels,"
                f" reach is {reach}"
            )
    cum = 0
    for seg in down_segments:
        cum += seg.size
        reach = reduced.downlink[seg.owner - 1]
        if cum > reach:
            failures.append(
                f"downlink segments through node {seg.owner} need {cum} levels,"
                f" reach is {reach}"
            )
    if failures:
        raise InfeasibleScheduleError(failures)

    uplink_levels: dict[int, ScheduledBit] = {}
    level = 1
    for seg in up_segments:
        for item in _expand(seg):
            uplink_levels[level] = item
            level += 1

    downlink_levels: dict[int, ScheduledBit] = {}
    level = 1
    for seg in down_segments:
        for item in _expand(seg):
            downlink_levels[level] = item
            level += 1

    down_by_key = {item.key(): lv for lv, item in downlink_levels.items()}
    relay_map = {
        lv: down_by_key[item.key()] for lv, item in sorted(uplink_levels.items())
    }
    if len(set(relay_map.values())) != len(relay_map):
        raise AssertionError("relay map is not a bijection")  # pragma: no cover

    return LevelSchedule(uplink_levels, downlink_levels, relay_map)
