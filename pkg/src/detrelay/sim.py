"""Bit-exact simulation of schedules plus the exhaustive verification sweep.

The simulator generates seeded pseudo-random payload bits per stream per
round, pushes them through the level-space channel (placement, XOR
superposition, restriction), and has every receiver decode using only its
observations and its own transmitted bits.  Detoured bits are buffered at
the via node and forwarded on the next round, so a detoured stream runs
one round of pipeline latency per intermediate hop.

``enumerate_verify`` sweeps every reduced 4-user gain profile and integral
rate tuple up to given caps: classifies membership, schedules every member
(directly or after detours), simulates it, and requires bit-exact
delivery.  Bulk classification is vectorized; every member and a random
sample of non-members are re-checked with the scalar evaluators, which
remain the authority.
"""
from __future__ import annotations

import json
import random
from collections import deque
from itertools import combinations, combinations_with_replacement
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .model import (
    BitFrame,
    Edge,
    GainProfile,
    PAIR_ORDER_12,
    RateTuple,
    ReducedRateTuple,
    RelayNetworkError,
    USERS,
    RELAY,
    observe_downlink,
    order_reduced,
    superpose_uplink,
)
from .region import eval_lemma1, eval_theorem1, eval_theorem2, sos_feasible
from .reduction import LevelAssignment, ReducedNetwork, ReductionRecord, reduce_network
from .sos import LevelSchedule, build_sos_schedule
from .detour import DetourPlan, Route, apply_best, verify_conservation


class OutOfRegionError(RelayNetworkError):
    """The rate tuple violates the network bounds, nothing to simulate."""


class DecodeFailureError(RelayNetworkError):
    def __init__(self, round_: int, level: int, stream: Edge):
        self.round = round_
        self.level = level
        self.stream = stream
        super().__init__(
            f"decode failure in round {round_} at level {level} for stream "
            f"{stream[0]}->{stream[1]}"
        )


@dataclass
class StreamStats:
    injected: int = 0
    delivered: int = 0
    per_round_delivered: dict[int, int] = field(default_factory=dict)
    max_latency: int = 0

    def record(self, round_: int, latency: int) -> None:
        self.delivered += 1
        self.per_round_delivered[round_] = self.per_round_delivered.get(round_, 0) + 1
        self.max_latency = max(self.max_latency, latency)


@dataclass(frozen=True)
class DeliveryReport:
    rounds: int
    flush_rounds: int
    seed: int
    streams: Mapping[Edge, StreamStats]
    relay_verbatim_ok: bool

    @property
    def complete(self) -> bool:
        return all(s.delivered == s.injected for s in self.streams.values())

    @property
    def total_injected(self) -> int:
        return sum(s.injected for s in self.streams.values())

    @property
    def total_delivered(self) -> int:
        return sum(s.delivered for s in self.streams.values())


def _direct_routes(rates: ReducedRateTuple) -> tuple[Route, ...]:
    return tuple(
        Route(edge, edge, count) for edge, count in rates.as_map().items() if count
    )


class _Engine:
    """One network instance: schedule, routing, payloads and decoding."""

    def __init__(
        self,
        gains: GainProfile,
        up_blocks: Mapping[int, tuple[int, ...]],
        down_blocks: Mapping[int, tuple[int, ...]],
        schedule: LevelSchedule,
        up_embed: Sequence[int],
        down_embed: Sequence[int],
        routes: Sequence[Route],
        original: ReducedRateTuple,
        relay_up: Mapping[int, int],
        relay_down: Mapping[int, int],
        rounds: int,
        seed: int,
    ):
        self.gains = gains
        self.up_blocks = dict(up_blocks)
        self.down_blocks = dict(down_blocks)
        self.schedule = schedule
        self.up_embed = tuple(up_embed)
        self.down_embed = tuple(down_embed)
        self.routes = tuple(routes)
        self.original = original
        self.relay_up = dict(relay_up)
        self.relay_down = dict(relay_down)
        self.rounds = rounds
        self.seed = seed
        self.rng = random.Random(seed)

        # Dedicated relay-message levels must never collide with the
        # scheduled user levels.
        up_used = {lv for b in self.up_blocks.values() for lv in b}
        down_used = {lv for b in self.down_blocks.values() for lv in b}
        if up_used & set(self.up_embed) or down_used & set(self.down_embed):
            raise AssertionError("reserved relay levels overlap the schedule")

        # Slot plan: per directed user edge, the (route, leg, occurrence)
        # carried by each schedule slot of that stream, in route order.
        self.slot_plan: dict[Edge, list[tuple[int, int, int]]] = {}
        for rid, rt in enumerate(self.routes):
            for leg_idx, leg in enumerate(zip(rt.path, rt.path[1:])):
                slots = self.slot_plan.setdefault(leg, [])
                for occ in range(rt.count):
                    slots.append((rid, leg_idx, occ))
        # Offset of each route within its origin stream's per-round payload.
        self.route_offset: dict[int, int] = {}
        seen: dict[Edge, int] = {}
        for rid, rt in enumerate(self.routes):
            self.route_offset[rid] = seen.get(rt.origin, 0)
            seen[rt.origin] = seen.get(rt.origin, 0) + rt.count

        self.flush_rounds = max(
            (len(rt.path) - 2 for rt in self.routes), default=0
        )
        self.stats: dict[Edge, StreamStats] = {}
        for edge, count in original.as_map().items():
            self.stats[edge] = StreamStats(injected=count * rounds)
        for i in USERS:
            self.stats[(i, RELAY)] = StreamStats(injected=self.relay_up.get(i, 0) * rounds)
            self.stats[(RELAY, i)] = StreamStats(injected=self.relay_down.get(i, 0) * rounds)

        self.buffers: dict[tuple[int, int], deque] = {}
        self.payloads: dict[Edge, dict[int, list[int]]] = {
            edge: {} for edge in self.stats
        }
        self.relay_verbatim_ok = True

    def _inject(self, rnd: int) -> None:
        for edge in list(self.original.as_map()) + [
            (i, RELAY) for i in USERS
        ] + [(RELAY, i) for i in USERS]:
            if edge[0] == RELAY:
                count = self.relay_down.get(edge[1], 0)
            elif edge[1] == RELAY:
                count = self.relay_up.get(edge[0], 0)
            else:
                count = self.original.r(*edge)
            self.payloads[edge][rnd] = [self.rng.randrange(2) for _ in range(count)]

    def run(self) -> DeliveryReport:
        total = self.rounds + self.flush_rounds
        for rnd in range(1, total + 1):
            if rnd <= self.rounds:
                self._inject(rnd)
            self._round(rnd)
        return DeliveryReport(
            self.rounds,
            self.flush_rounds,
            self.seed,
            self.stats,
            self.relay_verbatim_ok,
        )

    def _round(self, rnd: int) -> None:
        frames: dict[int, dict[int, int]] = {i: {} for i in USERS}
        # sent[(stream, index)] = (identity | None, value, route id, leg)
        sent: dict[tuple[Edge, int], tuple] = {}

        injecting = rnd <= self.rounds
        for node in USERS:
            block = self.up_blocks.get(node, ())
            if injecting and block:
                bits = self.payloads[(node, RELAY)][rnd]
                for pos, level in enumerate(block):
                    frames[node][level] = bits[pos]

        for red_level in sorted(self.schedule.uplink_levels):
            item = self.schedule.uplink_levels[red_level]
            abs_level = self.up_embed[red_level - 1]
            for stream in item.streams:
                src = stream[0]
                rid, leg, occ = self.slot_plan[stream][item.index - 1]
                identity = None
                value = 0
                if leg == 0:
                    if injecting:
                        bit_index = self.route_offset[rid] + occ
                        value = self.payloads[self.routes[rid].origin][rnd][bit_index]
                        identity = (rnd, bit_index)
                else:
                    queue = self.buffers.get((src, rid))
                    if queue:
                        identity, value = queue.popleft()
                frames[src][abs_level] = value
                sent[(stream, item.index)] = (identity, value, rid, leg)

        obs = superpose_uplink(
            {n: BitFrame(f, rnd) for n, f in frames.items()}, self.gains
        )

        # Relay side: read its own streams, forward the rest verbatim.
        if injecting:
            for node in USERS:
                block = self.up_blocks.get(node, ())
                bits = self.payloads[(node, RELAY)][rnd]
                for pos, level in enumerate(block):
                    if obs.get(level) != bits[pos]:
                        raise DecodeFailureError(rnd, level, (node, RELAY))
                    self.stats[(node, RELAY)].record(rnd, 0)

        down: dict[int, int] = {}
        if injecting:
            for node in USERS:
                block = self.down_blocks.get(node, ())
                bits = self.payloads[(RELAY, node)][rnd]
                for pos, level in enumerate(block):
                    down[level] = bits[pos]
        for red_up, red_down in self.schedule.relay_map.items():
            down[self.down_embed[red_down - 1]] = obs.get(self.up_embed[red_up - 1], 0)

        down_frame = BitFrame(down, rnd)

        # Verbatim check: every forwarded level equals the XOR of what was
        # actually transmitted there, recomputed from the node frames.
        for red_up, red_down in self.schedule.relay_map.items():
            lv = self.up_embed[red_up - 1]
            expected = 0
            for node in USERS:
                expected ^= frames[node].get(lv, 0)
            if down_frame.get(self.down_embed[red_down - 1]) != expected:
                self.relay_verbatim_ok = False

        for node in USERS:
            heard = observe_downlink(down_frame, self.gains.down(node))
            if injecting:
                block = self.down_blocks.get(node, ())
                bits = self.payloads[(RELAY, node)][rnd]
                for pos, level in enumerate(block):
                    if heard.get(level) != bits[pos]:
                        raise DecodeFailureError(rnd, level, (RELAY, node))
                    self.stats[(RELAY, node)].record(rnd, 0)

            for red_level in sorted(self.schedule.downlink_levels):
                item = self.schedule.downlink_levels[red_level]
                abs_level = self.down_embed[red_level - 1]
                for stream in item.streams:
                    if stream[1] != node:
                        continue
                    if abs_level > self.gains.down(node):
                        raise AssertionError(
                            f"level {abs_level} unreachable for node {node}"
                        )  # pragma: no cover
                    value = heard.get(abs_level)
                    if value is None:
                        raise DecodeFailureError(rnd, abs_level, stream)
                    if item.is_pair:
                        own = stream[::-1]
                        value ^= sent[(own, item.index)][1]
                    identity, sent_value, rid, leg = sent[(stream, item.index)]
                    if identity is None:
                        continue
                    if value != sent_value:
                        raise DecodeFailureError(rnd, abs_level, stream)
                    route = self.routes[rid]
                    if leg == len(route.path) - 2:
                        inject_round, bit_index = identity
                        expected = self.payloads[route.origin][inject_round][bit_index]
                        if value != expected:
                            raise DecodeFailureError(rnd, abs_level, route.origin)
                        self.stats[route.origin].record(rnd, rnd - inject_round)
                    else:
                        self.buffers.setdefault((node, rid), deque()).append(
                            (identity, value)
                        )


def _unoccupied(limit: int, occupied: Sequence[int]) -> tuple[int, ...]:
    taken = set(occupied)
    return tuple(lv for lv in range(1, limit + 1) if lv not in taken)


def plan_reduced(
    uplink: Sequence[int], downlink: Sequence[int], rates: ReducedRateTuple
) -> DetourPlan:
    """Ordered-feasible tuples get an empty plan, others the detour search."""
    if eval_lemma1(uplink, downlink, rates).satisfied:
        return DetourPlan((), rates, rates, _direct_routes(rates))
    return apply_best(uplink, downlink, rates)


def simulate_5node(
    gains: GainProfile, rates: RateTuple, rounds: int, seed: int
) -> DeliveryReport:
    """End-to-end simulation of a full 5-node instance.

    Serves the relay's streams on dedicated levels, schedules the reduced
    network (detouring first when needed), and verifies every decoded bit.
    """
    if not eval_theorem1(gains, rates).satisfied:
        worst = eval_theorem1(gains, rates).worst()
        raise OutOfRegionError(
            f"tuple is outside the achievable region ({worst.condition_id}:"
            f" {worst.lhs} > {worst.rhs})"
        )
    reduced = reduce_network(gains, rates)
    plan = plan_reduced(reduced.uplink, reduced.downlink, reduced.rates)
    schedule = build_sos_schedule(reduced, plan.equivalent)

    ordering = reduced.derivation.ordering
    up_total = gains.up(ordering.t)
    down_total = gains.down(ordering.a)
    up_embed = _unoccupied(up_total, reduced.derivation.uplink_levels.occupied())
    down_embed = _unoccupied(down_total, reduced.derivation.downlink_levels.occupied())

    engine = _Engine(
        gains,
        reduced.derivation.uplink_levels.blocks,
        reduced.derivation.downlink_levels.blocks,
        schedule,
        up_embed,
        down_embed,
        plan.routes,
        reduced.rates,
        rates.relay_uplink(),
        rates.relay_downlink(),
        rounds,
        seed,
    )
    return engine.run()


def _wrap_reduced(
    uplink: Sequence[int], downlink: Sequence[int], rates: ReducedRateTuple
) -> ReducedNetwork:
    ordering = order_reduced(uplink, downlink)
    record = ReductionRecord(ordering, LevelAssignment({}), LevelAssignment({}), 0, 0)
    return ReducedNetwork(tuple(uplink), tuple(downlink), rates, record)


def simulate_reduced(
    uplink: Sequence[int],
    downlink: Sequence[int],
    rates: ReducedRateTuple,
    rounds: int,
    seed: int,
    plan: DetourPlan | None = None,
) -> DeliveryReport:
    """Simulate a bare 4-user instance (no relay streams)."""
    if plan is None:
        plan = plan_reduced(uplink, downlink, rates)
    reduced = _wrap_reduced(uplink, downlink, rates)
    schedule = build_sos_schedule(reduced, plan.equivalent)
    gains = GainProfile(tuple(uplink), tuple(downlink))
    ordering = reduced.ordering()
    up_embed = tuple(range(1, uplink[ordering.t - 1] + 1))
    down_embed = tuple(range(1, downlink[ordering.a - 1] + 1))
    engine = _Engine(
        gains, {}, {}, schedule, up_embed, down_embed,
        plan.routes, rates, {}, {}, rounds, seed,
    )
    return engine.run()


# ---------------------------------------------------------------------------
# Random in-region samplers (used by the randomized verification suites).


def sample_region_tuple(gains: GainProfile, rng: random.Random) -> RateTuple:
    """Random tuple inside the 5-node region, grown greedily from zero."""
    from .model import PAIR_ORDER_20

    values = {e: 0 for e in PAIR_ORDER_20}
    pairs = list(PAIR_ORDER_20)
    for step in (4, 2, 1):
        rng.shuffle(pairs)
        for edge in pairs:
            values[edge] += step
            if not eval_theorem1(gains, RateTuple.from_map(values)).satisfied:
                values[edge] -= step
    return RateTuple.from_map(values)


def sample_sos_tuple(
    uplink: Sequence[int], downlink: Sequence[int], rng: random.Random
) -> ReducedRateTuple:
    """Random ordered-feasible reduced tuple, grown greedily from zero."""
    values = {e: 0 for e in PAIR_ORDER_12}
    pairs = list(PAIR_ORDER_12)
    for step in (4, 2, 1):
        rng.shuffle(pairs)
        for edge in pairs:
            values[edge] += step
            if not sos_feasible(uplink, downlink, ReducedRateTuple.from_map(values)):
                values[edge] -= step
    return ReducedRateTuple.from_map(values)


# ---------------------------------------------------------------------------
# Exhaustive verification sweep.


class EnumerationFailure(RelayNetworkError):
    """A sweep instance failed; the message carries it serialized."""

    def __init__(self, kind: str, uplink, downlink, flat, detail: str):
        self.instance = {
            "kind": kind,
            "uplink": list(uplink),
            "downlink": list(downlink),
            "rates_flat": list(flat),
            "detail": detail,
        }
        super().__init__(f"sweep failure: {json.dumps(self.instance, sort_keys=True)}")


@dataclass(frozen=True)
class EnumerationReport:
    gain_max: int
    rate_max: int
    profiles: int
    instances: int
    members: int
    sos_direct: int
    detoured: int
    schedule_mismatches: int
    crosscheck_mismatches: int
    failures: int

    def merged(self, other: "EnumerationReport") -> "EnumerationReport":
        assert (self.gain_max, self.rate_max) == (other.gain_max, other.rate_max)
        return EnumerationReport(
            self.gain_max,
            self.rate_max,
            self.profiles + other.profiles,
            self.instances + other.instances,
            self.members + other.members,
            self.sos_direct + other.sos_direct,
            self.detoured + other.detoured,
            self.schedule_mismatches + other.schedule_mismatches,
            self.crosscheck_mismatches + other.crosscheck_mismatches,
            self.failures + other.failures,
        )


_GRID_CACHE: dict[int, tuple] = {}


def _bulk_matrices(rate_max: int):
    """All rate tuples up to rate_max with their bound-side LHS columns.

    Roles are the identity because sweep profiles are generated
    non-increasing.  Returns (flat grid, bounds-LHS, cycle-LHS, bound
    selector indices for each).
    """
    if rate_max in _GRID_CACHE:
        return _GRID_CACHE[rate_max]
    base = rate_max + 1
    n = base ** 12
    grid = np.array(
        np.unravel_index(np.arange(n), (base,) * 12), dtype=np.int32
    ).T
    col = {edge: grid[:, k] for k, edge in enumerate(PAIR_ORDER_12)}
    pm = {}
    for i in USERS:
        for j in USERS:
            if i < j:
                pm[(i, j)] = np.maximum(col[(i, j)], col[(j, i)])

    def key(i, j):
        return (i, j) if i < j else (j, i)

    def bmo(x, y, z):
        return np.maximum.reduce([
            col[(x, y)] + col[(x, z)] + pm[key(y, z)],
            col[(y, x)] + col[(y, z)] + pm[key(x, z)],
            col[(z, x)] + col[(z, y)] + pm[key(x, y)],
        ])

    def bmi(x, y, z):
        return np.maximum.reduce([
            col[(y, x)] + col[(z, x)] + pm[key(y, z)],
            col[(x, y)] + col[(z, y)] + pm[key(x, z)],
            col[(x, z)] + col[(y, z)] + pm[key(x, y)],
        ])

    # Bound selector: 0..3 uplink gains strongest-first, 4..7 downlink.
    UP, DOWN = 0, 4
    th2_cols = []
    th2_sel = []

    def add(lhs, sel):
        th2_cols.append(lhs)
        th2_sel.append(sel)

    add(col[(4, 1)] + col[(4, 2)] + col[(4, 3)], UP + 3)
    add(col[(1, 4)] + col[(2, 4)] + col[(3, 4)], DOWN + 3)
    add(col[(4, 1)] + col[(4, 2)] + col[(3, 1)] + col[(3, 2)] + pm[(3, 4)], UP + 2)
    add(col[(1, 4)] + col[(2, 4)] + col[(1, 3)] + col[(2, 3)] + pm[(3, 4)], DOWN + 2)
    add(col[(2, 1)] + col[(3, 1)] + col[(4, 1)] + bmo(2, 3, 4), UP + 1)
    add(col[(1, 2)] + col[(1, 3)] + col[(1, 4)] + bmo(2, 3, 4), UP + 0)
    add(col[(2, 1)] + col[(2, 3)] + col[(2, 4)] + bmo(1, 3, 4), UP + 0)
    add(col[(3, 1)] + col[(3, 2)] + col[(3, 4)] + bmo(1, 2, 4), UP + 0)
    add(col[(4, 1)] + col[(4, 2)] + col[(4, 3)] + bmo(1, 2, 3), UP + 0)
    add(col[(1, 2)] + col[(1, 3)] + col[(1, 4)] + bmi(2, 3, 4), DOWN + 1)
    add(col[(2, 1)] + col[(3, 1)] + col[(4, 1)] + bmi(2, 3, 4), DOWN + 0)
    add(col[(1, 2)] + col[(3, 2)] + col[(4, 2)] + bmi(1, 3, 4), DOWN + 0)
    add(col[(1, 3)] + col[(2, 3)] + col[(4, 3)] + bmi(1, 2, 4), DOWN + 0)
    add(col[(1, 4)] + col[(2, 4)] + col[(3, 4)] + bmi(1, 2, 3), DOWN + 0)
    th2 = np.stack(th2_cols, axis=1)

    l1_cols = []
    l1_sel = []

    def addl(lhs, sel):
        l1_cols.append(lhs)
        l1_sel.append(sel)

    cyc234 = np.maximum(
        col[(4, 2)] + col[(2, 3)] + col[(3, 4)],
        col[(2, 4)] + col[(4, 3)] + col[(3, 2)],
    )
    addl(cyc234 + col[(4, 1)] + col[(2, 1)] + col[(3, 1)], UP + 1)
    addl(cyc234 + col[(1, 2)] + col[(1, 3)] + col[(1, 4)], DOWN + 1)

    NSTAR = 8
    for trio in combinations(USERS, 3):
        x, y, z = trio
        l = next(m for m in USERS if m not in trio)
        star = np.maximum(
            col[(l, x)] + col[(l, y)] + col[(l, z)],
            col[(x, l)] + col[(y, l)] + col[(z, l)],
        )
        for cycle in ((x, y, z), (x, z, y)):
            s = sum(
                col[(cycle[i], cycle[(i + 1) % 3])] for i in range(3)
            )
            addl(s + star, NSTAR)

    for nodes in ((1, 2, 3, 4), (1, 2, 4, 3), (1, 3, 2, 4)):
        fwd = sum(col[(nodes[i], nodes[(i + 1) % 4])] for i in range(4))
        rev = sum(col[(nodes[(i + 1) % 4], nodes[i])] for i in range(4))
        diag = pm[key(nodes[0], nodes[2])] + pm[key(nodes[1], nodes[3])]
        addl(np.maximum(fwd, rev) + diag, NSTAR)
    l1 = np.stack(l1_cols, axis=1)

    out = (grid, th2, np.array(th2_sel), l1, np.array(l1_sel))
    _GRID_CACHE[rate_max] = out
    return out


def _profile_bounds(uplink, downlink) -> np.ndarray:
    n_star = min(uplink[0], downlink[0])
    return np.array(list(uplink) + list(downlink) + [n_star], dtype=np.int32)


def verify_profile(
    uplink: Sequence[int],
    downlink: Sequence[int],
    rate_max: int,
    seed_base: int,
    crosscheck: int = 64,
) -> EnumerationReport:
    """Run the sweep for one ordered gain profile."""
    grid, th2, th2_sel, l1, l1_sel = _bulk_matrices(rate_max)
    bounds = _profile_bounds(uplink, downlink)
    member_mask = (th2 <= bounds[th2_sel]).all(axis=1)
    sos_mask = member_mask & (l1 <= bounds[l1_sel]).all(axis=1)
    member_idx = np.flatnonzero(member_mask)

    rng = random.Random(seed_base)
    members = sos_direct = detoured = 0
    schedule_mismatches = 0
    crosscheck_mismatches = 0

    # The scalar evaluators stay authoritative: re-check a sample of
    # vector-classified non-members.
    non_members = np.flatnonzero(~member_mask)
    if len(non_members):
        for idx in rng.sample(list(map(int, non_members)), min(crosscheck, len(non_members))):
            rt = ReducedRateTuple(tuple(int(x) for x in grid[idx]))
            if eval_theorem2(uplink, downlink, rt).satisfied:
                crosscheck_mismatches += 1

    for idx in map(int, member_idx):
        rt = ReducedRateTuple(tuple(int(x) for x in grid[idx]))
        if not eval_theorem2(uplink, downlink, rt).satisfied:
            crosscheck_mismatches += 1
            continue
        members += 1
        feasible = eval_lemma1(uplink, downlink, rt).satisfied
        if feasible != bool(sos_mask[idx]):
            crosscheck_mismatches += 1

        # Schedule construction must succeed exactly on the feasible set.
        reduced = _wrap_reduced(uplink, downlink, rt)
        try:
            build_sos_schedule(reduced)
            built = True
        except Exception:
            built = False
        if built != feasible:
            schedule_mismatches += 1
            raise EnumerationFailure(
                "schedule-feasibility-mismatch", uplink, downlink, rt.flat,
                f"built={built} feasible={feasible}",
            )

        seed = seed_base * 1000003 + idx
        try:
            if feasible:
                plan = DetourPlan((), rt, rt, _direct_routes(rt))
                sos_direct += 1
            else:
                plan = apply_best(uplink, downlink, rt)
                detoured += 1
                if not verify_conservation(plan):
                    raise EnumerationFailure(
                        "conservation", uplink, downlink, rt.flat, "plan flows broken"
                    )
            report = simulate_reduced(uplink, downlink, rt, 2, seed, plan)
        except EnumerationFailure:
            raise
        except RelayNetworkError as exc:
            raise EnumerationFailure(
                type(exc).__name__, uplink, downlink, rt.flat, str(exc)
            ) from exc
        if not (report.complete and report.relay_verbatim_ok):
            raise EnumerationFailure(
                "delivery", uplink, downlink, rt.flat,
                f"delivered {report.total_delivered}/{report.total_injected}",
            )

    return EnumerationReport(
        max(max(uplink), max(downlink)),
        rate_max,
        1,
        int(grid.shape[0]),
        members,
        sos_direct,
        detoured,
        schedule_mismatches,
        crosscheck_mismatches,
        0,
    )


def _ordered_profiles(gain_max: int):
    return list(combinations_with_replacement(range(gain_max, -1, -1), 4))


def _verify_worker(args):
    uplink, downlink, rate_max, seed_base = args
    return verify_profile(uplink, downlink, rate_max, seed_base)


def enumerate_verify(gain_max: int, rate_max: int, jobs: int = 1) -> EnumerationReport:
    """Sweep all ordered reduced profiles and rate tuples up to the caps.

    Cost grows as (gain_max+1 choose 4 with repetition)^2 profiles times
    (rate_max+1)^12 tuples, so this is for desk-scale parameters.  Aborts
    on the first failing instance.
    """
    profiles = _ordered_profiles(gain_max)
    tasks = []
    seed_base = 0
    for up in profiles:
        for down in profiles:
            tasks.append((up, down, rate_max, seed_base))
            seed_base += 1

    total = EnumerationReport(gain_max, rate_max, 0, 0, 0, 0, 0, 0, 0, 0)
    if jobs <= 1:
        for task in tasks:
            rep = _verify_worker(task)
            total = total.merged(
                EnumerationReport(gain_max, rate_max, *rep_tuple(rep))
            )
        return total

    _bulk_matrices(rate_max)  # build before forking so workers share it
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for rep in pool.map(_verify_worker, tasks, chunksize=8):
            total = total.merged(
                EnumerationReport(gain_max, rate_max, *rep_tuple(rep))
            )
    return total


def rep_tuple(rep: EnumerationReport):
    return (
        rep.profiles,
        rep.instances,
        rep.members,
        rep.sos_direct,
        rep.detoured,
        rep.schedule_mismatches,
        rep.crosscheck_mismatches,
        rep.failures,
    )
