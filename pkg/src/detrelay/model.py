"""Value types and signal-level channel primitives for the 5-node relay network.

Nodes 1..4 are user terminals with no direct links; node 5 is the relay.
A link of gain ``n`` spans bit levels ``1..n`` (level 1 is the lowest, i.e.
the one even the weakest node can use), and simultaneous transmissions on a
level combine by XOR at the receiving side.

Everything in this module is an immutable value or a pure function, so all
operations are safe to evaluate concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

USERS = (1, 2, 3, 4)
RELAY = 5

Edge = tuple[int, int]

#: Canonical listing order of the 20 ordered-pair rates (node 5 included).
PAIR_ORDER_20: tuple[Edge, ...] = tuple(
    (i, j) for i in (1, 2, 3, 4, 5) for j in (1, 2, 3, 4, 5) if i != j
)

#: Canonical listing order of the 12 user-to-user rates.
PAIR_ORDER_12: tuple[Edge, ...] = tuple(
    (i, j) for i in USERS for j in USERS if i != j
)

_INDEX_20 = {pair: k for k, pair in enumerate(PAIR_ORDER_20)}
_INDEX_12 = {pair: k for k, pair in enumerate(PAIR_ORDER_12)}


class RelayNetworkError(Exception):
    """Base class for all toolkit errors."""


class ScheduleInvalidError(RelayNetworkError):
    """A node was scheduled to transmit above its channel reach."""

    def __init__(self, node: int, level: int, reach: int):
        self.node = node
        self.level = level
        self.reach = reach
        super().__init__(
            f"node {node} cannot place a bit at level {level} (reach {reach})"
        )


def _as_int_tuple(values: Iterable[int], length: int, what: str) -> tuple[int, ...]:
    out = tuple(int(v) for v in values)
    if len(out) != length:
        raise ValueError(f"{what} needs exactly {length} entries, got {len(out)}")
    if any(v < 0 for v in out):
        raise ValueError(f"{what} entries must be nonnegative, got {out}")
    return out


@dataclass(frozen=True)
class GainProfile:
    """The eight integer channel gains of the network.

    ``uplink[i-1]`` is the gain from user ``i`` to the relay and
    ``downlink[i-1]`` the gain from the relay to user ``i``.  Gains are not
    assumed reciprocal.
    """

    uplink: tuple[int, int, int, int]
    downlink: tuple[int, int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "uplink", _as_int_tuple(self.uplink, 4, "uplink"))
        object.__setattr__(self, "downlink", _as_int_tuple(self.downlink, 4, "downlink"))

    def up(self, node: int) -> int:
        return self.uplink[node - 1]

    def down(self, node: int) -> int:
        return self.downlink[node - 1]


def order_values(values: Sequence[int]) -> tuple[int, int, int, int]:
    """Sort user ids by descending value, ties broken by ascending node id."""
    return tuple(sorted(USERS, key=lambda i: (-values[i - 1], i)))


@dataclass(frozen=True)
class NodeOrdering:
    """Role assignment: uplink strongest-to-weakest and downlink likewise.

    ``uplink`` holds the node ids playing roles (t, u, v, w); ``downlink``
    the ids playing (a, b, c, d).
    """

    uplink: tuple[int, int, int, int]
    downlink: tuple[int, int, int, int]

    @property
    def t(self) -> int:
        return self.uplink[0]

    @property
    def u(self) -> int:
        return self.uplink[1]

    @property
    def v(self) -> int:
        return self.uplink[2]

    @property
    def w(self) -> int:
        return self.uplink[3]

    @property
    def a(self) -> int:
        return self.downlink[0]

    @property
    def b(self) -> int:
        return self.downlink[1]

    @property
    def c(self) -> int:
        return self.downlink[2]

    @property
    def d(self) -> int:
        return self.downlink[3]


def order_nodes(gains: GainProfile) -> NodeOrdering:
    """Derive the role assignment from a gain profile.

    Deterministic and idempotent: ties are always broken by ascending node
    id so equal-gain profiles reproduce the same ordering.
    """
    return NodeOrdering(order_values(gains.uplink), order_values(gains.downlink))


def order_reduced(uplink: Sequence[int], downlink: Sequence[int]) -> NodeOrdering:
    """Role assignment for a reduced 4-user network given per-node gains."""
    return NodeOrdering(order_values(uplink), order_values(downlink))


@dataclass(frozen=True)
class RateTuple:
    """The 20 per-ordered-pair message rates, node 5 included.

    ``flat`` follows :data:`PAIR_ORDER_20`.
    """

    flat: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "flat", _as_int_tuple(self.flat, 20, "rate tuple"))

    @classmethod
    def from_map(cls, rates: Mapping) -> "RateTuple":
        vals = []
        for (i, j) in PAIR_ORDER_20:
            if (i, j) in rates:
                vals.append(rates[(i, j)])
            elif f"{i}{j}" in rates:
                vals.append(rates[f"{i}{j}"])
            else:
                raise ValueError(f"rate map is missing entry for pair {i}{j}")
        return cls(tuple(vals))

    @classmethod
    def zero(cls) -> "RateTuple":
        return cls((0,) * 20)

    def r(self, i: int, j: int) -> int:
        return self.flat[_INDEX_20[(i, j)]]

    def as_map(self) -> dict[Edge, int]:
        return dict(zip(PAIR_ORDER_20, self.flat))

    @property
    def r_x5(self) -> int:
        """Aggregate uplink rate into the relay."""
        return sum(self.r(i, RELAY) for i in USERS)

    @property
    def r_5x(self) -> int:
        """Aggregate downlink rate out of the relay."""
        return sum(self.r(RELAY, i) for i in USERS)

    def relay_uplink(self) -> dict[int, int]:
        return {i: self.r(i, RELAY) for i in USERS}

    def relay_downlink(self) -> dict[int, int]:
        return {i: self.r(RELAY, i) for i in USERS}

    def to_reduced(self) -> "ReducedRateTuple":
        return ReducedRateTuple(tuple(self.r(i, j) for (i, j) in PAIR_ORDER_12))


@dataclass(frozen=True)
class ReducedRateTuple:
    """The 12 user-to-user rates of the reduced 4-user network."""

    flat: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "flat", _as_int_tuple(self.flat, 12, "reduced rate tuple"))

    @classmethod
    def from_map(cls, rates: Mapping) -> "ReducedRateTuple":
        vals = []
        for (i, j) in PAIR_ORDER_12:
            if (i, j) in rates:
                vals.append(rates[(i, j)])
            elif f"{i}{j}" in rates:
                vals.append(rates[f"{i}{j}"])
            else:
                raise ValueError(f"rate map is missing entry for pair {i}{j}")
        return cls(tuple(vals))

    @classmethod
    def zero(cls) -> "ReducedRateTuple":
        return cls((0,) * 12)

    def r(self, i: int, j: int) -> int:
        return self.flat[_INDEX_12[(i, j)]]

    def as_map(self) -> dict[Edge, int]:
        return dict(zip(PAIR_ORDER_12, self.flat))

    def with_deltas(self, deltas: Mapping[Edge, int]) -> "ReducedRateTuple":
        """Return a copy with per-edge integer changes applied."""
        m = self.as_map()
        for edge, delta in deltas.items():
            m[edge] += delta
            if m[edge] < 0:
                raise ValueError(f"rate for pair {edge} would become negative")
        return ReducedRateTuple(tuple(m[e] for e in PAIR_ORDER_12))


@dataclass(frozen=True)
class BitFrame:
    """Bits placed on channel levels during one channel use.

    ``levels`` maps 1-based level index to a GF(2) bit.  A level may carry
    an explicit 0 (a transmission happened there); absent levels are idle.
    """

    levels: Mapping[int, int] = field(default_factory=dict)
    round: int = 0

    def __post_init__(self):
        norm = {}
        for level, bit in dict(self.levels).items():
            level = int(level)
            bit = int(bit)
            if level < 1:
                raise ValueError(f"level indices are 1-based, got {level}")
            if bit not in (0, 1):
                raise ValueError(f"bit at level {level} must be 0 or 1, got {bit}")
            norm[level] = bit
        object.__setattr__(self, "levels", norm)

    def get(self, level: int, default: int = 0) -> int:
        return self.levels.get(level, default)

    def occupied(self) -> tuple[int, ...]:
        return tuple(sorted(self.levels))


def superpose_uplink(transmits: Mapping[int, BitFrame], gains: GainProfile) -> BitFrame:
    """Relay observation of simultaneous uplink transmissions.

    Per level the observation is the XOR of every bit transmitted there.
    A node placing a bit above its own reach is a schedule bug and raises
    :class:`ScheduleInvalidError`.
    """
    out: dict[int, int] = {}
    rnd = 0
    for node in sorted(transmits):
        frame = transmits[node]
        rnd = max(rnd, frame.round)
        reach = gains.up(node)
        for level, bit in frame.levels.items():
            if level > reach:
                raise ScheduleInvalidError(node, level, reach)
            out[level] = out.get(level, 0) ^ bit
    return BitFrame(out, rnd)


def observe_downlink(relay_frame: BitFrame, receiver_gain: int) -> BitFrame:
    """Restriction of the relay's broadcast to the levels a receiver hears."""
    kept = {lv: b for lv, b in relay_frame.levels.items() if lv <= receiver_gain}
    return BitFrame(kept, relay_frame.round)
