"""Serving the relay's own messages and reducing to a 4-user network.

The relay's private streams get dedicated channel levels: the strongest
node's block sits at its topmost levels, each following node starts at its
own gain or just below the lowest level used so far, whichever is smaller.
What remains after carving those blocks out is an asymmetric 4-user relay
network whose per-node gain is the number of still-free levels within that
node's reach.

Two independent views of the reduced gains exist: the constructive count
above and closed-form min expressions.  They provably agree; the closed
forms are exposed separately so tests can cross-check them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import (
    GainProfile,
    NodeOrdering,
    RateTuple,
    ReducedRateTuple,
    RelayNetworkError,
    USERS,
    order_nodes,
    order_reduced,
)


class InsufficientLevelsError(RelayNetworkError):
    """A relay-message block does not fit below the blocks above it.

    This can only happen when the rate tuple is outside the achievable
    region, so it signals a violated upstream bound.
    """

    def __init__(self, node: int, start: int, rate: int):
        self.node = node
        self.start = start
        self.rate = rate
        super().__init__(
            f"cannot place {rate} levels for node {node} starting at level {start}"
        )


@dataclass(frozen=True)
class LevelAssignment:
    """Occupied relay levels per stream, one block per node (may be empty)."""

    blocks: Mapping[int, tuple[int, ...]]

    def occupied(self) -> tuple[int, ...]:
        out = []
        for levels in self.blocks.values():
            out.extend(levels)
        return tuple(sorted(out))

    def block(self, node: int) -> tuple[int, ...]:
        return self.blocks.get(node, ())


def _assign(order: Sequence[int], gain_of, rates: Mapping[int, int]) -> LevelAssignment:
    blocks: dict[int, tuple[int, ...]] = {}
    floor = None  # lowest level used so far
    for node in order:
        rate = int(rates.get(node, 0))
        gain = gain_of(node)
        if rate == 0:
            blocks[node] = ()
            continue
        start = gain if floor is None else min(gain, floor - 1)
        if start < rate:
            raise InsufficientLevelsError(node, start, rate)
        blocks[node] = tuple(range(start, start - rate, -1))
        floor = start - rate + 1
    return LevelAssignment(blocks)


def assign_uplink_levels(gains: GainProfile, relay_rates: Mapping[int, int]) -> LevelAssignment:
    """Carve dedicated uplink levels for the user-to-relay streams.

    ``relay_rates`` maps user id to its rate towards the relay.  Blocks are
    assigned strongest node first, each at the top of what it can reach and
    below everything already taken.
    """
    ordering = order_nodes(gains)
    return _assign(ordering.uplink, gains.up, relay_rates)


def assign_downlink_levels(gains: GainProfile, relay_rates: Mapping[int, int]) -> LevelAssignment:
    """Mirror of :func:`assign_uplink_levels` for the relay-to-user streams."""
    ordering = order_nodes(gains)
    return _assign(ordering.downlink, gains.down, relay_rates)


def _pos(x: int) -> int:
    return x if x > 0 else 0


def closed_form_reduced_gains(
    gains: GainProfile, rates: RateTuple
) -> tuple[tuple[int, ...], tuple[int, ...], int, int]:
    """Reduced gains per node from the closed-form min expressions.

    Returns ``(uplink, downlink, beta, gamma)`` where beta/gamma are the
    case-table occupation counts for the third-strongest node in each
    direction, clamped at 0 (the raw middle case can be negative, and a
    negative occupation count is meaningless).
    """
    o = order_nodes(gains)
    t, u, v, w = o.uplink
    a, b, c, d = o.downlink
    n = gains.up
    m = gains.down
    ru = {i: rates.r(i, 5) for i in USERS}
    rd = {i: rates.r(5, i) for i in USERS}

    n_t = n(t) - ru[t] - ru[u] - ru[v] - ru[w]
    n_u = n(u) - ru[u] - ru[v] - ru[w] - _pos(ru[t] - (n(t) - n(u)))
    n_v = min(n(v) - ru[v] - ru[w], n(u) - ru[u] - ru[v] - ru[w], n_t)
    n_w = min(n(w) - ru[w], n(v) - ru[v] - ru[w],
              n(u) - ru[u] - ru[v] - ru[w], n_t)

    if ru[t] >= n(t) - n(v):
        beta = _pos(ru[t] - (n(t) - n(v))) + ru[u]
    elif ru[t] >= n(t) - n(u):
        beta = ru[u] - (n(u) - _pos(ru[t] - (n(t) - n(u))) - n(v))
    else:
        beta = _pos(ru[u] - (n(u) - n(v)))
    beta = _pos(beta)

    m_a = m(a) - rd[a] - rd[b] - rd[c] - rd[d]
    m_b = m(b) - rd[b] - rd[c] - rd[d] - _pos(rd[a] - (m(a) - m(b)))
    m_c = min(m(c) - rd[c] - rd[d], m(b) - rd[b] - rd[c] - rd[d], m_a)
    m_d = min(m(d) - rd[d], m(c) - rd[c] - rd[d],
              m(b) - rd[b] - rd[c] - rd[d], m_a)

    if rd[a] >= m(a) - m(c):
        gamma = _pos(rd[a] - (m(a) - m(c))) + rd[b]
    elif rd[a] >= m(a) - m(b):
        gamma = rd[b] - (m(b) - _pos(rd[a] - (m(a) - m(b))) - m(c))
    else:
        gamma = _pos(rd[b] - (m(b) - m(c)))
    gamma = _pos(gamma)

    up = [0, 0, 0, 0]
    down = [0, 0, 0, 0]
    for node, value in ((t, n_t), (u, n_u), (v, n_v), (w, n_w)):
        up[node - 1] = value
    for node, value in ((a, m_a), (b, m_b), (c, m_c), (d, m_d)):
        down[node - 1] = value
    return tuple(up), tuple(down), beta, gamma


@dataclass(frozen=True)
class ReductionRecord:
    """How the reduction was derived: ordering, occupied levels, beta/gamma."""

    ordering: NodeOrdering
    uplink_levels: LevelAssignment
    downlink_levels: LevelAssignment
    beta: int
    gamma: int


@dataclass(frozen=True)
class ReducedNetwork:
    """The asymmetric 4-user network left after serving relay messages.

    ``uplink[i-1]``/``downlink[i-1]`` are the reduced gains of user ``i``;
    ``rates`` carries the 12 user-to-user rates unchanged.
    """

    uplink: tuple[int, int, int, int]
    downlink: tuple[int, int, int, int]
    rates: ReducedRateTuple
    derivation: ReductionRecord

    def ordering(self) -> NodeOrdering:
        """Role assignment of the reduced network (ties by node id)."""
        return order_reduced(self.uplink, self.downlink)

    @property
    def n_star(self) -> int:
        o = self.ordering()
        return min(self.uplink[o.t - 1], self.downlink[o.a - 1])


def reduce_network(gains: GainProfile, rates: RateTuple) -> ReducedNetwork:
    """Serve the relay's streams and return the reduced 4-user network.

    The constructive level assignment is the source of truth for the
    reduced gains; the closed forms must agree with it (cross-checked by
    the test suite) and supply the recorded beta/gamma values.
    """
    up_assign = assign_uplink_levels(gains, rates.relay_uplink())
    down_assign = assign_downlink_levels(gains, rates.relay_downlink())
    up_occ = up_assign.occupied()
    down_occ = down_assign.occupied()

    uplink = tuple(
        gains.up(i) - sum(1 for lv in up_occ if lv <= gains.up(i)) for i in USERS
    )
    downlink = tuple(
        gains.down(i) - sum(1 for lv in down_occ if lv <= gains.down(i)) for i in USERS
    )

    _, _, beta, gamma = closed_form_reduced_gains(gains, rates)
    record = ReductionRecord(order_nodes(gains), up_assign, down_assign, beta, gamma)
    return ReducedNetwork(uplink, downlink, rates.to_reduced(), record)
