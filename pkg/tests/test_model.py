import pytest
from hypothesis import given, strategies as st

from detrelay import (
    BitFrame,
    GainProfile,
    RateTuple,
    ScheduleInvalidError,
    observe_downlink,
    order_nodes,
    superpose_uplink,
)
from detrelay.model import PAIR_ORDER_20, order_values


def test_order_nodes_uplink():
    gains = GainProfile((11, 5, 7, 1), (1, 1, 1, 1))
    assert order_nodes(gains).uplink == (1, 3, 2, 4)


def test_order_nodes_downlink():
    gains = GainProfile((1, 1, 1, 1), (3, 6, 10, 11))
    assert order_nodes(gains).downlink == (4, 3, 2, 1)


def test_order_nodes_ties_by_id():
    gains = GainProfile((5, 5, 5, 5), (5, 5, 5, 5))
    o = order_nodes(gains)
    assert o.uplink == (1, 2, 3, 4)
    assert o.downlink == (1, 2, 3, 4)


def test_order_nodes_idempotent_and_sorted():
    gains = GainProfile((3, 9, 9, 0), (7, 0, 7, 2))
    o = order_nodes(gains)
    assert o == order_nodes(gains)
    ups = [gains.up(i) for i in o.uplink]
    downs = [gains.down(i) for i in o.downlink]
    assert ups == sorted(ups, reverse=True)
    assert downs == sorted(downs, reverse=True)


@given(st.lists(st.integers(0, 30), min_size=4, max_size=4))
def test_order_values_non_increasing(values):
    perm = order_values(values)
    ordered = [values[i - 1] for i in perm]
    assert ordered == sorted(values, reverse=True)
    assert sorted(perm) == [1, 2, 3, 4]


def test_superpose_xor_pair():
    gains = GainProfile((5, 5, 5, 5), (5, 5, 5, 5))
    obs = superpose_uplink(
        {1: BitFrame({3: 1}), 2: BitFrame({3: 1})}, gains
    )
    assert obs.levels == {3: 0}
    obs = superpose_uplink(
        {1: BitFrame({3: 1}), 2: BitFrame({3: 0})}, gains
    )
    assert obs.levels == {3: 1}


def test_superpose_single_transmitter_identity():
    gains = GainProfile((5, 5, 5, 5), (5, 5, 5, 5))
    frame = BitFrame({1: 1, 4: 0, 5: 1})
    assert superpose_uplink({3: frame}, gains).levels == frame.levels


def test_superpose_three_ones():
    gains = GainProfile((2, 2, 2, 2), (2, 2, 2, 2))
    obs = superpose_uplink(
        {1: BitFrame({2: 1}), 2: BitFrame({2: 1}), 3: BitFrame({2: 1})}, gains
    )
    assert obs.get(2) == 1


def test_superpose_above_reach_names_node_and_level():
    gains = GainProfile((4, 2, 5, 5), (5, 5, 5, 5))
    with pytest.raises(ScheduleInvalidError) as err:
        superpose_uplink({2: BitFrame({3: 1})}, gains)
    assert err.value.node == 2
    assert err.value.level == 3


@st.composite
def _payload_pair(draw):
    """Two payload assignments over the same per-node level support."""
    support = {
        node: draw(st.sets(st.integers(1, 10), max_size=5)) for node in (1, 2, 3, 4)
    }
    a = {n: {lv: draw(st.integers(0, 1)) for lv in lvls} for n, lvls in support.items()}
    b = {n: {lv: draw(st.integers(0, 1)) for lv in lvls} for n, lvls in support.items()}
    return a, b


@given(_payload_pair())
def test_superpose_gf2_linear(payloads):
    gains = GainProfile((10, 10, 10, 10), (10, 10, 10, 10))
    a, b = payloads
    xored = {
        n: {lv: a[n][lv] ^ b[n][lv] for lv in a[n]} for n in a
    }
    obs_a = superpose_uplink({n: BitFrame(f) for n, f in a.items()}, gains)
    obs_b = superpose_uplink({n: BitFrame(f) for n, f in b.items()}, gains)
    obs_x = superpose_uplink({n: BitFrame(f) for n, f in xored.items()}, gains)
    assert set(obs_x.levels) == set(obs_a.levels)
    for lv in obs_x.levels:
        assert obs_x.get(lv) == obs_a.get(lv) ^ obs_b.get(lv)


def test_observe_downlink_restriction():
    frame = BitFrame({1: 1, 5: 0, 10: 1})
    assert observe_downlink(frame, 0).levels == {}
    assert observe_downlink(frame, 5).occupied() == (1, 5)
    assert observe_downlink(frame, 12).levels == frame.levels


@given(
    st.dictionaries(st.integers(1, 12), st.integers(0, 1), max_size=8),
    st.integers(0, 14),
    st.integers(0, 14),
)
def test_observe_downlink_composes_by_min(levels, g1, g2):
    frame = BitFrame(levels)
    twice = observe_downlink(observe_downlink(frame, g1), g2)
    assert twice.levels == observe_downlink(frame, min(g1, g2)).levels


def test_rate_tuple_canonical_order():
    rates = RateTuple(tuple(range(20)))
    assert rates.r(1, 2) == 0
    assert rates.r(1, 5) == 3
    assert rates.r(2, 1) == 4
    assert rates.r(5, 4) == 19
    assert rates.r_x5 == rates.r(1, 5) + rates.r(2, 5) + rates.r(3, 5) + rates.r(4, 5)
    assert RateTuple.from_map(rates.as_map()) == rates


def test_rate_tuple_from_string_keys():
    m = {f"{i}{j}": 1 for (i, j) in PAIR_ORDER_20}
    assert RateTuple.from_map(m).flat == (1,) * 20


def test_rate_tuple_rejects_negative():
    with pytest.raises(ValueError):
        RateTuple((-1,) + (0,) * 19)


def test_reduced_view_drops_relay_pairs():
    rates = RateTuple(tuple(range(20)))
    reduced = rates.to_reduced()
    assert reduced.r(1, 2) == rates.r(1, 2)
    assert reduced.r(4, 3) == rates.r(4, 3)
    assert len(reduced.flat) == 12
