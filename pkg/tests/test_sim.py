import random

import pytest

from detrelay import (
    GainProfile,
    OutOfRegionError,
    RateTuple,
    ReducedRateTuple,
    enumerate_verify,
    eval_theorem2,
    reduce_network,
    simulate_5node,
    simulate_reduced,
)
from detrelay.serde import delivery_to_dict
from detrelay.sim import sample_region_tuple, sample_sos_tuple


def test_simulation_worked_instance_1(ex1):
    gains, rates = ex1
    report = simulate_5node(gains, rates, rounds=5, seed=11)
    assert report.complete
    assert report.relay_verbatim_ok
    # the rerouted stream runs one round behind, everything else is same-round
    latencies = {e: s.max_latency for e, s in report.streams.items() if s.injected}
    assert latencies.pop((1, 2)) == 1
    assert all(v == 0 for v in latencies.values())


def test_simulation_steady_state_per_round_rate(ex1):
    gains, rates = ex1
    report = simulate_5node(gains, rates, rounds=5, seed=3)
    stats = report.streams[(1, 2)]
    # rate 2 = one direct slot plus one rerouted slot arriving a round late
    assert stats.per_round_delivered == {1: 1, 2: 2, 3: 2, 4: 2, 5: 2, 6: 1}
    for edge, s in report.streams.items():
        if s.injected and s.max_latency == 0:
            per_round = rates.r(*edge)
            assert all(
                s.per_round_delivered.get(r, 0) == per_round for r in range(1, 6)
            )


def test_simulation_worked_instance_2(ex2):
    gains, rates = ex2
    report = simulate_5node(gains, rates, rounds=5, seed=23)
    assert report.complete
    assert report.relay_verbatim_ok
    assert report.total_injected == 5 * sum(rates.flat)


def test_simulation_zero_rates():
    gains = GainProfile((3, 1, 4, 1), (5, 9, 2, 6))
    report = simulate_5node(gains, RateTuple.zero(), rounds=3, seed=0)
    assert report.complete
    assert report.total_injected == 0


def test_simulation_rejects_out_of_region():
    gains = GainProfile((1, 1, 1, 1), (1, 1, 1, 1))
    rates = RateTuple((5,) * 20)
    with pytest.raises(OutOfRegionError):
        simulate_5node(gains, rates, rounds=1, seed=0)


def test_simulation_deterministic(ex2):
    gains, rates = ex2
    a = simulate_5node(gains, rates, rounds=4, seed=99)
    b = simulate_5node(gains, rates, rounds=4, seed=99)
    assert delivery_to_dict(a) == delivery_to_dict(b)
    c = simulate_5node(gains, rates, rounds=4, seed=100)
    assert delivery_to_dict(a) != delivery_to_dict(c)


def test_reduced_simulation_single_round():
    rng = random.Random(8)
    for seed in range(20):
        up = tuple(rng.randint(0, 10) for _ in range(4))
        down = tuple(rng.randint(0, 10) for _ in range(4))
        rates = sample_sos_tuple(up, down, rng)
        report = simulate_reduced(up, down, rates, rounds=1, seed=seed)
        assert report.complete
        assert report.relay_verbatim_ok
        assert report.flush_rounds == 0


def test_random_full_network_simulations_bit_exact():
    from detrelay.region import eval_lemma1

    rng = random.Random(777)
    detoured = 0
    for seed in range(150):
        gains = GainProfile(
            tuple(rng.randint(0, 12) for _ in range(4)),
            tuple(rng.randint(0, 12) for _ in range(4)),
        )
        rates = sample_region_tuple(gains, rng)
        red = reduce_network(gains, rates)
        if not eval_lemma1(red.uplink, red.downlink, red.rates).satisfied:
            detoured += 1
        report = simulate_5node(gains, rates, rounds=3, seed=seed)
        assert report.complete and report.relay_verbatim_ok
    assert detoured > 0  # the detour path gets exercised end to end


def test_reduction_soundness_random():
    rng = random.Random(9)
    for _ in range(60):
        gains = GainProfile(
            tuple(rng.randint(0, 9) for _ in range(4)),
            tuple(rng.randint(0, 9) for _ in range(4)),
        )
        rates = sample_region_tuple(gains, rng)
        red = reduce_network(gains, rates)
        assert eval_theorem2(red.uplink, red.downlink, red.rates).satisfied


def test_enumerate_unit_caps():
    report = enumerate_verify(1, 1)
    assert report.failures == 0
    assert report.schedule_mismatches == 0
    assert report.crosscheck_mismatches == 0
    assert report.profiles == 25
    # member count recorded by the scalar evaluators during the sweep
    assert report.members == 115
    assert report.sos_direct == 115


def test_enumerate_zero_rate_cap():
    report = enumerate_verify(1, 0)
    assert report.failures == 0
    # the zero tuple is the single member of every profile
    assert report.instances == report.profiles == report.members == 25
