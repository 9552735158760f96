import random

import pytest

from detrelay import (
    NoViolationError,
    ReducedRateTuple,
    apply_best,
    enumerate_candidates,
    eval_lemma1,
    eval_theorem2,
    find_mgc,
    sos_feasible,
    verify_conservation,
)
from detrelay.detour import DetourPart, MaxGapCondition, apply_move
from detrelay.sim import sample_sos_tuple


def test_find_mgc_single_cycle(ex1_reduced):
    red = ex1_reduced
    mgc = find_mgc(red.uplink, red.downlink, red.rates)
    assert mgc.condition_id == "L1.32:12,23,31,14,24,34"
    assert mgc.excess == 1
    assert mgc.cycles == (((1, 2), (2, 3), (3, 1)),)
    assert mgc.labeling is None


def test_find_mgc_two_cycles(ex2_reduced):
    red = ex2_reduced
    mgc = find_mgc(red.uplink, red.downlink, red.rates)
    assert mgc.condition_id == "L1.33:12,23,34,41,13,24"
    assert mgc.excess == 2
    shared = set(mgc.cycles[0]) & set(mgc.cycles[1])
    assert shared == {(4, 1)}
    cycle_nodes = [{e[0] for e in cyc} for cyc in mgc.cycles]
    assert {3, 4, 1} in cycle_nodes and {1, 2, 4} in cycle_nodes


def test_find_mgc_requires_violation():
    with pytest.raises(NoViolationError):
        find_mgc((3, 3, 3, 3), (3, 3, 3, 3), ReducedRateTuple.zero())


def test_candidates_single_cycle(ex1_reduced):
    red = ex1_reduced
    mgc = find_mgc(red.uplink, red.downlink, red.rates)
    moves = enumerate_candidates(mgc, red.uplink, red.downlink)
    full = [m for m in moves if m.amount == mgc.excess]
    assert [(m.parts[0].source, m.parts[0].via) for m in full] == [
        ((1, 2), 3),
        ((2, 3), 1),
        ((3, 1), 2),
    ]
    # the via-role predicates pass only the first option here
    assert [m.guard_blocked for m in full] == [False, True, True]


def test_candidates_two_cycles_include_published_move(ex2_reduced):
    red = ex2_reduced
    mgc = find_mgc(red.uplink, red.downlink, red.rates)
    moves = enumerate_candidates(mgc, red.uplink, red.downlink)
    wanted = {DetourPart((2, 4), 1, 1), DetourPart((4, 1), 3, 1)}
    assert any(set(m.parts) == wanted for m in moves)


def test_candidates_zero_excess_single_empty_move(ex1_reduced):
    red = ex1_reduced
    mgc = find_mgc(red.uplink, red.downlink, red.rates)
    silent = MaxGapCondition(mgc.check, 0, mgc.cycles, mgc.labeling)
    moves = enumerate_candidates(silent, red.uplink, red.downlink)
    assert len(moves) == 1
    assert moves[0].parts == () and moves[0].deltas == {}


def test_apply_best_single_cycle(ex1_reduced):
    red = ex1_reduced
    plan = apply_best(red.uplink, red.downlink, red.rates)
    assert plan.equivalent.flat == (1, 1, 1, 0, 2, 1, 1, 1, 1, 0, 0, 0)
    assert len(plan.moves) == 1
    move = plan.moves[0]
    assert move.kind == "DS1"
    assert move.parts == (DetourPart((1, 2), 3, 1),)
    assert verify_conservation(plan)
    assert plan.detoured_routes() == tuple(
        rt for rt in plan.routes if rt.path == (1, 3, 2)
    )
    # the rerouted slot is the stream's second bit, forwarded over 2 rounds
    assert plan.routing_table() == (
        {"bit": "b12^2", "via": (3,), "rounds": 2},
    )


def test_apply_best_two_cycles(ex2_reduced):
    red = ex2_reduced
    plan = apply_best(red.uplink, red.downlink, red.rates)
    assert plan.equivalent.flat == (2, 1, 1, 1, 2, 0, 1, 0, 1, 1, 0, 1)
    assert len(plan.moves) == 1
    assert plan.moves[0].kind == "DS2"
    assert set(plan.moves[0].parts) == {
        DetourPart((2, 4), 1, 1),
        DetourPart((4, 1), 3, 1),
    }
    assert sos_feasible(red.uplink, red.downlink, plan.equivalent)
    assert verify_conservation(plan)
    paths = {rt.path for rt in plan.detoured_routes()}
    assert paths == {(2, 1, 4), (4, 3, 1)}


def test_apply_best_noop_when_feasible():
    rates = ReducedRateTuple.zero()
    plan = apply_best((2, 2, 2, 2), (2, 2, 2, 2), rates)
    assert plan.moves == ()
    assert plan.equivalent == rates


def test_apply_best_rejects_out_of_bounds():
    rates = ReducedRateTuple((9,) * 12)
    with pytest.raises(ValueError):
        apply_best((1, 1, 1, 1), (1, 1, 1, 1), rates)


def test_move_deltas_reverse_cycle_accounting(ex1_reduced, ex2_reduced):
    from detrelay.detour import _merge_deltas

    for red in (ex1_reduced, ex2_reduced):
        plan = apply_best(red.uplink, red.downlink, red.rates)
        for move in plan.moves:
            assert sum(v for v in move.deltas.values() if v < 0) == -move.amount
            combined = {}
            for part in move.parts:
                src, dst = part.source
                per = _merge_deltas((part,))
                assert per == {
                    (src, dst): -part.amount,
                    (src, part.via): part.amount,
                    (part.via, dst): part.amount,
                }
                # each rerouted bit raises the reverse-cycle total by 2
                reverse = ((dst, src), (src, part.via), (part.via, dst))
                assert sum(per.get(e, 0) for e in reverse) == 2 * part.amount
                for e, v in per.items():
                    combined[e] = combined.get(e, 0) + v
            assert {e: v for e, v in combined.items() if v} == dict(move.deltas)


def _detour_needing_instances(limit):
    """Members of the small sweep that violate a cycle condition."""
    import numpy as np

    from detrelay.sim import _bulk_matrices, _ordered_profiles, _profile_bounds

    grid, th2, th2_sel, l1, l1_sel = _bulk_matrices(2)
    out = []
    profiles = _ordered_profiles(2)
    for up in profiles:
        for down in profiles:
            bounds = _profile_bounds(up, down)
            member = (th2 <= bounds[th2_sel]).all(axis=1)
            needs = member & ~(l1 <= bounds[l1_sel]).all(axis=1)
            for idx in np.flatnonzero(needs):
                out.append((up, down, ReducedRateTuple(tuple(int(x) for x in grid[idx]))))
                if len(out) >= limit:
                    return out
    return out


def test_each_move_strictly_shrinks_worst_excess():
    instances = _detour_needing_instances(25)
    assert len(instances) == 25
    for up, down, rates in instances:
        plan = apply_best(up, down, rates)
        current = rates
        excess = eval_lemma1(up, down, current).max_excess()
        assert excess > 0
        for move in plan.moves:
            current = apply_move(current, move)
            new_excess = eval_lemma1(up, down, current).max_excess()
            assert new_excess < excess
            excess = new_excess
        assert excess == 0
        assert current == plan.equivalent
        assert verify_conservation(plan)


def test_conservation_against_simulation_paths():
    # Per-pair delivery is conserved: direct plus detoured flow equals the
    # original rate for every ordered pair.
    rng = random.Random(405)
    up, down = (6, 5, 3, 2), (4, 4, 3, 1)
    rates = sample_sos_tuple(up, down, rng)
    plan = apply_best(up, down, rates)
    assert plan.moves == ()
    totals = {}
    for rt in plan.routes:
        totals[rt.origin] = totals.get(rt.origin, 0) + rt.count
    assert all(totals.get(e, 0) == n for e, n in rates.as_map().items())
