"""Detour planning: reroute bits over 3-node cycles until ordering works.

When the reduced tuple satisfies the 4-user network bounds but violates a
cycle condition, the worst violated condition (the maximum-gap condition)
names one directed 3-cycle (single-cycle forms) or two 3-cycles sharing an
edge (the 4-cycle form).  Candidate moves shift bits off the cycle onto a
two-hop path through another cycle node:

* single-cycle moves: take the full excess from one cycle edge, rerouting
  it via the remaining cycle node (three options, tried in cycle order);
* two-cycle moves: nine structural options pairing a source rate with a
  via node per cycle, with every split of the excess across the two parts.

A candidate is accepted iff all rates stay nonnegative, the 4-user bounds
still hold, and the maximum excess strictly decreases; the first surviving
candidate in the deterministic order below wins.  Each option carries a
role predicate describing when the weakest-node roles make it unusable;
the verdict is recorded on the move but never filters the list, because
validation is authoritative (for the bundled two-cycle demo instance the
predicate would reject the one move that repairs everything in a single
step).  Splits that draw from two distinct rates with both parts positive
are tried before degenerate all-from-one-rate allocations; shrunken
amounts are a last resort.  Every accepted move also rewrites the per-bit
routing table, so a plan always carries a flow decomposition proving
per-pair conservation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .model import Edge, ReducedRateTuple, RelayNetworkError, USERS, order_reduced
from .region import (
    ConditionCheck,
    InequalityReport,
    eval_lemma1,
    eval_theorem2,
)


class NoViolationError(RelayNetworkError):
    """All cycle conditions already hold; there is nothing to detour."""


class ExhaustedCandidatesError(RelayNetworkError):
    """No candidate move validated.

    The existence argument guarantees a usable detour for every in-bounds
    tuple, so this is a bug trap: it carries the full state for replay.
    """

    def __init__(self, uplink, downlink, rates, mgc, tried: int):
        self.uplink = tuple(uplink)
        self.downlink = tuple(downlink)
        self.rates = rates
        self.mgc = mgc
        self.tried = tried
        super().__init__(
            f"no usable detour for {mgc.check.condition_id}"
            f" (excess {mgc.excess}, {tried} candidates tried);"
            f" uplink={self.uplink} downlink={self.downlink} rates={rates.flat}"
        )


@dataclass(frozen=True)
class MaxGapCondition:
    """The violated cycle condition with the largest excess."""

    check: ConditionCheck
    excess: int
    cycles: tuple[tuple[Edge, ...], ...]
    labeling: tuple[int, int, int, int] | None = None

    @property
    def condition_id(self) -> str:
        return self.check.condition_id


def _four_cycle_labeling(check: ConditionCheck) -> tuple[int, int, int, int]:
    """Orient a violated 4-cycle condition as (i, j, k, l).

    The orientation is chosen so the resolved diagonals read i->k and l->j,
    which makes the shared edge of the two embedded 3-cycles k->l.
    """
    cyc = check.cycle
    nodes = tuple(e[0] for e in cyc)
    resolved = set(check.extras)
    for rot in range(4):
        i, j, k, l = nodes[rot:] + nodes[:rot]
        if (i, k) in resolved and (l, j) in resolved:
            return (i, j, k, l)
    raise AssertionError(
        f"no orientation matches diagonals {check.extras} of {check.condition_id}"
    )  # pragma: no cover


def find_mgc(
    uplink: Sequence[int],
    downlink: Sequence[int],
    rates: ReducedRateTuple,
    report: InequalityReport | None = None,
) -> MaxGapCondition:
    """Locate the maximum-gap condition among the violated cycle conditions.

    Ties break by condition id.  Raises :class:`NoViolationError` when the
    cycle conditions already hold.
    """
    if report is None:
        report = eval_lemma1(uplink, downlink, rates)
    violated = report.violations()
    if not violated:
        raise NoViolationError("all cycle conditions hold")
    worst = min(violated, key=lambda e: (e.gap, e.condition_id))
    excess = -worst.gap

    if worst.family == "L1.33":
        i, j, k, l = _four_cycle_labeling(worst)
        cycle1 = ((k, l), (l, j), (j, k))
        cycle2 = ((k, l), (l, i), (i, k))
        return MaxGapCondition(worst, excess, (cycle1, cycle2), (i, j, k, l))
    return MaxGapCondition(worst, excess, (worst.cycle,))


@dataclass(frozen=True)
class DetourPart:
    """One rerouted chunk: ``amount`` bits leave ``source`` via ``via``."""

    source: Edge
    via: int
    amount: int


@dataclass(frozen=True)
class DetourMove:
    """A rate modification over one or two 3-node cycles.

    ``deltas`` is the complete per-edge change; each part subtracts its
    amount from its source edge and adds it to the two legs through the
    via node, so the relevant reverse-cycle total grows by twice the
    amount.  ``guard_blocked`` records the source role-predicate verdict
    (metadata only) and ``analytic_split`` the closed-form split derived
    for the canonical orientation, where one exists.
    """

    kind: str
    parts: tuple[DetourPart, ...]
    deltas: Mapping[Edge, int]
    condition_id: str
    guard_blocked: bool = False
    analytic_split: tuple[int, int] | None = None

    @property
    def amount(self) -> int:
        return sum(p.amount for p in self.parts)


def _merge_deltas(parts: Sequence[DetourPart]) -> dict[Edge, int]:
    deltas: dict[Edge, int] = {}
    for p in parts:
        if p.amount == 0:
            continue
        src, dst = p.source
        for edge, change in (
            (p.source, -p.amount),
            ((src, p.via), p.amount),
            ((p.via, dst), p.amount),
        ):
            deltas[edge] = deltas.get(edge, 0) + change
    return {e: v for e, v in deltas.items() if v != 0}


def _guard(via: int, off_cycle: int, ordering) -> bool:
    """Single-cycle guard: blocked when the via node is a weakest role."""
    return (
        ordering.d == via
        or ordering.w == via
        or (ordering.c == via and ordering.d == off_cycle)
        or (ordering.v == via and ordering.w == off_cycle)
    )


_DS2_OPTIONS = (
    # (gamma source role, gamma via role, beta source role, beta via role)
    ("kl", "i", "kl", "j"),
    ("kl", "i", "lj", "k"),
    ("ik", "l", "lj", "k"),
    ("kl", "i", "jk", "l"),
    ("li", "k", "kl", "j"),
    ("li", "k", "lj", "k"),
    ("li", "k", "jk", "l"),
    ("ik", "l", "kl", "j"),
    ("ik", "l", "jk", "l"),
)

# Blocked-role predicates per option, written against the canonical
# labeling: "x" means d=x or w=x; "c=x,d=y" the paired form (and its v/w
# mirror).  Recorded on moves, not used to filter.
_DS2_GUARDS = (
    (("role", "i"), ("role", "j")),
    (("role", "i"), ("role", "k"), ("pair", "i", "j")),
    (("role", "k"), ("role", "l"), ("pair", "k", "i"), ("pair", "l", "j")),
    (("role", "i"), ("role", "l"), ("pair", "i", "j")),
    (("role", "j"), ("role", "k"), ("pair", "j", "i")),
    (("role", "k"), ("pair", "k", "i"), ("pair", "k", "j")),
    (("role", "k"), ("role", "l"), ("pair", "l", "i"), ("pair", "k", "j")),
    (("role", "j"), ("role", "l"), ("pair", "j", "i")),
    (("role", "l"), ("pair", "l", "i"), ("pair", "l", "j")),
)


def _ds2_guard_blocked(option: int, roles: Mapping[str, int], ordering) -> bool:
    for pred in _DS2_GUARDS[option]:
        if pred[0] == "role":
            node = roles[pred[1]]
            if ordering.d == node or ordering.w == node:
                return True
        else:
            first, second = roles[pred[1]], roles[pred[2]]
            if (ordering.c == first and ordering.d == second) or (
                ordering.v == first and ordering.w == second
            ):
                return True
    return False


def _analytic_split(mgc: MaxGapCondition, rates: ReducedRateTuple, n_star: int):
    """Closed-form (beta1, gamma1) for the canonical two-cycle orientation."""
    if mgc.labeling is None:
        return None
    i, j, k, l = mgc.labeling
    r = rates.r
    eq1 = r(k, l) + r(l, j) + r(j, k) + r(i, j) + r(i, k) + r(i, l)
    eq2 = r(k, l) + r(l, i) + r(i, k) + r(i, j) + r(l, j) + r(k, j)
    return (eq1 - n_star, eq2 - n_star)


def enumerate_candidates(
    mgc: MaxGapCondition,
    uplink: Sequence[int],
    downlink: Sequence[int],
) -> list[DetourMove]:
    """All candidate moves for the condition, in deterministic trial order."""
    return list(_iter_candidates(mgc, uplink, downlink))


def _iter_candidates(
    mgc: MaxGapCondition,
    uplink: Sequence[int],
    downlink: Sequence[int],
) -> Iterator[DetourMove]:
    ordering = order_reduced(uplink, downlink)
    if mgc.excess == 0:
        yield DetourMove("DS1" if mgc.labeling is None else "DS2", (), {},
                         mgc.condition_id)
        return

    if mgc.labeling is None:
        cycle = mgc.cycles[0]
        cycle_nodes = {e[0] for e in cycle}
        off_cycle = next(n for n in USERS if n not in cycle_nodes)
        for amount in range(mgc.excess, 0, -1):
            for src, dst in cycle:
                via = next(n for n in cycle_nodes if n not in (src, dst))
                part = DetourPart((src, dst), via, amount)
                yield DetourMove(
                    "DS1", (part,), _merge_deltas((part,)),
                    mgc.condition_id,
                    guard_blocked=_guard(via, off_cycle, ordering),
                )
        return

    i, j, k, l = mgc.labeling
    roles = {"i": i, "j": j, "k": k, "l": l}
    edges = {"kl": (k, l), "lj": (l, j), "jk": (j, k), "li": (l, i), "ik": (i, k)}
    vias = {"i": i, "j": j, "k": k, "l": l}

    def move(option: int, g_amt: int, b_amt: int) -> DetourMove:
        g_src, g_via, b_src, b_via = _DS2_OPTIONS[option]
        parts = tuple(
            DetourPart(edges[src], vias[via], amt)
            for src, via, amt in ((g_src, g_via, g_amt), (b_src, b_via, b_amt))
            if amt > 0
        )
        return DetourMove(
            "DS2", parts, _merge_deltas(parts), mgc.condition_id,
            guard_blocked=_ds2_guard_blocked(option, roles, ordering),
        )

    for total in range(mgc.excess, 0, -1):
        # Genuine two-rate splits first: both parts positive, distinct
        # source edges.
        for option in range(len(_DS2_OPTIONS)):
            g_src, _, b_src, _ = _DS2_OPTIONS[option]
            if g_src == b_src:
                continue
            for g_amt in range(total - 1, 0, -1):
                yield move(option, g_amt, total - g_amt)
        # Degenerate allocations: everything from one rate.
        for option in range(len(_DS2_OPTIONS)):
            g_src, _, b_src, _ = _DS2_OPTIONS[option]
            if g_src == b_src:
                for g_amt in range(total, -1, -1):
                    yield move(option, g_amt, total - g_amt)
            else:
                yield move(option, total, 0)
                yield move(option, 0, total)


def apply_move(rates: ReducedRateTuple, move: DetourMove) -> ReducedRateTuple:
    return rates.with_deltas(move.deltas)


@dataclass(frozen=True)
class Route:
    """``count`` bits of ``origin`` following ``path`` (relay hop per leg)."""

    origin: Edge
    path: tuple[int, ...]
    count: int

    @property
    def detoured(self) -> bool:
        return len(self.path) > 2


@dataclass(frozen=True)
class DetourPlan:
    """Moves transforming a rate tuple into an ordered-feasible equivalent.

    ``routes`` is a full flow decomposition: per origin pair its counts
    over direct and rerouted paths, with per-edge totals matching the
    equivalent tuple exactly.
    """

    moves: tuple[DetourMove, ...]
    original: ReducedRateTuple
    equivalent: ReducedRateTuple
    routes: tuple[Route, ...]

    def detoured_routes(self) -> tuple[Route, ...]:
        return tuple(rt for rt in self.routes if rt.detoured)

    def max_hops(self) -> int:
        return max((len(rt.path) - 1 for rt in self.routes), default=1)

    def routing_table(self) -> tuple[dict, ...]:
        """Per-bit entries for the rerouted flow: bit id, via nodes, rounds.

        Bit numbering follows each origin stream's per-round injection
        order (route slices in plan order), so the ids name the same slots
        the simulator fills.
        """
        offsets: dict[Edge, int] = {}
        out = []
        for rt in self.routes:
            off = offsets.get(rt.origin, 0)
            offsets[rt.origin] = off + rt.count
            if not rt.detoured:
                continue
            for k in range(rt.count):
                out.append({
                    "bit": f"b{rt.origin[0]}{rt.origin[1]}^{off + k + 1}",
                    "via": rt.path[1:-1],
                    "rounds": len(rt.path) - 1,
                })
        return tuple(out)


def _initial_routes(rates: ReducedRateTuple) -> list[Route]:
    return [
        Route(edge, edge, count)
        for edge, count in rates.as_map().items()
        if count > 0
    ]


def _reroute(routes: list[Route], part: DetourPart) -> list[Route]:
    """Divert ``part.amount`` bits crossing ``part.source`` via the via node.

    Flow is consumed in list order (direct routes first by construction),
    splitting entries as needed.  Chained rerouting of already-detoured
    flow lengthens its path; the decomposition stays exact.
    """
    src, dst = part.source
    remaining = part.amount
    out: list[Route] = []
    for rt in routes:
        if remaining == 0:
            out.append(rt)
            continue
        legs = list(zip(rt.path, rt.path[1:]))
        if (src, dst) not in legs:
            out.append(rt)
            continue
        take = min(remaining, rt.count)
        remaining -= take
        pos = legs.index((src, dst))
        new_path = rt.path[: pos + 1] + (part.via,) + rt.path[pos + 1 :]
        if rt.count - take:
            out.append(Route(rt.origin, rt.path, rt.count - take))
        out.append(Route(rt.origin, new_path, take))
    if remaining:
        raise AssertionError(
            f"flow on edge {part.source} is short by {remaining} bits"
        )  # pragma: no cover
    return out


def apply_best(
    uplink: Sequence[int],
    downlink: Sequence[int],
    rates: ReducedRateTuple,
) -> DetourPlan:
    """Iterate moves until the cycle conditions hold.

    Requires the 4-user bounds to hold for ``rates``.  Already-feasible
    tuples return an empty plan.
    """
    if not eval_theorem2(uplink, downlink, rates).satisfied:
        raise ValueError("rate tuple is outside the reduced network bounds")

    ordering = order_reduced(uplink, downlink)
    n_star = min(uplink[ordering.t - 1], downlink[ordering.a - 1])
    current = rates
    routes = _initial_routes(rates)
    moves: list[DetourMove] = []
    report = eval_lemma1(uplink, downlink, current)
    while not report.satisfied:
        mgc = find_mgc(uplink, downlink, current, report)
        chosen = None
        candidate = None
        tried = 0
        for move in _iter_candidates(mgc, uplink, downlink):
            tried += 1
            try:
                candidate = apply_move(current, move)
            except ValueError:
                continue
            if not eval_theorem2(uplink, downlink, candidate).satisfied:
                continue
            new_report = eval_lemma1(uplink, downlink, candidate)
            if new_report.max_excess() >= mgc.excess:
                continue
            chosen = move
            break
        if chosen is None:
            raise ExhaustedCandidatesError(uplink, downlink, current, mgc, tried)
        if chosen.kind == "DS2":
            analytic = _analytic_split(mgc, current, n_star)
            if analytic is not None:
                chosen = DetourMove(
                    chosen.kind, chosen.parts, chosen.deltas,
                    chosen.condition_id, chosen.guard_blocked,
                    analytic_split=analytic,
                )
        for part in chosen.parts:
            routes = _reroute(routes, part)
        moves.append(chosen)
        current = candidate
        report = new_report

    return DetourPlan(tuple(moves), rates, current, tuple(routes))


def verify_conservation(plan: DetourPlan) -> bool:
    """Check the plan's flow decomposition against original and equivalent."""
    per_origin: dict[Edge, int] = {}
    per_edge: dict[Edge, int] = {}
    for rt in plan.routes:
        per_origin[rt.origin] = per_origin.get(rt.origin, 0) + rt.count
        for leg in zip(rt.path, rt.path[1:]):
            per_edge[leg] = per_edge.get(leg, 0) + rt.count
    orig = plan.original.as_map()
    equiv = plan.equivalent.as_map()
    if any(per_origin.get(e, 0) != n for e, n in orig.items()):
        return False
    return all(per_edge.get(e, 0) == n for e, n in equiv.items())
