"""Inequality systems that bound the achievable integral rate tuples.

Three systems are evaluated, each returning a per-condition report:

* the full 5-node network bounds (14 condition families, ids ``T1.*``),
* the reduced 4-user network bounds (14 families, ids ``T2.*``),
* the extra cycle conditions required for a single-round ordered schedule
  (13 deduplicated instances, ids ``L1.30``/``L1.31``/``L1.32``/``L1.33``).

Conditions with inner maxima are evaluated by taking the max over branches;
each report entry records which branch attained it (the detour planner
needs the resolved directed edges).  Condition ids are stable strings, with
the ``L1.*`` ids embedding the resolved edges, e.g.
``L1.32:12,23,31,14,24,34``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

from .model import (
    Edge,
    GainProfile,
    RateTuple,
    ReducedRateTuple,
    USERS,
    order_nodes,
    order_reduced,
)

#: The three undirected 4-cycles on nodes {1,2,3,4}, one orientation each.
FOUR_CYCLES: tuple[tuple[int, int, int, int], ...] = (
    (1, 2, 3, 4),
    (1, 2, 4, 3),
    (1, 3, 2, 4),
)


@dataclass(frozen=True)
class ConditionCheck:
    """One instantiated inequality: LHS <= RHS with resolved branches."""

    condition_id: str
    family: str
    lhs: int
    rhs: int
    cycle: tuple[Edge, ...] = ()
    extras: tuple[Edge, ...] = ()

    @property
    def gap(self) -> int:
        return self.rhs - self.lhs

    @property
    def satisfied(self) -> bool:
        return self.gap >= 0


@dataclass(frozen=True)
class InequalityReport:
    entries: tuple[ConditionCheck, ...]

    @property
    def satisfied(self) -> bool:
        return all(e.gap >= 0 for e in self.entries)

    def violations(self) -> tuple[ConditionCheck, ...]:
        return tuple(e for e in self.entries if e.gap < 0)

    def max_excess(self) -> int:
        """Largest LHS - RHS over violated conditions (0 if none)."""
        return max((-e.gap for e in self.entries), default=0) if self.entries else 0

    def worst(self) -> ConditionCheck:
        """Entry with the largest excess; ties broken by condition id."""
        return min(self.entries, key=lambda e: (e.gap, e.condition_id))

    def by_id(self, condition_id: str) -> ConditionCheck:
        for e in self.entries:
            if e.condition_id == condition_id:
                return e
        raise KeyError(condition_id)


Rate = Callable[[int, int], int]


def _pair_max(r: Rate, i: int, j: int) -> tuple[int, Edge]:
    """max(R_ij, R_ji) with the attaining edge; first listed wins ties."""
    fwd, rev = r(i, j), r(j, i)
    return (fwd, (i, j)) if fwd >= rev else (rev, (j, i))


def _branch_max_out(r: Rate, x: int, y: int, z: int) -> tuple[int, tuple[Edge, ...]]:
    """max over the three out-star branches on {x, y, z}.

    Branch "x" is R_xy + R_xz + max(R_yz, R_zy), and cyclically for y, z.
    Returns the max and the attaining branch's resolved edges.
    """
    best = None
    for p, q, s in ((x, y, z), (y, x, z), (z, x, y)):
        inner, inner_edge = _pair_max(r, q, s)
        val = r(p, q) + r(p, s) + inner
        edges = ((p, q), (p, s), inner_edge)
        if best is None or val > best[0]:
            best = (val, edges)
    return best


def _branch_max_in(r: Rate, x: int, y: int, z: int) -> tuple[int, tuple[Edge, ...]]:
    """Downlink mirror of :func:`_branch_max_out` (in-star branches)."""
    best = None
    for p, q, s in ((x, y, z), (y, x, z), (z, x, y)):
        inner, inner_edge = _pair_max(r, q, s)
        val = r(q, p) + r(s, p) + inner
        edges = ((q, p), (s, p), inner_edge)
        if best is None or val > best[0]:
            best = (val, edges)
    return best


def eval_theorem1(gains: GainProfile, rates: RateTuple) -> InequalityReport:
    """Evaluate the full 5-node network bounds under the derived ordering."""
    o = order_nodes(gains)
    t, u, v, w = o.uplink
    a, b, c, d = o.downlink
    r = rates.r
    rx5 = rates.r_x5
    r5x = rates.r_5x
    entries = []

    def add(cid, family, lhs, rhs, extras=()):
        entries.append(ConditionCheck(cid, family, lhs, rhs, extras=tuple(extras)))

    add(f"T1.w5[w={w}]", "T1.w5",
        r(w, 5) + r(w, t) + r(w, u) + r(w, v), gains.up(w))
    add(f"T1.5d[d={d}]", "T1.5d",
        r(5, d) + r(a, d) + r(b, d) + r(c, d), gains.down(d))

    mx, me = _pair_max(r, v, w)
    add(f"T1.v5[v={v}]", "T1.v5",
        r(v, 5) + r(w, 5) + r(w, t) + r(w, u) + r(v, t) + r(v, u) + mx,
        gains.up(v), (me,))
    mx, me = _pair_max(r, c, d)
    add(f"T1.5c[c={c}]", "T1.5c",
        r(5, c) + r(5, d) + r(a, d) + r(b, d) + r(a, c) + r(b, c) + mx,
        gains.down(c), (me,))

    mx, edges = _branch_max_out(r, u, v, w)
    add(f"T1.u5[u={u}]", "T1.u5",
        r(u, 5) + r(v, 5) + r(w, 5) + r(u, t) + r(v, t) + r(w, t) + mx,
        gains.up(u), edges)

    for src, rest in ((t, (u, v, w)), (u, (t, v, w)), (v, (t, u, w)), (w, (t, u, v))):
        mx, edges = _branch_max_out(r, *rest)
        add(f"T1.t5[out={src}]", "T1.t5",
            rx5 + sum(r(src, k) for k in rest) + mx,
            gains.up(t), edges)

    mx, edges = _branch_max_in(r, b, c, d)
    add(f"T1.5b[b={b}]", "T1.5b",
        r(5, b) + r(5, c) + r(5, d) + r(a, b) + r(a, c) + r(a, d) + mx,
        gains.down(b), edges)

    for dst, rest in ((a, (b, c, d)), (b, (a, c, d)), (c, (a, b, d)), (d, (a, b, c))):
        mx, edges = _branch_max_in(r, *rest)
        add(f"T1.5a[in={dst}]", "T1.5a",
            r5x + sum(r(k, dst) for k in rest) + mx,
            gains.down(a), edges)

    return InequalityReport(tuple(entries))


def eval_theorem2(
    uplink: Sequence[int], downlink: Sequence[int], rates: ReducedRateTuple
) -> InequalityReport:
    """Evaluate the reduced 4-user network bounds.

    ``uplink``/``downlink`` are the per-node reduced gains (node order
    1..4); roles are assigned by sorting them, ties by ascending node id.
    """
    o = order_reduced(uplink, downlink)
    t, u, v, w = o.uplink
    a, b, c, d = o.downlink
    n_t, n_u, n_v, n_w = (uplink[i - 1] for i in o.uplink)
    n_a, n_b, n_c, n_d = (downlink[i - 1] for i in o.downlink)
    r = rates.r
    entries = []

    def add(cid, family, lhs, rhs, extras=()):
        entries.append(ConditionCheck(cid, family, lhs, rhs, extras=tuple(extras)))

    add(f"T2.wR[w={w}]", "T2.wR", r(w, t) + r(w, u) + r(w, v), n_w)
    add(f"T2.Rd[d={d}]", "T2.Rd", r(a, d) + r(b, d) + r(c, d), n_d)

    mx, me = _pair_max(r, v, w)
    add(f"T2.vR[v={v}]", "T2.vR",
        r(w, t) + r(w, u) + r(v, t) + r(v, u) + mx, n_v, (me,))
    mx, me = _pair_max(r, c, d)
    add(f"T2.Rc[c={c}]", "T2.Rc",
        r(a, d) + r(b, d) + r(a, c) + r(b, c) + mx, n_c, (me,))

    mx, edges = _branch_max_out(r, u, v, w)
    add(f"T2.uR[u={u}]", "T2.uR", r(u, t) + r(v, t) + r(w, t) + mx, n_u, edges)

    for src, rest in ((t, (u, v, w)), (u, (t, v, w)), (v, (t, u, w)), (w, (t, u, v))):
        mx, edges = _branch_max_out(r, *rest)
        add(f"T2.tR[out={src}]", "T2.tR",
            sum(r(src, k) for k in rest) + mx, n_t, edges)

    mx, edges = _branch_max_in(r, b, c, d)
    add(f"T2.Rb[b={b}]", "T2.Rb", r(a, b) + r(a, c) + r(a, d) + mx, n_b, edges)

    for dst, rest in ((a, (b, c, d)), (b, (a, c, d)), (c, (a, b, d)), (d, (a, b, c))):
        mx, edges = _branch_max_in(r, *rest)
        add(f"T2.Ra[in={dst}]", "T2.Ra",
            sum(r(k, dst) for k in rest) + mx, n_a, edges)

    return InequalityReport(tuple(entries))


def _edge_str(edges: Sequence[Edge]) -> str:
    return ",".join(f"{i}{j}" for i, j in edges)


def _rotate_cycle(edges: Sequence[Edge]) -> tuple[Edge, ...]:
    """Rotate a directed cycle's edge list to start at its smallest node."""
    start = min(e[0] for e in edges)
    k = next(idx for idx, e in enumerate(edges) if e[0] == start)
    return tuple(edges[k:]) + tuple(edges[:k])


def _cycle_edges(nodes: Sequence[int]) -> tuple[Edge, ...]:
    return tuple((nodes[i], nodes[(i + 1) % len(nodes)]) for i in range(len(nodes)))


def eval_lemma1(
    uplink: Sequence[int], downlink: Sequence[int], rates: ReducedRateTuple
) -> InequalityReport:
    """Evaluate the extra cycle conditions for single-round ordered schedules.

    Deduplicated instances: one condition bounded by the second-strongest
    uplink gain, one by the second-strongest downlink gain, the 8 directed
    3-cycle conditions and the 3 direction-collapsed 4-cycle conditions, the
    latter two families bounded by n* = min(strongest uplink reduced gain,
    strongest downlink reduced gain).
    """
    o = order_reduced(uplink, downlink)
    t, u, v, w = o.uplink
    a, b, c, d = o.downlink
    n_t = uplink[t - 1]
    n_u = uplink[u - 1]
    n_a = downlink[a - 1]
    n_b = downlink[b - 1]
    n_star = min(n_t, n_a)
    r = rates.r
    entries = []

    # Cycle through the three mid-strength nodes plus the star on the
    # strongest one, bounded by the second-strongest gain (per direction).
    fwd = _rotate_cycle(_cycle_edges((w, u, v)))
    rev = _rotate_cycle(_cycle_edges((w, v, u)))
    fv = sum(r(i, j) for i, j in fwd)
    rv = sum(r(i, j) for i, j in rev)
    cyc = fwd if fv >= rv else rev
    star = tuple(sorted(((w, t), (u, t), (v, t))))
    lhs = max(fv, rv) + r(w, t) + r(u, t) + r(v, t)
    entries.append(ConditionCheck(
        f"L1.30:{_edge_str(cyc)},{_edge_str(star)}", "L1.30", lhs, n_u,
        cycle=cyc, extras=star))

    fwd = _rotate_cycle(_cycle_edges((b, c, d)))
    rev = _rotate_cycle(_cycle_edges((b, d, c)))
    fv = sum(r(i, j) for i, j in fwd)
    rv = sum(r(i, j) for i, j in rev)
    cyc = fwd if fv >= rv else rev
    star = tuple(sorted(((a, b), (a, c), (a, d))))
    lhs = max(fv, rv) + r(a, b) + r(a, c) + r(a, d)
    entries.append(ConditionCheck(
        f"L1.31:{_edge_str(cyc)},{_edge_str(star)}", "L1.31", lhs, n_b,
        cycle=cyc, extras=star))

    # Directed 3-cycles plus the off-cycle node's star, resolved to the
    # larger of its out-star and in-star.
    for trio in combinations(USERS, 3):
        x, y, z = trio
        l = next(n for n in USERS if n not in trio)
        for cyc_nodes in ((x, y, z), (x, z, y)):
            cyc = _cycle_edges(cyc_nodes)
            out_star = tuple(sorted(((l, x), (l, y), (l, z))))
            in_star = tuple(sorted(((x, l), (y, l), (z, l))))
            out_v = sum(r(i, j) for i, j in out_star)
            in_v = sum(r(i, j) for i, j in in_star)
            star = out_star if out_v >= in_v else in_star
            lhs = sum(r(i, j) for i, j in cyc) + max(out_v, in_v)
            entries.append(ConditionCheck(
                f"L1.32:{_edge_str(cyc)},{_edge_str(star)}", "L1.32", lhs, n_star,
                cycle=cyc, extras=star))

    # 4-cycles with both diagonals, collapsed over the two directions.
    for nodes in FOUR_CYCLES:
        fwd = _cycle_edges(nodes)
        rev = _cycle_edges(tuple(reversed(nodes)))
        rev = _rotate_cycle(rev)
        fv = sum(r(i, j) for i, j in fwd)
        rv = sum(r(i, j) for i, j in rev)
        cyc = fwd if fv >= rv else rev
        d1, e1 = _pair_max(r, nodes[0], nodes[2])
        d2, e2 = _pair_max(r, nodes[1], nodes[3])
        diags = (e1, e2) if min(e1) <= min(e2) else (e2, e1)
        lhs = max(fv, rv) + d1 + d2
        entries.append(ConditionCheck(
            f"L1.33:{_edge_str(cyc)},{_edge_str(diags)}", "L1.33", lhs, n_star,
            cycle=cyc, extras=diags))

    return InequalityReport(tuple(entries))


def in_region(gains: GainProfile, rates: RateTuple) -> bool:
    """Membership in the full 5-node achievable region."""
    return eval_theorem1(gains, rates).satisfied


def reduced_in_region(
    uplink: Sequence[int], downlink: Sequence[int], rates: ReducedRateTuple
) -> bool:
    """Membership in the reduced 4-user achievable region."""
    return eval_theorem2(uplink, downlink, rates).satisfied


def sos_feasible(
    uplink: Sequence[int], downlink: Sequence[int], rates: ReducedRateTuple
) -> bool:
    """True when the tuple admits a single-round ordered schedule directly."""
    return (
        eval_theorem2(uplink, downlink, rates).satisfied
        and eval_lemma1(uplink, downlink, rates).satisfied
    )
