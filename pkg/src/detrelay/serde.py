"""JSON-friendly serialization with exact round-trips for every record type.

Directed pairs are written as two-character strings ("12" is node 1 to
node 2), matching the keys accepted in input files.  ``loads(dumps(x))``
reproduces ``x`` for every type serialized here.
"""
from __future__ import annotations

import json
from typing import Any, Mapping

from .model import (
    GainProfile,
    NodeOrdering,
    PAIR_ORDER_20,
    RateTuple,
    ReducedRateTuple,
)
from .reduction import LevelAssignment, ReducedNetwork, ReductionRecord
from .region import ConditionCheck, InequalityReport
from .sos import LevelSchedule, ScheduledBit
from .detour import DetourMove, DetourPart, DetourPlan, Route
from .sim import DeliveryReport, EnumerationReport, StreamStats


def _edge_key(edge) -> str:
    return f"{edge[0]}{edge[1]}"


def _parse_edge(key: str) -> tuple[int, int]:
    if len(key) != 2 or not key.isdigit():
        raise ValueError(f"bad pair key {key!r}, expected two digits like '12'")
    return (int(key[0]), int(key[1]))


def gain_profile_to_dict(g: GainProfile) -> dict:
    return {"uplink": list(g.uplink), "downlink": list(g.downlink)}


def gain_profile_from_dict(d: Mapping) -> GainProfile:
    return GainProfile(tuple(d["uplink"]), tuple(d["downlink"]))


def rate_tuple_to_dict(r: RateTuple) -> dict:
    return {"rates_flat": list(r.flat)}


def rate_tuple_from_dict(d: Mapping) -> RateTuple:
    if "rates_flat" in d:
        return RateTuple(tuple(d["rates_flat"]))
    return RateTuple.from_map({_parse_edge(k): v for k, v in d["rates"].items()})


def reduced_rates_to_dict(r: ReducedRateTuple) -> dict:
    return {"rates_flat": list(r.flat)}


def reduced_rates_from_dict(d: Mapping) -> ReducedRateTuple:
    if "rates_flat" in d:
        return ReducedRateTuple(tuple(d["rates_flat"]))
    return ReducedRateTuple.from_map({_parse_edge(k): v for k, v in d["rates"].items()})


def ordering_to_dict(o: NodeOrdering) -> dict:
    return {"uplink": list(o.uplink), "downlink": list(o.downlink)}


def ordering_from_dict(d: Mapping) -> NodeOrdering:
    return NodeOrdering(tuple(d["uplink"]), tuple(d["downlink"]))


def level_assignment_to_dict(a: LevelAssignment) -> dict:
    return {"blocks": {str(n): list(levels) for n, levels in a.blocks.items()}}


def level_assignment_from_dict(d: Mapping) -> LevelAssignment:
    return LevelAssignment({int(n): tuple(lv) for n, lv in d["blocks"].items()})


def reduced_network_to_dict(r: ReducedNetwork) -> dict:
    return {
        "uplink": list(r.uplink),
        "downlink": list(r.downlink),
        "rates_flat": list(r.rates.flat),
        "derivation": {
            "ordering": ordering_to_dict(r.derivation.ordering),
            "uplink_levels": level_assignment_to_dict(r.derivation.uplink_levels),
            "downlink_levels": level_assignment_to_dict(r.derivation.downlink_levels),
            "beta": r.derivation.beta,
            "gamma": r.derivation.gamma,
        },
    }


def reduced_network_from_dict(d: Mapping) -> ReducedNetwork:
    der = d["derivation"]
    record = ReductionRecord(
        ordering_from_dict(der["ordering"]),
        level_assignment_from_dict(der["uplink_levels"]),
        level_assignment_from_dict(der["downlink_levels"]),
        der["beta"],
        der["gamma"],
    )
    return ReducedNetwork(
        tuple(d["uplink"]),
        tuple(d["downlink"]),
        ReducedRateTuple(tuple(d["rates_flat"])),
        record,
    )


def condition_to_dict(c: ConditionCheck) -> dict:
    return {
        "id": c.condition_id,
        "family": c.family,
        "lhs": c.lhs,
        "rhs": c.rhs,
        "gap": c.gap,
        "cycle": [_edge_key(e) for e in c.cycle],
        "edges": [_edge_key(e) for e in c.extras],
    }


def condition_from_dict(d: Mapping) -> ConditionCheck:
    return ConditionCheck(
        d["id"],
        d["family"],
        d["lhs"],
        d["rhs"],
        tuple(_parse_edge(e) for e in d["cycle"]),
        tuple(_parse_edge(e) for e in d["edges"]),
    )


def report_to_dict(r: InequalityReport) -> dict:
    return {
        "satisfied": r.satisfied,
        "conditions": [condition_to_dict(c) for c in r.entries],
    }


def report_from_dict(d: Mapping) -> InequalityReport:
    return InequalityReport(tuple(condition_from_dict(c) for c in d["conditions"]))


def schedule_to_dict(s: LevelSchedule) -> dict:
    def levels(mapping):
        return {
            str(lv): {"streams": [_edge_key(e) for e in item.streams], "index": item.index}
            for lv, item in sorted(mapping.items())
        }

    return {
        "uplink_levels": levels(s.uplink_levels),
        "downlink_levels": levels(s.downlink_levels),
        "relay_map": {str(u): d for u, d in sorted(s.relay_map.items())},
        "round": s.round,
    }


def schedule_from_dict(d: Mapping) -> LevelSchedule:
    def levels(mapping):
        return {
            int(lv): ScheduledBit(
                tuple(_parse_edge(e) for e in item["streams"]), item["index"]
            )
            for lv, item in mapping.items()
        }

    return LevelSchedule(
        levels(d["uplink_levels"]),
        levels(d["downlink_levels"]),
        {int(u): v for u, v in d["relay_map"].items()},
        d.get("round", 0),
    )


def move_to_dict(m: DetourMove) -> dict:
    return {
        "kind": m.kind,
        "parts": [
            {"source": _edge_key(p.source), "via": p.via, "amount": p.amount}
            for p in m.parts
        ],
        "deltas": {_edge_key(e): v for e, v in sorted(m.deltas.items())},
        "condition": m.condition_id,
        "guard_blocked": m.guard_blocked,
        "analytic_split": list(m.analytic_split) if m.analytic_split else None,
    }


def move_from_dict(d: Mapping) -> DetourMove:
    return DetourMove(
        d["kind"],
        tuple(
            DetourPart(_parse_edge(p["source"]), p["via"], p["amount"])
            for p in d["parts"]
        ),
        {_parse_edge(e): v for e, v in d["deltas"].items()},
        d["condition"],
        d.get("guard_blocked", False),
        tuple(d["analytic_split"]) if d.get("analytic_split") else None,
    )


def plan_to_dict(p: DetourPlan) -> dict:
    return {
        "moves": [move_to_dict(m) for m in p.moves],
        "original_flat": list(p.original.flat),
        "equivalent_flat": list(p.equivalent.flat),
        "routes": [
            {"origin": _edge_key(rt.origin), "path": list(rt.path), "count": rt.count}
            for rt in p.routes
        ],
        "routing": [
            {"bit": e["bit"], "via": list(e["via"]), "rounds": e["rounds"]}
            for e in p.routing_table()
        ],
    }


def plan_from_dict(d: Mapping) -> DetourPlan:
    return DetourPlan(
        tuple(move_from_dict(m) for m in d["moves"]),
        ReducedRateTuple(tuple(d["original_flat"])),
        ReducedRateTuple(tuple(d["equivalent_flat"])),
        tuple(
            Route(_parse_edge(rt["origin"]), tuple(rt["path"]), rt["count"])
            for rt in d["routes"]
        ),
    )


def delivery_to_dict(r: DeliveryReport) -> dict:
    return {
        "rounds": r.rounds,
        "flush_rounds": r.flush_rounds,
        "seed": r.seed,
        "relay_verbatim_ok": r.relay_verbatim_ok,
        "complete": r.complete,
        "streams": {
            _edge_key(e): {
                "injected": s.injected,
                "delivered": s.delivered,
                "per_round": {str(k): v for k, v in sorted(s.per_round_delivered.items())},
                "max_latency": s.max_latency,
            }
            for e, s in sorted(r.streams.items())
        },
    }


def delivery_from_dict(d: Mapping) -> DeliveryReport:
    streams = {}
    for key, s in d["streams"].items():
        streams[_parse_edge(key)] = StreamStats(
            s["injected"],
            s["delivered"],
            {int(k): v for k, v in s["per_round"].items()},
            s["max_latency"],
        )
    return DeliveryReport(
        d["rounds"], d["flush_rounds"], d["seed"], streams, d["relay_verbatim_ok"]
    )


def enumeration_to_dict(r: EnumerationReport) -> dict:
    return {
        "gain_max": r.gain_max,
        "rate_max": r.rate_max,
        "profiles": r.profiles,
        "instances": r.instances,
        "members": r.members,
        "sos_direct": r.sos_direct,
        "detoured": r.detoured,
        "schedule_mismatches": r.schedule_mismatches,
        "crosscheck_mismatches": r.crosscheck_mismatches,
        "failures": r.failures,
    }


def enumeration_from_dict(d: Mapping) -> EnumerationReport:
    return EnumerationReport(
        d["gain_max"],
        d["rate_max"],
        d["profiles"],
        d["instances"],
        d["members"],
        d["sos_direct"],
        d["detoured"],
        d["schedule_mismatches"],
        d["crosscheck_mismatches"],
        d["failures"],
    )


def parse_network(doc: Mapping) -> tuple[GainProfile, RateTuple]:
    """Read an input document: uplink, downlink, and rates or rates_flat."""
    for key in ("uplink", "downlink"):
        if key not in doc:
            raise ValueError(f"missing field {key!r}")
        if len(doc[key]) != 4:
            raise ValueError(f"field {key!r} needs 4 entries, got {len(doc[key])}")
    gains = GainProfile(tuple(doc["uplink"]), tuple(doc["downlink"]))
    if "rates_flat" in doc:
        flat = doc["rates_flat"]
        if len(flat) != 20:
            raise ValueError(f"rates_flat needs 20 entries, got {len(flat)}")
        rates = RateTuple(tuple(flat))
    elif "rates" in doc:
        rates = RateTuple.from_map({_parse_edge(k): v for k, v in doc["rates"].items()})
    else:
        raise ValueError("missing field 'rates' (or 'rates_flat')")
    return gains, rates


def network_to_dict(gains: GainProfile, rates: RateTuple) -> dict:
    return {
        "uplink": list(gains.uplink),
        "downlink": list(gains.downlink),
        "rates": {_edge_key(e): rates.r(*e) for e in PAIR_ORDER_20},
    }


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
