"""Command-line front end.

Subcommands: check, reduce, schedule, simulate, enumerate, demo.  Exit
codes: 0 success (and in-region for ``check``), 1 malformed input, 2
out-of-region / mismatch.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

from . import serde
from .model import GainProfile, RateTuple, ReducedRateTuple, RelayNetworkError
from .region import eval_lemma1, eval_theorem1, eval_theorem2, sos_feasible
from .reduction import reduce_network
from .sos import build_sos_schedule
from .sim import (
    DetourPlan,
    EnumerationReport,
    OutOfRegionError,
    enumerate_verify,
    plan_reduced,
    simulate_5node,
)

DEMO_INSTANCES = {
    1: {
        "uplink": (11, 5, 7, 1),
        "downlink": (2, 8, 5, 11),
        "rates_flat": (2, 0, 1, 2, 0, 2, 1, 1, 1, 0, 1, 0, 0, 0, 0, 1, 1, 1, 1, 1),
        "expect": {
            "reduced_uplink": (7, 3, 5, 0),
            "reduced_downlink": (1, 5, 3, 7),
            "mgc": "L1.32:12,23,31,14,24,34",
            "excess": 1,
            "equivalent": (1, 1, 1, 0, 2, 1, 1, 1, 1, 0, 0, 0),
        },
        "note": (
            "reduced uplink gain of node 2 is 3: reserved levels 5 and 1 "
            "both fall within its reach of 5"
        ),
    },
    2: {
        "uplink": (11, 10, 5, 3),
        "downlink": (3, 6, 10, 11),
        "rates_flat": (2, 1, 0, 1, 0, 2, 1, 0, 0, 0, 1, 1, 2, 0, 0, 1, 0, 2, 1, 1),
        "expect": {
            "reduced_uplink": (8, 8, 3, 2),
            "reduced_downlink": (3, 4, 7, 7),
            "mgc": "L1.33:12,23,34,41,13,24",
            "excess": 2,
            "equivalent": (2, 1, 1, 1, 2, 0, 1, 0, 1, 1, 0, 1),
        },
        "note": None,
    },
}


def _load_network(path: str):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SystemExit(f"input error: {exc}") from exc
    except json.JSONDecodeError as exc:
        print(f"input error: {path}:{exc.lineno}:{exc.colno}: {exc.msg}", file=sys.stderr)
        raise SystemExit(1) from exc
    try:
        return serde.parse_network(doc)
    except (ValueError, TypeError) as exc:
        print(f"input error: {path}: {exc}", file=sys.stderr)
        raise SystemExit(1) from exc


def _print_report(report, as_json: bool) -> None:
    if as_json:
        print(serde.dumps(serde.report_to_dict(report)))
        return
    print(f"{'condition':<34} {'lhs':>5} {'rhs':>5} {'gap':>5}")
    for c in report.entries:
        print(f"{c.condition_id:<34} {c.lhs:>5} {c.rhs:>5} {c.gap:>5}")
    print(f"satisfied: {report.satisfied}")


def _cmd_check(args) -> int:
    gains, rates = _load_network(args.input)
    report = eval_theorem1(gains, rates)
    _print_report(report, args.json)
    return 0 if report.satisfied else 2


def _cmd_reduce(args) -> int:
    gains, rates = _load_network(args.input)
    reduced = reduce_network(gains, rates)
    if args.json:
        print(serde.dumps(serde.reduced_network_to_dict(reduced)))
    else:
        print(f"reduced uplink:   {reduced.uplink}")
        print(f"reduced downlink: {reduced.downlink}")
        print(f"reduced rates:    {reduced.rates.flat}")
        d = reduced.derivation
        print(f"uplink blocks:    {dict(d.uplink_levels.blocks)}")
        print(f"downlink blocks:  {dict(d.downlink_levels.blocks)}")
        print(f"beta={d.beta} gamma={d.gamma}")
    return 0


def _make_plan(reduced) -> DetourPlan:
    return plan_reduced(reduced.uplink, reduced.downlink, reduced.rates)


def _cmd_schedule(args) -> int:
    gains, rates = _load_network(args.input)
    if not eval_theorem1(gains, rates).satisfied:
        print("tuple is outside the achievable region", file=sys.stderr)
        return 2
    reduced = reduce_network(gains, rates)
    plan = _make_plan(reduced)
    schedule = build_sos_schedule(reduced, plan.equivalent)
    if args.json:
        print(serde.dumps({
            "plan": serde.plan_to_dict(plan),
            "schedule": serde.schedule_to_dict(schedule),
        }))
        return 0
    if plan.moves:
        print(f"detour moves ({len(plan.moves)}):")
        for m in plan.moves:
            parts = ", ".join(
                f"{p.amount} bit(s) of {p.source[0]}->{p.source[1]} via {p.via}"
                for p in m.parts
            )
            print(f"  [{m.kind}] {parts}  (fixes {m.condition_id})")
        print(f"equivalent rates: {plan.equivalent.flat}")
    else:
        print("no detours needed")
    print("uplink levels (low to high):")
    for lv in sorted(schedule.uplink_levels):
        item = schedule.uplink_levels[lv]
        print(f"  {lv:>3}: {item.label()}")
    print("relay map (uplink level -> downlink level):")
    print("  " + ", ".join(f"{u}->{d}" for u, d in sorted(schedule.relay_map.items())))
    return 0


def _cmd_simulate(args) -> int:
    gains, rates = _load_network(args.input)
    try:
        report = simulate_5node(gains, rates, args.rounds, args.seed)
    except OutOfRegionError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    if args.json:
        print(serde.dumps(serde.delivery_to_dict(report)))
        return 0
    print(f"rounds: {report.rounds} (+{report.flush_rounds} flush), seed {report.seed}")
    for edge, s in sorted(report.streams.items()):
        if s.injected == 0:
            continue
        print(
            f"  {edge[0]}->{edge[1]}: delivered {s.delivered}/{s.injected}"
            f" (max latency {s.max_latency})"
        )
    print(f"relay forwarding verbatim: {report.relay_verbatim_ok}")
    print(f"complete: {report.complete}")
    return 0 if report.complete else 2


def _cmd_enumerate(args) -> int:
    report = enumerate_verify(args.gain_max, args.rate_max, jobs=args.jobs)
    row = serde.enumeration_to_dict(report)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(row))
            writer.writeheader()
            writer.writerow(row)
    if args.json:
        print(serde.dumps(row))
    else:
        width = max(len(k) for k in row)
        for k, v in row.items():
            print(f"{k:<{width}}  {v}")
    return 0 if report.failures == 0 else 2


def _cmd_demo(args) -> int:
    inst = DEMO_INSTANCES[args.example]
    gains = GainProfile(inst["uplink"], inst["downlink"])
    rates = RateTuple(inst["rates_flat"])
    expect = inst["expect"]
    ok = True

    def row(name, computed, expected) -> None:
        nonlocal ok
        good = computed == expected
        ok = ok and good
        mark = "ok" if good else "MISMATCH"
        print(f"  {name:<18} computed={computed!r:<42} expected={expected!r} [{mark}]")

    print(f"demo instance {args.example}")
    print(f"  uplink gains   {gains.uplink}")
    print(f"  downlink gains {gains.downlink}")
    print(f"  rates          {rates.flat}")
    print(f"  in region:     {eval_theorem1(gains, rates).satisfied}")

    reduced = reduce_network(gains, rates)
    row("reduced uplink", reduced.uplink, expect["reduced_uplink"])
    row("reduced downlink", reduced.downlink, expect["reduced_downlink"])
    if inst["note"]:
        print(f"  note: {inst['note']}")

    cycles = eval_lemma1(reduced.uplink, reduced.downlink, reduced.rates)
    worst = cycles.worst()
    row("worst condition", worst.condition_id, expect["mgc"])
    row("excess", -worst.gap, expect["excess"])

    plan = _make_plan(reduced)
    row("equivalent", plan.equivalent.flat, tuple(expect["equivalent"]))
    feasible = sos_feasible(reduced.uplink, reduced.downlink, plan.equivalent)
    row("orderable", feasible, True)

    sim = simulate_5node(gains, rates, rounds=5, seed=args.seed)
    row("delivered", f"{sim.total_delivered}/{sim.total_injected}",
        f"{sim.total_injected}/{sim.total_injected}")
    row("relay verbatim", sim.relay_verbatim_ok, True)
    print(f"  demo {'passed' if ok else 'FAILED'}")
    return 0 if ok else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="detrelay",
        description="Capacity checks, schedules and bit-exact simulation for "
        "the 5-node deterministic relay network with relay messages.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate the achievable-region bounds")
    p.add_argument("--input", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("reduce", help="serve relay streams, print the reduced network")
    p.add_argument("--input", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("schedule", help="build the level schedule (detouring if needed)")
    p.add_argument("--input", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("simulate", help="bit-exact end-to-end simulation")
    p.add_argument("--input", required=True)
    p.add_argument("--rounds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("enumerate", help="exhaustive small-scale verification sweep")
    p.add_argument("--gain-max", type=int, required=True)
    p.add_argument("--rate-max", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("demo", help="replay a bundled worked instance")
    p.add_argument("--example", type=int, choices=(1, 2), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_demo)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except RelayNetworkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
