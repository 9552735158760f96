import json

import pytest

from detrelay import (
    GainProfile,
    RateTuple,
    enumerate_verify,
    eval_theorem1,
    reduce_network,
    simulate_5node,
)
from detrelay import serde
from detrelay.cli import main
from detrelay.sim import plan_reduced
from detrelay.sos import build_sos_schedule


def test_round_trips(ex2):
    gains, rates = ex2
    assert serde.gain_profile_from_dict(serde.gain_profile_to_dict(gains)) == gains
    assert serde.rate_tuple_from_dict(serde.rate_tuple_to_dict(rates)) == rates

    reduced = reduce_network(gains, rates)
    via_json = json.loads(serde.dumps(serde.reduced_network_to_dict(reduced)))
    assert serde.reduced_network_from_dict(via_json) == reduced

    report = eval_theorem1(gains, rates)
    back = serde.report_from_dict(json.loads(serde.dumps(serde.report_to_dict(report))))
    assert back == report

    plan = plan_reduced(reduced.uplink, reduced.downlink, reduced.rates)
    back_plan = serde.plan_from_dict(json.loads(serde.dumps(serde.plan_to_dict(plan))))
    assert back_plan == plan

    schedule = build_sos_schedule(reduced, plan.equivalent)
    back_sched = serde.schedule_from_dict(
        json.loads(serde.dumps(serde.schedule_to_dict(schedule)))
    )
    assert back_sched == schedule

    delivery = simulate_5node(gains, rates, rounds=2, seed=5)
    back_del = serde.delivery_from_dict(
        json.loads(serde.dumps(serde.delivery_to_dict(delivery)))
    )
    assert serde.delivery_to_dict(back_del) == serde.delivery_to_dict(delivery)

    enum = enumerate_verify(1, 0)
    assert serde.enumeration_from_dict(serde.enumeration_to_dict(enum)) == enum


def test_parse_network_accepts_map_and_flat(ex2):
    gains, rates = ex2
    doc = serde.network_to_dict(gains, rates)
    g1, r1 = serde.parse_network(doc)
    g2, r2 = serde.parse_network(
        {"uplink": doc["uplink"], "downlink": doc["downlink"],
         "rates_flat": list(rates.flat)}
    )
    assert (g1, r1) == (g2, r2) == (gains, rates)


def test_parse_network_diagnostics():
    with pytest.raises(ValueError, match="uplink"):
        serde.parse_network({"uplink": [1], "downlink": [1, 1, 1, 1], "rates": {}})
    with pytest.raises(ValueError, match="rates"):
        serde.parse_network({"uplink": [1, 1, 1, 1], "downlink": [1, 1, 1, 1]})
    with pytest.raises(ValueError, match="pair"):
        serde.parse_network(
            {"uplink": [1, 1, 1, 1], "downlink": [1, 1, 1, 1], "rates": {"123": 1}}
        )


@pytest.fixture
def net_file(tmp_path, ex2):
    gains, rates = ex2
    path = tmp_path / "net.json"
    path.write_text(json.dumps(serde.network_to_dict(gains, rates)))
    return str(path)


def test_cli_check_in_region(net_file, capsys):
    assert main(["check", "--input", net_file]) == 0
    out = capsys.readouterr().out
    assert "satisfied: True" in out


def test_cli_check_zero_rates(tmp_path, capsys):
    doc = {"uplink": [2, 3, 1, 4], "downlink": [1, 2, 3, 4],
           "rates_flat": [0] * 20}
    path = tmp_path / "zero.json"
    path.write_text(json.dumps(doc))
    assert main(["check", "--input", str(path)]) == 0


def test_cli_check_out_of_region(tmp_path, capsys):
    doc = {"uplink": [1, 1, 1, 1], "downlink": [1, 1, 1, 1],
           "rates_flat": [3] * 20}
    path = tmp_path / "bad_net.json"
    path.write_text(json.dumps(doc))
    assert main(["check", "--input", str(path)]) == 2


def test_cli_malformed_input(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    with pytest.raises(SystemExit) as err:
        main(["check", "--input", str(path)])
    assert err.value.code == 1
    assert "input error" in capsys.readouterr().err


def test_cli_reduce_and_schedule(net_file, capsys):
    assert main(["reduce", "--input", net_file]) == 0
    out = capsys.readouterr().out
    assert "(8, 8, 3, 2)" in out and "(3, 4, 7, 7)" in out

    assert main(["schedule", "--input", net_file]) == 0
    out = capsys.readouterr().out
    assert "[DS2]" in out and "relay map" in out


def test_cli_schedule_json_round_trips(net_file, capsys):
    assert main(["schedule", "--input", net_file, "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    plan = serde.plan_from_dict(doc["plan"])
    assert plan.equivalent.flat == (2, 1, 1, 1, 2, 0, 1, 0, 1, 1, 0, 1)
    serde.schedule_from_dict(doc["schedule"])


def test_cli_simulate(net_file, capsys):
    assert main(["simulate", "--input", net_file, "--rounds", "3",
                 "--seed", "4", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["complete"] is True
    assert doc["relay_verbatim_ok"] is True


def test_cli_enumerate_with_csv(tmp_path, capsys):
    csv_path = tmp_path / "table.csv"
    assert main(["enumerate", "--gain-max", "1", "--rate-max", "1",
                 "--csv", str(csv_path)]) == 0
    header, row = csv_path.read_text().strip().splitlines()
    assert "failures" in header
    assert row.endswith(",0")
    out = capsys.readouterr().out
    assert "failures" in out


def test_cli_demo_examples(capsys):
    assert main(["demo", "--example", "1"]) == 0
    out = capsys.readouterr().out
    assert "demo passed" in out
    assert "note: reduced uplink gain of node 2 is 3" in out

    assert main(["demo", "--example", "2"]) == 0
    out = capsys.readouterr().out
    assert "(2, 1, 1, 1, 2, 0, 1, 0, 1, 1, 0, 1)" in out
    assert "demo passed" in out


def test_cli_stable_output_across_runs(net_file, capsys):
    main(["simulate", "--input", net_file, "--rounds", "2", "--seed", "9", "--json"])
    first = capsys.readouterr().out
    main(["simulate", "--input", net_file, "--rounds", "2", "--seed", "9", "--json"])
    assert capsys.readouterr().out == first
