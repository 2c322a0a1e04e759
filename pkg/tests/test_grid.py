import json

import numpy as np
import pytest

from ppf_dnn.exceptions import CaseSyntaxError, CaseValidationError
from ppf_dnn.grid import (
    build_ybus,
    bundled_case_path,
    load_case,
    parse_case,
    parse_matpower,
    serialize_case,
)
from ppf_dnn.models.enums import BusKind

from .conftest import FOUR_BUS, TWO_BUS


def _with(doc, **changes):
    out = json.loads(json.dumps(doc))
    out.update(changes)
    return json.dumps(out)


class TestParseCase:

    def test_two_bus_series_admittance(self, two_bus):
        br = two_bus.branches[0]
        assert br.g_series == 0.0
        assert br.b_series == pytest.approx(-10.0, abs=1e-12)
        assert two_bus.n_bus == 2
        assert two_bus.buses[1].p_load == pytest.approx(0.5)

    def test_bus_labels_map_to_indices(self, four_bus):
        assert [b.id for b in four_bus.buses] == [0, 1, 2, 3]
        assert [b.label for b in four_bus.buses] == [1, 2, 3, 4]
        assert four_bus.slack == 0
        assert list(four_bus.pv) == [1]
        assert list(four_bus.pq) == [2, 3]

    def test_multiple_slack_buses(self):
        buses = [dict(b) for b in TWO_BUS["buses"]]
        buses[1]["kind"] = "slack"
        with pytest.raises(CaseValidationError, match="multiple slack buses"):
            parse_case(_with(TWO_BUS, buses=buses))

    def test_missing_slack(self):
        buses = [dict(b) for b in TWO_BUS["buses"]]
        buses[0]["kind"] = "pq"
        with pytest.raises(CaseValidationError, match="missing slack"):
            parse_case(_with(TWO_BUS, buses=buses))

    def test_zero_impedance_branch(self):
        with pytest.raises(CaseValidationError, match="zero impedance"):
            parse_case(_with(TWO_BUS, branches=[{"from": 1, "to": 2, "r": 0.0, "x": 0.0}]))

    def test_self_loop(self):
        with pytest.raises(CaseValidationError, match="self-loop"):
            parse_case(_with(TWO_BUS, branches=[{"from": 1, "to": 1, "r": 0.0, "x": 0.1}]))

    def test_dangling_branch(self):
        with pytest.raises(CaseValidationError, match="dangling branch"):
            parse_case(_with(TWO_BUS, branches=[{"from": 1, "to": 9, "r": 0.0, "x": 0.1}]))

    def test_disconnected(self):
        buses = TWO_BUS["buses"] + [{"id": 3, "kind": "pq"}]
        with pytest.raises(CaseValidationError, match="disconnected"):
            parse_case(_with(TWO_BUS, buses=buses))

    def test_bad_setpoint(self):
        buses = [dict(b) for b in TWO_BUS["buses"]]
        buses[0]["v_setpoint"] = 0.0
        with pytest.raises(CaseValidationError, match="voltage setpoint"):
            parse_case(_with(TWO_BUS, buses=buses))

    def test_syntax_error_has_position(self):
        with pytest.raises(CaseSyntaxError) as err:
            parse_case('{"buses": [\n  {"id": 1,, }]}')
        assert err.value.line == 2
        assert err.value.column > 1

    def test_schema_error(self):
        with pytest.raises(CaseValidationError, match="schema"):
            parse_case(_with(TWO_BUS, branches=[{"from": 1, "to": 2, "x": 0.1}]))

    def test_case30_counts(self, case30):
        assert case30.n_bus == 30
        assert case30.n_branch == 41
        assert len(case30.generators) == 6
        assert sum(b.kind == BusKind.SLACK for b in case30.buses) == 1

    @pytest.mark.parametrize("name, n_bus, n_branch", [("case30", 30, 41), ("case118", 118, 186)])
    def test_bundled_cases_load(self, name, n_bus, n_branch):
        path = bundled_case_path(name)
        doc = json.loads(path.read_text())
        assert len(doc["branches"]) == n_branch
        assert len({(b["from"], b["to"]) for b in doc["branches"]}) >= n_branch - 10
        case = load_case(path)
        assert case.n_bus == n_bus
        assert case.n_branch == n_branch
        assert sum(b.kind == BusKind.SLACK for b in case.buses) == 1

    def test_case30_has_every_line(self):
        doc = json.loads(bundled_case_path("case30").read_text())
        ends = {(b["from"], b["to"]) for b in doc["branches"]}
        assert (6, 28) in ends and (8, 28) in ends
        assert len(ends) == 41

    def test_series_pair_round_trips_impedance(self, case30):
        for br in case30.branches:
            z2 = br.g_series ** 2 + br.b_series ** 2
            assert br.g_series / z2 == pytest.approx(br.r, rel=1e-12, abs=1e-15)
            assert -br.b_series / z2 == pytest.approx(br.x, rel=1e-12)

    def test_serialize_round_trip(self, case30):
        again = parse_case(serialize_case(case30))
        assert again == case30

    def test_simplified_drops_taps(self, case30):
        assert all(br.tap == 1.0 and br.b_charge == 0.0 for br in case30.branches)

    def test_full_model_keeps_taps(self):
        doc = json.loads(json.dumps(FOUR_BUS))
        doc["branches"][0]["tap"] = 0.97
        doc["branches"][1]["b_charge"] = 0.04
        case = parse_case(json.dumps(doc), simplified=False)
        assert case.branches[0].tap == 0.97
        assert case.branches[1].b_charge == 0.04


class TestYbus:

    def test_two_bus_entries(self, two_bus):
        y = build_ybus(two_bus).toarray()
        assert y[0, 0] == pytest.approx(-10j)
        assert y[1, 1] == pytest.approx(-10j)
        assert y[0, 1] == pytest.approx(10j)
        assert y[1, 0] == pytest.approx(10j)

    def test_single_bus_is_its_shunt(self):
        doc = {"buses": [{"id": 1, "kind": "slack", "shunt_g": 0.01, "shunt_b": 0.2}]}
        y = build_ybus(parse_case(json.dumps(doc))).toarray()
        assert y.shape == (1, 1)
        assert y[0, 0] == pytest.approx(0.01 + 0.2j)

    def test_rows_sum_to_zero_without_shunts(self, case30):
        doc = json.loads(serialize_case(case30))
        for b in doc["buses"]:
            b["shunt_g"] = b["shunt_b"] = 0.0
        y = build_ybus(parse_case(json.dumps(doc))).toarray()
        assert np.abs(y.sum(axis=1)).max() < 1e-12

    def test_off_diagonal_signs(self, case30):
        ybus = build_ybus(case30)
        for br in case30.branches:
            g, b = ybus.entry(br.from_bus, br.to_bus)
            assert g < 0
            assert b > 0

    def test_tap_and_charging(self):
        doc = {
            "buses": [{"id": 1, "kind": "slack"}, {"id": 2, "kind": "pq"}],
            "branches": [{"from": 1, "to": 2, "r": 0.0, "x": 0.1, "b_charge": 0.2, "tap": 0.5}],
        }
        y = build_ybus(parse_case(json.dumps(doc), simplified=False)).toarray()
        assert y[0, 0] == pytest.approx((-10j + 0.1j) / 0.25)
        assert y[1, 1] == pytest.approx(-10j + 0.1j)
        assert y[0, 1] == pytest.approx(10j / 0.5)


MATPOWER_TEXT = """function mpc = case3
% three bus test
mpc.version = '2';
mpc.baseMVA = 100;
mpc.bus = [
	1	3	0	0	0	0	1	1.0	0	135	1	1.05	0.95;
	2	2	20	10	0	0	1	1.0	0	135	1	1.05	0.95;
	3	1	45	15	0	19	1	1.0	0	135	1	1.05	0.95;
];
mpc.gen = [
	1	0	0	300	-300	1.02	100	1	250	10;
	2	40	0	300	-300	1.01	100	1	250	10;
	3	0	0	300	-300	1.0	100	0	250	10;
];
mpc.branch = [
	1	2	0.01	0.08	0.02	0	0	0	0	0	1	-360	360;
	1	3	0.02	0.12	0	0	0	0	0.98	0	1	-360	360;
	2	3	0.015	0.1	0	0	0	0	0	0	1	-360	360;
	2	3	0.015	0.1	0	0	0	0	0	0	0	-360	360;
];
"""


class TestMatpower:

    def test_converts(self):
        doc = parse_matpower(MATPOWER_TEXT, name="case3")
        assert doc.base_mva == 100
        assert [b.kind for b in doc.buses] == [BusKind.SLACK, BusKind.PV, BusKind.PQ]
        assert len(doc.gens) == 2  # third is out of service
        assert len(doc.branches) == 3  # last is out of service
        assert doc.buses[0].v_setpoint == 1.02
        assert doc.buses[2].shunt_b == pytest.approx(0.19)
        assert doc.branches[0].tap == 1.0
        assert doc.branches[1].tap == 0.98

    def test_converted_case_parses(self):
        doc = parse_matpower(MATPOWER_TEXT, name="case3")
        case = parse_case(json.dumps(doc.model_dump(mode="json", by_alias=True)))
        assert case.n_bus == 3
        assert case.name == "case3"

    def test_bad_number(self):
        text = MATPOWER_TEXT.replace("0.015\t0.1\t0\t0\t0\t0\t0\t0\t1", "0.015\tx1\t0\t0\t0\t0\t0\t0\t1")
        with pytest.raises(CaseSyntaxError) as err:
            parse_matpower(text)
        assert err.value.line == 18

    def test_missing_block(self):
        with pytest.raises(CaseValidationError, match="mpc.branch"):
            parse_matpower(MATPOWER_TEXT.split("mpc.branch")[0])

    def test_phase_shifter_rejected(self):
        text = MATPOWER_TEXT.replace("0.98\t0\t1", "0.98\t5\t1")
        with pytest.raises(CaseValidationError, match="phase shifter"):
            parse_matpower(text)
