import json
from fractions import Fraction

import pytest

from galcheck.errors import SchemaError, ValidationError
from galcheck.extensive import histories, terminal_histories, to_gal_structure, utility
from galcheck.gamegen import random_bimatrix
from galcheck.textio import (
    BENCH_COLUMNS,
    BenchRecord,
    dump_bimatrix,
    dump_game,
    dump_structure,
    load_bimatrix,
    load_game,
    load_structure,
    write_bench_csv,
)


# --------------------------------------------------------------------------- #
# structures


def test_load_example_structure_fixture(example_structure_path):
    g = load_structure(example_structure_path.read_bytes())
    assert len(g.states) == 5
    assert g.initial == ("()",)
    assert g.players_at["()"] == {"1"}
    assert [e.label for e in g.domains["U"]] == ["0", "1", "2"]


def test_structure_roundtrip_idempotent(example_structure_path):
    data = example_structure_path.read_bytes()
    once = dump_structure(load_structure(data))
    twice = dump_structure(load_structure(once))
    assert once == twice == data


def test_dump_of_generated_equals_fixture(example_game, example_structure_path):
    assert dump_structure(to_gal_structure(example_game)) == example_structure_path.read_bytes()


def test_load_structure_rejects_unknown_field(example_structure_path):
    doc = json.loads(example_structure_path.read_text())
    doc["extra"] = 1
    with pytest.raises(SchemaError) as err:
        load_structure(json.dumps(doc))
    assert "extra" in str(err.value)


def test_load_structure_rejects_dangling_action(example_structure_path):
    doc = json.loads(example_structure_path.read_text())
    doc["actions"].append(["()", "noshere"])
    with pytest.raises(SchemaError) as err:
        load_structure(json.dumps(doc))
    assert "noshere" in str(err.value) and "/actions" in str(err.value)


def test_load_structure_reports_seriality_violation(example_structure_path):
    doc = json.loads(example_structure_path.read_text())
    # strip every action: states with players lose their successors
    doc["actions"] = []
    with pytest.raises(ValidationError) as err:
        load_structure(json.dumps(doc))
    assert any("no outgoing action" in v for v in err.value.violations)


def test_load_structure_rejects_rigid_table_in_state(example_structure_path):
    doc = json.loads(example_structure_path.read_text())
    doc["states"][0].setdefault("funcs", {})["u1"] = {"(B)": "1"}
    with pytest.raises(SchemaError) as err:
        load_structure(json.dumps(doc))
    assert "u1" in str(err.value)


def test_load_structure_rejects_bad_json():
    with pytest.raises(SchemaError) as err:
        load_structure(b"{not json")
    assert "invalid JSON" in str(err.value)


def test_load_structure_rejects_ambiguous_argskey(example_structure_path):
    # craft a sort whose labels make "a,a,a" splittable two ways
    doc = {
        "sorts": {"S": ["a", "a,a"]},
        "players": [],
        "functions": {"f": {"args": ["S", "S"], "result": "S", "rigid": True}},
        "predicates": {},
        "states": [{"id": "e0", "players": []}],
        "rigid": {"funcs": {"f": {"a,a,a": "a"}}, "preds": {}},
        "actions": [],
        "initial": ["e0"],
    }
    with pytest.raises(SchemaError) as err:
        load_structure(json.dumps(doc))
    assert "ambiguous" in str(err.value)


def test_unambiguous_comma_labels_resolve(example_structure_path):
    g = load_structure(example_structure_path.read_bytes())
    # O_h keys contain labels with commas such as "(A,L)"; force evaluation
    elem = g.interp.fun(
        "O_h",
        "()",
        (g.element("H", "(A)"), g.element("S1", "<B>"), g.element("S2", "<L>")),
    )
    assert elem.label == "(A,L)"


# --------------------------------------------------------------------------- #
# games


def test_load_example_game_fixture(example_game_path, example_game):
    g = load_game(example_game_path.read_bytes())
    assert g == example_game
    assert len(histories(g)) == 5
    assert len(terminal_histories(g)) == 3


def test_game_roundtrip_idempotent(example_game_path):
    data = example_game_path.read_bytes()
    g = load_game(data)
    once = dump_game(g)
    assert dump_game(load_game(once)) == once


def test_load_game_missing_utility_names_node():
    doc = {
        "players": ["1", "2"],
        "root": {"player": "1", "moves": {"A": {"utilities": {"1": 0}}}},
    }
    with pytest.raises(ValidationError) as err:
        load_game(json.dumps(doc))
    assert any("(A)" in v and "2" in v for v in err.value.violations)


def test_load_game_rational_utilities():
    doc = {
        "players": ["1"],
        "root": {"player": "1", "moves": {"A": {"utilities": {"1": [1, 2]}}}},
    }
    g = load_game(json.dumps(doc))
    assert utility(g, ("A",), "1") == Fraction(1, 2)


def test_load_game_rejects_zero_denominator():
    doc = {
        "players": ["1"],
        "root": {"player": "1", "moves": {"A": {"utilities": {"1": [1, 0]}}}},
    }
    with pytest.raises(SchemaError) as err:
        load_game(json.dumps(doc))
    assert "/root/moves/A/utilities/1" in str(err.value)


def test_load_game_rejects_empty_moves():
    doc = {"players": ["1"], "root": {"player": "1", "moves": {}}}
    with pytest.raises(SchemaError):
        load_game(json.dumps(doc))


def test_load_game_rejects_unknown_node_field():
    doc = {
        "players": ["1"],
        "root": {"player": "1", "moves": {"A": {"utilities": {"1": 0}, "note": "x"}}},
    }
    with pytest.raises(SchemaError) as err:
        load_game(json.dumps(doc))
    assert "/root/moves/A" in str(err.value)


# --------------------------------------------------------------------------- #
# bimatrix files


def test_bimatrix_roundtrip():
    b = random_bimatrix(3, 2, 9, 17)
    assert load_bimatrix(dump_bimatrix(b)) == b


def test_bimatrix_rejects_ragged_rows():
    doc = {"m": 2, "n": 2, "u1": [[1, 2], [3]], "u2": [[0, 0], [0, 0]], "seed": 0}
    with pytest.raises(SchemaError) as err:
        load_bimatrix(json.dumps(doc))
    assert "/u1/1" in str(err.value)


# --------------------------------------------------------------------------- #
# bench CSV


def test_bench_csv_header_only():
    data = write_bench_csv([])
    assert data == ("experiment,m,n,payoff_bound,seed,equilibria,millis\r\n").encode()


def test_bench_csv_single_record():
    rec = BenchRecord("random-2p", 2, 2, 10, 7, 1, 0.25)
    lines = write_bench_csv([rec]).decode().splitlines()
    assert lines[0] == ",".join(BENCH_COLUMNS)
    assert lines[1] == "random-2p,2,2,10,7,1,0.250"
    assert len(lines) == 2


def test_bench_csv_quotes_embedded_commas():
    rec = BenchRecord("weird, name", 2, 2, 1, 0, 4, 1.0)
    lines = write_bench_csv([rec]).decode().splitlines()
    assert lines[1].startswith('"weird, name"')


def test_bench_record_rejects_bad_fields():
    with pytest.raises(ValueError):
        BenchRecord("", 2, 2, 1, 0, 4, 1.0)
    with pytest.raises(ValueError):
        BenchRecord("x", 2, 2, 1, 0, 4, -1.0)
