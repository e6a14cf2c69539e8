import json
import os

from skelpa.cli import main
from skelpa.io import load_model, model_from_dict, model_to_dict

DATA = os.path.join(os.path.dirname(__file__), "data")
CHAIN = os.path.join(DATA, "chain.json")
GRAPH = os.path.join(DATA, "chain_graph.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


def test_validate_and_roundtrip(capsys):
    code, out = run(capsys, "validate", CHAIN)
    assert code == 0 and out["ok"]
    desc = load_model(CHAIN)
    again = model_from_dict(model_to_dict(desc))
    assert model_to_dict(again) == model_to_dict(desc)


def test_validate_bad_multiplicity(tmp_path, capsys):
    bad = dict(json.load(open(CHAIN)))
    bad["components"] = [{"id": "E1", "b": 0}, {"id": "E2", "b": 1}]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, out = run(capsys, "validate", str(path))
    assert code == 2
    assert "components/0/b" in out["error"]


def test_validate_unknown_face_component(tmp_path, capsys):
    bad = dict(json.load(open(CHAIN)))
    bad["faces"] = [["E1"], ["E2"], ["E1", "E9"]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, out = run(capsys, "validate", str(path))
    assert code == 2
    assert "unknown" in out["error"]


def test_check_psh_exit_codes(capsys):
    code, out = run(capsys, "check-psh", CHAIN, "--divisor", '{"E2": "2"}')
    assert code == 1
    assert out["witness_curve"] == "E2"
    code, out = run(capsys, "check-psh", CHAIN, "--divisor", "{}")
    assert code == 0 and out["psh"]


def test_eval_fiber_constant(capsys):
    code, out = run(
        capsys,
        "eval",
        CHAIN,
        "--functional",
        '{"E1": "1", "E2": "1"}',
        "--points",
        '[{"E1": "1/2", "E2": "1/2"}, {"E1": "1"}]',
    )
    assert code == 0
    assert [r["value"] for r in out["values"]] == ["1", "1"]


def test_subdivide_cli(capsys):
    code, out = run(
        capsys,
        "subdivide",
        CHAIN,
        "--face",
        "E1,E2",
        "--point",
        '{"E1": "1/2", "E2": "1/2"}',
        "--eps",
        "1/2",
    )
    assert code == 0
    assert out["support_function"]["integral"]
    assert out["vertices"]["E1^eps"] == {"E1": "3/4", "E2": "1/4"}


def test_envelope_cli_slope_cap(capsys):
    code, out = run(
        capsys,
        "envelope",
        CHAIN,
        "--obstacle",
        '{"vertex_values": {"E1": "0", "E2": "3"}}',
        "--queries",
        '[{"E2": "1"}]',
    )
    assert code == 0
    assert out["results"][0]["value"] == "1"


def test_oracle_compare_cli(capsys):
    code, out = run(
        capsys,
        "oracle-compare",
        GRAPH,
        "--obstacle",
        '{"vertex_values": {"E1": "0", "E2": "3"}}',
        "--queries",
        '[{"E2": "1"}, {"E1": "1/2", "E2": "1/2"}]',
    )
    assert code == 0
    assert out["stabilized"] and not out["mismatches"]
    assert out["values"] == ["1", "1/2"]


def test_axioms_cli(capsys):
    code, out = run(
        capsys,
        "axioms",
        CHAIN,
        "--u",
        '{"vertex_values": {"E1": "0", "E2": "0"}}',
        "--v",
        '{"vertex_values": {"E1": "1", "E2": "2"}}',
        "--constant",
        "3/2",
        "--queries",
        '[{"E1": "1"}, {"E1": "1/2", "E2": "1/2"}]',
    )
    assert code == 0 and out["ok"]


def test_bounds_cli(capsys):
    code, out = run(capsys, "bounds", CHAIN, "--kind", "vertex")
    assert code == 0
    assert out["vertex_lower_bounds"] == {"E1": "1", "E2": "1"}
    code, out = run(
        capsys, "bounds", CHAIN, "--kind", "lipschitz", "--face", "E1,E2",
        "--boundary-norm", "1",
    )
    assert code == 0


def test_determinism(capsys):
    args = (
        "envelope",
        CHAIN,
        "--obstacle",
        '{"vertex_values": {"E1": "0", "E2": "3"}}',
        "--queries",
        '[{"E2": "1"}]',
    )
    main(list(args))
    first = capsys.readouterr().out
    main(list(args))
    second = capsys.readouterr().out
    assert first == second


def test_graph_roundtrip():
    desc = load_model(GRAPH)
    again = model_from_dict(model_to_dict(desc))
    assert model_to_dict(again) == model_to_dict(desc)
