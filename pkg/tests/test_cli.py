import json
from pathlib import Path

import pytest

from conemfd.cli import build_parser, run, to_json

EXAMPLES = Path(__file__).resolve().parents[1] / "schemas" / "examples"

SUBCOMMANDS = [
    ["validate-germ"],
    ["double"],
    ["spectrum", "football"],
    ["indicial"],
    ["normal-op", "scan"],
    ["normal-op", "solve"],
    ["check", "identities"],
    ["classify-deformation"],
    ["rigidity"],
    ["bessel", "selftest"],
]


def _run(capsys, argv):
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_rigidity_example(capsys):
    code, out, _ = _run(capsys, ["rigidity", str(EXAMPLES / "tetra_hyp_1.0.json"), "--tol", "1e-8"])
    report = json.loads(out)
    assert code == 0 and report["results"]["kernel_dim"] == 6
    assert report["summary"]["status"] == "pass"


def test_validate_mismatched(capsys):
    code, out, _ = _run(capsys, ["validate-germ", str(EXAMPLES / "mismatched.json")])
    assert code == 1
    assert "V5" in {v["code"] for v in json.loads(out)["results"]["violations"]}


def test_validate_removable_vertex_passes(capsys):
    code, out, _ = _run(capsys, ["validate-germ", str(EXAMPLES / "removable_vertex.json")])
    assert code == 0 and "W1" in out


def test_spectrum_oracle_agreement(capsys):
    code, out, _ = _run(capsys, ["spectrum", "football", "--angle", "3.14159265", "--max", "13", "--oracle"])
    assert code == 0
    table = json.loads(out)["results"]["table"]
    assert table and max(abs(row["difference"]) for row in table) <= 1e-8


def test_double_writes_germ(tmp_path, capsys):
    target = tmp_path / "g.json"
    code, _, _ = _run(capsys, ["double", str(EXAMPLES / "cube_euc_1.0.json"), "-o", str(target)])
    assert code == 0
    code, _, _ = _run(capsys, ["validate-germ", str(target)])
    assert code == 0


def test_indicial_edge(capsys):
    code, out, _ = _run(capsys, ["indicial", "edge", "--angle", "4.71238898038469"])
    assert code == 0
    values = sorted(r["value"] for r in json.loads(out)["results"]["roots"])
    assert values == pytest.approx([-1 / 3, 0.0, 1 / 3], abs=1e-12)


def test_indicial_vertex_spectrum_file(capsys):
    code, out, _ = _run(capsys, ["indicial", "vertex", "--spectrum", str(EXAMPLES / "link_0_2.spectrum")])
    assert code == 0
    assert json.loads(out)["results"]["groups"] == {"A": [0], "B": [-1]}


def test_normal_op_scan_csv(capsys):
    argv = ["normal-op", "scan", "--gamma", "1.2", "--deltas", "0.5", "1.25", "--nmax", "1", "--xis", "1", "--csv"]
    code, out, _ = _run(capsys, argv)
    assert code == 0 and out.startswith("n,xi,delta,member")


def test_output_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, out, _ = _run(capsys, ["classify-deformation", "--kind", "length", "--kappa", "-1", "-o", str(target)])
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["subcommand"] == "classify-deformation"


@pytest.mark.parametrize(
    "argv",
    [
        ["bessel", "selftest"],
        ["check", "identities", "--chart", "flat", "--trials", "2", "--seed", "7"],
        ["normal-op", "solve", "--xi", "1", "--bump", "1", "0.1"],
        ["rigidity", str(EXAMPLES / "cube_euc_1.0.json")],
    ],
    ids=lambda a: " ".join(a[:2]),
)
def test_byte_for_byte_determinism(capsys, argv):
    first = _run(capsys, argv)
    second = _run(capsys, argv)
    assert first == second


@pytest.mark.parametrize("sub", SUBCOMMANDS, ids=" ".join)
def test_help_for_every_subcommand(capsys, sub):
    code, out, _ = _run(capsys, sub + ["--help"])
    assert code == 0 and "usage" in out


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = _run(capsys, ["bessel", "selftest", "--frobnicate"])
    assert code == 2 and err.startswith("E_USAGE")


def test_missing_file_is_input_error(capsys, tmp_path):
    code, _, err = _run(capsys, ["rigidity", str(tmp_path / "absent.json")])
    assert code == 2 and ":" in err.splitlines()[0]


def test_bad_polyhedron_is_input_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"space": "hyperbolic3", "vertices": [[2, 0, 0, 0]], "faces": []}')
    code, _, _ = _run(capsys, ["rigidity", str(bad)])
    assert code == 2


def test_floats_use_seventeen_digits():
    assert to_json(0.1) == "0.10000000000000001"
    assert to_json({"x": float("inf")}) == '{\n "x": "inf"\n}'
    assert build_parser().prog
