from __future__ import annotations

import json

import pytest

from stacklab.cli import main


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_build(capsys):
    code, out, _ = run(capsys, "build", "--stage", "3")
    assert code == 0
    data = json.loads(out)
    assert data["heights"] == [1, 6, 31]
    assert data["widths"] == ["1/1", "1/4", "1/16"]
    assert data["layouts"][0]["copy_offsets"] == [0, 1, 3, 4]


def test_translate(capsys):
    code, out, _ = run(capsys, "translate", "--cell", "2", "0", "--power", "7")
    assert code == 0
    data = json.loads(out)
    assert data["cells"] == [[3, 7], [3, 13], [3, 25], [4, 31], [4, 62], [4, 124], [4, 155]]
    assert data["measure"] == "1/4"
    assert data["tail"] == "0/1"


def test_translate_inverse(capsys):
    code, out, _ = run(capsys, "translate", "--cell", "2", "0", "--inverse", "--depth", "1")
    assert code == 0
    data = json.loads(out)
    assert data["inverse_cells"] == [[3, 5], [3, 17], [3, 23]]
    assert data["residual"] == "1/16"


def test_crescent(capsys):
    code, out, _ = run(capsys, "crescent", "--cell", "3", "5")
    assert code == 0
    assert json.loads(out)["pieces"][0]["measure"] == "1/128"


def test_double_approx_verdicts(capsys):
    code, out, _ = run(capsys, "double-approx")
    assert code == 0
    assert json.loads(out)["fraction"] == "3/4"
    code, out, _ = run(capsys, "double-approx", "--cells", "[[2, 0]]")
    assert code == 1
    assert json.loads(out)["fraction"] == "1/4"


def test_witness(capsys):
    code, out, _ = run(capsys, "witness")
    assert code == 0
    assert json.loads(out)["H"] == 7
    code, out, _ = run(capsys, "witness", "--mode", "minimal", "--h-max", "5")
    assert code == 1
    assert json.loads(out)["H"] is None


def test_oracle_check_csv(capsys):
    code, out, _ = run(capsys, "oracle-check", "--stage", "3", "--m-max", "10", "--out", "csv")
    assert code == 0
    assert out.splitlines()[0] == "stage,source_stage,checked"


def test_render(capsys):
    code, out, _ = run(capsys, "render", "--stage", "2")
    assert code == 0
    assert out.startswith("C_2  height 6")


def test_run(capsys, tmp_path):
    path = tmp_path / "experiment.json"
    path.write_text('{"mode": "minimal-witness", "exponents": [1], "A": [[1, 0]], "B": [[1, 0]]}')
    code, out, _ = run(capsys, "run", "--experiment", str(path))
    assert code == 0
    assert json.loads(out)["measure"] == "1/2"


@pytest.mark.parametrize(
    "argv",
    [
        ["translate", "--cell", "2", "6"],
        ["translate", "--cell", "2"],
        ["witness", "--exponents", "0"],
        ["witness", "--source", "[[[2, 0]"],
        ["double-approx", "--delta", "0.5"],
        ["build", "--rule", "no-such-rule"],
        ["run", "--experiment", "does-not-exist.json"],
        ["translate", "--power=-1"],
        ["translate", "--inverse", "--depth=-1"],
        ["crescent", "--ell", "0"],
        ["crescent", "--extra=-2"],
    ],
)
def test_errors_exit_with_2(capsys, argv: list[str]):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err.startswith("stacklab: error:")


def test_reports_are_byte_identical(capsys):
    for argv in (["build"], ["translate"], ["crescent"], ["witness"], ["double-approx"]):
        _, first, _ = run(capsys, *argv)
        _, second, _ = run(capsys, *argv)
        assert first == second
