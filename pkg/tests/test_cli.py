import json
import subprocess
import sys

import pytest

from s4tower.cli import main


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_adem(capsys):
    assert run(capsys, "adem", "Sq1 Sq2") == (0, "Sq3\n", "")


def test_adem_json(capsys):
    code, out, _ = run(capsys, "adem", "P1 P1", "--p", "3", "--format", "json")
    assert code == 0 and json.loads(out) == {"input": "P1 P1", "admissible": "2 P2"}


def test_em_basis_empty_row(capsys):
    code, out, _ = run(capsys, "em-basis", "--space", "K(Z,4)", "--p", "2", "--max", "14")
    assert code == 0
    row5 = [ln for ln in out.splitlines() if ln.startswith("5 ")]
    assert row5 == ["5       (none)     (none)"]
    code, out, _ = run(capsys, "em-basis", "--space", "K(Z,4)", "--max-degree", "14", "--format", "tsv")
    assert "5\t(none)\t(none)" in out.splitlines()


def test_em_basis_spectrum(capsys):
    code, out, _ = run(capsys, "em-basis", "--space", "HZ3", "--p", "3", "--max", "5", "--format", "tsv")
    assert out.splitlines()[1:3] == ["0\t(0)\ti", "1\t(1)\tb1 i"]


def test_flux_witness(capsys):
    code, out, _ = run(capsys, "flux", "--witness", "hp1-cubed", "--format", "json")
    rec = json.loads(out)
    assert code == 0 and rec["pairing"] == 6 and rec["holds"]


def test_flux_sweep(capsys):
    code, out, _ = run(capsys, "flux", "--sweep", "3", "--format", "json")
    assert code == 0 and json.loads(out)["rows"] == []


def test_stable_tower_tables(capsys):
    code, out, _ = run(capsys, "stable-tower", "--p", "2", "--format", "tsv")
    assert code == 0 and out.splitlines()[0] == "n\tSigma^4 HZ\tX1\tX2\tX3\tX4\tX5"
    code, out, _ = run(capsys, "stable-tower", "--assemble", "--format", "json")
    rec = json.loads(out)
    assert [r[3] for r in rec["rows"]] == ["2", "2", "24", "2", "240"]


def test_sss(capsys):
    code, out, _ = run(capsys, "sss", "--name", "x3", "--show", "log", "--format", "tsv")
    assert code == 0 and "imported" in out


def test_golden_diff_all(capsys):
    code, out, _ = run(capsys, "golden-diff", "--all")
    assert code == 0 and out.count(": ok") == 13


def test_golden_mismatch_exit_code(capsys, tmp_path):
    from s4tower.golden import golden_path

    bad = tmp_path / "em_HZ_p2.tsv"
    lines = golden_path("em-HZ-p2").read_text().splitlines(keepends=True)
    lines[3] = lines[3].rstrip("\n") + " tampered\n"
    bad.write_text("".join(lines))
    code, out, err = run(capsys, "golden-diff", "em-HZ-p2", "--golden-dir", str(tmp_path))
    assert code == 4
    assert json.loads(err)["error"] == "golden-mismatch"
    assert "difference" in out


@pytest.mark.parametrize(
    "args, code, kind",
    [
        (["adem", "Sq1 Foo"], 2, "SteenrodError"),
        (["golden-diff", "nope"], 2, "GoldenError"),
        (["em-basis", "--space", "K(Q,4)"], 2, "ValueError"),
        (["sss", "--spec", "/nonexistent.yaml"], 2, "FileNotFoundError"),
        (["flux", "--witness", "cp2"], 2, "ValueError"),
    ],
)
def test_error_records(capsys, args, code, kind):
    got, out, err = run(capsys, *args)
    rec = json.loads(err)
    assert got == code and rec["error"] == kind and rec["exit"] == code and out == ""


def test_yaml_error_has_line(capsys, tmp_path):
    f = tmp_path / "bad.yaml"
    f.write_text("prime: 2\nbase: [\n")
    code, _, err = run(capsys, "sss", "--spec", str(f))
    rec = json.loads(err)
    assert code == 2 and rec["line"] == 3


def test_unknown_field_is_config_error(capsys, tmp_path):
    f = tmp_path / "t.yaml"
    f.write_text("prime: 2\nstages:\n  - {stage: X1, degree: 6, coefficients: Z2, pulback: Sq2 r2}\n")
    code, _, err = run(capsys, "stable-tower", "--spec", str(f))
    assert code == 2 and "pulback" in json.loads(err)["message"]


def test_missing_structure_aborts(capsys, tmp_path):
    f = tmp_path / "x.yaml"
    f.write_text(
        "prime: 2\nwindow: 9\nbase:\n  declared:\n    max_degree: 9\n    classes: {4: [x], 7: [y], 8: [z]}\n"
        "fiber:\n  - {coefficients: Z2, degree: 6, kinvariant: y}\n"
    )
    code, _, err = run(capsys, "sss", "--spec", str(f))
    assert code == 3 and json.loads(err)["error"] == "UnknownStructure"


def test_window_error_aborts(capsys, tmp_path):
    f = tmp_path / "w.yaml"
    f.write_text(
        "prime: 3\nwindow: 13\nbase: {eilenberg_maclane: {coefficients: Z, degree: 4}}\n"
        "fiber:\n  - {coefficients: Z3, degree: 4, kinvariant: '0'}\n"
    )
    code, _, err = run(capsys, "sss", "--spec", str(f))
    assert code == 3 and json.loads(err)["error"] == "WindowError"


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as e:
        main(["adem", "Sq1", "--frobnicate"])
    assert e.value.code == 2


def test_console_entry_point_is_deterministic():
    cmd = [sys.executable, "-m", "s4tower.cli", "stable-tower", "--p", "3", "--both-odd", "--format", "md"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and b"beta12" in a
