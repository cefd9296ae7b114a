import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from coe import cli
from coe.gaussian import Bipartition, avg_coe_exact


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_emit_csv_bytes(tmp_path):
    path = tmp_path / "t.csv"
    cli.emit([{"f": 0.5, "coe": 0.2337}], "csv", str(path))
    assert path.read_bytes() == b"f,coe\n0.5,0.2337\n"


def test_emit_twelve_digits():
    text = cli.render([{"x": math.pi, "n": 3}], "csv")
    assert text == "x,n\n3.14159265359,3\n"


def test_emit_empty():
    with pytest.raises(cli.ValidationError):
        cli.render([], "csv")
    with pytest.raises(cli.ValidationError):
        cli.render([{"a": 1}, {"b": 2}], "csv")


def test_json_round_trip(tmp_path):
    rows = [{"f": 0.1 + 0.2, "coe": 1 / 3}, {"f": 1e-300, "coe": 2.0 ** -60}]
    path = tmp_path / "t.json"
    cli.emit(rows, "json", str(path), config={"seed": 7})
    data = json.loads(path.read_text())
    assert data["columns"] == ["f", "coe"]
    assert data["rows"] == [[r["f"], r["coe"]] for r in rows]
    assert data["config"] == {"seed": 7}
    assert set(data["provenance"]) == {"git_describe", "timestamp"}


def test_page_curve(tmp_path, capsys):
    out = tmp_path / "page.csv"
    code, _, _ = run(["page-curve", "--V", "30", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["f", "coe_density"]
    assert len(rows) == 29
    expected = avg_coe_exact(Bipartition(30, 7)) / (30 * math.log(2))
    assert float(rows[6]["coe_density"]) == pytest.approx(expected, rel=1e-11)


def test_coefficient_half(capsys):
    code, out, _ = run(["coefficient", "--f", "0.5"], capsys)
    assert code == 0
    header, row = out.strip().split("\n")
    assert header == "f,coe,ee,renyi2"
    assert float(row.split(",")[1]) == pytest.approx(math.pi ** 2 / 8 - 1, abs=1e-11)


def test_coefficient_grid(capsys):
    code, out, _ = run(["coefficient", "--f-min", "0.1", "--f-max", "0.9", "--f-steps", "5"], capsys)
    assert code == 0
    assert len(out.strip().split("\n")) == 6


def test_variance(capsys):
    code, out, _ = run(["variance", "--V", "8", "12", "--f", "0.5"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["V"] for r in rows] == ["8", "12"]
    assert list(rows[0]) == ["V", "f", "mean", "std"]


def test_convergence(capsys):
    code, out, _ = run(["convergence", "--f", "0.25", "--max-terms", "40"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 40
    assert list(rows[0]) == ["k", "term", "partial_sum", "tail_bound"]


def test_syk2_mc_json(capsys):
    argv = ["syk2-mc", "--V", "20", "--f", "0.5", "--realizations", "3", "--states", "20", "--seed", "7",
            "--format", "json"]
    code, out, _ = run(argv, capsys)
    data = json.loads(out)
    assert code == 0
    assert data["columns"] == ["V", "f", "coe_mean", "coe_stderr", "ee_mean", "renyi2_mean", "deficit"]
    assert data["config"]["seed"] == 7 and data["config"]["half_filled"] is True
    # reproducible payload
    _, out2, _ = run(argv, capsys)
    assert json.loads(out2)["rows"] == data["rows"]


def test_deficit_from_input(tmp_path, capsys):
    src = tmp_path / "d.csv"
    src.write_text("V,deficit\n" + "".join(f"{v},{1.2 / v ** 2}\n" for v in (10, 20, 30, 40)))
    code, out, _ = run(["deficit", "--input", str(src)], capsys)
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "V,inv_V2,deficit"
    fit = json.loads(lines[-1])["fit"]
    assert fit["a0"] == pytest.approx(1.2, rel=1e-9)


def test_deficit_too_few(tmp_path, capsys):
    src = tmp_path / "d.csv"
    src.write_text("V,deficit\n10,0.1\n20,0.2\n")
    code, _, err = run(["deficit", "--input", str(src)], capsys)
    assert code == 2
    assert json.loads(err.splitlines()[0])["error"] == "FitError"


def test_kdf_eval(capsys):
    code, out, _ = run(["kdf-eval", "--x", "0.0"], capsys)
    assert code == 0
    assert out.split("\n")[1].split(",")[2] == "1"


def test_kdf_boundary_exit(capsys):
    code, _, err = run(["kdf-eval", "--x", "1.0"], capsys)
    assert code == 2
    assert json.loads(err)["error"] == "RegionOfConvergenceError"


def test_numerical_exit(capsys):
    code, _, err = run(["page-curve", "--V", "30", "--precision-bits", "60"], capsys)
    assert code == 3
    assert json.loads(err)["error"] == "PrecisionError"


def test_io_exit(capsys, tmp_path):
    code, _, err = run(["coefficient", "--f", "0.3", "--out", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == 4


def test_unknown_flag(capsys):
    code, _, err = run(["coefficient", "--f", "0.3", "--nope"], capsys)
    assert code == 2
    assert "unrecognized" in err


def test_domain_exit(capsys):
    assert run(["coefficient", "--f", "1.5"], capsys)[0] == 2
    assert run(["variance", "--V", "10"], capsys)[0] == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# figure run\nf = 0.25\ntol = 1e-10\n")
    code, out, _ = run(["coefficient", "--config", str(cfg)], capsys)
    assert code == 0
    assert out.split("\n")[1].startswith("0.25,")
    # explicit flags win over the file
    code, out, _ = run(["coefficient", "--config", str(cfg), "--f", "0.4"], capsys)
    assert out.split("\n")[1].startswith("0.4,")


def test_config_bad_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 1\n")
    assert run(["coefficient", "--config", str(cfg), "--f", "0.3"], capsys)[0] == 2


def test_config_switch(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("half_filled = false\nrealizations = 2\nstates = 5\nV = 10\nf = 0.5\n")
    code, out, _ = run(["syk2-mc", "--config", str(cfg), "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out)["config"]["half_filled"] is False


def test_crosscheck_quick(capsys):
    code, out, _ = run(["crosscheck", "--quick"], capsys)
    assert code == 0
    assert all(line.startswith("PASS") for line in out.strip().split("\n"))


def test_help_lists_everything():
    text = subprocess.run([sys.executable, "-m", "coe.cli", "--help"], capture_output=True, text=True).stdout
    for cmd in cli.COMMANDS:
        assert cmd in text
    sub = subprocess.run([sys.executable, "-m", "coe.cli", "syk2-mc", "--help"], capture_output=True, text=True).stdout
    for flag in ("--V", "--VA", "--f", "--f-min", "--f-max", "--f-steps", "--seed", "--realizations", "--states",
                 "--half-filled", "--threads", "--out", "--format", "--config"):
        assert flag in sub
