import csv
import io

import numpy as np
import pytest

from isingbattery import __version__
from isingbattery.cli import ConfigError, fmt, main, parse_grid, read_config_file


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def table(text):
    return list(csv.DictReader(ln for ln in io.StringIO(text).read().splitlines() if not ln.startswith("#")))


def exponent_of(text):
    line = next(ln for ln in text.splitlines() if ": exponent " in ln)
    return float(line.split(": exponent ")[1].split()[0])


def test_correlators_endpoints(capsys):
    rc, out, _ = run(capsys, "correlators", "--f-grid", "0.5,1.0", "--precision", "6")
    assert rc == 0
    rows = table(out)
    assert rows[0]["sz"] == "0.636620"
    assert rows[1]["sx"] == "0.000000" and rows[1]["sz"] == "1.000000"
    assert rows[0]["cxz"] == ""


def test_correlators_both_sources(capsys):
    rc, out, _ = run(capsys, "correlators", "--f", "0.3", "--source", "both", "--n", "9")
    rows = table(out)
    assert [r["source"] for r in rows] == ["quadrature_T0", "exact_diag"]
    assert abs(float(rows[0]["sz"]) - float(rows[1]["sz"])) < 2e-2


def test_header_records_version_and_config(capsys):
    _, out, _ = run(capsys, "cycle", "--n", "4", "--f", "0.3")
    lines = out.splitlines()
    assert lines[0] == f"# isingbattery {__version__}"
    assert "# config: n=4" in lines
    assert all(not ln.endswith("\r") for ln in lines)


def test_cycle_rerun_from_header_is_byte_identical(tmp_path, capsys):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    rc = main(["sweep", "--n", "6", "--m", "2", "--temp", "1", "--f-grid", "0.2:0.8:3", "--phases", "min",
               "--budget", "500", "--seed", "4", "--out", str(first)])
    assert rc == 0
    assert main(["cycle", "--config", str(first), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    rows = table(first.read_text())
    assert len(rows) == 3 and len(rows[0]["theta_star"].split(";")) == 4


def test_fixed_phase_keeps_ergotropy(capsys):
    _, a, _ = run(capsys, "cycle", "--n", "6", "--f-grid", "0.2,0.4", "--phases", "fixed", "--theta", "0.785398")
    _, b, _ = run(capsys, "cycle", "--n", "6", "--f-grid", "0.2,0.4")
    assert [r["ergotropy"] for r in table(a)] == [r["ergotropy"] for r in table(b)]
    assert [r["E_c"] for r in table(a)] != [r["E_c"] for r in table(b)]


def test_eta_empty_when_undefined(capsys):
    _, out, _ = run(capsys, "cycle", "--n", "4", "--f", "1.0")
    assert table(out)[0]["eta"] == ""


def test_config_file_merged_under_flags(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nn = 5\nf=0.35\nprecision=4\n")
    _, out, _ = run(capsys, "cycle", "--config", str(cfg), "--f", "0.4")
    row = table(out)[0]
    assert row["N"] == "5" and row["f"] == "0.4000"


def test_config_errors_name_the_field(capsys):
    rc, _, err = run(capsys, "cycle", "--n", "4", "--m", "9")
    assert rc == 2 and "m:" in err and len(err.strip().splitlines()) == 1
    rc, _, err = run(capsys, "cycle", "--branch", "left")
    assert rc == 2 and "branch" in err
    rc, _, err = run(capsys, "cycle", "--f-grid", "0.5,0.2")
    assert rc == 2 and "f_grid" in err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour=blue\n")
    rc, _, err = run(capsys, "cycle", "--config", str(cfg))
    assert rc == 2 and "colour" in err


def test_unwritable_path(capsys):
    rc, _, err = run(capsys, "correlators", "--out", "/nonexistent/dir/out.csv")
    assert rc == 4 and "/nonexistent/dir/out.csv" in err


def test_optimize_dump_coupling(capsys):
    rc, out, _ = run(capsys, "optimize-phases", "--n", "6", "--m", "2", "--temp", "1", "--f", "0.5",
                     "--budget", "500", "--dump-coupling")
    assert rc == 0
    rows = table(out)
    assert len(rows) == 16
    A = np.array([float(r["A"]) for r in rows]).reshape(4, 4)
    assert np.allclose(A, A.T, atol=1e-11)
    assert any(ln.startswith("# E_c_min") for ln in out.splitlines())


def test_fit_closed_form(capsys, tmp_path):
    out = tmp_path / "fit.csv"
    rc, stdout, _ = run(capsys, "fit-exponent", "--quantity", "ergotropy", "--out", str(out))
    assert rc == 0
    exponent = exponent_of(stdout)
    assert abs(exponent - 0.25) < 0.03
    rows = table(out.read_text())
    assert len(rows) == 30


def test_fit_eta_at_zero_phase_below_beta(capsys):
    _, stdout, _ = run(capsys, "fit-exponent", "--quantity", "eta", "--theta", "0")
    assert exponent_of(stdout) < 0.125


def test_fit_from_input_file(tmp_path, capsys):
    src = tmp_path / "series.csv"
    f = 0.5 - np.logspace(-1, -3, 12)
    src.write_text("# synthetic\nf,ergotropy\n" + "".join(f"{float(x)!r},{float((0.5 - x) ** 0.3)!r}\n" for x in f))
    rc, stdout, _ = run(capsys, "fit-exponent", "--input", str(src), "--window", "0.4:0.499")
    assert rc == 0
    assert "exponent 0.300000" in stdout


def test_fit_input_with_bad_cell(tmp_path, capsys):
    src = tmp_path / "bad.csv"
    src.write_text("f,ergotropy\n0.45,abc\n")
    rc, _, err = run(capsys, "fit-exponent", "--input", str(src))
    assert rc == 2 and "input" in err


def test_fit_insufficient_points(capsys):
    rc, _, err = run(capsys, "fit-exponent", "--points", "4")
    assert rc == 2


def test_parse_grid_and_fmt():
    assert parse_grid("f_grid", "0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("f_grid", "0.1, 0.2") == [0.1, 0.2]
    with pytest.raises(ConfigError):
        parse_grid("f_grid", "a:b:c")
    assert fmt(None, 3) == ""
    assert fmt(-1e-20, 3) == "0.000"
    assert fmt(np.array([0.0, 1.5]), 2) == "0.00;1.50"


def test_read_config_skips_output_body(tmp_path):
    p = tmp_path / "out.csv"
    p.write_text("# isingbattery 0.1.0\n# command: cycle\n# config: n=6\nf,T\n0.3,0\n")
    assert read_config_file(p) == {"n": 6}
