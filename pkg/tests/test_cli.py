import csv
import io
import subprocess
import sys

import pytest

from wnchaos import cli
from wnchaos.errors import NumericalFailure


def run(*args):
    return subprocess.run([sys.executable, "-m", "wnchaos.cli", *args],
                          capture_output=True, text=True)


def call(capsys, *args):
    """Run main in-process; returns (exit code, stdout, stderr)."""
    try:
        code = cli.main(list(args))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def header(text):
    return [ln for ln in text.splitlines() if ln.startswith("#")]


def test_sheet_d1(capsys):
    code, out, _ = call(capsys, "sheet", "--d", "1", "--J", "2000", "--paths", "20000",
                        "--grid", "4", "--seed", "3")
    assert code == 0
    meta = header(out)
    assert meta[0] == "# wnchaos 0.1.0" and "# seed: 3" in meta
    assert any(ln.startswith("# config: d=1; J=2000; grid=4; paths=20000; seed=3") for ln in meta)
    rows = table(out)
    assert list(rows[0]) == ["method", "x", "y", "cov_empirical", "theory", "theory_truncated", "se"]
    row = next(r for r in rows if r["method"] == "expansion" and r["x"] == "0.5" and r["y"] == "1.0")
    assert float(row["theory"]) == 0.5
    assert abs(float(row["cov_empirical"]) - float(row["theory_truncated"])) < 4 * float(row["se"])
    assert {r["method"] for r in rows} == {"expansion", "grid"}


def test_sheet_usage_errors(capsys):
    assert call(capsys, "sheet", "--paths", "0")[0] == 2
    assert call(capsys, "sheet", "--d", "3")[0] == 2
    code, _, err = call(capsys, "sheet", "--grid", "3", "--paths", "10", "--J", "10")
    assert code == 2 and "--grid 3" in err


def test_wick_demo(capsys):
    code, out, _ = call(capsys, "wick-demo", "--steps", "64", "4096", "--seed", "1")
    rows = table(out)
    assert code == 0 and [r["quantity"] for r in rows[:3]] == ["ito", "ito-formula", "wick"]
    by = {(r["steps"], r["quantity"]): r for r in rows}
    assert abs(float(by["4096", "ito-formula"]["value"]) - float(by["4096", "wick"]["value"])) < 1e-9
    assert abs(float(by["4096", "wick"]["gap_vs_ito"])) < abs(float(by["64", "wick"]["gap_vs_ito"]))


def test_wick_demo_degenerate(capsys):
    code, out, _ = call(capsys, "wick-demo", "--T", "0", "--steps", "16")
    assert code == 0 and all(float(r["value"]) == 0.0 for r in table(out))
    assert call(capsys, "wick-demo", "--steps", "3", "4")[0] == 2


def test_clark_ocone(capsys):
    code, out, _ = call(capsys, "clark-ocone", "--case", "B_T", "--steps", "64", "--paths", "100")
    assert code == 0 and float(table(out)[0]["rms_error"]) < 1e-13
    code, out, _ = call(capsys, "clark-ocone", "--case", "B_T_squared", "--steps", "256", "1024",
                        "--paths", "2000")
    r = table(out)
    assert float(r[1]["rms_error"]) < float(r[0]["rms_error"])
    code, _, err = call(capsys, "clark-ocone", "--case", "nope")
    assert code == 2 and "unknown case" in err


def test_spde_deterministic_and_martingale(tmp_path, capsys):
    cfg = tmp_path / "bessel.cfg"
    cfg.write_text("alpha = 1\nsigma = 0\nnt = 16\nnx = 16\npaths = 2\n")
    code, out, _ = call(capsys, "spde", "--config", str(cfg))
    corner = table(out)[-1]
    assert code == 0 and abs(float(corner["mean_series"]) - 2.2795853023360673) < 1e-10
    assert any("alpha=const:1.0" in ln for ln in header(out))

    cfg.write_text("sigma = 0.5\ny0 = 2\nnt = 8\nnx = 8\npaths = 20000\nseed = 4\n")
    code, out, _ = call(capsys, "spde", "--config", str(cfg))
    for r in table(out):
        assert abs(float(r["mean_oracle"]) - 2.0) < 3 * float(r["se_oracle"])


def test_spde_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("alpha = 1\n# ok\nsigma = cubic:2\n")
    code, _, err = call(capsys, "spde", "--config", str(cfg))
    assert code == 2 and "line 3" in err
    assert call(capsys, "spde", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_numerical_failure_exit_code(monkeypatch, capsys):
    def boom(args):
        raise NumericalFailure("quadrature budget exhausted")

    monkeypatch.setattr(cli, "cmd_wick_demo", boom)
    code, _, err = call(capsys, "wick-demo")
    assert code == 3 and "numerical failure" in err


@pytest.mark.parametrize("args", [
    ["sheet", "--d", "2", "--J", "300", "--paths", "500", "--grid", "8", "--seed", "5"],
    ["wick-demo", "--steps", "8", "32", "--seed", "2"],
    ["clark-ocone", "--case", "wick_exp_phi", "--steps", "16", "64", "--paths", "300"],
])
def test_byte_identical_reruns(tmp_path, args):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(*args, "--out", str(a)).returncode == 0
    assert run(*args, "--out", str(b)).returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_spde_byte_identical_and_stdout(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = linear_x:0.5\nsigma = product:1\nnt = 8\nnx = 8\npaths = 300\nseed = 9\n")
    first = run("spde", "--config", str(cfg))
    second = run("spde", "--config", str(cfg))
    assert first.returncode == 0 and first.stdout == second.stdout
