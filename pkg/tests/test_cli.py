import csv
import json

import numpy as np
import pytest

import qsig.cli as cli
from qsig.errors import ConfigError, DataError, EmptyWindowError
from qsig.rng import stream
from qsig.simulation import Scenario, generate_dataset


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return str(path)


@pytest.fixture
def null_csv(tmp_path):
    d = generate_dataset(Scenario(1, 1, n=100), stream(2024, 7))
    rows = [[repr(float(a)), repr(float(b)), repr(float(c))] for a, b, c in zip(d.y, d.x[:, 0], d.z[:, 0])]
    return _write(tmp_path / "null.csv", ["y", "x", "z"], rows)


@pytest.fixture
def alt_csv(tmp_path):
    # z duplicates y: a gross alternative
    d = generate_dataset(Scenario(1, 1, n=100), stream(2024, 7))
    rows = [[repr(float(a)), repr(float(b)), repr(float(a))] for a, b in zip(d.y, d.x[:, 0])]
    return _write(tmp_path / "alt.csv", ["y", "x", "z"], rows)


def _run_json(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 else None), out


def test_load_small_file(tmp_path):
    p = _write(tmp_path / "a.csv", ["y", "x", "z"], [[1, 0.1, 5], [2, 0.2, 6], [3, 0.3, 7]])
    with pytest.warns(UserWarning):
        d = cli.load_csv(p, "y", ["x"], ["z"])
    assert (d.n, d.d, d.q) == (3, 1, 1)
    assert d.y.tolist() == [1.0, 2.0, 3.0]


def test_load_two_z_columns(tmp_path):
    rows = [[i, i / 30, i % 7, i % 5, "ignored"] for i in range(30)]
    p = _write(tmp_path / "b.csv", ["y", "x", "z1", "z2", "note"], rows)
    d = cli.load_csv(p, "y", ["x"], ["z1", "z2"])
    assert d.q == 2 and d.n == 30
    assert d.z[8].tolist() == [1.0, 3.0]


def test_load_errors(tmp_path):
    p = _write(tmp_path / "c.csv", ["y", "x", "z"], [[1, 0.1, 5], [2, "", 6], [3, 0.3, 7]])
    with pytest.raises(DataError, match=r"line 3, column 'x'"):
        cli.load_csv(p, "y", ["x"], ["z"])
    with pytest.raises(ConfigError, match="'w'"):
        cli.load_csv(p, "y", ["x"], ["w"])
    with pytest.raises(ConfigError):
        cli.load_csv(str(tmp_path / "missing.csv"), "y", ["x"], ["z"])
    q = _write(tmp_path / "d.csv", ["y", "x", "z"], [[1, 0.1, "nan"]] * 12)
    with pytest.raises(DataError, match="non-finite"):
        cli.load_csv(q, "y", ["x"], ["z"])


def test_null_golden(capsys, null_csv):
    code, d, _ = _run_json(capsys, ["test", "--data", null_csv, "--y-col", "y", "--x-cols", "x", "--z-cols", "z", "--seed", "5"])
    assert code == 0
    assert d["reject"] is False
    assert d["k_stat"] == pytest.approx(0.037272, abs=1e-12)
    assert d["boot_quantile"] == pytest.approx(0.06832590179739839, rel=1e-9)
    assert d["p_value"] == pytest.approx(225 / 301, abs=1e-15)
    assert d["tau_hat"] == 0.46
    for key in ("k_stat", "boot_quantile", "p_value", "reject", "tau_hat", "bandwidths", "argmax", "n_reps", "seed"):
        assert key in d
    assert d["n_reps"] == 300 and d["seed"] == 5


def test_alternative_golden(capsys, alt_csv):
    code, d, _ = _run_json(capsys, ["test", "--data", alt_csv, "--y-col", "y", "--x-cols", "x", "--z-cols", "z", "--seed", "5"])
    assert code == 0
    assert d["reject"] is True
    assert d["p_value"] == pytest.approx(1 / 301, abs=1e-15)
    assert d["k_stat"] == pytest.approx(0.120896, abs=1e-12)


def test_json_roundtrip_and_repeatability(capsys, null_csv):
    argv = ["test", "--data", null_csv, "--y-col", "y", "--x-cols", "x", "--z-cols", "z", "--bootstrap", "50", "--trim-boundary"]
    _, d1, out1 = _run_json(capsys, argv)
    _, _, out2 = _run_json(capsys, argv)
    assert out1 == out2
    assert json.loads(json.dumps(d1)) == d1
    assert "k_original" in d1


def test_table_format(capsys, null_csv):
    code = cli.main(["test", "--data", null_csv, "--y-col", "y", "--x-cols", "x", "--z-cols", "z", "--bootstrap", "40", "--format", "table"])
    out = capsys.readouterr().out
    assert code == 0 and "p-value" in out and "bandwidths" in out


@pytest.mark.parametrize(
    "extra,code,msg",
    [
        (["--alpha", "1.5"], 2, "alpha must be in (0,1)"),
        (["--tau", "0"], 2, "tau must be in (0,1)"),
        (["--bootstrap", "0"], 2, "bootstrap"),
        (["--bandwidth-h", "-1"], 2, "bandwidth"),
    ],
)
def test_config_exit_codes(capsys, null_csv, extra, code, msg):
    rc = cli.main(["test", "--data", null_csv, "--y-col", "y", "--x-cols", "x", "--z-cols", "z", *extra])
    assert rc == code
    assert msg in capsys.readouterr().err


def test_missing_column_and_file(capsys, null_csv, tmp_path):
    assert cli.main(["test", "--data", null_csv, "--y-col", "y", "--x-cols", "x", "--z-cols", "q"]) == 2
    assert cli.main(["test", "--data", str(tmp_path / "none.csv"), "--y-col", "y", "--x-cols", "x", "--z-cols", "z"]) == 2
    assert cli.main(["test", "--data", null_csv, "--y-col", "y", "--x-cols", "x", "--z-cols", "x"]) == 2


def test_data_exit_codes(capsys, tmp_path):
    bad = _write(tmp_path / "bad.csv", ["y", "x", "z"], [[1, 2, "abc"]] * 12)
    assert cli.main(["test", "--data", bad, "--y-col", "y", "--x-cols", "x", "--z-cols", "z"]) == 3
    assert "line 2, column 'z'" in capsys.readouterr().err
    small = _write(tmp_path / "small.csv", ["y", "x", "z"], [[i, i, i] for i in range(5)])
    with pytest.warns(UserWarning):
        assert cli.main(["test", "--data", small, "--y-col", "y", "--x-cols", "x", "--z-cols", "z"]) == 3
    flat = _write(tmp_path / "flat.csv", ["y", "x", "z"], [[1.0, i, i] for i in range(25)])
    assert cli.main(["test", "--data", flat, "--y-col", "y", "--x-cols", "x", "--z-cols", "z"]) == 3


def test_numeric_exit_code(capsys, null_csv, monkeypatch):
    def boom(*args, **kwargs):
        raise EmptyWindowError("no observations in the kernel window")

    monkeypatch.setattr(cli, "run_test", boom)
    assert cli.main(["test", "--data", null_csv, "--y-col", "y", "--x-cols", "x", "--z-cols", "z"]) == 4
    assert "kernel window" in capsys.readouterr().err


def test_simulate_byte_identical(capsys):
    argv = ["simulate", "--scenario", "1,2", "--scenario", "q2", "--n", "30", "--runs", "5", "--bootstrap", "20", "--seed", "9"]
    assert cli.main(argv + ["--workers", "1"]) == 0
    one = capsys.readouterr().out
    assert cli.main(argv + ["--workers", "8"]) == 0
    eight = capsys.readouterr().out
    assert one == eight
    d = json.loads(one)
    assert {r["scenario"] for r in d["rows"]} == {"(1,2)", "q2"}
    assert json.loads(json.dumps(d)) == d


def test_simulate_errors(capsys):
    assert cli.main(["simulate", "--scenario", "9,9", "--runs", "1"]) == 2
    assert cli.main(["simulate", "--scenario", "1,2", "--alpha", "1.5", "--runs", "1"]) == 2


def test_simulate_table(capsys):
    assert cli.main(["simulate", "--scenario", "1,2", "--n", "20", "--runs", "3", "--bootstrap", "10", "--format", "table"]) == 0
    assert "(1,2)" in capsys.readouterr().out


def test_limit(capsys):
    code, d, out = _run_json(capsys, ["limit", "--tau", "0.5", "--paths", "1000", "--grid-m", "16"])
    assert code == 0
    q = list(d["quantiles"].values())
    assert all(v >= 0 for v in q) and q == sorted(q)
    _, _, again = _run_json(capsys, ["limit", "--tau", "0.5", "--paths", "1000", "--grid-m", "16"])
    assert out == again
    assert cli.main(["limit", "--tau", "2"]) == 2


def test_run_config_validation():
    cfg = cli.RunConfig(data="x", y_col="y", x_cols=["x"], z_cols=["z"], alpha=1.5)
    with pytest.raises(ConfigError, match=r"alpha must be in \(0,1\)"):
        cfg.validate()
    with pytest.raises(ConfigError):
        cli.RunConfig(data="x", y_col="y", x_cols=["x"], z_cols=[]).validate()
    with pytest.raises(ConfigError):
        cli.RunConfig(data="x", y_col="y", x_cols=["x"], z_cols=["z"], seed=-3).validate()
