import csv
import io
import json
import math
import subprocess
import sys

import pytest

from birkhoff_spectra import cli
from birkhoff_spectra.config import ConfigError, build_map, build_potentials, validate_config

LOG4 = math.log(4)


def _write(tmp_path, name, cfg):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def _table(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ") and "nats" in lines[0]
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


@pytest.fixture
def base2(tmp_path):
    return _write(tmp_path, "base2.json", {"schema": "1", "family": "base_n", "n": 2})


@pytest.fixture
def flambda(tmp_path):
    return _write(tmp_path, "flambda.json", {"schema": "1", "family": "f_lambda", "lambda": 0.25})


def test_spectrum_example(base2, capsys):
    assert cli.run(["spectrum", "--config", base2, "--gamma", "0.7,0.3"]) == 0
    rows = _table(capsys.readouterr().out)
    assert len(rows) == 1
    assert float(rows[0]["value"]) == pytest.approx(0.88129, abs=1e-5)
    assert rows[0]["membership"] == "Z0"
    for col in ("gamma", "value", "mass", "constraint_residual", "dinkelbach_residual", "k", "flags"):
        assert col in rows[0]


def test_entropy_example(flambda, capsys):
    assert cli.run(["entropy", "--config", flambda, "--k", "40", "--n-max", "14"]) == 0
    rows = _table(capsys.readouterr().out)
    p = [float(r["p_n"]) for r in rows]
    assert all(b > a for a, b in zip(p, p[1:]))
    assert max(p) <= LOG4
    assert float(rows[0]["value"]) <= LOG4


def test_transient_dim_example(capsys):
    assert cli.run(["transient-dim", "--lambda", "0.6"]) == 0
    rows = _table(capsys.readouterr().out)
    assert float(rows[0]["value"]) == 1.0


def test_lambda_override(flambda, capsys):
    assert cli.run(["transient-dim", "--config", flambda, "--lambda", "0.5"]) == 0
    assert float(_table(capsys.readouterr().out)[0]["value"]) == pytest.approx(1.0)


@pytest.mark.parametrize("cfg,path", [
    ({"schema": "1", "family": "base_n", "n": 1}, "$.n"),
    ({"schema": "2", "family": "gauss"}, "$.schema"),
    ({"schema": "1", "family": "tent"}, "$.family"),
    ({"schema": "1", "family": "f_lambda", "lambda": 1.5}, "$.lambda"),
    ({"schema": "1", "family": "gauss", "potentials": [{"indicator": 0}]}, "$.potentials[0]"),
    ({"schema": "1", "family": "gauss", "tolerances": {"t_tol": -1}}, "$.tolerances.t_tol"),
    ({"schema": "1", "family": "gauss", "kk": 3}, "$"),
    ({"schema": "1", "family": "base_n"}, "$"),
])
def test_schema_violation_exit_2(tmp_path, capsys, cfg, path):
    p = _write(tmp_path, "bad.json", cfg)
    assert cli.run(["entropy", "--config", p]) == 2
    err = capsys.readouterr().err
    assert f"config error: {path}:" in err


def test_invalid_json_and_missing_config(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert cli.run(["entropy", "--config", str(p)]) == 2
    assert cli.run(["entropy"]) == 2
    assert cli.run(["no-such-command"]) == 2


def test_not_in_z_is_flagged_not_fatal(base2, capsys):
    assert cli.run(["spectrum", "--config", base2, "--gamma", "0.7,0.7"]) == 0
    row = _table(capsys.readouterr().out)[0]
    assert row["value"] == "nan" and "not_in_Z" in row["flags"]


def test_solver_failure_exit_1(base2, monkeypatch, capsys):
    def boom(*a, **k):
        raise RuntimeError("primal solver failed")

    monkeypatch.setattr(cli, "alpha3", boom)
    assert cli.run(["spectrum", "--config", base2, "--gamma", "0.5,0.5"]) == 1
    assert "solver failure" in capsys.readouterr().err


def test_outputs_and_json_trace(tmp_path, flambda, capsys):
    grid = _write(tmp_path, "grid.json", {"schema": "1", "family": "f_lambda", "lambda": 0.25, "k": 10,
                                          "potentials": [{"indicator": 1}], "grid": [[0.3], [0.6]]})
    prefix = str(tmp_path / "out" / "run")
    assert cli.run(["spectrum", "--config", grid, "--out", prefix]) == 0
    rows = _table(open(prefix + ".csv").read())
    report = json.load(open(prefix + ".json"))
    assert report["method"] == "alpha4" and report["units"] == "nats"
    for row, res in zip(rows, report["results"]):
        assert float(row["value"]) == res["value"]
        assert res["k"] == 10 and res["report"]["k"] == 10
        assert "dinkelbach_residual" in res and "trace" in res["report"]
        assert res["report"]["trace"]
    plot = [l.split() for l in open(prefix + ".dat") if not l.startswith("#")]
    assert [len(p) for p in plot] == [2, 2]
    assert [float(p[0]) for p in plot] == [0.3, 0.6]


def test_determinism_across_runs_and_threads(tmp_path, monkeypatch, capsys):
    grid = _write(tmp_path, "grid.json", {"schema": "1", "family": "base_n", "n": 3,
                                          "grid": [[0.2, 0.3, 0.5], [0.1, 0.1, 0.8], [0.5, 0.5, 0.0]]})
    outs = []
    for threads in ("1", "3", "3"):
        monkeypatch.setenv("BIRKHOFF_THREADS", threads)
        prefix = str(tmp_path / f"t{len(outs)}")
        assert cli.run(["spectrum", "--config", grid, "--out", prefix]) == 0
        outs.append((open(prefix + ".csv", "rb").read(), open(prefix + ".json", "rb").read()))
    assert outs[0] == outs[1] == outs[2]
    rows = _table(outs[0][0].decode())
    assert [r["gamma"] for r in rows] == ["0.2|0.3|0.5", "0.1|0.1|0.8", "0.5|0.5|0.0"]


def test_bad_thread_env(base2, monkeypatch, capsys):
    monkeypatch.setenv("BIRKHOFF_THREADS", "many")
    assert cli.run(["spectrum", "--config", base2, "--gamma", "0.5,0.5", "--gamma", "0.2,0.8"]) == 2


def test_suspension_check_seeded(tmp_path, capsys):
    cfg = _write(tmp_path, "b3.json", {"schema": "1", "family": "base_n", "n": 3, "seed": 5})
    assert cli.run(["suspension-check", "--config", cfg, "--m", "1,2"]) == 0
    first = capsys.readouterr().out
    assert cli.run(["suspension-check", "--config", cfg, "--m", "1,2"]) == 0
    assert capsys.readouterr().out == first
    rows = _table(first)
    assert all(float(r["abramov_max_error"]) <= 1e-9 for r in rows)
    assert float(rows[0]["log_perron_root"]) == pytest.approx(math.log(3) / 2)


def test_suspension_roof_error_flagged(tmp_path, capsys):
    cfg = _write(tmp_path, "g.json", {"schema": "1", "family": "gauss"})
    assert cli.run(["suspension-check", "--config", cfg, "--m", "1", "--n-measures", "2"]) == 0
    assert "roof-error" in _table(capsys.readouterr().out)[0]["flags"]


def test_delta_inf_and_pressure(tmp_path, flambda, base2, capsys):
    assert cli.run(["delta-inf", "--config", flambda, "--K", "20", "--n-max", "12", "--M", "1,2",
                    "--q", "1,2"]) == 0
    rows = _table(capsys.readouterr().out)
    assert [r["kind"] for r in rows] == ["counting"] * 4 + ["certificate"]
    assert float(rows[-1]["value"]) <= LOG4
    pot = _write(tmp_path, "pot.json", {"schema": "1", "family": "base_n", "n": 2,
                                        "potential": {"indicator": 1, "scale": 0.5}})
    assert cli.run(["pressure", "--config", pot, "--n-max", "6"]) == 0
    rows = _table(capsys.readouterr().out)
    assert float(rows[0]["value"]) == pytest.approx(math.log(math.exp(0.5) + 1))


def test_freq_spectrum_finite(tmp_path, capsys):
    cfg = _write(tmp_path, "b3.json", {"schema": "1", "family": "base_n", "n": 3})
    assert cli.run(["freq-spectrum", "--config", cfg, "--gamma", "0.3333333333333333,0.3333333333333333,"
                                                                  "0.3333333333333334"]) == 0
    assert float(_table(capsys.readouterr().out)[0]["value"]) == pytest.approx(1.0, abs=1e-12)


def test_s_inf_finite_family(flambda, capsys):
    assert cli.run(["s-inf", "--config", flambda]) == 0
    assert float(_table(capsys.readouterr().out)[0]["value"]) == 0.0


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "birkhoff_spectra", "transient-dim", "--lambda", "0.25"],
                         capture_output=True, text=True, check=True).stdout
    assert float(_table(out)[0]["value"]) == pytest.approx(math.log(4) / math.log(16 / 3))


def test_config_helpers():
    cfg = validate_config({"schema": "1", "family": "f_lambda", "lambda": 0.3,
                           "potentials": [{"order": 2, "table": {"1,2": 1.5}, "default": -1.0}]})
    m = build_map(cfg)
    (pot,) = build_potentials(m, cfg)
    assert pot((1, 2)) == 1.5 and pot((2, 2)) == -1.0
    with pytest.raises(ConfigError):
        build_potentials(m, {"schema": "1", "family": "gauss",
                             "potentials": [{"order": 2, "table": {"1": 0.0}}]})
