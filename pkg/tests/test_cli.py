import csv
import io

import numpy as np
import pytest

from magnuskit import cli
from magnuskit.bench import (
    CSV_HEADER,
    BenchmarkRecord,
    order_table,
    parse_config,
    records_to_csv,
    run_benchmark,
    run_checks,
    run_eigen,
    worker_count,
)
from magnuskit.errors import ConfigError, MagnusError

RZ = """
# efficiency sweep
problem = rosen-zener
gamma = 10
xi = 0.3      # detuning
methods = M2, M4GL, M6GL, CF4, RK4, RK6
steps = 150, 300
"""


def rows(text):
    return list(csv.reader(io.StringIO(text)))


# -- config ---------------------------------------------------------------------------


def test_parse_config():
    cfg = parse_config(RZ + "h = 1/20\n")
    assert cfg["problem"] == "rosen-zener"
    assert cfg["methods"] == ["M2", "M4GL", "M6GL", "CF4", "RK4", "RK6"]
    assert cfg["steps"] == [150, 300]
    assert cfg["xi"] == 0.3 and cfg["h"] == 0.05
    assert cfg["seed"] == 42


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="colour"):
        parse_config("problem = example1\ncolour = blue\n")


def test_bad_lines():
    with pytest.raises(ConfigError):
        parse_config("problem example1\n")
    with pytest.raises(ConfigError, match="gamma"):
        parse_config("gamma = lots\n")


def test_empty_methods():
    with pytest.raises(ConfigError):
        run_benchmark(parse_config("problem = example1\nsteps = 4\nmethods = \n"))
    with pytest.raises(ConfigError):
        run_benchmark(parse_config("problem = example1\nsteps = 4\n"))


def test_missing_steps_and_problem():
    with pytest.raises(ConfigError):
        run_benchmark(parse_config("problem = example1\nmethods = M2\n"))
    with pytest.raises(ConfigError):
        run_benchmark(parse_config("methods = M2\nsteps = 4\n"))
    with pytest.raises(ConfigError):
        run_benchmark(parse_config("problem = kepler\nmethods = M2\nsteps = 4\n"))
    with pytest.raises(MagnusError):
        run_benchmark(parse_config("problem = example1\nmethods = M9\nsteps = 4\n"))


# -- records ----------------------------------------------------------------------------


def test_record_invariants():
    with pytest.raises(MagnusError):
        BenchmarkRecord("p", "m", 0.1, 1, 1, 1, -1.0, 0.0, 0.0, 1)
    with pytest.raises(MagnusError):
        BenchmarkRecord("p", "m", 0.1, 1, -1, 1, 1.0, 0.0, 0.0, 1)


def test_csv_schema():
    rec = BenchmarkRecord("p", "m", 0.1, 10, 20, 10, 1 / 3, 0.0, 1e-17, 5)
    out = rows(records_to_csv([rec]))
    assert ",".join(out[0]) == "problem,method,h,steps,a_evals,exps,error,unitarity_defect,det_defect,wall_ns"
    assert out[0] == CSV_HEADER
    assert out[1][2] == "0.10000000000000001"
    assert out[1][6] == format(1 / 3, ".17g")


def test_benchmark_rows_and_counts():
    recs = run_benchmark(parse_config(RZ))
    assert [(r.method, r.steps) for r in recs] == [(m, n) for m in ["M2", "M4GL", "M6GL", "CF4", "RK4", "RK6"] for n in (150, 300)]
    per_step = {"M2": 1, "M4GL": 2, "M6GL": 3, "CF4": 2}
    for r in recs:
        if r.method in per_step:
            assert r.a_evals == per_step[r.method] * r.steps
        else:
            assert r.a_evals == {"RK4": 2, "RK6": 3}[r.method] * r.steps + 1
        assert r.error >= 0
    err = {(r.method, r.steps): r.error for r in recs}
    for n in (150, 300):
        assert err[("M4GL", n)] < err[("RK4", n)]
        assert err[("M6GL", n)] < err[("RK6", n)]


def test_skip_with_reason():
    notes = []
    recs = run_benchmark(parse_config("problem = double-bracket\nmethods = NLM2, ISO2\nsteps = 20\n"), log=notes.append)
    assert [r.method for r in recs] == ["ISO2"]
    assert notes and "NLM2" in notes[0] and "skipped" in notes[0]


def test_skew_time_series_mp68_below_mp6():
    cfg = parse_config(
        "problem = skew-b\nN = 10\ntf = 10\nh = 1/20\nmethods = M6, MP6, MP68, CAY6, RK6\ncheckpoints = 50, 100, 150\n"
    )
    recs = run_benchmark(cfg)
    series = {}
    for r in recs:
        series.setdefault(r.method, []).append((r.steps, r.error))
    assert [k for k, _ in series["MP6"]] == [50, 100, 150, 200]
    for (_, e6), (_, e8) in zip(series["MP6"], series["MP68"]):
        assert e8 < e6
    assert all(r.unitarity_defect < 1e-12 for r in recs if r.method != "RK6")


def test_duffing_rows():
    recs = run_benchmark(parse_config("problem = duffing\nmethods = S2, MN64\nsteps = 100\n"))
    assert [r.a_evals for r in recs] == [100, 600]
    assert all(r.unitarity_defect < 1e-8 for r in recs)


def test_sl_well_needs_eigen_command():
    with pytest.raises(ConfigError):
        run_benchmark(parse_config("problem = sl-well\nmethods = M4\nsteps = 4\n"))


def test_threads_env(monkeypatch):
    monkeypatch.setenv("MAGNUSKIT_THREADS", "1")
    assert worker_count() == 1
    monkeypatch.setenv("MAGNUSKIT_THREADS", "many")
    with pytest.raises(ConfigError):
        worker_count()


def test_thread_count_does_not_change_output(monkeypatch):
    cfg = parse_config("problem = bch-pair\nmethods = M4GL, M6GL, RK4\nsteps = 4, 8, 16\n")
    outs = []
    for k in ("1", "4"):
        monkeypatch.setenv("MAGNUSKIT_THREADS", k)
        outs.append([r[:-1] for r in rows(records_to_csv(run_benchmark(cfg)))])
    assert outs[0] == outs[1]


# -- eigen / order / check ------------------------------------------------------------------------


def test_run_eigen_free():
    table, slope = run_eigen(parse_config("problem = sl-well\npotential = zero\nN = 200\nlambda_max = 30\n"))
    assert [r[0] for r in table] == [1, 2, 3, 4, 5]
    np.testing.assert_allclose([r[1] for r in table], [1, 4, 9, 16, 25], rtol=1e-6)
    assert all(r[2] < 1e-8 for r in table)
    assert slope is None  # errors at roundoff level carry no slope


def test_run_eigen_missing_potential():
    with pytest.raises(MagnusError, match="mathieu"):
        run_eigen(parse_config("problem = sl-well\npotential = cubic\n"))
    with pytest.raises(ConfigError):
        run_eigen(parse_config("problem = example1\n"))


def test_order_table():
    out = dict(order_table(parse_config("problem = example1\nmethods = M2, M4GL, M6GL\nsteps = 4, 8, 16\n")))
    assert out["M2"] == pytest.approx(2, abs=0.2)
    assert out["M4GL"] == pytest.approx(4, abs=0.2)
    assert out["M6GL"] == pytest.approx(6, abs=0.3)
    with pytest.raises(ConfigError):
        order_table(parse_config("problem = example1\nmethods = M2\nsteps = 4, 8\n"))


def test_checks_pass():
    res = run_checks()
    assert len(res) >= 10
    assert all(ok for _, ok, _, _ in res)


# -- main ------------------------------------------------------------------------------------------


def test_main_bench_to_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("problem = example1\nmethods = M4GL\nsteps = 4, 8\n")
    out = tmp_path / "o.csv"
    assert cli.main(["bench", "--config", str(cfg), "--out", str(out)]) == 0
    lines = rows(out.read_text())
    assert lines[0] == CSV_HEADER and len(lines) == 3


def test_main_eigen_and_order(tmp_path, capsys):
    cfg = tmp_path / "e.cfg"
    cfg.write_text("problem = sl-well\npotential = square\nN = 100\nlambda_max = 20\n")
    assert cli.main(["eigen", "--config", str(cfg)]) == 0
    text = capsys.readouterr().out
    assert text.startswith("n,lambda,residual,exact,error")
    cfg.write_text("problem = example1\nmethods = M4GL\nsteps = 4, 8, 16\n")
    assert cli.main(["order", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.startswith("method,slope\nM4GL,")


def test_main_check(capsys):
    assert cli.main(["check"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "checks passed" in out


def test_main_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("wibble = 3\n")
    assert cli.main(["bench", "--config", str(cfg)]) == 2
    assert "wibble" in capsys.readouterr().err
    assert cli.main(["bench", "--config", str(tmp_path / "missing.cfg")]) == 1


def test_main_list(capsys):
    assert cli.main(["list"]) == 0
    assert "MN64" in capsys.readouterr().out
