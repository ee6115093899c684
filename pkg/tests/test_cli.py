import json
import math

import pytest
from click.testing import CliRunner

from subgroup_expsums import scan as scan_mod
from subgroup_expsums.cli import main
from subgroup_expsums.errors import InvalidInput
from subgroup_expsums.scan import (
    CSV_HEADER,
    ResultRow,
    ScanConfig,
    build_config,
    determinism_hash,
    parse_config_file,
    read_rows,
    read_summary,
    run_scan,
    write_rows,
)


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args, env=None):
    return runner.invoke(main, [str(a) for a in args], env=env)


def test_analyze(runner):
    res = run(runner, "analyze", "--p", 7, "--index", 2, "--xi", 1, "--xi", 3)
    assert res.exit_code == 0
    out = json.loads(res.output)
    assert out["bound"]["max_coeff"] == pytest.approx(0.4714045, abs=1e-7)
    assert [s["xi"] for s in out["sums"]] == [1, 3]
    res = run(runner, "analyze", "--p", 7, "--index", 1)
    assert json.loads(res.output)["bound"]["max_coeff"] == pytest.approx(1 / 6, abs=1e-12)


def test_analyze_invalid(runner):
    res = run(runner, "analyze", "--p", 9, "--index", 2)
    assert res.exit_code == 2 and "not prime" in res.output
    assert run(runner, "analyze", "--p", 7, "--index", 4).exit_code == 2
    assert run(runner, "analyze", "--p", 7).exit_code == 2  # missing option
    assert run(runner, "--p-cap", 5, "analyze", "--p", 7, "--index", 2).exit_code == 2
    assert run(runner, "analyze", "--p", 7, "--index", 2, env={"EXPSUM_P_CAP": "5"}).exit_code == 2


def test_tolerance_overrides(runner):
    assert run(runner, "--tolerance-overrides", "parseval=1e-10", "verify", "--suite", "parseval", "--p-max", 7).exit_code == 0
    assert run(runner, "--tolerance-overrides", "bogus=1", "verify").exit_code == 2


def test_pipeline_uniform(runner):
    res = run(runner, "pipeline", "--p", 101, "--uniform", "--delta", "0.5")
    assert res.exit_code == 0
    cert = json.loads(res.output)
    assert cert["schema"] == "cert/1" and cert["pass"]


def test_pipeline_index(runner, tmp_path):
    res = run(runner, "pipeline", "--p", 101, "--index", 1, "--eta", "0.25")
    assert res.exit_code == 0 and json.loads(res.output)["status"] == "bound_holds"
    out = tmp_path / "cert.json"
    res = run(runner, "pipeline", "--p", 7, "--index", 2, "--eta", "0.1", "--output", out)
    assert res.exit_code == 0 and json.loads(out.read_text())["schema"] == "cert/1"


def test_pipeline_usage_errors(runner):
    assert run(runner, "pipeline", "--p", 101).exit_code == 2
    assert run(runner, "pipeline", "--p", 101, "--uniform", "--index", 2).exit_code == 2
    assert run(runner, "pipeline", "--p", 101, "--uniform", "--delta", "0.75").exit_code == 2


def test_pipeline_hypotheses_fail_is_reported(runner):
    res = run(runner, "pipeline", "--p", 7, "--uniform", "--delta", "0.5")
    assert res.exit_code == 0 and json.loads(res.output)["status"] == "hypotheses_fail"


def test_verify(runner):
    res = run(runner, "verify", "--suite", "parseval", "--p-max", 11)
    assert res.exit_code == 0 and "parseval: PASS" in res.output
    res = run(runner, "verify", "--suite", "all", "--p-max", 31, "--json")
    data = json.loads(res.output)
    assert res.exit_code == 0 and all(r["pass"] for r in data["results"]) and "elapsed_s" in data


def test_verify_violation_exits_1(runner, monkeypatch):
    from subgroup_expsums import verify as verify_mod

    def broken(p_max, seed, tol):
        def case():
            raise verify_mod.Violation("planted")
        yield "planted-instance", case

    monkeypatch.setitem(verify_mod._CASES, "smear", broken)
    res = run(runner, "verify", "--suite", "smear", "--p-max", 7)
    assert res.exit_code == 1 and "planted-instance" in res.output


def test_incomplete(runner):
    res = run(runner, "incomplete", "--p", 101, "--g0", 2, "--T", 20)
    assert res.exit_code == 0
    out = json.loads(res.output)
    assert out["h1_size"] == 5 and out["translate"]["margin"] > 0
    assert run(runner, "incomplete", "--p", 101, "--T", 0).exit_code == 2


def test_scan_all_indices(runner, tmp_path):
    out = tmp_path / "s.csv"
    res = run(runner, "scan", "--p-min", 7, "--p-max", 7, "--output", out)
    assert res.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER) == "p,subgroup_order,index,alpha,max_coeff,beta_emp,argmax_xi,elapsed_ms"
    rows = read_rows(out)
    assert [r.index for r in rows] == [1, 2, 3, 6]
    assert read_summary(out)["rows"] == "4"


def test_scan_empty_range(runner, tmp_path):
    out = tmp_path / "e.csv"
    assert run(runner, "scan", "--p-min", 24, "--p-max", 28, "--output", out).exit_code == 0
    assert read_rows(out) == [] and read_summary(out)["rows"] == "0"


def test_scan_index_filter(runner, tmp_path):
    out = tmp_path / "q.jsonl"
    res = run(runner, "scan", "--p-min", 7, "--p-max", 23, "--index", 2, "--format", "jsonl", "--output", out)
    assert res.exit_code == 0
    assert [r.p for r in read_rows(out)] == [7, 11, 13, 17, 19, 23]
    assert read_summary(out)["rows"] == 6


def test_scan_config_precedence(runner, tmp_path):
    cfg = tmp_path / "scan.cfg"
    out = tmp_path / "c.csv"
    cfg.write_text(f"# scan settings\np_min = 11\np_max = 13\nindex = 2\noutput = {out}\n")
    res = run(runner, "scan", "--config", cfg, "--p-max", 11)
    assert res.exit_code == 0
    assert [(r.p, r.index) for r in read_rows(out)] == [(11, 2)]


def test_scan_bad_config(runner, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("p_min 11\n")
    assert run(runner, "scan", "--config", cfg).exit_code == 2
    cfg.write_text("colour = blue\n")
    assert run(runner, "scan", "--config", cfg).exit_code == 2
    assert run(runner, "scan", "--p-min", 13, "--p-max", 11).exit_code == 2
    assert run(runner, "scan", "--parallelism", 0).exit_code == 2


def test_build_config_defaults_file_cli():
    cfg = build_config({"p_max": "31", "eta": "1/5"}, p_max=41, format=None)
    assert cfg.p_max == 41 and cfg.p_min == 3 and str(cfg.eta) == "1/5" and cfg.format == "csv"


def test_parse_config_file(tmp_path):
    f = tmp_path / "x.cfg"
    f.write_text("a = 1\n\n  # c\nb-c=2 # trailing\n")
    assert parse_config_file(f) == {"a": "1", "b_c": "2"}


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_round_trip(tmp_path, fmt):
    rows = run_scan(ScanConfig(p_min=3, p_max=41))
    path = write_rows(rows, tmp_path / f"r.{fmt}", fmt)
    assert read_rows(path) == rows


def test_rows_sorted_and_beta_consistent():
    rows = run_scan(ScanConfig(p_min=3, p_max=61, parallelism=2))
    assert [r.key() for r in rows] == sorted(r.key() for r in rows)
    for r in rows:
        assert abs(r.beta_emp - (-math.log(r.max_coeff) / math.log(r.p))) <= 1e-12


def test_determinism_hash_ignores_elapsed(tmp_path):
    rows = run_scan(ScanConfig(p_min=7, p_max=13))
    a = write_rows(rows, tmp_path / "a.csv")
    slower = [ResultRow(**{**r.__dict__, "elapsed_ms": r.elapsed_ms + 5}) for r in rows]
    b = write_rows(slower, tmp_path / "b.csv")
    assert a.read_text() != b.read_text()
    assert determinism_hash(a) == determinism_hash(b)


def test_aborted_write_leaves_nothing(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("disk full")

    monkeypatch.setattr(scan_mod, "_render", boom)
    target = tmp_path / "out.csv"
    with pytest.raises(RuntimeError):
        write_rows([], target)
    assert list(tmp_path.iterdir()) == []


def test_scan_config_validation():
    with pytest.raises(InvalidInput):
        ScanConfig(p_min=3, p_max=10**7).validate()
    with pytest.raises(InvalidInput):
        ScanConfig(format="xml").validate()
