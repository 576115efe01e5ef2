import csv
import json
from fractions import Fraction

import pytest

from sexratio import cli
from sexratio.exact import pmf_girls_p_boys_more


def run(argv, capsys=None):
    rc = cli.main([str(a) for a in argv])
    out = err = ""
    if capsys is not None:
        out, err = capsys.readouterr()
    return rc, out, err


def rows(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def data_hashes(d):
    return json.loads((d / "manifest.json").read_text())["files"]


def test_simulate_writes_series_and_manifest(tmp_path, capsys):
    out = tmp_path / "sim"
    rc, _, _ = run(["simulate", "--strategy", "pboysmore:1", "--n", 2000, "--seed", 42,
                    "--out", out], capsys)
    assert rc == 0
    series = rows(out / "ratio_series.csv")
    body = json.loads((out / "result.json").read_text())
    # families censored at the cap are left out of the ratios
    assert len(series) == 2000 - body["result"]["censored"]
    assert list(series[0]) == ["n", "R", "F", "barR", "barF"]
    last = series[-1]
    R, F = float(last["R"]), float(last["F"])
    assert abs(F - R / (1 + R)) < 1e-12
    manifest = cli.verify_run_dir(out)
    assert manifest["config"]["master_seed"] == 42
    assert manifest["schema"] == cli.MANIFEST_SCHEMA
    assert body["schema"] == cli.RESULT_SCHEMA and body["claims"]


def test_rerun_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(["simulate", "--strategy", "sqrt:1", "--n", 500, "--seed", 7, "--families",
                    "--out", d], capsys)[0] == 0
    ha, hb = data_hashes(a), data_hashes(b)
    assert ha == hb
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma["content_hash"] == mb["content_hash"]


def test_different_seed_changes_data(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["simulate", "--n", 300, "--seed", 1, "--out", a], capsys)
    run(["simulate", "--n", 300, "--seed", 2, "--out", b], capsys)
    assert data_hashes(a)["ratio_series.csv"] != data_hashes(b)["ratio_series.csv"]


def test_exact_pmf_csv(tmp_path, capsys):
    out = tmp_path / "pmf"
    assert run(["exact", "--pmf", "pboysmore:1", "--jmax", 20, "--exact", "--out", out], capsys)[0] == 0
    table = rows(out / "pmf.csv")
    ref = pmf_girls_p_boys_more(1, 20, exact=True).masses
    assert [int(r["j"]) for r in table] == list(range(21))
    for r, m in zip(table, ref):
        assert Fraction(r["mass_exact"]) == m
        assert float(r["mass"]) == pytest.approx(float(m), rel=1e-14)
    # mass at j = 0 is 1/2 for the one-boy-more rule
    assert Fraction(table[0]["mass_exact"]) == Fraction(1, 2)


def test_kappa_grid_and_single(tmp_path, capsys):
    out = tmp_path / "k"
    assert run(["kappa", "--c", 1.0, "--grid", "0.5 1.5 0.5", "--out", out], capsys)[0] == 0
    grid = rows(out / "kappa_grid.csv")
    ks = [float(r["kappa"]) for r in grid]
    assert len(ks) == 3 and ks[0] > ks[1] > ks[2]
    body = json.loads((out / "result.json").read_text())
    assert all(c["pass"] for c in body["claims"])


def test_ldp_and_chi(tmp_path, capsys):
    assert run(["ldp", "--ngrid", "16 32 64", "--out", tmp_path / "ldp"], capsys)[0] == 0
    assert len(rows(tmp_path / "ldp" / "rates.csv")) == 3
    assert run(["chi", "--terms", 500, "--out", tmp_path / "chi"], capsys)[0] == 0
    body = json.loads((tmp_path / "chi" / "result.json").read_text())
    assert json.dumps(body["result"])


def test_limitcheck_laplace(tmp_path, capsys):
    out = tmp_path / "lap"
    assert run(["limitcheck", "--law", "laplace", "--s", 1.0, "--out", out], capsys)[0] == 0
    gaps = [float(r["gap"]) for r in rows(out / "laplace_gaps.csv")]
    assert gaps[0] > gaps[1] > gaps[2]


def test_env_var_sets_default_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "base"))
    assert run(["exact", "--jmax", 5], capsys)[0] == 0
    assert (tmp_path / "base" / "exact" / "manifest.json").is_file()


def test_config_file_and_flag_precedence(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# small run\nn = 300\nseed = 5\nstrategy = pboys:2\n", encoding="utf-8")
    out = tmp_path / "c"
    assert run(["--config", conf, "simulate", "--out", out], capsys)[0] == 0
    cfg = json.loads((out / "manifest.json").read_text())["config"]
    assert (cfg["n"], cfg["master_seed"], cfg["strategy"]) == (300, 5, "pboys:2")
    # a flag beats the file
    assert run(["--config", conf, "simulate", "--seed", 9, "--out", out], capsys)[0] == 0
    cfg = json.loads((out / "manifest.json").read_text())["config"]
    assert (cfg["n"], cfg["master_seed"]) == (300, 9)


def test_config_unknown_key(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("colour = blue\n", encoding="utf-8")
    rc, _, err = run(["--config", conf, "simulate", "--out", tmp_path / "x"], capsys)
    assert rc == 2
    assert json.loads(err)["error"] == "UsageError"


@pytest.mark.parametrize("argv", [
    ["simulate", "--strategy", "pboysmore:0", "--n", 10],
    ["simulate", "--strategy", "bogus"],
    ["simulate", "--n", "1.5"],
    ["exact", "--jmax", "-3"],
    ["frobnicate"],
])
def test_bad_parameters_exit_2_with_json(argv, tmp_path, capsys):
    rc, _, err = run(argv + ["--out", tmp_path / "x"] if argv[0] != "frobnicate" else argv, capsys)
    assert rc == 2
    doc = json.loads(err.strip().splitlines()[-1])
    assert doc["schema"] == "sexratio/error@1" and doc["exit_code"] == 2


def test_report_over_runs(tmp_path, capsys):
    root = tmp_path / "res"
    run(["exact", "--jmax", 10, "--out", root / "exact"], capsys)
    run(["ldp", "--ngrid", "16 32", "--out", root / "ldp"], capsys)
    rc, out, _ = run(["report", root], capsys)
    assert rc == 0
    assert "== exact (exact)" in out and "== ldp (ldp)" in out
    assert "PASS" in out
    assert out.strip().splitlines()[-1].endswith("in 2 run(s)")


def test_report_detects_corruption(tmp_path, capsys):
    d = tmp_path / "res" / "exact"
    run(["exact", "--jmax", 10, "--out", d], capsys)
    with open(d / "pmf.csv", "a", encoding="utf-8") as fh:
        fh.write("99,0.0,1.0\n")
    rc, _, err = run(["report", tmp_path / "res"], capsys)
    assert rc == 4
    assert json.loads(err)["error"] == "IntegrityError"


def test_report_missing_manifest(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert run(["report", tmp_path / "empty"], capsys)[0] == 4


def test_verify_all_reduced(tmp_path, capsys):
    out = tmp_path / "va"
    rc, text, _ = run(["verify-all", "--budget", 2, "--only", 5, "--out", out], capsys)
    assert rc == 0
    assert "criterion  5 PASS" in text
    assert "plan=reduced" in text
    body = json.loads((out / "result.json").read_text())["result"]
    assert body["reduced"] is True and body["plan"] == "reduced"
    assert rows(out / "acceptance.csv")


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--help"])
    text = capsys.readouterr().out
    for name in ("simulate", "exact", "limitcheck", "kappa", "ldp", "chi", "report", "verify-all"):
        assert name in text


def test_quality_error_seals_partial_run(tmp_path, capsys):
    out = tmp_path / "q"
    # light tail: too few families survive past the fit window
    rc, _, err = run(["kappa", "--c", 0.05, "--mc", "--families", 1000, "--out", out], capsys)
    assert rc == 3
    doc = json.loads(err)
    assert doc["error"] == "QualityError"
    manifest = cli.verify_run_dir(out)
    assert manifest["partial"] is True
    assert json.loads((out / "result.json").read_text())["partial"] is True
