import csv
import io
import json
import math

import pytest

from suplab import bounds, cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


# ---- formatting

def test_format_value():
    assert cli.format_value(0.1) == "0.1"
    assert cli.format_value(1 / 3) == repr(1 / 3)
    assert cli.format_value(1e-300) == "1e-300"
    assert cli.format_value(True) == "true"
    assert cli.format_value(None) == ""
    assert cli.format_value(3) == "3"


def test_parse_grid():
    assert cli.parse_grid("1,2.5") == [1.0, 2.5]
    assert cli.parse_grid("log:0:2:3") == [1.0, 10.0, 100.0]
    assert cli.parse_grid("log:0:1:5", integer=True) == [1, 2, 3, 6, 10]
    for bad in ("", "a,b", "log:1:2", "log:1:2:0"):
        with pytest.raises(cli.UsageError):
            cli.parse_grid(bad)


# ---- bounds

def test_bounds_single_cell(capsys):
    code, out, _ = run(capsys, "bounds", "--n-grid", "100", "--sigma2-grid", "0.01")
    assert code == 0
    lines = out.split("\n")
    assert lines[0] == "n,sigma2,regime,u,u_bar,hat_u,two_sqrtn_sigma2,bound_at_u,bennett_at_u"
    assert len(out.strip().split("\n")) == 2 and out.endswith("\n") and "\r" not in out
    (row,) = rows_of(out)
    assert float(row["u"]) == bounds.threshold_u(100, 0.01)


def test_bounds_grid_consistency(capsys):
    code, out, _ = run(capsys, "bounds", "--n-grid", "log:0.5:9:12", "--sigma2-grid", "log:-300:0:25")
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 12 * 25
    # n-major order
    ns = [int(r["n"]) for r in rows]
    assert ns == sorted(ns)
    for r in rows:
        n, s2 = int(r["n"]), float(r["sigma2"])
        assert r["regime"] == str(bounds.classify_regime(n, s2))
        if r["regime"] in "BC":
            assert float(r["u"]) >= float(r["two_sqrtn_sigma2"])


@pytest.mark.parametrize(
    "argv",
    [
        ("bounds", "--n-grid", "x"),
        ("bounds", "--sigma2-grid", "2.0"),
        ("bounds", "--n-grid", "1"),
        ("bounds", "--constants", "C2=1.5"),
        ("bounds", "--constants", "Q=1"),
        ("bounds", "--seed", "3"),
        ("nonsense",),
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


# ---- simulate

SIM = {"n": 20, "sigma2": 0.1, "levels": ["u", "u_bar", "2*sqrt(n)*sigma2", 0.5], "reps": 400, "seed": 1}


def test_simulate_smoke_and_manifest(capsys, tmp_path):
    cfg = write_config(tmp_path, SIM)
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "simulate", "--config", cfg, "--out", str(out))
    assert code == 0
    rows = rows_of(out.read_text())
    assert list(rows[0]) == [
        "v", "hits", "reps", "p_hat", "ci_low", "ci_high", "bound_thm1", "bound_ext", "bound_bennett",
        "applicable_thm1", "applicable_ext", "dominance",
    ]
    assert len(rows) == 4
    manifest = json.loads((tmp_path / "r.csv.manifest.json").read_text())
    assert manifest["command"] == "simulate" and manifest["master_seed"] == 1
    assert manifest["config"]["constants"] == bounds.DEFAULT_PARAMS.as_dict()
    assert manifest["config"]["L"] == 1.0
    assert manifest["resolved"]["levels"]["u"] == bounds.threshold_u(20, 0.1)
    assert {float(r["v"]) for r in rows} >= {bounds.threshold_u(20, 0.1)}
    assert "started" in manifest and "finished" in manifest and manifest["version"]


def test_simulate_is_deterministic_across_workers_and_manifest(capsys, tmp_path):
    cfg = write_config(tmp_path, SIM)
    a, b, c = (tmp_path / f"{x}.csv" for x in "abc")
    assert run(capsys, "simulate", "--config", cfg, "--out", str(a))[0] == 0
    assert run(capsys, "simulate", "--config", cfg, "--out", str(b), "--workers", "4", "--reps", "400")[0] == 0
    assert run(capsys, "simulate", "--config", str(a) + ".manifest.json", "--out", str(c))[0] == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_simulate_flags_override_config(capsys, tmp_path):
    cfg = write_config(tmp_path, SIM)
    code, out, _ = run(capsys, "simulate", "--config", cfg, "--reps", "50", "--constants", "C5=30")
    assert code == 0
    rows = rows_of(out)
    assert all(r["reps"] == "50" for r in rows)
    assert float(rows[-1]["v"]) == pytest.approx(bounds.threshold_u(20, 0.1, params=bounds.BoundParams(C5=30)))


def test_simulate_parse_error_reports_position(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 20,\n  "sigma2": }')
    code, _, err = run(capsys, "simulate", "--config", str(path))
    assert code == 2
    assert "bad.json:2:13" in err


@pytest.mark.parametrize(
    "patch",
    [{"n": "x"}, {"levels": 3}, {"levels": ["bogus"]}, {"sigma2": 2.0}, {"extra": 1}, {"constants": {"C2": 1.0}}],
)
def test_simulate_schema_errors(capsys, tmp_path, patch):
    cfg = write_config(tmp_path, {**SIM, **patch})
    assert run(capsys, "simulate", "--config", cfg)[0] == 2


def test_simulate_missing_config_is_usage_error(capsys, tmp_path):
    assert run(capsys, "simulate")[0] == 2
    assert run(capsys, "simulate", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_runtime_error_exits_1(capsys, tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise ValueError("simulated failure")

    monkeypatch.setattr(cli, "estimate_tail", boom)
    cfg = write_config(tmp_path, SIM)
    code, _, err = run(capsys, "simulate", "--config", cfg)
    assert code == 1 and "simulated failure" in err


# ---- lower-bound

def test_lower_bound_regime_a(capsys):
    code, out, _ = run(capsys, "lower-bound", "--n", "20", "--sigma2", "1e-300", "--reps", "300")
    assert code == 0
    rows = rows_of(out)
    empirical = rows[0]
    assert empirical["model"] == "empirical" and float(empirical["value"]) == 1.0
    assert "regime A" in empirical["note"]


def test_lower_bound_poisson_rows(capsys):
    code, out, _ = run(capsys, "lower-bound", "--n", "10000", "--sigma2", "1e-4", "--reps", "50", "--delta", "0.1")
    assert code == 0
    rows = {(r["quantity"], r["model"]): r for r in rows_of(out)}
    margin = rows[("inequality_margin", "poisson")]
    analytic = float(rows[("analytic_lower_bound", "poisson")]["value"])
    if margin["status"] == "holds":
        assert analytic >= 1 - 0.1


def test_lower_bound_skips_poisson_outside_range(capsys):
    code, out, _ = run(capsys, "lower-bound", "--n", "100", "--sigma2", "0.5", "--reps", "20")
    assert code == 0
    rows = rows_of(out)
    assert rows[0]["status"] == "ok"
    skipped = [r for r in rows if r["model"] == "poisson"]
    assert len(skipped) == 3 and all(r["status"] == "skipped" and r["note"] for r in skipped)


# ---- modulus

def test_modulus_rows(capsys):
    code, out, _ = run(capsys, "modulus", "--n-grid", "5,50,200", "--delta-grid", "0.05,0.5,1", "--reps", "20")
    assert code == 0
    rows = rows_of(out)
    assert len(rows) == 9
    for r in rows:
        ratio = float(r["ratio_mean"])
        assert math.isfinite(ratio) and ratio > 0
        assert float(r["q50"]) <= float(r["q90"]) <= float(r["q99"]) <= float(r["max"])


def test_modulus_bad_delta(capsys):
    assert run(capsys, "modulus", "--delta-grid", "0,0.5")[0] == 2


# ---- verify

def test_verify_quick_subset(capsys):
    code, out, _ = run(capsys, "verify", "--only", "bounds.regime,function_classes.hyp,empirical.perm")
    assert code == 0
    lines = [l for l in out.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert len(lines) == 4  # the constants check always runs
    assert all(l.split()[2].endswith("s") for l in lines)  # wall time column


def test_verify_reports_bad_constant(capsys):
    code, out, err = run(capsys, "verify", "--constants", "C2=1.5", "--only", "bounds.non_vacuous")
    assert code == 1
    assert "FAIL  bounds.params" in out and "C2" in out
    assert "bounds.params" in err
