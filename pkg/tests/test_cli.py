import csv
import math
from pathlib import Path

import pytest

import sdmacov.analytic
from sdmacov import cli

REPO_CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(path, *, n_users="2", exponents="4", breakpoints="",
                 delta_h="2", points="4", lam_min="100", lam_max="10000",
                 trials="0", seed="7", extra=""):
    path.write_text(f"""
[network]
power_dbm = 23
tau_db = 10
delta_h_m = {delta_h}
n_antennas = 4
n_users = {n_users}

[pathloss]
exponents = {exponents}
breakpoints_m = {breakpoints}

[sweep]
lambda_min_per_km2 = {lam_min}
lambda_max_per_km2 = {lam_max}
points = {points}
log_spaced = true

[mc]
trials = {trials}
seed = {seed}

[output]
path = {path.with_suffix('.csv')}
{extra}
""")
    return path


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def test_parse_roundtrip(tmp_path):
    p = write_config(tmp_path / "a.ini", trials="123")
    cfg = cli.parse_config(p)
    assert cfg.power_w == pytest.approx(10 ** (-0.7))
    assert cfg.tau_linear == pytest.approx(10.0)
    assert cfg.n_users_list == (2,)
    assert cfg.mc_trials == 123
    assert cfg.exponents == (4.0,)
    assert cfg.breakpoints_m == ()


def test_parse_errors_carry_file_and_line(tmp_path):
    p = tmp_path / "bad.ini"
    p.write_text("[network]\npower_dbm = 23\ntau_db = ten\n")
    with pytest.raises(cli.ConfigError) as err:
        cli.parse_config(p)
    assert str(p) in str(err.value)
    assert ":3:" in str(err.value)


def test_invalid_users_rejected(tmp_path):
    p = write_config(tmp_path / "u.ini", n_users="5")  # > n_antennas = 4
    assert cli.main(["sweep", "--config", str(p)]) == 2


def test_zero_points_rejected_and_no_file(tmp_path):
    p = write_config(tmp_path / "z.ini", points="0")
    assert cli.main(["sweep", "--config", str(p)]) == 2
    assert not p.with_suffix(".csv").exists()


def test_sweep_csv_contract(tmp_path):
    p = write_config(tmp_path / "s.ini", trials="2000")
    assert cli.main(["sweep", "--config", str(p)]) == 0
    out = p.with_suffix(".csv")
    text = out.read_bytes()
    assert b"\r" not in text
    rows = read_rows(out)
    assert len(rows) == 4
    lam_prev = 0.0
    for row in rows:
        lam = float(row["lambda_per_km2"])
        assert lam > lam_prev
        lam_prev = lam
        # throughput recomputable from the row itself
        want = (int(row["n_users"]) * lam * float(row["cp_analytic"])
                * math.log2(1 + 10.0))
        assert float(row["st_analytic"]) == pytest.approx(want, rel=1e-12)
        assert row["scheme"] == "SDMA"
        assert row["cp_approx"] != ""   # single-slope: approximation present
        assert row["cp_mc"] != ""
        se = float(row["mc_stderr"])
        assert abs(float(row["cp_mc"]) - float(row["cp_analytic"])) <= 5 * se


def test_sweep_is_byte_deterministic(tmp_path):
    p = write_config(tmp_path / "d.ini", trials="500")
    out1, out2 = tmp_path / "one.csv", tmp_path / "two.csv"
    assert cli.main(["sweep", "--config", str(p), "--output", str(out1)]) == 0
    assert cli.main(["sweep", "--config", str(p), "--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_multi_slope_leaves_approx_empty(tmp_path):
    p = write_config(tmp_path / "m.ini", exponents="2.5, 4", breakpoints="10")
    assert cli.main(["sweep", "--config", str(p)]) == 0
    for row in read_rows(p.with_suffix(".csv")):
        assert row["cp_approx"] == ""
        assert row["cp_mc"] == ""


def test_flat_height_sweep_has_increasing_throughput(tmp_path):
    p = write_config(tmp_path / "f.ini", delta_h="0", points="6")
    assert cli.main(["sweep", "--config", str(p)]) == 0
    st = [float(r["st_analytic"]) for r in read_rows(p.with_suffix(".csv"))]
    assert all(b > a for a, b in zip(st, st[1:]))


def test_sweep_throughput_rises_then_falls(tmp_path):
    # With a positive height difference the throughput curve over a wide
    # density range climbs to a peak and decays again.
    p = write_config(tmp_path / "rf.ini", lam_min="100", lam_max="1000000",
                     points="7")
    assert cli.main(["sweep", "--config", str(p)]) == 0
    st = [float(r["st_analytic"]) for r in read_rows(p.with_suffix(".csv"))]
    peak = st.index(max(st))
    assert 0 < peak < len(st) - 1
    assert all(b > a for a, b in zip(st[:peak], st[1:peak + 1]))
    assert all(b < a for a, b in zip(st[peak:], st[peak + 1:]))


def test_compare_summary_and_ordering(tmp_path):
    p = write_config(tmp_path / "c.ini", n_users="1, 2, 4",
                     lam_min="100", lam_max="1000000", points="3")
    assert cli.main(["compare", "--config", str(p)]) == 0
    out = p.with_suffix(".csv")
    rows = read_rows(out)
    assert len(rows) == 9
    assert {r["scheme"] for r in rows} == {"SU-BF", "SDMA", "full-SDMA"}
    comments = [l for l in out.read_text().splitlines() if l.startswith("#")]
    assert len(comments) == 3
    closed = [float(l.split("closed=")[1].split()[0]) for l in comments]
    numeric = [float(l.split("numeric=")[1].split()[0]) for l in comments]
    assert closed[0] > closed[1] > closed[2]
    assert numeric[0] > numeric[1] > numeric[2]
    for c, n in zip(closed, numeric):
        assert abs(c - n) / c < 0.01


def test_sweep_rejects_user_list(tmp_path):
    p = write_config(tmp_path / "l.ini", n_users="1, 2")
    assert cli.main(["sweep", "--config", str(p)]) == 2


def test_numeric_failure_exit_code_names_density(tmp_path, monkeypatch, capsys):
    p = write_config(tmp_path / "n.ini")

    def boom(cfg, model):
        raise sdmacov.analytic.CoverageNumericError("synthetic failure")

    monkeypatch.setattr(cli.analytic, "coverage_exact", boom)
    code = cli.main(["sweep", "--config", str(p)])
    assert code == 3
    err = capsys.readouterr().err
    assert "lambda=100" in err


def test_validate_shipped_default_config(tmp_path, capsys):
    code = cli.main([
        "validate", "--config", str(REPO_CONFIGS / "default.ini"),
        "--mc-trials", "0",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "FAIL" not in out
    assert "golden:omega_su_bf" in out
    assert "SKIP  mc-analytic-agreement" in out


def test_validate_flags_tampered_golden(tmp_path, capsys):
    text = (REPO_CONFIGS / "default.ini").read_text()
    tampered = text.replace("omega_su_bf = 4.99876005056", "omega_su_bf = 4.9")
    p = tmp_path / "tampered.ini"
    p.write_text(tampered)
    code = cli.main(["validate", "--config", str(p), "--mc-trials", "0"])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL  golden:omega_su_bf" in out


def test_validate_small_trials_skips_mc(capsys):
    code = cli.main([
        "validate", "--config", str(REPO_CONFIGS / "default.ini"),
        "--mc-trials", "500",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "SKIP  mc-analytic-agreement" in out
