import subprocess
import sys

import numpy as np
import pytest

from fdrelay.beamforming import Scheme
from fdrelay.channel import draw_channel
from fdrelay.cli import main
from fdrelay.config import config_from_key_values
from fdrelay.rng import RngStream
from fdrelay.sweeps import (CSV_HEADER, DEFAULT_GRIDS, Engine, FigureFamily,
                            SweepSpec, run_sweep)
from fdrelay.timesplit import coefficients_for, optimal_alpha_tzf


def _read(path):
    return path.read_text(encoding="utf-8")


def test_csv_schema_and_sorting(tmp_path, cfg33):
    out = tmp_path / "outage.csv"
    spec = SweepSpec(figure_family=FigureFamily.OUTAGE_VS_PS,
                     grid=(10.0, 14.0), schemes=(Scheme.TZF, Scheme.RZF),
                     engine=Engine.BOTH, n_trials=4000, seed=3,
                     out_path=str(out), alpha=0.5)
    run_sweep(spec, cfg33)
    lines = _read(out).strip().split("\n")
    assert lines[0] == CSV_HEADER
    rows = [ln.split(",") for ln in lines[1:]]
    assert len(rows) == 2 * 2 * 2
    keys = [(float(r[0]), r[1], r[2]) for r in rows]
    assert keys == sorted(keys)
    for r in rows:
        assert r[2] in ("analytic", "mc")
        value = float(r[3])
        assert 0.0 <= value <= 1.0


def test_csv_deterministic(tmp_path, cfg33):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (out1, out2):
        spec = SweepSpec(figure_family=FigureFamily.DELAY_VS_ALPHA,
                         grid=(0.3, 0.5, 0.7), schemes=(Scheme.TZF, Scheme.MRC_MRT),
                         engine=Engine.MC, n_trials=3000, seed=11,
                         out_path=str(out))
        run_sweep(spec, cfg33)
    assert _read(out1) == _read(out2)


def test_empty_scheme_list_gives_header_only(tmp_path, cfg33):
    out = tmp_path / "empty.csv"
    spec = SweepSpec(figure_family=FigureFamily.DELAY_VS_ALPHA, grid=(0.5,),
                     schemes=(), engine=Engine.MC, n_trials=10, seed=1,
                     out_path=str(out))
    run_sweep(spec, cfg33)
    assert _read(out) == CSV_HEADER + "\n"


def test_infeasible_scheme_omitted_with_warning(tmp_path, capsys):
    cfg = config_from_key_values({"m_t": 1, "m_r": 3})
    out = tmp_path / "o.csv"
    spec = SweepSpec(figure_family=FigureFamily.OUTAGE_VS_PS, grid=(10.0,),
                     schemes=(Scheme.TZF, Scheme.MRC_MRT), engine=Engine.MC,
                     n_trials=2000, seed=1, out_path=str(out), alpha=0.5)
    run_sweep(spec, cfg)
    lines = _read(out).strip().split("\n")
    assert all("tzf" not in ln for ln in lines[1:])
    assert any("mrc" in ln for ln in lines[1:])
    assert "infeasible" in capsys.readouterr().err


def test_analytic_and_mc_rows_agree(tmp_path, cfg33):
    out = tmp_path / "agree.csv"
    spec = SweepSpec(figure_family=FigureFamily.OUTAGE_VS_PS,
                     grid=(8.0, 12.0), schemes=(Scheme.TZF,),
                     engine=Engine.BOTH, n_trials=60_000, seed=5,
                     out_path=str(out), alpha=0.5)
    run_sweep(spec, cfg33)
    rows = [ln.split(",") for ln in _read(out).strip().split("\n")[1:]]
    by_key = {(r[0], r[2]): (float(r[3]), float(r[4])) for r in rows}
    for axis in ("8", "12"):
        exact, _ = by_key[(axis, "analytic")]
        est, ci = by_key[(axis, "mc")]
        assert abs(exact - est) <= 3.0 * ci + 1e-12


def test_strictly_increasing_grid_enforced():
    with pytest.raises(ValueError):
        SweepSpec(figure_family=FigureFamily.OUTAGE_VS_PS, grid=(10.0, 10.0))


def test_default_grids_exist():
    for family in FigureFamily:
        grid = DEFAULT_GRIDS[family]
        assert all(b > a for a, b in zip(grid, grid[1:]))


def test_throughput_family_and_asymptotic_rows(tmp_path, cfg33):
    out = tmp_path / "thr.csv"
    spec = SweepSpec(figure_family=FigureFamily.THROUGHPUT_VS_ALPHA,
                     grid=(0.2, 0.5), schemes=(Scheme.TZF, Scheme.OPTIMUM),
                     engine=Engine.ANALYTIC, n_trials=10, seed=2,
                     out_path=str(out))
    run_sweep(spec, cfg33)
    rows = [ln.split(",") for ln in _read(out).strip().split("\n")[1:]]
    assert {r[1] for r in rows} == {"tzf", "opt"}
    opt = {float(r[0]): float(r[3]) for r in rows if r[1] == "opt"}
    tzf = {float(r[0]): float(r[3]) for r in rows if r[1] == "tzf"}
    for a in (0.2, 0.5):
        assert opt[a] >= tzf[a] - 1e-9
    out2 = tmp_path / "asym.csv"
    spec = SweepSpec(figure_family=FigureFamily.OUTAGE_VS_PS, grid=(12.0,),
                     schemes=(Scheme.RZF,), engine=Engine.ANALYTIC,
                     n_trials=10, seed=2, out_path=str(out2), alpha=0.5,
                     include_asymptotic=True)
    run_sweep(spec, cfg33)
    engines = {ln.split(",")[2] for ln in _read(out2).strip().split("\n")[1:]}
    assert engines == {"analytic", "asymptotic"}


# ---------------------------------------------------------------------------
# CLI


def _run_cli(args):
    return main(args)


def test_cli_outage_gamma_zero(tmp_path, capsys):
    rc = _run_cli(["outage", "--scheme", "tzf", "--gamma-th", "0",
                   "--engine", "both", "--trials", "500"])
    assert rc == 0
    out = capsys.readouterr().out
    kv = dict(ln.split("=", 1) for ln in out.strip().split("\n"))
    assert float(kv["outage_analytic"]) == 0.0
    assert float(kv["outage_mc"]) == 0.0


def test_cli_alpha_matches_library(capsys):
    rc = _run_cli(["alpha", "--scheme", "tzf", "--seed", "9", "--draw", "2",
                   "--li-dbm", "-10"])
    assert rc == 0
    kv = dict(ln.split("=", 1) for ln in capsys.readouterr().out.strip().split("\n"))
    cfg = config_from_key_values({"li_dbm": -10.0})
    ch = draw_channel(cfg, RngStream(9, 2))
    ref = optimal_alpha_tzf(coefficients_for(Scheme.TZF, ch, cfg))
    assert float(kv["alpha_star"]) == pytest.approx(ref.alpha_star, rel=1e-9)
    assert float(kv["rate"]) == pytest.approx(ref.rate_at_star, rel=1e-9)
    assert kv["provenance"] == "closed-form"


def test_cli_beamform_reports_sinr(capsys):
    rc = _run_cli(["beamform", "--scheme", "opt", "--alpha", "0.4", "--seed", "3"])
    assert rc == 0
    kv = dict(ln.split("=", 1) for ln in capsys.readouterr().out.strip().split("\n"))
    assert float(kv["end_to_end_sinr"]) == pytest.approx(
        min(float(kv["first_hop_sinr"]), float(kv["second_hop_snr"])), rel=1e-9)
    assert kv["scheme"] == "opt"


def test_cli_missing_required_flag_exits_2():
    proc = subprocess.run(
        [sys.executable, "-m", "fdrelay.cli", "alpha"],
        capture_output=True, text=True)
    assert proc.returncode == 2
    proc = subprocess.run(
        [sys.executable, "-m", "fdrelay.cli", "outage", "--scheme", "tzf",
         "--no-such-flag", "1"],
        capture_output=True, text=True)
    assert proc.returncode == 2
    assert "usage" in proc.stderr.lower()


def test_cli_config_file_and_override(tmp_path, capsys):
    cfgfile = tmp_path / "scenario.cfg"
    cfgfile.write_text("p_s_dbm = 14\nm_t = 2\n", encoding="utf-8")
    rc = _run_cli(["beamform", "--scheme", "mrc", "--config", str(cfgfile),
                   "--p-s-dbm", "16"])
    assert rc == 0
    capsys.readouterr()
    # invalid config key
    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus = 1\n", encoding="utf-8")
    rc = _run_cli(["beamform", "--scheme", "mrc", "--config", str(bad)])
    assert rc == 1


def test_cli_sweep_deterministic(tmp_path):
    out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
    base = ["sweep", "--family", "outage-vs-ps", "--scheme", "tzf",
            "--engine", "mc", "--trials", "2000", "--seed", "21",
            "--grid", "10", "14", "--alpha", "0.5"]
    assert _run_cli(base + ["--out", str(out1)]) == 0
    assert _run_cli(base + ["--out", str(out2)]) == 0
    assert _read(out1) == _read(out2)
    assert _read(out1).startswith(CSV_HEADER)


def test_cli_throughput_verb(capsys):
    rc = _run_cli(["throughput", "--scheme", "rzf", "--alpha", "0.5",
                   "--metric", "delay", "--trials", "2000", "--seed", "2"])
    assert rc == 0
    kv = dict(ln.split("=", 1) for ln in capsys.readouterr().out.strip().split("\n"))
    assert 0.0 <= float(kv["value_mc"]) <= 2.0
    assert kv["metric"] == "delay"


def test_cli_infeasible_scheme_errors(capsys):
    rc = _run_cli(["alpha", "--scheme", "tzf", "--m-t", "1"])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_cli_opa_search(capsys):
    rc = _run_cli(["alpha", "--scheme", "mrc", "--power-split", "opa",
                   "--p-s-dbm", "10", "--p-max-dbm", "16", "--li-dbm", "-10",
                   "--d1", "25", "--d2", "12"])
    assert rc == 0
    kv = dict(ln.split("=", 1) for ln in capsys.readouterr().out.strip().split("\n"))
    assert kv["provenance"] == "opa-grid-search"
    # the average-power budget holds
    alpha, p_e, p_i = (float(kv[k]) for k in ("alpha_star", "p_e", "p_i"))
    assert alpha * p_e + (1.0 - alpha) * p_i <= 0.01 * (1 + 1e-9) + 1e-12
    rc = _run_cli(["alpha", "--scheme", "mrc", "--power-split", "opa",
                   "--p-s-dbm", "10", "--li-dbm", "-10", "--d1", "25",
                   "--d2", "12"])
    assert rc == 0
    kv2 = dict(ln.split("=", 1) for ln in capsys.readouterr().out.strip().split("\n"))
    # larger cap on the same draw never hurts
    assert float(kv2["rate"]) >= float(kv["rate"]) - 1e-12


def test_sweep_worker_pool_deterministic(tmp_path, cfg33):
    outs = []
    for workers in (1, 2):
        out = tmp_path / f"w{workers}.csv"
        spec = SweepSpec(figure_family=FigureFamily.OUTAGE_VS_PS,
                         grid=(8.0, 12.0, 16.0), schemes=(Scheme.TZF, Scheme.RZF),
                         engine=Engine.BOTH, n_trials=5000, seed=13,
                         out_path=str(out), alpha=0.5, workers=workers)
        run_sweep(spec, cfg33)
        outs.append(_read(out))
    assert outs[0] == outs[1]


def test_outage_curve_builder(cfg33):
    from fdrelay.outage import build_outage_curve
    grid = (6.0, 10.0, 14.0, 18.0)
    curve = build_outage_curve(Scheme.TZF, cfg33, 0.5, grid, engine="exact")
    assert curve.axis == "p_s_dbm"
    assert all(p == "exact" for p in curve.provenance)
    vals = np.array(curve.values)
    assert np.all((vals >= 0.0) & (vals <= 1.0))
    assert np.all(np.diff(vals) <= 1e-12)  # nonincreasing in SNR
    mc_curve = build_outage_curve(Scheme.TZF, cfg33, 0.5, grid[:2],
                                  engine="monte-carlo", n_trials=20_000, seed=3)
    assert all(p.startswith("monte-carlo(") for p in mc_curve.provenance)
    for v, e, ci in zip(mc_curve.values, curve.values[:2], mc_curve.ci95):
        assert abs(v - e) <= 3.0 * ci + 1e-12
