import json

import numpy as np
import pytest

from bidcurve.cli import main
from bidcurve.curve import SegmentKind, extract_curve, classify_segments
from bidcurve.io import ConfigError, load_config, load_prices, read_curve, write_curve
from bidcurve.plotting import render_svg
from bidcurve.resources import IdealBattery, ImperfectBattery, solve_schedule

from conftest import WORKED_PRICES, write_config, write_price_csv


# ---------------------------------------------------------------------------
# price ingestion


def test_load_prices_reads_the_worked_series(tmp_path):
    path = write_price_csv(tmp_path / "p.csv", WORKED_PRICES)
    series = load_prices(path)
    assert series.horizon == 24
    assert series.future_prices[:2] == (78.92, 75.91)


def test_empty_price_file_gives_single_period_series(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("period,price\n")
    assert load_prices(path).horizon == 1
    path.write_text("")
    assert load_prices(path).horizon == 1


def test_blank_price_row_error_names_the_line(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("period,price\n2,50\n3,60\n\n,\n5,70\n")
    with pytest.raises(ConfigError, match=":4"):
        load_prices(path)


def test_malformed_and_nan_rows_are_rejected(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("period,price\n2,abc\n")
    with pytest.raises(ConfigError, match=":2"):
        load_prices(path)
    path.write_text("period,price\n2,nan\n")
    with pytest.raises(ConfigError, match="not finite"):
        load_prices(path)


def test_duplicate_and_non_monotone_periods_are_rejected(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("period,price\n2,50\n2,60\n")
    with pytest.raises(ConfigError, match="duplicate"):
        load_prices(path)
    path.write_text("period,price\n2,50\n4,60\n")
    with pytest.raises(ConfigError, match="expected period 3"):
        load_prices(path)


def test_per_kwh_prices_convert_to_per_mwh(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("period,price\n2,0.35\n3,0.81\n")
    series = load_prices(path, per_kwh=True)
    assert series.future_prices == pytest.approx((350.0, 810.0))


# ---------------------------------------------------------------------------
# config


def test_config_defaults_to_small_reference_battery(tmp_path):
    write_price_csv(tmp_path / "prices.csv", (50.0, 70.0))
    cfg_path = tmp_path / "c.json"
    cfg_path.write_text(json.dumps({"prices": "prices.csv"}))
    cfg = load_config(cfg_path)
    p = cfg.resource.params
    assert isinstance(cfg.resource, IdealBattery)
    assert p.e_max == pytest.approx(2.0)
    assert p.e_min == pytest.approx(0.2)
    assert p.e_init == pytest.approx(1.0)
    assert p.p_dis_max == pytest.approx(0.6)


def test_lossy_battery_config_builds_imperfect_resource(tmp_path):
    cfg = load_config(write_config(tmp_path, resource={
        "kind": "battery", "eta_dis": 0.9, "eta_chg": 0.95,
    }))
    assert isinstance(cfg.resource, ImperfectBattery)


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(bad)
    with pytest.raises(ConfigError, match="prices"):
        other = tmp_path / "no_prices.json"
        other.write_text("{}")
        load_config(other)
    with pytest.raises(ConfigError, match="kind"):
        load_config(write_config(tmp_path, resource={"kind": "fusion_reactor"}))


def test_ev_fleet_config_is_seed_deterministic(tmp_path):
    resource = {"kind": "ev_fleet", "count": 12, "seed": 5}
    a = load_config(write_config(tmp_path, resource=resource))
    b = load_config(write_config(tmp_path, resource=resource))
    assert a.resource.members == b.resource.members
    assert len(a.resource.members) == 12


# ---------------------------------------------------------------------------
# curve export


def test_json_round_trip_is_lossless(tmp_path, worked_battery, worked_prices):
    curve = classify_segments(extract_curve(worked_battery, worked_prices),
                              worked_battery, worked_prices)
    back = read_curve(write_curve(curve, tmp_path / "c.json"))
    assert np.array_equal(back.breakpoints, curve.breakpoints)
    assert np.array_equal(back.levels, curve.levels)
    assert back.labels == curve.labels
    assert back.price_tol == curve.price_tol
    assert back.resource_id == curve.resource_id


def test_csv_round_trip_recovers_stairs(tmp_path, worked_battery, worked_prices):
    curve = classify_segments(extract_curve(worked_battery, worked_prices),
                              worked_battery, worked_prices)
    back = read_curve(write_curve(curve, tmp_path / "c.csv"))
    assert np.array_equal(back.breakpoints, curve.breakpoints)
    assert np.array_equal(back.levels, curve.levels)
    assert [l.kind for l in back.labels] == [l.kind for l in curve.labels]


def test_single_stair_curve_exports_zero_breakpoints(tmp_path):
    from bidcurve.curve import StaircaseCurve
    flat = StaircaseCurve(breakpoints=np.zeros(0), levels=np.array([0.25]))
    doc = json.loads(write_curve(flat, tmp_path / "c.json").read_text())
    assert doc["breakpoints"] == []
    assert doc["levels"] == [0.25]
    csv_text = write_curve(flat, tmp_path / "c.csv").read_text()
    assert csv_text.count("\n") == 2  # header plus one stair


# ---------------------------------------------------------------------------
# SVG rendering


def test_svg_output_is_byte_identical_across_runs(tmp_path, worked_battery, worked_prices):
    curve = extract_curve(worked_battery, worked_prices)
    a = render_svg(curve, tmp_path / "a.svg").read_bytes()
    b = render_svg(curve, tmp_path / "b.svg").read_bytes()
    assert a == b
    assert b"<svg" in a and b"viewBox" in a


def test_svg_counts_one_stroke_per_level(tmp_path, worked_battery, worked_prices):
    curve = extract_curve(worked_battery, worked_prices)
    text = render_svg(curve, tmp_path / "c.svg").read_text()
    assert text.count("LineCollection") >= curve.num_levels


def test_schedule_and_family_render(tmp_path, worked_battery, worked_prices):
    sched = solve_schedule(worked_battery, worked_prices, 68.0)
    assert render_svg(sched, tmp_path / "s.svg").exists()
    curve = extract_curve(worked_battery, worked_prices)
    assert render_svg([curve, curve], tmp_path / "f.svg", names=["a", "b"]).exists()
    with pytest.raises(ValueError):
        render_svg([], tmp_path / "empty.svg")


# ---------------------------------------------------------------------------
# CLI


def test_cli_curve_writes_all_artifacts(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["curve", str(cfg), "--svg"]) == 0
    out = tmp_path / "out"
    assert (out / "curve.json").exists()
    assert (out / "curve.csv").exists()
    assert (out / "curve.svg").exists()
    levels = json.loads((out / "curve.json").read_text())["levels"]
    assert levels == pytest.approx([-5.0, -3.0, -1.0, 4.0, 5.0], abs=1e-6)
    assert "5 level(s)" in capsys.readouterr().out


def test_cli_outputs_are_deterministic(tmp_path):
    cfg = write_config(tmp_path)
    main(["curve", str(cfg), "--svg"])
    first = {f: (tmp_path / "out" / f).read_bytes() for f in ("curve.json", "curve.csv", "curve.svg")}
    main(["curve", str(cfg), "--svg"])
    for f, blob in first.items():
        assert (tmp_path / "out" / f).read_bytes() == blob


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["curve", str(tmp_path / "missing.json")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["curve", str(tmp_path / "x.json"), "--bogus-flag"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["not-a-command"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_cli_verify_maps_failures_to_exit_one(tmp_path, monkeypatch, capsys):
    cfg = write_config(tmp_path)
    assert main(["verify", str(cfg), "--suite", "oracle", "--instances", "3"]) == 0
    assert "0 failed" in capsys.readouterr().out

    from bidcurve.verify import PropertyReport
    monkeypatch.setattr("bidcurve.cli.run_suite",
                        lambda *a, **k: [PropertyReport("stub", False, witnesses=[("boom", 1)])])
    assert main(["verify", str(cfg), "--suite", "ideal"]) == 1
    assert "FAIL stub" in capsys.readouterr().out


def test_cli_schedule_prints_diagnostics(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["schedule", str(cfg), "--c1", "100"]) == 0
    out = capsys.readouterr().out
    assert "threshold price: 75.91" in out
    assert "first binding period: 3" in out


def test_cli_sweep_writes_curve_family(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["sweep", str(cfg), "--param", "efficiency", "--values", "1.0,0.9", "--svg"]) == 0
    out = tmp_path / "out"
    assert (out / "curve_efficiency_1.json").exists()
    assert (out / "curve_efficiency_0.9.json").exists()
    assert (out / "family.svg").exists()
    assert main(["sweep", str(cfg), "--param", "soc", "--values", "oops"]) == 2
    capsys.readouterr()


def test_cli_aggregate_doubles_identical_configs(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["aggregate", str(cfg), str(cfg)]) == 0
    levels = json.loads((tmp_path / "out" / "aggregate.json").read_text())["levels"]
    assert levels == pytest.approx([-10.0, -6.0, -2.0, 8.0, 10.0], abs=1e-6)
    capsys.readouterr()
