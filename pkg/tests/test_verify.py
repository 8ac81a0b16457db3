import numpy as np
import pytest

from bidcurve.curve import classify_segments, extract_curve
from bidcurve.resources import (
    Ac,
    AcParams,
    BatteryParams,
    Ev,
    EvSpec,
    IdealBattery,
    ImperfectBattery,
    PriceSeries,
    solve_schedule,
)
from bidcurve.verify import (
    aligned_battery_instance,
    check_additive_shift,
    check_complementarity,
    check_ending_soc_stairs,
    check_oracle_gap,
    check_scaling_invariance,
    check_segment_bounds,
    check_staircase,
    check_structure,
    check_vertical_shift,
    dp_oracle,
    null_stair_widths,
    random_battery_instance,
    run_suite,
)


def small_battery():
    return IdealBattery(BatteryParams(0.0, 2.0, 1.0, 1.0, 1.0)), PriceSeries(1.0, (10.0,))


def test_dp_oracle_matches_lp_exactly_on_lattice_instance():
    """E1 and P*dt are grid multiples, so the lattice DP reproduces the LP
    objective to float precision."""
    r, prices = small_battery()
    for c1 in (-3.0, 5.0, 12.0):
        lp = solve_schedule(r, prices, c1).objective
        dp, sched = dp_oracle(r, prices, c1, 201, 201)
        assert dp == pytest.approx(lp, abs=1e-9)
        assert sched.power.shape == (2,)


def test_dp_oracle_respects_ev_window_and_floor():
    ev = Ev(EvSpec(capacity=40.0, p_max=10.0, first_period=2, last_period=5,
                   e_arrival=10.0, e_depart_floor=32.0, arrival_hour=1.0, departure_hour=5.0))
    prices = PriceSeries(1.0, (80.0, 30.0, 60.0, 20.0, 90.0))
    lp = solve_schedule(ev, prices, 50.0).objective
    dp, sched = dp_oracle(ev, prices, 50.0, 201, 201)
    assert dp == pytest.approx(lp, abs=1e-8)
    assert sched.power[0] == 0.0 and sched.power[5] == 0.0
    assert sched.energy[5] >= 32.0 - 1e-9


def test_dp_oracle_rejects_long_horizons():
    r, _ = small_battery()
    with pytest.raises(ValueError):
        dp_oracle(r, PriceSeries(1.0, tuple(range(10, 20))), 5.0)


def test_oracle_gap_check_passes_on_aligned_instances():
    rng = np.random.default_rng(2)
    for _ in range(3):
        r, prices = aligned_battery_instance(rng)
        c1 = float(rng.uniform(10, 100))
        assert check_oracle_gap(r, prices, c1).passed


def test_staircase_check_accepts_real_curve_and_rejects_tampered_one(worked_battery, worked_prices):
    curve = extract_curve(worked_battery, worked_prices)
    assert check_staircase(curve, worked_battery, worked_prices, samples=30).passed
    curve.levels = curve.levels.copy()
    curve.levels[0] -= 0.5  # no longer what the LP solves to
    rep = check_staircase(curve, worked_battery, worked_prices, samples=30)
    assert not rep.passed
    assert rep.witnesses


def test_segment_bound_check_flags_excess_levels(worked_battery):
    import bidcurve.curve as curve_mod
    fake = curve_mod.StaircaseCurve(
        breakpoints=np.arange(1.0, 7.0),
        levels=np.linspace(-5, 5, 7),
    )
    rep = check_segment_bounds(fake, worked_battery)
    assert not rep.passed


def test_structure_check_on_worked_instance(worked_battery, worked_prices):
    for c1 in (50.0, 67.0, 73.0, 100.0):
        sched = solve_schedule(worked_battery, worked_prices, c1)
        rep = check_structure(sched, worked_battery, worked_prices, c1)
        assert rep.passed, rep.witnesses


def test_scaling_invariance_holds(worked_battery, worked_prices):
    for k in (0.5, 2.0):
        rep = check_scaling_invariance(worked_battery, worked_prices, k)
        assert rep.passed, rep.witnesses
    with pytest.raises(ValueError):
        check_scaling_invariance(worked_battery, worked_prices, -1.0)


def test_additive_shift_requires_ending_soc(worked_battery, worked_prices):
    with pytest.raises(ValueError):
        check_additive_shift(worked_battery, worked_prices, 7.0)
    r = IdealBattery(BatteryParams(0.0, 22.0, 14.0, 5.0, 5.0, ending_soc=True))
    for a in (-100.0, 7.0):
        rep = check_additive_shift(r, worked_prices, a)
        assert rep.passed, rep.witnesses


def test_vertical_shift_small_delta(worked_battery, worked_prices):
    for delta in (0.1, -0.1):
        rep = check_vertical_shift(worked_battery, worked_prices, delta)
        assert rep.passed, rep.witnesses
        assert rep.observations  # per-level offsets are recorded
    with pytest.raises(ValueError):
        check_vertical_shift(worked_battery, worked_prices, 100.0)  # leaves the bounds


def test_complementarity_check_skips_negative_prices(worked_prices):
    p = BatteryParams(0.0, 22.0, 14.0, 5.0, 5.0, eta_dis=0.9, eta_chg=0.9)
    r = ImperfectBattery(p)
    sched = solve_schedule(r, worked_prices, 65.0)
    assert check_complementarity(sched, worked_prices, 65.0, p).passed
    neg = PriceSeries(1.0, tuple(-f for f in worked_prices.future_prices))
    with pytest.warns(UserWarning):
        sched_neg = solve_schedule(r, neg, -65.0)
    rep = check_complementarity(sched_neg, neg, -65.0, p)
    assert not rep.applicable


def test_ending_soc_adds_at_most_two_stairs(worked_battery, worked_prices):
    rep = check_ending_soc_stairs(worked_battery, worked_prices)
    assert rep.passed, rep.witnesses


def test_null_stair_widens_as_efficiency_falls(worked_prices):
    widths = null_stair_widths(BatteryParams(0.2, 2.0, 1.0, 0.6, 0.6), worked_prices)
    assert widths[1.0] == 0.0
    assert widths[0.98] > 0.0
    assert widths[0.9] >= widths[0.98]


def test_random_instance_generator_is_seeded():
    a = random_battery_instance(np.random.default_rng(9))
    b = random_battery_instance(np.random.default_rng(9))
    assert a[0] == b[0]
    assert a[1] == b[1]
    lossy, _ = random_battery_instance(np.random.default_rng(9), lossy=True)
    assert lossy.params.lossy


def test_suites_pass_on_small_batches(worked_battery, worked_prices):
    for name in ("ideal", "imperfect", "negative", "oracle"):
        reports = run_suite(name, instances=2, seed=3,
                            resource=worked_battery, prices=worked_prices)
        assert reports
        assert all(r.passed for r in reports), [r for r in reports if not r.passed]
    with pytest.raises(ValueError):
        run_suite("bogus")


def test_suite_results_do_not_depend_on_thread_count(monkeypatch, worked_battery, worked_prices):
    monkeypatch.setenv("BIDCURVE_THREADS", "1")
    serial = run_suite("ideal", instances=3, seed=4)
    monkeypatch.setenv("BIDCURVE_THREADS", "4")
    threaded = run_suite("ideal", instances=3, seed=4)
    assert [(r.name, r.passed) for r in serial] == [(r.name, r.passed) for r in threaded]


def test_dp_oracle_handles_ac_with_interior_ambient():
    ac = Ac(AcParams(thermal_resistance=10.0, heat_capacity=5.0, cooling_power_max=7.0,
                     cop=3.0, temp_init=24.0, temp_min=22.0, temp_max=26.0,
                     ambient=(24.0,) * 4))
    prices = PriceSeries(1.0, (60.0, 70.0, 80.0))
    lp = solve_schedule(ac, prices, 50.0).objective
    dp, _ = dp_oracle(ac, prices, 50.0, 201, 201)
    assert dp == pytest.approx(lp, abs=1e-9)
