"""Acceptance gate: one test per advertised criterion, each printing a
single pass/fail line with its runtime."""

import time

import numpy as np
import pytest

from bidcurve.curve import SegmentKind, aggregate, classify_segments, evaluate, extract_curve
from bidcurve.resources import (
    BatteryParams,
    Cluster,
    IdealBattery,
    PriceSeries,
    solve_schedule,
)
from bidcurve.verify import (
    check_ending_soc_stairs,
    check_staircase,
    null_stair_widths,
    random_battery_instance,
    run_suite,
)

from conftest import WORKED_BATTERY, WORKED_PRICES


def _finish(name: str, ok: bool, t0: float, detail: str = ""):
    verdict = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"{verdict}: {name} in {time.monotonic() - t0:.1f}s{suffix}")
    assert ok, f"{name}{suffix}"


def _failures(reports):
    return [r for r in reports if r.applicable and not r.passed]


def test_criterion_1_worked_example_curve_and_schedules():
    """Five exact levels with the full label sequence, plus the pinned
    binding diagnostics of the charge-for-charge and discharge stairs."""
    t0 = time.monotonic()
    r = IdealBattery(WORKED_BATTERY)
    prices = PriceSeries(1.0, WORKED_PRICES)
    curve = classify_segments(extract_curve(r, prices), r, prices)

    ok = curve.num_levels == 5
    ok = ok and np.allclose(curve.levels, [-5.0, -3.0, -1.0, 4.0, 5.0], atol=1e-6)
    ok = ok and [l.kind for l in curve.labels] == [
        SegmentKind.FULLY_CHARGE,
        SegmentKind.CHARGE_FOR_CHARGE,
        SegmentKind.CHARGE_FOR_DISCHARGE,
        SegmentKind.DISCHARGE_FOR_DISCHARGE,
        SegmentKind.FULLY_DISCHARGE,
    ]
    s2 = solve_schedule(r, prices, curve.stair_midpoint(1))
    ok = ok and (s2.t_bind, s2.terminal_bound, s2.n_c, s2.n_d) == (8, "upper", 4, 3)
    s4 = solve_schedule(r, prices, curve.stair_midpoint(3))
    ok = ok and (s4.t_bind, s4.terminal_bound, s4.n_d) == (3, "lower", 2)
    elapsed_ok = time.monotonic() - t0 < 5.0
    _finish("criterion 1 (worked example, < 5 s)", ok and elapsed_ok, t0)


def test_criterion_2_ideal_battery_theorem_suite():
    """200 seeded random ideal batteries: monotone staircase, <= 5 levels,
    exclusive middle labels, theorem ordering; zero failures."""
    t0 = time.monotonic()
    reports = run_suite("ideal", instances=200, seed=20)
    bad = _failures(reports)
    elapsed_ok = time.monotonic() - t0 < 180.0
    _finish("criterion 2 (ideal suite, 200 instances, < 3 min)",
            not bad and elapsed_ok, t0, f"{len(reports)} checks, {len(bad)} failed")


def test_criterion_3_imperfect_battery_suite():
    """200 seeded lossy batteries: <= 9 levels and complementarity within
    1e-7*P on every schedule; the null stair appears at eta < 1 on the fixed
    small battery and its width is reported per efficiency."""
    t0 = time.monotonic()
    prices = PriceSeries(1.0, WORKED_PRICES)
    reports = run_suite("imperfect", instances=200, seed=30,
                        resource=IdealBattery(BatteryParams(0.2, 2.0, 1.0, 0.6, 0.6)),
                        prices=prices)
    bad = _failures(reports)
    widths = null_stair_widths(BatteryParams(0.2, 2.0, 1.0, 0.6, 0.6), prices)
    appearance = widths[0.98] > 0 and widths[0.9] > 0
    print(f"null stair widths by efficiency (observation): {widths}")
    elapsed_ok = time.monotonic() - t0 < 180.0
    _finish("criterion 3 (imperfect suite, 200 instances, < 3 min)",
            not bad and appearance and elapsed_ok, t0,
            f"{len(reports)} checks, {len(bad)} failed")


def test_criterion_4_oracle_equivalence():
    """50 seeded instances with T <= 6 (48 batteries, one AC, one EV): the
    LP/DP objective gap halves, or is already <= 1e-6, when both DP grids
    double from 201 to 401 points."""
    t0 = time.monotonic()
    reports = run_suite("oracle", instances=50, seed=40)
    bad = _failures(reports)
    elapsed_ok = time.monotonic() - t0 < 120.0
    _finish("criterion 4 (oracle equivalence, 50 instances, < 2 min)",
            not bad and elapsed_ok, t0, f"{len(reports)} checks, {len(bad)} failed")


def test_criterion_5_sensitivity_suite():
    """Worked instance plus 50 random ones: price scaling by 0.5/2 scales
    breakpoints and keeps levels; additive shifts of -100/7 with ending-SOC
    on translate breakpoints exactly; +-0.1 MWh initial-energy perturbations
    move the curve vertically, interior levels by delta/dt."""
    t0 = time.monotonic()
    reports = run_suite("shift", instances=50, seed=50,
                        resource=IdealBattery(WORKED_BATTERY),
                        prices=PriceSeries(1.0, WORKED_PRICES))
    bad = _failures(reports)
    _finish("criterion 5 (sensitivity suite, worked + 50 random)",
            not bad, t0, f"{len(reports)} checks, {len(bad)} failed")


def test_criterion_6_cluster_aggregate_equals_joint_lp():
    """Seven identical 2 MWh / 0.6 MW units at mixed initial SOCs: the sum
    of individual curves equals the joint-LP curve at 100 random prices
    within 1e-6 MW."""
    t0 = time.monotonic()
    prices = PriceSeries(1.0, WORKED_PRICES)
    socs = (0.7, 0.5, 0.2, 0.4, 0.8, 0.6, 0.35)
    members = tuple(IdealBattery(BatteryParams(0.2, 2.0, s * 2.0, 0.6, 0.6)) for s in socs)
    joint = extract_curve(Cluster(members), prices)
    summed = aggregate([extract_curve(m, prices) for m in members])

    rng = np.random.default_rng(60)
    bps = np.concatenate([joint.breakpoints, summed.breakpoints])
    tol = 10 * max(joint.price_tol, summed.price_tol)
    checked = 0
    worst = 0.0
    while checked < 100:
        c1 = float(rng.uniform(joint.sweep_lo, joint.sweep_hi))
        if bps.size and np.min(np.abs(bps - c1)) <= tol:
            continue
        checked += 1
        worst = max(worst, abs(evaluate(joint, c1) - evaluate(summed, c1)))
    _finish("criterion 6 (7-unit cluster, 100 prices, 1e-6 MW)",
            worst <= 1e-6, t0, f"max |joint - sum| = {worst:.2e} MW")


def test_criterion_7_negative_price_protocols():
    """All prices negated, and a single period negated, on the fixed lossy
    battery: the extracted curves keep every staircase invariant."""
    t0 = time.monotonic()
    from bidcurve.resources import ImperfectBattery

    r = ImperfectBattery(BatteryParams(0.2, 2.0, 1.0, 0.6, 0.6, eta_dis=0.95, eta_chg=0.95))
    base = list(WORKED_PRICES)
    ok = True
    for label, fut in (
        ("all negated", [-p for p in base]),
        ("one negated", base[:4] + [-base[4]] + base[5:]),
    ):
        prices = PriceSeries(1.0, tuple(fut))
        with pytest.warns(UserWarning):
            curve = extract_curve(r, prices)
            rep = check_staircase(curve, r, prices, samples=50, seed=7)
        ok = ok and rep.passed and np.all(np.diff(curve.levels) > 0)
    _finish("criterion 7 (negative-price staircase invariants)", bool(ok), t0)


def test_criterion_8_ending_soc_adds_at_most_two_stairs():
    """An extreme synthetic price series plus 50 seeded instances: turning
    the ending-SOC constraint on never adds more than two stairs."""
    t0 = time.monotonic()
    extreme = IdealBattery(BatteryParams(0.0, 10.0, 5.0, 1.0, 1.0))
    extreme_prices = PriceSeries(1.0, (500.0, 5.0, 500.0, 5.0, 500.0, 5.0))
    oks = [check_ending_soc_stairs(extreme, extreme_prices).passed]
    rng = np.random.default_rng(80)
    for _ in range(50):
        r, prices = random_battery_instance(rng)
        oks.append(check_ending_soc_stairs(r, prices).passed)
    _finish("criterion 8 (ending-SOC stair count, 1 + 50 instances)",
            all(oks), t0, f"{len(oks) - sum(oks)} failed")
