"""Independent oracles and theorem-level property checks.

Every check returns a PropertyReport instead of raising, so batch runs can
collect witnesses; failures always carry enough context to reproduce.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .curve import (
    ExtractOptions,
    SegmentKind,
    StaircaseCurve,
    classify_segments,
    evaluate,
    extract_curve,
)
from .resources import (
    Ac,
    AcParams,
    BatteryParams,
    Cluster,
    Ev,
    EvSpec,
    IdealBattery,
    ImperfectBattery,
    PriceSeries,
    ResourceSpec,
    Schedule,
    distinct_prices,
    solve_schedule,
)

__all__ = [
    "PropertyReport",
    "dp_oracle",
    "check_staircase",
    "check_segment_bounds",
    "check_structure",
    "check_scaling_invariance",
    "check_additive_shift",
    "check_vertical_shift",
    "check_complementarity",
    "check_oracle_gap",
    "check_ending_soc_stairs",
    "random_battery_instance",
    "aligned_battery_instance",
    "null_stair_widths",
    "run_suite",
    "SUITE_NAMES",
]

_BIG = 1e15

# label order along increasing price, per the five-segment theorem
_LABEL_ORDER = {
    SegmentKind.FULLY_CHARGE: 0,
    SegmentKind.CHARGE_FOR_CHARGE: 1,
    SegmentKind.CHARGE_FOR_DISCHARGE: 2,
    SegmentKind.DISCHARGE_FOR_CHARGE: 2,
    SegmentKind.NULL: 2,
    SegmentKind.DISCHARGE_FOR_DISCHARGE: 3,
    SegmentKind.FULLY_DISCHARGE: 4,
}


@dataclass
class PropertyReport:
    name: str
    passed: bool
    applicable: bool = True
    witnesses: list = field(default_factory=list)
    observations: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed


def comp_tol(p: BatteryParams) -> float:
    return 1e-7 * min(p.p_dis_max, p.p_chg_max)


def bind_tol(p: BatteryParams) -> float:
    return 1e-6 * (p.e_max - p.e_min)


# ---------------------------------------------------------------------------
# dynamic-programming oracle


def dp_oracle(
    r: ResourceSpec,
    prices: PriceSeries,
    c1: float,
    e_grid: int = 201,
    p_grid: int = 201,
) -> tuple[float, Schedule]:
    """Backward value iteration; the independent yardstick for small LP
    instances (T <= 8). Returns (objective, schedule); objective is total
    cost like the LP.

    Batteries use exact lattice-to-lattice transitions: the action set at a
    state is every power that lands on another state grid point, so there is
    no interpolation error and p_grid is ignored. When the initial energy
    and P*dt are multiples of the grid step, every LP vertex lives on the
    lattice and the gap is float noise. The AC state drifts by a non-unit
    factor, so it keeps a p_grid-point action grid with linear value
    interpolation instead."""
    T = prices.horizon
    if T > 8:
        raise ValueError("dp_oracle is limited to T <= 8")
    c = np.concatenate([[c1], prices.future_prices])
    dt = prices.delta_t
    if isinstance(r, Ac):
        return _dp_ac(r.params, c, dt, e_grid, p_grid)
    if isinstance(r, (IdealBattery, ImperfectBattery)):
        return _dp_battery(r.params, None, c, dt, e_grid, p_grid)
    if isinstance(r, Ev):
        s = r.spec
        params = BatteryParams(0.0, s.capacity, s.e_arrival, s.p_max, s.p_max)
        return _dp_battery(params, s, c, dt, e_grid, p_grid)
    raise ValueError(f"dp_oracle does not support {type(r).__name__}")


def _dp_battery(p: BatteryParams, ev, c, dt, e_grid, p_grid):
    T = len(c)
    states = np.linspace(p.e_min, p.e_max, e_grid)
    keep = 1.0 - p.dissipation
    step = (p.e_max - p.e_min) / max(e_grid - 1, 1)
    ptol = 1e-9 * (1.0 + max(p.p_dis_max, p.p_chg_max))

    def net_power(e_now):
        # power needed to land exactly on each grid state
        q = (keep * e_now - states) / dt
        P = np.where(q > 0, q * p.eta_dis, q / p.eta_chg)
        ok = (P >= -p.p_chg_max - ptol) & (P <= p.p_dis_max + ptol)
        return np.clip(P, -p.p_chg_max, p.p_dis_max), ok

    def active(t):
        return ev is None or ev.first_period <= t <= ev.last_period

    def mask_floor(V, t_state):
        # departure floor applies to the state entering period last+1
        if ev is not None and ev.e_depart_floor > 0 and t_state == ev.last_period + 1:
            return np.where(states >= ev.e_depart_floor - 1e-9, V, -_BIG)
        return V

    V = np.zeros(e_grid)
    if p.ending_soc:
        V = np.where(np.abs(states - p.e_init) <= 0.5 * step + 1e-12, 0.0, -_BIG)
    V = mask_floor(V, T + 1)
    value_at: list[np.ndarray] = [None] * (T + 2)
    value_at[T + 1] = V
    for t in range(T, 0, -1):
        if active(t):
            q = (keep * states[:, None] - states[None, :]) / dt
            P = np.where(q > 0, q * p.eta_dis, q / p.eta_chg)
            ok = (P >= -p.p_chg_max - ptol) & (P <= p.p_dis_max + ptol)
            val = c[t - 1] * P * dt + V[None, :]
            val[~ok] = -_BIG
            V = np.max(val, axis=1)
        else:
            V = V.copy()  # idle hold; EVs have keep == 1
        V = mask_floor(V, t)
        value_at[t] = V

    # forward pass from the exact initial energy
    power = np.zeros(T)
    energy = np.zeros(T + 1)
    energy[0] = p.e_init
    e = p.e_init
    revenue = 0.0
    for t in range(1, T + 1):
        if active(t):
            P, ok = net_power(e)
            val = c[t - 1] * P * dt + value_at[t + 1]
            val[~ok] = -_BIG
            j = int(np.argmax(val))
            if val[j] <= -_BIG / 2:
                raise ValueError("DP grid too coarse to contain a feasible path")
            revenue += c[t - 1] * P[j] * dt
            power[t - 1] = P[j]
            e = float(states[j])
        else:
            e = keep * e
        energy[t] = e
    obj = -revenue
    return obj, Schedule(power, energy, obj, dt)


def _dp_ac(p: AcParams, c, dt, e_grid, p_grid):
    T = len(c)
    states = np.linspace(p.temp_min, p.temp_max, e_grid)
    actions = np.linspace(0.0, p.cooling_power_max, p_grid)
    a = 1.0 - dt / (p.thermal_resistance * p.heat_capacity)
    gain = dt / (p.thermal_resistance * p.heat_capacity)
    cool = dt * p.cop / p.heat_capacity

    V = np.zeros(e_grid)
    value_after: list[np.ndarray] = [None] * (T + 1)
    value_after[T] = V
    for t in range(T, 1, -1):
        nxt = a * states[:, None] + gain * p.ambient[t - 1] - cool * actions[None, :]
        feas = (nxt >= p.temp_min - 1e-9) & (nxt <= p.temp_max + 1e-9)
        cont = np.interp(nxt.ravel(), states, V).reshape(nxt.shape)
        val = -c[t - 1] * (actions[None, :] / 1000.0) * dt + cont
        val[~feas] = -_BIG
        V = np.max(val, axis=1)
        value_after[t - 1] = V

    nxt = a * p.temp_init + gain * p.ambient[0] - cool * actions
    feas = (nxt >= p.temp_min - 1e-9) & (nxt <= p.temp_max + 1e-9)
    val = -c[0] * (actions / 1000.0) * dt + np.interp(nxt, states, V)
    val[~feas] = -_BIG
    best = float(np.max(val))
    if best <= -_BIG / 2:
        raise ValueError("DP grid too coarse to contain a feasible path")

    power = np.zeros(T)
    temp = np.zeros(T + 1)
    temp[0] = p.temp_init
    th = p.temp_init
    for t in range(1, T + 1):
        nxt = a * th + gain * p.ambient[t - 1] - cool * actions
        feas = (nxt >= p.temp_min - 1e-9) & (nxt <= p.temp_max + 1e-9)
        val = -c[t - 1] * (actions / 1000.0) * dt + np.interp(nxt, states, value_after[t])
        val[~feas] = -_BIG
        i = int(np.argmax(val))
        power[t - 1] = -actions[i] / 1000.0
        th = float(nxt[i])
        temp[t] = th
    return -best, Schedule(power, temp, -best, dt)


# ---------------------------------------------------------------------------
# structural checks


def check_staircase(
    curve: StaircaseCurve,
    r: ResourceSpec,
    prices: PriceSeries,
    samples: int = 100,
    seed: int = 0,
) -> PropertyReport:
    """Staircase invariants plus agreement with fresh LP solves at random
    off-breakpoint prices."""
    rep = PropertyReport("staircase", True, tolerances={"level_tol": curve.level_tol})
    if curve.breakpoints.size and np.any(np.diff(curve.breakpoints) <= 0):
        rep.passed = False
        rep.witnesses.append(("breakpoints not strictly increasing", curve.breakpoints))
    gaps = np.diff(curve.levels)
    if np.any(gaps <= curve.level_tol):
        rep.passed = False
        rep.witnesses.append(("levels not increasing beyond level_tol", curve.levels))
    rng = np.random.default_rng(seed)
    lo, hi = curve.sweep_lo, curve.sweep_hi
    tested = 0
    while tested < samples:
        c1 = float(rng.uniform(lo, hi))
        if curve.breakpoints.size and np.min(np.abs(curve.breakpoints - c1)) <= 10 * curve.price_tol:
            continue
        tested += 1
        want = evaluate(curve, c1)
        got = solve_schedule(r, prices, c1).power[0]
        if abs(got - want) > curve.level_tol:
            rep.passed = False
            rep.witnesses.append(("curve/LP mismatch", {"c1": c1, "curve": want, "lp": got}))
    return rep


def check_segment_bounds(curve: StaircaseCurve, r: ResourceSpec) -> PropertyReport:
    """Level-count bounds: <= 5 for an ideal battery, <= 9 for an imperfect
    one; charge-for-discharge and discharge-for-charge are mutually
    exclusive on ideal curves, and labels appear in the theorem's order."""
    if isinstance(r, IdealBattery):
        bound = 5
    elif isinstance(r, ImperfectBattery):
        bound = 9
    else:
        return PropertyReport("segment_bounds", True, applicable=False)
    rep = PropertyReport("segment_bounds", True, tolerances={"max_levels": bound})
    if curve.num_levels > bound:
        rep.passed = False
        rep.witnesses.append(("too many levels", curve.levels))
    kinds = [l.kind for l in curve.labels]
    if isinstance(r, IdealBattery):
        if SegmentKind.CHARGE_FOR_DISCHARGE in kinds and SegmentKind.DISCHARGE_FOR_CHARGE in kinds:
            rep.passed = False
            rep.witnesses.append(("charge-for-discharge and discharge-for-charge co-occur", kinds))
    ranks = [_LABEL_ORDER[k] for k in kinds if k in _LABEL_ORDER]
    if any(b < a for a, b in zip(ranks, ranks[1:])):
        rep.passed = False
        rep.witnesses.append(("labels out of theorem order", [k.value for k in kinds]))
    return rep


def check_structure(
    sched: Schedule,
    r: ResourceSpec,
    prices: PriceSeries,
    c1: float,
) -> PropertyReport:
    """Schedule-structure lemma T_B - n_c - n_d <= 1 plus the dual-threshold
    cross-check: before T_B, prices above the threshold fully discharge and
    prices below it fully charge."""
    rep = PropertyReport("structure", True)
    if not isinstance(r, IdealBattery):
        rep.applicable = False
        return rep
    if sched.t_bind is None:
        rep.observations.append("no binding energy bound; lemma vacuous")
        return rep
    slack = sched.t_bind - sched.n_c - sched.n_d
    rep.tolerances["max_slack"] = 1
    if slack > 1:
        rep.passed = False
        rep.witnesses.append(
            ("T_B - n_c - n_d > 1", {"t_bind": sched.t_bind, "n_c": sched.n_c, "n_d": sched.n_d, "c1": c1})
        )
    ctilde = sched.threshold_price
    if ctilde is not None:
        full = distinct_prices(np.concatenate([[c1], prices.future_prices]))
        p = r.params
        ptol = 1e-6 * (1.0 + p.p_dis_max)
        ctol = 1e-6 * (1.0 + abs(ctilde))
        for t in range(sched.t_bind):
            if full[t] > ctilde + ctol and sched.power[t] < p.p_dis_max - ptol:
                rep.passed = False
                rep.witnesses.append(("price above threshold but not fully discharging", {"t": t + 1, "c_t": full[t], "threshold": ctilde, "P_t": sched.power[t]}))
            if full[t] < ctilde - ctol and sched.power[t] > -p.p_chg_max + ptol:
                rep.passed = False
                rep.witnesses.append(("price below threshold but not fully charging", {"t": t + 1, "c_t": full[t], "threshold": ctilde, "P_t": sched.power[t]}))
    return rep


def check_complementarity(sched: Schedule, prices: PriceSeries, c1: float, p: BatteryParams) -> PropertyReport:
    """min(Pd_t, Pc_t) <= comp_tol whenever all prices are positive (the
    relaxation-exactness theorem's regime); otherwise not applicable."""
    rep = PropertyReport("complementarity", True, tolerances={"comp_tol": comp_tol(p)})
    full = np.concatenate([[c1], prices.future_prices])
    if np.any(full <= 0):
        rep.applicable = False
        rep.observations.append("non-positive price present; theorem precondition unmet")
        return rep
    if sched.comp_violation > comp_tol(p):
        rep.passed = False
        rep.witnesses.append(("simultaneous charge and discharge", {"violation": sched.comp_violation, "c1": c1}))
    return rep


# ---------------------------------------------------------------------------
# sensitivity checks


def _extract_tight(r, prices, price_tol_scale=2e-7):
    opts = ExtractOptions(price_tol=price_tol_scale)
    return extract_curve(r, prices, opts)


def _scale_series(prices: PriceSeries, k: float) -> PriceSeries:
    return PriceSeries(prices.delta_t, tuple(k * f for f in prices.future_prices), prices.currency)


def _shift_series(prices: PriceSeries, a: float) -> PriceSeries:
    return PriceSeries(prices.delta_t, tuple(f + a for f in prices.future_prices), prices.currency)


def check_scaling_invariance(r: ResourceSpec, prices: PriceSeries, k: float) -> PropertyReport:
    """Scaling every price (axis included) by k > 0 scales the breakpoints
    by k and leaves the levels unchanged."""
    if k <= 0:
        raise ValueError("k must be positive")
    base = _extract_tight(r, prices)
    scaled = _extract_tight(r, _scale_series(prices, k))
    rep = PropertyReport("scaling_invariance", True, tolerances={"rel_tol": 1e-6})
    if base.num_levels != scaled.num_levels:
        rep.passed = False
        rep.witnesses.append(("level count changed", {"base": base.levels, "scaled": scaled.levels, "k": k}))
        return rep
    if np.any(np.abs(base.levels - scaled.levels) > base.level_tol + scaled.level_tol):
        rep.passed = False
        rep.witnesses.append(("levels changed", {"base": base.levels, "scaled": scaled.levels, "k": k}))
    want = k * base.breakpoints
    err = np.abs(scaled.breakpoints - want)
    tol = 1e-6 * (1.0 + np.abs(want))
    if np.any(err > tol):
        rep.passed = False
        rep.witnesses.append(("breakpoints did not scale", {"want": want, "got": scaled.breakpoints, "k": k}))
    return rep


def check_additive_shift(r: ResourceSpec, prices: PriceSeries, a: float) -> PropertyReport:
    """With the ending-SOC constraint active the net traded energy is zero,
    so adding a to every price shifts the curve right by exactly a."""
    if not isinstance(r, IdealBattery) or not r.params.ending_soc:
        raise ValueError("additive shift is exact only for ideal batteries with ending_soc on")
    base = _extract_tight(r, prices)
    shifted = _extract_tight(r, _shift_series(prices, a))
    rep = PropertyReport("additive_shift", True, tolerances={"rel_tol": 1e-6})
    if base.num_levels != shifted.num_levels:
        rep.passed = False
        rep.witnesses.append(("level count changed", {"base": base.levels, "shifted": shifted.levels, "a": a}))
        return rep
    if np.any(np.abs(base.levels - shifted.levels) > base.level_tol + shifted.level_tol):
        rep.passed = False
        rep.witnesses.append(("levels changed", {"base": base.levels, "shifted": shifted.levels, "a": a}))
    want = base.breakpoints + a
    err = np.abs(shifted.breakpoints - want)
    tol = 1e-6 * (1.0 + np.abs(want))
    if np.any(err > tol):
        rep.passed = False
        rep.witnesses.append(("breakpoints did not shift", {"want": want, "got": shifted.breakpoints, "a": a}))
    return rep


def check_vertical_shift(r: ResourceSpec, prices: PriceSeries, delta: float) -> PropertyReport:
    """Initial-SOC perturbation moves the curve vertically along the maximal
    monotone path (stairs plus risers): every sampled point on the old path
    admits a vertical offset onto the new one, and where Delta-n and the
    terminal bound persist, interior levels shift by exactly delta/dt."""
    if not isinstance(r, IdealBattery):
        raise ValueError("vertical-shift check applies to ideal batteries")
    p = r.params
    new_init = p.e_init + delta
    if not (p.e_min <= new_init <= p.e_max):
        raise ValueError("delta pushes the initial energy outside its bounds")
    r_new = IdealBattery(replace(p, e_init=new_init))
    base = classify_segments(_extract_tight(r, prices), r, prices)
    moved = classify_segments(_extract_tight(r_new, prices), r_new, prices)
    rep = PropertyReport("vertical_shift", True, tolerances={"level_tol": base.level_tol, "strong_tol": 1e-6})

    # existence of beta: the new monotone path spans every price, so record
    # the per-stair offsets
    offsets = []
    for i in range(base.num_levels):
        c_mid = base.stair_midpoint(i)
        val = evaluate(moved, c_mid)
        if isinstance(val, tuple):
            lo, hi = val
            beta = min(max(base.levels[i], lo), hi) - base.levels[i]
        else:
            beta = val - base.levels[i]
        if not np.isfinite(beta):
            rep.passed = False
            rep.witnesses.append(("no finite vertical offset", {"c1": c_mid}))
        offsets.append(float(beta))
    rep.observations.append({"per_level_offsets": offsets})

    # strong diagnostic for small perturbations only
    dt = prices.delta_t
    if abs(delta) <= 0.1 * p.p_dis_max * dt:
        def interior(curve):
            out = {}
            for lv, lab in zip(curve.levels, curve.labels):
                if lab.kind in (
                    SegmentKind.CHARGE_FOR_CHARGE,
                    SegmentKind.CHARGE_FOR_DISCHARGE,
                    SegmentKind.DISCHARGE_FOR_CHARGE,
                    SegmentKind.DISCHARGE_FOR_DISCHARGE,
                ):
                    out[(lab.terminal_bound, lab.delta_n)] = float(lv)
            return out

        old_int = interior(base)
        new_int = interior(moved)
        for key, lv in old_int.items():
            if key in new_int:
                got = new_int[key] - lv
                if abs(got - delta / dt) > 1e-6:
                    rep.passed = False
                    rep.witnesses.append(
                        ("interior level did not shift by delta/dt", {"key": key, "shift": got, "expected": delta / dt})
                    )
            else:
                rep.observations.append(f"stair {key} changed Delta-n or terminal bound; strong check skipped")
    return rep


# ---------------------------------------------------------------------------
# random instances and empirical observations


def random_battery_instance(
    rng: np.random.Generator,
    lossy: bool = False,
    ending_soc: bool = False,
    max_horizon: int = 24,
    negative: str | None = None,  # None | "all" | "single"
):
    """Seeded random instance: T in {3..max_horizon}, prices uniform in
    [10, 100], capacity and power log-uniform within two decades."""
    T = int(rng.integers(3, max_horizon + 1))
    fut = rng.uniform(10.0, 100.0, T - 1)
    if negative == "all":
        fut = -fut
    elif negative == "single" and T > 1:
        fut[int(rng.integers(0, T - 1))] *= -1.0
    cap = 10.0 ** rng.uniform(-0.5, 1.5)
    pmax = cap * 10.0 ** rng.uniform(-1.0, 0.0)
    e_min = cap * rng.uniform(0.0, 0.2)
    e_init = rng.uniform(e_min, cap)
    if lossy:
        params = BatteryParams(
            e_min, cap, e_init, pmax, pmax,
            eta_dis=float(rng.uniform(0.8, 1.0)),
            eta_chg=float(rng.uniform(0.8, 1.0)),
            ending_soc=ending_soc,
        )
        resource: ResourceSpec = ImperfectBattery(params)
    else:
        params = BatteryParams(e_min, cap, e_init, pmax, pmax, ending_soc=ending_soc)
        resource = IdealBattery(params)
    return resource, PriceSeries(1.0, tuple(fut))


def null_stair_widths(p: BatteryParams, prices: PriceSeries, efficiencies=(1.0, 0.98, 0.9)) -> dict[float, float]:
    """Width of the zero-power stair for each round-trip efficiency setting
    on one fixed instance; empirically it widens as efficiency falls, but
    that is an observation, not a proved property."""
    widths = {}
    for eta in efficiencies:
        params = replace(p, eta_dis=eta, eta_chg=eta)
        r = ImperfectBattery(params) if eta < 1.0 else IdealBattery(params)
        curve = extract_curve(r, prices)
        width = 0.0
        for i, lv in enumerate(curve.levels):
            if abs(lv) <= curve.level_tol and 0 < i <= curve.breakpoints.size:
                lo = curve.breakpoints[i - 1]
                hi = curve.breakpoints[i] if i < curve.breakpoints.size else curve.sweep_hi
                width = float(hi - lo)
        widths[eta] = width
    return widths


def check_oracle_gap(r: ResourceSpec, prices: PriceSeries, c1: float) -> PropertyReport:
    """|LP - DP| objective gap halves (or is already <= 1e-6) when the DP
    grids double from 201 to 401 points."""
    rep = PropertyReport("oracle_gap", True, tolerances={"abs_tol": 1e-6, "ratio": 0.5})
    lp = solve_schedule(r, prices, c1).objective
    coarse, _ = dp_oracle(r, prices, c1, 201, 201)
    fine, _ = dp_oracle(r, prices, c1, 401, 401)
    g1, g2 = abs(coarse - lp), abs(fine - lp)
    rep.observations.append({"gap_201": g1, "gap_401": g2, "c1": c1})
    if g2 > 1e-6 and g2 > 0.5 * g1 + 1e-12:
        rep.passed = False
        rep.witnesses.append(("gap neither tiny nor halved", {"gap_201": g1, "gap_401": g2, "c1": c1}))
    return rep


def check_ending_soc_stairs(r: IdealBattery, prices: PriceSeries) -> PropertyReport:
    """Turning the ending-SOC constraint on adds at most two stairs."""
    if not isinstance(r, IdealBattery):
        raise ValueError("ending-SOC stair count check applies to ideal batteries")
    without = extract_curve(IdealBattery(replace(r.params, ending_soc=False)), prices)
    with_ = extract_curve(IdealBattery(replace(r.params, ending_soc=True)), prices)
    rep = PropertyReport("ending_soc_stairs", True, tolerances={"max_extra": 2})
    rep.observations.append({"without": without.num_levels, "with": with_.num_levels})
    if with_.num_levels > without.num_levels + 2:
        rep.passed = False
        rep.witnesses.append(("more than two extra stairs", {"without": without.num_levels, "with": with_.num_levels}))
    return rep


def aligned_battery_instance(rng: np.random.Generator, max_horizon: int = 6):
    """Random ideal battery whose initial energy and P*dt are multiples of
    the 201-point grid step, so every LP vertex lies on the DP lattice."""
    T = int(rng.integers(3, max_horizon + 1))
    cap = float(rng.integers(4, 40))
    step = cap / 200.0
    pmax = step * int(rng.integers(20, 201))
    e_init = step * int(rng.integers(0, 201))
    fut = tuple(rng.uniform(10.0, 100.0, T - 1))
    return IdealBattery(BatteryParams(0.0, cap, e_init, pmax, pmax)), PriceSeries(1.0, fut)


# ---------------------------------------------------------------------------
# suites

SUITE_NAMES = ("ideal", "imperfect", "negative", "shift", "oracle")


def _curve_checks(r, prices, seed, samples):
    curve = classify_segments(extract_curve(r, prices), r, prices)
    return curve, [
        check_staircase(curve, r, prices, samples=samples, seed=seed),
        check_segment_bounds(curve, r),
    ]


def _ideal_task(r, prices, c1, seed):
    try:
        _, reps = _curve_checks(r, prices, seed, samples=20)
        reps.append(check_structure(solve_schedule(r, prices, c1), r, prices, c1))
        return reps
    except Exception as e:
        return [PropertyReport("ideal_instance", False, witnesses=[(type(e).__name__, str(e))])]


def _imperfect_task(r, prices, c1, seed):
    try:
        _, reps = _curve_checks(r, prices, seed, samples=10)
        sched = solve_schedule(r, prices, c1)
        reps.append(check_complementarity(sched, prices, c1, r.params))
        return reps
    except Exception as e:
        return [PropertyReport("imperfect_instance", False, witnesses=[(type(e).__name__, str(e))])]


def _negative_task(r, prices, seed):
    try:
        _, reps = _curve_checks(r, prices, seed, samples=10)
        return reps
    except Exception as e:
        return [PropertyReport("negative_instance", False, witnesses=[(type(e).__name__, str(e))])]


def _shift_task(r, prices, seed):
    try:
        reps = [
            check_scaling_invariance(r, prices, 0.5),
            check_scaling_invariance(r, prices, 2.0),
        ]
        r_end = IdealBattery(replace(r.params, ending_soc=True))
        for a in (-100.0, 7.0):
            reps.append(check_additive_shift(r_end, prices, a))
        p = r.params
        for sign in (1.0, -1.0):
            head = p.e_max - p.e_init if sign > 0 else p.e_init - p.e_min
            delta = sign * min(0.1, 0.5 * head)
            if abs(delta) > 1e-9:
                reps.append(check_vertical_shift(r, prices, delta))
        reps.append(check_ending_soc_stairs(r, prices))
        return reps
    except Exception as e:
        return [PropertyReport("shift_instance", False, witnesses=[(type(e).__name__, str(e))])]


def _oracle_task(r, prices, c1):
    try:
        return [check_oracle_gap(r, prices, c1)]
    except Exception as e:
        return [PropertyReport("oracle_instance", False, witnesses=[(type(e).__name__, str(e))])]


def _oracle_fixture_ac():
    # ambient inside the comfort band: zero cooling is optimal everywhere
    ac = Ac(AcParams(
        thermal_resistance=10.0, heat_capacity=5.0, cooling_power_max=7.0,
        cop=3.0, temp_init=24.0, temp_min=22.0, temp_max=26.0,
        ambient=(24.0,) * 6,
    ))
    return ac, PriceSeries(1.0, tuple(np.linspace(40.0, 90.0, 5))), 55.0


def _oracle_fixture_ev():
    # grid-aligned window instance: capacity and floor are lattice multiples
    ev = Ev(EvSpec(capacity=40.0, p_max=10.0, first_period=2, last_period=5,
                   e_arrival=10.0, e_depart_floor=32.0,
                   arrival_hour=1.0, departure_hour=5.0))
    return ev, PriceSeries(1.0, (80.0, 30.0, 60.0, 20.0, 90.0)), 50.0


def run_suite(
    name: str,
    instances: int = 20,
    seed: int = 0,
    resource: ResourceSpec | None = None,
    prices: PriceSeries | None = None,
) -> list[PropertyReport]:
    """Run one named verification batch over seeded random instances; the
    optional resource/prices add fixed-instance checks. BIDCURVE_THREADS
    caps worker parallelism (instances are generated sequentially first, so
    results do not depend on the thread count)."""
    if name == "all":
        out = []
        for n in SUITE_NAMES:
            out.extend(run_suite(n, instances, seed, resource, prices))
        return out
    if name not in SUITE_NAMES:
        raise ValueError(f"unknown suite '{name}'")
    rng = np.random.default_rng(seed)
    tasks = []

    if name == "ideal":
        for i in range(instances):
            r, pr = random_battery_instance(rng)
            c1 = float(rng.uniform(10.0, 100.0))
            tasks.append(partial(_ideal_task, r, pr, c1, seed + i))
    elif name == "imperfect":
        for i in range(instances):
            r, pr = random_battery_instance(rng, lossy=True)
            c1 = float(rng.uniform(10.0, 100.0))
            tasks.append(partial(_imperfect_task, r, pr, c1, seed + i))
    elif name == "negative":
        for i in range(instances):
            for mode in ("all", "single"):
                r, pr = random_battery_instance(rng, negative=mode)
                tasks.append(partial(_negative_task, r, pr, seed + i))
        if resource is not None and prices is not None and isinstance(resource, (IdealBattery, ImperfectBattery)):
            neg_all = PriceSeries(prices.delta_t, tuple(-f for f in prices.future_prices), prices.currency)
            tasks.append(partial(_negative_task, resource, neg_all, seed))
            fut = list(prices.future_prices)
            if fut:
                fut[int(rng.integers(0, len(fut)))] *= -1.0
                tasks.append(partial(_negative_task, resource, PriceSeries(prices.delta_t, tuple(fut), prices.currency), seed))
    elif name == "shift":
        for i in range(instances):
            r, pr = random_battery_instance(rng)
            tasks.append(partial(_shift_task, r, pr, seed + i))
        if isinstance(resource, IdealBattery) and prices is not None:
            tasks.append(partial(_shift_task, resource, prices, seed))
    elif name == "oracle":
        n_random = max(instances - 2, 0)
        for i in range(n_random):
            r, pr = aligned_battery_instance(rng)
            c1 = float(rng.uniform(10.0, 100.0))
            tasks.append(partial(_oracle_task, r, pr, c1))
        tasks.append(partial(_oracle_task, *_oracle_fixture_ac()))
        tasks.append(partial(_oracle_task, *_oracle_fixture_ev()))

    reports: list[PropertyReport] = []
    workers = int(os.environ.get("BIDCURVE_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for reps in pool.map(lambda t: t(), tasks):
                reports.extend(reps)
    else:
        for t in tasks:
            reports.extend(t())

    if name == "imperfect" and prices is not None:
        base = resource.params if isinstance(resource, (IdealBattery, ImperfectBattery)) else BatteryParams(0.2, 2.0, 1.0, 0.6, 0.6)
        widths = null_stair_widths(base, prices)
        rep = PropertyReport("null_stair", True)
        rep.observations.append({"widths_by_efficiency": widths})
        if not (widths[0.9] > 0 and widths[0.98] > 0):
            rep.passed = False
            rep.witnesses.append(("no null stair at eta < 1", widths))
        if not (widths[0.9] >= widths[0.98] >= widths[1.0]):
            rep.observations.append("null stair width not monotone in efficiency on this instance")
        reports.append(rep)
    return reports
