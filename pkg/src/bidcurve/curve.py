"""Staircase demand-supply curve extraction, classification and aggregation.

The bid curve P1 = f(c1) of any supported resource is a monotone
non-decreasing staircase, so breakpoints are located by bisection between
grid samples instead of parametric pivoting.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .resources import (
    Ac,
    Cluster,
    Ev,
    IdealBattery,
    ImperfectBattery,
    PriceSeries,
    ResourceLp,
    ResourceSpec,
    Schedule,
    distinct_prices,
    lp_template,
    solve_schedule,
)
from .simplex import SolverOptions, SolverStatus, solve

__all__ = [
    "SegmentKind",
    "SegmentLabel",
    "StaircaseCurve",
    "ExtractOptions",
    "MonotonicityError",
    "extract_curve",
    "classify_segments",
    "aggregate",
    "evaluate",
]


class MonotonicityError(RuntimeError):
    """Samples decreased with price: the staircase lemma was violated,
    which indicates a solver bug, not a property of the resource."""


class SegmentKind(enum.Enum):
    FULLY_CHARGE = "fully_charge"
    CHARGE_FOR_CHARGE = "charge_for_charge"
    CHARGE_FOR_DISCHARGE = "charge_for_discharge"
    DISCHARGE_FOR_CHARGE = "discharge_for_charge"
    DISCHARGE_FOR_DISCHARGE = "discharge_for_discharge"
    FULLY_DISCHARGE = "fully_discharge"
    NULL = "null"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class SegmentLabel:
    kind: SegmentKind
    t_bind: int | None = None
    delta_n: int | None = None  # n_d - n_c over periods 1..T_B
    terminal_bound: str | None = None  # "upper" | "lower" | "ending_soc"
    n_c_hours: float | None = None  # (e_max - e_init)/(p_chg*dt)
    n_d_hours: float | None = None  # (e_init - e_min)/(p_dis*dt)


@dataclass
class StaircaseCurve:
    """P1 = f(c1): level[i] applies on the open interval
    (breakpoints[i-1], breakpoints[i]) with sentinels -inf/+inf."""

    breakpoints: np.ndarray  # strictly increasing, length k
    levels: np.ndarray  # non-decreasing, length k+1 (MW)
    labels: list[SegmentLabel] = field(default_factory=list)
    saturated_low: bool = True
    saturated_high: bool = True
    resource_id: str = ""
    sweep_lo: float = 0.0
    sweep_hi: float = 0.0
    price_tol: float = 0.0
    level_tol: float = 0.0

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=float)
        self.levels = np.asarray(self.levels, dtype=float)
        if self.levels.shape[0] != self.breakpoints.shape[0] + 1:
            raise ValueError("levels must have exactly one more entry than breakpoints")
        if self.breakpoints.size and np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not self.labels:
            self.labels = [SegmentLabel(SegmentKind.UNCLASSIFIED) for _ in self.levels]

    @property
    def num_levels(self) -> int:
        return self.levels.shape[0]

    def stair_midpoint(self, i: int) -> float:
        """A price well inside stair i (extreme stairs use a unit offset)."""
        lo = self.breakpoints[i - 1] if i > 0 else None
        hi = self.breakpoints[i] if i < len(self.breakpoints) else None
        if lo is None and hi is None:
            return 0.0
        if lo is None:
            return hi - max(1.0, self.price_tol * 10)
        if hi is None:
            return lo + max(1.0, self.price_tol * 10)
        return 0.5 * (lo + hi)


@dataclass
class ExtractOptions:
    init_samples: int = 64
    price_tol: float | None = None  # default 1e-6*(1+|c_hi|)
    level_tol: float | None = None  # default 1e-6*(1+max |level| scale)
    max_doublings: int = 60


class _P1Sampler:
    """Memoized P1*(c1) evaluations sharing one LP template and warm basis."""

    def __init__(self, r: ResourceSpec, prices: PriceSeries):
        self.resource = r
        self.prices = prices
        full0 = np.concatenate([[0.0], prices.future_prices])
        pert = distinct_prices(full0)
        # duplicates among future prices are perturbed once for the whole
        # sweep; c1 itself stays exact (it is the sweep coordinate)
        if np.array_equal(pert[1:], full0[1:]):
            series = prices
        else:
            series = PriceSeries(prices.delta_t, tuple(pert[1:]), prices.currency)
        self.template: ResourceLp = lp_template(r, series)
        self.cache: dict[float, float] = {}
        self.warm_basis = None
        self.warm_at_upper = None
        self.solves = 0

    def __call__(self, c1: float) -> float:
        if c1 in self.cache:
            return self.cache[c1]
        lp = self.template.instantiate(c1)
        opts = SolverOptions(warm_basis=self.warm_basis, warm_at_upper=self.warm_at_upper)
        sol = solve(lp, opts)
        if sol.status is not SolverStatus.OPTIMAL:
            raise RuntimeError(f"solver returned {sol.status.value} at c1={c1}")
        self.solves += 1
        self.warm_basis = sol.basis
        self.warm_at_upper = sol.at_upper
        p1 = self._first_period_power(sol.primal)
        self.cache[c1] = p1
        return p1

    def _first_period_power(self, x: np.ndarray) -> float:
        tmpl = self.template
        T = tmpl.horizon
        if tmpl.kind == "cluster":
            total = 0.0
            for mem, off in zip(tmpl.members, tmpl.offsets):
                total += _first_period_power_of(mem, x[off : off + mem.lp0.num_vars])
            return total
        return _first_period_power_of(tmpl, x)

    def extreme_powers(self) -> tuple[float, float]:
        """Min and max feasible first-period net power, via two auxiliary LPs."""
        from dataclasses import replace as _replace

        p1_vec = -self.template.c1_gradient / self.template.delta_t
        lo_hi = []
        for sign in (1.0, -1.0):
            lp = _replace(self.template.lp0, objective=sign * p1_vec)
            sol = solve(lp)
            if sol.status is not SolverStatus.OPTIMAL:
                raise RuntimeError(f"extreme-power LP returned {sol.status.value}")
            lo_hi.append(self._first_period_power(sol.primal))
        return lo_hi[0], lo_hi[1]


def _first_period_power_of(tmpl: ResourceLp, x: np.ndarray) -> float:
    T = tmpl.horizon
    if tmpl.kind == "battery_split":
        return float(x[0] - x[T])
    if tmpl.kind == "ac":
        return float(-x[0] / 1000.0)
    return float(x[0])


def _default_level_tol(r: ResourceSpec) -> float:
    return 1e-6 * (1.0 + _max_power(r))


def _max_power(r: ResourceSpec) -> float:
    if isinstance(r, (IdealBattery, ImperfectBattery)):
        return max(r.params.p_dis_max, r.params.p_chg_max)
    if isinstance(r, Ac):
        return r.params.cooling_power_max / 1000.0
    if isinstance(r, Ev):
        return r.spec.p_max
    if isinstance(r, Cluster):
        return sum(_max_power(m) for m in r.members)
    raise TypeError(type(r))


def extract_curve(
    r: ResourceSpec,
    prices: PriceSeries,
    opts: ExtractOptions | None = None,
) -> StaircaseCurve:
    """Adaptive breakpoint search over c1.

    Sweep range starts at [min future price - S, max future price + S] with
    S = max(1, price span), extends geometrically until both ends saturate,
    samples a uniform grid, then bisects every level change down to
    price_tol. Stairs narrower than 2*price_tol may be missed (documented
    resolution limit)."""
    opts = opts or ExtractOptions()
    sampler = _P1Sampler(r, prices)
    fut = np.asarray(prices.future_prices, dtype=float)
    if fut.size:
        span = float(np.max(fut) - np.min(fut))
        base_lo, base_hi = float(np.min(fut)), float(np.max(fut))
    else:
        span, base_lo, base_hi = 0.0, 0.0, 0.0
    S = max(1.0, span)
    c_lo, c_hi = base_lo - S, base_hi + S

    level_tol = opts.level_tol if opts.level_tol is not None else _default_level_tol(r)

    # saturate both ends: extend geometrically until the sampled level
    # reaches the extreme feasible first-period power at that end
    p1_min, p1_max = sampler.extreme_powers()
    step = S
    sat_lo = False
    for _ in range(opts.max_doublings):
        if sampler(c_lo) <= p1_min + level_tol:
            sat_lo = True
            break
        c_lo -= step
        step *= 2.0
    step = S
    sat_hi = False
    for _ in range(opts.max_doublings):
        if sampler(c_hi) >= p1_max - level_tol:
            sat_hi = True
            break
        c_hi += step
        step *= 2.0

    price_tol = opts.price_tol if opts.price_tol is not None else 1e-6 * (1.0 + abs(c_hi))

    grid = np.linspace(c_lo, c_hi, max(opts.init_samples, 2))
    samples: list[tuple[float, float]] = [(float(c), sampler(float(c))) for c in grid]

    _check_monotone(samples, level_tol)

    def refine(a: float, fa: float, b: float, fb: float):
        # recursive bisection; a monotone staircase guarantees every stair
        # wider than the bracket resolution shows up at some midpoint
        if abs(fb - fa) <= level_tol or (b - a) <= price_tol:
            return
        m = 0.5 * (a + b)
        fm = sampler(m)
        if fm < fa - 10 * level_tol or fb < fm - 10 * level_tol:
            raise MonotonicityError(
                f"P1 decreased with price near c1={m}: {fa} -> {fm} -> {fb}"
            )
        refine(a, fa, m, fm)
        refine(m, fm, b, fb)

    for (a, fa), (b, fb) in zip(samples, samples[1:]):
        refine(a, fa, b, fb)
    all_pts = sorted(sampler.cache.items())

    # cluster consecutive samples into stairs
    levels: list[list[float]] = [[all_pts[0][1]]]
    cut_pairs: list[tuple[float, float]] = []
    for (c_prev, p_prev), (c, p) in zip(all_pts, all_pts[1:]):
        if abs(p - np.median(levels[-1])) <= level_tol:
            levels[-1].append(p)
        else:
            levels.append([p])
            cut_pairs.append((c_prev, c))
    level_vals = np.array([float(np.median(g)) for g in levels])
    breakpoints = np.array([0.5 * (a + b) for a, b in cut_pairs])

    # merge any residual near-equal adjacent levels
    keep_levels = [level_vals[0]]
    keep_bps: list[float] = []
    for bp, lv in zip(breakpoints, level_vals[1:]):
        if lv - keep_levels[-1] > level_tol:
            keep_levels.append(lv)
            keep_bps.append(bp)
        else:
            keep_levels[-1] = max(keep_levels[-1], lv)

    return StaircaseCurve(
        breakpoints=np.array(keep_bps),
        levels=np.array(keep_levels),
        saturated_low=sat_lo,
        saturated_high=sat_hi,
        resource_id=type(r).__name__,
        sweep_lo=c_lo,
        sweep_hi=c_hi,
        price_tol=price_tol,
        level_tol=level_tol,
    )


def _check_monotone(samples: list[tuple[float, float]], level_tol: float):
    for (a, fa), (b, fb) in zip(samples, samples[1:]):
        if fb < fa - 10 * level_tol:
            raise MonotonicityError(f"P1 decreased from {fa} at c1={a} to {fb} at c1={b}")


def classify_segments(
    curve: StaircaseCurve,
    r: ResourceSpec,
    prices: PriceSeries,
) -> StaircaseCurve:
    """Label each stair against the physical taxonomy.

    Interior battery stairs are re-solved at the stair midpoint and matched
    against (E1 - E_{T_B+1})/dt - (n_d - n_c)*Pbar; levels matching no
    formula stay UNCLASSIFIED (expected for lossy batteries, whose stairs
    may diverge). AC/EV stairs are labeled only at the extremes and zero."""
    is_battery = isinstance(r, (IdealBattery, ImperfectBattery))
    labels: list[SegmentLabel] = []
    if is_battery:
        p = r.params
        dt = prices.delta_t
        n_c_hours = (p.e_max - p.e_init) / (p.p_chg_max * dt)
        n_d_hours = (p.e_init - p.e_min) / (p.p_dis_max * dt)
    for i, level in enumerate(curve.levels):
        mid = curve.stair_midpoint(i)
        if is_battery:
            if abs(level + p.p_chg_max) <= curve.level_tol:
                labels.append(SegmentLabel(SegmentKind.FULLY_CHARGE, n_c_hours=n_c_hours, n_d_hours=n_d_hours))
                continue
            if abs(level - p.p_dis_max) <= curve.level_tol:
                labels.append(SegmentLabel(SegmentKind.FULLY_DISCHARGE, n_c_hours=n_c_hours, n_d_hours=n_d_hours))
                continue
            if isinstance(r, ImperfectBattery) and abs(level) <= curve.level_tol:
                labels.append(SegmentLabel(SegmentKind.NULL, n_c_hours=n_c_hours, n_d_hours=n_d_hours))
                continue
            sched = solve_schedule(r, prices, mid)
            labels.append(_match_battery_stair(level, sched, p, dt, curve.level_tol, n_c_hours, n_d_hours))
        else:
            max_p = _max_power(r)
            if abs(level) <= curve.level_tol:
                labels.append(SegmentLabel(SegmentKind.NULL))
            elif abs(level + max_p) <= curve.level_tol:
                labels.append(SegmentLabel(SegmentKind.FULLY_CHARGE))
            elif abs(level - max_p) <= curve.level_tol:
                labels.append(SegmentLabel(SegmentKind.FULLY_DISCHARGE))
            else:
                labels.append(SegmentLabel(SegmentKind.UNCLASSIFIED))
    curve.labels = labels
    return curve


def _match_battery_stair(level, sched: Schedule, p, dt, level_tol, n_c_hours, n_d_hours) -> SegmentLabel:
    if sched.t_bind is None or sched.terminal_bound is None:
        return SegmentLabel(SegmentKind.UNCLASSIFIED)
    delta_n = sched.n_d - sched.n_c
    bound_energy = {
        "upper": p.e_max,
        "lower": p.e_min,
        "ending_soc": p.e_init,
    }[sched.terminal_bound]
    pbar = max(p.p_dis_max, p.p_chg_max)
    predicted = (p.e_init - bound_energy) / dt - delta_n * pbar
    ctx = dict(
        t_bind=sched.t_bind, delta_n=delta_n, terminal_bound=sched.terminal_bound,
        n_c_hours=n_c_hours, n_d_hours=n_d_hours,
    )
    if abs(level - predicted) > level_tol:
        return SegmentLabel(SegmentKind.UNCLASSIFIED, **ctx)
    # a zero level counts as (degenerate) discharging, not charging
    charging = level < -level_tol
    if sched.terminal_bound == "upper":
        kind = SegmentKind.CHARGE_FOR_CHARGE if charging else SegmentKind.DISCHARGE_FOR_CHARGE
    elif sched.terminal_bound == "lower":
        kind = SegmentKind.CHARGE_FOR_DISCHARGE if charging else SegmentKind.DISCHARGE_FOR_DISCHARGE
    else:
        kind = SegmentKind.UNCLASSIFIED  # ending-SOC stairs sit outside the taxonomy
    return SegmentLabel(kind, **ctx)


def evaluate(curve: StaircaseCurve, c1: float):
    """Level at c1, or the closed range [L_{i-1}, L_i] within price_tol of a
    breakpoint (the LP optimum is non-unique there)."""
    bps = curve.breakpoints
    for i, b in enumerate(bps):
        if abs(c1 - b) <= curve.price_tol:
            return (float(curve.levels[i]), float(curve.levels[i + 1]))
    i = int(np.searchsorted(bps, c1))
    return float(curve.levels[i])


def aggregate(curves: list[StaircaseCurve]) -> StaircaseCurve:
    """Cluster curve: sorted union of breakpoints, member levels summed on
    each interval. Monotone by construction; labels left unclassified."""
    if not curves:
        raise ValueError("aggregate requires at least one curve")
    price_tol = max(c.price_tol for c in curves)
    level_tol = max(c.level_tol for c in curves)
    union: list[float] = []
    for c in curves:
        union.extend(c.breakpoints.tolist())
    union.sort()
    dedup: list[float] = []
    for b in union:
        if not dedup or b - dedup[-1] > price_tol:
            dedup.append(b)

    def level_at(curve: StaircaseCurve, x: float) -> float:
        return float(curve.levels[int(np.searchsorted(curve.breakpoints, x))])

    points = [dedup[0] - 1.0] if dedup else [0.0]
    points += [0.5 * (a + b) for a, b in zip(dedup, dedup[1:])]
    if dedup:
        points.append(dedup[-1] + 1.0)
    sums = np.array([sum(level_at(c, x) for c in curves) for x in points])

    # merge intervals whose summed levels coincide
    keep_levels = [sums[0]]
    keep_bps: list[float] = []
    for bp, lv in zip(dedup, sums[1:]):
        if lv - keep_levels[-1] > level_tol:
            keep_levels.append(lv)
            keep_bps.append(bp)
    return StaircaseCurve(
        breakpoints=np.array(keep_bps),
        levels=np.array(keep_levels),
        saturated_low=all(c.saturated_low for c in curves),
        saturated_high=all(c.saturated_high for c in curves),
        resource_id="aggregate",
        sweep_lo=min(c.sweep_lo for c in curves),
        sweep_hi=max(c.sweep_hi for c in curves),
        price_tol=price_tol,
        level_tol=level_tol,
    )
