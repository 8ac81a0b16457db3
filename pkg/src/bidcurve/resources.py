"""Resource models: translate batteries, ACs and EVs into linear programs.

Each builder maps a resource description plus a price series and a candidate
first-period price c1 onto a dense LP for the simplex engine, and decodes
LP solutions back into power/energy schedules with structural diagnostics.

Sign convention throughout: net power output is discharge-positive, so AC
and EV consumption sits on the negative half-axis and every demand-supply
curve is monotone non-decreasing in price.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .simplex import LinearProgram, LpSolution, SolverOptions, SolverStatus, solve

__all__ = [
    "PriceSeries",
    "BatteryParams",
    "AcParams",
    "EvFleetParams",
    "EvSpec",
    "IdealBattery",
    "ImperfectBattery",
    "Ac",
    "Ev",
    "Cluster",
    "Schedule",
    "ResourceLp",
    "InfeasibleResource",
    "build_battery_lp",
    "build_ac_lp",
    "build_ev_lp",
    "sample_ev_fleet",
    "solve_schedule",
    "lp_template",
    "distinct_prices",
]


class InfeasibleResource(RuntimeError):
    """The resource has no feasible schedule; physical, not a bug."""


@dataclass(frozen=True)
class PriceSeries:
    """Per-period prices: c1 is supplied separately, future_prices are c2..cT."""

    delta_t: float = 1.0  # hours per interval
    future_prices: tuple[float, ...] = ()
    currency: str = "USD"

    def __post_init__(self):
        object.__setattr__(self, "future_prices", tuple(float(p) for p in self.future_prices))
        if not self.delta_t > 0:
            raise ValueError("delta_t must be positive")
        if not all(math.isfinite(p) for p in self.future_prices):
            raise ValueError("prices must be finite")

    @property
    def horizon(self) -> int:
        return 1 + len(self.future_prices)

    def full(self, c1: float) -> np.ndarray:
        return np.concatenate([[c1], self.future_prices])


@dataclass(frozen=True)
class BatteryParams:
    e_min: float
    e_max: float
    e_init: float
    p_dis_max: float
    p_chg_max: float
    eta_dis: float = 1.0
    eta_chg: float = 1.0
    dissipation: float = 0.0
    ending_soc: bool = False

    def __post_init__(self):
        if not (self.e_min <= self.e_init <= self.e_max):
            raise ValueError("e_init must lie within [e_min, e_max]")
        if self.p_dis_max <= 0 or self.p_chg_max <= 0:
            raise ValueError("power limits must be positive")
        if not (0 < self.eta_dis <= 1 and 0 < self.eta_chg <= 1):
            raise ValueError("efficiencies must be in (0, 1]")
        if not (0 <= self.dissipation < 1):
            raise ValueError("dissipation must be in [0, 1)")

    @property
    def lossy(self) -> bool:
        return self.eta_dis < 1.0 or self.eta_chg < 1.0


@dataclass(frozen=True)
class AcParams:
    thermal_resistance: float  # degC per kW
    heat_capacity: float  # kWh per degC
    cooling_power_max: float  # kW
    cop: float
    temp_init: float
    temp_min: float
    temp_max: float
    ambient: tuple[float, ...]  # degC per period

    def __post_init__(self):
        object.__setattr__(self, "ambient", tuple(float(a) for a in self.ambient))
        if not (self.temp_min <= self.temp_init <= self.temp_max):
            raise ValueError("temp_init must lie within [temp_min, temp_max]")
        if min(self.thermal_resistance, self.heat_capacity, self.cooling_power_max, self.cop) <= 0:
            raise ValueError("R, C, cooling_power_max and cop must be positive")


@dataclass(frozen=True)
class EvFleetParams:
    count: int
    capacity_kwh: float
    p_max_kw: float
    arrival_mean: float  # hours
    arrival_std: float
    departure_mean: float
    departure_std: float
    soc_arrival_lo: float = 0.2
    soc_arrival_hi: float = 0.4
    soc_depart_lo: float = 0.8
    soc_depart_hi: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        for s in (self.soc_arrival_lo, self.soc_arrival_hi, self.soc_depart_lo, self.soc_depart_hi):
            if not 0 <= s <= 1:
                raise ValueError("SOC fractions must lie in [0, 1]")


@dataclass(frozen=True)
class EvSpec:
    """One sampled EV: availability window snapped to whole periods."""

    capacity: float  # MWh
    p_max: float  # MW
    first_period: int  # 1-based, inclusive
    last_period: int  # 1-based, inclusive
    e_arrival: float  # MWh
    e_depart_floor: float  # MWh
    arrival_hour: float
    departure_hour: float


@dataclass(frozen=True)
class IdealBattery:
    params: BatteryParams

    def __post_init__(self):
        p = self.params
        if p.lossy or p.dissipation > 0 or p.p_dis_max != p.p_chg_max:
            raise ValueError("ideal battery requires eta=1, no dissipation, symmetric power limit")


@dataclass(frozen=True)
class ImperfectBattery:
    params: BatteryParams


@dataclass(frozen=True)
class Ac:
    params: AcParams


@dataclass(frozen=True)
class Ev:
    spec: EvSpec


@dataclass(frozen=True)
class Cluster:
    members: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("cluster must be non-empty")
        if any(isinstance(m, Cluster) for m in self.members):
            raise ValueError("clusters of clusters are not supported")


ResourceSpec = IdealBattery | ImperfectBattery | Ac | Ev | Cluster


@dataclass
class Schedule:
    """Optimal trajectory for one fixed c1.

    power is net MW (discharge positive); energy is the stored-energy
    trajectory E_1..E_{T+1} in MWh (room temperature for an AC).
    """

    power: np.ndarray
    energy: np.ndarray
    objective: float  # total negative revenue, unperturbed prices
    delta_t: float
    t_bind: int | None = None  # T_B: first period whose end-energy binds
    n_c: int = 0
    n_d: int = 0
    marginal_period: int | None = None
    terminal_bound: str | None = None  # "upper" | "lower" | "ending_soc"
    comp_violation: float = 0.0  # max_t min(Pd_t, Pc_t), imperfect batteries
    threshold_price: float | None = None  # c-tilde from the balance-row duals
    solution: LpSolution | None = None


@dataclass
class ResourceLp:
    """An LP parametric in c1: objective(c1) = base_objective + c1 * c1_gradient.

    Carries the column layout needed to decode solutions into Schedules.
    """

    lp0: LinearProgram
    c1_gradient: np.ndarray
    kind: str  # "battery" | "battery_split" | "ac" | "ev" | "cluster"
    horizon: int
    delta_t: float
    prices: np.ndarray  # c2..cT actually used in the objective
    members: list["ResourceLp"] = field(default_factory=list)
    offsets: list[int] = field(default_factory=list)
    resource: object = None

    def instantiate(self, c1: float) -> LinearProgram:
        return replace(self.lp0, objective=self.lp0.objective + c1 * self.c1_gradient)


def distinct_prices(prices: np.ndarray) -> np.ndarray:
    """Perturb duplicated prices by k*1e-7*(1+max|c|), k the 1-based period
    index, so the schedule-structure lemma's distinctness assumption holds.
    Used for diagnostics only; objectives are reported against the originals."""
    prices = np.asarray(prices, dtype=float)
    if len(np.unique(prices)) == len(prices):
        return prices
    eps = 1e-7 * (1.0 + np.max(np.abs(prices)))
    out = prices.copy()
    seen: dict[float, int] = {}
    for k, p in enumerate(prices, start=1):
        if p in seen:
            out[k - 1] = p + k * eps
        else:
            seen[p] = k
    return out


def _battery_columns(p: BatteryParams, T: int):
    """Column layout: power vars first, then E_2..E_{T+1}."""
    if p.lossy:
        return 2 * T, T  # pd/pc pairs interleaved as [Pd_1..Pd_T, Pc_1..Pc_T]
    return T, T


def build_battery_lp(
    p: BatteryParams,
    prices: PriceSeries,
    c1: float,
    power_lower: np.ndarray | None = None,
    power_upper: np.ndarray | None = None,
    extra_floor: tuple[int, float] | None = None,
) -> LinearProgram:
    """Assemble the look-ahead arbitrage LP for one battery.

    Ideal batteries get one net-power variable per period; lossy ones get
    separate discharge/charge variables with the complementarity constraint
    dropped (exact for positive prices). `power_lower`/`power_upper` override
    the per-period net-power box (EV availability windows); `extra_floor`
    adds E_{k+1} >= floor via a slack variable (EV departure SOC).
    """
    return battery_lp_template(p, prices, power_lower, power_upper, extra_floor).instantiate(c1)


def battery_lp_template(
    p: BatteryParams,
    prices: PriceSeries,
    power_lower: np.ndarray | None = None,
    power_upper: np.ndarray | None = None,
    extra_floor: tuple[int, float] | None = None,
    _kind: str = "battery",
    _resource: object = None,
) -> ResourceLp:
    T = prices.horizon
    if T < 1:
        raise ValueError("horizon must contain at least the current period")
    dt = prices.delta_t
    c = np.concatenate([[0.0], prices.future_prices])
    if (p.lossy or p.dissipation > 0) and any(f < 0 for f in prices.future_prices):
        warnings.warn(
            "negative prices with a lossy battery: the complementarity "
            "relaxation is only proven exact for positive prices",
            stacklevel=2,
        )
    keep = 1.0 - p.dissipation

    if p.lossy:
        n_pow = 2 * T
        pd = np.arange(T)
        pc = T + np.arange(T)
    else:
        n_pow = T
        pd = pc = np.arange(T)
    en = n_pow + np.arange(T)  # E_2..E_{T+1}
    n = n_pow + T
    rows = T + (1 if p.ending_soc else 0) + (1 if extra_floor else 0)
    if extra_floor:
        slack_col = n
        n += 1

    obj = np.zeros(n)
    grad = np.zeros(n)
    if p.lossy:
        obj[pd] = -c * dt
        obj[pc] = c * dt
        grad[pd[0]] = -dt
        grad[pc[0]] = dt
    else:
        obj[pd] = -c * dt
        grad[pd[0]] = -dt

    A = np.zeros((rows, n))
    b = np.zeros(rows)
    labels = []
    for t in range(T):
        # E_{t+2} - keep*E_{t+1} + (net discharge_t)*dt = 0; E_1 is a constant
        A[t, en[t]] = 1.0
        if t == 0:
            b[t] = keep * p.e_init
        else:
            A[t, en[t - 1]] = -keep
        if p.lossy:
            A[t, pd[t]] = dt / p.eta_dis
            A[t, pc[t]] = -dt * p.eta_chg
        else:
            A[t, pd[t]] = dt
    r = T
    if p.ending_soc:
        A[r, en[T - 1]] = 1.0
        b[r] = p.e_init
        r += 1
    if extra_floor:
        k, floor = extra_floor
        if not 1 <= k <= T:
            raise ValueError("floor period out of range")
        A[r, en[k - 1]] = 1.0
        A[r, slack_col] = -1.0
        b[r] = floor

    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    if p.lossy:
        lo[pd] = 0.0
        hi[pd] = p.p_dis_max
        lo[pc] = 0.0
        hi[pc] = p.p_chg_max
        labels += [f"Pd[{t+1}]" for t in range(T)] + [f"Pc[{t+1}]" for t in range(T)]
    else:
        lo[pd] = -p.p_chg_max
        hi[pd] = p.p_dis_max
        labels += [f"P[{t+1}]" for t in range(T)]
    if power_lower is not None:
        if p.lossy:
            raise ValueError("per-period power overrides only supported for lossless batteries")
        lo[pd] = np.asarray(power_lower, dtype=float)
    if power_upper is not None:
        if p.lossy:
            raise ValueError("per-period power overrides only supported for lossless batteries")
        hi[pd] = np.asarray(power_upper, dtype=float)
    lo[en] = p.e_min
    hi[en] = p.e_max
    labels += [f"E[{t+2}]" for t in range(T)]
    if extra_floor:
        lo[slack_col] = 0.0
        labels.append("floor_slack")

    lp = LinearProgram(obj, A, b, lo, hi, tuple(labels))
    kind = "battery_split" if p.lossy else _kind
    return ResourceLp(
        lp0=lp,
        c1_gradient=grad,
        kind=kind,
        horizon=T,
        delta_t=dt,
        prices=c,
        resource=_resource if _resource is not None else p,
    )


def build_ac_lp(p: AcParams, prices: PriceSeries, c1: float) -> LinearProgram:
    return ac_lp_template(p, prices).instantiate(c1)


def ac_lp_template(p: AcParams, prices: PriceSeries, _resource: object = None) -> ResourceLp:
    """Cooling-only 1R-1C model, Euler-discretized:
    theta_{t+1} = theta_t + (dt/C)*((amb_t - theta_t)/R - cop*P_t).

    Decision variables are cooling powers in kW; the market-facing net
    output is -P_t/1000 MW.
    """
    T = prices.horizon
    if len(p.ambient) < T:
        raise ValueError("ambient series shorter than the price horizon")
    dt = prices.delta_t
    c = np.concatenate([[0.0], prices.future_prices])
    a = 1.0 - dt / (p.thermal_resistance * p.heat_capacity)
    gain = dt / (p.thermal_resistance * p.heat_capacity)
    cool = dt * p.cop / p.heat_capacity

    n = 2 * T  # P_1..P_T (kW), theta_2..theta_{T+1}
    pw = np.arange(T)
    th = T + np.arange(T)
    obj = np.zeros(n)
    grad = np.zeros(n)
    obj[pw] = c * dt / 1000.0  # consuming P kW costs c*(P/1000)*dt
    grad[pw[0]] = dt / 1000.0

    A = np.zeros((T, n))
    b = np.zeros(T)
    for t in range(T):
        A[t, th[t]] = 1.0
        A[t, pw[t]] = cool
        if t == 0:
            b[t] = a * p.temp_init + gain * p.ambient[0]
        else:
            A[t, th[t - 1]] = -a
            b[t] = gain * p.ambient[t]
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    lo[pw] = 0.0
    hi[pw] = p.cooling_power_max
    lo[th] = p.temp_min
    hi[th] = p.temp_max
    labels = [f"P[{t+1}]" for t in range(T)] + [f"theta[{t+2}]" for t in range(T)]
    lp = LinearProgram(obj, A, b, lo, hi, tuple(labels))
    return ResourceLp(lp, grad, "ac", T, dt, c, resource=_resource)


def sample_ev_fleet(p: EvFleetParams, prices: PriceSeries) -> list[Ev]:
    """Sample a fleet of EVs; windows snap to whole periods (arrival up,
    departure down) and EVs whose departure floor is unreachable at p_max
    are resampled, at most 100 attempts each."""
    rng = np.random.default_rng(p.rng_seed)
    T = prices.horizon
    dt = prices.delta_t
    cap = p.capacity_kwh / 1000.0
    pmax = p.p_max_kw / 1000.0
    fleet: list[Ev] = []
    for _ in range(p.count):
        for attempt in range(100):
            arrival = rng.normal(p.arrival_mean, p.arrival_std)
            departure = rng.normal(p.departure_mean, p.departure_std)
            soc_a = rng.uniform(p.soc_arrival_lo, p.soc_arrival_hi)
            soc_d = rng.uniform(p.soc_depart_lo, p.soc_depart_hi)
            arrival = min(max(arrival, 0.0), T * dt)
            departure = min(max(departure, 0.0), T * dt)
            first = int(math.ceil(arrival / dt - 1e-12)) + 1
            last = int(math.floor(departure / dt + 1e-12))
            if last < first:
                continue
            first = max(first, 1)
            last = min(last, T)
            e_arr = soc_a * cap
            floor = soc_d * cap
            window = last - first + 1
            if e_arr + pmax * dt * window < floor - 1e-12:
                continue
            fleet.append(
                Ev(EvSpec(cap, pmax, first, last, e_arr, floor, arrival, departure))
            )
            break
        else:
            raise InfeasibleResource("EV resampling exhausted after 100 attempts")
    return fleet


def build_ev_lp(ev: Ev | EvSpec, prices: PriceSeries, c1: float) -> LinearProgram:
    return ev_lp_template(ev, prices).instantiate(c1)


def ev_lp_template(ev: Ev | EvSpec, prices: PriceSeries) -> ResourceLp:
    """Battery LP restricted to the availability window: P_t = 0 outside it,
    terminal inequality E_{last+1} >= departure floor."""
    spec = ev.spec if isinstance(ev, Ev) else ev
    T = prices.horizon
    params = BatteryParams(
        e_min=0.0,
        e_max=spec.capacity,
        e_init=spec.e_arrival,
        p_dis_max=spec.p_max,
        p_chg_max=spec.p_max,
    )
    lo = np.zeros(T)
    hi = np.zeros(T)
    first = max(spec.first_period, 1)
    last = min(spec.last_period, T)
    if first <= last:
        lo[first - 1 : last] = -spec.p_max
        hi[first - 1 : last] = spec.p_max
    floor = None
    if first <= last and spec.e_depart_floor > 0:
        floor = (last, spec.e_depart_floor)
    tmpl = battery_lp_template(
        params, prices, power_lower=lo, power_upper=hi, extra_floor=floor,
        _kind="ev", _resource=spec,
    )
    return tmpl


def cluster_lp_template(cluster: Cluster, prices: PriceSeries) -> ResourceLp:
    """Block-diagonal join of the members' LPs; the joint optimum separates
    because members share no constraints."""
    members = [lp_template(m, prices) for m in cluster.members]
    sizes = [m.lp0.num_vars for m in members]
    rows = [m.lp0.num_rows for m in members]
    n = sum(sizes)
    m_rows = sum(rows)
    obj = np.concatenate([m.lp0.objective for m in members])
    grad = np.concatenate([m.c1_gradient for m in members])
    lo = np.concatenate([m.lp0.lower for m in members])
    hi = np.concatenate([m.lp0.upper for m in members])
    b = np.concatenate([m.lp0.eq_rhs for m in members])
    A = np.zeros((m_rows, n))
    labels: list[str] = []
    roff = coff = 0
    offsets = []
    for i, mem in enumerate(members):
        A[roff : roff + mem.lp0.num_rows, coff : coff + mem.lp0.num_vars] = mem.lp0.eq_matrix
        labels += [f"u{i}.{lbl}" for lbl in mem.lp0.var_labels]
        offsets.append(coff)
        roff += mem.lp0.num_rows
        coff += mem.lp0.num_vars
    lp = LinearProgram(obj, A, b, lo, hi, tuple(labels))
    return ResourceLp(
        lp, grad, "cluster", prices.horizon, prices.delta_t,
        np.concatenate([[0.0], prices.future_prices]),
        members=members, offsets=offsets, resource=cluster,
    )


def lp_template(r: ResourceSpec, prices: PriceSeries) -> ResourceLp:
    if isinstance(r, (IdealBattery, ImperfectBattery)):
        return battery_lp_template(r.params, prices, _resource=r)
    if isinstance(r, Ac):
        return ac_lp_template(r.params, prices, _resource=r)
    if isinstance(r, Ev):
        return ev_lp_template(r, prices)
    if isinstance(r, Cluster):
        return cluster_lp_template(r, prices)
    raise TypeError(f"unknown resource spec {type(r)!r}")


def _decode(tmpl: ResourceLp, sol: LpSolution, full_prices: np.ndarray, bind_tol_override: float | None = None) -> Schedule:
    T = tmpl.horizon
    dt = tmpl.delta_t
    x = sol.primal
    if tmpl.kind == "cluster":
        power = np.zeros(T)
        energy = None
        for mem, off in zip(tmpl.members, tmpl.offsets):
            sub = LpSolution(
                status=sol.status,
                primal=x[off : off + mem.lp0.num_vars],
                duals=np.zeros(0),
                reduced_costs=np.zeros(0),
                objective_value=0.0,
                iterations=0,
            )
            s = _decode(mem, sub, full_prices)
            power += s.power
            energy = s.energy if energy is None else energy + s.energy
        obj = float(np.sum(-full_prices * power * dt))
        return Schedule(power, energy, obj, dt, solution=sol)

    if tmpl.kind == "ac":
        p = tmpl.resource.params if isinstance(tmpl.resource, Ac) else tmpl.resource
        cool = x[:T]
        power = -cool / 1000.0
        temp = np.concatenate([[p.temp_init], x[T : 2 * T]])
        obj = float(np.sum(-full_prices * power * dt))
        return Schedule(power, temp, obj, dt, solution=sol)

    # battery-like (net or split variables)
    if tmpl.kind == "battery_split":
        params: BatteryParams = tmpl.resource.params if hasattr(tmpl.resource, "params") else tmpl.resource
        pd = x[:T]
        pc = x[T : 2 * T]
        power = pd - pc
        en = x[2 * T : 3 * T]
        comp = float(np.max(np.minimum(pd, pc))) if T else 0.0
        full_chg = pc >= params.p_chg_max - _power_tol(params)
        full_dis = pd >= params.p_dis_max - _power_tol(params)
    else:
        if isinstance(tmpl.resource, EvSpec):
            params = BatteryParams(
                0.0, tmpl.resource.capacity, tmpl.resource.e_arrival,
                tmpl.resource.p_max, tmpl.resource.p_max,
            )
        else:
            params = tmpl.resource.params if hasattr(tmpl.resource, "params") else tmpl.resource
        power = x[:T]
        en = x[T : 2 * T]
        comp = 0.0
        full_chg = power <= -params.p_chg_max + _power_tol(params)
        full_dis = power >= params.p_dis_max - _power_tol(params)

    energy = np.concatenate([[params.e_init], en])
    obj = float(np.sum(-full_prices * power * dt))

    bind_tol = bind_tol_override
    if bind_tol is None:
        bind_tol = 1e-6 * max(params.e_max - params.e_min, 1e-12)
    t_bind = None
    terminal = None
    for t in range(1, T + 1):
        if energy[t] >= params.e_max - bind_tol:
            t_bind, terminal = t, "upper"
            break
        if energy[t] <= params.e_min + bind_tol:
            t_bind, terminal = t, "lower"
            break
        if params.ending_soc and abs(energy[t] - params.e_init) <= bind_tol:
            t_bind, terminal = t, "ending_soc"
            break
    n_c = n_d = 0
    marginal = None
    if t_bind is not None:
        for t in range(t_bind):
            if full_chg[t]:
                n_c += 1
            elif full_dis[t]:
                n_d += 1
            elif marginal is None:
                marginal = t + 1
    threshold = float(-sol.duals[0]) if sol.duals.size else None
    return Schedule(
        power, energy, obj, dt,
        t_bind=t_bind, n_c=n_c, n_d=n_d, marginal_period=marginal,
        terminal_bound=terminal, comp_violation=comp,
        threshold_price=threshold, solution=sol,
    )


def _power_tol(params: BatteryParams) -> float:
    return 1e-6 * (1.0 + max(params.p_dis_max, params.p_chg_max))


def solve_schedule(
    r: ResourceSpec,
    prices: PriceSeries,
    c1: float,
    opts: SolverOptions | None = None,
    template: ResourceLp | None = None,
) -> Schedule:
    """Solve the resource's LP at c1 and decode the optimal schedule.

    Duplicate prices are perturbed (diagnostics only) so T_B/n_c/n_d obey
    the schedule-structure lemma; the reported objective uses the original
    prices. For lossy batteries under positive prices the decoded schedule
    carries the complementarity residual max_t min(Pd_t, Pc_t)."""
    tmpl = template if template is not None else lp_template(r, prices)
    full = np.concatenate([[c1], prices.future_prices])
    perturbed = distinct_prices(full)
    if np.array_equal(perturbed, full):
        lp = tmpl.instantiate(c1)
    else:
        # rebuild against the perturbed future prices, keep c1 parametric
        pert_series = PriceSeries(prices.delta_t, tuple(perturbed[1:]), prices.currency)
        lp = lp_template(r, pert_series).instantiate(perturbed[0])
    sol = solve(lp, opts)
    if sol.status is SolverStatus.INFEASIBLE:
        raise InfeasibleResource(f"no feasible schedule for {type(r).__name__}")
    if sol.status is not SolverStatus.OPTIMAL:
        raise RuntimeError(f"solver returned {sol.status.value}")
    return _decode(tmpl, sol, full)
