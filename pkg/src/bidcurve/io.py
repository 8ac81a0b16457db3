"""Config loading, price ingestion, and curve export.

Prices are stored per MWh internally; configs may declare per-kWh inputs
(price_unit: "per_kwh") and are converted on load.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .curve import ExtractOptions, SegmentKind, SegmentLabel, StaircaseCurve
from .resources import (
    Ac,
    AcParams,
    BatteryParams,
    Cluster,
    EvFleetParams,
    IdealBattery,
    ImperfectBattery,
    PriceSeries,
    ResourceSpec,
    sample_ev_fleet,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "load_prices",
    "write_curve",
    "read_curve",
]


class ConfigError(ValueError):
    """Bad config or price file; the CLI maps this to exit code 2."""


# Fig-style default battery: 2 MWh, 0.6 MW, SOC in [0.1, 1], initial SOC 0.5
_DEFAULT_BATTERY = {
    "capacity_mwh": 2.0,
    "power_mw": 0.6,
    "soc_min": 0.1,
    "soc_max": 1.0,
    "soc_init": 0.5,
}


class RunConfig:
    """One resource (or cluster), a price file, extraction options, and
    output plumbing, loaded from a JSON file."""

    def __init__(
        self,
        resource: ResourceSpec,
        prices: PriceSeries,
        extract_options: ExtractOptions,
        out_dir: Path,
        seed: int = 0,
        currency: str = "USD",
    ):
        self.resource = resource
        self.prices = prices
        self.extract_options = extract_options
        self.out_dir = Path(out_dir)
        self.seed = seed
        self.currency = currency


def _get(d: dict, key: str, default=None, required: bool = False):
    if required and key not in d:
        raise ConfigError(f"missing required config field '{key}'")
    return d.get(key, default)


def _build_battery(d: dict) -> IdealBattery | ImperfectBattery:
    merged = {**_DEFAULT_BATTERY, **d}
    cap = float(merged["capacity_mwh"])
    power = float(merged["power_mw"])
    try:
        params = BatteryParams(
            e_min=float(merged["soc_min"]) * cap,
            e_max=float(merged["soc_max"]) * cap,
            e_init=float(merged["soc_init"]) * cap,
            p_dis_max=float(merged.get("power_dis_mw", power)),
            p_chg_max=float(merged.get("power_chg_mw", power)),
            eta_dis=float(merged.get("eta_dis", 1.0)),
            eta_chg=float(merged.get("eta_chg", 1.0)),
            dissipation=float(merged.get("dissipation", 0.0)),
            ending_soc=bool(merged.get("ending_soc", False)),
        )
    except ValueError as e:
        raise ConfigError(f"bad battery parameters: {e}") from e
    if params.lossy or params.dissipation > 0:
        return ImperfectBattery(params)
    return IdealBattery(params)


def _build_ac(d: dict, horizon: int) -> Ac:
    ambient = d.get("ambient_degc", 30.0)
    if isinstance(ambient, (int, float)):
        ambient = [float(ambient)] * horizon
    if len(ambient) != horizon:
        raise ConfigError(f"ambient_degc must have {horizon} entries, got {len(ambient)}")
    try:
        return Ac(AcParams(
            thermal_resistance=float(_get(d, "thermal_resistance", required=True)),
            heat_capacity=float(_get(d, "heat_capacity", required=True)),
            cooling_power_max=float(_get(d, "cooling_power_max_kw", required=True)),
            cop=float(d.get("cop", 3.0)),
            temp_init=float(_get(d, "temp_init", required=True)),
            temp_min=float(_get(d, "temp_min", required=True)),
            temp_max=float(_get(d, "temp_max", required=True)),
            ambient=tuple(ambient),
        ))
    except ValueError as e:
        raise ConfigError(f"bad AC parameters: {e}") from e


def _build_ev_fleet(d: dict, prices: PriceSeries, seed: int) -> Cluster:
    try:
        params = EvFleetParams(
            count=int(d.get("count", 90)),
            capacity_kwh=float(d.get("capacity_kwh", 45.0)),
            p_max_kw=float(d.get("p_max_kw", 10.0)),
            arrival_mean=float(d.get("arrival_mean", 7.5)),
            arrival_std=float(d.get("arrival_std", 2.5)),
            departure_mean=float(d.get("departure_mean", 18.0)),
            departure_std=float(d.get("departure_std", 2.0)),
            soc_arrival_lo=float(d.get("soc_arrival_lo", 0.2)),
            soc_arrival_hi=float(d.get("soc_arrival_hi", 0.4)),
            soc_depart_lo=float(d.get("soc_depart_lo", 0.8)),
            soc_depart_hi=float(d.get("soc_depart_hi", 1.0)),
            rng_seed=int(d.get("seed", seed)),
        )
    except ValueError as e:
        raise ConfigError(f"bad EV fleet parameters: {e}") from e
    return Cluster(tuple(sample_ev_fleet(params, prices)))


def _build_resource(d: dict, prices: PriceSeries, seed: int) -> ResourceSpec:
    kind = d.get("kind", "battery")
    if kind == "battery":
        return _build_battery(d)
    if kind == "ac":
        return _build_ac(d, prices.horizon)
    if kind == "ev_fleet":
        return _build_ev_fleet(d, prices, seed)
    if kind == "cluster":
        members = d.get("members")
        if not members:
            raise ConfigError("cluster needs a non-empty 'members' list")
        built = []
        for m in members:
            if m.get("kind", "battery") == "cluster":
                raise ConfigError("clusters cannot nest")
            sub = _build_resource(m, prices, seed)
            built.extend(sub.members if isinstance(sub, Cluster) else [sub])
        return Cluster(tuple(built))
    raise ConfigError(f"unknown resource kind '{kind}'")


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")

    delta_t = float(raw.get("delta_t_hours", 1.0))
    currency = raw.get("currency", "USD")
    unit = raw.get("price_unit", "per_mwh")
    if unit not in ("per_mwh", "per_kwh"):
        raise ConfigError(f"price_unit must be 'per_mwh' or 'per_kwh', got '{unit}'")
    price_path = _get(raw, "prices", required=True)
    price_path = (path.parent / price_path) if not Path(price_path).is_absolute() else Path(price_path)
    prices = load_prices(price_path, delta_t=delta_t, currency=currency, per_kwh=(unit == "per_kwh"))

    ex = raw.get("extraction", {})
    opts = ExtractOptions(
        init_samples=int(ex.get("init_samples", 64)),
        price_tol=ex.get("price_tol"),
        level_tol=ex.get("level_tol"),
    )
    seed = int(raw.get("seed", 0))
    resource = _build_resource(raw.get("resource", {}), prices, seed)
    out_dir = path.parent / raw.get("out_dir", ".")
    return RunConfig(resource, prices, opts, out_dir, seed=seed, currency=currency)


def load_prices(
    path: str | Path,
    delta_t: float = 1.0,
    currency: str = "USD",
    per_kwh: bool = False,
) -> PriceSeries:
    """CSV with header `period,price`, one row per period starting at 2.

    An empty file (header only or nothing) gives a T=1 series: only the
    current period exists."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"price file not found: {path}")
    scale = 1000.0 if per_kwh else 1.0
    out: list[float] = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        expect = 2
        for lineno, row in enumerate(reader, start=1):
            if lineno == 1:
                if row and [c.strip().lower() for c in row[:2]] == ["period", "price"]:
                    continue
                if not row:
                    continue
                raise ConfigError(f"{path}:1: expected header 'period,price'")
            if not row or all(not c.strip() for c in row):
                raise ConfigError(f"{path}:{lineno}: blank row")
            if len(row) != 2:
                raise ConfigError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                period = int(row[0])
                price = float(row[1])
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: malformed row {row!r}") from None
            if not math.isfinite(price):
                raise ConfigError(f"{path}:{lineno}: price is not finite")
            if period == expect - 1 and lineno > 2:
                raise ConfigError(f"{path}:{lineno}: duplicate period index {period}")
            if period != expect:
                raise ConfigError(f"{path}:{lineno}: expected period {expect}, got {period}")
            out.append(price * scale)
            expect += 1
    return PriceSeries(delta_t, tuple(out), currency)


# ---------------------------------------------------------------------------
# curve export


def _label_to_dict(lab: SegmentLabel) -> dict:
    return {
        "kind": lab.kind.value,
        "t_bind": lab.t_bind,
        "delta_n": lab.delta_n,
        "terminal_bound": lab.terminal_bound,
        "n_c_hours": lab.n_c_hours,
        "n_d_hours": lab.n_d_hours,
    }


def _label_from_dict(d: dict) -> SegmentLabel:
    return SegmentLabel(
        kind=SegmentKind(d["kind"]),
        t_bind=d.get("t_bind"),
        delta_n=d.get("delta_n"),
        terminal_bound=d.get("terminal_bound"),
        n_c_hours=d.get("n_c_hours"),
        n_d_hours=d.get("n_d_hours"),
    )


def write_curve(curve: StaircaseCurve, path: str | Path, fmt: str | None = None) -> Path:
    """Export as JSON (full fidelity) or CSV (one row per stair); fmt
    defaults to the file suffix."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    if fmt == "json":
        doc = {
            "breakpoints": [float(b) for b in curve.breakpoints],
            "levels": [float(lv) for lv in curve.levels],
            "labels": [_label_to_dict(l) for l in curve.labels],
            "meta": {
                "saturated_low": curve.saturated_low,
                "saturated_high": curve.saturated_high,
                "resource_id": curve.resource_id,
                "sweep_lo": curve.sweep_lo,
                "sweep_hi": curve.sweep_hi,
                "price_tol": curve.price_tol,
                "level_tol": curve.level_tol,
            },
        }
        path.write_text(json.dumps(doc, indent=2) + "\n")
    elif fmt == "csv":
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["price_lo", "price_hi", "level_mw", "label"])
            bps = [float(b) for b in curve.breakpoints]
            edges = [-math.inf] + bps + [math.inf]
            for i, (lv, lab) in enumerate(zip(curve.levels, curve.labels)):
                w.writerow([repr(edges[i]), repr(edges[i + 1]), repr(float(lv)), lab.kind.value])
    else:
        raise ConfigError(f"unknown curve format '{fmt}'")
    return path


def read_curve(path: str | Path) -> StaircaseCurve:
    """Inverse of write_curve; the CSV variant recovers breakpoints, levels
    and label kinds (the JSON variant is lossless)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = json.loads(path.read_text())
        meta = doc.get("meta", {})
        return StaircaseCurve(
            breakpoints=np.array(doc["breakpoints"], dtype=float),
            levels=np.array(doc["levels"], dtype=float),
            labels=[_label_from_dict(d) for d in doc["labels"]],
            saturated_low=meta.get("saturated_low", True),
            saturated_high=meta.get("saturated_high", True),
            resource_id=meta.get("resource_id", ""),
            sweep_lo=meta.get("sweep_lo", 0.0),
            sweep_hi=meta.get("sweep_hi", 0.0),
            price_tol=meta.get("price_tol", 0.0),
            level_tol=meta.get("level_tol", 0.0),
        )
    levels, labels, bps = [], [], []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            levels.append(float(row["level_mw"]))
            labels.append(SegmentLabel(SegmentKind(row["label"])))
            hi = float(row["price_hi"])
            if math.isfinite(hi):
                bps.append(hi)
    return StaircaseCurve(breakpoints=np.array(bps), levels=np.array(levels), labels=labels)
