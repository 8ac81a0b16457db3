"""Command-line surface: curve, verify, aggregate, sweep, schedule.

Exit codes: 0 success, 1 property/solve failure, 2 bad config or flags.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .curve import (
    MonotonicityError,
    aggregate,
    classify_segments,
    extract_curve,
)
from .io import ConfigError, RunConfig, load_config, write_curve
from .plotting import render_svg
from .resources import (
    IdealBattery,
    ImperfectBattery,
    InfeasibleResource,
    PriceSeries,
    solve_schedule,
)
from .verify import SUITE_NAMES, run_suite

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bidcurve",
                                     description="Staircase bid curves for battery-like resources")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--price-tol", type=float, help="breakpoint resolution override")
        p.add_argument("--level-tol", type=float, help="level clustering tolerance override")
        p.add_argument("--seed", type=int, help="seed override")

    p = sub.add_parser("curve", help="extract, classify and export one curve")
    p.add_argument("config")
    p.add_argument("--svg", action="store_true", help="also render curve.svg")
    common(p)

    p = sub.add_parser("verify", help="run verification batches")
    p.add_argument("config")
    p.add_argument("--suite", default="all", choices=list(SUITE_NAMES) + ["all"])
    p.add_argument("--instances", type=int, default=20)
    common(p)

    p = sub.add_parser("aggregate", help="sum the curves of several configs")
    p.add_argument("configs", nargs="+")
    p.add_argument("--svg", action="store_true", help="also render the member/aggregate overlay")
    common(p)

    p = sub.add_parser("sweep", help="curve family over one swept parameter")
    p.add_argument("config")
    p.add_argument("--param", required=True,
                   choices=["soc", "efficiency", "dissipation", "forecast-scale"])
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--svg", action="store_true", help="also render family.svg")
    common(p)

    p = sub.add_parser("schedule", help="single solve with diagnostics")
    p.add_argument("config")
    p.add_argument("--c1", type=float, required=True, help="current-period price")
    p.add_argument("--svg", action="store_true", help="also render schedule.svg")
    common(p)
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.out is not None:
        cfg.out_dir = Path(args.out)
    if getattr(args, "price_tol", None) is not None:
        cfg.extract_options = replace(cfg.extract_options, price_tol=args.price_tol)
    if getattr(args, "level_tol", None) is not None:
        cfg.extract_options = replace(cfg.extract_options, level_tol=args.level_tol)
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    return cfg


def _extract(cfg: RunConfig):
    curve = extract_curve(cfg.resource, cfg.prices, cfg.extract_options)
    return classify_segments(curve, cfg.resource, cfg.prices)


def _print_curve(curve, out):
    print(f"{curve.num_levels} level(s), {len(curve.breakpoints)} breakpoint(s)", file=out)
    edges = [float("-inf")] + list(curve.breakpoints) + [float("inf")]
    for i, (lv, lab) in enumerate(zip(curve.levels, curve.labels)):
        print(f"  ({edges[i]:.6g}, {edges[i + 1]:.6g}] -> {lv:.6f} MW  [{lab.kind.value}]", file=out)


def _cmd_curve(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    curve = _extract(cfg)
    write_curve(curve, cfg.out_dir / "curve.json")
    write_curve(curve, cfg.out_dir / "curve.csv")
    if args.svg:
        render_svg(curve, cfg.out_dir / "curve.svg", currency=cfg.currency)
    _print_curve(curve, sys.stdout)
    return 0


def _cmd_verify(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    reports = run_suite(args.suite, instances=args.instances, seed=cfg.seed,
                        resource=cfg.resource, prices=cfg.prices)
    failures = 0
    for rep in reports:
        if not rep.applicable:
            status = "SKIP"
        elif rep.passed:
            status = "PASS"
        else:
            status = "FAIL"
            failures += 1
        line = f"{status} {rep.name}"
        if status == "FAIL" and rep.witnesses:
            line += f"  witness: {rep.witnesses[0]}"
        print(line)
    print(f"{len(reports)} checks, {failures} failed")
    return 1 if failures else 0


def _cmd_aggregate(args) -> int:
    cfgs = [load_config(c) for c in args.configs]
    cfg0 = _apply_overrides(cfgs[0], args)
    curves = [_extract(_apply_overrides(c, args)) for c in cfgs]
    total = aggregate(curves)
    write_curve(total, cfg0.out_dir / "aggregate.json")
    write_curve(total, cfg0.out_dir / "aggregate.csv")
    if args.svg:
        names = [f"member {i + 1}" for i in range(len(curves))] + ["aggregate"]
        render_svg(curves + [total], cfg0.out_dir / "aggregate.svg",
                   currency=cfg0.currency, names=names)
    _print_curve(total, sys.stdout)
    return 0


def _sweep_variant(cfg: RunConfig, param: str, value: float):
    r = cfg.resource
    if param == "forecast-scale":
        prices = PriceSeries(cfg.prices.delta_t,
                             tuple(value * f for f in cfg.prices.future_prices),
                             cfg.prices.currency)
        return r, prices
    if not isinstance(r, (IdealBattery, ImperfectBattery)):
        raise ConfigError(f"--param {param} requires a battery resource")
    p = r.params
    if param == "soc":
        p = replace(p, e_init=value * p.e_max)
    elif param == "efficiency":
        p = replace(p, eta_dis=value, eta_chg=value)
    elif param == "dissipation":
        p = replace(p, dissipation=value)
    lossy = p.lossy or p.dissipation > 0
    return (ImperfectBattery(p) if lossy else IdealBattery(p)), cfg.prices


def _cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {args.values!r}") from None
    if not values:
        raise ConfigError("--values is empty")
    curves, names = [], []
    for v in values:
        try:
            r, prices = _sweep_variant(cfg, args.param, v)
        except ValueError as e:
            raise ConfigError(f"bad sweep value {v}: {e}") from None
        curve = classify_segments(extract_curve(r, prices, cfg.extract_options), r, prices)
        tag = f"{args.param.replace('-', '_')}_{v:g}"
        write_curve(curve, cfg.out_dir / f"curve_{tag}.json")
        write_curve(curve, cfg.out_dir / f"curve_{tag}.csv")
        curves.append(curve)
        names.append(f"{args.param}={v:g}")
        print(f"{names[-1]}: {curve.num_levels} level(s)")
    if args.svg:
        render_svg(curves, cfg.out_dir / "family.svg", currency=cfg.currency, names=names)
    return 0


def _cmd_schedule(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    sched = solve_schedule(cfg.resource, cfg.prices, args.c1)
    full = cfg.prices.full(args.c1)
    print(f"objective: {sched.objective:.6f} (cost; negative = net revenue)")
    print(f"first-period power: {sched.power[0]:.6f} MW at c1={args.c1:g}")
    if sched.t_bind is not None:
        print(f"first binding period: {sched.t_bind} ({sched.terminal_bound} bound), "
              f"n_c={sched.n_c}, n_d={sched.n_d}")
    if sched.marginal_period is not None:
        print(f"marginal period: {sched.marginal_period}")
    if sched.threshold_price is not None:
        print(f"threshold price: {sched.threshold_price:.6f}")
    if sched.comp_violation:
        print(f"complementarity violation: {sched.comp_violation:.3e}")
    print("period  price      power_mw    state")
    for t in range(len(sched.power)):
        print(f"{t + 1:>6}  {full[t]:>9.4f}  {sched.power[t]:>10.6f}  {sched.energy[t + 1]:>8.4f}")
    if args.svg:
        render_svg(sched, cfg.out_dir / "schedule.svg", currency=cfg.currency)
    return 0


_COMMANDS = {
    "curve": _cmd_curve,
    "verify": _cmd_verify,
    "aggregate": _cmd_aggregate,
    "sweep": _cmd_sweep,
    "schedule": _cmd_schedule,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (InfeasibleResource, MonotonicityError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
