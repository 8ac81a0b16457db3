import csv
import json
from pathlib import Path

import pytest

from bidcurve.resources import BatteryParams, IdealBattery, PriceSeries

# 23 future hourly prices whose curve has the full five-stair shape
WORKED_PRICES = (
    78.92, 75.91, 70.9, 65.97, 62.4, 62.52, 62.77, 69.89, 73.58, 77.44, 77.98,
    83.72, 82.24, 69.61, 61.1, 61.41, 61.45, 59.52, 59.66, 60.04, 61.87, 60.87, 61.91,
)

WORKED_BATTERY = BatteryParams(e_min=0.0, e_max=22.0, e_init=14.0, p_dis_max=5.0, p_chg_max=5.0)


@pytest.fixture
def worked_prices():
    return PriceSeries(1.0, WORKED_PRICES)


@pytest.fixture
def worked_battery():
    return IdealBattery(WORKED_BATTERY)


def write_price_csv(path: Path, future_prices) -> Path:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["period", "price"])
        for i, p in enumerate(future_prices, start=2):
            w.writerow([i, p])
    return path


def write_config(dirpath: Path, future_prices=WORKED_PRICES, resource=None, **extra) -> Path:
    """Config + price CSV for the worked battery unless overridden."""
    write_price_csv(dirpath / "prices.csv", future_prices)
    doc = {
        "resource": resource or {
            "kind": "battery",
            "capacity_mwh": 22.0,
            "power_mw": 5.0,
            "soc_min": 0.0,
            "soc_max": 1.0,
            "soc_init": 14.0 / 22.0,
        },
        "prices": "prices.csv",
        "delta_t_hours": 1.0,
        "out_dir": "out",
        "seed": 0,
    }
    doc.update(extra)
    cfg = dirpath / "config.json"
    cfg.write_text(json.dumps(doc, indent=1))
    return cfg
