"""Staircase demand-supply (bid) functions for battery-like resources.

The first-period power of a multi-period price-taking dispatch LP is a
monotone staircase in the first-period price; this package extracts that
staircase, classifies its stairs physically, and verifies the structural
theorems behind it as executable properties.
"""

from .curve import (
    ExtractOptions,
    MonotonicityError,
    SegmentKind,
    SegmentLabel,
    StaircaseCurve,
    aggregate,
    classify_segments,
    evaluate,
    extract_curve,
)
from .io import ConfigError, RunConfig, load_config, load_prices, read_curve, write_curve
from .plotting import render_svg
from .resources import (
    Ac,
    AcParams,
    BatteryParams,
    Cluster,
    Ev,
    EvFleetParams,
    EvSpec,
    IdealBattery,
    ImperfectBattery,
    InfeasibleResource,
    PriceSeries,
    Schedule,
    sample_ev_fleet,
    solve_schedule,
)
from .simplex import LinearProgram, LpSolution, SolverOptions, SolverStatus, solve
from .verify import (
    PropertyReport,
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
    run_suite,
)

__version__ = "0.1.0"
