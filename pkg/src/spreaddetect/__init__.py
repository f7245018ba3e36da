"""Source and change-point estimation for changes that spread across a graph."""

__version__ = "0.1.0"

from .cusum import cusum_transform
from .detect import (
    DEFAULT_RATE_GRID,
    DetectionResult,
    estimate,
    estimate_with_rate_search,
    lag_set_size,
    linear_stat_matrix,
    quadratic_stat_matrix,
    run_test,
    scaled_distance,
    signal_threshold,
    test_threshold,
)
from .graph import (
    NetworkGraph,
    all_pairs_distances,
    binary_tree,
    cycle,
    erdos_renyi,
    from_edge_list,
    from_spec,
    grid,
    identifiability_number,
    min_identifiability_number,
)
from .preprocess import (
    SeasonalBaseline,
    WeeklySeries,
    assemble_matrix,
    detrend_standardize,
    fit_seasonal,
)
from .simulate import (
    BenchConfig,
    BenchmarkRow,
    SpreadSpec,
    coordinatewise_baseline,
    generate_data,
    monte_carlo,
    spread_schedule,
)

__all__ = [
    "__version__",
    "cusum_transform",
    "DEFAULT_RATE_GRID",
    "DetectionResult",
    "estimate",
    "estimate_with_rate_search",
    "lag_set_size",
    "linear_stat_matrix",
    "quadratic_stat_matrix",
    "run_test",
    "scaled_distance",
    "signal_threshold",
    "test_threshold",
    "NetworkGraph",
    "all_pairs_distances",
    "binary_tree",
    "cycle",
    "erdos_renyi",
    "from_edge_list",
    "from_spec",
    "grid",
    "identifiability_number",
    "min_identifiability_number",
    "SeasonalBaseline",
    "WeeklySeries",
    "assemble_matrix",
    "detrend_standardize",
    "fit_seasonal",
    "BenchConfig",
    "BenchmarkRow",
    "SpreadSpec",
    "coordinatewise_baseline",
    "generate_data",
    "monte_carlo",
    "spread_schedule",
]
