"""Byzantine-resilient SGD simulator: python surface over the C++ core."""

from ._core import (
    Task,
    Topology,
    acceptance_suites,
    average,
    compute_gather_period,
    coordwise_diameter_sum,
    forge_gradients,
    forge_model,
    l2_diameter,
    learning_rate,
    mda,
    mda_indices,
    measure_variance_norm_ratio,
    median,
    quantile,
    run_acceptance,
    run_from_config,
    validate_topology,
)

__all__ = [
    "Task",
    "Topology",
    "acceptance_suites",
    "average",
    "compute_gather_period",
    "coordwise_diameter_sum",
    "forge_gradients",
    "forge_model",
    "l2_diameter",
    "learning_rate",
    "mda",
    "mda_indices",
    "measure_variance_norm_ratio",
    "median",
    "quantile",
    "run_acceptance",
    "run_from_config",
    "validate_topology",
]
