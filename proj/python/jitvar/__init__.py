"""Nondeterminism variance lab for just-in-time fault prediction."""

from ._core import (
    DatasetError,
    auc,
    cli,
    derive_seed,
    generate_synthetic,
    levene,
    mann_whitney_u,
    max_diff,
    mix,
    reg_inc_beta,
    run_experiment,
    settings,
    std_dev,
    std_normal_cdf,
    write_report,
)

__all__ = [
    "DatasetError",
    "auc",
    "cli",
    "derive_seed",
    "generate_synthetic",
    "levene",
    "mann_whitney_u",
    "max_diff",
    "mix",
    "reg_inc_beta",
    "run_experiment",
    "settings",
    "std_dev",
    "std_normal_cdf",
    "write_report",
]
__version__ = "0.1.0"
