"""Uniformity tests on the hypersphere based on projected ecdfs."""

from ._core import (
    NumericError,
    asymptotic_critical_values,
    asymptotic_pvalue,
    cache_dir,
    coefficients,
    critical_values,
    psi,
    sample,
    set_cache_dir,
    statistic,
    test,
)

__all__ = [
    "NumericError",
    "asymptotic_critical_values",
    "asymptotic_pvalue",
    "cache_dir",
    "coefficients",
    "critical_values",
    "psi",
    "sample",
    "set_cache_dir",
    "statistic",
    "test",
]
