"""Copula-based adaptive reference regions for paired biomarkers."""

from ._core import (
    CopadaptError,
    __version__,
    classification_metrics,
    copula_cdf,
    copula_pdf,
    copula_sample,
    fit_prior,
    frameworks,
    hpr,
    kendall_tau,
    prior_predictive,
    run_cli,
    simulate_control,
)

__all__ = [
    "CopadaptError",
    "__version__",
    "classification_metrics",
    "copula_cdf",
    "copula_pdf",
    "copula_sample",
    "fit_prior",
    "frameworks",
    "hpr",
    "kendall_tau",
    "prior_predictive",
    "run_cli",
    "simulate_control",
]
