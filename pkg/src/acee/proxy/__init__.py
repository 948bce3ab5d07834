"""Latent-confounder proxies and the proxy sufficiency diagnostic."""

from .diagnostic import DiagnosticResult, proxy_sufficiency_diagnostic
from .factor import (
    EigenGapReport,
    FactorProxy,
    ResidualProxy,
    eigen_gap_report,
    factor_proxy_from_matrix,
    fit_factor_proxy,
    fit_residual_proxy,
)

__all__ = [
    "DiagnosticResult",
    "EigenGapReport",
    "FactorProxy",
    "ResidualProxy",
    "eigen_gap_report",
    "factor_proxy_from_matrix",
    "fit_factor_proxy",
    "fit_residual_proxy",
    "proxy_sufficiency_diagnostic",
]
