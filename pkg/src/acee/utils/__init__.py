"""Utility functions for acee."""

from .error_handling import AceeError, ErrorAggregator, ErrorContext, error_record
from .logging import setup_logging

__all__ = ["AceeError", "ErrorAggregator", "ErrorContext", "error_record", "setup_logging"]
