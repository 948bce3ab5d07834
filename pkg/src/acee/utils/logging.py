"""Logging utilities."""

import logging.config

from ..config.settings import Settings

_THIRD_PARTY = ("matplotlib", "numba", "urllib3", "filelock")


def setup_logging(settings: Settings) -> None:
    """Set up logging configuration."""
    logging.config.dictConfig(settings.log_config)

    if settings.is_development:
        logging.getLogger("acee").setLevel(logging.DEBUG)
    for name in _THIRD_PARTY:
        logging.getLogger(name).setLevel(logging.WARNING)
