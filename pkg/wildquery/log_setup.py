"""
Logging setup for WildQuery
Colored, tagged log lines on stderr; stdout is reserved for results.
"""

import logging
import sys
from typing import Optional

import colorlog

from . import config

LOG_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"

_configured = False


def setup_logging(level: Optional[str] = None, stream=None) -> logging.Logger:
    """
    Configure the package logger once.

    Args:
        level: Level name overriding WILDQUERY_LOG_LEVEL
        stream: Output stream (stderr by default)

    Returns:
        The root "wildquery" logger
    """
    global _configured
    logger = logging.getLogger("wildquery")
    logger.setLevel((level or config.LOG_LEVEL).upper())

    if not _configured:
        handler = colorlog.StreamHandler(stream or sys.stderr)
        handler.setFormatter(colorlog.ColoredFormatter(
            LOG_FORMAT,
            log_colors={
                'DEBUG': 'cyan',
                'INFO': 'green',
                'WARNING': 'yellow',
                'ERROR': 'red',
                'CRITICAL': 'bold_red',
            },
        ))
        logger.addHandler(handler)
        logger.propagate = False
        _configured = True
    return logger
