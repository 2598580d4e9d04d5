"""Diagnostics go to standard error through rich; results never do."""

import logging
from typing import Optional

from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from src.settings import LogSettings

LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def configure_logging(level: Optional[str] = None) -> int:
    """
    Install a RichHandler on the root logger.

    Args:
        level: Level name; read from CRITSEL_LOG when None

    Returns:
        The numeric level installed
    """
    invalid = False
    if level is None:
        try:
            level = LogSettings().log
        except ValidationError:
            level, invalid = "warn", True
    numeric = LEVELS.get(level.lower(), logging.WARNING)
    handler = RichHandler(
        console=Console(stderr=True), show_path=False, rich_tracebacks=numeric <= logging.DEBUG
    )
    logging.basicConfig(
        level=numeric, format="%(message)s", datefmt="[%X]", handlers=[handler], force=True
    )
    if invalid:
        logging.getLogger(__name__).warning("Unrecognised CRITSEL_LOG value; using warn")
    return numeric
