"""
cycap - Logging Utilities
Diagnostics to standard error through rich, results stay on standard output.
"""

import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

from cycap.config import LOG_LEVEL

err_console = Console(stderr=True)

_LEVELS = {
    "error": logging.ERROR,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def setup_logging(level: Optional[str] = None) -> None:
    """Attach a single rich handler to the package logger."""
    name = (level or LOG_LEVEL).lower()
    logger = logging.getLogger("cycap")
    logger.setLevel(_LEVELS.get(name, logging.ERROR))
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(console=err_console, show_path=False, markup=False)
        handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
        logger.addHandler(handler)
    logger.propagate = False
