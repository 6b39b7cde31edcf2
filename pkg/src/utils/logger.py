import logging
import os
import sys

_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def get_logger(name: str) -> logging.Logger:
    """Initializes and returns a logger with a specified name.

    Records go to stderr; stdout carries command payloads only.
    """
    logger = logging.getLogger(name)
    level = os.getenv("HARM_ENT_LOG_LEVEL", "INFO").upper()
    logger.setLevel(level)

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(level)
        handler.setFormatter(logging.Formatter(_FORMAT))
        logger.addHandler(handler)
        logger.propagate = False

    return logger


def set_level(level: str) -> None:
    """Re-levels every logger created through get_logger."""
    for name, logger in logging.Logger.manager.loggerDict.items():
        if isinstance(logger, logging.Logger) and name.startswith("src"):
            logger.setLevel(level.upper())
            for handler in logger.handlers:
                handler.setLevel(level.upper())
