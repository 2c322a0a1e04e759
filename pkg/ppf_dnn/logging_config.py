"""
Logging for ppf_dnn.

Everything goes to stderr so the JSON a command prints on stdout stays
parseable. Long jobs (dataset builds, training runs) can also keep a log file
per command under a log directory.
"""

import logging
import sys
from datetime import datetime
from pathlib import Path

ROOT = "ppf_dnn"

CONSOLE_FORMAT = "%(asctime)s | %(levelname)-8s | %(message)s"
FILE_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(funcName)s | %(message)s"


def setup_logging(
    log_dir: Path = None,
    verbose: bool = False,
    quiet: bool = False,
    command: str = "ppf",
) -> logging.Logger:
    """
    Configure the ppf_dnn logger tree.

    Args:
        log_dir: also write <command>_<date>.log here (always at DEBUG)
        verbose: console at DEBUG (per-iteration and per-epoch lines)
        quiet: console at WARNING; wins over verbose
        command: prefix of the log file name

    Returns:
        the root ppf_dnn logger
    """
    console_level = logging.WARNING if quiet else (logging.DEBUG if verbose else logging.INFO)

    logger = logging.getLogger(ROOT)
    logger.setLevel(logging.DEBUG if log_dir else console_level)
    # repeated calls (tests, several commands in one process) start clean
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(console_level)
    console.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt="%H:%M:%S"))
    logger.addHandler(console)

    if log_dir:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / f"{command}_{datetime.now().strftime('%Y%m%d')}.log"
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
        logger.addHandler(file_handler)
        logger.debug(f"logging to {log_file}")

    return logger


def get_logger(name: str = None) -> logging.Logger:
    """child logger, e.g. get_logger('training') -> ppf_dnn.training"""
    return logging.getLogger(f"{ROOT}.{name}" if name else ROOT)
