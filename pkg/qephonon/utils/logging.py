"""
Logging setup for the command line and helpers used by the services

Console output goes to stderr so artifacts printed on stdout stay parseable.
The rotating log file always records DEBUG, including per-point engine logs.
"""

import functools
import inspect
import logging
import math
import sys
import time
from contextlib import contextmanager
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence

from ..config import get_settings

CONSOLE_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(processName)s - %(funcName)s:%(lineno)d - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Loggers that chatter during propagation and quadrature
ENGINE_LOGGERS = ("qephonon.tempo", "qephonon.bath", "qephonon.lineshape")


def setup_logging(
    console_level: Optional[str] = None,
    file_level: Optional[str] = None,
    log_file: Optional[str] = None
) -> None:
    """
    Install the console and rotating-file handlers on the root logger

    Args:
        console_level: Console log level override
        file_level: File log level override (default DEBUG)
        log_file: Log file path override
    """
    settings = get_settings()

    console_level = (console_level or settings.log_level).upper()
    file_level = (file_level or "DEBUG").upper()
    log_path = Path(log_file or settings.log_file)

    root_logger = logging.getLogger()
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(console_level)
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt=DATE_FORMAT))
    root_logger.addHandler(console_handler)

    try:
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_path,
            maxBytes=settings.log_max_bytes,
            backupCount=settings.log_backup_count,
            encoding="utf-8",
        )
    except OSError as e:
        root_logger.warning(f"File logging disabled, cannot open {log_path}: {e}")
    else:
        file_handler.setLevel(file_level)
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt=DATE_FORMAT))
        root_logger.addHandler(file_handler)

    root_logger.setLevel(logging.DEBUG)
    for noisy in ("asyncio", "matplotlib", "numba"):
        logging.getLogger(noisy).setLevel(logging.WARNING)

    logging.getLogger(__name__).debug(f"Console level: {console_level}, file level: {file_level}, log file: {log_path}")


def get_logger(name: str) -> logging.Logger:
    """Logger below the package namespace"""
    return logging.getLogger(name)


@contextmanager
def quiet_engine(level: str = "ERROR", names: Sequence[str] = ENGINE_LOGGERS) -> Iterator[None]:
    """
    Raise the threshold of the engine loggers for the duration of a block

    Scan workers evaluate thousands of points; their per-point warnings are
    summarized by the scan instead.
    """
    loggers = [logging.getLogger(name) for name in names]
    previous = [lg.level for lg in loggers]
    threshold = getattr(logging, level.upper())
    for lg in loggers:
        lg.setLevel(threshold)
    try:
        yield
    finally:
        for lg, old in zip(loggers, previous):
            lg.setLevel(old)


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.6g}"
    shape = getattr(value, "shape", None)
    if shape is not None and len(shape) > 0:
        return f"<array {'x'.join(map(str, shape))}>"
    return str(value)


class StructuredLogger:
    """
    ``message | key=value | key=value`` records for run summaries

    Floats are printed with six significant digits and arrays by shape.
    """

    def __init__(self, logger: logging.Logger):
        self.logger = logger

    def info(self, message: str, **fields):
        self.log(logging.INFO, message, **fields)

    def debug(self, message: str, **fields):
        self.log(logging.DEBUG, message, **fields)

    def warning(self, message: str, **fields):
        self.log(logging.WARNING, message, **fields)

    def error(self, message: str, **fields):
        self.log(logging.ERROR, message, **fields)

    @staticmethod
    def format(message: str, **fields) -> str:
        if not fields:
            return message
        return " | ".join([message, *(f"{k}={_format_value(v)}" for k, v in fields.items())])

    def log(self, level: int, message: str, **fields):
        if self.logger.isEnabledFor(level):
            self.logger.log(level, self.format(message, **fields))


def get_structured_logger(name: str) -> StructuredLogger:
    return StructuredLogger(logging.getLogger(name))


def log_stage(logger: logging.Logger):
    """Log start, wall time and failure of a workflow stage (sync or async)"""
    def decorator(func):
        name = func.__qualname__

        def _finish(started: float) -> None:
            logger.debug(f"{name} finished in {time.perf_counter() - started:.2f} s")

        if inspect.iscoroutinefunction(func):
            @functools.wraps(func)
            async def async_wrapper(*args, **kwargs):
                logger.debug(f"{name} started")
                started = time.perf_counter()
                try:
                    result = await func(*args, **kwargs)
                except Exception as e:
                    logger.error(f"{name} failed after {time.perf_counter() - started:.2f} s: {e}")
                    raise
                _finish(started)
                return result
            return async_wrapper

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger.debug(f"{name} started")
            started = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error(f"{name} failed after {time.perf_counter() - started:.2f} s: {e}")
                raise
            _finish(started)
            return result

        return wrapper
    return decorator
