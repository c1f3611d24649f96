import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Union

from loguru import logger as loguru_logger

from src.utils.config import settings

LOG_FORMAT = ("<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | <level>{level: <8}</level> | "
              "<cyan>{name}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>")
RUN_LOG_FORMAT = "{time:HH:mm:ss.SSS} | {level: <8} | {name}:{line} - {message}"
ROTATING = {"rotation": "10 MB", "retention": "1 month", "compression": "zip"}


class InterceptHandler(logging.Handler):
    """Route stdlib logging records (scipy, joblib, py.warnings) into loguru."""

    def emit(self, record):
        try:
            level = loguru_logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        frame, depth = logging.currentframe(), 2
        while frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1

        loguru_logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def configure_logging(level: Optional[str] = None, log_dir: Union[str, Path, None] = None) -> None:
    """
    Install the console sink and the rotating `app.log` / `errors.log` sinks.

    Args:
        level: Minimum level (DEBUG when settings.DEBUG, else settings.LOG_LEVEL)
        log_dir: Directory of the rotating files (settings.LOG_DIR)
    """
    level = level or ("DEBUG" if settings.DEBUG else settings.LOG_LEVEL)
    directory = Path(log_dir or settings.LOG_DIR)
    directory.mkdir(parents=True, exist_ok=True)
    loguru_logger.configure(handlers=[
        {"sink": sys.stderr, "format": LOG_FORMAT, "level": level, "colorize": True},
        {"sink": directory / "app.log", "format": LOG_FORMAT, "level": level, **ROTATING},
        {"sink": directory / "errors.log", "format": LOG_FORMAT, "level": "ERROR", **ROTATING},
    ])
    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)
    logging.captureWarnings(True)
    for name in ("py.warnings", "joblib"):
        logging.getLogger(name).handlers = [InterceptHandler()]


@contextmanager
def run_log(output_dir: Union[str, Path]):
    """Copy every record emitted inside the block to `<output_dir>/run.log`."""
    path = Path(output_dir)
    path.mkdir(parents=True, exist_ok=True)
    handler_id = loguru_logger.add(path / "run.log", format=RUN_LOG_FORMAT, level="DEBUG", mode="w")
    try:
        yield path / "run.log"
    finally:
        loguru_logger.remove(handler_id)


configure_logging()

logger = loguru_logger
