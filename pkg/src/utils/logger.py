from loguru import logger
import os
import sys
from pathlib import Path
from typing import Optional


def setup_logger(level: Optional[str] = None, log_dir: Optional[str] = None,
                 rotation: str = "1 day", retention: str = "7 days"):
    """
    Setup and configure the logger

    Calling it again replaces the sinks, so the CLI can raise or lower the
    level after the config has been read.
    """
    level = (level or os.getenv("MODESHAPE_LOG_LEVEL") or "INFO").upper()

    # Remove default handler
    logger.remove()

    # stderr keeps stdout free for command summaries
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",
        level=level
    )

    if log_dir:
        Path(log_dir).mkdir(parents=True, exist_ok=True)
        logger.add(
            str(Path(log_dir) / "modeshape_{time}.log"),
            rotation=rotation,
            retention=retention,
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
            level="DEBUG"
        )

    return logger
