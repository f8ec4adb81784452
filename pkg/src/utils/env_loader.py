"""
Environment Configuration Loader

Loads environment variables from the nearest .env file so that
MODESHAPE_* settings can live next to the working directory.
"""

from typing import Optional

from dotenv import find_dotenv, load_dotenv
from loguru import logger


def load_root_env(override: bool = False) -> Optional[str]:
    """
    Load environment variables from the nearest .env file.

    Variables already present in the process environment win unless
    ``override`` is set.

    Returns:
        Path of the loaded .env file, or None when none was found
    """
    env_file = find_dotenv(usecwd=True)
    if not env_file:
        logger.debug("No .env file found, using process environment only")
        return None

    load_dotenv(env_file, override=override)
    logger.debug(f"Loaded environment from: {env_file}")
    return env_file
