"""
Runtime settings for the attack lab, read from the environment.

A .env file in the working directory is loaded first if present.
"""

import os
import logging
from dotenv import load_dotenv

# Load environment variables if .env file exists
if os.path.exists('.env'):
    load_dotenv()

OUTPUT_DIR = os.getenv("ATTACK_LAB_OUTPUT_DIR")  # None -> <project root>/output
LOG_LEVEL = os.getenv("ATTACK_LAB_LOG_LEVEL", "INFO").upper()
WORKERS = int(os.getenv("ATTACK_LAB_WORKERS", "4"))
API_PORT = int(os.getenv("ATTACK_LAB_API_PORT", "5003"))
API_DEBUG = os.getenv("ATTACK_LAB_API_DEBUG", "false").strip().lower() in ("1", "true", "yes")

LOG_FORMAT = "%(asctime)s - %(module)s - %(levelname)s - %(message)s"


def log_level(verbose=False):
    """
    Resolves the logging level, with -v/--verbose forcing DEBUG.

    Args:
        verbose (bool): Whether verbose output was requested.

    Returns:
        int: A logging level constant.
    """
    if verbose:
        return logging.DEBUG
    return getattr(logging, LOG_LEVEL, logging.INFO)
