"""
Common utility functions for the attack lab.
"""

import os
import sys
import json
import logging

import numpy as np

from src.utils import settings
from src.utils.errors import ParseError

def ensure_directory_exists(directory_path):
    """
    Ensures that the specified directory exists, creating it if necessary.

    Args:
        directory_path (str): Path to the directory that should exist

    Returns:
        str: The absolute path to the directory
    """
    os.makedirs(directory_path, exist_ok=True)
    return os.path.abspath(directory_path)

def get_project_root():
    """
    Returns the absolute path to the project root directory.

    Returns:
        str: Absolute path to the project root
    """
    # utils -> src -> root
    current_dir = os.path.dirname(os.path.abspath(__file__))
    return os.path.abspath(os.path.join(current_dir, "..", ".."))

def get_fixtures_dir():
    """Returns the path to the shipped instance fixtures."""
    return os.path.join(get_project_root(), "fixtures")

def get_output_dir(output_dir=None):
    """
    Returns the path to the output directory, creating it if necessary.

    Args:
        output_dir (str, optional): Explicit directory; falls back to
            ATTACK_LAB_OUTPUT_DIR, then <project root>/output.

    Returns:
        str: Path to the output directory
    """
    if output_dir is None:
        output_dir = settings.OUTPUT_DIR or os.path.join(get_project_root(), "output")
    return ensure_directory_exists(output_dir)

def load_json_file(file_path):
    """
    Loads JSON from a file, raising ParseError with the failing line.

    Args:
        file_path (str): Path to the JSON file

    Returns:
        dict or list: Loaded JSON data
    """
    if not os.path.exists(file_path):
        raise ParseError("file not found", path=file_path)
    if os.path.getsize(file_path) == 0:
        raise ParseError("file is empty", path=file_path)
    with open(file_path, 'r') as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, path=file_path, line=e.lineno) from e

def json_default(value):
    """json default hook for numpy scalars and arrays."""
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")

def write_json_file(file_path, data):
    """
    Writes data as indented JSON with sorted keys.

    Args:
        file_path (str): Destination path
        data (dict): Payload; numpy scalars and arrays are converted

    Returns:
        str: The path written
    """
    ensure_directory_exists(os.path.dirname(os.path.abspath(file_path)))
    with open(file_path, 'w') as f:
        json.dump(data, f, indent=2, sort_keys=True, default=json_default)
        f.write("\n")
    return file_path

def configure_logging(verbose=False):
    """
    Configures root logging once for an entrypoint.

    Args:
        verbose (bool): Use DEBUG level when True.
    """
    logging.basicConfig(
        level=settings.log_level(verbose),
        format=settings.LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )
