"""
File utilities module.
Contains source reading, output writing and directory operations.
"""

import json
import os
from logging_config import get_logger

logger = get_logger()

OUTPUT_SUFFIX = ".qlo"


def read_source(path):
    """
    Read a loop program from disk.

    Args:
        path: Source file path

    Returns:
        str: File contents

    Raises:
        FileNotFoundError: If the file does not exist
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Source file {path} not found")
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    logger.debug(f"Read {len(text)} characters from {path}")
    return text


def default_output_path(source_path, output_dir=None):
    """
    Derive the output path for a compiled program.

    Args:
        source_path: Path of the input program
        output_dir: Optional directory to place the output in

    Returns:
        str: ``<stem>.qlo`` next to the source, or inside ``output_dir``
    """
    stem, _ = os.path.splitext(os.path.basename(source_path))
    directory = output_dir if output_dir else os.path.dirname(source_path)
    return os.path.join(directory, stem + OUTPUT_SUFFIX)


def write_output(path, text):
    """
    Write compiled output, creating parent directories as needed.

    Args:
        path: Destination path
        text: Output program text

    Returns:
        bool: True if the file was written
    """
    directory = os.path.dirname(path)
    if directory and not ensure_directory_exists(directory):
        return False
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    logger.info(f"Wrote {os.path.basename(path)} ({len(text)} bytes)")
    return True


def ensure_directory_exists(directory_path):
    """
    Ensure directory exists, create if it doesn't.

    Args:
        directory_path: Directory path to ensure

    Returns:
        bool: True if directory exists or was created successfully
    """
    try:
        os.makedirs(directory_path, exist_ok=True)
        return True
    except Exception as e:
        logger.error(f"Failed to create directory {directory_path}: {e}")
        return False


def write_json(path, data):
    """
    Write a JSON document with a trailing newline, keys in insertion order.

    Args:
        path: Destination path
        data: JSON-serialisable object

    Returns:
        bool: True if the file was written
    """
    return write_output(path, json.dumps(data, indent=2) + "\n")
