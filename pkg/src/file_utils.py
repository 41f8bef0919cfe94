import json
import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional

from src.logging_utils import LOG_PATH_ENV

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3


def sanitize_input_path(path: str) -> str:
    """
    Sanitize input file path - allows absolute paths but prevents directory traversal

    Args:
        path: File path to sanitize

    Returns:
        Normalized safe path

    Raises:
        ValueError: If path contains directory traversal attempts
    """
    if '..' in os.path.normpath(path).split(os.sep):
        raise ValueError(f"Unsafe file path detected (directory traversal): {path}")
    return os.path.normpath(path)


def log_error_and_exit(message: str, logger=None, exit_code: int = EXIT_RUNTIME_ERROR) -> None:
    """
    Log error message and exit with specified code

    Args:
        message: Error message to log and print
        logger: Optional logger for error reporting
        exit_code: Exit code (2 for configuration problems, 3 for run failures)
    """
    print(message)
    if logger:
        logger.error(message)
    sys.exit(exit_code)


def resolve_output_dir(out: Optional[str], logger=None) -> str:
    """
    Pick the output directory: --out when given (created if missing),
    otherwise the FREQHOP_LOG_PATH directory, which must already exist

    Raises:
        SystemExit: with code 2 when no usable directory is available
    """
    if out:
        try:
            out_dir = Path(sanitize_input_path(out))
        except ValueError as ve:
            log_error_and_exit(f"❌ Error: {ve}", logger, EXIT_CONFIG_ERROR)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            log_error_and_exit(f"❌ Error: Cannot create output directory '{out_dir}': {e}", logger, EXIT_CONFIG_ERROR)
    else:
        log_path = os.environ.get(LOG_PATH_ENV)
        if not log_path:
            log_error_and_exit(
                f"❌ Error: No output directory. Pass --out or set {LOG_PATH_ENV} to an existing directory and re-run.",
                logger, EXIT_CONFIG_ERROR)
        out_dir = Path(log_path).resolve()
        if not out_dir.exists():
            log_error_and_exit(
                f"❌ Error: {LOG_PATH_ENV} directory '{out_dir}' does not exist. Please create the directory first and re-run.",
                logger, EXIT_CONFIG_ERROR)

    if not out_dir.is_dir():
        log_error_and_exit(f"❌ Error: Output path '{out_dir}' is not a directory.", logger, EXIT_CONFIG_ERROR)
    if not os.access(str(out_dir), os.W_OK):
        log_error_and_exit(f"❌ Error: Output directory '{out_dir}' is not writable. Please check permissions and re-run.",
                           logger, EXIT_CONFIG_ERROR)
    if logger:
        logger.info(f"Writing results to: {out_dir}")
    return str(out_dir)


def build_output_path(out_dir: str, filename: str) -> str:
    """
    Join a bare filename onto the output directory

    Raises:
        ValueError: filename carries a path component or resolves outside out_dir
    """
    safe_filename = Path(filename).name
    if not safe_filename or safe_filename in ('.', '..') or safe_filename != filename:
        raise ValueError(f"Invalid filename: {filename}")
    base = Path(out_dir).resolve()
    output_path = base / safe_filename
    if output_path.resolve().parent != base:
        raise ValueError(f"Path traversal attempt detected in filename: {filename}")
    return str(output_path)


def safe_write_json(data: Dict[str, Any], output_path: str, logger=None) -> None:
    """
    Write JSON with sorted keys and no volatile fields, so equal inputs give equal bytes

    Raises:
        SystemExit: with code 3 on any file writing error
    """
    safe_output_path = sanitize_input_path(output_path)

    try:
        with open(safe_output_path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2, sort_keys=True, allow_nan=False)
            f.write('\n')

        success_msg = f"📄 Created file: {safe_output_path}"
        print(success_msg)
        if logger:
            logger.info(success_msg)

    except PermissionError:
        log_error_and_exit(f"❌ Error: Permission denied writing to {safe_output_path}", logger)
    except (OSError, ValueError, TypeError) as e:
        log_error_and_exit(f"❌ Error: Failed to write file {safe_output_path}: {e}", logger)


def validate_file_exists(file_path: str, logger=None) -> None:
    """
    Raises:
        SystemExit: with code 2 if the file doesn't exist
    """
    if not os.path.isfile(file_path):
        log_error_and_exit(f"❌ Error: File not found: {file_path}", logger, EXIT_CONFIG_ERROR)


def validate_positive_integer(value: Optional[int], field_name: str, logger=None) -> None:
    """
    Raises:
        SystemExit: with code 2 if value is given and not positive
    """
    if value is not None and value <= 0:
        log_error_and_exit(f"❌ Error: {field_name} must be a positive integer, got: {value}", logger, EXIT_CONFIG_ERROR)


def validate_non_negative_integer(value: Optional[int], field_name: str, logger=None) -> None:
    """
    Raises:
        SystemExit: with code 2 if value is given and negative
    """
    if value is not None and value < 0:
        log_error_and_exit(f"❌ Error: {field_name} must be a non-negative integer, got: {value}", logger,
                           EXIT_CONFIG_ERROR)
