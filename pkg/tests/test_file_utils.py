#!/usr/bin/env python3
"""
Unit tests for file utilities
"""

import json
import os
import sys
import tempfile
from unittest.mock import MagicMock, patch

import pytest

# Add root directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.file_utils import (
    EXIT_CONFIG_ERROR,
    EXIT_RUNTIME_ERROR,
    build_output_path,
    log_error_and_exit,
    safe_write_json,
    sanitize_input_path,
    validate_file_exists,
    validate_non_negative_integer,
    validate_positive_integer,
)


class TestSanitizePath:
    """Test path sanitization functions"""

    def test_sanitize_input_path_allows_absolute(self):
        """Test that input path sanitization allows absolute paths"""
        result = sanitize_input_path("/absolute/path/config.yaml")
        assert result == "/absolute/path/config.yaml"

    def test_sanitize_input_path_rejects_traversal(self):
        """Test that input path sanitization rejects directory traversal"""
        with pytest.raises(ValueError, match="directory traversal"):
            sanitize_input_path("../../../etc/passwd")

    def test_sanitize_input_path_normal_relative(self):
        """Test normal relative path with input sanitization"""
        assert sanitize_input_path("configs/fringes.yaml") == "configs/fringes.yaml"

    def test_sanitize_input_path_collapses_inner_parent(self):
        """Test that a '..' which stays inside the path is normalized away"""
        assert sanitize_input_path("configs/extra/../fringes.yaml") == "configs/fringes.yaml"


class TestBuildOutputPath:
    """Test output file naming"""

    def test_joins_bare_filename(self):
        """Test that a bare filename lands in the output directory"""
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = build_output_path(tmp_dir, "fringes.csv")
            assert os.path.dirname(path) == os.path.realpath(tmp_dir)
            assert os.path.basename(path) == "fringes.csv"

    @pytest.mark.parametrize("filename", ["../fringes.csv", "sub/fringes.csv", "..", ""])
    def test_rejects_path_components(self, filename):
        """Test that filenames carrying directories are rejected"""
        with tempfile.TemporaryDirectory() as tmp_dir:
            with pytest.raises(ValueError):
                build_output_path(tmp_dir, filename)


class TestSafeWriteJson:
    """Test safe JSON writing functionality"""

    def test_safe_write_json_success(self):
        """Test successful JSON writing"""
        test_data = {"kind": "fringes", "metrics": {"ir_visibility": 1.0}}

        with tempfile.TemporaryDirectory() as tmp_dir:
            path = os.path.join(tmp_dir, "fringes_summary.json")
            safe_write_json(test_data, path)
            with open(path, 'r') as f:
                assert json.load(f) == test_data

    def test_keys_sorted(self):
        """Test that equal data gives equal bytes regardless of key order"""
        with tempfile.TemporaryDirectory() as tmp_dir:
            first = os.path.join(tmp_dir, "a.json")
            second = os.path.join(tmp_dir, "b.json")
            safe_write_json({"b": 1, "a": {"y": 2, "x": 3}}, first)
            safe_write_json({"a": {"x": 3, "y": 2}, "b": 1}, second)
            with open(first, 'rb') as f1, open(second, 'rb') as f2:
                assert f1.read() == f2.read()

    def test_safe_write_json_with_logger(self):
        """Test JSON writing with logger"""
        mock_logger = MagicMock()
        with tempfile.TemporaryDirectory() as tmp_dir:
            safe_write_json({"seed": 1}, os.path.join(tmp_dir, "out.json"), logger=mock_logger)
        mock_logger.info.assert_called()

    def test_nan_is_runtime_error(self):
        """Test that non-finite numbers cannot be written"""
        with tempfile.TemporaryDirectory() as tmp_dir:
            with pytest.raises(SystemExit) as exc_info:
                safe_write_json({"g2": float('nan')}, os.path.join(tmp_dir, "out.json"))
        assert exc_info.value.code == EXIT_RUNTIME_ERROR

    def test_missing_directory_is_runtime_error(self):
        """Test that an unwritable target exits with code 3"""
        with pytest.raises(SystemExit) as exc_info:
            safe_write_json({"seed": 1}, "/definitely/does/not/exist/out.json")
        assert exc_info.value.code == EXIT_RUNTIME_ERROR


class TestValidationFunctions:
    """Test validation helper functions"""

    def test_validate_positive_integer_valid(self):
        """Test validation of positive integers"""
        validate_positive_integer(5, "--max-workers")
        validate_positive_integer(1, "--max-workers")

    def test_validate_positive_integer_invalid(self):
        """Test validation rejects non-positive integers"""
        with pytest.raises(SystemExit) as exc_info:
            validate_positive_integer(0, "--max-workers")
        assert exc_info.value.code == EXIT_CONFIG_ERROR

    def test_validate_positive_integer_none(self):
        """Test that None means the flag was not given"""
        validate_positive_integer(None, "--max-workers")

    def test_validate_non_negative_integer(self):
        """Test that zero is allowed and negatives are rejected"""
        validate_non_negative_integer(0, "--trials")
        validate_non_negative_integer(None, "--trials")
        with pytest.raises(SystemExit) as exc_info:
            validate_non_negative_integer(-1, "--trials")
        assert exc_info.value.code == EXIT_CONFIG_ERROR

    def test_validate_file_exists_valid(self):
        """Test file existence validation with existing file"""
        with tempfile.NamedTemporaryFile(delete=False, suffix='.yaml') as tmp_file:
            temp_path = tmp_file.name
        try:
            validate_file_exists(temp_path)
        finally:
            os.unlink(temp_path)

    def test_validate_file_exists_missing(self):
        """Test file existence validation with missing file"""
        with pytest.raises(SystemExit) as exc_info:
            validate_file_exists("/nonexistent/file.yaml")
        assert exc_info.value.code == EXIT_CONFIG_ERROR

    def test_log_error_and_exit(self):
        """Test that the message is printed, logged and the code used"""
        mock_logger = MagicMock()
        with patch('builtins.print') as mock_print:
            with pytest.raises(SystemExit) as exc_info:
                log_error_and_exit("❌ Error: boom", mock_logger, EXIT_CONFIG_ERROR)
        assert exc_info.value.code == EXIT_CONFIG_ERROR
        mock_print.assert_called_once_with("❌ Error: boom")
        mock_logger.error.assert_called_once_with("❌ Error: boom")
