#!/usr/bin/env python3
"""
Unit tests for CSV utilities
"""

import csv
import os
import sys
import tempfile
from unittest.mock import MagicMock, patch

import pytest

# Add root directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.csv_utils import read_count_records, write_table
from src.errors import ConfigurationError

RECORDS = [
    {"index": 0, "x_nm": 0.0, "p_D_A": 0.5, "label": "a"},
    {"index": 1, "x_nm": 12.5, "p_D_A": 1.0 / 3.0, "label": "b"},
]


def create_test_csv(data):
    """Helper to create a test CSV file"""
    tmp_file = tempfile.NamedTemporaryFile(mode='w', delete=False, suffix='.csv', newline='')
    with tmp_file as f:
        writer = csv.writer(f)
        for row in data:
            writer.writerow(row)
    return tmp_file.name


def read_text(path):
    with open(path, newline='') as f:
        return f.read()


class TestWriteTable:
    """Test CSV table writing"""

    def test_header_and_rows(self):
        """Test header order follows the first record"""
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = os.path.join(tmp_dir, "fringes.csv")
            write_table(RECORDS, path)
            lines = read_text(path).split('\n')
        assert lines[0] == "index,x_nm,p_D_A,label"
        assert lines[1] == "0,0,0.5,a"
        assert lines[2] == "1,12.5,0.333333333,b"

    def test_pandas_and_csv_agree(self):
        """Test that the csv fallback writes the same bytes as pandas"""
        with tempfile.TemporaryDirectory() as tmp_dir:
            with_pandas = os.path.join(tmp_dir, "a.csv")
            without_pandas = os.path.join(tmp_dir, "b.csv")
            write_table(RECORDS, with_pandas)
            with patch('src.csv_utils.PANDAS_AVAILABLE', False):
                write_table(RECORDS, without_pandas)
            assert read_text(with_pandas) == read_text(without_pandas)

    def test_mismatched_columns(self):
        """Test that records with different keys are rejected"""
        with tempfile.TemporaryDirectory() as tmp_dir:
            with pytest.raises(ValueError):
                write_table([{"a": 1}, {"b": 2}], os.path.join(tmp_dir, "x.csv"))

    def test_no_records(self):
        """Test that an empty table is rejected"""
        with pytest.raises(ValueError):
            write_table([], "unused.csv")

    def test_logs_row_count(self):
        """Test that the row count is logged"""
        mock_logger = MagicMock()
        with tempfile.TemporaryDirectory() as tmp_dir:
            write_table(RECORDS, os.path.join(tmp_dir, "t.csv"), mock_logger)
        assert "(2 rows)" in mock_logger.info.call_args[0][0]


class TestReadCountRecords:
    """Test raw count record reading"""

    def test_read_basic(self):
        """Test that counts are read as integers"""
        csv_file = create_test_csv([
            ['label', 'n_trials', 'n_a', 'n_b', 'n_c'],
            ['run1', '100000', '1015', '1223', '0'],
            ['run2', '1000', '100', '200', '20'],
        ])
        try:
            records = read_count_records(csv_file, logger=MagicMock())
        finally:
            os.unlink(csv_file)
        assert records == [
            {'label': 'run1', 'n_trials': 100000, 'n_a': 1015, 'n_b': 1223, 'n_c': 0},
            {'label': 'run2', 'n_trials': 1000, 'n_a': 100, 'n_b': 200, 'n_c': 20},
        ]

    @pytest.mark.parametrize("pandas_available", [True, False])
    def test_extra_columns_and_blank_label(self, pandas_available):
        """Test that extra columns are ignored and blank labels get a default"""
        csv_file = create_test_csv([
            ['label', 'n_trials', 'n_a', 'n_b', 'n_c', 'note'],
            ['', '10', '1', '2', '0', 'x'],
        ])
        try:
            with patch('src.csv_utils.PANDAS_AVAILABLE', pandas_available):
                records = read_count_records(csv_file)
        finally:
            os.unlink(csv_file)
        assert records == [{'label': 'record_1', 'n_trials': 10, 'n_a': 1, 'n_b': 2, 'n_c': 0}]

    def test_missing_columns(self):
        """Test that missing columns raise a configuration error"""
        csv_file = create_test_csv([['label', 'n_trials', 'n_a'], ['x', '10', '5']])
        try:
            with pytest.raises(ConfigurationError) as exc_info:
                read_count_records(csv_file)
        finally:
            os.unlink(csv_file)
        assert exc_info.value.key == 'n_b'

    @pytest.mark.parametrize("value", ['-1', '2.5', 'many'])
    def test_bad_counts(self, value):
        """Test that negative, fractional or non-numeric counts are rejected"""
        csv_file = create_test_csv([['label', 'n_trials', 'n_a', 'n_b', 'n_c'], ['x', '10', value, '2', '0']])
        try:
            with pytest.raises(ConfigurationError) as exc_info:
                read_count_records(csv_file)
        finally:
            os.unlink(csv_file)
        assert exc_info.value.key == 'n_a'

    def test_missing_file(self):
        """Test handling of missing CSV file"""
        with pytest.raises(ConfigurationError):
            read_count_records('/nonexistent/file.csv')

    def test_empty_file_has_no_records(self):
        """Test that a header-only file gives no records"""
        csv_file = create_test_csv([['label', 'n_trials', 'n_a', 'n_b', 'n_c']])
        try:
            assert read_count_records(csv_file) == []
        finally:
            os.unlink(csv_file)
