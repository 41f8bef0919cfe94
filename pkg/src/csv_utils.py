import csv
import math
from typing import Any, Dict, List, Sequence

from src.errors import ConfigurationError

try:
    import pandas as pd
    PANDAS_AVAILABLE = True
except ImportError:
    PANDAS_AVAILABLE = False

FLOAT_FORMAT = '%.9g'
COUNT_COLUMNS = ('label', 'n_trials', 'n_a', 'n_b', 'n_c')


def _format_cell(value: Any) -> Any:
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return value


def write_table(records: Sequence[Dict[str, Any]], output_path: str, logger=None) -> None:
    """
    Write records as a CSV table with a header row; floats at 9 significant digits

    Column order follows the first record. Every record must carry the same keys.
    """
    if not records:
        raise ValueError(f"No records to write to {output_path}")
    columns = list(records[0].keys())
    for index, record in enumerate(records):
        if list(record.keys()) != columns:
            raise ValueError(f"Record {index} has columns {list(record.keys())}, expected {columns}")

    if PANDAS_AVAILABLE:
        df = pd.DataFrame.from_records(list(records), columns=columns)
        df.to_csv(output_path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    else:
        with open(output_path, 'w', newline='', encoding='utf-8') as csvfile:
            writer = csv.writer(csvfile, lineterminator='\n')
            writer.writerow(columns)
            for record in records:
                writer.writerow([_format_cell(record[column]) for column in columns])

    message = f"📄 Created file: {output_path}"
    print(message)
    if logger:
        logger.info(f"{message} ({len(records)} rows)")


def _count(value: Any, column: str, row: int) -> int:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"Row {row}: '{column}' must be a count, got {value!r}", key=column) from None
    if not math.isfinite(number) or number < 0 or number != int(number):
        raise ConfigurationError(f"Row {row}: '{column}' must be a non-negative integer, got {value!r}", key=column)
    return int(number)


def read_count_records(csv_file_path: str, logger=None) -> List[Dict[str, Any]]:
    """
    Read raw count records with columns label, n_trials, n_a, n_b, n_c

    Raises:
        ConfigurationError: unreadable file, missing columns or non-integer counts
    """
    try:
        if PANDAS_AVAILABLE:
            df = pd.read_csv(csv_file_path, dtype={'label': str}, skipinitialspace=True)
            fieldnames = list(df.columns)
            rows = df.to_dict(orient='records')
        else:
            with open(csv_file_path, 'r', newline='', encoding='utf-8') as csvfile:
                reader = csv.DictReader(csvfile, skipinitialspace=True)
                fieldnames = list(reader.fieldnames or [])
                rows = list(reader)
    except (OSError, ValueError) as e:
        raise ConfigurationError(f"Cannot read count records from {csv_file_path}: {e}") from e

    missing = [column for column in COUNT_COLUMNS if column not in fieldnames]
    if missing:
        raise ConfigurationError(f"Count file is missing columns: {', '.join(missing)}", key=missing[0])

    records = []
    for index, row in enumerate(rows, start=1):
        label = str(row['label']).strip()
        records.append({
            'label': label if label and label.lower() != 'nan' else f"record_{index}",
            **{column: _count(row[column], column, index) for column in COUNT_COLUMNS[1:]},
        })
    if logger:
        logger.info(f"Read {len(records)} count records from {csv_file_path}")
    return records
