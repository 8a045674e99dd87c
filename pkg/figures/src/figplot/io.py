"""CSV loading with column validation."""

import csv
from pathlib import Path


class SchemaError(ValueError):
    pass


def read_rows(path, required_columns):
    """Read a CSV into dicts, failing loudly on missing columns or no data."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required_columns:
            if column not in header:
                raise SchemaError(f"{path}: missing required column {column!r}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows
