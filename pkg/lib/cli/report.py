import csv
import json
from pathlib import Path
from typing import Any

import numpy as np

# Columns identifying a trial rather than measuring it
ID_COLUMNS = ("trial", "seed")


def _columns(rows: list[dict[str, Any]]) -> list[str]:
    columns: list[str] = []
    for row in rows:
        columns += [key for key in row if key not in columns]
    return columns


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trials_csv(path: Path, rows: list[dict[str, Any]]) -> None:
    columns = _columns(rows)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(column)) for column in columns])


def summarize(rows: list[dict[str, Any]]) -> dict[str, dict[str, float | int]]:
    """Mean and sample standard deviation (0 for a single value) per metric column."""
    summary: dict[str, dict[str, float | int]] = {}
    for column in _columns(rows):
        if column in ID_COLUMNS:
            continue
        values = [float(row[column]) for row in rows if row.get(column) is not None]
        if not values:
            continue
        sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        summary[column] = {"mean": float(np.mean(values)), "sd": sd, "count": len(values)}
    return summary


def write_summary_json(
    path: Path, rows: list[dict[str, Any]], config: dict[str, Any]
) -> dict[str, Any]:
    document = {
        "config": config,
        "runs": len(rows),
        "seeds": [row["seed"] for row in rows],
        "metrics": summarize(rows),
    }
    with path.open("w") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        _ = f.write("\n")
    return document
