"""
cycap - Export Utilities Module
Save benchmark reports as JSON or CSV.
"""

import io
import os
import re
import csv
import json
from datetime import datetime
from typing import Any, Optional

from rich.console import Console

from cycap import config
from cycap.bench.harness import CSV_FIELDS, Report
from cycap.utils.log import err_console

console: Console = err_console


def ensure_output_dir() -> None:
    """Create output directory if it doesn't exist."""
    os.makedirs(config.OUTPUT_DIR, exist_ok=True)


def get_dated_output_path(filename: str) -> str:
    """Generate path with date-based subdirectory structure and sanitized filename."""
    # Sanitize filename to prevent path traversal
    filename = re.sub(r'[^\w\.-]', '_', os.path.basename(filename))

    today = datetime.now().strftime('%Y-%m-%d')
    target_dir = os.path.join(config.OUTPUT_DIR, today)
    os.makedirs(target_dir, exist_ok=True)
    return os.path.join(target_dir, filename)


def _resolve(path: Optional[str], default_name: str) -> str:
    if path:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return path
    ensure_output_dir()
    return get_dated_output_path(default_name)


def report_json(report: Report) -> str:
    data: dict[str, Any] = report.to_dict()
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def report_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction='ignore', lineterminator="\n")
    writer.writeheader()
    writer.writerows(report.csv_rows())
    return buf.getvalue()


def save_report_json(report: Report, path: Optional[str] = None) -> str:
    """Save a report as JSON; returns the written path."""
    filepath = _resolve(path, f"{report.instance}_{report.variant}_report.json")
    with open(filepath, 'w', encoding='utf-8') as f:
        f.write(report_json(report))
    console.print(f"[green]✅ JSON saved:[/green] {filepath}")
    return filepath


def save_report_csv(report: Report, path: Optional[str] = None) -> str:
    """Save a report as CSV, one row per trial; returns the written path."""
    filepath = _resolve(path, f"{report.instance}_{report.variant}_report.csv")
    with open(filepath, 'w', newline='', encoding='utf-8') as f:
        f.write(report_csv(report))
    console.print(f"[green]✅ CSV saved:[/green] {filepath}")
    return filepath
