"""
Utility Functions for Reports
"""

from pathlib import Path
from typing import Optional, Tuple

import pandas as pd

from config import Config
from report_helpers.constants import HASH_PREFIX


def report_path(config: Config, file_name: str) -> Path:
    """Path of a report inside the output tree, creating the directory."""
    return config.ensure_output_dir(config.reports_path) / file_name


def write_report_csv(df: pd.DataFrame, path: Path, config_hash: Optional[str]) -> Path:
    """
    Write a report with a leading provenance comment and a header row.

    Args:
        df: Report table
        path: Destination file
        config_hash: Provenance hash (written as "none" when missing)

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"{HASH_PREFIX}{config_hash or 'none'}\n")
        df.to_csv(fh, index=False)
    return path


def read_report_hash(path: Path) -> Optional[str]:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
    if first.startswith(HASH_PREFIX):
        return first[len(HASH_PREFIX):]
    return None


def read_report_csv(path: Path) -> Tuple[pd.DataFrame, Optional[str]]:
    """Load a report written by `write_report_csv`; returns (table, config hash)."""
    return pd.read_csv(path, comment="#"), read_report_hash(path)
