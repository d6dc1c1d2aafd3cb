"""
Snapshot Files
==============

Binary field snapshots: a textual header, one "key: value" per line, closed
by an "end-header" line, followed by raw little-endian float64 physical-space
values in row-major order (component axes first).

Header keys: format-version, field-name, d, N_axis, L_box, time,
component-shape, endianness, and optionally config-hash.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from core.spectral_core import Grid, GridMismatchError, SpectralField, transform_forward

_logger = logging.getLogger("snapshot")

FORMAT_VERSION = 1
END_OF_HEADER = "end-header"
REQUIRED_KEYS = ("format-version", "field-name", "d", "N_axis", "L_box", "time", "component-shape", "endianness")


class SnapshotFormatError(ValueError):
    """Raised for unreadable or inconsistent snapshot files."""


@dataclass(frozen=True, eq=False)
class Snapshot:
    name: str
    time: float
    field: SpectralField
    header: Dict[str, str]


def _component_text(shape: Tuple[int, ...]) -> str:
    return "x".join(str(n) for n in shape) if shape else "scalar"


def _parse_components(text: str) -> Tuple[int, ...]:
    if text == "scalar":
        return ()
    try:
        return tuple(int(part) for part in text.split("x"))
    except ValueError as e:
        raise SnapshotFormatError(f"bad component-shape {text!r}") from e


def write_snapshot(
    path: Union[str, Path],
    name: str,
    field: SpectralField,
    time: float,
    config_hash: Optional[str] = None,
) -> Path:
    """
    Write one field to disk.

    Args:
        path: Destination file
        name: Field name stored in the header (e.g. "Q", "u")
        field: Field to store (physical values are written)
        time: Simulation time
        config_hash: Optional provenance hash

    Returns:
        Path written
    """
    path = Path(path)
    grid = field.grid
    header = {
        "format-version": str(FORMAT_VERSION),
        "field-name": name,
        "d": str(grid.d),
        "N_axis": str(grid.n_axis),
        "L_box": repr(float(grid.l_box)),
        "time": repr(float(time)),
        "component-shape": _component_text(field.component_shape),
        "endianness": "little",
    }
    if config_hash:
        header["config-hash"] = config_hash
    text = "".join(f"{key}: {value}\n" for key, value in header.items()) + END_OF_HEADER + "\n"
    payload = np.ascontiguousarray(field.physical, dtype="<f8").tobytes(order="C")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(text.encode("ascii"))
        fh.write(payload)
    _logger.debug(f"snapshot written path={path} name={name} t={time}")
    return path


def read_header(path: Union[str, Path]) -> Tuple[Dict[str, str], int]:
    """Parse the header; returns the key map and the byte offset of the data."""
    header: Dict[str, str] = {}
    offset = 0
    with open(path, "rb") as fh:
        while True:
            raw = fh.readline()
            if not raw:
                raise SnapshotFormatError(f"{path}: missing {END_OF_HEADER!r} line")
            offset += len(raw)
            line = raw.decode("ascii", errors="replace").rstrip("\n")
            if line == END_OF_HEADER:
                break
            key, sep, value = line.partition(":")
            if not sep:
                raise SnapshotFormatError(f"{path}: malformed header line {line!r}")
            header[key.strip()] = value.strip()

    missing = [key for key in REQUIRED_KEYS if key not in header]
    if missing:
        raise SnapshotFormatError(f"{path}: header lacks {missing}")
    if header["format-version"] != str(FORMAT_VERSION):
        raise SnapshotFormatError(f"{path}: unsupported format-version {header['format-version']!r}")
    if header["endianness"] != "little":
        raise SnapshotFormatError(f"{path}: unsupported endianness {header['endianness']!r}")
    return header, offset


def read_snapshot(path: Union[str, Path], expected_grid: Optional[Grid] = None) -> Snapshot:
    """
    Load a snapshot and transform it back to a spectral field.

    Raises:
        SnapshotFormatError: bad header or truncated data
        GridMismatchError: header grid differs from expected_grid
    """
    header, offset = read_header(path)
    try:
        grid = Grid(d=int(header["d"]), n_axis=int(header["N_axis"]), l_box=float(header["L_box"]))
        time = float(header["time"])
    except ValueError as e:
        raise SnapshotFormatError(f"{path}: {e}") from e
    if expected_grid is not None:
        if (grid.d, grid.n_axis, grid.l_box) != (expected_grid.d, expected_grid.n_axis, expected_grid.l_box):
            raise GridMismatchError(f"{path}: snapshot grid {grid} does not match {expected_grid}")
        grid = expected_grid

    shape = _parse_components(header["component-shape"]) + grid.shape
    count = int(np.prod(shape))
    data = np.fromfile(path, dtype="<f8", offset=offset)
    if data.size != count:
        raise SnapshotFormatError(f"{path}: expected {count} values, found {data.size}")
    field = transform_forward(grid, data.reshape(shape))
    return Snapshot(name=header["field-name"], time=time, field=field, header=header)


def field_statistics(field: SpectralField) -> Dict[str, Dict[str, float]]:
    """Min / max / L2 per component, keyed by component index text."""
    values = field.physical
    grid = field.grid
    comp_shape = field.component_shape
    stats: Dict[str, Dict[str, float]] = {}
    for index in np.ndindex(*comp_shape):
        component = values[index]
        label = ",".join(str(i) for i in index) or "scalar"
        stats[label] = {
            "min": float(component.min()),
            "max": float(component.max()),
            "L2": float(np.sqrt(grid.volume * np.mean(component ** 2))),
        }
    return stats
