"""
Configuration Module for Q-Tensor Flow Simulations
==================================================

This module provides output path management and the run configuration.
All operations should take paths from `Config` and run parameters from
`RunConfig` so that every artifact lands in the same place and carries the
same provenance hash.

Usage:
    from config import Config, load_run_config

    config = Config("runs/demo")
    run_config = load_run_config("demo.ini", overrides=["stepper.dt=5e-4"], seed=3)
    print(config.reports_path, run_config.config_hash)

Run configuration files are INI files with the sections [grid], [model],
[stepper], [regularization], [initial] and [output]; see README.md for the
full grammar. Unknown sections or keys are rejected.
"""

import configparser
import hashlib
import logging
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Optional, Union

from core.initial_conditions import InitialConditionConfig
from core.qtensor_model import ModelParams
from core.solver import RegularizationConfig, StepperConfig
from core.spectral_core import Grid

_logger = logging.getLogger("config")

THREADS_ENV_VAR = "QTF_THREADS"


class ConfigError(ValueError):
    """Raised for unreadable, unknown or invalid configuration entries."""


class Config:
    """
    Output locations of one invocation.

    Everything a command writes (diagnostics, reports, snapshots, the ops log)
    lives below a single output root.
    """

    def __init__(self, output_root: Optional[Union[str, Path]] = None):
        """
        Args:
            output_root: Output directory; defaults to ./output
        """
        self._output_root = Path(output_root) if output_root else Path.cwd() / "output"

    # ==========================================
    # Output Paths
    # ==========================================

    @property
    def output_path(self) -> Path:
        """Root of all outputs."""
        return self._output_root

    @property
    def snapshots_path(self) -> Path:
        """Binary field snapshots."""
        return self._output_root / "snapshots"

    @property
    def reports_path(self) -> Path:
        """CSV reports (diagnostics, audits, lp-checks)."""
        return self._output_root / "reports"

    @property
    def logs_path(self) -> Path:
        return self._output_root / "logs"

    @property
    def ops_log_file(self) -> Path:
        return self.logs_path / "ops.log"

    # ==========================================
    # Utility Methods
    # ==========================================

    def ensure_output_dir(self, output_path: Path) -> Path:
        """
        Ensure output directory exists, create if necessary.

        Args:
            output_path: Path to output directory

        Returns:
            The same path (for chaining)
        """
        output_path.mkdir(parents=True, exist_ok=True)
        return output_path

    def __repr__(self) -> str:
        return (
            f"Config(\n"
            f"  output_path={self.output_path}\n"
            f"  reports_path={self.reports_path}\n"
            f"  snapshots_path={self.snapshots_path}\n"
            f")"
        )


# ==========================================
# Run Configuration
# ==========================================

@dataclass(frozen=True)
class OutputConfig:
    """
    Attributes:
        directory: Output root (overridden by --out)
        snapshot_cadence: Write snapshots every this many diagnostic rows (0 disables)
    """
    directory: str = "output"
    snapshot_cadence: int = 0

    def __post_init__(self):
        if self.snapshot_cadence < 0:
            raise ValueError(f"snapshot_cadence must be >= 0, got {self.snapshot_cadence}")


@dataclass(frozen=True)
class RunConfig:
    grid: Grid = field(default_factory=Grid)
    model: ModelParams = field(default_factory=ModelParams)
    stepper: StepperConfig = field(default_factory=StepperConfig)
    initial: InitialConditionConfig = field(default_factory=InitialConditionConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    config_hash: str = ""

    @property
    def threads(self) -> int:
        return self.grid.workers


def _parse_bool(text: str) -> bool:
    states = configparser.ConfigParser.BOOLEAN_STATES
    lowered = text.strip().lower()
    if lowered not in states:
        raise ValueError(f"not a boolean: {text!r}")
    return states[lowered]


def _parse_optional_path(text: str) -> Optional[str]:
    text = text.strip()
    return text or None


def _parse_int(text: str) -> int:
    return int(text.strip())


# section -> key -> converter; defaults come from the block dataclasses
SCHEMA: Dict[str, Dict[str, Callable[[str], Any]]] = {
    "grid": {"d": _parse_int, "n_axis": _parse_int, "l_box": float, "dealias_fraction": float},
    "model": {
        "a": float, "b": float, "c": float, "L": float, "gamma": float, "nu": float,
        "lam": float, "xi": float, "d_target": _parse_int, "xi_threshold": float,
    },
    "stepper": {"dt": float, "scheme": str.strip, "t_final": float, "cadence": _parse_int, "implicit_bulk": _parse_bool},
    "regularization": {"enabled": _parse_bool, "n": _parse_int, "eps": float},
    "initial": {
        "q_generator": str.strip, "u_generator": str.strip, "seed": _parse_int, "amplitude": float,
        "slope": float, "k_max": _parse_int, "kappa": float, "snapshot_q": _parse_optional_path,
        "snapshot_u": _parse_optional_path, "perturbation": float, "perturbation_seed": _parse_int,
    },
    "output": {"directory": str.strip, "snapshot_cadence": _parse_int},
}

_SECTION_TYPES = {
    "grid": Grid,
    "model": ModelParams,
    "stepper": StepperConfig,
    "regularization": RegularizationConfig,
    "initial": InitialConditionConfig,
    "output": OutputConfig,
}


def _defaults(section: str) -> Dict[str, Any]:
    return {f.name: getattr(_SECTION_TYPES[section](), f.name) for f in fields(_SECTION_TYPES[section]) if f.name in SCHEMA[section]}


def _read_parser(path: Optional[Union[str, Path]]) -> configparser.ConfigParser:
    # keys are case-sensitive (L vs l)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    if path is None:
        return parser
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from e
    return parser


def _apply_overrides(values: Dict[str, Dict[str, str]], overrides: Iterable[str]):
    for item in overrides:
        target, sep, value = item.partition("=")
        section, dot, key = target.strip().partition(".")
        if not sep or not dot or not section or not key:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        values.setdefault(section, {})[key] = value


def _resolve_threads(threads: Optional[int]) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV_VAR)
        if env is None:
            return 1
        try:
            threads = int(env)
        except ValueError as e:
            raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {env!r}") from e
    if threads < 1:
        raise ConfigError(f"thread count must be >= 1, got {threads}")
    return threads


def canonical_text(typed: Dict[str, Dict[str, Any]]) -> str:
    """Sorted, normalized `section.key=value` lines of the effective configuration."""
    lines = []
    for section in sorted(typed):
        for key in sorted(typed[section]):
            lines.append(f"{section}.{key}={typed[section][key]!r}")
    return "\n".join(lines) + "\n"


def hash_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Iterable[str] = (),
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> RunConfig:
    """
    Parse and validate a run configuration.

    Args:
        path: INI file (None uses defaults only)
        overrides: "section.key=value" strings applied after the file
        seed: Replaces [initial] seed when given
        threads: FFT worker count (falls back to QTF_THREADS, then 1)

    Returns:
        Frozen RunConfig with its provenance hash

    Raises:
        ConfigError: unknown section/key, unparsable value or failed validation
    """
    parser = _read_parser(path)
    raw: Dict[str, Dict[str, str]] = {section: dict(parser[section]) for section in parser.sections()}
    _apply_overrides(raw, overrides)
    if seed is not None:
        raw.setdefault("initial", {})["seed"] = str(seed)

    typed: Dict[str, Dict[str, Any]] = {}
    for section, entries in raw.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]; expected one of {sorted(SCHEMA)}")
        for key in entries:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}; expected one of {sorted(SCHEMA[section])}")

    for section, converters in SCHEMA.items():
        values = _defaults(section)
        for key, text in raw.get(section, {}).items():
            try:
                values[key] = converters[key](text)
            except ValueError as e:
                raise ConfigError(f"{section}.{key}: cannot parse {text!r} ({e})") from e
        typed[section] = values

    workers = _resolve_threads(threads)
    try:
        grid = Grid(**typed["grid"], workers=workers)
        model = ModelParams(**typed["model"])
        regularization = RegularizationConfig(**typed["regularization"])
        stepper = StepperConfig(**typed["stepper"], regularization=regularization)
        initial = InitialConditionConfig(**typed["initial"])
        output = OutputConfig(**typed["output"])
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e
    if model.d_target < grid.d:
        raise ConfigError(f"model.d_target={model.d_target} is below grid.d={grid.d}")
    if initial.q_generator == "random-bandlimited" or initial.u_generator == "random-bandlimited":
        if initial.k_max > grid.dealias_cutoff:
            raise ConfigError(f"initial.k_max={initial.k_max} exceeds the dealias cutoff {grid.dealias_cutoff}")

    digest = hash_text(canonical_text(typed))
    _logger.info(f"config loaded path={path} hash={digest[:12]} threads={workers}")
    return RunConfig(grid=grid, model=model, stepper=stepper, initial=initial, output=output, config_hash=digest)


def with_output_directory(run_config: RunConfig, directory: Optional[str]) -> RunConfig:
    """Apply an --out override without touching the provenance hash."""
    if not directory:
        return run_config
    return replace(run_config, output=replace(run_config.output, directory=directory))

