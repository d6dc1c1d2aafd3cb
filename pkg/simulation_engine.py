"""
Simulation Engine - Main API
============================

Unified API for running simulations, twin runs, audits and
Littlewood-Paley checks of the coupled flow / Q-tensor system.

Features:
    - Runs from a validated RunConfig (INI file + overrides)
    - Diagnostics, twin-run and audit reports as CSV with a provenance hash
    - Field snapshots at a configurable cadence
    - Exit codes: 0 pass, 2 usage/config, 3 numerical abort, 4 audit failure

Usage Example:
    from config import load_run_config
    from simulation_engine import SimulationEngine

    engine = SimulationEngine()
    result = engine.run_task("simulate", run_config=load_run_config("demo.ini"))
    print(result.outputs["diagnostics"])
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from config import Config, ConfigError, RunConfig, load_run_config
from core.analysis_audit import (
    AuditReport,
    audit_apriori_bound,
    audit_energy_balance,
    audit_fields,
    audit_k_max,
    audit_lyapunov_cancellations,
    audit_scaling,
    audit_uniqueness_cancellations,
    combine_reports,
    uniqueness_monitor,
)
from core.initial_conditions import build_initial_fields, perturbation_fields
from core.littlewood_paley import LP_CHECKS, PreconditionError, run_lp_check
from core.snapshot import SnapshotFormatError, field_statistics, read_snapshot, write_snapshot
from core.solver import DIAGNOSTIC_COLUMNS, NumericalAbortError, SimState, run, twin_run
from core.spectral_core import GridMismatchError
from operations.config import (
    APRIORI_FILE,
    AUDIT_FILE_TEMPLATE,
    AUDIT_KINDS,
    AUDIT_SERIES_TEMPLATE,
    DEFAULT_AUDIT_SEEDS,
    DEFAULT_ENERGY_REFINEMENTS,
    DEFAULT_LP_K_MAX,
    DEFAULT_LP_TRIALS,
    DEFAULT_LYAPUNOV_TOLERANCE,
    DEFAULT_MONITOR_TOLERANCE,
    DEFAULT_POWER_THRESHOLD,
    DEFAULT_PRODUCT_EXPONENTS,
    DEFAULT_RESIDUAL_TOLERANCE,
    DEFAULT_SCALING_DELTA,
    DEFAULT_SCALING_TOLERANCE,
    DEFAULT_UNIQUENESS_TOLERANCE,
    DIAGNOSTICS_FILE,
    LP_FLOORS,
    LP_REPORT_TEMPLATE,
    LP_THRESHOLDS,
    NEGATIVE_CONTROLS,
    SNAPSHOT_TEMPLATE,
    TWIN_FILE,
)
from report_helpers.constants import (
    EXIT_AUDIT_FAILURE,
    EXIT_NUMERICAL_ABORT,
    EXIT_OK,
    EXIT_USAGE,
)
from report_helpers.utils import report_path, write_report_csv

_logger = logging.getLogger("simulation_engine")

TASKS = ("simulate", "twin", "audit", "lp_check", "snapshot_info")

USAGE_ERRORS = (ConfigError, PreconditionError, GridMismatchError, SnapshotFormatError, ValueError, FileNotFoundError)


@dataclass
class TaskResult:
    """
    Result of one engine task.

    Attributes:
        success: Whether the task completed and every check passed
        operation: Task that was executed
        outputs: Dictionary of output file paths
        metadata: Additional metadata (steps, hashes, maxima, ...)
        errors: List of error messages if any
        exit_code: Process exit code for the command line
    """
    success: bool
    operation: str
    outputs: Dict[str, Path] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)
    errors: List[str] = field(default_factory=list)
    exit_code: int = EXIT_OK

    def __repr__(self) -> str:
        status = "✅ SUCCESS" if self.success else "❌ FAILED"
        return (
            f"TaskResult({status})\n"
            f"  Operation: {self.operation}\n"
            f"  Outputs: {len(self.outputs)} file(s)\n"
            f"  Errors: {len(self.errors)}\n"
            f"  Exit code: {self.exit_code}"
        )


# ==========================================
# Main Engine Class
# ==========================================

class SimulationEngine:
    """
    Main engine for executing simulation and verification tasks.

    Every task reads a RunConfig, writes its reports below the configured
    output directory and returns a TaskResult.
    """

    def __init__(self, config: Optional[Config] = None):
        """
        Args:
            config: Optional output Config; by default taken from each RunConfig
        """
        self.config = config

    # ==========================================
    # Main Task Execution
    # ==========================================

    def run_task(
        self,
        task: str,
        run_config: Optional[RunConfig] = None,
        verbose: bool = True,
        **options,
    ) -> TaskResult:
        """
        Run one task.

        Args:
            task: One of TASKS
            run_config: Validated configuration (defaults when None)
            verbose: Whether to print progress messages
            **options: Task-specific options (kind, seeds, check, trials, ...)

        Returns:
            TaskResult; errors are captured, never raised
        """
        if verbose:
            print(f"\n{'='*60}")
            print(f"🎯 Starting Task: {task}")
            print(f"{'='*60}")

        try:
            run_config = run_config or load_run_config()
            result = self._execute_operation(task, run_config, verbose, **options)
        except NumericalAbortError as e:
            _logger.error(f"{task} error: {e}")
            result = TaskResult(
                success=False,
                operation=task,
                errors=[str(e)],
                metadata={"abort_step": e.step, "abort_time": e.time},
                exit_code=EXIT_NUMERICAL_ABORT,
            )
        except USAGE_ERRORS as e:
            _logger.error(f"{task} error: {e}")
            result = TaskResult(success=False, operation=task, errors=[str(e)], exit_code=EXIT_USAGE)

        if verbose:
            if result.success:
                print(f"✅ {task} completed successfully")
            else:
                print(f"❌ {task} failed: {result.errors}")
        return result

    # ==========================================
    # Operation Execution
    # ==========================================

    def _execute_operation(self, task: str, run_config: RunConfig, verbose: bool, **options) -> TaskResult:
        operation_map = {
            "simulate": self._run_simulate,
            "twin": self._run_twin,
            "audit": self._run_audit,
            "lp_check": self._run_lp_check,
            "snapshot_info": self._run_snapshot_info,
        }
        if task not in operation_map:
            return TaskResult(
                success=False,
                operation=task,
                errors=[f"Task '{task}' not found; expected one of {TASKS}"],
                exit_code=EXIT_USAGE,
            )
        return operation_map[task](run_config=run_config, verbose=verbose, **options)

    def _output_config(self, run_config: RunConfig) -> Config:
        return self.config or Config(run_config.output.directory)

    def _initial_state(self, run_config: RunConfig) -> SimState:
        Q, u = build_initial_fields(run_config.grid, run_config.model.d_target, run_config.initial)
        return SimState(t=0.0, Q=Q, u=u)

    # ==========================================
    # Runs
    # ==========================================

    def _run_simulate(self, run_config: RunConfig, verbose: bool) -> TaskResult:
        config = self._output_config(run_config)
        state = self._initial_state(run_config)
        outputs: Dict[str, Path] = {}
        sinks = []
        cadence = run_config.output.snapshot_cadence
        if cadence > 0:
            snapshot_dir = config.ensure_output_dir(config.snapshots_path)
            counter = {"rows": 0}

            def snapshot_sink(current: SimState, row: Dict[str, float]):
                index = counter["rows"]
                counter["rows"] += 1
                if index % cadence:
                    return
                for name, fld in (("Q", current.Q), ("u", current.u)):
                    path = snapshot_dir / SNAPSHOT_TEMPLATE.format(name=name, index=index)
                    write_snapshot(path, name, fld, current.t, run_config.config_hash)

            sinks.append(snapshot_sink)

        if verbose:
            print(f"  ⚙️ Grid: {run_config.grid.n_axis}^{run_config.grid.d}, dt={run_config.stepper.dt}, "
                  f"T={run_config.stepper.t_final}, scheme={run_config.stepper.scheme}")

        trajectory = run(state, run_config.model, run_config.stepper, sinks=sinks)
        diagnostics = trajectory.diagnostics[DIAGNOSTIC_COLUMNS]
        outputs["diagnostics"] = write_report_csv(
            diagnostics, report_path(config, DIAGNOSTICS_FILE), run_config.config_hash
        )
        if cadence > 0:
            outputs["snapshots"] = config.snapshots_path
        if verbose:
            print(f"  💾 CSV saved: {outputs['diagnostics'].name}")

        metadata = dict(trajectory.metadata)
        metadata.update(
            rows=len(diagnostics),
            final_E=float(diagnostics["E"].iloc[-1]),
            max_abs_residual=float(diagnostics["residual"].abs().max()),
            config_hash=run_config.config_hash,
        )
        return TaskResult(success=True, operation="simulate", outputs=outputs, metadata=metadata)

    def _run_twin(self, run_config: RunConfig, verbose: bool, perturbation: Optional[float] = None) -> TaskResult:
        config = self._output_config(run_config)
        initial = run_config.initial
        if perturbation is not None:
            initial = replace(initial, perturbation=perturbation)
        state_a = self._initial_state(run_config)
        dq, du = perturbation_fields(run_config.grid, run_config.model.d_target, initial)
        state_b = SimState(t=0.0, Q=state_a.Q + dq, u=state_a.u + du)

        if verbose:
            print(f"  🔀 Twin perturbation: {initial.perturbation:g} (seed {initial.perturbation_seed})")

        twin = twin_run(state_a, state_b, run_config.model, run_config.stepper)
        monitor = uniqueness_monitor(twin.series, tolerance=DEFAULT_MONITOR_TOLERANCE)
        outputs = {
            "twin": write_report_csv(monitor.series, report_path(config, TWIN_FILE), run_config.config_hash),
        }
        if verbose:
            print(monitor.summary())

        metadata = dict(twin.metadata)
        metadata.update(
            max_Phi=float(twin.series["Phi"].max()),
            chi_integral=monitor.metadata["chi_integral"],
            violations=monitor.metadata["violations"],
            config_hash=run_config.config_hash,
        )
        return TaskResult(
            success=monitor.passed,
            operation="twin",
            outputs=outputs,
            metadata=metadata,
            errors=[f"envelope check failed: {monitor.failures()}"] if not monitor.passed else [],
            exit_code=EXIT_OK if monitor.passed else EXIT_AUDIT_FAILURE,
        )

    # ==========================================
    # Audits
    # ==========================================

    def _run_audit(
        self,
        run_config: RunConfig,
        verbose: bool,
        kind: str = "lyapunov",
        seeds: Optional[int] = None,
        negative_control: Optional[str] = None,
        delta: int = DEFAULT_SCALING_DELTA,
    ) -> TaskResult:
        if kind not in AUDIT_KINDS:
            raise ConfigError(f"unknown audit kind {kind!r}; expected one of {AUDIT_KINDS}")
        if negative_control and negative_control not in NEGATIVE_CONTROLS[kind]:
            raise ConfigError(
                f"negative control {negative_control!r} does not apply to {kind}; "
                f"expected one of {NEGATIVE_CONTROLS[kind]}"
            )
        seeds = DEFAULT_AUDIT_SEEDS[kind] if seeds is None else seeds
        if seeds < 0:
            raise ConfigError(f"seeds must be >= 0, got {seeds}")
        config = self._output_config(run_config)
        outputs: Dict[str, Path] = {}

        if kind == "lyapunov":
            report = self._audit_lyapunov(run_config, seeds, negative_control)
        elif kind == "uniqueness":
            report = self._audit_uniqueness(run_config, seeds, negative_control)
        elif kind == "scaling":
            report = audit_scaling(
                self._initial_state(run_config),
                run_config.model,
                run_config.stepper,
                delta=delta,
                tolerance=DEFAULT_SCALING_TOLERANCE,
            )
        else:
            report, bound_series = self._audit_energy(run_config)
            outputs["apriori"] = write_report_csv(bound_series, report_path(config, APRIORI_FILE), run_config.config_hash)

        outputs["audit"] = write_report_csv(
            report.table, report_path(config, AUDIT_FILE_TEMPLATE.format(kind=kind)), run_config.config_hash
        )
        if report.series is not None:
            outputs["series"] = write_report_csv(
                report.series, report_path(config, AUDIT_SERIES_TEMPLATE.format(kind=kind)), run_config.config_hash
            )
        if verbose:
            print(report.summary())

        _logger.info(f"audit {kind} checks={len(report.table)} failures={len(report.failures())}")
        return TaskResult(
            success=report.passed,
            operation="audit",
            outputs=outputs,
            metadata={"kind": kind, "checks": len(report.table), "negative_control": negative_control,
                      "config_hash": run_config.config_hash},
            errors=[f"failed: {', '.join(report.failures())}"] if not report.passed else [],
            exit_code=EXIT_OK if report.passed else EXIT_AUDIT_FAILURE,
        )

    def _audit_lyapunov(self, run_config: RunConfig, seeds: int, negative_control: Optional[str]) -> AuditReport:
        reports = []
        base_seed = run_config.initial.seed
        for seed in range(base_seed, base_seed + seeds):
            Q, u = audit_fields(run_config.grid, run_config.model.d_target, seed, run_config.initial)
            report = audit_lyapunov_cancellations(
                Q,
                u,
                run_config.model,
                tolerance=DEFAULT_LYAPUNOV_TOLERANCE,
                break_projection=negative_control == "break-projection",
                break_symmetry=negative_control == "break-symmetry",
                control_seed=seed,
            )
            reports.append((f"seed={seed}", report))
        return combine_reports("lyapunov", reports)

    def _audit_uniqueness(self, run_config: RunConfig, seeds: int, negative_control: Optional[str]) -> AuditReport:
        reports = []
        grid, d_target = run_config.grid, run_config.model.d_target
        base_seed = run_config.initial.seed
        for seed in range(base_seed, base_seed + seeds):
            Q1, u1 = audit_fields(grid, d_target, seed, run_config.initial)
            pair = replace(run_config.initial, perturbation_seed=seed, k_max=min(run_config.initial.k_max, audit_k_max(grid)))
            dq, du = perturbation_fields(grid, d_target, pair)
            report = audit_uniqueness_cancellations(
                Q1,
                Q1 + dq,
                u1,
                u1 + du,
                run_config.model,
                tolerance=DEFAULT_UNIQUENESS_TOLERANCE,
                power_threshold=DEFAULT_POWER_THRESHOLD,
                swap_rotation_for_strain=negative_control == "swap-rotation-for-strain",
            )
            reports.append((f"seed={seed}", report))
        return combine_reports("uniqueness", reports)

    def _audit_energy(self, run_config: RunConfig) -> Tuple[AuditReport, pd.DataFrame]:
        state = self._initial_state(run_config)
        stepper = run_config.stepper
        diagnostics = []
        for level in range(DEFAULT_ENERGY_REFINEMENTS + 1):
            factor = 2 ** level
            refined = replace(stepper, dt=stepper.dt / factor, cadence=stepper.cadence * factor)
            diagnostics.append(run(state, run_config.model, refined).diagnostics)
        report = audit_energy_balance(
            diagnostics,
            expected_order=stepper.order,
            residual_tolerance=DEFAULT_RESIDUAL_TOLERANCE,
        )
        bound = audit_apriori_bound(diagnostics[0])
        if bound.excursions:
            _logger.warning(f"apriori bound exceeded at {bound.excursions} rows, max excursion {bound.max_excursion:.3e}")
        return report, bound.series

    # ==========================================
    # Checks and Utilities
    # ==========================================

    def _run_lp_check(
        self,
        run_config: RunConfig,
        verbose: bool,
        check: str = "all",
        trials: int = DEFAULT_LP_TRIALS,
        n_axis: Optional[int] = None,
        exponents: Tuple[float, float] = DEFAULT_PRODUCT_EXPONENTS,
    ) -> TaskResult:
        config = self._output_config(run_config)
        grid = replace(run_config.grid, n_axis=n_axis) if n_axis else run_config.grid
        checks = LP_CHECKS if check == "all" else (check,)
        outputs: Dict[str, Path] = {}
        exceeded: List[str] = []
        rows = 0
        for name in checks:
            report = run_lp_check(name, grid, trials, seed=run_config.initial.seed, k_max=DEFAULT_LP_K_MAX,
                                  exponents=exponents)
            ratios = report["ratio"].dropna()
            over = ratios > LP_THRESHOLDS[name]
            if name in LP_FLOORS:
                over |= ratios < LP_FLOORS[name]
            if over.any():
                exceeded.append(f"{name} ({int(over.sum())} rows, max ratio {ratios.max():.3g})")
            outputs[name] = write_report_csv(
                report, report_path(config, LP_REPORT_TEMPLATE.format(check=name)), run_config.config_hash
            )
            rows += len(report)
            if verbose:
                worst = f"{ratios.max():.4g}" if len(ratios) else "n/a"
                print(f"  📊 {name}: {len(report)} rows, max ratio {worst} (threshold {LP_THRESHOLDS[name]})")

        return TaskResult(
            success=not exceeded,
            operation="lp_check",
            outputs=outputs,
            metadata={"checks": list(checks), "rows": rows, "grid": grid.n_axis, "trials": trials},
            errors=[f"threshold exceeded: {item}" for item in exceeded],
            exit_code=EXIT_AUDIT_FAILURE if exceeded else EXIT_OK,
        )

    def _run_snapshot_info(self, run_config: RunConfig, verbose: bool, path: str = "") -> TaskResult:
        snapshot = read_snapshot(path)
        stats = field_statistics(snapshot.field)
        if verbose:
            for key, value in snapshot.header.items():
                print(f"  {key}: {value}")
            for label, values in stats.items():
                print(f"  [{label}] min={values['min']:.6g} max={values['max']:.6g} L2={values['L2']:.6g}")
        return TaskResult(
            success=True,
            operation="snapshot_info",
            metadata={"header": dict(snapshot.header), "statistics": stats},
        )

