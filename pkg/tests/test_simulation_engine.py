"""
Engine tests: task dispatch and error-to-exit-code mapping.
"""

import pytest

from config import Config, load_run_config
from report_helpers.constants import EXIT_AUDIT_FAILURE, EXIT_NUMERICAL_ABORT, EXIT_OK, EXIT_USAGE
from simulation_engine import SimulationEngine, TaskResult


@pytest.fixture
def small_config(tmp_path):
    return load_run_config(overrides=[
        "grid.n_axis=16",
        "stepper.t_final=0.004",
        "stepper.cadence=2",
        f"output.directory={tmp_path}",
    ])


# ============================================================
# Dispatch
# ============================================================

class TestRunTask:

    def test_unknown_task(self, small_config):
        result = SimulationEngine().run_task("integrate", run_config=small_config, verbose=False)
        assert not result.success
        assert result.exit_code == EXIT_USAGE
        assert "not found" in result.errors[0]

    def test_simulate_result(self, small_config, tmp_path):
        result = SimulationEngine().run_task("simulate", run_config=small_config, verbose=False)
        assert result.success and result.exit_code == EXIT_OK
        assert result.outputs["diagnostics"] == tmp_path / "reports" / "diagnostics.csv"
        assert result.metadata["rows"] == 3
        assert result.metadata["config_hash"] == small_config.config_hash

    def test_output_config_overrides_run_directory(self, small_config, tmp_path):
        engine = SimulationEngine(Config(tmp_path / "elsewhere"))
        result = engine.run_task("simulate", run_config=small_config, verbose=False)
        assert result.outputs["diagnostics"].parent == tmp_path / "elsewhere" / "reports"

    def test_numerical_abort_maps_to_exit_code(self, tmp_path):
        run_config = load_run_config(overrides=[
            "grid.n_axis=16", "stepper.dt=1e3", "stepper.t_final=1e5",
            "initial.amplitude=50", f"output.directory={tmp_path}",
        ])
        result = SimulationEngine().run_task("simulate", run_config=run_config, verbose=False)
        assert result.exit_code == EXIT_NUMERICAL_ABORT
        assert result.metadata["abort_step"] >= 1

    def test_bad_audit_options_are_usage_errors(self, small_config):
        engine = SimulationEngine()
        assert engine.run_task("audit", small_config, False, kind="entropy").exit_code == EXIT_USAGE
        assert engine.run_task("audit", small_config, False, kind="scaling",
                               negative_control="break-symmetry").exit_code == EXIT_USAGE
        assert engine.run_task("audit", small_config, False, kind="lyapunov", seeds=-1).exit_code == EXIT_USAGE

    def test_negative_control_is_an_audit_failure(self, small_config, tmp_path):
        result = SimulationEngine().run_task(
            "audit", small_config, False, kind="uniqueness", seeds=1, negative_control="swap-rotation-for-strain"
        )
        assert result.exit_code == EXIT_AUDIT_FAILURE
        assert "D1+D2[seed=0]" in result.errors[0]
        assert (tmp_path / "reports" / "audit-uniqueness.csv").exists()


# ============================================================
# Task results
# ============================================================

class TestTaskResult:

    def test_repr_shows_status(self):
        assert "✅ SUCCESS" in repr(TaskResult(success=True, operation="simulate"))
        assert "❌ FAILED" in repr(TaskResult(success=False, operation="twin", exit_code=EXIT_AUDIT_FAILURE))
