"""
End-to-end command-line tests: exit codes and the files each subcommand writes.
"""

import pytest

from cli import build_parser, configure_logging, main
from report_helpers.utils import read_report_csv

SMALL = ["--override", "grid.n_axis=16", "--override", "stepper.t_final=0.004", "--override", "stepper.cadence=2"]


def _run(tmp_path, *args) -> int:
    return main(["--out", str(tmp_path), *SMALL, *args])


# ============================================================
# Usage errors
# ============================================================

class TestUsage:

    def test_missing_subcommand(self):
        assert main([]) == 2

    def test_unknown_subcommand(self):
        assert main(["integrate"]) == 2

    def test_bad_choice(self):
        assert main(["audit", "entropy"]) == 2

    def test_unknown_config_key(self, tmp_path):
        assert _run(tmp_path, "--override", "grid.size=8", "simulate") == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["--config", str(tmp_path / "absent.ini"), "simulate"]) == 2

    def test_negative_control_for_other_audit(self, tmp_path):
        assert _run(tmp_path, "audit", "uniqueness", "--negative-control", "break-symmetry") == 2

    def test_missing_snapshot(self, tmp_path):
        assert _run(tmp_path, "snapshot-info", str(tmp_path / "absent.snap")) == 2

    def test_log_directory_created_when_log_opens(self, tmp_path):
        log_file = tmp_path / "logs" / "ops.log"
        configure_logging("INFO", log_file)
        try:
            assert log_file.parent.is_dir()
        finally:
            configure_logging("WARNING")

    def test_every_registered_command_has_a_parser(self):
        parser = build_parser()
        for command in ("simulate", "twin", "audit", "lp-check", "snapshot-info"):
            assert parser.parse_args([command] + (["energy"] if command == "audit" else [])
                                     + (["bernstein"] if command == "lp-check" else [])
                                     + (["x.snap"] if command == "snapshot-info" else [])).operation_key == command


# ============================================================
# Runs
# ============================================================

class TestRuns:

    def test_simulate_writes_diagnostics_with_hash(self, tmp_path):
        assert _run(tmp_path, "simulate") == 0
        table, config_hash = read_report_csv(tmp_path / "reports" / "diagnostics.csv")
        assert list(table["step"]) == [0, 2, 4]
        assert config_hash is not None and len(config_hash) == 64
        assert (tmp_path / "logs" / "ops.log").exists()

    def test_snapshots_can_be_inspected(self, tmp_path):
        assert _run(tmp_path, "simulate", "--snapshot-cadence", "1") == 0
        snapshot = tmp_path / "snapshots" / "Q_00000.snap"
        assert snapshot.exists()
        assert (tmp_path / "snapshots" / "u_00002.snap").exists()
        assert _run(tmp_path, "snapshot-info", str(snapshot)) == 0

    def test_twin_writes_monitor_series(self, tmp_path):
        assert _run(tmp_path, "twin", "--perturbation", "1e-6") == 0
        table, _ = read_report_csv(tmp_path / "reports" / "twin.csv")
        assert {"Phi", "chi_emp", "envelope", "N_t"} <= set(table.columns)

    def test_non_finite_state_aborts(self, tmp_path):
        assert _run(tmp_path, "--override", "stepper.dt=1e3", "--override", "stepper.t_final=1e5",
                    "--override", "initial.amplitude=50", "simulate") == 3


# ============================================================
# Audits and checks
# ============================================================

class TestAudits:

    def test_lyapunov_audit_passes(self, tmp_path):
        assert _run(tmp_path, "audit", "lyapunov", "--seeds", "2") == 0
        table, _ = read_report_csv(tmp_path / "reports" / "audit-lyapunov.csv")
        assert len(table) == 14
        assert table["identity"].iloc[0] == "I[seed=0]"

    def test_negative_control_fails_the_audit(self, tmp_path):
        assert _run(tmp_path, "audit", "lyapunov", "--seeds", "1", "--negative-control", "break-projection") == 4

    def test_energy_audit_writes_apriori_series(self, tmp_path):
        _run(tmp_path, "audit", "energy")
        assert (tmp_path / "reports" / "audit-energy.csv").exists()
        assert (tmp_path / "reports" / "apriori.csv").exists()

    def test_lp_check(self, tmp_path):
        assert main(["--out", str(tmp_path), "lp-check", "bernstein", "--trials", "3"]) == 0
        table, _ = read_report_csv(tmp_path / "reports" / "lp-report-bernstein.csv")
        assert len(table) > 0

    @pytest.mark.parametrize("n_axis", ["12", "4"])
    def test_lp_check_rejects_bad_grid(self, tmp_path, n_axis):
        assert main(["--out", str(tmp_path), "lp-check", "bernstein", "--grid", n_axis]) == 2


# ============================================================
# Registry
# ============================================================

class TestRegistry:

    def test_categories_in_order(self):
        from operations.registry import registry
        assert registry.get_categories() == {
            "runs": ["simulate", "twin"],
            "audits": ["audit"],
            "checks": ["lp-check"],
            "utilities": ["snapshot-info"],
        }
        assert "audit" in registry and len(registry) == 5

    def test_registering_twice_is_idempotent(self):
        from operations.registry import OperationRegistry
        from operations.runs.simulate import SimulateOperation
        local = OperationRegistry()
        local.register(SimulateOperation)
        local.register(SimulateOperation)
        assert local.get_categories()["runs"] == ["simulate"]

    def test_conflicting_key_and_bad_category(self):
        from operations.registry import OperationRegistry
        from operations.runs.simulate import SimulateOperation

        class Shadow(SimulateOperation):
            pass

        class Misfiled(SimulateOperation):
            def get_metadata(self):
                return {**super().get_metadata(), "key": "misfiled", "category": "plots"}

        local = OperationRegistry()
        local.register(SimulateOperation)
        with pytest.raises(ValueError, match="already registered"):
            local.register(Shadow)
        with pytest.raises(ValueError, match="unknown category"):
            local.register(Misfiled)

    def test_unknown_key(self):
        from operations.registry import registry
        with pytest.raises(KeyError):
            registry.get_operation("plot")
