"""
Run configuration: INI parsing, overrides, validation and the provenance hash.
"""

import pytest

from config import THREADS_ENV_VAR, Config, ConfigError, load_run_config, with_output_directory


def _write(tmp_path, text: str):
    path = tmp_path / "run.ini"
    path.write_text(text, encoding="utf-8")
    return path


# ============================================================
# Defaults and parsing
# ============================================================

class TestLoadRunConfig:

    def test_defaults_without_file(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
        cfg = load_run_config()
        assert cfg.grid.d == 2 and cfg.grid.n_axis == 64
        assert cfg.stepper.scheme == "imex2"
        assert not cfg.stepper.regularization.enabled
        assert cfg.threads == 1
        assert len(cfg.config_hash) == 64

    def test_sections_are_parsed(self, tmp_path):
        path = _write(tmp_path, """
[grid]
d = 3
n_axis = 16

[model]
L = 2.5        # case-sensitive key
xi = 0.4
d_target = 3

[stepper]
dt = 5e-4
implicit_bulk = yes

[regularization]
enabled = true
n = 3
eps = 0.1

[initial]
q_generator = single-mode
snapshot_q =
""")
        cfg = load_run_config(path)
        assert (cfg.grid.d, cfg.grid.n_axis) == (3, 16)
        assert cfg.model.L == 2.5 and cfg.model.xi == 0.4
        assert cfg.stepper.dt == 5e-4 and cfg.stepper.implicit_bulk
        assert cfg.stepper.regularization.enabled and cfg.stepper.regularization.n == 3
        assert cfg.initial.q_generator == "single-mode"
        assert cfg.initial.snapshot_q is None

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_run_config(tmp_path / "absent.ini")

    def test_unknown_section(self, tmp_path):
        with pytest.raises(ConfigError, match=r"unknown section \[solver\]"):
            load_run_config(_write(tmp_path, "[solver]\ndt = 1\n"))

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown key grid.size"):
            load_run_config(_write(tmp_path, "[grid]\nsize = 32\n"))

    def test_unparsable_value(self):
        with pytest.raises(ConfigError, match="stepper.cadence"):
            load_run_config(overrides=["stepper.cadence=often"])

    def test_failed_validation_is_a_config_error(self):
        with pytest.raises(ConfigError, match="n_axis"):
            load_run_config(overrides=["grid.n_axis=48"])


# ============================================================
# Overrides, seed and threads
# ============================================================

class TestOverrides:

    def test_override_beats_file(self, tmp_path):
        path = _write(tmp_path, "[stepper]\ndt = 1e-3\n")
        assert load_run_config(path, overrides=["stepper.dt=2e-3"]).stepper.dt == 2e-3

    @pytest.mark.parametrize("item", ["dt=1e-3", "stepper.dt", ".dt=1", "stepper.=1"])
    def test_malformed_override(self, item):
        with pytest.raises(ConfigError, match="section.key=value"):
            load_run_config(overrides=[item])

    def test_seed_replaces_initial_seed(self):
        assert load_run_config(overrides=["initial.seed=3"], seed=11).initial.seed == 11

    def test_threads_from_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "4")
        assert load_run_config().threads == 4
        assert load_run_config(threads=2).threads == 2

    def test_bad_thread_settings(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "many")
        with pytest.raises(ConfigError, match=THREADS_ENV_VAR):
            load_run_config()
        with pytest.raises(ConfigError, match="thread count"):
            load_run_config(threads=0)


# ============================================================
# Cross-section validation
# ============================================================

class TestValidation:

    def test_target_dimension_below_grid_dimension(self):
        with pytest.raises(ConfigError, match="d_target"):
            load_run_config(overrides=["grid.d=3", "model.d_target=2"])

    def test_k_max_beyond_dealias_cutoff(self):
        with pytest.raises(ConfigError, match="dealias cutoff"):
            load_run_config(overrides=["grid.n_axis=16", "initial.k_max=6"])

    def test_k_max_ignored_for_closed_form_generators(self):
        cfg = load_run_config(overrides=[
            "grid.n_axis=16", "initial.k_max=6", "initial.q_generator=zero", "initial.u_generator=taylor-green",
        ])
        assert cfg.initial.k_max == 6


# ============================================================
# Provenance hash and output paths
# ============================================================

class TestHashAndOutput:

    def test_hash_is_stable(self):
        assert load_run_config(seed=1).config_hash == load_run_config(seed=1).config_hash

    def test_hash_follows_values_not_spelling(self, tmp_path):
        spelled = _write(tmp_path, "[stepper]\ndt = 0.001\n")
        assert load_run_config(spelled).config_hash == load_run_config(overrides=["stepper.dt=1e-3"]).config_hash
        assert load_run_config(seed=1).config_hash != load_run_config(seed=2).config_hash

    def test_output_directory_keeps_hash(self, tmp_path):
        cfg = load_run_config()
        moved = with_output_directory(cfg, str(tmp_path))
        assert moved.output.directory == str(tmp_path)
        assert moved.config_hash == cfg.config_hash
        assert with_output_directory(cfg, None) is cfg

    def test_output_paths(self, tmp_path):
        config = Config(tmp_path)
        assert config.reports_path == tmp_path / "reports"
        assert config.snapshots_path == tmp_path / "snapshots"
        assert config.ops_log_file == tmp_path / "logs" / "ops.log"
        assert not (tmp_path / "logs").exists()
