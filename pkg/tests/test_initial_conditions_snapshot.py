"""
Initial-condition generators and snapshot files.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.initial_conditions import (
    InitialConditionConfig,
    build_initial_fields,
    perturbation_fields,
    random_bandlimited,
    random_qtensor,
    random_velocity,
    single_mode_q,
    taylor_green,
    uniaxial_stripe,
)
from core.snapshot import (
    SnapshotFormatError,
    field_statistics,
    read_header,
    read_snapshot,
    write_snapshot,
)
from core.spectral_core import Grid, GridMismatchError, divergence, l2_norm, mean_value


seed_strategy = st.integers(min_value=0, max_value=2 ** 31 - 1)
rms_strategy = st.floats(min_value=1e-6, max_value=10.0, allow_nan=False, allow_infinity=False)

GRID = Grid(d=2, n_axis=32)


def _rms(f) -> float:
    return l2_norm(f) / np.sqrt(f.grid.volume)


# ============================================================
# Configuration block
# ============================================================

class TestInitialConditionConfig:

    def test_unknown_generator(self):
        with pytest.raises(ValueError, match="q_generator"):
            InitialConditionConfig(q_generator="spiral")
        with pytest.raises(ValueError, match="u_generator"):
            InitialConditionConfig(u_generator="vortex")

    def test_negative_amplitude(self):
        with pytest.raises(ValueError, match="amplitude"):
            InitialConditionConfig(amplitude=-1.0)


# ============================================================
# Random generators
# ============================================================

class TestRandomBandlimited:

    def test_rejects_modes_beyond_dealias_cutoff(self):
        with pytest.raises(ValueError, match="dealias cutoff"):
            random_bandlimited(GRID, (), seed=0, k_max=GRID.dealias_cutoff + 1)

    def test_zero_k_max_gives_zero_field(self):
        assert l2_norm(random_bandlimited(GRID, (), seed=0, k_max=0)) == 0.0

    @given(seed=seed_strategy, rms=rms_strategy)
    @settings(max_examples=25, deadline=None)
    def test_real_zero_mean_with_requested_rms(self, seed, rms):
        f = random_bandlimited(GRID, (2,), seed=seed, k_max=4, rms=rms)
        np.testing.assert_allclose(mean_value(f), 0.0, atol=1e-14 * rms)
        assert _rms(f) == pytest.approx(rms, rel=1e-10)
        back = np.fft.ifftn(f.coeffs, axes=(1, 2), norm="forward")
        assert np.max(np.abs(back.imag)) <= 1e-12 * rms

    def test_seed_is_reproducible(self):
        a = random_bandlimited(GRID, (), seed=[4, 2], k_max=5)
        b = random_bandlimited(GRID, (), seed=[4, 2], k_max=5)
        np.testing.assert_array_equal(a.coeffs, b.coeffs)

    def test_same_seed_same_field_on_finer_grid(self):
        coarse = random_bandlimited(Grid(d=2, n_axis=32), (), seed=17, k_max=5)
        fine = random_bandlimited(Grid(d=2, n_axis=64), (), seed=17, k_max=5)
        np.testing.assert_allclose(fine.physical[::2, ::2], coarse.physical, atol=1e-13)

    @given(seed=seed_strategy)
    @settings(max_examples=20, deadline=None)
    def test_qtensor_is_symmetric_trace_free(self, seed):
        Q = random_qtensor(GRID, 3, [seed, 0], 0.5, 4)
        q = Q.physical
        np.testing.assert_allclose(q, np.swapaxes(q, 0, 1), atol=1e-13)
        np.testing.assert_allclose(np.einsum("ii...->...", q), 0.0, atol=1e-13)
        assert _rms(Q) == pytest.approx(0.5, rel=1e-10)

    @given(seed=seed_strategy)
    @settings(max_examples=20, deadline=None)
    def test_velocity_is_divergence_free(self, seed):
        u = random_velocity(GRID, [seed, 1], 0.5, 4)
        assert l2_norm(divergence(u)) <= 1e-12


# ============================================================
# Closed-form generators
# ============================================================

class TestClosedForms:

    def test_taylor_green_is_divergence_free(self):
        u = taylor_green(GRID, 2.0)
        assert l2_norm(divergence(u)) <= 1e-12
        x, y = GRID.coordinates()
        np.testing.assert_allclose(u.physical[0], 2.0 * np.sin(x) * np.cos(y), atol=1e-12)

    def test_taylor_green_in_three_dimensions(self):
        u = taylor_green(Grid(d=3, n_axis=16))
        np.testing.assert_allclose(u.physical[2], 0.0, atol=1e-14)

    def test_uniaxial_stripe_is_symmetric_trace_free(self):
        q = uniaxial_stripe(GRID, 3, amplitude=0.8, kappa=0.4).physical
        np.testing.assert_allclose(q, np.swapaxes(q, 0, 1), atol=1e-13)
        np.testing.assert_allclose(np.einsum("ii...->...", q), 0.0, atol=1e-13)

    def test_single_mode_profile(self):
        Q = single_mode_q(GRID, 2, amplitude=0.5, k0=3)
        x, _ = GRID.coordinates()
        np.testing.assert_allclose(Q.physical[0, 0], 0.5 * np.cos(3 * x), atol=1e-13)
        np.testing.assert_allclose(Q.physical[1, 1], -0.5 * np.cos(3 * x), atol=1e-13)

    def test_single_mode_wavenumber_range(self):
        with pytest.raises(ValueError, match="single-mode wavenumber"):
            single_mode_q(GRID, 2, k0=GRID.dealias_cutoff + 1)


# ============================================================
# Dispatch
# ============================================================

class TestBuildInitialFields:

    @pytest.mark.parametrize("q_gen", ["zero", "random-bandlimited", "uniaxial-stripe", "single-mode"])
    @pytest.mark.parametrize("u_gen", ["zero", "random-bandlimited", "taylor-green"])
    def test_every_generator_pair(self, q_gen, u_gen):
        cfg = InitialConditionConfig(q_generator=q_gen, u_generator=u_gen, k_max=3)
        Q, u = build_initial_fields(GRID, 3, cfg)
        assert Q.component_shape == (3, 3)
        assert u.component_shape == (2,)

    def test_seed_changes_fields(self):
        a, _ = build_initial_fields(GRID, 2, InitialConditionConfig(seed=1))
        b, _ = build_initial_fields(GRID, 2, InitialConditionConfig(seed=2))
        assert l2_norm(a - b) > 0

    def test_snapshot_takes_precedence(self, tmp_path):
        Q0, u0 = build_initial_fields(GRID, 2, InitialConditionConfig(seed=5))
        q_path = write_snapshot(tmp_path / "Q.snap", "Q", Q0, 0.0)
        cfg = InitialConditionConfig(q_generator="zero", u_generator="zero", snapshot_q=str(q_path))
        Q, u = build_initial_fields(GRID, 2, cfg)
        np.testing.assert_allclose(Q.physical, Q0.physical, atol=1e-14)
        assert l2_norm(u) == 0.0

    def test_snapshot_on_other_grid_is_rejected(self, tmp_path):
        Q0, _ = build_initial_fields(Grid(d=2, n_axis=16), 2, InitialConditionConfig(k_max=2))
        path = write_snapshot(tmp_path / "Q.snap", "Q", Q0, 0.0)
        with pytest.raises(GridMismatchError):
            build_initial_fields(GRID, 2, InitialConditionConfig(snapshot_q=str(path)))

    def test_perturbation_size(self):
        cfg = InitialConditionConfig(perturbation=1e-4, perturbation_seed=3)
        dq, du = perturbation_fields(GRID, 2, cfg)
        assert _rms(dq) == pytest.approx(1e-4, rel=1e-10)
        assert _rms(du) == pytest.approx(1e-4, rel=1e-10)


# ============================================================
# Snapshots
# ============================================================

class TestSnapshot:

    def test_write_then_read(self, tmp_path):
        u = random_velocity(GRID, 3, 0.2, 4)
        path = write_snapshot(tmp_path / "u.snap", "u", u, 1.25, config_hash="abc123")
        snap = read_snapshot(path, expected_grid=GRID)
        assert snap.name == "u" and snap.time == 1.25
        assert snap.header["config-hash"] == "abc123"
        np.testing.assert_allclose(snap.field.physical, u.physical, atol=1e-15)

    def test_header_layout(self, tmp_path):
        Q = random_qtensor(GRID, 3, 1, 0.1, 3)
        path = write_snapshot(tmp_path / "Q.snap", "Q", Q, 0.0)
        header, offset = read_header(path)
        assert header["component-shape"] == "3x3"
        assert header["N_axis"] == "32" and header["d"] == "2"
        assert "config-hash" not in header
        assert path.stat().st_size == offset + 9 * 32 * 32 * 8

    def test_truncated_data(self, tmp_path):
        u = random_velocity(GRID, 3, 0.2, 4)
        path = write_snapshot(tmp_path / "u.snap", "u", u, 0.0)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(SnapshotFormatError, match="expected"):
            read_snapshot(path)

    def test_missing_end_of_header(self, tmp_path):
        path = tmp_path / "bad.snap"
        path.write_bytes(b"format-version: 1\nfield-name: u\n")
        with pytest.raises(SnapshotFormatError, match="end-header"):
            read_header(path)

    def test_unsupported_version(self, tmp_path):
        u = random_velocity(GRID, 3, 0.2, 4)
        path = write_snapshot(tmp_path / "u.snap", "u", u, 0.0)
        path.write_bytes(path.read_bytes().replace(b"format-version: 1", b"format-version: 9", 1))
        with pytest.raises(SnapshotFormatError, match="format-version"):
            read_snapshot(path)

    def test_statistics_per_component(self):
        Q = single_mode_q(GRID, 2, amplitude=0.5, k0=1)
        stats = field_statistics(Q)
        assert set(stats) == {"0,0", "0,1", "1,0", "1,1"}
        assert stats["0,0"]["max"] == pytest.approx(0.5)
        assert stats["1,1"]["min"] == pytest.approx(-0.5)
        assert stats["0,1"]["L2"] == 0.0
