"""
Littlewood-Paley tests: profiles, dyadic norms, decompositions, inequality checks and the Osgood envelope.
"""

import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st

from core.initial_conditions import random_bandlimited
from core.littlewood_paley import (
    LP_CHECKS,
    LP_REPORT_COLUMNS,
    BesovIndex,
    DyadicDecomposition,
    PreconditionError,
    besov_lowpass_norm,
    besov_norm,
    block_Dq,
    bony_decompose,
    check_bernstein,
    check_bernstein_derivative,
    check_product_law,
    check_sqrtN,
    check_L2p,
    chi_profile,
    commutator,
    dealiased_product,
    dyadic_equivalence_window,
    empirical_chi,
    frequency_threshold,
    homogeneous_completeness_defect,
    jq_decompose,
    kernel_l1_constant,
    linear_modulus,
    lowpass_equivalence_window,
    lp_norm,
    measure_equivalence_constant,
    osgood_integrate,
    osgood_mu,
    partition_of_unity_defect,
    phi_profile,
    run_lp_check,
    sobolev_norm,
)
from core.spectral_core import Grid, SpectralField, l2_norm, transform_forward


seed_strategy = st.integers(min_value=0, max_value=2 ** 31 - 1)
sobolev_index_strategy = st.floats(min_value=-1.5, max_value=2.0, allow_nan=False, allow_infinity=False)
negative_index_strategy = st.floats(min_value=-2.0, max_value=-0.1, allow_nan=False, allow_infinity=False)

GRID = Grid(d=2, n_axis=32)


def _field(seed, k_max=4, grid=GRID, components=()):
    return random_bandlimited(grid, components, seed=seed, k_max=k_max)


# ============================================================
# Profiles and partition of unity
# ============================================================

class TestProfiles:

    def test_chi_is_one_inside_and_zero_outside(self):
        np.testing.assert_array_equal(chi_profile(np.array([0.0, 0.3, 9.0 / 16.0])), 1.0)
        np.testing.assert_array_equal(chi_profile(np.array([1.0, 1.5, 10.0])), 0.0)

    def test_phi_is_supported_in_annulus(self):
        np.testing.assert_array_equal(phi_profile(np.array([0.0, 0.5, 2.0, 3.0])), 0.0)
        assert phi_profile(np.array([1.0]))[0] == 1.0

    def test_chi_is_monotone(self):
        values = chi_profile(np.linspace(0.0, 1.2, 500))
        assert np.all(np.diff(values) <= 1e-15)

    @pytest.mark.parametrize("grid", [Grid(d=2, n_axis=32), Grid(d=3, n_axis=16), Grid(d=2, n_axis=64, l_box=3.0)])
    def test_partitions_of_unity_hold_on_every_mode(self, grid):
        assert partition_of_unity_defect(grid) < 1e-12
        assert homogeneous_completeness_defect(grid) < 1e-12

    def test_blocks_never_pass_the_zero_mode(self):
        f = transform_forward(GRID, np.ones(GRID.shape))
        dec = DyadicDecomposition.for_grid(GRID)
        for q in dec.shells():
            assert l2_norm(block_Dq(f, q)) == 0.0


# ============================================================
# Norms
# ============================================================

class TestNorms:

    @given(seed=seed_strategy, s=sobolev_index_strategy)
    @settings(max_examples=30, deadline=None)
    def test_dyadic_norm_inside_equivalence_window(self, seed, s):
        f = _field(seed, k_max=8)
        ratio = sobolev_norm(f, s, backend="dyadic") / sobolev_norm(f, s)
        lo, hi = dyadic_equivalence_window(s)
        assert lo - 1e-12 <= ratio <= hi + 1e-12

    @pytest.mark.parametrize("s", [-1.0, 0.0, 0.5, 1.5])
    def test_measured_constants_inside_window(self, s):
        lo, hi = dyadic_equivalence_window(s)
        measured_lo, measured_hi = measure_equivalence_constant(GRID, s)
        assert lo - 1e-12 <= measured_lo <= measured_hi <= hi + 1e-12

    def test_besov_22_matches_dyadic_sobolev(self):
        f = _field(11, k_max=6)
        for s in (-0.5, 0.0, 1.0):
            assert besov_norm(f, BesovIndex(s)) == pytest.approx(sobolev_norm(f, s, backend="dyadic"), rel=1e-12)

    def test_nonhomogeneous_norm_sees_the_mean(self):
        f = transform_forward(GRID, 2.0 + np.zeros(GRID.shape))
        assert sobolev_norm(f, 1.0) == 0.0
        assert sobolev_norm(f, 1.0, homogeneous=False) == pytest.approx(l2_norm(f))

    @given(seed=seed_strategy, s=negative_index_strategy)
    @settings(max_examples=25, deadline=None)
    def test_lowpass_characterization_inside_window(self, seed, s):
        f = _field(seed, k_max=8)
        ratio = besov_lowpass_norm(f, BesovIndex(s)) / besov_norm(f, BesovIndex(s))
        lo, hi = lowpass_equivalence_window(s)
        assert lo * (1 - 1e-9) <= ratio <= hi * (1 + 1e-9)

    def test_lowpass_characterization_needs_negative_index(self):
        with pytest.raises(PreconditionError, match="s < 0"):
            besov_lowpass_norm(_field(1), BesovIndex(0.5))

    def test_lp_norm_of_constant(self):
        f = transform_forward(GRID, 3.0 + np.zeros(GRID.shape))
        assert lp_norm(f, 4.0) == pytest.approx(3.0 * GRID.volume ** 0.25)
        assert lp_norm(f, math.inf) == pytest.approx(3.0)

    def test_lp_norm_rejects_small_exponent(self):
        with pytest.raises(ValueError, match="p >= 1"):
            lp_norm(_field(1), 0.5)

    def test_unknown_backend(self):
        with pytest.raises(ValueError, match="backend"):
            sobolev_norm(_field(1), 1.0, backend="wavelet")

    def test_besov_index_validation(self):
        with pytest.raises(ValueError):
            BesovIndex(1.0, p=0.5)


# ============================================================
# Decompositions
# ============================================================

class TestDecompositions:

    @given(seed=seed_strategy)
    @settings(max_examples=15, deadline=None)
    def test_bony_pieces_sum_to_product(self, seed):
        a = _field([seed, 0]) + transform_forward(GRID, 0.7 + np.zeros(GRID.shape))
        b = _field([seed, 1])
        t_ab, t_ba, rem = bony_decompose(a, b)
        total = t_ab + t_ba + rem
        product = dealiased_product(a, b)
        assert l2_norm(total - product) <= 1e-10 * l2_norm(product)

    def test_bony_for_matrix_fields(self):
        a = _field(3, components=(2, 2))
        b = _field(4, components=(2, 2))
        t_ab, t_ba, rem = bony_decompose(a, b)
        product = dealiased_product(a, b)
        assert l2_norm(t_ab + t_ba + rem - product) <= 1e-10 * l2_norm(product)

    @pytest.mark.parametrize("q", [0, 1, 2])
    def test_four_term_decomposition_reassembles_block(self, q):
        A = _field(21, k_max=3)
        B = _field(22, k_max=3)
        j1, j2, j3, j4 = jq_decompose(A, B, q)
        block = block_Dq(dealiased_product(A, B), q)
        total = j1 + j2 + j3 + j4
        assert l2_norm(total - block) <= 1e-10 * max(l2_norm(block), 1e-300)

    def test_commutator_with_constant_vanishes(self):
        u = transform_forward(GRID, 1.5 + np.zeros(GRID.shape))
        v = _field(8)
        assert l2_norm(commutator(1, u, v)) <= 1e-12 * l2_norm(v)

    @pytest.mark.parametrize("d", [2, 3])
    def test_kernel_constant_is_positive(self, d):
        value = kernel_l1_constant(d)
        assert math.isfinite(value) and value > 0

    def test_kernel_constant_dimension(self):
        with pytest.raises(ValueError, match="d must be 2 or 3"):
            kernel_l1_constant(4)


# ============================================================
# Inequality checks
# ============================================================

class TestChecks:

    @given(seed=seed_strategy, q=st.integers(min_value=0, max_value=3))
    @settings(max_examples=30, deadline=None)
    def test_derivative_ratio_is_two_sided_in_l2(self, seed, q):
        report = check_bernstein_derivative(_field(seed, k_max=10), q)
        if not report.skipped:
            assert 9.0 / 16.0 - 1e-12 <= report.ratio <= 2.0 + 1e-12

    def test_bernstein_precondition(self):
        with pytest.raises(PreconditionError, match="b >= a"):
            check_bernstein(_field(1), 1, a_exp=4.0, b_exp=2.0)
        with pytest.raises(PreconditionError, match="q'"):
            check_bernstein(_field(1), 1, q_prime=9)

    def test_bernstein_lowpass_difference(self):
        report = check_bernstein(_field(2, k_max=8), 3, q_prime=1)
        assert report.check == "bernstein" and report.ratio > 0

    @pytest.mark.parametrize("s, t", [(1.0, 0.5), (0.5, -0.5), (-0.2, 0.1)])
    def test_product_law_precondition(self, s, t):
        with pytest.raises(PreconditionError, match="product law"):
            check_product_law(_field(1), _field(2), s, t)

    def test_zero_field_is_skipped(self):
        report = check_sqrtN(SpectralField.zeros(GRID), 2.0)
        assert report.skipped and math.isnan(report.ratio)

    def test_l2p_precondition(self):
        with pytest.raises(PreconditionError):
            check_L2p(_field(1), 0.5)


# ============================================================
# Ensembles
# ============================================================

class TestRunLpCheck:

    def test_report_layout(self):
        report = run_lp_check("L2p", GRID, trials=3, seed=5)
        assert list(report.columns) == LP_REPORT_COLUMNS
        assert len(report) == 3 * 5
        assert set(report["trial-seed"]) == {5, 6, 7}
        assert set(report["grid"]) == {"32x32"}

    def test_zero_trials_gives_empty_table(self):
        report = run_lp_check("bernstein", GRID, trials=0)
        assert report.empty and list(report.columns) == LP_REPORT_COLUMNS

    def test_bad_exponents_rejected_before_any_trial(self):
        with pytest.raises(PreconditionError):
            run_lp_check("product-law", GRID, trials=0, exponents=(1.5, 0.5))

    def test_unknown_check(self):
        with pytest.raises(ValueError, match="unknown lp check"):
            run_lp_check("hoelder", GRID, trials=1)

    def test_deterministic_for_a_seed(self):
        a = run_lp_check("commutator", GRID, trials=2, seed=9)
        b = run_lp_check("commutator", GRID, trials=2, seed=9)
        pd.testing.assert_frame_equal(a, b)

    def test_same_trial_same_field_across_grids(self):
        coarse = run_lp_check("bernstein-derivative", Grid(d=2, n_axis=32), trials=2, seed=3)
        fine = run_lp_check("bernstein-derivative", Grid(d=2, n_axis=64), trials=2, seed=3)
        np.testing.assert_allclose(coarse["lhs"], fine["lhs"], rtol=1e-10)

    @pytest.mark.slow
    @pytest.mark.parametrize("check", LP_CHECKS)
    def test_every_check_produces_finite_ratios(self, check):
        report = run_lp_check(check, GRID, trials=4)
        ratios = report["ratio"].dropna()
        assert len(ratios) > 0 and np.all(np.isfinite(ratios)) and np.all(ratios >= 0)


# ============================================================
# Osgood modulus and envelope
# ============================================================

class TestOsgood:

    def test_mu_vanishes_at_zero_and_is_superlinear_near_it(self):
        assert osgood_mu(0.0) == 0.0
        small = np.array([1e-12, 1e-8, 1e-4])
        ratios = osgood_mu(small) / small
        assert np.all(np.diff(ratios) < 0)

    def test_mu_is_increasing(self):
        r = np.logspace(-10, 3, 200)
        assert np.all(np.diff(osgood_mu(r)) > 0)

    def test_mu_rejects_negative(self):
        with pytest.raises(ValueError):
            osgood_mu(-1.0)

    def test_zero_initial_value_stays_zero(self):
        envelope = osgood_integrate(0.0, [5.0, 5.0, 5.0], 0.1)
        np.testing.assert_array_equal(envelope, 0.0)

    def test_linear_modulus_gives_exponential_growth(self):
        chi = np.full(10, 2.0)
        envelope = osgood_integrate(1.0, chi, 0.05, modulus=linear_modulus, substeps=256)
        assert envelope[-1] == pytest.approx(math.exp(1.0), rel=1e-2)

    def test_empirical_chi_reproduces_growth(self):
        t = np.array([0.0, 0.1, 0.2])
        phi = np.array([1e-3, 2e-3, 1.5e-3])
        chi = empirical_chi(t, phi)
        assert chi[0] == 0.0 and chi[2] == 0.0
        assert phi[1] - phi[0] == pytest.approx(0.1 * chi[1] * osgood_mu(phi[0]))

    def test_frequency_threshold(self):
        assert frequency_threshold(1.0) == 2
        assert frequency_threshold(0.0) > frequency_threshold(1e-6) > frequency_threshold(1.0)
