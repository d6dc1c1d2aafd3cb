"""
Initial Conditions
==================

Named generators for Q-tensor and velocity initial data.

Generators:
    zero               - identically zero field
    random-bandlimited - seeded Gaussian coefficients with |k|^-slope envelope
    taylor-green       - u = A (sin x1 cos x2, -cos x1 sin x2, 0)
    uniaxial-stripe    - Q = A (n n^T - Id/d) with director angle kappa sin(x1)
    single-mode        - Q = A cos(k0 x1) diag(1, -1, 0)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from core.snapshot import read_snapshot
from core.spectral_core import (
    Grid,
    QTensorField,
    SpectralField,
    VelocityField,
    dealias,
    l2_norm,
    leray_project,
    transform_forward,
)

_logger = logging.getLogger("initial_conditions")

Seed = Union[int, Sequence[int]]

Q_GENERATORS = ("zero", "random-bandlimited", "uniaxial-stripe", "single-mode")
U_GENERATORS = ("zero", "random-bandlimited", "taylor-green")


@dataclass(frozen=True)
class InitialConditionConfig:
    """
    Attributes:
        q_generator: Name from Q_GENERATORS (ignored when snapshot_q is set)
        u_generator: Name from U_GENERATORS (ignored when snapshot_u is set)
        seed: Seed of the random generators (Q and u draw separate streams)
        amplitude: RMS amplitude (random), peak amplitude (closed forms)
        slope: Spectral slope of random-bandlimited
        k_max: Highest integer mode of random-bandlimited; wavenumber of single-mode
        kappa: Director modulation of uniaxial-stripe
        snapshot_q: Snapshot file providing Q
        snapshot_u: Snapshot file providing u
        perturbation: RMS amplitude of the twin perturbation
        perturbation_seed: Seed of the twin perturbation
    """
    q_generator: str = "random-bandlimited"
    u_generator: str = "random-bandlimited"
    seed: int = 0
    amplitude: float = 0.1
    slope: float = 1.0
    k_max: int = 4
    kappa: float = 0.5
    snapshot_q: Optional[str] = None
    snapshot_u: Optional[str] = None
    perturbation: float = 1e-6
    perturbation_seed: int = 1

    def __post_init__(self):
        if self.q_generator not in Q_GENERATORS:
            raise ValueError(f"q_generator must be one of {Q_GENERATORS}, got {self.q_generator!r}")
        if self.u_generator not in U_GENERATORS:
            raise ValueError(f"u_generator must be one of {U_GENERATORS}, got {self.u_generator!r}")
        if self.amplitude < 0 or self.perturbation < 0:
            raise ValueError("amplitude and perturbation must be >= 0")
        if self.k_max < 0:
            raise ValueError(f"k_max must be >= 0, got {self.k_max}")


# ==========================================
# Random band-limited fields
# ==========================================

def random_bandlimited(
    grid: Grid,
    component_shape: Tuple[int, ...] = (),
    seed: Seed = 0,
    k_max: int = 4,
    slope: float = 0.0,
    rms: float = 1.0,
) -> SpectralField:
    """
    Seeded zero-mean real field on integer modes 1 <= |m| <= k_max.

    Coefficients are drawn over the cube [-k_max, k_max]^d in a fixed order and
    Hermitian-symmetrized, so a seed gives the same field on every grid that
    resolves k_max.

    Args:
        grid: Target grid
        component_shape: Component axes of the field
        seed: Integer or sequence of integers for np.random.default_rng
        k_max: Highest integer mode; must lie inside the dealias mask
        slope: Coefficient envelope |m|^-slope
        rms: Target root-mean-square of the field (||f||_{L2} / sqrt(V))

    Returns:
        SpectralField with the requested component shape
    """
    if k_max > grid.dealias_cutoff:
        raise ValueError(f"k_max={k_max} exceeds the dealias cutoff {grid.dealias_cutoff} of this grid")
    coeffs = np.zeros(tuple(component_shape) + grid.shape, dtype=complex)
    if k_max < 1 or rms == 0:
        return SpectralField(grid, coeffs)

    rng = np.random.default_rng(seed)
    width = 2 * k_max + 1
    box_shape = tuple(component_shape) + (width,) * grid.d
    box = rng.standard_normal(box_shape) + 1j * rng.standard_normal(box_shape)

    modes = np.arange(-k_max, k_max + 1)
    mesh = np.meshgrid(*([modes] * grid.d), indexing="ij")
    radius = np.sqrt(sum(m.astype(float) ** 2 for m in mesh))
    envelope = np.zeros_like(radius)
    inside = (radius >= 1) & (radius <= k_max)
    envelope[inside] = radius[inside] ** (-slope)
    box *= envelope

    spatial = tuple(range(len(component_shape), box.ndim))
    box = 0.5 * (box + np.conj(np.flip(box, axis=spatial)))

    index = np.ix_(*([modes % grid.n_axis] * grid.d))
    coeffs[(Ellipsis,) + index] = box
    norm = np.sqrt(np.sum(np.abs(coeffs) ** 2))
    if norm > 0:
        coeffs *= rms / norm
    return SpectralField(grid, coeffs)


def _normalize_rms(f: SpectralField, rms: float):
    norm = l2_norm(f) / np.sqrt(f.grid.volume)
    if norm == 0:
        return f
    return f.with_coeffs(f.coeffs * (rms / norm))


def random_qtensor(grid: Grid, d_target: int, seed: Seed, rms: float, k_max: int, slope: float = 1.0) -> QTensorField:
    raw = random_bandlimited(grid, (d_target, d_target), seed=seed, k_max=k_max, slope=slope)
    return _normalize_rms(QTensorField(grid, raw.coeffs).symmetrized(), rms)


def random_velocity(grid: Grid, seed: Seed, rms: float, k_max: int, slope: float = 1.0) -> VelocityField:
    raw = random_bandlimited(grid, (grid.d,), seed=seed, k_max=k_max, slope=slope)
    return _normalize_rms(leray_project(raw), rms)


# ==========================================
# Closed-form generators
# ==========================================

def taylor_green(grid: Grid, amplitude: float = 1.0) -> VelocityField:
    x = grid.coordinates()
    values = np.zeros((grid.d,) + grid.shape)
    values[0] = amplitude * np.sin(x[0]) * np.cos(x[1])
    values[1] = -amplitude * np.cos(x[0]) * np.sin(x[1])
    return leray_project(dealias(transform_forward(grid, values)))


def uniaxial_stripe(grid: Grid, d_target: int, amplitude: float = 1.0, kappa: float = 0.5) -> QTensorField:
    """Q = A (n n^T - Id/d) with n = (cos theta, sin theta, 0...), theta = kappa sin(x1)."""
    x = grid.coordinates()
    theta = kappa * np.sin(x[0])
    director = np.zeros((d_target,) + grid.shape)
    director[0] = np.cos(theta)
    director[1] = np.sin(theta)
    eye = np.eye(d_target).reshape((d_target, d_target) + (1,) * grid.d)
    values = amplitude * (np.einsum("i...,j...->ij...", director, director) - eye / d_target)
    return dealias(transform_forward(grid, values, QTensorField)).symmetrized()


def single_mode_q(grid: Grid, d_target: int, amplitude: float = 1.0, k0: int = 1) -> QTensorField:
    """Q = A cos(k0 x1 / l_box) diag(1, -1, 0...)."""
    if not 0 < k0 <= grid.dealias_cutoff:
        raise ValueError(f"single-mode wavenumber must lie in 1..{grid.dealias_cutoff}, got {k0}")
    x = grid.coordinates()
    profile = amplitude * np.cos(k0 * x[0] / grid.l_box)
    values = np.zeros((d_target, d_target) + grid.shape)
    values[0, 0] = profile
    values[1, 1] = -profile
    return dealias(transform_forward(grid, values, QTensorField))


# ==========================================
# Dispatch
# ==========================================

def build_initial_fields(grid: Grid, d_target: int, cfg: InitialConditionConfig) -> Tuple[QTensorField, VelocityField]:
    """
    Build (Q, u) from an initial-condition block.

    Snapshot paths take precedence over generator names.
    """

    q_builders: Dict[str, Callable[[], QTensorField]] = {
        "zero": lambda: QTensorField.zeros(grid, (d_target, d_target)),
        "random-bandlimited": lambda: random_qtensor(grid, d_target, [cfg.seed, 0], cfg.amplitude, cfg.k_max, cfg.slope),
        "uniaxial-stripe": lambda: uniaxial_stripe(grid, d_target, cfg.amplitude, cfg.kappa),
        "single-mode": lambda: single_mode_q(grid, d_target, cfg.amplitude, max(cfg.k_max, 1)),
    }
    u_builders: Dict[str, Callable[[], VelocityField]] = {
        "zero": lambda: VelocityField.zeros(grid, (grid.d,)),
        "random-bandlimited": lambda: random_velocity(grid, [cfg.seed, 1], cfg.amplitude, cfg.k_max, cfg.slope),
        "taylor-green": lambda: taylor_green(grid, cfg.amplitude),
    }

    if cfg.snapshot_q:
        Q = QTensorField(grid, read_snapshot(cfg.snapshot_q, expected_grid=grid).field.coeffs)
    else:
        Q = q_builders[cfg.q_generator]()
    if cfg.snapshot_u:
        u = VelocityField(grid, read_snapshot(cfg.snapshot_u, expected_grid=grid).field.coeffs)
    else:
        u = u_builders[cfg.u_generator]()
    _logger.info(f"initial fields q={cfg.snapshot_q or cfg.q_generator} u={cfg.snapshot_u or cfg.u_generator} seed={cfg.seed}")
    return Q, u


def perturbation_fields(grid: Grid, d_target: int, cfg: InitialConditionConfig) -> Tuple[QTensorField, VelocityField]:
    """Seeded random perturbation of RMS size cfg.perturbation for the second twin."""
    dq = random_qtensor(grid, d_target, [cfg.perturbation_seed, 2], cfg.perturbation, cfg.k_max, cfg.slope)
    du = random_velocity(grid, [cfg.perturbation_seed, 3], cfg.perturbation, cfg.k_max, cfg.slope)
    return dq, du
