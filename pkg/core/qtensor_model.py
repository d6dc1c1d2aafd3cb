"""
Q-Tensor Model
==============

Constitutive terms of the coupled flow / Q-tensor system: bulk force F(Q),
molecular field H, flow-alignment term S, the stresses tau and sigma, the
free and total energies and the dissipation rates.

Index convention: G_ab = d_b u_a, D = (G + G^T)/2, Omega = (G - G^T)/2.
The target dimension (size of the Q matrix) may exceed the domain dimension;
the velocity gradient then fills the upper-left d x d block.

Pointwise products are formed in physical space and dealiased when
transformed back; scalar trace factors are dealiased before they multiply a
matrix so no product above cubic order reaches the final transform.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from core.spectral_core import (
    QTensorField,
    SpectralField,
    VelocityField,
    check_same_grid,
    from_physical,
    gradient,
    integrate,
    l2_norm,
    laplacian,
)

_logger = logging.getLogger("qtensor_model")


@dataclass(frozen=True)
class ModelParams:
    """
    Material and flow parameters.

    Attributes:
        a, b, c: Landau-de Gennes bulk coefficients (c > 0)
        L: Elastic constant
        gamma: Rotational mobility
        nu: Viscosity
        lam: Elastic/diffusive ratio
        xi: Alignment parameter
        d_target: Size of the Q matrix (2 or 3)
        xi_threshold: |xi| above this logs a warning (no closed-form bound exists)
    """
    a: float = -0.2
    b: float = 1.0
    c: float = 1.0
    L: float = 1.0
    gamma: float = 1.0
    nu: float = 1.0
    lam: float = 1.0
    xi: float = 0.3
    d_target: int = 2
    xi_threshold: float = math.inf

    def __post_init__(self):
        for name in ("c", "L", "gamma", "nu", "lam"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        for name in ("a", "b", "xi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")
        if self.d_target not in (2, 3):
            raise ValueError(f"d_target must be 2 or 3, got {self.d_target}")
        if not self.xi_threshold > 0:
            raise ValueError(f"xi_threshold must be positive, got {self.xi_threshold}")
        if abs(self.xi) > self.xi_threshold:
            _logger.warning(
                f"|xi|={abs(self.xi)} exceeds xi_threshold={self.xi_threshold}; energy decay is not guaranteed"
            )

    def scaled(self, delta: float) -> "ModelParams":
        """Parameters of the rescaled system: bulk coefficients times delta^2."""
        factor = delta ** 2
        return replace(self, a=self.a * factor, b=self.b * factor, c=self.c * factor)


@dataclass(frozen=True, eq=False)
class StrainRotation:
    """Symmetric (D) and antisymmetric (Omega) parts of the velocity gradient, in target size."""
    D: SpectralField
    Omega: SpectralField

    def __post_init__(self):
        check_same_grid(self.D, self.Omega)
        shape = self.D.component_shape
        if len(shape) != 2 or shape[0] != shape[1] or self.Omega.component_shape != shape:
            raise ValueError(f"D and Omega need matching square component shapes, got {shape}")

    @property
    def gradient(self) -> SpectralField:
        return self.D + self.Omega


# ==========================================
# Pointwise matrix algebra
# ==========================================

def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ij...,jk...->ik...", a, b)


def trace(a: np.ndarray) -> np.ndarray:
    return np.einsum("ii...->...", a)


def trace_of_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """tr(AB) = A_ab B_ba pointwise."""
    return np.einsum("ab...,ba...->...", a, b)


def identity(n: int, spatial_ndim: int) -> np.ndarray:
    return np.eye(n).reshape((n, n) + (1,) * spatial_ndim)


def embed_block(block: np.ndarray, size: int) -> np.ndarray:
    """Place a (d, d, ...) array in the upper-left corner of a zero (size, size, ...) array."""
    d = block.shape[0]
    if d == size:
        return block
    out = np.zeros((size, size) + block.shape[2:], dtype=block.dtype)
    out[:d, :d] = block
    return out


# ==========================================
# Constitutive terms
# ==========================================

def velocity_gradient(u: VelocityField, d_target: int) -> StrainRotation:
    """Split grad u (G_ab = d_b u_a) into D and Omega, embedded in d_target x d_target."""
    g = gradient(u).coeffs
    g = embed_block(g, d_target)
    g_t = np.swapaxes(g, 0, 1)
    return StrainRotation(SpectralField(u.grid, 0.5 * (g + g_t)), SpectralField(u.grid, 0.5 * (g - g_t)))


def bulk_parts(Q: QTensorField, p: ModelParams) -> Tuple[QTensorField, QTensorField]:
    """
    Quadratic and cubic parts of the bulk force, each dealiased.

    Returns:
        (b[Q^2 - tr(Q^2)/d Id], c Q tr(Q^2))
    """
    grid = Q.grid
    q = Q.physical
    n = Q.dimension
    q2 = matmul(q, q)
    trq2 = trace(q2)
    quadratic = p.b * (q2 - trq2 / n * identity(n, grid.d))
    cubic = p.c * q * trq2
    return from_physical(grid, quadratic, QTensorField), from_physical(grid, cubic, QTensorField)


def bulk_force_F(Q: QTensorField, p: ModelParams) -> QTensorField:
    quadratic, cubic = bulk_parts(Q, p)
    return QTensorField(Q.grid, -p.a * Q.coeffs + quadratic.coeffs - cubic.coeffs)


def molecular_field_H(Q: QTensorField, p: ModelParams) -> QTensorField:
    """H = L Lap Q + F(Q)."""
    return QTensorField(Q.grid, p.L * laplacian(Q).coeffs + bulk_force_F(Q, p).coeffs)


def alignment_S(gradU: StrainRotation, Q: QTensorField, p: ModelParams) -> QTensorField:
    """
    Flow-alignment term.

    S = (xi D + Omega) P + P (xi D - Omega) - 2 xi P tr(Q grad u),  P = Q + Id/d

    Args:
        gradU: Strain and rotation in target size
        Q: Q-tensor field
        p: Model parameters

    Returns:
        Dealiased S
    """
    grid = check_same_grid(gradU.D, Q)
    n = Q.dimension
    q = Q.physical
    strain = gradU.D.physical
    rotation = gradU.Omega.physical
    P = q + identity(n, grid.d) / n
    # staged so the final dealias sees at most cubic products
    tr_qg = from_physical(grid, trace_of_product(q, strain + rotation)).physical
    s = (
        matmul(p.xi * strain + rotation, P)
        + matmul(P, p.xi * strain - rotation)
        - 2.0 * p.xi * P * tr_qg
    )
    return from_physical(grid, s, QTensorField)


def ericksen_product(gradQ: SpectralField, size: int) -> np.ndarray:
    """(grad Q (.) grad Q)_ij = Q_ab,i Q_ab,j in physical space, embedded in size x size."""
    gq = gradQ.physical
    return embed_block(np.einsum("abi...,abj...->ij...", gq, gq), size)


def stress_tau(Q: QTensorField, H: QTensorField, gradQ: SpectralField, p: ModelParams) -> SpectralField:
    """Symmetric stress -xi(PH + HP) + 2 xi P tr(QH) - L grad Q (.) grad Q."""
    grid = check_same_grid(Q, H, gradQ)
    n = Q.dimension
    q = Q.physical
    h = H.physical
    P = q + identity(n, grid.d) / n
    tr_qh = from_physical(grid, trace_of_product(q, h)).physical
    tau = (
        -p.xi * (matmul(P, h) + matmul(h, P))
        + 2.0 * p.xi * P * tr_qh
        - p.L * ericksen_product(gradQ, n)
    )
    return from_physical(grid, tau)


def stress_sigma(Q: QTensorField, H: QTensorField) -> SpectralField:
    """Antisymmetric stress QH - HQ."""
    grid = check_same_grid(Q, H)
    q = Q.physical
    h = H.physical
    return from_physical(grid, matmul(q, h) - matmul(h, q))


# ==========================================
# Energies
# ==========================================

def bulk_energy_density(Q: QTensorField, p: ModelParams) -> np.ndarray:
    q = Q.physical
    q2 = matmul(q, q)
    trq2 = trace(q2)
    trq3 = trace(matmul(q2, q))
    return 0.5 * p.a * trq2 - p.b / 3.0 * trq3 + 0.25 * p.c * trq2 ** 2


def elastic_energy(Q: QTensorField, p: ModelParams) -> float:
    return 0.5 * p.L * l2_norm(gradient(Q)) ** 2


def free_energy(Q: QTensorField, p: ModelParams) -> float:
    """int L/2 |grad Q|^2 + a/2 tr Q^2 - b/3 tr Q^3 + c/4 (tr Q^2)^2."""
    return elastic_energy(Q, p) + integrate(Q.grid, bulk_energy_density(Q, p))


def kinetic_energy(u: VelocityField) -> float:
    return 0.5 * l2_norm(u) ** 2


def total_energy_E(Q: QTensorField, u: VelocityField, p: ModelParams) -> float:
    check_same_grid(Q, u)
    return kinetic_energy(u) + p.lam * free_energy(Q, p)


def dissipation_rate(Q: QTensorField, u: VelocityField, p: ModelParams) -> Tuple[float, float]:
    """
    Returns:
        (visc, rot) = (nu ||grad u||^2, Gamma lam ||H||^2)
    """
    check_same_grid(Q, u)
    visc = p.nu * l2_norm(gradient(u)) ** 2
    rot = p.gamma * p.lam * l2_norm(molecular_field_H(Q, p)) ** 2
    return visc, rot


# ==========================================
# Shifted-functional constant
# ==========================================

@dataclass(frozen=True)
class MEstimate:
    value: float
    worst_magnitude: float
    samples: int


def estimate_M(
    p: ModelParams,
    n_directions: int = 256,
    magnitudes: np.ndarray | None = None,
    seed: int = 0,
) -> MEstimate:
    """
    Heuristic search for the shift M making E + M||Q||^2 controllable.

    For every sampled trace-free symmetric Q the pointwise requirement
    M/2 trQ^2 + c/8 tr^2Q^2 <= (M + a/2) trQ^2 - b/3 trQ^3 + c/4 tr^2Q^2
    reduces to M >= -a + (2b/3) trQ^3/trQ^2 - (c/4) trQ^2. The maximum of the
    right side over the sample (floored at 0) is returned. Only the sampled
    range is covered, so the result is not a proof.

    Args:
        p: Model parameters (uses a, b, c, d_target)
        n_directions: Number of random unit directions
        magnitudes: Frobenius magnitudes to scan (default 1e-3..1e3)
        seed: Sampling seed

    Returns:
        MEstimate with the value and the magnitude attaining it
    """
    if magnitudes is None:
        magnitudes = np.logspace(-3, 3, 121)
    n = p.d_target
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n_directions, n, n))
    sym = 0.5 * (raw + np.swapaxes(raw, 1, 2))
    sym -= np.eye(n) * (np.trace(sym, axis1=1, axis2=2) / n)[:, None, None]
    sym /= np.sqrt(np.einsum("kij,kij->k", sym, sym))[:, None, None]
    unit_tr3 = np.einsum("kij,kjl,kli->k", sym, sym, sym)

    r = np.asarray(magnitudes, dtype=float)[None, :]
    required = -p.a + (2.0 * p.b / 3.0) * r * unit_tr3[:, None] - 0.25 * p.c * r ** 2
    idx = np.unravel_index(np.argmax(required), required.shape)
    worst = float(required[idx])
    value = max(0.0, worst)
    _logger.debug(f"estimate_M value={value} worst_magnitude={r[0, idx[1]]}")
    return MEstimate(value=value, worst_magnitude=float(r[0, idx[1]]), samples=int(required.size))
