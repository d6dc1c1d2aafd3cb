"""
Spectral Core
=============

Periodic grid, spectral transforms, differential operators, Leray
projection, the sharp annular cutoff J_n and the mollifier R_eps.

Fields are stored as Fourier coefficients normalized so that the constant
field 1 has coefficient 1 at k=0 (forward transform divided by N^d).
Component axes come first and the d spatial axes last, so a d-vector on a
64x64 grid has coefficient shape (d, 64, 64) and a matrix field (m, m, 64, 64).

Usage:
    from core.spectral_core import Grid, transform_forward, gradient

    grid = Grid(d=2, n_axis=64)
    x1, x2 = grid.coordinates()
    f = transform_forward(grid, np.cos(x1))
    df = gradient(f)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Tuple, Type, TypeVar

import numpy as np
import scipy.fft
from scipy import special

_logger = logging.getLogger("spectral_core")

F = TypeVar("F", bound="SpectralField")

# Gauss-Legendre nodes for the radial mollifier transform
MOLLIFIER_QUADRATURE_NODES = 256


class GridMismatchError(ValueError):
    """Raised when arrays or fields do not live on the expected grid."""


# ==========================================
# Grid
# ==========================================

@dataclass(frozen=True)
class Grid:
    """
    Periodic grid on the torus [0, 2*pi*l_box)^d.

    Attributes:
        d: Spatial dimension (2 or 3)
        n_axis: Points per axis, a power of two >= 8
        l_box: Box length scale; the box is 2*pi*l_box wide per axis
        dealias_fraction: Fraction of N/2 kept by the dealias mask
        workers: FFT worker threads (execution detail, not part of equality)
    """
    d: int = 2
    n_axis: int = 64
    l_box: float = 1.0
    dealias_fraction: float = 2.0 / 3.0
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"d must be 2 or 3, got {self.d}")
        if self.n_axis < 8 or self.n_axis & (self.n_axis - 1):
            raise ValueError(f"n_axis must be a power of two >= 8, got {self.n_axis}")
        if not self.l_box > 0:
            raise ValueError(f"l_box must be positive, got {self.l_box}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n_axis,) * self.d

    @property
    def length(self) -> float:
        return 2.0 * np.pi * self.l_box

    @property
    def volume(self) -> float:
        return self.length ** self.d

    @property
    def spacing(self) -> float:
        return self.length / self.n_axis

    @property
    def dealias_cutoff(self) -> int:
        """Largest integer mode index kept by the dealias mask."""
        return int(np.floor(self.dealias_fraction * self.n_axis / 2))

    @cached_property
    def mode_indices(self) -> Tuple[np.ndarray, ...]:
        """Integer mode indices per axis, in {-N/2+1, ..., N/2}."""
        m = np.fft.fftfreq(self.n_axis, d=1.0 / self.n_axis).astype(int)
        m[self.n_axis // 2] = self.n_axis // 2
        return readonly(np.meshgrid(*([m] * self.d), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> Tuple[np.ndarray, ...]:
        """Derivative wavenumbers m/l_box; Nyquist modes carry no derivative."""
        nyquist = self.n_axis // 2
        ks = []
        for m in self.mode_indices:
            k = m / self.l_box
            ks.append(np.where(m == nyquist, 0.0, k))
        return readonly(ks)

    @cached_property
    def k_squared(self) -> np.ndarray:
        return readonly(sum(k ** 2 for k in self.wavenumbers))

    @cached_property
    def inverse_k_squared(self) -> np.ndarray:
        k2 = self.k_squared
        with np.errstate(divide="ignore"):
            inv = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
        return readonly(inv)

    @cached_property
    def k_magnitude(self) -> np.ndarray:
        """|k| of every retained mode (Nyquist counted at +N/2)."""
        return readonly(np.sqrt(sum((m / self.l_box) ** 2 for m in self.mode_indices)))

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        cutoff = self.dealias_fraction * self.n_axis / 2
        mask = np.ones(self.shape, dtype=bool)
        for m in self.mode_indices:
            mask &= np.abs(m) <= cutoff
        return readonly(mask)

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        """Physical coordinates of the grid points, one array per axis."""
        x = np.arange(self.n_axis) * self.spacing
        return tuple(np.meshgrid(*([x] * self.d), indexing="ij"))

    def spatial_axes(self, ndim: int) -> Tuple[int, ...]:
        return tuple(range(ndim - self.d, ndim))


def readonly(arrays):
    if isinstance(arrays, np.ndarray):
        arrays.flags.writeable = False
        return arrays
    out = tuple(np.asarray(a) for a in arrays)
    for a in out:
        a.flags.writeable = False
    return out


# ==========================================
# Fields
# ==========================================

@dataclass(frozen=True, eq=False)
class SpectralField:
    """
    Band-limited field stored as Fourier coefficients.

    Attributes:
        grid: Grid the field lives on
        coeffs: Complex coefficients, component axes first, spatial axes last
    """
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        d = self.grid.d
        if self.coeffs.ndim < d or self.coeffs.shape[-d:] != self.grid.shape:
            raise GridMismatchError(
                f"coefficient shape {self.coeffs.shape} does not end with grid shape {self.grid.shape}"
            )

    @property
    def component_shape(self) -> Tuple[int, ...]:
        return self.coeffs.shape[: self.coeffs.ndim - self.grid.d]

    @cached_property
    def physical(self) -> np.ndarray:
        return transform_inverse(self)

    @classmethod
    def zeros(cls: Type[F], grid: Grid, component_shape: Tuple[int, ...] = ()) -> F:
        return cls(grid, np.zeros(tuple(component_shape) + grid.shape, dtype=complex))

    def with_coeffs(self: F, coeffs: np.ndarray) -> F:
        return type(self)(self.grid, coeffs)

    def component(self, *index: int) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs[index])

    def _other_coeffs(self, other) -> np.ndarray:
        if isinstance(other, SpectralField):
            check_same_grid(self, other)
            return other.coeffs
        raise TypeError(f"unsupported operand {type(other).__name__}")

    def __add__(self: F, other) -> F:
        return self.with_coeffs(self.coeffs + self._other_coeffs(other))

    def __sub__(self: F, other) -> F:
        return self.with_coeffs(self.coeffs - self._other_coeffs(other))

    def __neg__(self: F) -> F:
        return self.with_coeffs(-self.coeffs)

    def __mul__(self: F, scalar) -> F:
        if isinstance(scalar, SpectralField):
            raise TypeError("field products must go through physical space")
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"{type(self).__name__}(grid={self.grid}, components={self.component_shape})"


class VelocityField(SpectralField):
    """d-component velocity field; divergence-free after `leray_project`."""

    def __post_init__(self):
        super().__post_init__()
        if self.component_shape != (self.grid.d,):
            raise GridMismatchError(
                f"velocity needs {self.grid.d} components, got shape {self.component_shape}"
            )


class QTensorField(SpectralField):
    """Matrix field holding the Q-tensor (symmetric and trace-free once cleaned)."""

    def __post_init__(self):
        super().__post_init__()
        shape = self.component_shape
        if len(shape) != 2 or shape[0] != shape[1] or shape[0] not in (2, 3):
            raise GridMismatchError(f"Q-tensor needs a 2x2 or 3x3 component shape, got {shape}")
        if shape[0] < self.grid.d:
            raise GridMismatchError(f"target dimension {shape[0]} is below domain dimension {self.grid.d}")

    @property
    def dimension(self) -> int:
        return self.component_shape[0]

    def symmetrized(self) -> "QTensorField":
        """Symmetric, trace-free part of the field."""
        c = 0.5 * (self.coeffs + np.swapaxes(self.coeffs, 0, 1))
        trace = np.einsum("ii...->...", c)
        eye = np.eye(self.dimension).reshape((self.dimension, self.dimension) + (1,) * self.grid.d)
        return QTensorField(self.grid, c - eye * trace / self.dimension)


def check_same_grid(*fields: SpectralField) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"grid mismatch: {grid} vs {f.grid}")
    return grid


# ==========================================
# Transforms
# ==========================================

def transform_forward(grid: Grid, values: np.ndarray, cls: Type[F] = SpectralField) -> F:
    """
    Physical-space real array to spectral field.

    Args:
        grid: Target grid
        values: Real array, component axes first, spatial axes last
        cls: Field class to build (SpectralField, VelocityField, QTensorField)

    Returns:
        Field with normalized coefficients
    """
    values = np.asarray(values)
    if values.ndim < grid.d or values.shape[-grid.d:] != grid.shape:
        raise GridMismatchError(f"array shape {values.shape} does not match grid {grid.shape}")
    coeffs = scipy.fft.fftn(values, axes=grid.spatial_axes(values.ndim), norm="forward", workers=grid.workers)
    return cls(grid, coeffs)


def transform_inverse(f: SpectralField) -> np.ndarray:
    grid = f.grid
    values = scipy.fft.ifftn(f.coeffs, axes=grid.spatial_axes(f.coeffs.ndim), norm="forward", workers=grid.workers)
    return np.ascontiguousarray(values.real)


def from_physical(grid: Grid, values: np.ndarray, cls: Type[F] = SpectralField) -> F:
    """Transform a pointwise product and dealias it."""
    return dealias(transform_forward(grid, values, cls))


# ==========================================
# Differential operators
# ==========================================

def gradient(f: SpectralField) -> SpectralField:
    """Gradient; the derivative index is appended as the last component axis."""
    ks = f.grid.wavenumbers
    axis = len(f.component_shape)
    coeffs = np.stack([1j * k * f.coeffs for k in ks], axis=axis)
    return SpectralField(f.grid, coeffs)


def divergence(f: SpectralField) -> SpectralField:
    """Contract the last component index with the derivative: (div A)_a = d_b A_ab."""
    grid = f.grid
    shape = f.component_shape
    if not shape or shape[-1] != grid.d:
        raise GridMismatchError(f"divergence needs a trailing component axis of size {grid.d}, got {shape}")
    axis = len(shape) - 1
    coeffs = sum(1j * k * np.take(f.coeffs, i, axis=axis) for i, k in enumerate(grid.wavenumbers))
    return SpectralField(grid, coeffs)


def laplacian(f: F) -> F:
    return f.with_coeffs(-f.grid.k_squared * f.coeffs)


def leray_project(v: SpectralField) -> VelocityField:
    """Orthogonal projection onto divergence-free fields; the mean passes through."""
    grid = v.grid
    if v.component_shape != (grid.d,):
        raise GridMismatchError(f"leray_project needs a {grid.d}-vector field, got {v.component_shape}")
    ks = grid.wavenumbers
    k_dot_v = sum(k * v.coeffs[i] for i, k in enumerate(ks))
    scaled = k_dot_v * grid.inverse_k_squared
    coeffs = np.stack([v.coeffs[i] - k * scaled for i, k in enumerate(ks)])
    return VelocityField(grid, coeffs)


def pressure_gradient(v: SpectralField) -> SpectralField:
    """Gradient part removed by the projection, (Id - P) v."""
    return SpectralField(v.grid, v.coeffs - leray_project(v).coeffs)


# ==========================================
# Filters
# ==========================================

def dealias(f: F) -> F:
    return f.with_coeffs(f.coeffs * f.grid.dealias_mask)


def spectral_cutoff_Jn(f: F, n: int) -> F:
    """Sharp annular truncation to 2^-n <= |k| <= 2^n (removes the zero mode)."""
    if n < 0:
        raise ValueError(f"J_n needs n >= 0, got {n}")
    kmag = f.grid.k_magnitude
    mask = (kmag >= 2.0 ** (-n)) & (kmag <= 2.0 ** n)
    return f.with_coeffs(f.coeffs * mask)


def mollify_Reps(f: F, eps: float) -> F:
    """Convolution with the unit-mass bump kernel eps^-d chi(x/eps)."""
    if not eps > 0:
        raise ValueError(f"mollifier width must be positive, got {eps}")
    return f.with_coeffs(f.coeffs * mollifier_multiplier(f.grid, float(eps)))


@lru_cache(maxsize=None)
def _bump_quadrature(n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = special.roots_legendre(n_nodes)
    r = 0.5 * (x + 1.0)
    bump = np.exp(-1.0 / (1.0 - r ** 2))
    return r, 0.5 * w * bump


def bump_transform(rho: np.ndarray, d: int) -> np.ndarray:
    """
    Fourier transform of the radial bump exp(-1/(1-|x|^2)), normalized to 1 at 0.

    Args:
        rho: Radial frequencies (any shape)
        d: Dimension (2 uses J0, 3 uses sin(x)/x)

    Returns:
        Multiplier values with the shape of rho
    """
    rho = np.asarray(rho, dtype=float)
    r, weights = _bump_quadrature(MOLLIFIER_QUADRATURE_NODES)
    arg = np.multiply.outer(rho.ravel(), r)
    if d == 2:
        radial = weights * r
        kernel = special.j0(arg)
    else:
        radial = weights * r ** 2
        kernel = np.sinc(arg / np.pi)
    values = (kernel @ radial) / radial.sum()
    values[rho.ravel() == 0.0] = 1.0
    return values.reshape(rho.shape)


@lru_cache(maxsize=32)
def mollifier_multiplier(grid: Grid, eps: float) -> np.ndarray:
    kmag = grid.k_magnitude
    unique, inverse = np.unique(kmag, return_inverse=True)
    values = bump_transform(eps * unique, grid.d)
    _logger.debug(f"mollifier multiplier eps={eps} distinct_radii={unique.size}")
    return readonly(values[inverse].reshape(grid.shape))


# ==========================================
# Quadrature
# ==========================================

def inner_product(f: SpectralField, g: SpectralField) -> float:
    """L2 pairing over the torus, summed over components (Parseval)."""
    grid = check_same_grid(f, g)
    if f.component_shape != g.component_shape:
        raise GridMismatchError(f"component mismatch {f.component_shape} vs {g.component_shape}")
    return float(grid.volume * np.sum((f.coeffs * np.conj(g.coeffs)).real))


def l2_norm(f: SpectralField) -> float:
    return float(np.sqrt(max(inner_product(f, f), 0.0)))


def integrate(grid: Grid, values: np.ndarray) -> float:
    """Grid quadrature of a physical array (components summed)."""
    return float(grid.volume * np.sum(values) / grid.n_axis ** grid.d)


def pointwise_norm(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Euclidean/Frobenius magnitude over the component axes."""
    comp_axes = tuple(range(values.ndim - grid.d))
    if not comp_axes:
        return np.abs(values)
    return np.sqrt(np.sum(values ** 2, axis=comp_axes))


def max_abs(f: SpectralField) -> float:
    return float(pointwise_norm(f.physical, f.grid).max())


def mean_value(f: SpectralField) -> np.ndarray:
    """Zero-mode coefficients (the spatial mean of each component)."""
    index = (Ellipsis,) + (0,) * f.grid.d
    return f.coeffs[index].real
