"""
Solver
======

Time integration of the coupled flow / Q-tensor system with an IMEX
integrating-factor scheme, per-cadence diagnostics, and twin runs for the
uniqueness monitor.

Stiff linear parts (Gamma L Lap Q, nu Lap u and optionally -Gamma a Q) are
integrated exactly per mode; everything else is explicit:

    imex1:  y1 = E (y + dt N(y))
    imex2:  y* = E (y + dt N(y)),  y1 = E (y + dt/2 N(y)) + dt/2 N(y*)

with E = exp(dt L). After every step u is projected and dealiased, Q is
symmetrized, made trace-free and dealiased, and with regularization enabled
both are cut off by J_n.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.littlewood_paley import empirical_chi, sobolev_norm
from core.qtensor_model import (
    ModelParams,
    alignment_S,
    bulk_energy_density,
    bulk_parts,
    elastic_energy,
    estimate_M,
    kinetic_energy,
    matmul,
    molecular_field_H,
    stress_sigma,
    stress_tau,
    velocity_gradient,
)
from core.spectral_core import (
    Grid,
    GridMismatchError,
    QTensorField,
    SpectralField,
    VelocityField,
    check_same_grid,
    dealias,
    divergence,
    from_physical,
    gradient,
    integrate,
    l2_norm,
    laplacian,
    leray_project,
    max_abs,
    mollify_Reps,
    pointwise_norm,
    readonly,
    spectral_cutoff_Jn,
)

_logger = logging.getLogger("solver")

Scheme = Literal["imex1", "imex2"]
SCHEMES: Tuple[str, ...] = ("imex1", "imex2")

DIAGNOSTIC_COLUMNS = [
    "t", "E", "kinetic", "free_energy", "visc", "rot", "residual",
    "H1_Q", "L2_u", "max_u", "E_plus_M_Q2",
]
DIAGNOSTIC_EXTRA_COLUMNS = [
    "step", "residual_left", "Q_L2sq", "gradQ_L2sq", "Q_L4_4", "Q_L6_6",
    "trace_defect", "symmetry_defect", "divergence_defect",
]
TWIN_COLUMNS = ["t", "Phi", "Phi_u", "Phi_Q", "diss_u", "diss_Q", "chi_emp"]


class NumericalAbortError(RuntimeError):
    """Raised when a step produces non-finite values."""

    def __init__(self, step: int, time: float, message: str = "non-finite values"):
        super().__init__(f"numerical abort at step {step} (t={time}): {message}")
        self.step = step
        self.time = time


# ==========================================
# Configuration types
# ==========================================

@dataclass(frozen=True)
class RegularizationConfig:
    """
    Attributes:
        enabled: Evolve the cut-off / mollified system instead of the plain one
        n: Annulus index of J_n (2^-n <= |k| <= 2^n)
        eps: Mollifier width and weight of the two dissipative eps-terms
    """
    enabled: bool = False
    n: int = 8
    eps: float = 1e-2

    def __post_init__(self):
        if self.enabled:
            if self.n < 1:
                raise ValueError(f"regularization n must be >= 1, got {self.n}")
            if not self.eps > 0:
                raise ValueError(f"regularization eps must be positive, got {self.eps}")


@dataclass(frozen=True)
class StepperConfig:
    """
    Attributes:
        dt: Time step
        scheme: imex1 (order 1) or imex2 (order 2)
        t_final: Final time
        cadence: Steps between diagnostic rows
        implicit_bulk: Fold -Gamma a Q into the integrating factor
        regularization: Regularized-system switches
    """
    dt: float = 1e-3
    scheme: Scheme = "imex2"
    t_final: float = 1.0
    cadence: int = 10
    implicit_bulk: bool = False
    regularization: RegularizationConfig = field(default_factory=RegularizationConfig)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.t_final < 0:
            raise ValueError(f"t_final must be >= 0, got {self.t_final}")
        if self.cadence < 1:
            raise ValueError(f"cadence must be >= 1, got {self.cadence}")

    @property
    def order(self) -> int:
        return 1 if self.scheme == "imex1" else 2

    @property
    def n_steps(self) -> int:
        steps = int(round(self.t_final / self.dt))
        if abs(steps * self.dt - self.t_final) > 1e-9 * max(1.0, self.t_final):
            _logger.warning(f"t_final={self.t_final} is not a multiple of dt={self.dt}; running {steps} steps")
        return steps


@dataclass(frozen=True, eq=False)
class SimState:
    """Solver state: time, Q-tensor and velocity on one grid."""
    t: float
    Q: QTensorField
    u: VelocityField
    step: int = 0

    def __post_init__(self):
        check_same_grid(self.Q, self.u)

    @property
    def grid(self) -> Grid:
        return self.Q.grid

    def structure_defects(self) -> Dict[str, float]:
        """Relative trace, symmetry and divergence defects."""
        q = self.Q.coeffs
        q_norm = np.sqrt(np.sum(np.abs(q) ** 2))
        trace = np.sqrt(np.sum(np.abs(np.einsum("ii...->...", q)) ** 2))
        asym = np.sqrt(np.sum(np.abs(q - np.swapaxes(q, 0, 1)) ** 2))
        grad_u = gradient(self.u).coeffs
        div = np.sqrt(np.sum(np.abs(np.einsum("ii...->...", grad_u)) ** 2))
        grad_norm = np.sqrt(np.sum(np.abs(grad_u) ** 2))
        return {
            "trace_defect": float(trace / q_norm) if q_norm > 0 else 0.0,
            "symmetry_defect": float(asym / q_norm) if q_norm > 0 else 0.0,
            "divergence_defect": float(div / grad_norm) if grad_norm > 0 else 0.0,
        }


@dataclass(eq=False)
class Trajectory:
    """Result of `run`: diagnostics (one row per cadence), final state and run metadata."""
    diagnostics: pd.DataFrame
    final_state: SimState
    metadata: Dict[str, Any] = field(default_factory=dict)


@dataclass(eq=False)
class TwinRun:
    series: pd.DataFrame
    final_a: SimState
    final_b: SimState
    metadata: Dict[str, Any] = field(default_factory=dict)


Sink = Callable[[SimState, Dict[str, float]], None]


# ==========================================
# Right-hand sides
# ==========================================

def _is_regularized(reg: Optional[RegularizationConfig]) -> bool:
    return reg is not None and reg.enabled


def _explicit_terms(
    state: SimState,
    p: ModelParams,
    reg: Optional[RegularizationConfig],
    fold_bulk: bool = False,
) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients of every term except Gamma L Lap Q and nu Lap u (and -Gamma a Q when folded)."""
    grid = state.grid
    Q, u = state.Q, state.u
    n = Q.dimension
    d = grid.d
    regularized = _is_regularized(reg)

    def cut(f):
        return spectral_cutoff_Jn(f, reg.n) if regularized else f

    transport = mollify_Reps(u, reg.eps) if regularized else u
    v = transport.physical
    grad_q = gradient(Q)
    gq = grad_q.physical

    # Q equation
    advect_q = from_physical(grid, np.einsum("g...,abg...->ab...", v, gq), QTensorField)
    strain_rotation = velocity_gradient(transport, n)
    aligned = alignment_S(strain_rotation, Q, p)
    quadratic, cubic = bulk_parts(Q, p)
    bulk = cut(quadratic).coeffs - cut(cubic).coeffs
    nq = cut(aligned - advect_q).coeffs + p.gamma * bulk
    if not fold_bulk:
        nq = nq - p.gamma * p.a * Q.coeffs

    # momentum equation
    lap_q = laplacian(Q)
    H = QTensorField(grid, p.L * lap_q.coeffs - p.a * Q.coeffs + bulk)
    tau = stress_tau(Q, H, grad_q, p)
    if regularized:
        q = Q.physical
        lq = lap_q.physical
        sigma = from_physical(grid, p.L * (matmul(q, lq) - matmul(lq, q)))
    else:
        sigma = stress_sigma(Q, H)
    stress = SpectralField(grid, (tau.coeffs + sigma.coeffs)[:d, :d])

    grad_u = gradient(u)
    advect_u = from_physical(grid, np.einsum("g...,ag...->a...", v, grad_u.physical))
    force = cut(-advect_u).coeffs + p.lam * divergence(cut(stress)).coeffs

    if regularized:
        # transported gradient term
        w = from_physical(grid, np.einsum("g...,lmg...->lm...", v, gq)).physical
        magnitude = pointwise_norm(w, grid)
        pull = from_physical(grid, np.einsum("lmg...,lm...->g...", gq, w) * magnitude)
        force -= reg.eps * mollify_Reps(cut(pull), reg.eps).coeffs
        # cubic velocity-gradient term
        g = gradient(transport).physical
        push = from_physical(grid, g * np.sum(g ** 2, axis=(0, 1)))
        force += reg.eps * divergence(mollify_Reps(cut(push), reg.eps)).coeffs

    nu = leray_project(SpectralField(grid, force)).coeffs
    return nq, nu


def rhs_Q(state: SimState, p: ModelParams, reg: Optional[RegularizationConfig] = None) -> QTensorField:
    """Full right-hand side of the Q equation: Gamma H + S - u.grad Q (regularized variant when enabled)."""
    nq, _ = _explicit_terms(state, p, reg)
    return QTensorField(state.grid, p.gamma * p.L * laplacian(state.Q).coeffs + nq)


def rhs_u(state: SimState, p: ModelParams, reg: Optional[RegularizationConfig] = None) -> VelocityField:
    """Full right-hand side of the momentum equation, Leray-projected."""
    _, nu = _explicit_terms(state, p, reg)
    return VelocityField(state.grid, p.nu * laplacian(state.u).coeffs + nu)


# ==========================================
# Stepping
# ==========================================

def _folds_bulk(p: ModelParams, cfg: StepperConfig) -> bool:
    """-Gamma a Q joins the integrating factor only when it damps (a > 0)."""
    return cfg.implicit_bulk and p.a > 0


@lru_cache(maxsize=16)
def _integrating_factors(grid: Grid, p: ModelParams, cfg: StepperConfig) -> Tuple[np.ndarray, np.ndarray]:
    k2 = grid.k_squared
    linear_q = -p.gamma * p.L * k2
    if _folds_bulk(p, cfg):
        linear_q = linear_q - p.gamma * p.a
    linear_u = -p.nu * k2
    return readonly(np.exp(cfg.dt * linear_q)), readonly(np.exp(cfg.dt * linear_u))


def _clean(grid: Grid, q: np.ndarray, u: np.ndarray, reg: Optional[RegularizationConfig]) -> Tuple[QTensorField, VelocityField]:
    Q = dealias(QTensorField(grid, q).symmetrized())
    U = leray_project(dealias(SpectralField(grid, u)))
    if _is_regularized(reg):
        Q = spectral_cutoff_Jn(Q, reg.n)
        U = spectral_cutoff_Jn(U, reg.n)
    return Q, U


def prepare_state(state: SimState, cfg: StepperConfig) -> SimState:
    """Impose the state invariants on initial data (J_n applied when regularized)."""
    Q, u = _clean(state.grid, state.Q.coeffs, state.u.coeffs, cfg.regularization)
    return SimState(state.t, Q, u, state.step)


def step(state: SimState, p: ModelParams, cfg: StepperConfig) -> SimState:
    """
    Advance one time step.

    Raises:
        NumericalAbortError: non-finite values after the step
    """
    grid = state.grid
    reg = cfg.regularization
    dt = cfg.dt
    fold = _folds_bulk(p, cfg)
    eq, eu = _integrating_factors(grid, p, cfg)
    q, u = state.Q.coeffs, state.u.coeffs

    nq, nu = _explicit_terms(state, p, reg, fold)
    q_pred = eq * (q + dt * nq)
    u_pred = eu * (u + dt * nu)
    if cfg.scheme == "imex1":
        q_new, u_new = q_pred, u_pred
    else:
        stage = SimState(state.t + dt, QTensorField(grid, q_pred), VelocityField(grid, u_pred), state.step + 1)
        nq2, nu2 = _explicit_terms(stage, p, reg, fold)
        q_new = eq * (q + 0.5 * dt * nq) + 0.5 * dt * nq2
        u_new = eu * (u + 0.5 * dt * nu) + 0.5 * dt * nu2

    step_index = state.step + 1
    t_new = state.t + dt
    if not (np.isfinite(q_new).all() and np.isfinite(u_new).all()):
        _logger.error(f"step error: non-finite values at step={step_index} t={t_new}")
        raise NumericalAbortError(step_index, t_new)

    Q, U = _clean(grid, q_new, u_new, reg)
    new_state = SimState(t_new, Q, U, step_index)
    courant = max_abs(U) * dt / grid.spacing
    if courant > 1.0:
        _logger.warning(f"CFL advisory step={step_index} courant={courant:.3f}")
    return new_state


# ==========================================
# Diagnostics
# ==========================================

@dataclass(frozen=True)
class EnergyTerms:
    kinetic: float
    free_energy: float
    E: float
    visc: float
    rot: float

    @property
    def dissipation(self) -> float:
        return self.visc + self.rot


def energy_terms(state: SimState, p: ModelParams) -> EnergyTerms:
    Q, u = state.Q, state.u
    kinetic = kinetic_energy(u)
    free = elastic_energy(Q, p) + integrate(state.grid, bulk_energy_density(Q, p))
    visc = p.nu * l2_norm(gradient(u)) ** 2
    rot = p.gamma * p.lam * l2_norm(molecular_field_H(Q, p)) ** 2
    return EnergyTerms(kinetic, free, kinetic + p.lam * free, visc, rot)


def diagnostics_row(
    state: SimState,
    energies: EnergyTerms,
    M: float,
    residual: float = 0.0,
    residual_left: float = 0.0,
) -> Dict[str, float]:
    grid = state.grid
    Q, u = state.Q, state.u
    q_l2sq = l2_norm(Q) ** 2
    grad_q_l2sq = l2_norm(gradient(Q)) ** 2
    frob_sq = np.sum(Q.physical ** 2, axis=(0, 1))
    row = {
        "t": state.t,
        "E": energies.E,
        "kinetic": energies.kinetic,
        "free_energy": energies.free_energy,
        "visc": energies.visc,
        "rot": energies.rot,
        "residual": residual,
        "H1_Q": math.sqrt(q_l2sq + grad_q_l2sq),
        "L2_u": l2_norm(u),
        "max_u": max_abs(u),
        "E_plus_M_Q2": energies.E + M * q_l2sq,
        "step": state.step,
        "residual_left": residual_left,
        "Q_L2sq": q_l2sq,
        "gradQ_L2sq": grad_q_l2sq,
        "Q_L4_4": integrate(grid, frob_sq ** 2),
        "Q_L6_6": integrate(grid, frob_sq ** 3),
    }
    row.update(state.structure_defects())
    return row


def _is_checkpoint(step_index: int, n_steps: int, cadence: int) -> bool:
    return step_index % cadence == 0 or step_index == n_steps


def run(
    initial: SimState,
    p: ModelParams,
    cfg: StepperConfig,
    sinks: Sequence[Sink] = (),
    M: Optional[float] = None,
) -> Trajectory:
    """
    Advance to t_final, emitting one diagnostics row per cadence.

    The residual of a row at t_n belongs to the step ending at t_n:
    r = (E_n - E_{n-1})/dt + (D_{n-1} + D_n)/2 with D = visc + rot; the first
    row carries 0.

    Args:
        initial: Initial state (invariants are imposed before stepping)
        p: Model parameters
        cfg: Stepper configuration
        sinks: Callables receiving (state, row) at every checkpoint
        M: Shift of the monitored functional E + M||Q||^2 (estimated when None)

    Returns:
        Trajectory with the diagnostics DataFrame and the final state
    """
    if M is None:
        M = estimate_M(p).value
    n_steps = cfg.n_steps
    _logger.info(
        f"run start steps={n_steps} dt={cfg.dt} scheme={cfg.scheme} grid={initial.grid.n_axis}^{initial.grid.d} "
        f"regularized={cfg.regularization.enabled} workers={initial.grid.workers}"
    )
    state = prepare_state(initial, cfg)
    rows = []

    def emit(row: Dict[str, float]):
        rows.append(row)
        _logger.debug(f"diagnostics t={row['t']:.6g} E={row['E']:.12g} residual={row['residual']:.3e}")
        for sink in sinks:
            sink(state, row)

    emit(diagnostics_row(state, energy_terms(state, p), M))
    for i in range(n_steps):
        checkpoint = _is_checkpoint(i + 1, n_steps, cfg.cadence)
        before = energy_terms(state, p) if checkpoint else None
        state = step(state, p, cfg)
        if checkpoint:
            after = energy_terms(state, p)
            slope = (after.E - before.E) / cfg.dt
            residual = slope + 0.5 * (before.dissipation + after.dissipation)
            residual_left = slope + before.dissipation
            emit(diagnostics_row(state, after, M, residual, residual_left))

    diagnostics = pd.DataFrame(rows, columns=DIAGNOSTIC_COLUMNS + DIAGNOSTIC_EXTRA_COLUMNS)
    _logger.info(f"run success steps={n_steps} t={state.t:.6g} E={diagnostics['E'].iloc[-1]:.12g}")
    metadata = {
        "n_steps": n_steps,
        "dt": cfg.dt,
        "scheme": cfg.scheme,
        "order": cfg.order,
        "M": M,
        "workers": initial.grid.workers,
    }
    return Trajectory(diagnostics=diagnostics, final_state=state, metadata=metadata)


# ==========================================
# Twin runs
# ==========================================

def uniqueness_functional(a: SimState, b: SimState, p: ModelParams) -> Dict[str, float]:
    """Phi and its dissipation-side companions, with H^-1/2 norms from the direct multiplier."""
    du = a.u - b.u
    dq = a.Q - b.Q
    phi_u = sobolev_norm(du, -0.5) ** 2 / (2.0 * p.lam)
    phi_q = p.L * sobolev_norm(gradient(dq), -0.5) ** 2
    return {
        "Phi": phi_u + phi_q,
        "Phi_u": phi_u,
        "Phi_Q": phi_q,
        "diss_u": p.nu / p.lam * sobolev_norm(gradient(du), -0.5) ** 2,
        "diss_Q": p.gamma * p.L ** 2 * sobolev_norm(laplacian(dq), -0.5) ** 2,
    }


def twin_run(initial_a: SimState, initial_b: SimState, p: ModelParams, cfg: StepperConfig) -> TwinRun:
    """
    Co-advance two states through identical steppers and record Phi per cadence.

    Raises:
        GridMismatchError: the two initial states live on different grids
    """
    if initial_a.grid != initial_b.grid or initial_a.Q.component_shape != initial_b.Q.component_shape:
        raise GridMismatchError("twin initial states must share grid and target dimension")
    n_steps = cfg.n_steps
    _logger.info(f"twin_run start steps={n_steps} dt={cfg.dt} scheme={cfg.scheme}")
    a = prepare_state(initial_a, cfg)
    b = prepare_state(initial_b, cfg)
    rows = [dict(t=a.t, **uniqueness_functional(a, b, p))]
    for i in range(n_steps):
        a = step(a, p, cfg)
        b = step(b, p, cfg)
        if _is_checkpoint(i + 1, n_steps, cfg.cadence):
            rows.append(dict(t=a.t, **uniqueness_functional(a, b, p)))

    series = pd.DataFrame(rows)
    series["chi_emp"] = empirical_chi(series["t"].to_numpy(), series["Phi"].to_numpy())
    series = series[TWIN_COLUMNS]
    _logger.info(f"twin_run success max_Phi={series['Phi'].max():.3e}")
    return TwinRun(series=series, final_a=a, final_b=b, metadata={"n_steps": n_steps, "dt": cfg.dt})
