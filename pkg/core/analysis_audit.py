"""
Analysis Audit
==============

Numerical checks of the exact cancellations behind the energy law and the
uniqueness estimate, plus run-level audits (energy balance, a-priori bound
tracking, scaling invariance and the Osgood monitor of twin runs).

Every audit returns an AuditReport whose table has one row per checked
identity with columns (identity, value, scale, ratio, pass). `scale` is the
size of the largest constituent, so `ratio` is a relative defect.

Lyapunov terms are evaluated as grid quadratures of pointwise products of
exact spectral derivatives. For random fields whose modes satisfy
6 k_max < N the quadrature is exact, which is what `audit_fields` provides.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid

from core.initial_conditions import InitialConditionConfig, build_initial_fields, random_bandlimited
from core.littlewood_paley import (
    empirical_chi,
    frequency_threshold,
    osgood_integrate,
    osgood_mu,
)
from core.qtensor_model import (
    ModelParams,
    embed_block,
    identity,
    matmul,
    trace,
    trace_of_product,
    velocity_gradient,
)
from core.solver import SimState, StepperConfig, prepare_state, run
from core.spectral_core import (
    Grid,
    QTensorField,
    SpectralField,
    VelocityField,
    check_same_grid,
    gradient,
    integrate,
    l2_norm,
    laplacian,
    transform_forward,
)

_logger = logging.getLogger("analysis_audit")

AUDIT_COLUMNS = ["identity", "value", "scale", "ratio", "pass"]
MONITOR_COLUMNS = ["t", "Phi", "dPhi_dt", "mu_Phi", "chi_emp", "envelope", "N_t"]

LYAPUNOV_IDENTITIES: Dict[str, Dict[str, float]] = {
    "I": {"I": 1.0},
    "II": {"II": 1.0},
    "A+AA": {"A": 1.0, "AA": 1.0},
    "2B+BB": {"B": 2.0, "BB": 1.0},
    "2C+CC": {"C": 2.0, "CC": 1.0},
    "J1+J2-JJ1-JJ2": {"J1": 1.0, "J2": 1.0, "JJ1": -1.0, "JJ2": -1.0},
    "J3-JJ3": {"J3": 1.0, "JJ3": -1.0},
}

UNIQUENESS_IDENTITIES: Dict[str, Dict[str, float]] = {
    "C1+C2+C3+C4": {"C1": 1.0, "C2": 1.0, "C3": 1.0, "C4": 1.0},
    "D1+D2": {"D1": 1.0, "D2": 1.0},
    "F1+F2": {"F1": 1.0, "F2": 1.0},
}

# D1 and D2 pair an antisymmetric with a symmetric matrix and vanish on their own.
POWERED_IDENTITIES = ("C1+C2+C3+C4", "F1+F2")

DEFAULT_ORDER_WINDOWS = {1: (1.8, 2.2), 2: (3.5, 4.5)}


# ==========================================
# Report types
# ==========================================

@dataclass(eq=False)
class TermLedger:
    """
    Labelled term values of one field snapshot.

    Attributes:
        terms: Label -> value (energy-rate units)
        scales: Label -> integral of the absolute integrand
        metadata: Seeds, grid and switches used
    """
    terms: Dict[str, float]
    scales: Dict[str, float]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def combine(self, weights: Mapping[str, float]) -> Tuple[float, float]:
        """Weighted sum of terms and the largest weighted constituent scale."""
        value = sum(w * self.terms[label] for label, w in weights.items())
        scale = max(abs(w) * self.scales[label] for label, w in weights.items())
        return float(value), float(scale)


@dataclass(eq=False)
class AuditReport:
    kind: str
    table: pd.DataFrame
    series: Optional[pd.DataFrame] = None
    ledger: Optional[TermLedger] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.table["pass"].all()) if len(self.table) else True

    def failures(self) -> List[str]:
        return list(self.table.loc[~self.table["pass"].astype(bool), "identity"])

    def summary(self) -> str:
        lines = [f"{self.kind} audit: {len(self.table)} checks, {len(self.failures())} failed"]
        for row in self.table.itertuples(index=False):
            mark = "ok  " if row[4] else "FAIL"
            lines.append(f"  {mark} {row[0]:<28} value={row[1]: .3e} scale={row[2]:.3e} ratio={row[3]:.3e}")
        return "\n".join(lines)


def _row(identity_label: str, value: float, scale: float, passed: bool) -> Dict[str, Any]:
    ratio = abs(value) / scale if scale > 0 else 0.0
    return {"identity": identity_label, "value": value, "scale": scale, "ratio": ratio, "pass": bool(passed)}


def _identity_rows(ledger: TermLedger, identities: Mapping[str, Mapping[str, float]], tolerance: float) -> List[Dict[str, Any]]:
    rows = []
    for label, weights in identities.items():
        value, scale = ledger.combine(weights)
        rows.append(_row(label, value, scale, abs(value) <= tolerance * scale))
    return rows


def combine_reports(kind: str, reports: Sequence[Tuple[str, AuditReport]]) -> AuditReport:
    """Stack labelled reports into one table, suffixing identities with the label."""
    tables = []
    for label, report in reports:
        table = report.table.copy()
        table["identity"] = table["identity"] + f"[{label}]"
        tables.append(table)
    table = pd.concat(tables, ignore_index=True) if tables else pd.DataFrame(columns=AUDIT_COLUMNS)
    return AuditReport(kind=kind, table=table[AUDIT_COLUMNS], metadata={"runs": len(reports)})


# ==========================================
# Admissible random fields
# ==========================================

def audit_k_max(grid: Grid) -> int:
    """Highest mode for which the quartic-and-quintic Lyapunov quadratures are exact."""
    return max(1, grid.n_axis // 32)


def audit_fields(
    grid: Grid,
    d_target: int,
    seed: int,
    initial: Optional[InitialConditionConfig] = None,
) -> Tuple[QTensorField, VelocityField]:
    """
    Admissible fields for one audit seed.

    The initial-condition block picks the generators (random-bandlimited by
    default); k_max is capped at `audit_k_max` and snapshots are ignored.
    """
    initial = initial or InitialConditionConfig(amplitude=0.5)
    capped = replace(
        initial,
        seed=seed,
        k_max=min(initial.k_max, audit_k_max(grid)),
        snapshot_q=None,
        snapshot_u=None,
    )
    return build_initial_fields(grid, d_target, capped)


def _unprojected(u: VelocityField, seed: int, k_max: int) -> VelocityField:
    grid = u.grid
    potential = random_bandlimited(grid, (), seed=[seed, 20], k_max=k_max)
    grad = gradient(potential)
    target = l2_norm(u) or math.sqrt(grid.volume)
    grad_norm = l2_norm(grad)
    return VelocityField(grid, u.coeffs + grad.coeffs * (target / grad_norm))


def _nonsymmetric(Q: QTensorField, seed: int, k_max: int) -> QTensorField:
    grid = Q.grid
    raw = random_bandlimited(grid, Q.component_shape, seed=[seed, 21], k_max=k_max).coeffs
    skew = 0.5 * (raw - np.swapaxes(raw, 0, 1))
    target = l2_norm(Q) or math.sqrt(grid.volume)
    skew_norm = math.sqrt(grid.volume * float(np.sum(np.abs(skew) ** 2)))
    return QTensorField(grid, Q.coeffs + skew * (target / skew_norm))


# ==========================================
# Lyapunov cancellations
# ==========================================

def _frobenius(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Literal A:B = A_ab B_ab, no symmetry assumed."""
    return np.einsum("ab...,ab...->...", a, b)


def _bulk_force_pointwise(q: np.ndarray, p: ModelParams, spatial_ndim: int) -> np.ndarray:
    n = q.shape[0]
    q2 = matmul(q, q)
    trq2 = trace(q2)
    return -p.a * q + p.b * (q2 - trq2 / n * identity(n, spatial_ndim)) - p.c * q * trq2


def lyapunov_ledger(Q: QTensorField, u: VelocityField, p: ModelParams) -> TermLedger:
    """
    Evaluate every labelled term of the energy-law cancellations.

    With G_ab = d_b u_a, D, Omega its parts, P = Q + Id/n, F the bulk force
    and H = L Lap Q + F:

        I   = lam int u.grad Q : F          II  = lam int (Q Omega - Omega Q) : F
        A   = int u.grad Q : Lap Q          AA  = int Q_cd,a Q_cd,b G_ab
        B   = -(L lam/2) int (G Q) : Lap Q  BB  = L lam int (Lap Q Q) : G
        C   = (L lam/2) int (G^T Q) : Lap Q CC  = -L lam int (Q Lap Q) : G
        J1  = int (P D) : H                 JJ1 = int (P H) : G
        J2  = int (D P) : H                 JJ2 = int (H P) : G
        J3  = int (P : H) tr(Q G)           JJ3 = int (P : G) tr(Q H)
    """
    grid = check_same_grid(Q, u)
    n = Q.component_shape[0]
    q = Q.physical
    gq = gradient(Q).physical
    lq = laplacian(Q).physical
    v = u.physical
    gu = gradient(u).physical
    G = embed_block(gu, n)
    Gt = np.swapaxes(G, 0, 1)
    D = 0.5 * (G + Gt)
    W = 0.5 * (G - Gt)
    eye = identity(n, grid.d)
    P = q + eye / n
    F = _bulk_force_pointwise(q, p, grid.d)
    H = p.L * lq + F
    advected = np.einsum("g...,abg...->ab...", v, gq)
    L_lam = p.L * p.lam

    densities = {
        "I": p.lam * _frobenius(advected, F),
        "II": p.lam * _frobenius(matmul(q, W) - matmul(W, q), F),
        "A": _frobenius(advected, lq),
        "AA": np.einsum("cda...,cdb...,ab...->...", gq, gq, gu),
        "B": -0.5 * L_lam * _frobenius(matmul(G, q), lq),
        "BB": L_lam * _frobenius(matmul(lq, q), G),
        "C": 0.5 * L_lam * _frobenius(matmul(Gt, q), lq),
        "CC": -L_lam * _frobenius(matmul(q, lq), G),
        "J1": _frobenius(matmul(P, D), H),
        "J2": _frobenius(matmul(D, P), H),
        "JJ1": _frobenius(matmul(P, H), G),
        "JJ2": _frobenius(matmul(H, P), G),
        "J3": _frobenius(P, H) * trace_of_product(q, G),
        "JJ3": _frobenius(P, G) * trace_of_product(q, H),
    }
    terms = {label: integrate(grid, dens) for label, dens in densities.items()}
    scales = {label: integrate(grid, np.abs(dens)) for label, dens in densities.items()}
    return TermLedger(terms=terms, scales=scales, metadata={"grid": f"{grid.n_axis}^{grid.d}", "d_target": n})


def audit_lyapunov_cancellations(
    Q: QTensorField,
    u: VelocityField,
    p: ModelParams,
    tolerance: float = 1e-10,
    break_projection: bool = False,
    break_symmetry: bool = False,
    control_seed: int = 0,
) -> AuditReport:
    """
    Check that every claimed-zero combination of the energy-law terms vanishes.

    Args:
        Q: Trace-free symmetric Q-tensor (band-limited for exact quadrature)
        u: Divergence-free velocity
        p: Model parameters
        tolerance: Relative tolerance against the largest constituent
        break_projection: Add a gradient field to u (I, A+AA and J3-JJ3 must fail)
        break_symmetry: Add an antisymmetric part to Q (II, 2B+BB, 2C+CC and J1+J2-JJ1-JJ2 must fail)
        control_seed: Seed of the hypothesis-breaking perturbations

    Returns:
        AuditReport of kind "lyapunov" carrying the ledger
    """
    k_max = audit_k_max(Q.grid)
    if break_projection:
        u = _unprojected(u, control_seed, k_max)
    if break_symmetry:
        Q = _nonsymmetric(Q, control_seed, k_max)
    ledger = lyapunov_ledger(Q, u, p)
    ledger.metadata.update(break_projection=break_projection, break_symmetry=break_symmetry)
    table = pd.DataFrame(_identity_rows(ledger, LYAPUNOV_IDENTITIES, tolerance), columns=AUDIT_COLUMNS)
    report = AuditReport(kind="lyapunov", table=table, ledger=ledger, metadata=dict(ledger.metadata))
    _logger.debug(f"lyapunov audit failures={report.failures()}")
    return report


# ==========================================
# Uniqueness cancellations
# ==========================================

def hdot_minus_half_pairing(X: SpectralField, Y: SpectralField) -> Tuple[float, float]:
    """
    Homogeneous H^-1/2 pairing by the direct multiplier |k|^-1.

    Returns:
        (pairing, scale) with scale = V sum |k|^-1 |X_k| |Y_k|
    """
    grid = check_same_grid(X, Y)
    k = grid.k_magnitude
    with np.errstate(divide="ignore"):
        weight = np.where(k > 0, 1.0 / np.where(k > 0, k, 1.0), 0.0)
    x, y = X.coeffs, Y.coeffs
    value = grid.volume * float(np.sum(weight * (x * np.conj(y)).real))
    scale = grid.volume * float(np.sum(weight * np.abs(x) * np.abs(y)))
    return value, scale


def uniqueness_ledger(
    Q1: QTensorField,
    Q2: QTensorField,
    u1: VelocityField,
    u2: VelocityField,
    p: ModelParams,
    swap_rotation_for_strain: bool = False,
) -> TermLedger:
    """
    The C, D and F terms of the H^-1/2 energy estimate for two solutions.

        C1 = C2 = -L xi <dD/n, Lap dQ>      C3 = C4 = L xi <Lap dQ/n, grad du>
        D1 = -L <W/n, Lap dQ>               D2 = L <W/n, Lap dQ>  (written with W^T)
        F1 = c <Q2^2 t, grad du>            F2 = -c <Q2 t Q2, grad du>

    with W = dOmega, t = tr(dQ Q1 + Q2 dQ), n the size of Q (the Id/n of the
    alignment tensor) and every pairing in H^-1/2.
    """
    grid = check_same_grid(Q1, Q2, u1, u2)
    n = Q1.component_shape[0]
    dQ = Q1 - Q2
    du = u1 - u2
    parts = velocity_gradient(du, n)
    grad_du = parts.gradient
    lap_dq = laplacian(dQ)
    W = parts.D if swap_rotation_for_strain else parts.Omega
    Wt = W.with_coeffs(np.swapaxes(W.coeffs, 0, 1))

    q1, q2, dq = Q1.physical, Q2.physical, dQ.physical
    t = trace(matmul(dq, q1) + matmul(q2, dq))
    f1 = transform_forward(grid, matmul(q2, q2) * t)
    f2 = transform_forward(grid, matmul(q2 * t, q2))

    # isotropic part of P = Q + Id/n
    iso = 1.0 / n
    pairs = {
        "C1": (-iso * p.L * p.xi * parts.D, lap_dq),
        "C2": (-iso * p.L * p.xi * parts.D, lap_dq),
        "C3": (iso * p.L * p.xi * lap_dq, grad_du),
        "C4": (iso * p.L * p.xi * lap_dq, grad_du),
        "D1": (-iso * p.L * W, lap_dq),
        "D2": (-iso * p.L * Wt, lap_dq),
        "F1": (p.c * f1, grad_du),
        "F2": (-p.c * f2, grad_du),
    }
    terms, scales = {}, {}
    for label, (x, y) in pairs.items():
        terms[label], scales[label] = hdot_minus_half_pairing(x, y)
    return TermLedger(terms=terms, scales=scales, metadata={"grid": f"{grid.n_axis}^{grid.d}", "d_target": n})


def audit_uniqueness_cancellations(
    Q1: QTensorField,
    Q2: QTensorField,
    u1: VelocityField,
    u2: VelocityField,
    p: ModelParams,
    tolerance: float = 1e-9,
    power_threshold: float = 1e-3,
    swap_rotation_for_strain: bool = False,
) -> AuditReport:
    """
    Check C1+C2+C3+C4 = D1+D2 = F1+F2 = 0, and that the largest C and F
    constituents are large enough relative to their scale for the check to
    mean something.
    """
    ledger = uniqueness_ledger(Q1, Q2, u1, u2, p, swap_rotation_for_strain)
    ledger.metadata["swap_rotation_for_strain"] = swap_rotation_for_strain
    rows = _identity_rows(ledger, UNIQUENESS_IDENTITIES, tolerance)
    for label in POWERED_IDENTITIES:
        constituents = UNIQUENESS_IDENTITIES[label]
        scale = max(ledger.scales[term] for term in constituents)
        if scale == 0.0:
            continue
        value = max(abs(ledger.terms[term]) for term in constituents)
        rows.append(_row(f"power:{label}", value, scale, value >= power_threshold * scale))
    table = pd.DataFrame(rows, columns=AUDIT_COLUMNS)
    return AuditReport(kind="uniqueness", table=table, ledger=ledger, metadata=dict(ledger.metadata))


# ==========================================
# Energy balance and a-priori bound
# ==========================================

def _max_abs_residual(diagnostics: pd.DataFrame) -> float:
    residual = diagnostics["residual"].to_numpy()[1:]
    return float(np.max(np.abs(residual))) if residual.size else 0.0


def audit_energy_balance(
    diagnostics: Union[pd.DataFrame, Sequence[pd.DataFrame]],
    expected_order: Optional[int] = None,
    residual_tolerance: float = 1e-2,
    monotone_tolerance: float = 1e-12,
) -> AuditReport:
    """
    Residual report of one run, or of a sequence of runs with halving dt.

    Rows per run:
        residual[dt]  max |r| relative to the largest dissipation
        monotone[dt]  largest energy growth rate between rows, against max |r|
    Rows per consecutive pair (when expected_order is given):
        order[dt_a/dt_b]  ratio of max |r|, inside the window of that order

    Args:
        diagnostics: Diagnostics DataFrame(s) from `solver.run`, coarsest dt first
        expected_order: Scheme order (1 or 2) to check the reduction factor against
        residual_tolerance: Relative bound on max |r|
        monotone_tolerance: Slack on energy growth, relative to the dissipation scale

    Returns:
        AuditReport of kind "energy" whose series holds (dt, t, residual)
    """
    runs = [diagnostics] if isinstance(diagnostics, pd.DataFrame) else list(diagnostics)
    rows: List[Dict[str, Any]] = []
    series = []
    max_residuals = []
    for frame in runs:
        t = frame["t"].to_numpy()
        steps = frame["step"].to_numpy()
        dt = float((t[1] - t[0]) / (steps[1] - steps[0])) if len(frame) > 1 else 0.0
        label = f"dt={dt:.3g}"
        r_max = _max_abs_residual(frame)
        max_residuals.append((label, dt, r_max))
        dissipation = (frame["visc"] + frame["rot"]).to_numpy()
        d_scale = float(dissipation.max()) if dissipation.size else 0.0
        rows.append(_row(f"residual[{label}]", r_max, d_scale, r_max <= residual_tolerance * d_scale or r_max == 0.0))

        energy = frame["E"].to_numpy()
        growth = np.diff(energy) / np.diff(t) if energy.size > 1 else np.zeros(0)
        worst = float(max(0.0, growth.max())) if growth.size else 0.0
        budget = r_max + monotone_tolerance * max(d_scale, abs(float(energy[0])) if energy.size else 0.0)
        rows.append(_row(f"monotone[{label}]", worst, budget, worst <= budget))
        series.append(pd.DataFrame({"dt": dt, "t": t, "residual": frame["residual"].to_numpy()}))

    if expected_order is not None:
        low, high = DEFAULT_ORDER_WINDOWS[expected_order]
        for (label_a, _, r_a), (label_b, _, r_b) in zip(max_residuals, max_residuals[1:]):
            if r_b == 0.0:
                factor = 0.0 if r_a == 0.0 else math.inf
                passed = r_a == 0.0
            else:
                factor = r_a / r_b
                passed = low <= factor <= high
            rows.append({
                "identity": f"order[{label_a}/{label_b}]",
                "value": factor,
                "scale": float(2 ** expected_order),
                "ratio": math.log2(factor) if 0.0 < factor < math.inf else 0.0,
                "pass": bool(passed),
            })

    table = pd.DataFrame(rows, columns=AUDIT_COLUMNS)
    residual_series = pd.concat(series, ignore_index=True) if series else None
    return AuditReport(
        kind="energy",
        table=table,
        series=residual_series,
        metadata={"max_residuals": [r for _, _, r in max_residuals]},
    )


@dataclass(eq=False)
class BoundTrack:
    """E + M||Q||^2 against its initial value plus the integrated unabsorbed quantities."""
    series: pd.DataFrame
    max_excursion: float
    excursions: int


def audit_apriori_bound(diagnostics: pd.DataFrame, M: Optional[float] = None) -> BoundTrack:
    """
    Track the shifted functional against a unit-weight bound.

    bound(t) = functional(0) + int_0^t (||Q||^2 + ||grad Q||^2 + ||Q||_4^4 + ||Q||_6^6) ds

    Excursions (functional above bound) are counted; no constant is asserted.
    """
    t = diagnostics["t"].to_numpy()
    if M is None:
        functional = diagnostics["E_plus_M_Q2"].to_numpy()
    else:
        functional = diagnostics["E"].to_numpy() + M * diagnostics["Q_L2sq"].to_numpy()
    rhs = (
        diagnostics["Q_L2sq"] + diagnostics["gradQ_L2sq"] + diagnostics["Q_L4_4"] + diagnostics["Q_L6_6"]
    ).to_numpy()
    integral = cumulative_trapezoid(rhs, t, initial=0.0) if t.size > 1 else np.zeros_like(t)
    bound = functional[0] + integral if functional.size else functional
    excursion = functional - bound
    series = pd.DataFrame({"t": t, "functional": functional, "bound": bound, "excursion": excursion})
    positive = excursion[excursion > 0]
    return BoundTrack(
        series=series,
        max_excursion=float(positive.max()) if positive.size else 0.0,
        excursions=int(positive.size),
    )


# ==========================================
# Scaling invariance
# ==========================================

def rescale_field(f: SpectralField, delta: int, target: Optional[Grid] = None) -> SpectralField:
    """
    f(delta x) on the same box: the coefficient of mode m moves to mode delta m.

    Args:
        f: Field to rescale
        delta: Positive integer factor
        target: Grid of the result (same shape as f.grid; defaults to f.grid); its
            dealias band decides which rescaled modes are representable

    Raises:
        ValueError: delta is not a positive integer, or a nonzero mode would leave the dealias band
    """
    if int(delta) != delta or delta < 1:
        raise ValueError(f"delta must be a positive integer, got {delta}")
    delta = int(delta)
    grid = f.grid
    target = target or grid
    if target.shape != grid.shape or target.l_box != grid.l_box:
        raise ValueError(f"target grid {target} must share shape and box with {grid}")
    cutoff = target.dealias_fraction * target.n_axis / 2
    scaled = [delta * m for m in grid.mode_indices]
    keep = np.ones(grid.shape, dtype=bool)
    for s in scaled:
        keep &= np.abs(s) <= cutoff

    comp_axes = tuple(range(len(f.component_shape)))
    magnitude = np.abs(f.coeffs).max(axis=comp_axes) if comp_axes else np.abs(f.coeffs)
    peak = float(magnitude.max())
    if peak > 0 and np.any(magnitude[~keep] > 1e-14 * peak):
        raise ValueError(f"rescaling by {delta} maps resolved modes outside the dealias band of {grid.n_axis}^{grid.d}")

    out = np.zeros_like(f.coeffs)
    index = tuple(s[keep] % grid.n_axis for s in scaled)
    out[(Ellipsis,) + index] = f.coeffs[(Ellipsis, keep)]
    return type(f)(target, out)


def rescale_state(state: SimState, delta: int, target: Optional[Grid] = None) -> SimState:
    """(Q, u)(x, t) -> (Q, delta u)(delta x, delta^2 t) expressed at the rescaled time t / delta^2."""
    Q = rescale_field(state.Q, delta, target)
    u = rescale_field(state.u, delta, target)
    return SimState(t=state.t / delta ** 2, Q=Q, u=u.with_coeffs(u.coeffs * delta), step=state.step)


def base_grid_for(grid: Grid, delta: int) -> Grid:
    """Grid whose dealias band maps onto the band of `grid` under mode m -> delta m."""
    return replace(grid, dealias_fraction=grid.dealias_fraction / delta)


def _on_grid(state: SimState, grid: Grid) -> SimState:
    return SimState(state.t, QTensorField(grid, state.Q.coeffs), VelocityField(grid, state.u.coeffs), state.step)


def _relative_discrepancy(a: SimState, b: SimState) -> float:
    num = math.hypot(l2_norm(a.Q - b.Q), l2_norm(a.u - b.u))
    den = math.hypot(l2_norm(b.Q), l2_norm(b.u))
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def audit_scaling(
    initial: SimState,
    p: ModelParams,
    cfg: StepperConfig,
    delta: int = 2,
    tolerance: float = 1e-6,
) -> AuditReport:
    """
    Compare the rescaled base trajectory with a direct run of the rescaled system.

    The base run keeps only modes with |delta m| inside the dealias band, so both
    runs resolve the same mode set. The scaled run uses bulk coefficients times
    delta^2 and dt, t_final divided by delta^2, so both take the same number of
    steps and checkpoints. The J_n / mollifier regularization has fixed length
    scales and is switched off for both runs.

    Returns:
        AuditReport of kind "scaling" with the per-checkpoint discrepancy series
    """
    if cfg.regularization.enabled:
        _logger.warning("scaling audit runs the unregularized system; regularization ignored")
        cfg = replace(cfg, regularization=replace(cfg.regularization, enabled=False))
    grid = initial.grid
    base_grid = base_grid_for(grid, delta)
    base_initial = prepare_state(_on_grid(initial, base_grid), cfg)
    scaled_initial = rescale_state(base_initial, delta, grid)
    scaled_cfg = replace(cfg, dt=cfg.dt / delta ** 2, t_final=cfg.t_final / delta ** 2)

    base_states: List[SimState] = []
    scaled_states: List[SimState] = []
    run(base_initial, p, cfg, sinks=[lambda state, row: base_states.append(state)], M=0.0)
    run(scaled_initial, p.scaled(delta), scaled_cfg, sinks=[lambda state, row: scaled_states.append(state)], M=0.0)

    discrepancy = [
        _relative_discrepancy(direct, rescale_state(base, delta, grid))
        for base, direct in zip(base_states, scaled_states)
    ]
    series = pd.DataFrame({"t": [s.t for s in scaled_states], "discrepancy": discrepancy})
    worst = float(max(discrepancy)) if discrepancy else 0.0
    table = pd.DataFrame([_row(f"scaling[delta={delta}]", worst, 1.0, worst <= tolerance)], columns=AUDIT_COLUMNS)
    _logger.info(f"scaling audit delta={delta} checkpoints={len(discrepancy)} max_discrepancy={worst:.3e}")
    return AuditReport(kind="scaling", table=table, series=series, metadata={"delta": delta})


# ==========================================
# Osgood monitor
# ==========================================

def uniqueness_monitor(series: pd.DataFrame, tolerance: float = 1e-10, floor: float = 1e-300) -> AuditReport:
    """
    Osgood report of a twin-run series.

    Adds the backward-difference dPhi/dt, mu(Phi), the minimal chi_emp, the
    sub-stepped envelope seeded with Phi(0) and the frequency threshold N(t).
    Checkpoints where Phi exceeds the envelope by more than tolerance * max Phi
    are flagged; the run-integral of chi_emp must be finite.
    """
    t = series["t"].to_numpy(dtype=float)
    phi = series["Phi"].to_numpy(dtype=float)
    chi = empirical_chi(t, phi, floor=floor)
    dphi = np.zeros_like(phi)
    if phi.size > 1:
        dphi[1:] = np.diff(phi) / np.diff(t)
    envelope = osgood_integrate(float(phi[0]), chi[1:], np.diff(t)) if phi.size else phi
    monitor = pd.DataFrame({
        "t": t,
        "Phi": phi,
        "dPhi_dt": dphi,
        "mu_Phi": osgood_mu(np.maximum(phi, 0.0)),
        "chi_emp": chi,
        "envelope": envelope,
        "N_t": [frequency_threshold(v, floor) for v in phi],
    }, columns=MONITOR_COLUMNS)

    phi_scale = float(np.max(np.abs(phi))) if phi.size else 0.0
    over = phi - envelope
    worst = float(max(0.0, over.max())) if over.size else 0.0
    violations = int(np.sum(over > tolerance * phi_scale)) if phi_scale > 0 else 0
    chi_integral = float(np.sum(chi[1:] * np.diff(t))) if phi.size > 1 else 0.0
    rows = [
        _row("envelope", worst, phi_scale, violations == 0),
        _row("chi_integral", chi_integral, 1.0, math.isfinite(chi_integral)),
    ]
    if violations:
        _logger.warning(f"uniqueness monitor: Phi above envelope at {violations} checkpoints")
    table = pd.DataFrame(rows, columns=AUDIT_COLUMNS)
    return AuditReport(
        kind="uniqueness-monitor",
        table=table,
        series=monitor,
        metadata={"violations": violations, "chi_integral": chi_integral},
    )
