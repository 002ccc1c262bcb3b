"""Norms, identity residuals, smallness functionals and blow-up integrals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .model import ModelParams, SimState, nonlinear_rhs
from .spectral import (
    SpectralScalarField,
    SpectralVectorField,
    divergence,
    forward_transform,
    gradient,
    inner,
    lambda_pow,
    laplacian,
    lp_norm,
    sobolev_norm,
)

CSV_COLUMNS = (
    "time",
    "l2_u",
    "l2_v",
    "l2_theta",
    "l2_triple",
    "hhalf_triple",
    "h1_triple",
    "h32_triple",
    "h2_triple",
    "lp_alpha_u",
    "lp_beta_v",
    "bmo_u",
    "bmo_v",
    "bmo_theta",
    "pi",
    "pi_tilde",
    "energy_residual",
    "damping_res_u",
    "damping_res_v",
)

# Sobolev orders tracked per field; 2 stands for ||Delta f||
_ORDERS = {"l2": 0.0, "hhalf": 0.5, "h1": 1.0, "h32": 1.5, "h2": 2.0}


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    l2_u: float
    l2_v: float
    l2_theta: float
    l2_triple: float
    hhalf_triple: float
    h1_triple: float
    h32_triple: float
    h2_triple: float
    lp_alpha_u: float
    lp_beta_v: float
    bmo_u: float
    bmo_v: float
    bmo_theta: float
    pi: float = 0.0
    pi_tilde: float = 0.0
    energy_residual: float = 0.0
    damping_res_u: float = 0.0
    damping_res_v: float = 0.0
    # per-field norms keyed like "h32_v", both BMO estimators, smallness data
    extra: dict = field(default_factory=dict, compare=False)

    def row(self) -> tuple:
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


@dataclass
class BlowupMonitor:
    """Trapezoidal accumulator for the two blow-up integrals.

    ``pi`` carries exponents (8, 8, 2) on the BMO sizes of (u, v, theta) plus
    the damping integrability terms; ``pi_tilde`` (no-damping criterion)
    carries (2, 6, 2) and no damping terms.
    """

    C_pi: float = 1.0
    bmo_mode: str = "proxy"
    pi: float = 0.0
    pi_tilde: float = 0.0
    last: DiagnosticsRecord | None = None

    def __post_init__(self):
        if self.bmo_mode not in ("proxy", "dyadic"):
            raise ValueError(f"bmo_mode must be 'proxy' or 'dyadic', got {self.bmo_mode!r}")


def bmo_estimate(f) -> tuple:
    """Return ``(proxy, dyadic)`` BMO sizes of a scalar or vector field.

    ``proxy`` is the homogeneous H^{3/2} norm (which dominates BMO on the
    whole space). ``dyadic`` is the largest mean oscillation over the box,
    its 8 octants and its 64 sub-cubes.
    """
    proxy = sobolev_norm(f, 1.5)
    a = f.physical()
    if a.ndim == 3:
        a = a[None]
    n = a.shape[-1]
    best = 0.0
    for parts in (1, 2, 4):
        m = n // parts
        # (comp, I, x, J, y, K, z) blocks
        blocks = a.reshape(a.shape[0], parts, m, parts, m, parts, m)
        means = blocks.mean(axis=(2, 4, 6), keepdims=True)
        dev = np.sqrt(np.sum((blocks - means) ** 2, axis=0))
        best = max(best, float(dev.mean(axis=(1, 3, 5)).max()))
    return proxy, best


def _power(x: float, p: float) -> float:
    return x**p if x > 0 else 0.0


def pi_integrand(rec: DiagnosticsRecord, params: ModelParams, C_pi: float = 1.0) -> float:
    return C_pi * (
        1.0
        + _power(rec.bmo_u, 8)
        + _power(rec.bmo_v, 8)
        + _power(rec.bmo_theta, 2)
        + _power(rec.lp_alpha_u, params.alpha + 1)
        + _power(rec.lp_beta_v, params.beta + 1)
    )


def pi_tilde_integrand(rec: DiagnosticsRecord) -> float:
    return 1.0 + _power(rec.bmo_u, 2) + _power(rec.bmo_v, 6) + _power(rec.bmo_theta, 2)


def update_blowup(
    monitor: BlowupMonitor,
    record_prev: DiagnosticsRecord,
    record_next: DiagnosticsRecord,
    dt: float,
    params: ModelParams,
) -> BlowupMonitor:
    """Add one trapezoidal panel of width ``dt`` to both accumulators."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    g0 = pi_integrand(record_prev, params, monitor.C_pi)
    g1 = pi_integrand(record_next, params, monitor.C_pi)
    h0 = pi_tilde_integrand(record_prev)
    h1 = pi_tilde_integrand(record_next)
    monitor.pi += 0.5 * dt * (g0 + g1)
    monitor.pi_tilde += 0.5 * dt * (h0 + h1)
    monitor.last = record_next
    return monitor


def dissipation(state: SimState, params: ModelParams) -> float:
    """nu|grad u|^2 + eta|grad v|^2 + mu|grad theta|^2 + damping integrals."""
    d = (
        params.nu * sobolev_norm(state.u, 1) ** 2
        + params.eta * sobolev_norm(state.v, 1) ** 2
        + params.mu * sobolev_norm(state.theta, 1) ** 2
    )
    if params.sigma1 > 0:
        d += params.sigma1 * lp_norm(state.u, params.alpha + 1) ** (params.alpha + 1)
    if params.sigma2 > 0:
        d += params.sigma2 * lp_norm(state.v, params.beta + 1) ** (params.beta + 1)
    return d


def _dissipation_rate(state: SimState, params: ModelParams) -> float:
    """Time derivative of :func:`dissipation` along the semi-discrete flow."""
    tend = nonlinear_rhs(state, params).total(state, params)
    grid = state.grid
    rate = 2 * (
        params.nu * inner(lambda_pow(state.u, 2), tend.du)
        + params.eta * inner(lambda_pow(state.v, 2), tend.dv)
        + params.mu * inner(lambda_pow(state.theta, 2), tend.dtheta)
    )
    cell = grid.spacing**3
    for sigma, gamma, w, dw in (
        (params.sigma1, params.alpha, state.u, tend.du),
        (params.sigma2, params.beta, state.v, tend.dv),
    ):
        if sigma > 0:
            W = w.physical()
            mag = np.sqrt(np.sum(W**2, axis=0))
            rate += sigma * (gamma + 1) * cell * float(
                np.sum(mag ** (gamma - 1) * np.sum(W * dw.physical(), axis=0))
            )
    return rate


def energy(state: SimState) -> float:
    return (
        sobolev_norm(state.u, 0) ** 2
        + sobolev_norm(state.v, 0) ** 2
        + sobolev_norm(state.theta, 0) ** 2
    )


def energy_balance_residual(
    prev: SimState,
    next: SimState,
    dt: float,
    params: ModelParams,
    relative: bool = True,
) -> float:
    """Defect of d/dt||(u,v,theta)||^2 + 2 D = 0 over one step.

    The dissipation integral over the step uses the endpoint-corrected
    trapezoid rule (needs dD/dt at both ends), so for an RK4 step the
    defect shrinks like dt^4. With ``relative`` the defect is divided by
    twice the mean dissipation over the step.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    d0, d1 = dissipation(prev, params), dissipation(next, params)
    r0, r1 = _dissipation_rate(prev, params), _dissipation_rate(next, params)
    integral = 0.5 * dt * (d0 + d1) + dt**2 / 12.0 * (r0 - r1)
    defect = (energy(next) - energy(prev) + 2.0 * integral) / dt
    if not relative:
        return defect
    scale = 2.0 * integral / dt
    if scale == 0:
        return 0.0 if defect == 0 else math.inf
    return defect / scale


def damping_identity_sides(u: SpectralVectorField, alpha: float, sigma1: float) -> tuple:
    """Both sides of the damping/Laplacian integration-by-parts identity.

    left  = -sigma1 * int |u|^(alpha-1) u . Lap u
    right = sigma1 * || |u|^((alpha-1)/2) grad u ||^2
            + 4 sigma1 (alpha-1)/(alpha+1)^2 * || grad |u|^((alpha+1)/2) ||^2
    """
    grid = u.grid
    cell = grid.spacing**3
    U = u.physical()
    mag = np.sqrt(np.sum(U**2, axis=0))
    weight = mag ** (alpha - 1)
    left = -sigma1 * cell * float(np.sum(weight * np.sum(U * laplacian(u).physical(), axis=0)))

    grad_sq = sum(np.sum(gradient(c).physical() ** 2, axis=0) for c in u.components)
    first = cell * float(np.sum(weight * grad_sq))
    lifted = forward_transform(mag ** ((alpha + 1) / 2), grid)
    second = cell * float(np.sum(gradient(lifted).physical() ** 2))
    right = sigma1 * (first + 4 * (alpha - 1) / (alpha + 1) ** 2 * second)
    return left, right


def damping_identity_residual(u: SpectralVectorField, alpha: float, sigma1: float) -> float:
    """Relative mismatch of :func:`damping_identity_sides` (0 when both vanish)."""
    left, right = damping_identity_sides(u, alpha, sigma1)
    scale = max(abs(left), abs(right))
    return 0.0 if scale == 0 else abs(left - right) / scale


def coupling_pairings(v: SpectralVectorField, theta: SpectralScalarField, s: float) -> tuple:
    """The two pairings <L^s div v, L^s theta> and <L^s grad theta, L^s v>."""
    first = inner(lambda_pow(divergence(v), s), lambda_pow(theta, s))
    second = inner(lambda_pow(gradient(theta), s), lambda_pow(v, s))
    return first, second


def coupling_cancellation_residual(
    v: SpectralVectorField, theta: SpectralScalarField, s: float
) -> float:
    """Sum of the two coupling pairings; vanishes identically."""
    first, second = coupling_pairings(v, theta, s)
    return first + second


def smallness_functionals(
    state: SimState,
    params: ModelParams,
    C1: float = 1.0,
    C2: float = 1.0,
    eps: float = 0.0,
) -> dict:
    """Smallness functionals R(u, alpha), R~(v, beta) and the two sign conditions.

    Constants hidden in the estimates are set to 1 inside R and exposed as
    ``C1``, ``C2`` and ``eps`` in the conditions. Outside the regime
    5/2 <= alpha, beta < 4 the result is flagged not applicable (a field
    with zero damping coefficient carries R = 0 and no exponent restriction).
    """

    def bound(w, gamma, sigma):
        if sigma == 0:
            return 0.0
        if not 2.5 <= gamma < 4:
            return None
        half = sobolev_norm(w, 0.5)
        if gamma > 3:
            return _power(half, 5 - gamma) * _power(sobolev_norm(w, 1), 2 * (gamma - 3))
        return _power(half, 3 * gamma - 7)

    R_u = bound(state.u, params.alpha, params.sigma1)
    R_v = bound(state.v, params.beta, params.sigma2)
    applicable = R_u is not None and R_v is not None
    half = math.sqrt(
        sobolev_norm(state.u, 0.5) ** 2
        + sobolev_norm(state.v, 0.5) ** 2
        + sobolev_norm(state.theta, 0.5) ** 2
    )
    ell = params.ell
    cond1 = cond2 = None
    if applicable:
        cond1 = ell - C1 * (half + R_u + R_v) > 0
        cond2 = 2 * ell - C2 * (eps + half**2) > 0
    return {
        "R_u": R_u,
        "R_v": R_v,
        "cond1": cond1,
        "cond2": cond2,
        "applicable": applicable,
        "hhalf_triple": half,
    }


def record(
    state: SimState,
    params: ModelParams,
    monitor: BlowupMonitor | None = None,
    prev: SimState | None = None,
    dt: float | None = None,
    smallness: dict | None = None,
) -> DiagnosticsRecord:
    """Sample every tracked quantity at ``state``.

    ``prev``/``dt`` (the state one step earlier) enable the energy-balance
    residual. A ``monitor`` is advanced from its last record to this one;
    with no previous record the accumulators are left untouched.
    """
    fields = {"u": state.u, "v": state.v, "theta": state.theta}
    norms = {}
    for key, s in _ORDERS.items():
        for name, f in fields.items():
            norms[f"{key}_{name}"] = sobolev_norm(f, s)
        norms[f"{key}_triple"] = math.sqrt(sum(norms[f"{key}_{name}"] ** 2 for name in fields))

    bmo = {name: bmo_estimate(f) for name, f in fields.items()}
    mode = monitor.bmo_mode if monitor is not None else "proxy"
    pick = 0 if mode == "proxy" else 1

    extra = dict(norms)
    extra["bmo_proxy"] = tuple(bmo[n][0] for n in fields)
    extra["bmo_dyadic"] = tuple(bmo[n][1] for n in fields)
    extra["div_defect"] = state.divergence_defect()
    extra["smallness"] = smallness_functionals(state, params, **(smallness or {}))

    energy_res = 0.0
    if prev is not None and dt:
        energy_res = energy_balance_residual(prev, state, dt, params)
        extra["energy_residual_abs"] = energy_balance_residual(prev, state, dt, params, relative=False)

    rec = DiagnosticsRecord(
        time=state.time,
        l2_u=norms["l2_u"],
        l2_v=norms["l2_v"],
        l2_theta=norms["l2_theta"],
        l2_triple=norms["l2_triple"],
        hhalf_triple=norms["hhalf_triple"],
        h1_triple=norms["h1_triple"],
        h32_triple=norms["h32_triple"],
        h2_triple=norms["h2_triple"],
        lp_alpha_u=lp_norm(state.u, params.alpha + 1),
        lp_beta_v=lp_norm(state.v, params.beta + 1),
        bmo_u=bmo["u"][pick],
        bmo_v=bmo["v"][pick],
        bmo_theta=bmo["theta"][pick],
        energy_residual=energy_res,
        damping_res_u=damping_identity_residual(state.u, params.alpha, params.sigma1),
        damping_res_v=damping_identity_residual(state.v, params.beta, params.sigma2),
        extra=extra,
    )
    if monitor is not None:
        if monitor.last is not None:
            update_blowup(monitor, monitor.last, rec, rec.time - monitor.last.time, params)
        else:
            monitor.last = rec
        rec = replace(rec, pi=monitor.pi, pi_tilde=monitor.pi_tilde)
        monitor.last = rec
    return rec


@dataclass
class MonotonicityReport:
    violations_hhalf: list
    violations_h1: list
    sup_hhalf: float
    sup_h1: float
    initial_hhalf: float
    initial_h1: float
    h2_sq_integral: float

    @property
    def violations(self) -> list:
        return sorted(set(self.violations_hhalf) | set(self.violations_h1))


def trapezoid(times, values) -> float:
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.size < 2:
        return 0.0
    return float(np.sum(0.5 * np.diff(t) * (y[1:] + y[:-1])))


def monotonicity_report(series, rtol: float = 1e-8) -> MonotonicityReport:
    """Flag samples where the H^{1/2} or H^1 triple norm grew beyond ``rtol``."""
    series = list(series)
    if not series:
        raise ValueError("empty series")

    def bumps(values):
        return [i for i in range(1, len(values)) if values[i] > values[i - 1] * (1 + rtol)]

    hh = [r.hhalf_triple for r in series]
    h1 = [r.h1_triple for r in series]
    return MonotonicityReport(
        violations_hhalf=bumps(hh),
        violations_h1=bumps(h1),
        sup_hhalf=max(hh),
        sup_h1=max(h1),
        initial_hhalf=hh[0],
        initial_h1=h1[0],
        h2_sq_integral=trapezoid([r.time for r in series], [r.h2_triple**2 for r in series]),
    )
