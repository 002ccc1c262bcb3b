"""Tropical climate model with damping: right-hand side and IF-RK4 stepping.

    u_t + (u.grad)u - nu Lap u + sigma1 |u|^(alpha-1) u + grad pi + div(v (x) v) = 0
    v_t + (u.grad)v - eta Lap v + sigma2 |v|^(beta-1) v + (v.grad)u + grad theta = 0
    theta_t + (u.grad)theta - mu Lap theta + div v = 0,      div u = 0

The pressure is removed by Leray projection. Diffusion is integrated exactly
through an integrating factor, everything else is explicit.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .spectral import (
    Grid,
    SpectralScalarField,
    SpectralVectorField,
    _fwd,
    _inv,
    _leray,
    sobolev_norm,
    divergence,
)

__all__ = [
    "ModelParams",
    "SimState",
    "Tendency",
    "NonFiniteError",
    "CFLWarning",
    "damping_term",
    "nonlinear_rhs",
    "step",
    "cfl_dt",
]


class NonFiniteError(FloatingPointError):
    """Raised when a tendency or state picks up NaN/Inf (usually under-resolution)."""


class CFLWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ModelParams:
    nu: float = 1.0
    eta: float = 1.0
    mu: float = 1.0
    sigma1: float = 1.0
    sigma2: float = 1.0
    alpha: float = 3.0
    beta: float = 3.0
    # switches for oracle runs; the physical model has both on
    advection: bool = True
    coupling: bool = True

    def __post_init__(self):
        errors = self.validate()
        if errors:
            raise ValueError("; ".join(errors))

    def validate(self) -> list:
        errors = []
        for name in ("nu", "eta", "mu"):
            if not getattr(self, name) > 0:
                errors.append(f"{name} must be > 0 (got {getattr(self, name)})")
        for name in ("sigma1", "sigma2"):
            if not getattr(self, name) >= 0:
                errors.append(f"{name} must be >= 0 (got {getattr(self, name)})")
        for name in ("alpha", "beta"):
            if not getattr(self, name) >= 1:
                errors.append(f"{name} must be >= 1 (got {getattr(self, name)})")
        return errors

    @property
    def ell(self) -> float:
        return min(self.nu, self.eta, self.mu)

    @property
    def theory_regime(self) -> bool:
        return 2.5 <= self.alpha < 4 and 2.5 <= self.beta < 4


@dataclass(frozen=True)
class SimState:
    u: SpectralVectorField
    v: SpectralVectorField
    theta: SpectralScalarField
    time: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @classmethod
    def zeros(cls, grid: Grid, time: float = 0.0) -> "SimState":
        return cls(grid.zeros(True), grid.zeros(True), grid.zeros(), time)

    def packed(self) -> np.ndarray:
        """All seven coefficient arrays stacked as (u1, u2, u3, v1, v2, v3, theta)."""
        return np.concatenate([self.u.coeffs, self.v.coeffs, self.theta.coeffs[None]])

    @classmethod
    def unpack(cls, grid: Grid, a: np.ndarray, time: float) -> "SimState":
        return cls(
            SpectralVectorField(grid, a[0:3]),
            SpectralVectorField(grid, a[3:6]),
            SpectralScalarField(grid, a[6]),
            time,
        )

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.packed())))

    def divergence_defect(self) -> float:
        """Relative incompressibility defect ``||div u|| / max(1, ||u||)``."""
        return sobolev_norm(divergence(self.u), 0) / max(1.0, sobolev_norm(self.u, 0))


@dataclass(frozen=True)
class Tendency:
    """Explicit part of the time derivative; diffusion lives in :meth:`total`."""

    du: SpectralVectorField
    dv: SpectralVectorField
    dtheta: SpectralScalarField

    def packed(self) -> np.ndarray:
        return np.concatenate([self.du.coeffs, self.dv.coeffs, self.dtheta.coeffs[None]])

    def total(self, state: SimState, params: ModelParams) -> "Tendency":
        k2 = state.grid.k2
        return Tendency(
            SpectralVectorField(state.grid, self.du.coeffs - params.nu * k2 * state.u.coeffs),
            SpectralVectorField(state.grid, self.dv.coeffs - params.eta * k2 * state.v.coeffs),
            SpectralScalarField(state.grid, self.dtheta.coeffs - params.mu * k2 * state.theta.coeffs),
        )


def _damping_physical(w: np.ndarray, gamma: float, sigma: float) -> np.ndarray:
    if gamma == 1:
        return sigma * w
    mag = np.sqrt(np.sum(w**2, axis=0))
    # |w|^(gamma-1) -> 0 where w = 0 for gamma > 1
    return sigma * mag ** (gamma - 1) * w


def damping_term(w: SpectralVectorField, gamma: float, sigma: float) -> SpectralVectorField:
    """``sigma |w|^(gamma-1) w`` evaluated pointwise and truncated to the dealiased band."""
    if gamma < 1:
        raise ValueError(f"damping exponent must be >= 1, got {gamma}")
    grid = w.grid
    if sigma == 0:
        return grid.zeros(True)
    out = _fwd(_damping_physical(w.physical(), gamma, sigma)) * grid.dealias_mask
    return SpectralVectorField(grid, out)


_SYM = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
_SIDX = {}
for _m, (_i, _j) in enumerate(_SYM):
    _SIDX[_i, _j] = _SIDX[_j, _i] = _m


def _explicit(grid: Grid, y: np.ndarray, params: ModelParams) -> np.ndarray:
    """Explicit tendency for packed coefficients ``y`` (7 x spectral shape).

    Physical products are grouped before the forward transform:
    rows 0-5 hold u_i u_j + v_i v_j, rows 6-11 hold u_i v_j + u_j v_i (both
    symmetric in i, j), rows 12-14 hold u_i theta and the last three hold
    the undifferentiated terms of each momentum equation.
    """
    ik = grid.ik
    n = grid.n
    out = np.zeros_like(y)
    tc, vc = y[6], y[3:6]

    damp_u = params.sigma1 > 0
    damp_v = params.sigma2 > 0
    if params.advection or damp_u or damp_v:
        phys = _inv(y, n)
        U, V, T = phys[0:3], phys[3:6], phys[6]
        rows = (15 if params.advection else 0) + (3 if damp_u else 0) + (3 if damp_v or params.advection else 0)
        buf = np.empty((rows,) + phys.shape[1:])
        pos = 0
        if params.advection:
            for m, (i, j) in enumerate(_SYM):
                np.multiply(U[i], U[j], out=buf[m])
                buf[m] += V[i] * V[j]
                np.multiply(U[i], V[j], out=buf[6 + m])
                buf[6 + m] += U[j] * V[i]
            np.multiply(U, T, out=buf[12:15])
            pos = 15
        if damp_u:
            buf[pos : pos + 3] = _damping_physical(U, params.alpha, params.sigma1)
            pos += 3
        if params.advection or damp_v:
            # v-equation terms without a derivative: u div v - damping
            rest = buf[pos : pos + 3]
            rest[:] = 0.0
            if params.advection:
                rest += U * _inv(ik[0] * vc[0] + ik[1] * vc[1] + ik[2] * vc[2], n)
            if damp_v:
                rest -= _damping_physical(V, params.beta, params.sigma2)
        P = _fwd(buf) * grid.dealias_mask

        pos = 0
        if params.advection:
            for i in range(3):
                a, b, c = (_SIDX[i, j] for j in range(3))
                # (u.grad)u_i + div(v(x)v)_i = d_j(u_i u_j + v_i v_j)
                out[i] -= ik[0] * P[a] + ik[1] * P[b] + ik[2] * P[c]
                # (u.grad)v_i + (v.grad)u_i = d_j(u_j v_i + u_i v_j) - u_i div v
                out[3 + i] -= ik[0] * P[6 + a] + ik[1] * P[6 + b] + ik[2] * P[6 + c]
            out[6] -= ik[0] * P[12] + ik[1] * P[13] + ik[2] * P[14]
            pos = 15
        if damp_u:
            out[0:3] -= P[pos : pos + 3]
            pos += 3
        if params.advection or damp_v:
            out[3:6] += P[pos : pos + 3]

    if params.coupling:
        for i in range(3):
            out[3 + i] -= ik[i] * tc
        out[6] -= ik[0] * vc[0] + ik[1] * vc[1] + ik[2] * vc[2]

    out[0:3] = _leray(grid, out[0:3])
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("non-finite tendency: the state is under-resolved or has blown up")
    return out


def nonlinear_rhs(state: SimState, params: ModelParams) -> Tendency:
    """Explicit tendency (advection, damping, coupling), u-part Leray projected."""
    grid = state.grid
    out = _explicit(grid, state.packed(), params)
    return Tendency(
        SpectralVectorField(grid, out[0:3]),
        SpectralVectorField(grid, out[3:6]),
        SpectralScalarField(grid, out[6]),
    )


def _diffusivities(params: ModelParams) -> np.ndarray:
    return np.array([params.nu] * 3 + [params.eta] * 3 + [params.mu])[:, None, None, None]


def max_velocity(state: SimState) -> float:
    a = _inv(np.concatenate([state.u.coeffs, state.v.coeffs]), state.grid.n)
    return float(np.max(np.abs(a))) if a.size else 0.0


def cfl_dt(
    state: SimState,
    safety: float = 0.5,
    dt_max: float = 1e-2,
    params: ModelParams | None = None,
    integrating_factor: bool = True,
) -> float:
    """Advective time-step limit ``safety * dx / max|w_i|`` over u and v components.

    Returns ``dt_max`` for a motionless state. The diffusive limit is only
    applied when the integrating factor is switched off.
    """
    if not 0 < safety <= 1:
        raise ValueError("safety must lie in (0, 1]")
    wmax = max_velocity(state)
    if wmax == 0:
        dt = dt_max
    else:
        dt = safety * state.grid.spacing / wmax
    if not integrating_factor and params is not None:
        dt = min(dt, safety / (params.ell * state.grid.kmax**2))
    return float(dt)


def step(
    state: SimState,
    dt: float,
    params: ModelParams,
    check_cfl: bool = False,
    safety: float = 1.0,
) -> SimState:
    """One integrating-factor RK4 step of length ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    grid = state.grid
    if check_cfl:
        limit = cfl_dt(state, safety, dt_max=math.inf)
        if dt > limit:
            warnings.warn(f"dt={dt:g} exceeds CFL limit {limit:g}", CFLWarning, stacklevel=2)

    y = state.packed()
    e_half = np.exp(-_diffusivities(params) * grid.k2 * (dt / 2))
    e_full = e_half * e_half

    k1 = _explicit(grid, y, params)
    k2 = _explicit(grid, e_half * (y + 0.5 * dt * k1), params)
    k3 = _explicit(grid, e_half * y + 0.5 * dt * k2, params)
    k4 = _explicit(grid, e_full * y + dt * e_half * k3, params)
    y_new = e_full * y + (dt / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)
    y_new[0:3] = _leray(grid, y_new[0:3])
    if not np.all(np.isfinite(y_new)):
        raise NonFiniteError(f"non-finite state after step at t={state.time + dt:g}")
    return SimState.unpack(grid, y_new, state.time + dt)
