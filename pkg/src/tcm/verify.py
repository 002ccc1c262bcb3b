"""Identity and oracle checks for the solver and its diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .diagnostics import (
    coupling_cancellation_residual,
    coupling_pairings,
    damping_identity_residual,
    energy_balance_residual,
)
from .inequalities import random_band_limited_field
from .model import ModelParams, SimState, step
from .spectral import Grid, SpectralScalarField, SpectralVectorField

ORACLE_MODES = ((1, 0, 1), (1, 2, 1), (2, -1, 3), (0, 3, 1))


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, value: float, tolerance: float, passed: bool | None = None, detail: str = ""):
        if passed is None:
            passed = bool(math.isfinite(value) and value <= tolerance)
        self.checks.append(Check(name, value, tolerance, passed, detail))

    def table(self) -> str:
        width = max([len(c.name) for c in self.checks] + [5])
        lines = [f"{'check':<{width}}  {'value':>12}  {'tolerance':>10}  result"]
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            line = f"{c.name:<{width}}  {c.value:>12.4e}  {c.tolerance:>10.1e}  {tag}"
            lines.append(line + (f"  ({c.detail})" if c.detail else ""))
        return "\n".join(lines)


def _mode_index(grid: Grid, mode) -> tuple:
    """Storage index of integer wavevector ``mode`` (third component must be >= 0)."""
    k1, k2, k3 = mode
    if k3 < 0:
        raise ValueError("third component must be non-negative in half storage")
    return (k1 % grid.n, k2 % grid.n, k3)


def _wavevector(grid: Grid, ix) -> np.ndarray:
    return np.array([np.broadcast_to(grid.k[i], grid.spectral_shape)[ix] for i in range(3)])


def coupled_mode_matrix(kvec, eta: float, mu: float) -> np.ndarray:
    """Generator of the linear (v_hat, theta_hat) dynamics at one wavevector.

    dv/dt = -eta|k|^2 v - i k theta and dtheta/dt = -mu|k|^2 theta - i k.v
    """
    k = np.asarray(kvec, dtype=float)
    k2 = float(k @ k)
    M = np.zeros((4, 4), dtype=complex)
    M[:3, :3] = -eta * k2 * np.eye(3)
    M[:3, 3] = -1j * k
    M[3, :3] = -1j * k
    M[3, 3] = -mu * k2
    return M


def linear_oracle_errors(
    grid: Grid,
    params: ModelParams,
    T: float = 0.5,
    dt: float = 1e-3,
    modes=ORACLE_MODES,
    seed: int = 0,
) -> dict:
    """Relative per-mode error of the solver against exact linear evolution.

    Advection and damping are switched off; u decays like exp(-nu|k|^2 t) and
    (v, theta) follow the 4x4 matrix exponential of :func:`coupled_mode_matrix`.
    """
    lin = ModelParams(
        nu=params.nu, eta=params.eta, mu=params.mu, sigma1=0.0, sigma2=0.0,
        alpha=params.alpha, beta=params.beta, advection=False, coupling=True,
    )
    rng = np.random.default_rng(seed)
    shape = grid.spectral_shape
    cu = np.zeros((3,) + shape, complex)
    cv = np.zeros((3,) + shape, complex)
    ct = np.zeros(shape, complex)
    idx = [_mode_index(grid, m) for m in modes]
    for m, ix in zip(modes, idx):
        if m[2] == 0:
            raise ValueError("oracle modes need a positive third component or come in conjugate pairs")
        k = _wavevector(grid, ix)
        a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        a -= k * (k @ a) / (k @ k)
        cu[(slice(None),) + ix] = a
        cv[(slice(None),) + ix] = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        ct[ix] = rng.standard_normal() + 1j * rng.standard_normal()
    state = SimState(SpectralVectorField(grid, cu), SpectralVectorField(grid, cv), SpectralScalarField(grid, ct))
    y0 = state.packed()
    nsteps = int(round(T / dt))
    h = T / nsteps
    for _ in range(nsteps):
        state = step(state, h, lin)
    y = state.packed()

    errors = {}
    for m, ix in zip(modes, idx):
        k = _wavevector(grid, ix)
        k2 = float(k @ k)
        u_exact = np.exp(-lin.nu * k2 * T) * y0[(slice(0, 3),) + ix]
        w0 = y0[(slice(3, 7),) + ix]
        w_exact = expm(coupled_mode_matrix(k, lin.eta, lin.mu) * T) @ w0
        got_u = y[(slice(0, 3),) + ix]
        got_w = y[(slice(3, 7),) + ix]
        errors[m] = (
            float(np.linalg.norm(got_u - u_exact) / np.linalg.norm(u_exact)),
            float(np.linalg.norm(got_w - w_exact) / np.linalg.norm(w_exact)),
        )
    return errors


def energy_convergence(state: SimState, params: ModelParams, dt: float = 1e-3, window: float = 4e-3) -> dict:
    """Largest one-step energy-balance residual over ``window`` at dt and dt/2."""
    out = {}
    for h in (dt, dt / 2):
        s = state
        rel, ab = [], []
        for _ in range(int(round(window / h))):
            s1 = step(s, h, params)
            rel.append(abs(energy_balance_residual(s, s1, h, params)))
            ab.append(abs(energy_balance_residual(s, s1, h, params, relative=False)))
            s = s1
        out[h] = (max(rel), max(ab))
    coarse, fine = out[dt], out[dt / 2]
    ratio = coarse[0] / fine[0] if fine[0] > 0 else math.inf
    return {"relative": coarse[0], "relative_half": fine[0], "absolute": coarse[1], "ratio": ratio}


def damping_identity_sweep(n: int = 64, band: int = 3, seeds=range(3), alphas=(2.5, 3.0, 3.5), sigmas=(0.5, 1.0)) -> float:
    """Worst relative residual of the damping identity over random solenoidal fields."""
    grid = Grid(n)
    worst = 0.0
    for seed in seeds:
        u = random_band_limited_field(grid, seed, band, vector=True)
        for a in alphas:
            for s in sigmas:
                worst = max(worst, damping_identity_residual(u, a, s))
    return worst


def cancellation_sweep(grid: Grid, pairs: int = 50, orders=(0.5, 1.5), seed: int = 0, band: int | None = None) -> float:
    """Worst |<L^s div v, L^s th> + <L^s grad th, L^s v>| / (|first| + |second|)."""
    band = grid.n // 3 if band is None else band
    worst = 0.0
    for i in range(pairs):
        v = random_band_limited_field(grid, seed + 2 * i, band, -1.0, vector=True, solenoidal=False)
        th = random_band_limited_field(grid, seed + 2 * i + 1, band, -1.0)
        for s in orders:
            a, b = coupling_pairings(v, th, s)
            scale = abs(a) + abs(b)
            res = abs(coupling_cancellation_residual(v, th, s))
            worst = max(worst, res / scale if scale > 0 else res)
    return worst


def run_verification(config, quick: bool = False) -> VerifyReport:
    """Run every check on the grid and parameters of ``config``."""
    from .experiments import make_initial_data

    grid = Grid(config.grid.n, config.grid.box_length)
    params = config.model
    report = VerifyReport()

    errs = linear_oracle_errors(grid, params)
    worst = max(max(e) for e in errs.values())
    report.add("linear oracle (4 modes, T=0.5)", worst, 1e-8)

    init = make_initial_data(config.initial, grid)
    state = init.state
    if init.h_half == 0:
        # the identity is vacuous for zero data; probe it at the default size
        from dataclasses import replace

        state = make_initial_data(replace(config.initial, target_h_half=1e-2), grid).state
    conv = energy_convergence(state, params, window=2e-3 if quick else 4e-3)
    report.add("energy balance |residual| at dt=1e-3", conv["absolute"], 1e-4)
    report.add(
        "energy balance dt-halving ratio",
        conv["ratio"],
        8.0,
        passed=conv["ratio"] >= 8.0,
        detail=f"relative {conv['relative']:.2e} -> {conv['relative_half']:.2e}",
    )

    damp = damping_identity_sweep(32 if quick else 64, seeds=range(1 if quick else 3))
    report.add("damping identity (alpha 2.5/3/3.5)", damp, 1e-6)

    canc = cancellation_sweep(grid, pairs=10 if quick else 50)
    report.add("coupling cancellation (s=1/2, 3/2)", canc, 1e-12)
    return report
