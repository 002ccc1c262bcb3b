"""Initial data with prescribed H^{1/2} size and canned experiment protocols."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import BlowupMonitor, monotonicity_report
from .driver import run
from .model import ModelParams, SimState
from .spectral import Grid, SpectralScalarField, SpectralVectorField, forward_transform, leray_project, sobolev_norm

KINDS = ("taylor_green", "random_band", "single_mode")
FIELDS = ("u", "v", "theta")


@dataclass(frozen=True)
class InitialDataSpec:
    kind: str = "taylor_green"
    target_h_half: float | None = 1e-2
    amplitude: float = 1.0
    seed: int = 0
    band: int = 4
    slope: float = -2.0
    mode: tuple = (1, 0, 0)
    field: str = "theta"

    def validate(self) -> list:
        errors = []
        if self.kind not in KINDS:
            errors.append(f"initial.kind must be one of {', '.join(KINDS)} (got {self.kind!r})")
        if self.target_h_half is not None and not self.target_h_half >= 0:
            errors.append(f"initial.target_h_half must be >= 0 (got {self.target_h_half})")
        if self.field not in FIELDS:
            errors.append(f"initial.field must be one of {', '.join(FIELDS)} (got {self.field!r})")
        if len(self.mode) != 3:
            errors.append("initial.mode needs three integers")
        if self.band < 0:
            errors.append(f"initial.band must be >= 0 (got {self.band})")
        return errors


@dataclass(frozen=True)
class InitialData:
    spec: InitialDataSpec
    state: SimState
    h_half: float
    R: float
    scale: float


def triple_norm(state: SimState, s: float, homogeneous: bool = True) -> float:
    return math.sqrt(
        sobolev_norm(state.u, s, homogeneous) ** 2
        + sobolev_norm(state.v, s, homogeneous) ** 2
        + sobolev_norm(state.theta, s, homogeneous) ** 2
    )


def h2_size(state: SimState) -> float:
    """||u0||_{H^2} + ||v0||_{H^2} + ||theta0||_{H^2} (the bound R of the small-data result)."""
    return sum(sobolev_norm(f, 2, homogeneous=False) for f in (state.u, state.v, state.theta))


def _raw_fields(spec: InitialDataSpec, grid: Grid) -> SimState:
    x, y, z = grid.coordinates()
    c = 2 * np.pi / grid.box_length
    x, y, z = c * x, c * y, c * z
    zero = np.zeros((grid.n,) * 3)
    A = spec.amplitude
    if spec.kind == "taylor_green":
        u = np.stack([np.sin(x) * np.cos(y) * np.cos(z), -np.cos(x) * np.sin(y) * np.cos(z), zero + 0 * x])
        # not solenoidal on purpose: exercises the theta/v coupling
        v = np.stack([np.cos(x) * np.sin(y) * np.cos(z), np.sin(x) * np.cos(y) * np.cos(z), zero + 0 * x])
        th = np.sin(x) * np.sin(y) * np.sin(z)
        return SimState(
            forward_transform(A * u, grid),
            forward_transform(A * v, grid),
            forward_transform(A * th, grid),
        )
    if spec.kind == "random_band":
        from .inequalities import random_band_limited_field

        s = spec.seed
        return SimState(
            random_band_limited_field(grid, s, spec.band, spec.slope, vector=True) * A,
            random_band_limited_field(grid, s + 1, spec.band, spec.slope, vector=True, solenoidal=False) * A,
            random_band_limited_field(grid, s + 2, spec.band, spec.slope) * A,
        )
    # single_mode: A cos(k.x) in the chosen field (first component for vectors)
    k1, k2, k3 = spec.mode
    wave = A * np.cos(k1 * x + k2 * y + k3 * z)
    u, v = np.zeros((3,) + (grid.n,) * 3), np.zeros((3,) + (grid.n,) * 3)
    th = np.zeros((grid.n,) * 3)
    if spec.field == "theta":
        th = wave + 0 * th
    elif spec.field == "v":
        v[0] = wave
    else:
        u[0] = wave
    return SimState(forward_transform(u, grid), forward_transform(v, grid), forward_transform(th, grid))


def make_initial_data(spec: InitialDataSpec, grid: Grid) -> InitialData:
    """Build (u0, v0, theta0) and rescale jointly so the H^{1/2} triple norm hits the target."""
    errors = spec.validate()
    if errors:
        raise ValueError("; ".join(errors))
    raw = _raw_fields(spec, grid)
    raw = replace(raw, u=leray_project(raw.u))
    scale = 1.0
    if spec.target_h_half is not None:
        size = triple_norm(raw, 0.5)
        if spec.target_h_half == 0:
            scale = 0.0
        elif size == 0:
            raise ValueError("cannot rescale a zero field to a positive target")
        else:
            scale = spec.target_h_half / size
    state = SimState(raw.u * scale, raw.v * scale, raw.theta * scale, 0.0)
    return InitialData(spec, state, triple_norm(state, 0.5), h2_size(state), scale)


@dataclass
class ProtocolResult:
    series: list
    report: object
    pi: float
    pi_tilde: float
    pi_over_T: list
    l2_decay: float
    aborted: bool = False
    reason: str | None = None
    initial: InitialData | None = None
    final_state: SimState | None = None
    smallness: dict = field(default_factory=dict)


def run_small_data_protocol(config) -> ProtocolResult:
    """Run the configured small-data experiment and summarise monotonicity and Pi(T).

    ``config`` is a :class:`tcm.config.RunConfig`.
    """
    grid = Grid(config.grid.n, config.grid.box_length)
    init = make_initial_data(config.initial, grid)
    integ = config.integrator
    diag = config.diagnostics
    monitor = BlowupMonitor(C_pi=diag.C_pi, bmo_mode=diag.bmo_mode)
    result = run(
        init.state,
        config.model,
        integ.T,
        integ.sample_every,
        dt=integ.dt,
        adaptive=integ.adaptive,
        safety=integ.safety,
        dt_max=integ.dt_max,
        monitor=monitor,
        smallness={"C1": diag.C1, "C2": diag.C2, "eps": diag.eps},
    )
    series = result.series
    report = monotonicity_report(series) if series else None
    pi_over_T = [r.pi / r.time for r in series if r.time > 0]
    l2_decay = series[-1].l2_triple / series[0].l2_triple if series and series[0].l2_triple > 0 else 0.0
    return ProtocolResult(
        series=series,
        report=report,
        pi=monitor.pi,
        pi_tilde=monitor.pi_tilde,
        pi_over_T=pi_over_T,
        l2_decay=l2_decay,
        aborted=result.aborted,
        reason=result.reason,
        initial=init,
        final_state=result.state,
        smallness=series[0].extra["smallness"] if series else {},
    )


SWEEP_COLUMNS = (
    "c0",
    "R",
    "violations",
    "l2_ratio",
    "hhalf_ratio",
    "h1_ratio",
    "h2_ratio",
    "pi",
    "pi_tilde",
    "h2_sq_integral",
    "classification",
    "status",
)


def classify(series, violations: int, growth_factor: float, aborted: bool) -> str:
    if aborted or not series:
        return "inconclusive"
    first, last = series[0], series[-1]
    decayed = last.l2_triple < first.l2_triple or (first.l2_triple == 0 and last.l2_triple == 0)
    if decayed and violations == 0:
        return "decay"
    if first.h2_triple > 0 and last.h2_triple >= growth_factor * first.h2_triple:
        return "growth"
    return "inconclusive"


def _ratio(a: float, b: float) -> float:
    return a / b if b > 0 else 0.0


def _sweep_row(args) -> dict:
    config, c0 = args
    cfg = replace(config, initial=replace(config.initial, target_h_half=c0))
    res = run_small_data_protocol(cfg)
    series = res.series
    n_viol = len(res.report.violations) if res.report else 0
    first, last = series[0], series[-1]
    return {
        "c0": c0,
        "R": res.initial.R,
        "violations": n_viol,
        "l2_ratio": _ratio(last.l2_triple, first.l2_triple),
        "hhalf_ratio": _ratio(last.hhalf_triple, first.hhalf_triple),
        "h1_ratio": _ratio(last.h1_triple, first.h1_triple),
        "h2_ratio": _ratio(last.h2_triple, first.h2_triple),
        "pi": res.pi,
        "pi_tilde": res.pi_tilde,
        "h2_sq_integral": res.report.h2_sq_integral if res.report else 0.0,
        "classification": classify(series, n_viol, config.diagnostics.growth_factor, res.aborted),
        "status": "aborted: " + res.reason if res.aborted else "ok",
    }


@dataclass
class SweepResult:
    rows: list

    def by_c0(self) -> dict:
        return {row["c0"]: row for row in self.rows}


def worker_count(requested: int | None = None) -> int:
    env = os.environ.get("TCM_THREADS")
    if env:
        return max(1, int(env))
    return max(1, requested or 1)


def amplitude_sweep(config, c0_grid, workers: int | None = None) -> SweepResult:
    """One protocol run per amplitude (shared seed); rows come back in grid order."""
    c0_grid = [float(c) for c in c0_grid]
    if any(c < 0 for c in c0_grid):
        raise ValueError("amplitudes must be non-negative")
    jobs = [(config, c) for c in c0_grid]
    n = worker_count(workers)
    if n == 1 or len(jobs) == 1:
        rows = [_sweep_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    return SweepResult(rows)
