"""Time loop with diagnostic sampling."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .diagnostics import BlowupMonitor, DiagnosticsRecord, record
from .model import ModelParams, NonFiniteError, SimState, cfl_dt, step

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    state: SimState
    series: list = field(default_factory=list)
    monitor: BlowupMonitor | None = None
    aborted: bool = False
    reason: str | None = None
    steps: int = 0


def run(
    initial: SimState,
    params: ModelParams,
    T: float,
    sample_every: float,
    dt: float = 1e-3,
    adaptive: bool = False,
    safety: float = 0.5,
    dt_max: float = 1e-2,
    callbacks=(),
    monitor: BlowupMonitor | None = None,
    smallness: dict | None = None,
) -> RunResult:
    """Advance ``initial`` over ``[t0, t0 + T]`` sampling diagnostics.

    Samples are taken at ``t0`` and every ``sample_every`` afterwards (plus
    the end time). With a fixed ``dt`` steps are shrunk uniformly inside a
    sampling interval so that sample times are hit exactly. A non-finite
    state ends the run early; the partial series is returned with
    ``aborted`` set.
    """
    if T < 0:
        raise ValueError("horizon T must be non-negative")
    if not sample_every > 0:
        raise ValueError("sample_every must be positive")
    if monitor is None:
        monitor = BlowupMonitor()
    result = RunResult(initial, monitor=monitor)
    if T == 0:
        return result

    t0 = initial.time
    n_samples = int(math.floor(T / sample_every + 1e-9))
    targets = [t0 + k * sample_every for k in range(1, n_samples + 1)]
    if not targets or targets[-1] < t0 + T - 1e-12 * max(1.0, T):
        targets.append(t0 + T)

    def emit(state, prev=None, h=None):
        rec = record(state, params, monitor, prev=prev, dt=h, smallness=smallness)
        result.series.append(rec)
        for cb in callbacks:
            cb(state, rec)
        return rec

    state = initial
    emit(state)
    try:
        for target in targets:
            prev, h = state, None
            if adaptive:
                while state.time < target - 1e-14 * max(1.0, abs(target)):
                    h = min(cfl_dt(state, safety, dt_max), target - state.time)
                    prev, state = state, step(state, h, params)
                    result.steps += 1
            else:
                nsub = max(1, math.ceil((target - state.time) / dt - 1e-9))
                h = (target - state.time) / nsub
                for _ in range(nsub):
                    prev, state = state, step(state, h, params)
                    result.steps += 1
            state = SimState(state.u, state.v, state.theta, target)
            emit(state, prev, h)
    except NonFiniteError as exc:
        log.warning("run aborted at t=%g: %s", state.time, exc)
        result.aborted = True
        result.reason = str(exc)
    result.state = state
    return result


__all__ = ["RunResult", "run", "DiagnosticsRecord"]
