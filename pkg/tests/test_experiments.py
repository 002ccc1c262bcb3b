import math
from dataclasses import replace

import pytest

from tcm.config import GridConfig, IntegratorConfig, RunConfig
from tcm.experiments import (
    InitialDataSpec,
    amplitude_sweep,
    classify,
    make_initial_data,
    run_small_data_protocol,
    triple_norm,
    worker_count,
)
from tcm.spectral import Grid, divergence, sobolev_norm

VOL_HALF = math.sqrt((2 * math.pi) ** 3 / 2)


def small_config(**integ):
    base = dict(T=0.02, sample_every=0.01, dt=2e-3)
    base.update(integ)
    return RunConfig(grid=GridConfig(n=16), integrator=IntegratorConfig(**base))


def test_taylor_green_is_solenoidal(g16):
    init = make_initial_data(InitialDataSpec(target_h_half=None), g16)
    assert sobolev_norm(divergence(init.state.u), 0) <= 1e-12
    assert init.scale == 1.0


@pytest.mark.parametrize("kind", ["taylor_green", "random_band", "single_mode"])
def test_rescale_hits_target(g16, kind):
    init = make_initial_data(InitialDataSpec(kind=kind, target_h_half=1e-2, band=4), g16)
    assert abs(init.h_half - 1e-2) <= 1e-14
    assert abs(triple_norm(init.state, 0.5) - 1e-2) <= 1e-12 * 1e-2
    assert init.R > 0
    assert sobolev_norm(divergence(init.state.u), 0) <= 1e-12


def test_single_mode_norm(g16):
    spec = InitialDataSpec(kind="single_mode", target_h_half=None, amplitude=0.4, field="theta")
    init = make_initial_data(spec, g16)
    assert init.h_half == pytest.approx(0.4 * VOL_HALF, rel=1e-13)
    assert sobolev_norm(init.state.u, 0) == 0 and sobolev_norm(init.state.v, 0) == 0


def test_zero_field_cannot_be_rescaled(g16):
    spec = InitialDataSpec(kind="single_mode", amplitude=0.0, target_h_half=1.0)
    with pytest.raises(ValueError, match="zero field"):
        make_initial_data(spec, g16)


def test_invalid_spec(g16):
    with pytest.raises(ValueError):
        make_initial_data(InitialDataSpec(kind="vortex"), g16)


def test_random_band_is_seeded(g16):
    a = make_initial_data(InitialDataSpec(kind="random_band", seed=3), g16).state
    b = make_initial_data(InitialDataSpec(kind="random_band", seed=3), g16).state
    assert (a.packed() == b.packed()).all()


def test_zero_data_protocol():
    cfg = small_config(T=0.1, sample_every=0.025)
    cfg = replace(cfg, initial=replace(cfg.initial, target_h_half=0.0))
    res = run_small_data_protocol(cfg)
    assert res.report.violations == []
    assert res.pi == pytest.approx(0.1, abs=1e-15)
    assert all(r.l2_triple == 0 for r in res.series)


def test_small_protocol_decays():
    res = run_small_data_protocol(small_config())
    assert not res.aborted
    assert res.report.violations == []
    assert res.series[-1].l2_triple < res.series[0].l2_triple
    assert res.l2_decay < 1
    assert len(res.pi_over_T) == 2


def test_classify_rules():
    class R:
        def __init__(self, l2, h2):
            self.l2_triple, self.h2_triple = l2, h2

    assert classify([R(1, 1), R(0.5, 0.5)], 0, 10, False) == "decay"
    assert classify([R(1, 1), R(0.5, 0.5)], 1, 10, False) == "inconclusive"
    assert classify([R(1, 1), R(2, 20)], 0, 10, False) == "growth"
    assert classify([R(0, 0), R(0, 0)], 0, 10, False) == "decay"
    assert classify([R(1, 1), R(0.5, 0.5)], 0, 10, True) == "inconclusive"
    assert classify([], 0, 10, False) == "inconclusive"


def test_sweep_zero_row():
    res = amplitude_sweep(small_config(), [0.0])
    assert len(res.rows) == 1
    assert res.rows[0]["classification"] == "decay"
    assert res.rows[0]["status"] == "ok"


def test_sweep_two_small_amplitudes_and_order_independence():
    cfg = small_config()
    fwd = amplitude_sweep(cfg, [1e-3, 1e-2])
    assert [r["classification"] for r in fwd.rows] == ["decay", "decay"]
    for r in fwd.rows:
        assert math.isfinite(r["h2_sq_integral"])
    rev = amplitude_sweep(cfg, [1e-2, 1e-3], workers=2)
    assert rev.by_c0() == fwd.by_c0()


def test_sweep_rejects_negative():
    with pytest.raises(ValueError):
        amplitude_sweep(small_config(), [-1.0])


def test_worker_count_env(monkeypatch):
    monkeypatch.delenv("TCM_THREADS", raising=False)
    assert worker_count(None) == 1
    assert worker_count(4) == 4
    monkeypatch.setenv("TCM_THREADS", "3")
    assert worker_count(8) == 3
