import math
from fractions import Fraction

import numpy as np
import pytest

from tcm.inequalities import (
    ESTIMATE_INSTANCES,
    GNInstance,
    commutator,
    commutator_ratio,
    gn_ratio,
    gn_scaling_defect,
    gn_solve_kappa,
    kato_ponce_ratio,
    kozono_bmo_ratio,
    h1_interpolation_check,
    linfty_log_ratio,
    random_band_limited_field,
    refine,
    shell_spectrum,
    standard_battery,
    theory_exponents,
)
from tcm.diagnostics import bmo_estimate
from tcm.spectral import Grid, forward_transform, lambda_pow, lp_norm, sobolev_norm


def scal(grid, a):
    return forward_transform(a * np.ones((grid.n,) * 3), grid)


def test_gn_kappa_exact():
    assert gn_solve_kappa(0, Fraction(9, 2), Fraction(1, 2), 2, 1, 2) == Fraction(2, 3)
    assert gn_solve_kappa(0, math.inf, 1, 2, Fraction(5, 2), 2) == Fraction(1, 3)
    assert gn_solve_kappa(1, 2, 1, 2, 3, 2) == 0
    assert gn_solve_kappa(1, 2, 0, 2, 2, 2) == Fraction(1, 2)
    assert isinstance(gn_solve_kappa(0, 3, Fraction(1, 2), 2, 1, 2), Fraction)


@pytest.mark.parametrize("alpha", [Fraction(5, 2), 3, Fraction(7, 2)])
def test_gn_kappa_alpha_family(alpha):
    k = gn_solve_kappa(0, Fraction(3, 2) * alpha, Fraction(1, 2), 2, 1, 2)
    assert k == 2 * (Fraction(alpha) - 2) / alpha
    assert gn_scaling_defect(0, Fraction(3, 2) * alpha, Fraction(1, 2), 2, 1, 2, k) == 0


def test_gn_kappa_float_inputs():
    assert gn_solve_kappa(0, 4.5, 0.5, 2, 1, 2) == pytest.approx(2 / 3)


def test_gn_kappa_errors():
    with pytest.raises(ValueError):
        gn_solve_kappa(3, 2, 0, 2, 1, 2)  # s > l
    with pytest.raises(ValueError):
        gn_solve_kappa(0, 0.5, 0, 2, 1, 2)
    with pytest.raises(ValueError):
        gn_solve_kappa(0, 2, 1, 2, 2, 2)  # kappa = -1


def test_theory_exponents():
    e = theory_exponents(3)
    assert e["kappa"] == Fraction(1, 2)
    assert e["delta"] == Fraction(7, 8)
    assert theory_exponents(Fraction(5, 2))["kappa"] == Fraction(5, 12)
    with pytest.raises(ValueError):
        theory_exponents(Fraction(5, 3))
    with pytest.raises(ValueError):
        theory_exponents(4)


def test_h1_interpolation_flag():
    out = h1_interpolation_check()
    assert out["consistent_kappa"] == Fraction(1, 2)
    assert out["consistent_defect"] == 0
    assert out["three_quarter_defect"] != 0


def test_gn_ratio_single_mode_is_one(g16):
    x, _, _ = g16.coordinates()
    f = scal(g16, np.cos(x))
    inst = GNInstance.solve(1, 2, 0, 2, 2, 2)
    assert gn_ratio(f, inst) == pytest.approx(1.0, abs=1e-12)


def test_refine_preserves_field(g16, rng):
    f = random_band_limited_field(g16, 3, 5)
    F = refine(f)
    assert F.grid.n == 32
    assert sobolev_norm(F, 1) == pytest.approx(sobolev_norm(f, 1), rel=1e-13)
    assert np.allclose(F.physical()[::2, ::2, ::2], f.physical(), atol=1e-14)


def test_kato_ponce_cosine_closed_form(g16):
    x, _, _ = g16.coordinates()
    f = scal(g16, np.cos(x))
    r = kato_ponce_ratio(f, f, 1.0, 2, math.inf, 2, math.inf, 2)
    # L^1(cos^2) = cos(2x): norm sqrt(vol/2); denominator 2 * 1 * sqrt(vol/2)
    assert r == pytest.approx(0.5, rel=1e-12)


def test_commutator_special_cases(g16):
    f = random_band_limited_field(g16, 1, 4)
    const = scal(g16, 2.0)
    # [L^s, f] c = c L^s f
    assert np.allclose(commutator(f, const, 1.0).coeffs, (lambda_pow(f, 1.0) * 2.0).coeffs, atol=1e-13)
    assert commutator_ratio(const, f, 1.0, 2, math.inf, 2, math.inf, 2) == 0.0
    assert math.isfinite(commutator_ratio(f, const, 1.0, 2, math.inf, 2, math.inf, 2))


def test_holder_mismatch(g16):
    f = random_band_limited_field(g16, 1, 4)
    with pytest.raises(ValueError):
        kato_ponce_ratio(f, f, 1.0, 2, 3, 2, math.inf, 2)


def test_kozono_and_log_ratio(g16):
    z = g16.zeros()
    assert kozono_bmo_ratio(z, z, (1, 0, 0), (0, 1, 0), 2) == 0.0
    x, _, _ = g16.coordinates()
    f = scal(g16, np.cos(x))
    fine = refine(f)
    expected = 1.0 / (1.0 + bmo_estimate(fine)[1] * math.log(math.e + sobolev_norm(fine, 2, homogeneous=False)))
    assert linfty_log_ratio(f, 2) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        linfty_log_ratio(f, 1.0)
    g = random_band_limited_field(g16, 2, 4)
    assert math.isfinite(kozono_bmo_ratio(f, g, (1, 0, 0), (0, 0, 1), 2))


def test_random_field_properties(g16):
    a = random_band_limited_field(g16, 7, 4)
    b = random_band_limited_field(g16, 7, 4)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert sobolev_norm(a, 0) == pytest.approx(1.0)
    assert np.abs(random_band_limited_field(g16, 7, 0).coeffs).max() == 0
    with pytest.raises(ValueError):
        random_band_limited_field(g16, 7, 6)
    from tcm.spectral import divergence

    w = random_band_limited_field(g16, 1, 4, vector=True)
    assert sobolev_norm(divergence(w), 0) < 1e-13


def test_random_field_slope():
    f = random_band_limited_field(Grid(32), 0, 8, spectrum_slope=-2)
    radii, means = shell_spectrum(f)
    slope = np.polyfit(np.log(radii), np.log(means), 1)[0]
    assert slope == pytest.approx(-2, rel=0.1)


def test_battery_small(g16):
    reports = standard_battery(g16, 5, 0)
    assert len(reports) == 5
    for r in reports:
        assert r.nonfinite == 0 and math.isfinite(r.max_ratio)
        assert r.max_scale_defect < 1e-10
        assert len(r.row()) == len(r.CSV_HEADER)


def test_estimate_instances():
    assert ESTIMATE_INSTANCES["l3a2_alpha3"].kappa == Fraction(2, 3)
    assert ESTIMATE_INSTANCES["linf_h1_h52"].kappa == Fraction(1, 3)
    assert "L^" in ESTIMATE_INSTANCES["h1_l2_h2"].describe()
