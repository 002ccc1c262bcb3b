import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcm.spectral import (
    Grid,
    SpectralScalarField,
    SpectralVectorField,
    dealias,
    divergence,
    forward_transform,
    gradient,
    inner,
    inverse_transform,
    lambda_pow,
    laplacian,
    leray_project,
    lp_norm,
    multiply,
    sobolev_norm,
)

VOL_HALF = math.sqrt((2 * math.pi) ** 3 / 2)


def coeff(f, k1, k2, k3):
    n = f.grid.n
    return f.coeffs[..., k1 % n, k2 % n, k3]


@pytest.mark.parametrize("n", [4, 12, 7, 0])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        Grid(n)


def test_grid_basic(g16):
    assert g16.spectral_shape == (16, 16, 9)
    assert g16.spacing == pytest.approx(2 * math.pi / 16)
    assert g16.volume == pytest.approx((2 * math.pi) ** 3)


def test_constant_field_is_dc(g16):
    f = forward_transform(np.full((16,) * 3, 2.5), g16)
    assert coeff(f, 0, 0, 0) == pytest.approx(2.5)
    rest = f.coeffs.copy()
    rest[0, 0, 0] = 0
    assert np.abs(rest).max() < 1e-15


def test_cosine_single_mode(g16):
    x, _, _ = g16.coordinates()
    f = forward_transform(np.cos(x) + 0 * g16.zeros().physical(), g16)
    full = f.full_coeffs()
    assert full[1, 0, 0] == pytest.approx(0.5)
    assert full[-1, 0, 0] == pytest.approx(0.5)
    full[1, 0, 0] = full[-1, 0, 0] = 0
    assert np.abs(full).max() < 1e-15


def test_round_trip(g16, rng):
    a = rng.standard_normal((16,) * 3)
    back = inverse_transform(forward_transform(a, g16))
    assert np.linalg.norm(back - a) <= 1e-13 * np.linalg.norm(a)
    v = rng.standard_normal((3,) + (16,) * 3)
    assert np.allclose(inverse_transform(forward_transform(v, g16)), v, atol=1e-13)


def test_shape_mismatch(g16):
    with pytest.raises(ValueError):
        forward_transform(np.zeros((8, 8, 8)), g16)


def test_fields_are_read_only(g16):
    f = g16.zeros()
    with pytest.raises(ValueError):
        f.coeffs[0, 0, 0] = 1


def test_lambda_pow_examples(g16, rng):
    f = forward_transform(rng.standard_normal((16,) * 3), g16)
    assert np.array_equal(lambda_pow(f, 0).coeffs, f.coeffs)
    x, _, _ = g16.coordinates()
    c2 = forward_transform(np.cos(2 * x) * np.ones((16,) * 3), g16)
    assert np.allclose(lambda_pow(c2, 0.5).coeffs, math.sqrt(2) * c2.coeffs, atol=1e-15)
    const = forward_transform(np.full((16,) * 3, 3.0), g16)
    assert np.abs(lambda_pow(const, 1).coeffs).max() == 0
    with pytest.raises(ValueError):
        lambda_pow(const, -1)


def test_lambda_pow_semigroup(g16, rng):
    c = forward_transform(rng.standard_normal((16,) * 3), g16).coeffs.copy()
    c[0, 0, 0] = 0
    f = SpectralScalarField(g16, c)
    lhs = lambda_pow(lambda_pow(f, 0.7), 1.3)
    assert np.allclose(lhs.coeffs, lambda_pow(f, 2.0).coeffs, atol=1e-12)
    assert np.allclose(lambda_pow(f, 2.0).coeffs, -laplacian(f).coeffs, atol=1e-12)
    assert np.allclose(lambda_pow(lambda_pow(f, -1), 1).coeffs, f.coeffs, atol=1e-14)


def test_gradient_of_sine(g16):
    _, y, _ = g16.coordinates()
    f = forward_transform(np.sin(y) * np.ones((16,) * 3), g16)
    g = gradient(f).physical()
    assert np.allclose(g[0], 0, atol=1e-14)
    assert np.allclose(g[1], np.cos(y) * np.ones((16,) * 3), atol=1e-13)
    assert np.allclose(g[2], 0, atol=1e-14)


def test_div_grad_is_laplacian(g16, rng):
    f = forward_transform(rng.standard_normal((16,) * 3), g16)
    f = dealias(f)
    assert np.allclose(divergence(gradient(f)).coeffs, laplacian(f).coeffs, atol=1e-12)


def test_leray_examples(g16, rng):
    x, y, z = g16.coordinates()
    one = np.ones((16,) * 3)
    phi = forward_transform(rng.standard_normal((16,) * 3), g16)
    assert sobolev_norm(leray_project(gradient(phi)), 0) < 1e-12
    shear = forward_transform(np.stack([np.sin(y) * one, 0 * one, 0 * one]), g16)
    assert np.allclose(leray_project(shear).coeffs, shear.coeffs, atol=1e-15)
    along = forward_transform(np.stack([np.sin(x) * one, 0 * one, 0 * one]), g16)
    assert sobolev_norm(leray_project(along), 0) < 1e-14


def test_leray_properties(g16, rng):
    w = forward_transform(rng.standard_normal((3,) + (16,) * 3), g16)
    p = leray_project(w)
    assert sobolev_norm(divergence(p), 0) < 1e-12 * sobolev_norm(p, 0)
    assert np.allclose(leray_project(p).coeffs, p.coeffs, atol=1e-14)
    # orthogonal projection: <Pw, w - Pw> = 0
    assert abs(inner(p, w - p)) < 1e-12 * sobolev_norm(w, 0) ** 2


def test_dealias(g16):
    x, _, _ = g16.coordinates()
    one = np.ones((16,) * 3)
    low = forward_transform(np.cos(3 * x) * one, g16)
    low = SpectralScalarField(g16, low.coeffs * (np.abs(low.coeffs) > 1e-12))
    assert np.array_equal(dealias(low).coeffs, low.coeffs)
    nyq = forward_transform(np.cos(8 * x) * one, g16)
    assert np.abs(dealias(nyq).coeffs).max() == 0


def test_multiply_band_limited_is_exact(g16):
    x, y, _ = g16.coordinates()
    one = np.ones((16,) * 3)
    f = forward_transform(np.cos(2 * x) * one, g16)
    g = forward_transform(np.sin(y) * one, g16)
    expected = np.cos(2 * x) * np.sin(y) * one
    assert np.allclose(multiply(f, g).physical(), expected, atol=1e-14)


def test_norms_single_mode(g16):
    x, _, _ = g16.coordinates()
    A = 1.7
    f = forward_transform(A * np.cos(x) * np.ones((16,) * 3), g16)
    assert sobolev_norm(f, 0) == pytest.approx(A * VOL_HALF, rel=1e-14)
    assert sobolev_norm(f, 0.5) == pytest.approx(sobolev_norm(f, 0), rel=1e-14)
    assert sobolev_norm(f, 1, homogeneous=False) == pytest.approx(math.sqrt(2) * A * VOL_HALF, rel=1e-14)
    assert lp_norm(f, math.inf) == pytest.approx(A)
    assert lp_norm(f, 2) == pytest.approx(sobolev_norm(f, 0), rel=1e-13)
    const = forward_transform(np.full((16,) * 3, 2.0), g16)
    assert sobolev_norm(const, 1.5) == 0
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_parseval_matches_quadrature(g16, rng):
    a, b = rng.standard_normal((2,) + (16,) * 3)
    f, g = forward_transform(a, g16), forward_transform(b, g16)
    quad = g16.spacing**3 * float(np.sum(a * b))
    assert inner(f, g) == pytest.approx(quad, rel=1e-12)


def test_box_length_scaling():
    g = Grid(16, box_length=4.0)
    x, _, _ = g.coordinates()
    f = forward_transform(np.sin(2 * np.pi * x / 4.0) * np.ones((16,) * 3), g)
    assert sobolev_norm(f, 1) == pytest.approx(2 * np.pi / 4.0 * sobolev_norm(f, 0), rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-1e3, 1e3, allow_nan=False).filter(lambda c: c == 0 or abs(c) > 1e-100), s=st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0]))
def test_norm_homogeneity(c, s):
    g = Grid(8)
    a = np.random.default_rng(0).standard_normal((3, 8, 8, 8))
    f = forward_transform(a, g)
    assert sobolev_norm(f * c, s) == pytest.approx(abs(c) * sobolev_norm(f, s), rel=1e-12, abs=1e-300)


def test_vector_components(g16, rng):
    comps = [forward_transform(rng.standard_normal((16,) * 3), g16) for _ in range(3)]
    w = SpectralVectorField.from_components(comps)
    assert np.array_equal(w[1].coeffs, comps[1].coeffs)
    assert len(w.components) == 3
