"""Empirical ratio checks for the interpolation, product and commutator estimates.

Every ratio is "left side / right side" with all unnamed constants set to 1,
so a sweep gives a lower bound for the best constant on the torus. Products
are formed on a grid refined by two so band-limited inputs (band <= n/3)
multiply without aliasing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .diagnostics import bmo_estimate
from .spectral import (
    Grid,
    SpectralScalarField,
    SpectralVectorField,
    forward_transform,
    gradient,
    lambda_pow,
    leray_project,
    lp_norm,
    sobolev_norm,
)

__all__ = [
    "GNInstance",
    "RatioReport",
    "gn_solve_kappa",
    "gn_scaling_defect",
    "gn_ratio",
    "kato_ponce_ratio",
    "commutator_ratio",
    "kozono_bmo_ratio",
    "linfty_log_ratio",
    "theory_exponents",
    "random_band_limited_field",
    "refine",
    "ratio_sweep",
    "ESTIMATE_INSTANCES",
    "standard_battery",
]


def _inv_index(p):
    if p == math.inf:
        return 0
    return 1 / Fraction(p) if isinstance(p, Rational) else 1.0 / p


def _exact(*values) -> bool:
    return all(isinstance(v, Rational) or v == math.inf for v in values)


def gn_scaling_defect(s, p, m, q, l, r, kappa):
    """Mismatch in the dilation balance s/3 - 1/p = (m/3 - 1/q)(1-k) + (l/3 - 1/r)k."""
    third = Fraction(1, 3) if _exact(s, m, l, kappa) else 1 / 3
    lhs = s * third - _inv_index(p)
    a = m * third - _inv_index(q)
    b = l * third - _inv_index(r)
    return lhs - (a * (1 - kappa) + b * kappa)


def gn_solve_kappa(s, p, m, q, l, r):
    """Interpolation weight for the Gagliardo-Nirenberg inequality in three dimensions.

    Exact (``Fraction``) when every argument is rational or infinite.
    """
    if not (0 <= m and s <= l):
        raise ValueError(f"need 0 <= m and s <= l (got m={m}, s={s}, l={l})")
    for name, idx in (("p", p), ("q", q), ("r", r)):
        if not idx >= 1:
            raise ValueError(f"integrability index {name}={idx} must be >= 1")
    exact = _exact(s, p, m, q, l, r)
    third = Fraction(1, 3) if exact else 1 / 3
    lhs = s * third - _inv_index(p)
    a = m * third - _inv_index(q)
    b = l * third - _inv_index(r)
    if b == a:
        if lhs == a:
            return Fraction(0) if exact else 0.0
        raise ValueError("degenerate interpolation pair with unreachable target")
    kappa = (lhs - a) / (b - a)
    if not 0 <= kappa <= 1:
        raise ValueError(f"kappa={kappa} outside [0, 1]: inadmissible exponents")
    if p == math.inf and not 0 < kappa < 1:
        raise ValueError("p = inf requires 0 < kappa < 1")
    return kappa


@dataclass(frozen=True)
class GNInstance:
    s: float
    p: float
    m: float
    q: float
    l: float
    r: float
    kappa: float

    @classmethod
    def solve(cls, s, p, m, q, l, r) -> "GNInstance":
        return cls(s, p, m, q, l, r, gn_solve_kappa(s, p, m, q, l, r))

    def describe(self) -> str:
        return (
            f"|L^{self.s} f|_{self.p} <= |L^{self.m} f|_{self.q}^(1-{self.kappa})"
            f" |L^{self.l} f|_{self.r}^{self.kappa}"
        )


# instances the energy estimates lean on; alpha = 3 for the first
ESTIMATE_INSTANCES = {
    "l3a2_alpha3": GNInstance.solve(0, Fraction(9, 2), Fraction(1, 2), 2, 1, 2),
    "linf_h1_h52": GNInstance.solve(0, math.inf, 1, 2, Fraction(5, 2), 2),
    "h1_l2_h2": GNInstance.solve(1, 2, 0, 2, 2, 2),
}


def refine(f, factor: int = 2):
    """Spectral zero-padding onto a grid ``factor`` times finer."""
    grid = f.grid
    fine = Grid(grid.n * factor, grid.box_length)
    n, N = grid.n, fine.n
    lead = f.coeffs.shape[:-3]
    out = np.zeros(lead + fine.spectral_shape, dtype=complex)
    h = n // 2
    rows = np.r_[0:h, N - h : N]
    src_rows = np.r_[0:h, n - h : n]
    out[..., rows[:, None], rows[None, :], : h + 1] = f.coeffs[..., src_rows[:, None], src_rows[None, :], :]
    # Nyquist planes of the coarse grid are ambiguous on the fine one
    out[..., h, :, :] = 0
    out[..., N - h, :, :] = 0
    out[..., :, h, :] = 0
    out[..., :, N - h, :] = 0
    out[..., :, :, h] = 0
    return type(f)(fine, out)


def _scalar(a: np.ndarray, grid: Grid) -> SpectralScalarField:
    return forward_transform(a, grid)


def _safe_ratio(num: float, den: float, scale: float) -> float:
    if den > 0:
        return num / den
    return 0.0 if num <= 1e-12 * scale else math.inf


def gn_ratio(f, inst: GNInstance) -> float:
    """||L^s f||_p / (||L^m f||_q^(1-kappa) ||L^l f||_r^kappa)."""
    f = refine(f)
    kappa = float(inst.kappa)
    num = lp_norm(lambda_pow(f, float(inst.s)), float(inst.p))
    den = lp_norm(lambda_pow(f, float(inst.m)), float(inst.q)) ** (1 - kappa) * lp_norm(
        lambda_pow(f, float(inst.l)), float(inst.r)
    ) ** kappa
    if den == 0:
        raise ZeroDivisionError("gn_ratio needs a nonzero field")
    return num / den


def _check_holder(p, p1, q1, p2, q2):
    if not 1 < p < math.inf:
        raise ValueError("need 1 < p < inf")
    if not (1 < q1 < math.inf and 1 < q2 < math.inf):
        raise ValueError("need 1 < q1, q2 < inf")
    if not (1 < p1 and 1 < p2):
        raise ValueError("need p1, p2 > 1")
    inv = lambda x: 0.0 if x == math.inf else 1.0 / x  # noqa: E731
    if abs(inv(p) - inv(p1) - inv(q1)) > 1e-12 or abs(inv(p) - inv(p2) - inv(q2)) > 1e-12:
        raise ValueError("inconsistent Holder exponents: 1/p != 1/p1 + 1/q1 or 1/p2 + 1/q2")


def _product(f: SpectralScalarField, g: SpectralScalarField) -> SpectralScalarField:
    return _scalar(f.physical() * g.physical(), f.grid)


def kato_ponce_ratio(f, g, s, p, p1, q1, p2, q2) -> float:
    """||L^s(fg)||_p / (||f||_p1 ||L^s g||_q1 + ||g||_p2 ||L^s f||_q2)."""
    if not s > 0:
        raise ValueError("s must be positive")
    _check_holder(p, p1, q1, p2, q2)
    f, g = refine(f), refine(g)
    num = lp_norm(lambda_pow(_product(f, g), s), p)
    den = lp_norm(f, p1) * lp_norm(lambda_pow(g, s), q1) + lp_norm(g, p2) * lp_norm(
        lambda_pow(f, s), q2
    )
    return _safe_ratio(num, den, 1.0)


def commutator(f: SpectralScalarField, g: SpectralScalarField, s: float) -> SpectralScalarField:
    """[L^s, f] g = L^s(fg) - f L^s g."""
    return lambda_pow(_product(f, g), s) - _product(f, lambda_pow(g, s))


def commutator_ratio(f, g, s, p, p1, q1, p2, q2) -> float:
    """||[L^s, f] g||_p / (||grad f||_p1 ||L^(s-1) g||_q1 + ||g||_p2 ||L^s f||_q2)."""
    if not s > 0:
        raise ValueError("s must be positive")
    _check_holder(p, p1, q1, p2, q2)
    f, g = refine(f), refine(g)
    num = lp_norm(commutator(f, g, s), p)
    den = lp_norm(gradient(f), p1) * lp_norm(lambda_pow(g, s - 1), q1) + lp_norm(g, p2) * lp_norm(
        lambda_pow(f, s), q2
    )
    scale = lp_norm(f, math.inf) * lp_norm(lambda_pow(g, s), p)
    return _safe_ratio(num, den, scale)


def partial(f: SpectralScalarField, multi_index) -> SpectralScalarField:
    c = f.coeffs
    for axis, order in enumerate(multi_index):
        c = c * f.grid.ik[axis] ** int(order)
    return SpectralScalarField(f.grid, c)


def kozono_bmo_ratio(f, g, a, b, r) -> float:
    """||d^a f d^b g||_r / (|f|_BMO ||L^(|a|+|b|) g||_r + |g|_BMO ||L^(|a|+|b|) f||_r).

    BMO sizes come from the dyadic estimator.
    """
    if not 1 < r < math.inf:
        raise ValueError("need 1 < r < inf")
    if sum(a) < 1 or sum(b) < 1:
        raise ValueError("multi-indices need order >= 1")
    f, g = refine(f), refine(g)
    order = sum(a) + sum(b)
    num = lp_norm(_product(partial(f, a), partial(g, b)), r)
    den = bmo_estimate(f)[1] * lp_norm(lambda_pow(g, order), r) + bmo_estimate(g)[1] * lp_norm(
        lambda_pow(f, order), r
    )
    return _safe_ratio(num, den, 0.0)


def linfty_log_ratio(f, s: float) -> float:
    """||f||_inf / (1 + |f|_BMO ln(e + ||f||_{H^s})), s > 3/2, BMO by dyadic estimator."""
    if not s > 1.5:
        raise ValueError("need s > 3/2")
    f = refine(f)
    den = 1.0 + bmo_estimate(f)[1] * math.log(math.e + sobolev_norm(f, s, homogeneous=False))
    return lp_norm(f, math.inf) / den


def theory_exponents(alpha) -> dict:
    """Exponents used when bounding the damping terms.

    kappa(alpha) = (3 alpha - 5) / (4 (alpha - 1)) and
    delta(alpha) = (5 alpha - 1) / (4 (alpha + 1)); both must lie in (0, 1).
    """
    a = Fraction(alpha) if isinstance(alpha, Rational) else float(alpha)
    if not 5 / 3 < a < 4:
        raise ValueError(f"alpha={alpha} outside (5/3, 4)")
    kappa = (3 * a - 5) / (4 * (a - 1))
    delta = (5 * a - 1) / (4 * (a + 1))
    assert 0 < kappa < 1 and 0 < delta < 1
    return {"alpha": a, "kappa": kappa, "delta": delta}


def random_band_limited_field(
    grid: Grid,
    seed: int,
    band: float,
    spectrum_slope: float = 0.0,
    vector: bool = False,
    solenoidal: bool = True,
):
    """Random real field with |f_hat(k)| = |k|^slope for 0 < |k| <= band, unit L2 norm.

    Phases come from the FFT of Gaussian noise, so Hermitian symmetry holds by
    construction. The vector variant is Leray-projected unless ``solenoidal``
    is false.
    """
    if band > grid.n // 3:
        raise ValueError(f"band {band} exceeds n/3 = {grid.n // 3}")
    rng = np.random.default_rng(seed)
    shape = ((3,) if vector else ()) + (grid.n,) * 3
    noise = forward_transform(rng.standard_normal(shape), grid).coeffs
    kint = grid.kmag * grid.box_length / (2 * np.pi)
    inside = (kint > 0) & (kint <= band + 1e-12)
    with np.errstate(divide="ignore", invalid="ignore"):
        amp = np.where(inside, kint**spectrum_slope, 0.0)
        phase = np.where(np.abs(noise) > 0, noise / np.abs(noise), 0.0)
    coeffs = phase * amp
    f = (SpectralVectorField if vector else SpectralScalarField)(grid, coeffs)
    if vector and solenoidal:
        f = leray_project(f)
    norm = sobolev_norm(f, 0)
    return f * (1.0 / norm) if norm > 0 else f


def shell_spectrum(f) -> tuple:
    """Integer shell radii and the mean |f_hat| on each nonempty shell."""
    grid = f.grid
    shell = np.rint(grid.kmag * grid.box_length / (2 * np.pi)).astype(int)
    mag = np.abs(f.coeffs)
    if mag.ndim == 4:
        mag = np.sqrt(np.sum(mag**2, axis=0))
    radii, means = [], []
    for k in range(1, shell.max() + 1):
        sel = shell == k
        if sel.any() and mag[sel].max() > 0:
            radii.append(k)
            means.append(float(mag[sel].mean()))
    return np.array(radii), np.array(means)


@dataclass
class RatioReport:
    instance: str
    samples: int
    max_ratio: float
    mean_ratio: float
    seed: int
    max_scale_defect: float = 0.0
    nonfinite: int = 0

    CSV_HEADER = ("instance", "samples", "max_ratio", "mean_ratio", "seed")

    def row(self) -> tuple:
        return (self.instance, self.samples, self.max_ratio, self.mean_ratio, self.seed)


def ratio_sweep(name: str, ratio, grid: Grid, samples: int, seed: int, band: int, slope: float = -1.0, pair: bool = False) -> RatioReport:
    """Evaluate ``ratio`` on ``samples`` random fields and record scale invariance.

    ``ratio`` takes one field, or two when ``pair`` is set; each evaluation is
    repeated with the first field scaled by 2.
    """
    values, defects, bad = [], [], 0
    for i in range(samples):
        f = random_band_limited_field(grid, seed + 2 * i, band, slope)
        args = (f, random_band_limited_field(grid, seed + 2 * i + 1, band, slope)) if pair else (f,)
        val = ratio(*args)
        scaled = ratio(2.0 * args[0], *args[1:])
        if not (math.isfinite(val) and math.isfinite(scaled)):
            bad += 1
            continue
        values.append(val)
        defects.append(abs(scaled - val) / max(abs(val), 1e-300))
    return RatioReport(
        instance=name,
        samples=samples,
        max_ratio=max(values) if values else math.nan,
        mean_ratio=float(np.mean(values)) if values else math.nan,
        seed=seed,
        max_scale_defect=max(defects) if defects else 0.0,
        nonfinite=bad,
    )


def h1_interpolation_check() -> dict:
    """Contrast the H^1 interpolation exponents 1/4, 3/4 with the dilation-consistent 1/2."""
    consistent = gn_solve_kappa(1, 2, 0, 2, 2, 2)
    return {
        "consistent_kappa": consistent,
        "three_quarter_kappa": Fraction(3, 4),
        "three_quarter_defect": gn_scaling_defect(1, 2, 0, 2, 2, 2, Fraction(3, 4)),
        "consistent_defect": gn_scaling_defect(1, 2, 0, 2, 2, 2, consistent),
    }


# (name, ratio, pair) triples evaluated by :func:`standard_battery`
def _battery():
    out = [(f"gn_{name}", (lambda f, inst=inst: gn_ratio(f, inst)), False) for name, inst in ESTIMATE_INSTANCES.items()]
    out.append(("kato_ponce_s1", lambda f, g: kato_ponce_ratio(f, g, 1.0, 2, math.inf, 2, math.inf, 2), True))
    out.append(("commutator_s3/2", lambda f, g: commutator_ratio(f, g, 1.5, 2, math.inf, 2, math.inf, 2), True))
    return out


def standard_battery(grid: Grid, samples: int, seed: int, band: int | None = None, slope: float = -1.0) -> list:
    """Ratio sweeps for the interpolation instances plus one product and one commutator estimate."""
    band = grid.n // 3 if band is None else band
    return [ratio_sweep(name, fn, grid, samples, seed, band, slope, pair) for name, fn, pair in _battery()]
