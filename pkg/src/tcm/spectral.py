"""Periodic-box pseudo-spectral primitives.

Fields are stored as real-to-complex FFT coefficients (the last axis holds
only the non-negative half of the lattice, Hermitian symmetry is implied).
Coefficients follow the convention

    f_hat[k] = (1/n^3) * sum_j f(x_j) exp(-i k.x_j)

so that Parseval reads ``||f||_2^2 = box_volume * sum_k |f_hat[k]|^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "SpectralScalarField",
    "SpectralVectorField",
    "forward_transform",
    "inverse_transform",
    "lambda_pow",
    "gradient",
    "divergence",
    "laplacian",
    "leray_project",
    "dealias",
    "multiply",
    "inner",
    "sobolev_norm",
    "lp_norm",
]

_AXES = (-3, -2, -1)


def _fwd(a: np.ndarray) -> np.ndarray:
    return sfft.rfftn(a, axes=_AXES, norm="forward", workers=-1)


def _inv(a: np.ndarray, n: int) -> np.ndarray:
    return sfft.irfftn(a, s=(n, n, n), axes=_AXES, norm="forward", workers=-1)


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``n`` points per axis on ``[0, box_length)^3``."""

    n: int
    box_length: float = 2 * np.pi
    # derived arrays, excluded from equality
    k: tuple = field(init=False, repr=False, compare=False)
    ik: tuple = field(init=False, repr=False, compare=False)
    k2: np.ndarray = field(init=False, repr=False, compare=False)
    kmag: np.ndarray = field(init=False, repr=False, compare=False)
    dealias_mask: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.n)
        if n < 8 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not self.box_length > 0:
            raise ValueError("box_length must be positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "box_length", float(self.box_length))

        scale = 2 * np.pi / self.box_length
        # integer lattice {-n/2+1, ..., n/2}; Nyquist carried as +n/2
        idx = np.fft.fftfreq(n, 1.0 / n)
        idx[n // 2] = n // 2
        idx_r = np.arange(n // 2 + 1, dtype=float)
        kx = (idx * scale)[:, None, None]
        ky = (idx * scale)[None, :, None]
        kz = (idx_r * scale)[None, None, :]
        k2 = kx**2 + ky**2 + kz**2
        object.__setattr__(self, "k", (kx, ky, kz))

        # first derivatives drop the Nyquist plane (its sampled derivative vanishes)
        def odd(kk, i_nyq):
            kk = kk.copy()
            kk[i_nyq] = 0.0
            return 1j * kk

        ik = (
            odd(kx, (n // 2, 0, 0)),
            odd(ky, (0, n // 2, 0)),
            odd(kz, (0, 0, n // 2)),
        )
        object.__setattr__(self, "ik", ik)
        object.__setattr__(self, "k2", k2)
        object.__setattr__(self, "kmag", np.sqrt(k2))

        kcut = n // 3
        mask = (
            (np.abs(idx)[:, None, None] <= kcut)
            & (np.abs(idx)[None, :, None] <= kcut)
            & (idx_r[None, None, :] <= kcut)
        )
        object.__setattr__(self, "dealias_mask", mask)

        # multiplicity of each stored half-spectrum mode in the full lattice
        w = np.full(n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        object.__setattr__(self, "weights", np.broadcast_to(w, (n, n, n // 2 + 1)))

    @property
    def spacing(self) -> float:
        return self.box_length / self.n

    @property
    def volume(self) -> float:
        return self.box_length**3

    @property
    def spectral_shape(self) -> tuple:
        return (self.n, self.n, self.n // 2 + 1)

    @property
    def kmax(self) -> float:
        """Largest retained wavenumber magnitude per axis after dealiasing."""
        return (self.n // 3) * 2 * np.pi / self.box_length

    def coordinates(self) -> tuple:
        """Physical collocation points as three broadcastable arrays."""
        x = np.arange(self.n) * self.spacing
        return x[:, None, None], x[None, :, None], x[None, None, :]

    def zeros(self, vector: bool = False):
        shape = ((3,) if vector else ()) + self.spectral_shape
        coeffs = np.zeros(shape, dtype=complex)
        return SpectralVectorField(self, coeffs) if vector else SpectralScalarField(self, coeffs)


class _Field:
    __slots__ = ()
    _ncomp: int

    def __post_init__(self):
        shape = ((3,) if self._ncomp == 3 else ()) + self.grid.spectral_shape
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != shape:
            raise ValueError(f"coefficient shape {coeffs.shape} does not match grid {shape}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def _new(self, coeffs):
        return type(self)(self.grid, coeffs)

    def _check(self, other):
        if isinstance(other, _Field) and other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        self._check(other)
        return self._new(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return self._new(self.coeffs - other.coeffs)

    def __neg__(self):
        return self._new(-self.coeffs)

    def __mul__(self, scalar):
        return self._new(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coeffs)))

    def physical(self) -> np.ndarray:
        return _inv(self.coeffs, self.grid.n)

    def full_coeffs(self) -> np.ndarray:
        """Coefficients on the whole ``n^3`` lattice (FFT index order)."""
        return sfft.fftn(self.physical(), axes=_AXES, norm="forward", workers=-1)


@dataclass(frozen=True, eq=False)
class SpectralScalarField(_Field):
    grid: Grid
    coeffs: np.ndarray
    _ncomp = 1


@dataclass(frozen=True, eq=False)
class SpectralVectorField(_Field):
    grid: Grid
    coeffs: np.ndarray
    _ncomp = 3

    @classmethod
    def from_components(cls, components) -> "SpectralVectorField":
        components = list(components)
        if len(components) != 3:
            raise ValueError("a vector field needs exactly three components")
        grid = components[0].grid
        for c in components[1:]:
            if c.grid != grid:
                raise ValueError("components live on different grids")
        return cls(grid, np.stack([c.coeffs for c in components]))

    @property
    def components(self) -> tuple:
        return tuple(SpectralScalarField(self.grid, c) for c in self.coeffs)

    def __getitem__(self, i: int) -> SpectralScalarField:
        return SpectralScalarField(self.grid, self.coeffs[i])


Field = Union[SpectralScalarField, SpectralVectorField]


def _same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError("fields live on different grids")
    return g


def forward_transform(samples, grid: Grid) -> Field:
    """Physical samples (``n^3`` or ``3 x n^3``) to spectral coefficients."""
    a = np.asarray(samples, dtype=float)
    n = grid.n
    if a.shape == (n, n, n):
        return SpectralScalarField(grid, _fwd(a))
    if a.shape == (3, n, n, n):
        return SpectralVectorField(grid, _fwd(a))
    raise ValueError(f"sample shape {a.shape} does not match grid with n={n}")


def inverse_transform(f: Field) -> np.ndarray:
    return f.physical()


def lambda_pow(f: Field, s: float) -> Field:
    """Apply the fractional Laplacian power ``(-Delta)^(s/2)``, i.e. multiply by ``|k|^s``."""
    if s == 0:
        return f._new(f.coeffs.copy())
    dc = f.coeffs[..., 0, 0, 0]
    if s < 0 and np.any(np.abs(dc) > 0):
        raise ValueError("negative powers need a mean-zero field")
    kmag = f.grid.kmag
    with np.errstate(divide="ignore"):
        mult = np.where(kmag > 0, kmag ** float(s), 0.0)
    return f._new(f.coeffs * mult)


def gradient(f: SpectralScalarField) -> SpectralVectorField:
    ik = f.grid.ik
    return SpectralVectorField(f.grid, np.stack([ik[i] * f.coeffs for i in range(3)]))


def divergence(w: SpectralVectorField) -> SpectralScalarField:
    ik = w.grid.ik
    return SpectralScalarField(w.grid, sum(ik[i] * w.coeffs[i] for i in range(3)))


def laplacian(f: Field) -> Field:
    return f._new(-f.grid.k2 * f.coeffs)


def _leray(grid: Grid, c: np.ndarray) -> np.ndarray:
    # works on raw (3, ...) coefficient arrays; uses the same lattice as divergence
    ik = grid.ik
    kk = [(-1j) * a for a in ik]  # real wavevector with Nyquist components removed
    kdotw = sum(kk[i] * c[i] for i in range(3))
    knorm2 = sum(a**2 for a in kk)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(knorm2 > 0, kdotw / knorm2, 0.0)
    return np.stack([c[i] - kk[i] * factor for i in range(3)])


def leray_project(w: SpectralVectorField) -> SpectralVectorField:
    """Orthogonal projection onto divergence-free fields, mode by mode."""
    return SpectralVectorField(w.grid, _leray(w.grid, w.coeffs))


def dealias(f: Field) -> Field:
    return f._new(f.coeffs * f.grid.dealias_mask)


def multiply(f: SpectralScalarField, g: SpectralScalarField) -> SpectralScalarField:
    """Pseudo-spectral product: pointwise in physical space, then two-thirds truncation."""
    grid = _same_grid(f, g)
    return SpectralScalarField(grid, _fwd(f.physical() * g.physical()) * grid.dealias_mask)


def inner(f: Field, g: Field) -> float:
    """L2 inner product via Parseval."""
    grid = _same_grid(f, g)
    if f.coeffs.shape != g.coeffs.shape:
        raise ValueError("cannot pair a scalar with a vector field")
    w = grid.weights
    return grid.volume * float(np.sum(w * np.real(f.coeffs * np.conj(g.coeffs))))


def sobolev_norm(f: Field, s: float, homogeneous: bool = True) -> float:
    """Sobolev norm with weight ``|k|^{2s}`` (homogeneous) or ``(1+|k|^2)^s``."""
    grid = f.grid
    if homogeneous:
        if s == 0:
            weight = np.ones_like(grid.k2)
        else:
            with np.errstate(divide="ignore"):
                weight = np.where(grid.k2 > 0, grid.k2 ** float(s), 0.0)
    else:
        weight = (1.0 + grid.k2) ** float(s)
    power = np.abs(f.coeffs) ** 2
    if power.ndim == 4:
        power = power.sum(axis=0)
    total = grid.volume * float(np.sum(grid.weights * weight * power))
    return float(np.sqrt(max(total, 0.0)))


def pointwise_magnitude(f: Field) -> np.ndarray:
    a = f.physical()
    return np.sqrt(np.sum(a**2, axis=0)) if a.ndim == 4 else np.abs(a)


def lp_norm(f: Field, p: float) -> float:
    """L^p norm by collocation quadrature (Euclidean magnitude for vectors)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    mag = pointwise_magnitude(f)
    if np.isinf(p):
        return float(mag.max())
    cell = f.grid.spacing**3
    return float((cell * np.sum(mag**p)) ** (1.0 / p))
