"""CSV time series, sweep tables and binary spectral checkpoints."""
from __future__ import annotations

import csv
import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .diagnostics import CSV_COLUMNS
from .model import ModelParams, SimState
from .spectral import Grid

MAGIC = b"TCMS"
VERSION = 1
# magic, version, n, box_length, time, nu, eta, mu, sigma1, sigma2, alpha, beta,
# flags, pi, pi_tilde
_HEADER = struct.Struct("<4sIId d7dIdd".replace(" ", ""))
_FLAG_ADVECTION = 1
_FLAG_COUPLING = 2
_PARAM_NAMES = ("nu", "eta", "mu", "sigma1", "sigma2", "alpha", "beta")


class CheckpointError(ValueError):
    pass


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    return str(value)


def write_series(records, path) -> None:
    """One row per record with the fixed column header; an empty series gives a header-only file."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for rec in records:
            w.writerow([_fmt(v) for v in rec.row()])


def read_series(path) -> dict:
    """Column name -> float array."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    cols = {name: np.array([float(r[i]) for r in body]) for i, name in enumerate(header)}
    return cols


def write_table(header, rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


@dataclass(frozen=True)
class CheckpointHeader:
    n: int
    box_length: float
    time: float
    params: ModelParams
    pi: float = 0.0
    pi_tilde: float = 0.0
    version: int = VERSION


def _payload_size(n: int) -> int:
    # 7 half-spectrum arrays of complex128
    return 7 * n * n * (n // 2 + 1) * 16


def write_checkpoint(state: SimState, params: ModelParams, path, pi: float = 0.0, pi_tilde: float = 0.0) -> None:
    """Header followed by little-endian (re, im) float64 pairs of u1..u3, v1..v3, theta.

    Coefficients are the stored half spectrum in C order.
    """
    grid = state.grid
    flags = (_FLAG_ADVECTION if params.advection else 0) | (_FLAG_COUPLING if params.coupling else 0)
    head = _HEADER.pack(
        MAGIC,
        VERSION,
        grid.n,
        grid.box_length,
        state.time,
        *(float(getattr(params, k)) for k in _PARAM_NAMES),
        flags,
        pi,
        pi_tilde,
    )
    payload = np.ascontiguousarray(state.packed(), dtype="<c16").tobytes()
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(head)
        fh.write(payload)
    os.replace(tmp, path)


def _parse_header(blob: bytes, path) -> CheckpointHeader:
    if len(blob) < _HEADER.size:
        raise CheckpointError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, version, n, box_length, time, *rest = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version} (expected {VERSION})")
    values, (flags, pi, pi_tilde) = rest[:7], rest[7:]
    if n < 8 or n & (n - 1):
        raise CheckpointError(f"{path}: invalid grid size {n}")
    try:
        params = ModelParams(
            **dict(zip(_PARAM_NAMES, values)),
            advection=bool(flags & _FLAG_ADVECTION),
            coupling=bool(flags & _FLAG_COUPLING),
        )
    except ValueError as exc:
        raise CheckpointError(f"{path}: invalid parameters ({exc})") from exc
    if not (math.isfinite(box_length) and box_length > 0 and math.isfinite(time)):
        raise CheckpointError(f"{path}: invalid box length or time")
    return CheckpointHeader(n, box_length, time, params, pi, pi_tilde, version)


def read_checkpoint_header(path) -> CheckpointHeader:
    with open(path, "rb") as fh:
        return _parse_header(fh.read(_HEADER.size), path)


def read_checkpoint(path, with_header: bool = False):
    """Return ``(state, params)``, or ``(state, header)`` when ``with_header``."""
    with open(path, "rb") as fh:
        blob = fh.read()
    head = _parse_header(blob, path)
    expected = _HEADER.size + _payload_size(head.n)
    if len(blob) != expected:
        raise CheckpointError(f"{path}: size {len(blob)} does not match header (expected {expected})")
    grid = Grid(head.n, head.box_length)
    coeffs = np.frombuffer(blob, dtype="<c16", offset=_HEADER.size).reshape((7,) + grid.spectral_shape)
    state = SimState.unpack(grid, coeffs.astype(np.complex128), head.time)
    return (state, head) if with_header else (state, head.params)
