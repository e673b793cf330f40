"""
Periodic grids, scalar/vector fields on them, discrete norms and field I/O.

The torus ``[0, L)^n`` is sampled at ``x_j = j h`` with ``h = L/N``. Spectral
arrays use the real-FFT layout of :func:`numpy.fft.rfftn`: full frequencies on
the leading axis (n=2) and non-negative ones on the last axis.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import GridMismatch, UnsupportedDim, ValidationError

__all__ = [
    "Grid", "Field", "VectorField", "Box", "lp_norm", "lp_error", "inner",
    "write_field_binary", "read_field_binary", "write_field_csv", "read_field_csv",
]

Box = tuple  # ((lo, hi), ...) one pair per axis


@dataclass(frozen=True)
class Grid:
    dim: int
    N: int
    L: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise UnsupportedDim(f"dim must be 1 or 2, got {self.dim}")
        n = int(self.N)
        if n < 8 or n & (n - 1):
            raise ValidationError(f"N must be a power of two >= 8, got {self.N}")
        if not self.L > 0:
            raise ValidationError(f"L must be positive, got {self.L}")
        object.__setattr__(self, "N", n)
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.dim

    @property
    def spectral_shape(self) -> tuple:
        return (self.N,) * (self.dim - 1) + (self.N // 2 + 1,)

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @cached_property
    def axis_points(self) -> np.ndarray:
        return np.arange(self.N) * self.h

    def coords(self) -> tuple:
        """Coordinate arrays (``indexing='ij'``), one per axis."""
        return tuple(np.meshgrid(*([self.axis_points] * self.dim), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> tuple:
        """Integer wavenumbers per axis, broadcastable to ``spectral_shape``."""
        N = self.N
        if self.dim == 1:
            return (np.arange(N // 2 + 1),)
        k0 = np.fft.fftfreq(N, 1.0 / N).astype(int)[:, None]
        k1 = np.arange(N // 2 + 1)[None, :]
        return (k0, k1)

    @cached_property
    def freqs(self) -> tuple:
        """Frequencies ``k/L`` per axis (cycles per unit length)."""
        return tuple(k / self.L for k in self.wavenumbers)

    @cached_property
    def k_squared(self) -> np.ndarray:
        """``|k|^2`` (integer) on the spectral grid."""
        out = np.zeros(self.spectral_shape, dtype=np.int64)
        for k in self.wavenumbers:
            out = out + k.astype(np.int64) ** 2
        return out

    @cached_property
    def xi_mag(self) -> np.ndarray:
        return np.sqrt(self.k_squared.astype(float)) / self.L

    def nyquist_mask(self, axis: int) -> np.ndarray:
        """True where the wavenumber along ``axis`` is the unpaired -N/2 (or +N/2)."""
        k = self.wavenumbers[axis]
        return np.broadcast_to(np.abs(k) == self.N // 2, self.spectral_shape)

    def box_mask(self, box: Optional[Box]) -> np.ndarray:
        """Grid points strictly inside the box ``((lo, hi), ...)``."""
        if box is None:
            return np.ones(self.shape, dtype=bool)
        box = _check_box(box, self)
        mask = np.ones(self.shape, dtype=bool)
        for x, (lo, hi) in zip(self.coords(), box):
            mask &= (x > lo) & (x < hi)
        return mask

    def to_dict(self) -> dict:
        return {"dim": self.dim, "N": self.N, "L": self.L}


def _check_box(box, grid: Grid) -> tuple:
    box = tuple(tuple(float(v) for v in pair) for pair in box)
    if len(box) != grid.dim:
        raise ValidationError(f"box needs {grid.dim} (lo, hi) pairs, got {len(box)}")
    for lo, hi in box:
        if not 0.0 <= lo < hi <= grid.L:
            raise ValidationError(f"box side ({lo}, {hi}) must lie in [0, {grid.L}]")
    return box


@dataclass
class Field:
    """Scalar samples on a grid, optionally constrained to vanish outside a box."""

    grid: Grid
    values: np.ndarray
    support_box: Optional[Box] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridMismatch(f"values of shape {v.shape} do not fit grid {self.grid.shape}")
        if self.support_box is not None:
            self.support_box = _check_box(self.support_box, self.grid)
            v = np.where(self.grid.box_mask(self.support_box), v, 0.0)
        self.values = v

    @property
    def mask(self) -> np.ndarray:
        return self.grid.box_mask(self.support_box)

    def with_values(self, values) -> "Field":
        return Field(self.grid, values, self.support_box)

    def __add__(self, other):
        if isinstance(other, Field):
            _same_grid(self.grid, other.grid)
            return Field(self.grid, self.values + other.values)
        return Field(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            _same_grid(self.grid, other.grid)
            return Field(self.grid, self.values - other.values)
        return Field(self.grid, self.values - other)


@dataclass
class VectorField:
    """n-vector samples; ``values`` has shape ``(n, *grid.shape)``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.dim,) + self.grid.shape:
            raise GridMismatch(f"vector values of shape {v.shape} do not fit grid")
        self.values = v

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values**2, axis=0))

    def __sub__(self, other: "VectorField") -> "VectorField":
        _same_grid(self.grid, other.grid)
        return VectorField(self.grid, self.values - other.values)


def _same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise GridMismatch(f"grid mismatch: {a} vs {b}")


def _pointwise(u) -> tuple[np.ndarray, Grid]:
    if isinstance(u, VectorField):
        return u.magnitude(), u.grid
    return np.abs(u.values), u.grid


def lp_norm(u, p: float = 2.0) -> float:
    """Riemann-sum ``L^p`` norm (vector fields use the Euclidean magnitude)."""
    a, grid = _pointwise(u)
    if p == np.inf:
        return float(np.max(a))
    if p < 1:
        raise ValidationError("p must lie in [1, inf]")
    return float((grid.cell_volume * np.sum(a**p)) ** (1.0 / p))


def lp_error(u, v, p: float = 2.0) -> float:
    return lp_norm(u - v, p)


def inner(u, v) -> float:
    """Grid inner product ``h^n sum u.v`` for scalar or vector fields."""
    _same_grid(u.grid, v.grid)
    return float(u.grid.cell_volume * np.sum(u.values * v.values))


_HEADER = struct.Struct("<qqd")


def write_field_binary(path, u) -> None:
    """Header ``(dim, N, L)`` as ``<q q d`` followed by ``<f8`` values (C order)."""
    g = u.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(g.dim, g.N, g.L))
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def read_field_binary(path, support_box: Optional[Box] = None):
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValidationError(f"{path}: truncated header")
    dim, N, L = _HEADER.unpack_from(data)
    grid = Grid(int(dim), int(N), float(L))
    vals = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    npts = N**dim
    if vals.size == npts:
        return Field(grid, vals.reshape(grid.shape).copy(), support_box)
    if vals.size == dim * npts:
        return VectorField(grid, vals.reshape((dim,) + grid.shape).copy())
    raise ValidationError(f"{path}: {vals.size} values do not match dim={dim}, N={N}")


def write_field_csv(path, u: Field) -> None:
    """Two columns ``x, value`` (1D scalar fields only)."""
    if u.grid.dim != 1 or not isinstance(u, Field):
        raise UnsupportedDim("CSV field export is for 1D scalar fields")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "value"])
        for x, v in zip(u.grid.axis_points, u.values):
            w.writerow([f"{x:.17g}", f"{v:.17g}"])


def read_field_csv(path, L: float) -> Field:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    vals = np.array([float(r[1]) for r in rows[1:]])
    return Field(Grid(1, vals.size, L), vals)
