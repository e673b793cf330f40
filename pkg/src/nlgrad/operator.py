"""
Spectral realization of the scaled nonlocal gradient on the periodic grid.

Every operator here is a Fourier multiplier: ``D`` multiplies by
``2 pi i xi q_hat(xi)``, its negative adjoint ``div`` by the same symbol
contracted with a vector field, ``Q`` by ``q_hat`` and ``P`` by ``1/q_hat``.
:func:`direct_gradient_oracle` evaluates the defining singular integral
instead and is used to validate the spectral route.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import quadrature
from .errors import GridMismatch, HorizonTooLarge, SingularSymbol, ValidationError
from .grid import Field, Grid, VectorField
from .kernels import ScaledKernel
from .profile import SymbolTable, classical_table, riesz_table, symbol_table

__all__ = [
    "OperatorHandle", "make_operator", "apply_gradient", "apply_divergence",
    "classical_gradient", "riesz_gradient", "apply_Q", "apply_P", "QuadParams",
    "direct_gradient_oracle",
]

SINGULAR_THRESHOLD = 1e-300


class OperatorHandle:
    """Spectral operators for one :class:`SymbolTable`.

    Applies on one handle are serialized by an internal lock; distinct
    handles share nothing mutable.
    """

    def __init__(self, table: SymbolTable):
        self.table = table
        self.grid = table.grid
        self._lock = threading.Lock()

    @property
    def warnings(self) -> tuple:
        return self.table.warnings

    def _fwd(self, values):
        return np.fft.rfftn(values, axes=tuple(range(-self.grid.dim, 0)))

    def _inv(self, coeffs):
        g = self.grid
        return np.fft.irfftn(coeffs, s=g.shape, axes=tuple(range(-g.dim, 0)))

    def _check(self, u):
        if u.grid != self.grid:
            raise GridMismatch(f"field grid {u.grid} != operator grid {self.grid}")

    def gradient(self, u: Field) -> VectorField:
        self._check(u)
        with self._lock:
            uh = self._fwd(u.values)
            out = self._inv(self.table.grad_symbol * uh[None])
        return VectorField(self.grid, out)

    def divergence(self, psi: VectorField) -> Field:
        self._check(psi)
        with self._lock:
            ph = self._fwd(psi.values)
            out = self._inv(np.sum(self.table.grad_symbol * ph, axis=0))
        return Field(self.grid, out)

    def Q(self, u: Field) -> Field:
        self._check(u)
        q = self.table.q_hat
        if not np.all(np.isfinite(q)):
            raise SingularSymbol("q_hat is infinite at some frequency")
        with self._lock:
            out = self._inv(q * self._fwd(u.values))
        return Field(self.grid, out)

    def P(self, v: Field) -> Field:
        self._check(v)
        q = self.table.q_hat
        if np.any(~(q > SINGULAR_THRESHOLD)) or not np.all(np.isfinite(q)):
            raise SingularSymbol("q_hat vanishes (or is infinite) at some grid frequency")
        with self._lock:
            out = self._inv(self._fwd(v.values) / q)
        return Field(self.grid, out)


def make_operator(sk: ScaledKernel, grid: Grid, method: str = "auto") -> OperatorHandle:
    return OperatorHandle(symbol_table(sk, grid, method))


def apply_gradient(op: OperatorHandle, u: Field) -> VectorField:
    return op.gradient(u)


def apply_divergence(op: OperatorHandle, psi: VectorField) -> Field:
    return op.divergence(psi)


def apply_Q(op: OperatorHandle, u: Field) -> Field:
    return op.Q(u)


def apply_P(op: OperatorHandle, v: Field) -> Field:
    return op.P(v)


def classical_gradient(u: Field) -> VectorField:
    return OperatorHandle(classical_table(u.grid)).gradient(u)


def riesz_gradient(u: Field, s: float) -> VectorField:
    """Riesz fractional gradient with symbol ``2 pi i xi Qhat_s(xi)`` (unnormalized kernel)."""
    return OperatorHandle(riesz_table(u.grid, s)).gradient(u)


@dataclass(frozen=True)
class QuadParams:
    """Panels for :func:`direct_gradient_oracle`.

    Radial panels halve geometrically from the horizon down to
    ``r_min = r_min_factor * delta``; each refinement level divides ``r_min``
    by ``2^(1/(1-sigma))``, which halves the neglected inner mass.
    """

    nodes_per_panel: int = 32
    ratio: float = 0.5
    r_min_factor: float = 1e-6
    angular_nodes: int = 64
    refine: int = 0

    def r_min(self, delta: float, sigma: float) -> float:
        return self.r_min_factor * delta * 2.0 ** (-self.refine / (1.0 - sigma))


def _radial_nodes(sk: ScaledKernel, quad: QuadParams):
    delta = sk.support_radius
    r_min = quad.r_min(delta, sk.base.sigma)
    edges = [delta]
    while edges[-1] * quad.ratio > r_min:
        edges.append(edges[-1] * quad.ratio)
    edges.append(r_min)
    return quadrature.panel_rule(np.array(edges[::-1]), quad.nodes_per_panel)


def _trig_eval_1d(coeffs: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """Evaluate the real trigonometric interpolant (rfft coefficients) at ``points``.

    The Nyquist term enters as a cosine, so the interpolant is real.
    """
    N, L = grid.N, grid.L
    half = N // 2
    w = np.full(half + 1, 2.0)
    w[0] = 1.0
    w[half] = 1.0
    k = np.arange(half + 1)
    ph = np.exp(2j * math.pi * np.multiply.outer(points, k) / L)
    return np.real(ph @ (w * coeffs)) / N


def direct_gradient_oracle(u: Field, sk: ScaledKernel, quad: Optional[QuadParams] = None,
                           targets=None) -> VectorField:
    """Nonlocal gradient by quadrature of the defining integral.

    In 1D this is ``int_0^delta (u(x+r) - u(x-r))/r rho_bar(r) dr``; in 2D
    ``int_0^delta rho_bar(r) int_0^2pi (u(x + r th) - u(x - r th))/2 th dth dr``
    with the trapezoid rule in the angle. ``u`` is evaluated off-grid through its
    trigonometric interpolant. ``targets`` optionally restricts the output to
    a boolean mask of grid points (other entries are NaN).
    """
    quad = quad or QuadParams()
    grid = u.grid
    if sk.n != grid.dim:
        raise GridMismatch("kernel and grid dimensions differ")
    if not sk.base.compact or sk.support_radius >= grid.L / 2:
        raise HorizonTooLarge(
            f"horizon {sk.support_radius:.4g} does not fit inside half the torus ({grid.L / 2:g})")
    coeffs = np.fft.rfftn(u.values)
    r, w = _radial_nodes(sk, quad)
    wr = w * sk.rho_bar(r)
    mask = np.ones(grid.shape, bool) if targets is None else np.asarray(targets, bool)
    if mask.shape != grid.shape:
        raise ValidationError("targets mask must match the grid shape")
    x = np.stack([c[mask] for c in grid.coords()], axis=-1)
    out = np.full((grid.dim,) + grid.shape, np.nan)
    if grid.dim == 1:
        acc = np.zeros(x.shape[0])
        for lo in range(0, r.size, 64):
            rr = r[lo:lo + 64]
            plus = _trig_eval_1d(coeffs, grid, x[:, :1] + rr[None, :])
            minus = _trig_eval_1d(coeffs, grid, x[:, :1] - rr[None, :])
            acc += (plus - minus) @ (wr[lo:lo + 64] / rr)
        out[0][mask] = acc
        return VectorField(grid, out)
    # 2D: shifted copies u(. + r th) on the whole grid via phase factors, which
    # coincide with the trigonometric interpolant at grid points
    m = quad.angular_nodes
    th = 2.0 * math.pi * np.arange(m) / m
    dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
    f0, f1 = grid.freqs
    acc = np.zeros((2,) + grid.shape)
    for rj, wj in zip(r, wr):
        phase = 2.0 * math.pi * rj * (dirs[:, 0, None, None] * f0[None] + dirs[:, 1, None, None] * f1[None])
        shifted = np.fft.irfftn(coeffs[None] * 2j * np.sin(phase), s=grid.shape, axes=(1, 2))
        acc += wj * (math.pi / m) * np.einsum("ak,aij->kij", dirs, shifted)
    out[:, mask] = acc[:, mask]
    return VectorField(grid, out)
