"""
Minimization of discrete energies ``F(u) = h^n sum f(x, D(g + u))`` over fields
``u`` supported in a sub-box, and sweeps of minimizers across horizons.

The optimizer is limited-memory BFGS with Armijo backtracking. The sufficient
decrease test uses the energy *change* computed pointwise in a cancellation
free form (see :meth:`Energy.density_change`), so line searches stay
meaningful when the energy is flat to machine precision near a minimizer.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .analysis import _map
from .errors import LineSearchFailure, NumericalError, UnresolvedHorizon, ValidationError
from .grid import Box, Field, Grid, VectorField, lp_norm
from .kernels import Kernel, Regime, limit_exponent, scale_kernel
from .operator import OperatorHandle
from .profile import classical_table, riesz_table, symbol_table

__all__ = [
    "Energy", "MinimizeResult", "energy_value", "energy_gradient", "minimize",
    "GammaReport", "gamma_sweep_vanishing", "gamma_sweep_diverging",
    "smallest_ritz_value", "default_datum", "default_omega", "INTEGRANDS",
]

INTEGRANDS = ("PowerNorm", "AnisotropicQuadratic", "WeightedPower")


def _powdiff(b2, a2, p):
    """``|a|^p - |b|^p`` from ``a2 = |a|^2``, ``b2 = |b|^2`` without cancellation."""
    out = np.empty_like(a2)
    pos = b2 > 0
    rel = (a2[pos] - b2[pos]) / b2[pos]
    out[pos] = b2[pos] ** (p / 2) * np.expm1(0.5 * p * np.log1p(rel))
    out[~pos] = a2[~pos] ** (p / 2)
    return out


@dataclass
class Energy:
    """Integrand ``f(x, A)`` plus complementary datum ``g`` and admissible box ``omega``.

    ``PowerNorm``: ``|A|^p / p``. ``AnisotropicQuadratic``: ``A.M(x)A / 2``
    (``M`` of shape ``(n, n)`` or ``(n, n, *grid.shape)``, symmetric positive
    definite). ``WeightedPower``: ``a(x) + c |A|^p``. For ``p < 2`` the norm is
    smoothed to ``sqrt(|A|^2 + eps_reg^2)``.
    """

    integrand: str
    omega: Box
    p: float = 2.0
    g: Optional[Field] = None
    eps_reg: float = 1e-8
    M: Optional[np.ndarray] = None
    a: Optional[np.ndarray] = None
    c: float = 1.0

    def __post_init__(self):
        if self.integrand not in INTEGRANDS:
            raise ValidationError(f"integrand must be one of {INTEGRANDS}, got {self.integrand!r}")
        if not 1.0 < self.p < math.inf:
            raise ValidationError(f"p must lie in (1, inf), got {self.p}")
        if self.integrand == "AnisotropicQuadratic":
            if self.p != 2.0:
                raise ValidationError("AnisotropicQuadratic has p = 2")
            if self.M is None:
                raise ValidationError("AnisotropicQuadratic needs a matrix field M")
            self.M = np.asarray(self.M, dtype=float)
        if self.integrand == "WeightedPower" and not self.c > 0:
            raise ValidationError("WeightedPower needs c > 0")
        if self.eps_reg < 0:
            raise ValidationError("eps_reg must be >= 0")

    @property
    def _eps2(self) -> float:
        return self.eps_reg**2 if self.p < 2.0 else 0.0

    def _matrix(self, grid: Grid) -> np.ndarray:
        n = grid.dim
        M = self.M
        if M.shape == (n, n):
            M = M.reshape((n, n) + (1,) * n)
        if M.shape[:2] != (n, n):
            raise ValidationError(f"M must have leading shape ({n}, {n})")
        return M

    def density(self, A: np.ndarray, grid: Grid) -> np.ndarray:
        """Pointwise ``f(x, A(x))``; ``A`` has shape ``(n, *grid.shape)``."""
        if self.integrand == "AnisotropicQuadratic":
            return 0.5 * np.einsum("i...,ij...,j...->...", A, self._matrix(grid), A)
        a2 = np.sum(A * A, axis=0) + self._eps2
        if self.integrand == "PowerNorm":
            return a2 ** (self.p / 2) / self.p
        return self.weight(grid) + self.c * a2 ** (self.p / 2)

    def density_change(self, A, B, alpha: float, grid: Grid) -> np.ndarray:
        """``f(x, A + alpha B) - f(x, A)`` evaluated without cancellation."""
        if self.integrand == "AnisotropicQuadratic":
            M = self._matrix(grid)
            MB = np.einsum("ij...,j...->i...", M, B)
            return np.sum(alpha * A * MB + 0.5 * alpha * alpha * B * MB, axis=0)
        b2 = np.sum(A * A, axis=0) + self._eps2
        a2 = b2 + np.sum(2 * alpha * A * B + alpha * alpha * B * B, axis=0)
        a2 = np.maximum(a2, 0.0)
        d = _powdiff(b2, a2, self.p)
        return d / self.p if self.integrand == "PowerNorm" else self.c * d

    def flux(self, A: np.ndarray, grid: Grid) -> np.ndarray:
        """``partial_A f(x, A)``."""
        if self.integrand == "AnisotropicQuadratic":
            return np.einsum("ij...,j...->i...", self._matrix(grid), A)
        a2 = np.sum(A * A, axis=0) + self._eps2
        scale = a2 ** (self.p / 2 - 1) if self.p != 2 else np.ones_like(a2)
        if self.integrand == "WeightedPower":
            scale = self.c * self.p * scale
        return scale * A

    def weight(self, grid: Grid) -> np.ndarray:
        if self.a is None:
            return np.zeros(grid.shape)
        return np.broadcast_to(np.asarray(self.a, dtype=float), grid.shape)

    def offset(self, grid: Grid) -> float:
        """``int a dx`` (WeightedPower), reported separately from the gradient part."""
        if self.integrand != "WeightedPower":
            return 0.0
        return float(grid.cell_volume * np.sum(self.weight(grid)))

    def growth(self, grid: Grid) -> tuple[float, float]:
        """Constants ``(c, C)`` with ``c|A|^p - C <= f <= C(1 + |A|^p)``."""
        if self.integrand == "PowerNorm":
            return 1.0 / self.p, 1.0 / self.p + self._eps2 ** (self.p / 2)
        if self.integrand == "AnisotropicQuadratic":
            M = np.moveaxis(np.broadcast_to(self._matrix(grid), (grid.dim, grid.dim) + grid.shape),
                            (0, 1), (-2, -1))
            ev = np.linalg.eigvalsh(M)
            return 0.5 * float(ev.min()), 0.5 * float(ev.max())
        w = self.weight(grid)
        return self.c, max(float(np.max(np.abs(w))), self.c) + self.c * self._eps2 ** (self.p / 2)

    def datum(self, grid: Grid) -> np.ndarray:
        if self.g is None:
            return np.zeros(grid.shape)
        if self.g.grid != grid:
            raise ValidationError("datum g lives on a different grid")
        return self.g.values

    def to_dict(self) -> dict:
        return {"integrand": self.integrand, "p": self.p, "omega": [list(s) for s in self.omega],
                "eps_reg": self.eps_reg, "c": self.c}


def _total_gradient(e: Energy, u_inner: Field, op: OperatorHandle) -> np.ndarray:
    grid = op.grid
    return op.gradient(Field(grid, e.datum(grid) + u_inner.values)).values


def energy_value(e: Energy, u_inner: Field, op: OperatorHandle) -> float:
    """``h^n sum f(x, D(g + u_inner))`` over the whole torus."""
    A = _total_gradient(e, u_inner, op)
    return float(op.grid.cell_volume * np.sum(e.density(A, op.grid)))


def energy_gradient(e: Energy, u_inner: Field, op: OperatorHandle) -> Field:
    """``L^2`` gradient ``-div(partial_A f(x, D(g + u)))`` restricted to ``omega``."""
    grid = op.grid
    A = _total_gradient(e, u_inner, op)
    div = op.divergence(VectorField(grid, e.flux(A, grid))).values
    return Field(grid, -div, e.omega)


@dataclass
class MinimizeResult:
    u_star: Field
    energy_value: float
    grad_norm: float
    iterations: int
    converged: bool
    line_search_failures: int
    grad_tol: float = 0.0
    decrements: list = field(default_factory=list, repr=False)
    message: str = ""

    def to_dict(self) -> dict:
        return {"energy_value": self.energy_value, "grad_norm": self.grad_norm,
                "iterations": self.iterations, "converged": self.converged,
                "line_search_failures": self.line_search_failures, "grad_tol": self.grad_tol,
                "message": self.message}


class _Problem:
    """Energy restricted to the masked variables, with cached D(g + u)."""

    def __init__(self, e: Energy, op: OperatorHandle):
        self.e = e
        self.op = op
        self.grid = op.grid
        self.mask = self.grid.box_mask(e.omega)
        self.vol = self.grid.cell_volume
        self.g = e.datum(self.grid)

    def embed(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.grid.shape)
        out[self.mask] = x
        return out

    def grad_field(self, values: np.ndarray) -> np.ndarray:
        return self.op.gradient(Field(self.grid, values)).values

    def value(self, A) -> float:
        return float(self.vol * np.sum(self.e.density(A, self.grid)))

    def gradient(self, A) -> np.ndarray:
        div = self.op.divergence(VectorField(self.grid, self.e.flux(A, self.grid))).values
        return -div[self.mask]

    def dot(self, a, b) -> float:
        return float(self.vol * np.dot(a, b))


def minimize(e: Energy, op: OperatorHandle, init: Optional[Field] = None,
             max_iter: int = 500, grad_tol: Optional[float] = None, memory: int = 10,
             c1: float = 1e-4, max_shrinks: int = 40) -> MinimizeResult:
    """L-BFGS on the variables inside ``omega``, Armijo backtracking (shrink 1/2).

    Stops when the ``L^2`` norm of the masked gradient is at most ``grad_tol``
    (default ``1e-8 max(1, initial norm)``) or after ``max_iter`` iterations. A
    line search that needs more than ``max_shrinks`` halvings (after one
    restart from steepest descent) ends the run with ``converged=False``.
    """
    prob = _Problem(e, op)
    grid = prob.grid
    if init is None:
        x = np.zeros(int(prob.mask.sum()))
    else:
        if init.grid != grid:
            raise ValidationError("init lives on a different grid")
        if np.any(init.values[~prob.mask] != 0.0):
            raise ValidationError("init must vanish outside omega")
        x = init.values[prob.mask].astype(float)
    A = prob.grad_field(prob.g + prob.embed(x))
    gx = prob.gradient(A)
    gnorm = math.sqrt(prob.dot(gx, gx))
    tol = grad_tol if grad_tol is not None else 1e-8 * max(1.0, gnorm)
    pairs: deque = deque(maxlen=memory)
    decrements = []
    failures = 0
    it = 0
    message = "converged"
    while gnorm > tol:
        if it >= max_iter:
            message = "max_iter reached"
            break
        d = _two_loop(gx, pairs, prob)
        step = None
        for attempt in range(2):
            slope = prob.dot(gx, d)
            if not slope < 0:
                pairs.clear()
                d = -gx
                slope = -gnorm * gnorm
            alpha = 1.0 if pairs else min(1.0, 1.0 / gnorm)
            B = prob.grad_field(prob.embed(d))
            for _ in range(max_shrinks + 1):
                change = prob.vol * float(np.sum(e.density_change(A, B, alpha, grid)))
                if change <= c1 * alpha * slope and change < 0:
                    step = (alpha, change, B)
                    break
                alpha *= 0.5
            if step is not None:
                break
            failures += 1
            if attempt == 0 and pairs:
                pairs.clear()
                d = -gx
                continue
            break
        if step is None:
            message = str(LineSearchFailure(
                f"no sufficient decrease after {max_shrinks} step halvings"))
            break
        alpha, change, B = step
        s = alpha * d
        x = x + s
        A = A + alpha * B
        g_new = prob.gradient(A)
        y = g_new - gx
        sy = prob.dot(s, y)
        if sy > 1e-14 * math.sqrt(prob.dot(s, s) * prob.dot(y, y)):
            pairs.append((s, y, 1.0 / sy))
        gx = g_new
        gnorm = math.sqrt(prob.dot(gx, gx))
        decrements.append(change)
        it += 1
        if it % 50 == 0:
            # refresh the cached gradient field against accumulated rounding
            A = prob.grad_field(prob.g + prob.embed(x))
    u_star = Field(grid, prob.embed(x), e.omega)
    return MinimizeResult(u_star, prob.value(prob.grad_field(prob.g + prob.embed(x))),
                          gnorm, it, bool(gnorm <= tol), failures, tol, decrements, message)


def _two_loop(gx, pairs, prob: _Problem) -> np.ndarray:
    q = gx.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * prob.dot(s, q)
        alphas.append(a)
        q -= a * y
    if pairs:
        s, y, rho = pairs[-1]
        q *= prob.dot(s, y) / prob.dot(y, y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * prob.dot(y, q)
        q += (a - b) * s
    return -q


def smallest_ritz_value(op: OperatorHandle, omega: Box, tol: float = 1e-10) -> float:
    """Smallest eigenvalue of ``u -> -div D u`` restricted to fields supported in ``omega``.

    Positive exactly when the discrete Poincare inequality holds on ``omega``.
    """
    grid = op.grid
    mask = grid.box_mask(omega)
    m = int(mask.sum())

    def apply(v):
        full = np.zeros(grid.shape)
        full[mask] = np.ravel(v)
        return -op.divergence(op.gradient(Field(grid, full))).values[mask]

    lin = LinearOperator((m, m), matvec=apply, dtype=float)
    if m <= 400:
        dense = np.column_stack([apply(col) for col in np.eye(m)])
        return float(np.linalg.eigvalsh(0.5 * (dense + dense.T))[0])
    v0 = np.ones(m)
    vals = eigsh(lin, k=1, which="SA", tol=tol, v0=v0, return_eigenvectors=False)
    return float(vals[0])


def default_omega(grid: Grid) -> Box:
    """Middle half of the box along every axis."""
    return tuple((grid.L / 4, 3 * grid.L / 4) for _ in range(grid.dim))


def default_datum(grid: Grid) -> Field:
    """Smooth low-mode complementary datum."""
    x = grid.coords()
    L = grid.L
    vals = np.sin(2 * math.pi * x[0] / L) + 0.5 * np.cos(4 * math.pi * x[0] / L)
    if grid.dim == 2:
        vals = vals + 0.75 * np.cos(2 * math.pi * (x[0] + 2 * x[1]) / L)
    return Field(grid, vals)


@dataclass
class GammaReport:
    regime: str
    delta_list: list
    distances: list
    energies: list
    reference_energy: float
    energy_gaps: list
    iterations: list
    converged: list
    reference: dict
    flags: list = field(default_factory=list)
    s_inf: Optional[float] = None

    def to_dict(self) -> dict:
        return {"regime": self.regime, "delta_list": list(self.delta_list),
                "distances": list(self.distances), "energies": list(self.energies),
                "reference_energy": self.reference_energy,
                "energy_gaps": list(self.energy_gaps), "iterations": list(self.iterations),
                "converged": list(self.converged), "reference": self.reference,
                "flags": list(self.flags), "s_inf": self.s_inf}

    def csv_rows(self):
        return [("delta", "distance", "energy", "iterations", "converged")] + [
            (d, r, en, it, int(c)) for d, r, en, it, c in zip(
                self.delta_list, self.distances, self.energies, self.iterations, self.converged)]


def _sweep(regime: Regime, kernel: Kernel, e: Energy, grid: Grid, delta_list,
           reference_table, solver_opts, method, s_inf=None) -> GammaReport:
    opts = {"max_iter": 5000}
    opts.update(solver_opts or {})
    ref = minimize(e, OperatorHandle(reference_table), **opts)

    def one(d):
        op = OperatorHandle(symbol_table(scale_kernel(kernel, d, regime), grid, method))
        try:
            return minimize(e, op, **opts), None
        except NumericalError as exc:  # flagged per delta, the sweep goes on
            return None, f"delta={d}: {exc}"

    deltas = [float(d) for d in delta_list]
    results = _map(one, deltas)
    dist, en, gaps, its, conv, flags = [], [], [], [], [], []
    for d, (res, err) in zip(deltas, results):
        if res is None:
            flags.append(err)
            dist.append(math.nan); en.append(math.nan); gaps.append(math.nan)
            its.append(0); conv.append(False)
            continue
        if not res.converged:
            flags.append(f"delta={d}: {res.message}")
        dist.append(lp_norm(res.u_star - ref.u_star, 2))
        en.append(res.energy_value)
        gaps.append(abs(res.energy_value - ref.energy_value))
        its.append(res.iterations)
        conv.append(res.converged)
    if not ref.converged:
        flags.append(f"reference: {ref.message}")
    return GammaReport(regime.value, deltas, dist, en, ref.energy_value, gaps, its, conv,
                       ref.to_dict(), flags, s_inf)


def gamma_sweep_vanishing(kernel: Kernel, e: Energy, delta_list: Sequence[float], grid: Grid,
                          solver_opts: Optional[dict] = None, method: str = "auto") -> GammaReport:
    """Minimizers for each delta versus the local (classical gradient) minimizer."""
    for d in delta_list:
        if d * kernel.support_radius < 4 * grid.h:
            raise UnresolvedHorizon(f"delta={d} is below 4h={4 * grid.h:.4g}")
    return _sweep(Regime.Vanishing, kernel, e, grid, delta_list, classical_table(grid),
                  solver_opts, method)


def gamma_sweep_diverging(kernel: Kernel, e: Energy, delta_list: Sequence[float], grid: Grid,
                          solver_opts: Optional[dict] = None, method: str = "auto",
                          s_inf: Optional[float] = None) -> GammaReport:
    """Minimizers for each delta versus the Riesz minimizer with exponent ``s_inf``."""
    if s_inf is None:
        s_inf = limit_exponent(kernel)[1]
    return _sweep(Regime.Diverging, kernel, e, grid, delta_list, riesz_table(grid, s_inf),
                  solver_opts, method, s_inf)
