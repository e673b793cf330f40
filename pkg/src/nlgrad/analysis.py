"""
Experiment drivers: localization and fractionalization rates, Poincare ratios
and multiplier scans.

Each driver returns a small report dataclass with ``to_dict`` (JSON-ready) and
``csv_rows``. Work over a delta list can be fanned out to threads
(``NLGRAD_THREADS``); results are always assembled in delta order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import UnresolvedHorizon, ValidationError
from .grid import Field, Grid, lp_norm
from .kernels import Kernel, Regime, l1_distance_to_limit, limit_exponent, scale_kernel
from .operator import OperatorHandle, apply_gradient, classical_gradient, riesz_gradient
from .profile import MultiplierScan, multiplier_scan, symbol_table

__all__ = [
    "TestFunction", "smooth_bump", "holder_bump", "RateReport", "PoincareReport",
    "MultiplierReport", "localization_rate", "fractionalization_error",
    "poincare_scan", "multiplier_uniformity", "hessian_lipschitz", "fit_slope",
    "random_samples", "sobolev_norm", "thread_count",
]


def thread_count() -> int:
    env = os.environ.get("NLGRAD_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"NLGRAD_THREADS must be an integer, got {env!r}")
    return min(4, os.cpu_count() or 1)


def _map(fn, items):
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# test functions -----------------------------------------------------------

def _radius_sq(grid: Grid, center) -> np.ndarray:
    c = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    return sum((x - ci) ** 2 for x, ci in zip(grid.coords(), c))


def smooth_bump(grid: Grid, center=None, radius: float = 3.0,
                concentration: float = 3.0) -> Field:
    """``exp(a (1 - 1/(1 - |x-c|^2/R^2)))`` inside the ball, 0 outside.

    Larger ``a`` flattens the approach to the edge of the support, which keeps
    the higher derivatives small relative to the third one.
    """
    center = grid.L / 2 if center is None else center
    t = _radius_sq(grid, center) / radius**2
    inside = t < 1.0
    vals = np.zeros(grid.shape)
    vals[inside] = np.exp(concentration * (1.0 - 1.0 / (1.0 - t[inside])))
    return Field(grid, vals)


def holder_bump(grid: Grid, alpha: float, center=None, radius: float = 3.0,
                concentration: float = 3.0) -> Field:
    """Smooth bump times ``|x-c|^(1+alpha)``: C^{1,alpha} and no better at ``c``."""
    center = grid.L / 2 if center is None else center
    chi = smooth_bump(grid, center, radius, concentration).values
    return Field(grid, chi * _radius_sq(grid, center) ** ((1.0 + alpha) / 2.0))


@dataclass(frozen=True)
class TestFunction:
    """``kind`` is ``SmoothBump``, ``HolderBump`` (uses ``alpha``) or ``W1pSample``."""

    __test__ = False  # not a pytest class

    kind: str = "SmoothBump"
    alpha: float = 0.5
    radius: float = 3.0
    center: Optional[float] = None
    concentration: float = 3.0

    def field(self, grid: Grid) -> Field:
        kind = self.kind.lower()
        args = (self.center, self.radius, self.concentration)
        if kind == "smoothbump":
            return smooth_bump(grid, *args)
        if kind == "holderbump":
            if not 0.0 < self.alpha < 1.0:
                raise ValidationError("HolderBump needs alpha in (0, 1)")
            return holder_bump(grid, self.alpha, *args)
        if kind == "w1psample":
            # Lipschitz tent: W^{1,p} for every p, gradient jumps at the centre
            return holder_bump(grid, 0.0, *args)
        raise ValidationError(f"unknown test function {self.kind!r}")

    def describe(self) -> str:
        if self.kind.lower() == "holderbump":
            return f"HolderBump(alpha={self.alpha}, radius={self.radius})"
        return f"{self.kind}(radius={self.radius})"


def _spectral_derivative(values: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    coeffs = np.fft.rfftn(values)
    xi = grid.freqs[axis]
    pref = np.broadcast_to(2j * math.pi * xi, grid.spectral_shape).copy()
    pref[grid.nyquist_mask(axis)] = 0.0
    return np.fft.irfftn(pref * coeffs, s=grid.shape, axes=tuple(range(grid.dim)))


def hessian_lipschitz(u: Field) -> float:
    """Lipschitz constant of the (spectral) Hessian from grid differences.

    Largest ``|H(x + h e_k) - H(x)| / h`` over neighbours, Frobenius norm.
    """
    g = u.grid
    hess = [[_spectral_derivative(_spectral_derivative(u.values, g, i), g, j)
             for j in range(g.dim)] for i in range(g.dim)]
    best = 0.0
    for k in range(g.dim):
        sq = sum((np.roll(hess[i][j], -1, axis=k) - hess[i][j]) ** 2
                 for i in range(g.dim) for j in range(g.dim))
        best = max(best, float(np.sqrt(sq.max())) / g.h)
    return best


# reports --------------------------------------------------------------------

def fit_slope(deltas, errors, keep=None) -> float:
    """Least-squares slope of ``log(error)`` against ``log(delta)``."""
    d = np.asarray(deltas, dtype=float)
    e = np.asarray(errors, dtype=float)
    if keep is not None:
        d, e = d[keep], e[keep]
    if d.size < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(d), np.log(e), 1)
    return float(slope)


@dataclass
class RateReport:
    delta_list: list
    error_list: list
    fitted_slope: float
    norm: str
    subject: str
    floor: float = 0.0
    fit_mask: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "delta_list": list(self.delta_list), "error_list": list(self.error_list),
            "fitted_slope": self.fitted_slope, "norm": self.norm, "subject": self.subject,
            "floor": self.floor, "fit_mask": list(self.fit_mask), "extras": self.extras,
            "warnings": list(self.warnings),
        }

    def csv_rows(self):
        return [("delta", "error")] + list(zip(self.delta_list, self.error_list))

    def strictly_decreasing_above_floor(self, factor: float = 10.0) -> bool:
        """Errors (in list order) decrease strictly until they reach ``factor * floor``."""
        e = self.error_list
        for a, b in zip(e, e[1:]):
            if a <= factor * self.floor:
                break
            if not b < a:
                return False
        return True


def _norm_label(p) -> str:
    return "Linf" if p == math.inf else f"Lp({p:g})"


def _fit_mask(errors, floor) -> list:
    return [bool(e > 10.0 * floor) for e in errors]


def localization_rate(kernel: Kernel, test_fn: TestFunction, delta_list: Sequence[float],
                      grid: Grid, p: float = math.inf, method: str = "auto") -> RateReport:
    """``||D_delta u - grad u||_p`` for the vanishing-horizon scaling and its log-log slope."""
    deltas = [float(d) for d in delta_list]
    for d in deltas:
        if d * kernel.support_radius < 4 * grid.h:
            raise UnresolvedHorizon(f"delta={d} is below 4h={4 * grid.h:.4g} on this grid")
    u = test_fn.field(grid)
    ref = classical_gradient(u)

    def one(d):
        op = OperatorHandle(symbol_table(scale_kernel(kernel, d, Regime.Vanishing), grid, method))
        return lp_norm(apply_gradient(op, u) - ref, p)

    errors = _map(one, deltas)
    floor = 1e-12 * lp_norm(ref, p)
    mask = _fit_mask(errors, floor)
    extras = {"lip_hessian": hessian_lipschitz(u), "grid": grid.to_dict()}
    extras["bound_ratio"] = [e / (d * d * extras["lip_hessian"]) for d, e in zip(deltas, errors)]
    return RateReport(deltas, errors, fit_slope(deltas, errors, mask), _norm_label(p),
                      test_fn.describe(), floor, mask, extras)


def fractionalization_error(kernel: Kernel, u: Field, delta_list: Sequence[float],
                            p: float = 2.0, s_inf: Optional[float] = None,
                            method: str = "auto") -> RateReport:
    """``||D_delta u - D^{s_inf} u||_p`` along a diverging-horizon delta list."""
    deltas = [float(d) for d in delta_list]
    if any(b <= a for a, b in zip(deltas, deltas[1:])):
        raise ValidationError("delta_list must be increasing")
    if s_inf is None:
        s_inf = limit_exponent(kernel)[1]
    grid = u.grid
    ref = riesz_gradient(u, s_inf)

    def one(d):
        op = OperatorHandle(symbol_table(scale_kernel(kernel, d, Regime.Diverging), grid, method))
        return lp_norm(apply_gradient(op, u) - ref, p)

    errors = _map(one, deltas)
    # spectral operators agree to roundoff when the symbols coincide
    floor = 1e-12 * lp_norm(ref, p)
    mask = _fit_mask(errors, floor)
    extras = {"s_inf": s_inf, "grid": grid.to_dict()}
    if kernel.compact:
        w1p = lp_norm(u, p) + lp_norm(classical_gradient(u), p)
        l1 = [l1_distance_to_limit(kernel, d, s_inf) for d in deltas]
        extras["l1_distance"] = l1
        extras["empirical_constant"] = max(e / (w1p * l) for e, l in zip(errors, l1))
    return RateReport(deltas, errors, fit_slope(deltas, errors, mask), _norm_label(p),
                      "fractionalization", floor, mask, extras)


# Poincare -----------------------------------------------------------------------

def random_samples(grid: Grid, omega, samples: int, seed: int = 42) -> list:
    """Band-limited noise (modes <= N/8) times a smooth bump filling ``omega``."""
    omega = tuple(tuple(map(float, side)) for side in omega)
    rng = np.random.default_rng(seed)
    chi = np.ones(grid.shape)
    for x, (lo, hi) in zip(grid.coords(), omega):
        t = (2.0 * (x - lo) / (hi - lo) - 1.0) ** 2
        inside = t < 1.0
        part = np.zeros(grid.shape)
        part[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside]))
        chi *= part
    kmax = grid.N // 8
    out = []
    while len(out) < samples:
        coeffs = np.zeros(grid.spectral_shape, dtype=complex)
        low = np.ones(grid.spectral_shape, dtype=bool)
        for k in grid.wavenumbers:
            low &= np.abs(k) <= kmax
        nlow = int(low.sum())
        coeffs[low] = rng.standard_normal(nlow) + 1j * rng.standard_normal(nlow)
        noise = np.fft.irfftn(coeffs, s=grid.shape, axes=tuple(range(grid.dim)))
        vals = chi * noise
        if np.max(np.abs(vals)) == 0.0:
            continue  # degenerate sample, ratio undefined
        out.append(Field(grid, vals, omega))
    return out


def sobolev_norm(u: Field, sigma: float) -> float:
    """Spectral ``H^sigma`` norm with weight ``<xi>^sigma = (1 + |xi|^2)^(sigma/2)``."""
    g = u.grid
    coeffs = np.fft.fftn(u.values)
    xi2 = sum(np.meshgrid(*([np.fft.fftfreq(g.N, g.h) ** 2] * g.dim), indexing="ij"))
    weight = (1.0 + xi2) ** sigma
    return float(math.sqrt(g.cell_volume * np.sum(weight * np.abs(coeffs) ** 2) / g.N**g.dim))


@dataclass
class PoincareReport:
    delta_list: list
    worst_ratio: list
    sample_description: str
    sup_ratio: float
    norm: str
    regime: str

    def variation(self) -> float:
        return max(self.worst_ratio) / min(self.worst_ratio)

    def to_dict(self) -> dict:
        return {"delta_list": list(self.delta_list), "worst_ratio": list(self.worst_ratio),
                "sample_description": self.sample_description, "sup_ratio": self.sup_ratio,
                "variation": self.variation(), "norm": self.norm, "regime": self.regime}

    def csv_rows(self):
        return [("delta", "worst_ratio")] + list(zip(self.delta_list, self.worst_ratio))


def poincare_scan(kernel: Kernel, regime, delta_list: Sequence[float], grid: Grid, omega,
                  samples: int = 32, seed: int = 42, p: float = 2.0,
                  method: str = "auto") -> PoincareReport:
    """Worst ``||u||_* / ||D_delta u||_p`` over seeded random fields supported in ``omega``.

    ``||.||_*`` is the spectral ``H^sigma`` norm for ``p = 2`` and the plain
    ``L^p`` norm otherwise.
    """
    if samples < 16:
        raise ValidationError("poincare_scan needs at least 16 samples")
    regime = Regime.parse(regime)
    fields = random_samples(grid, omega, samples, seed)
    if p == 2:
        tops = [sobolev_norm(u, kernel.sigma) for u in fields]
        norm = f"H^{kernel.sigma:g}"
    else:
        tops = [lp_norm(u, p) for u in fields]
        norm = f"L^{p:g}"

    def one(d):
        op = OperatorHandle(symbol_table(scale_kernel(kernel, d, regime), grid, method))
        return max(t / lp_norm(apply_gradient(op, u), p) for t, u in zip(tops, fields))

    deltas = [float(d) for d in delta_list]
    worst = _map(one, deltas)
    desc = f"{samples} band-limited samples (modes <= N/8) x bump on {omega}, seed {seed}"
    return PoincareReport(deltas, worst, desc, float(max(worst)), norm, regime.value)


# multipliers --------------------------------------------------------------------

@dataclass
class MultiplierReport:
    scans: list
    bounds: dict
    passed: bool

    def to_dict(self) -> dict:
        return {"scans": [s.to_dict() for s in self.scans],
                "bounds": {f"{k[0]:g},{k[1]:g}": v for k, v in self.bounds.items()},
                "passed": self.passed}

    def csv_rows(self):
        return [("d1", "d2", "max_ratio", "max_scaled_derivative")] + [
            (s.d1, s.d2, s.max_ratio, s.max_scaled_derivative) for s in self.scans]


def multiplier_uniformity(kernel: Kernel, delta_pairs, xi_max: float = 1e3,
                          bounds: Optional[dict] = None, points: int = 2000) -> MultiplierReport:
    """:func:`multiplier_scan` over pairs, checked against optional bounds ``{(d1, d2): C}``."""
    xi = np.geomspace(1e-3, xi_max, points)
    scans: list[MultiplierScan] = [multiplier_scan(kernel, d1, d2, xi) for d1, d2 in delta_pairs]
    bounds = dict(bounds or {})
    ok = all(np.isfinite(s.max_ratio) and np.isfinite(s.max_scaled_derivative) for s in scans)
    for s in scans:
        key = (s.d1, s.d2)
        if key in bounds:
            ok = ok and s.max_ratio <= bounds[key]
    return MultiplierReport(scans, bounds, bool(ok))
