"""
The profile ``Q`` of a kernel and its Fourier transform.

``Qbar(r) = int_r^inf rho_bar(t)/t dt`` and the nonlocal gradient has Fourier
symbol ``2 pi i xi Qhat(xi)``. Swapping the order of integration gives

    Qhat(xi) = (1/n) int rho(x) Lambda_n(2 pi |xi| |x|) dx,

with ``Lambda_1(z) = sin(z)/z`` and ``Lambda_2(z) = 2 J_1(z)/z`` (the
normalized transform of the unit ball). This is what :func:`symbol` evaluates;
:func:`symbol_from_profile` transforms ``Qbar`` directly and is kept as an
independent cross-check.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import special
from scipy.interpolate import CubicSpline

from . import quadrature
from .errors import GridMismatch, QuadratureFailure, ValidationError
from .grid import Grid
from .kernels import Family, Kernel, Regime, ScaledKernel, sphere_area

__all__ = [
    "q_profile", "symbol", "symbol_from_profile", "riesz_symbol",
    "riesz_symbol_quadrature", "ProfileEval", "profile_eval", "MultiplierScan",
    "multiplier_scan", "ball_transform", "SymbolTable", "symbol_table",
    "classical_table", "riesz_table", "scaled_q_hat",
]

TABLE_MIN = 1e-4
TABLE_MAX = 1e5
POINTS_PER_DECADE = 40
LINEAR_STEP = 1.0 / 32.0
LINEAR_MIN = 0.5
LINEAR_MAX = 64.0


def ball_transform(n: int, z):
    """``Lambda_n(z)``: Fourier transform of the unit ball normalized to 1 at 0."""
    z = np.asarray(z, dtype=float)
    if n == 1:
        return np.sinc(z / math.pi)
    small = np.abs(z) < 1e-6
    zz = np.where(small, 1.0, z)
    return np.where(small, 1.0 - z * z / 8.0, 2.0 * special.j1(zz) / zz)


def q_profile(kernel: Kernel, r, order: int = 16):
    """``Qbar(r)`` for ``r > 0`` (array aware)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValidationError("q_profile needs r > 0")
    if kernel.family is Family.Riesz:
        p = kernel.n + kernel.spec.s - 1.0
        return kernel.norm_const * r ** (-p) / p
    flat = r.ravel()
    out = np.zeros_like(flat)
    for i, ri in enumerate(flat):
        if ri >= 1.0:
            continue
        out[i] = _q_profile_one(kernel, ri, order)
    return out.reshape(r.shape)


def _q_profile_one(kernel: Kernel, r: float, order: int) -> float:
    # t = e^v turns rho_bar(t)/t dt into rho_bar(e^v) dv on [r, 1/2] (power laws
    # become exponentials); the cutoff region [1/2, 1] is split in plain t
    mid = max(r, 0.5)

    def integrate(k):
        total = 0.0
        if r < mid:
            a, b = math.log(r), math.log(mid)
            npan = max(2, int(math.ceil((b - a) / 0.25)))
            v, w = quadrature.panel_rule(np.linspace(a, b, npan + 1), k)
            total += float(np.sum(w * kernel.rho_bar(np.exp(v))))
        npan = max(2, int(math.ceil((1.0 - mid) * 64)))
        t, w = quadrature.panel_rule(np.linspace(mid, 1.0, npan + 1), k)
        return total + float(np.sum(w * kernel.rho_bar(t) / t))

    coarse, fine = integrate(order), integrate(order + 8)
    if abs(coarse - fine) > 1e-10 * abs(fine) + 1e-14 * kernel.norm_const:
        raise QuadratureFailure(f"Qbar({r}) did not converge: {coarse} vs {fine}")
    return fine


def riesz_symbol(s: float, n: int, xi, norm: float = 1.0):
    """Closed-form ``Qhat`` of the Riesz kernel ``norm |x|^-(n+s-1)``.

    ``Qbar = norm r^-(n-alpha)/(n+s-1)`` with ``alpha = 1-s``, whose transform is
    ``pi^(n/2-alpha) Gamma(alpha/2)/Gamma((n-alpha)/2) |xi|^-alpha``. Infinite
    at ``xi = 0``.
    """
    xi = np.abs(np.asarray(xi, dtype=float))
    alpha = 1.0 - s
    const = (norm / (n + s - 1.0) * math.pi ** (n / 2.0 - alpha)
             * math.gamma(alpha / 2.0) / math.gamma((n - alpha) / 2.0))
    with np.errstate(divide="ignore"):
        return const * xi ** (-alpha)


def _ball_zeros(n: int, xi: float):
    """Zeros (in t) of ``Lambda_n(2 pi xi t)`` as a callable ``k -> first k``."""
    if n == 1:
        return lambda k: np.arange(1, k + 1) / (2.0 * xi)

    def zeros(k):
        return _j1_zeros(k) / (2.0 * math.pi * xi)

    return zeros


@lru_cache(maxsize=8)
def _j1_zeros(k: int) -> np.ndarray:
    z = special.jn_zeros(1, k)
    z.setflags(write=False)
    return z


def riesz_symbol_quadrature(s: float, n: int, xi: float, tol: float = 1e-12) -> float:
    """``Qhat`` of the unnormalized Riesz kernel by oscillatory quadrature."""
    xi = float(xi)
    if xi <= 0:
        raise ValidationError("riesz_symbol_quadrature needs xi > 0")
    zeros = _ball_zeros(n, xi)
    t1 = float(zeros(1)[0])
    t, w = quadrature.graded_power_rule(t1, s)
    meas = t ** (-s)
    head = float(np.sum(w * meas * ball_transform(n, 2 * math.pi * xi * t)))

    def f(tt):
        return tt ** (-s) * ball_transform(n, 2 * math.pi * xi * tt)

    tail = quadrature.oscillatory_sum(f, zeros, tol=tol)
    return sphere_area(n) / n * (head + tail)


def _direct_symbol(kernel: Kernel, xi: float) -> float:
    t, w = kernel.radial_rule(freq=max(xi, 1.0))
    return sphere_area(kernel.n) / kernel.n * float(
        np.sum(w * ball_transform(kernel.n, 2 * math.pi * xi * t)))


def symbol(kernel: Kernel, xi_mag) -> np.ndarray:
    """``Qhat_rho`` at radii ``xi_mag`` by radial quadrature (no table)."""
    xi = np.abs(np.asarray(xi_mag, dtype=float))
    if kernel.family is Family.Riesz:
        return riesz_symbol(kernel.spec.s, kernel.n, xi, kernel.norm_const)
    flat = xi.ravel()
    out = np.empty_like(flat)
    order = np.argsort(flat)
    bucket = None
    rule = None
    for i in order:
        x = flat[i]
        b = 2.0 ** math.ceil(math.log2(max(x, 1.0)))
        if b != bucket:
            bucket = b
            rule = kernel.radial_rule(freq=b)
        t, w = rule
        out[i] = sphere_area(kernel.n) / kernel.n * float(
            np.sum(w * ball_transform(kernel.n, 2 * math.pi * x * t)))
    return out.reshape(xi.shape)


def symbol_from_profile(kernel: Kernel, xi: float, order: int = 16) -> float:
    """Transform ``Qbar`` directly: cosine transform (n=1) or Hankel-J0 (n=2).

    Slow (every node needs its own ``Qbar``); used as an oracle in tests.
    """
    if not kernel.compact:
        raise ValidationError("symbol_from_profile is for compactly supported kernels")
    n = kernel.n
    xi = float(xi)

    def measure(t):
        return q_profile(kernel, t) * t ** (n - 1)

    t, w = quadrature.radial_rule(measure, kernel.s0, freq=max(xi, 1.0), order=order)
    if n == 1:
        return 2.0 * float(np.sum(w * np.cos(2 * math.pi * xi * t)))
    return 2.0 * math.pi * float(np.sum(w * special.j0(2 * math.pi * xi * t)))


def _table_nodes(hi: float) -> np.ndarray:
    """Log-spaced nodes, refined to a linear step of 1/32 on [1/2, 64].

    The linear stretch resolves the ripples a compact cutoff leaves on
    ``Qhat`` at moderate frequencies.
    """
    npts = int(round(math.log10(hi / TABLE_MIN) * POINTS_PER_DECADE)) + 1
    xs = np.geomspace(TABLE_MIN, hi, npts)
    lin_hi = min(LINEAR_MAX, hi)
    lin = np.arange(LINEAR_MIN, lin_hi + 1e-12, LINEAR_STEP)
    xs = np.unique(np.concatenate([xs, lin]))
    # drop log nodes that crowd a linear one
    keep = np.concatenate([[True], np.diff(xs) > 0.25 * LINEAR_STEP]) | (xs < LINEAR_MIN)
    return xs[keep]


CHUNK_PAD = 24


class ProfileEval:
    """Cached evaluator of ``Qbar`` and ``Qhat`` for one kernel.

    ``Qhat`` is tabulated on fixed nodes in ``[1e-4, 1e5]`` and interpolated by
    cubic splines in log-log, one per decade. Each decade's spline also uses
    ``CHUNK_PAD`` neighbouring nodes on either side, so its values do not
    depend on which other decades have been built (results are independent of
    the query history). Below the table ``Qhat`` is evaluated directly; above
    it the power-law wedge ``rho_bar(1/xi)/xi^n`` is matched to the value and
    log-slope at the top of the table.
    """

    nodes = _table_nodes(TABLE_MAX)

    def __init__(self, kernel: Kernel):
        self.kernel = kernel
        self._lock = threading.Lock()
        self._chunks: dict = {}
        self._values: dict = {}

    def q_bar(self, r):
        return q_profile(self.kernel, r)

    def _chunk(self, k: int):
        with self._lock:
            spline = self._chunks.get(k)
            if spline is not None:
                return spline
            xs = self.nodes
            lo = int(np.searchsorted(xs, 10.0**k))
            hi = int(np.searchsorted(xs, 10.0 ** (k + 1)))
            idx = np.arange(max(lo - CHUNK_PAD, 0), min(hi + CHUNK_PAD, xs.size - 1) + 1)
            missing = [i for i in idx if i not in self._values]
            if missing:
                vals = symbol(self.kernel, xs[missing])
                if np.any(vals <= 0):
                    raise QuadratureFailure("Qhat table has non-positive entries")
                self._values.update(zip(missing, vals))
            vals = np.array([self._values[i] for i in idx])
            spline = CubicSpline(np.log(xs[idx]), np.log(vals))
            self._chunks[k] = spline
            return spline

    def _table(self, xi):
        dec = np.clip(np.floor(np.log10(xi)).astype(int),
                      round(math.log10(TABLE_MIN)), round(math.log10(TABLE_MAX)) - 1)
        out = np.empty_like(xi)
        for k in np.unique(dec):
            sel = dec == k
            out[sel] = np.exp(self._chunk(int(k))(np.log(xi[sel])))
        return out

    def _wedge(self, xi):
        k = self.kernel
        spline = self._chunk(round(math.log10(TABLE_MAX)) - 1)
        lt = math.log(TABLE_MAX)
        log_q_top = float(spline(lt))
        slope_q = float(spline(lt, 1))

        def log_shape(lx):
            return k.log_rho_bar(np.exp(-lx)) - k.n * lx

        d = 1e-4
        slope_w = float((log_shape(np.array(lt + d)) - log_shape(np.array(lt - d))) / (2 * d))
        lx = np.log(xi)
        return np.exp(log_q_top + log_shape(lx) - float(log_shape(np.array(lt)))
                      + (slope_q - slope_w) * (lx - lt))

    def q_hat(self, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        k = self.kernel
        if k.family is Family.Riesz:
            return symbol(k, xi)
        out = np.empty_like(xi)
        low = xi < TABLE_MIN
        high = xi > TABLE_MAX
        mid = ~(low | high)
        if np.any(mid):
            out[mid] = self._table(xi[mid])
        if np.any(low):
            out[low] = symbol(k, xi[low])
        if np.any(high):
            out[high] = self._wedge(xi[high])
        return out


@lru_cache(maxsize=64)
def profile_eval(kernel: Kernel) -> ProfileEval:
    """Shared :class:`ProfileEval` per kernel."""
    return ProfileEval(kernel)


def scaled_q_hat(sk: ScaledKernel, xi, exact: bool = False):
    """``Qhat_{rho_delta}(xi) = c_delta delta^n Qhat(delta xi)``."""
    xi = np.abs(np.asarray(xi, dtype=float))
    base = sk.base
    if base.family is Family.Riesz:
        # closed form; the scaling constants cancel analytically in the Diverging regime
        if sk.regime is Regime.Diverging:
            return riesz_symbol(base.spec.s, base.n, xi, base.norm_const)
        return sk.q_scale * riesz_symbol(base.spec.s, base.n, sk.delta * xi, base.norm_const)
    eta = sk.delta * xi
    vals = symbol(base, eta) if exact else profile_eval(base).q_hat(eta)
    return sk.q_scale * vals


@dataclass(frozen=True)
class MultiplierScan:
    d1: float
    d2: float
    max_ratio: float
    max_scaled_derivative: float
    argmax_xi: float
    xi: np.ndarray = field(repr=False)
    ratio: np.ndarray = field(repr=False)
    note: str = ("first-order derivative check only; "
                 "higher Mihlin orders are not verified numerically")

    def to_dict(self) -> dict:
        return {"d1": self.d1, "d2": self.d2, "max_ratio": self.max_ratio,
                "max_scaled_derivative": self.max_scaled_derivative,
                "argmax_xi": self.argmax_xi, "note": self.note}


def multiplier_scan(kernel: Kernel, d1: float, d2: float, xi_grid) -> MultiplierScan:
    """Sup of ``Qhat(d1 xi)/Qhat(d2 xi)`` and of ``|xi| |m'(xi)|`` on ``xi_grid``.

    ``d2 = 0`` stands for the classical gradient (denominator 1). The
    derivative is a centred difference in ``log xi`` on the (sorted) grid.
    """
    xi = np.sort(np.asarray(xi_grid, dtype=float))
    if np.any(xi <= 0):
        raise ValidationError("xi_grid must be positive")
    if not (0.0 < d1 <= 1.0 and 0.0 <= d2 <= 1.0):
        raise ValidationError("need d1 in (0, 1] and d2 in [0, 1]")
    pe = profile_eval(kernel)
    num = pe.q_hat(d1 * xi)
    den = pe.q_hat(d2 * xi) if d2 > 0 else np.ones_like(xi)
    ratio = num / den if d1 != d2 else np.ones_like(xi)
    if xi.size > 1 and d1 != d2:
        deriv = np.abs(np.gradient(ratio, np.log(xi)))
    else:
        deriv = np.zeros_like(xi)
    i = int(np.argmax(ratio))
    return MultiplierScan(float(d1), float(d2), float(ratio[i]), float(np.max(deriv)),
                          float(xi[i]), xi, ratio)


@dataclass(frozen=True)
class SymbolTable:
    """Gradient symbol ``m(xi) = 2 pi i xi q_hat(xi)`` sampled on a grid.

    ``q_hat`` and ``grad_symbol`` use the real-FFT layout of ``grid``. The
    xi-prefactor is zeroed on each axis's Nyquist plane and at ``xi = 0``.
    Arrays are read-only.
    """

    grid: Grid
    q_hat: np.ndarray = field(repr=False)
    grad_symbol: np.ndarray = field(repr=False)
    delta: float
    regime: Optional[Regime]
    label: str
    warnings: tuple = ()

    def csv_rows(self):
        """Distinct ``(|xi|, q_hat)`` pairs in increasing ``|xi|``."""
        k2 = self.grid.k_squared.ravel()
        vals = self.q_hat.ravel()
        _, idx = np.unique(k2, return_index=True)
        return [(float(self.grid.xi_mag.ravel()[i]), float(vals[i])) for i in idx]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["xi", "q_hat"])
            for x, q in self.csv_rows():
                w.writerow([f"{x:.17g}", f"{q:.17g}"])


def _gradient_symbol(grid: Grid, q_hat: np.ndarray) -> np.ndarray:
    m = np.empty((grid.dim,) + grid.spectral_shape, dtype=complex)
    for axis, xi in enumerate(grid.freqs):
        pref = np.broadcast_to(2j * math.pi * xi, grid.spectral_shape).copy()
        pref[grid.nyquist_mask(axis)] = 0.0
        m[axis] = pref * q_hat
    m[(slice(None),) + (0,) * grid.dim] = 0.0
    m.setflags(write=False)
    return m


def _make_table(grid: Grid, q_hat, delta, regime, label, warnings=()) -> SymbolTable:
    q_hat = np.asarray(q_hat, dtype=float)
    grad = _gradient_symbol(grid, np.where(np.isfinite(q_hat), q_hat, 0.0))
    q_hat.setflags(write=False)
    return SymbolTable(grid, q_hat, grad, float(delta), regime, label, tuple(warnings))


EXACT_BUDGET = 5e7


def _direct_cost(eta: np.ndarray) -> float:
    b = 2.0 ** np.ceil(np.log2(np.maximum(eta, 1.0)))
    return float(np.sum(1200.0 + 32.0 * b))


def symbol_table(sk: ScaledKernel, grid: Grid, method: str = "auto") -> SymbolTable:
    """Tabulate ``Qhat_{rho_delta}`` on the frequencies of ``grid``.

    The base symbol is evaluated once per distinct ``|delta xi|`` and scaled.
    ``method`` is ``"exact"`` (radial quadrature per value), ``"table"``
    (cached interpolation table) or ``"auto"`` (exact when cheap, and always
    for sharp cutoffs, whose ripples the table does not resolve).
    """
    if sk.n != grid.dim:
        raise GridMismatch(f"kernel dimension {sk.n} != grid dimension {grid.dim}")
    k2, inv = np.unique(grid.k_squared.ravel(), return_inverse=True)
    xi = np.sqrt(k2.astype(float)) / grid.L
    if method not in ("auto", "exact", "table"):
        raise ValidationError(f"unknown symbol method {method!r}")
    exact = method == "exact"
    if method == "auto" and sk.base.compact:
        eta = sk.delta * xi
        exact = (sk.base.spec.cutoff.kind == "indicator"
                 or (float(eta.max()) <= TABLE_MAX and _direct_cost(eta) <= EXACT_BUDGET))
    vals = np.empty_like(xi)
    vals[1:] = scaled_q_hat(sk, xi[1:], exact=exact)
    if sk.base.family is Family.Riesz:
        vals[0] = math.inf
    else:
        vals[0] = sk.q_scale * 1.0
    q_hat = vals[inv].reshape(grid.spectral_shape)
    warnings = []
    if sk.regime is Regime.Vanishing and sk.support_radius < 4 * grid.h:
        warnings.append(f"horizon {sk.support_radius:.4g} is below 4h = {4 * grid.h:.4g}")
    label = f"{sk.base.family.value} delta={sk.delta:g} {sk.regime.value}"
    return _make_table(grid, q_hat, sk.delta, sk.regime, label, warnings)


def classical_table(grid: Grid) -> SymbolTable:
    """``q_hat = 1``: the classical gradient."""
    return _make_table(grid, np.ones(grid.spectral_shape), 0.0, None, "classical")


def riesz_table(grid: Grid, s: float) -> SymbolTable:
    """Closed-form Riesz symbol (``q_hat(0) = inf``, ``m(0) = 0``)."""
    if not 0.0 < s < 1.0:
        raise ValidationError(f"s must lie in (0, 1), got {s}")
    q = riesz_symbol(s, grid.dim, grid.xi_mag)
    return _make_table(grid, q, math.inf, None, f"riesz s={s:g}")
