"""
Radial kernels, their normalization, horizon scaling and numerical checks.

A kernel is described by its radial profile ``rho_bar`` so that
``rho(x) = rho_bar(|x|)``. Compactly supported families are normalized to
``int rho dx = n`` on the unit ball; the Riesz kernel ``|x|^-(n+s-1)`` is kept
unnormalized.

Families
--------
TruncatedFractional   ``w(r) r^-(n+s-1)``
LogCorrected          ``w(r) log(1/r)^kappa r^-(n+s-1)``
VariableExponent      ``w(r) r^-(n+s(r)-1)``
Riesz                 ``r^-(n+s-1)``
Custom                user supplied profile
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import quadrature
from .errors import (NormalizationFailure, OutOfRangeDelta, QuadratureFailure,
                     UnsupportedDim, ValidationError, ZeroProfile)

__all__ = [
    "Family", "Regime", "CutoffSpec", "KernelSpec", "Kernel", "ScaledKernel",
    "HypothesisCheck", "HypothesisReport", "make_kernel", "scale_kernel",
    "limit_exponent", "check_hypotheses", "wedge_check", "l1_distance_to_limit",
    "sphere_area", "DEFAULT_LIMIT_DELTAS", "validate_spec", "admissible_delta", "exponents",
]


class Family(str, enum.Enum):
    TruncatedFractional = "TruncatedFractional"
    LogCorrected = "LogCorrected"
    VariableExponent = "VariableExponent"
    Riesz = "Riesz"
    Custom = "Custom"

    @classmethod
    def parse(cls, name) -> "Family":
        if isinstance(name, cls):
            return name
        aliases = {"a": cls.TruncatedFractional, "b": cls.LogCorrected,
                   "c": cls.VariableExponent}
        key = str(name)
        if key in aliases:
            return aliases[key]
        for fam in cls:
            if fam.value.lower() == key.lower():
                return fam
        raise ValidationError(f"unknown kernel family {name!r}")


class Regime(str, enum.Enum):
    Vanishing = "Vanishing"
    Diverging = "Diverging"

    @classmethod
    def parse(cls, name) -> "Regime":
        if isinstance(name, cls):
            return name
        for reg in cls:
            if reg.value.lower() == str(name).lower():
                return reg
        raise ValidationError(f"unknown regime {name!r}")


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (2 points for n=1)."""
    return {1: 2.0, 2: 2.0 * math.pi}[n]


@dataclass(frozen=True)
class CutoffSpec:
    """Radial cutoff ``w`` with ``w(0) > 0`` supported in the closed unit ball.

    ``bump`` is ``exp(1 - 1/(1-r^2))``; ``indicator`` is the sharp cutoff of
    the truncated fractional kernel. ``epsilon`` is the radius on which the
    kernel stays bounded away from zero.
    """

    kind: str = "bump"

    def __post_init__(self):
        if self.kind not in ("bump", "indicator"):
            raise ValidationError(f"unknown cutoff kind {self.kind!r}")

    @property
    def epsilon(self) -> float:
        return 0.9 if self.kind == "bump" else 1.0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "indicator":
            return np.where(r <= 1.0, 1.0, 0.0)
        return np.exp(self.log(r))

    def log(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "indicator":
            return np.where(r <= 1.0, 0.0, -np.inf)
        with np.errstate(divide="ignore"):
            inside = r < 1.0
            r2 = np.where(inside, r * r, 0.0)
            return np.where(inside, -r2 / (1.0 - r2), -np.inf)


@dataclass(frozen=True)
class KernelSpec:
    family: Family = Family.TruncatedFractional
    s: Optional[float] = 0.5
    kappa: int = 1
    s_fn: Optional[object] = None
    cutoff: CutoffSpec = field(default_factory=CutoffSpec)
    dim: int = 1
    # Custom family only
    profile: Optional[Callable] = None
    sigma: Optional[float] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if isinstance(self.cutoff, str):
            object.__setattr__(self, "cutoff", CutoffSpec(self.cutoff))
        if isinstance(self.s_fn, (list, tuple, np.ndarray)):
            object.__setattr__(self, "s_fn", tuple(float(v) for v in self.s_fn))


def _s_function(s_fn) -> Callable:
    """Turn samples on an equispaced grid of [0, 1], or a callable, into s(r)."""
    if callable(s_fn):
        return s_fn
    vals = np.asarray(s_fn, dtype=float)
    if vals.ndim != 1 or vals.size < 2:
        raise ValidationError("s_fn samples must be a 1-d sequence of length >= 2")
    interp = PchipInterpolator(np.linspace(0.0, 1.0, vals.size), vals, extrapolate=True)

    def s_of_r(r):
        return interp(np.clip(r, 0.0, 1.0))

    return s_of_r


def validate_spec(spec: KernelSpec) -> None:
    """Range checks on ``spec`` without building (normalizing) the kernel."""
    if spec.dim not in (1, 2):
        raise UnsupportedDim(f"dimension {spec.dim} not supported (n in {{1, 2}})")
    fam = spec.family
    if fam in (Family.TruncatedFractional, Family.LogCorrected, Family.Riesz, Family.Custom):
        if spec.s is None:
            raise ValidationError("kernel.s is required for this family")
        if not 0.0 < float(spec.s) < 1.0:
            raise ValidationError(f"kernel.s must lie in (0, 1), got {spec.s}")
    if fam is Family.LogCorrected and spec.kappa not in (-1, 1):
        raise ValidationError(f"kernel.kappa must be -1 or +1, got {spec.kappa}")
    if fam is Family.VariableExponent:
        if spec.s_fn is None:
            raise ValidationError("kernel.s_fn is required for the VariableExponent family")
        s_of_r = _s_function(spec.s_fn)
        probe = np.asarray(s_of_r(np.linspace(0.0, 1.0, 1001)))
        if not (np.all(probe > 0.0) and np.all(probe < 1.0)):
            raise ValidationError("every value of s_fn must lie in (0, 1)")
    if fam is Family.Custom and spec.profile is None:
        raise ValidationError("Custom kernels need a profile callable")


@dataclass(frozen=True)
class Kernel:
    """A normalized radial kernel.

    ``norm_const`` multiplies the raw family formula. ``s0`` is the exponent of
    the radial measure ``rho_bar(t) t^(n-1) ~ t^-s0`` at the origin.
    """

    spec: KernelSpec
    norm_const: float
    sigma: float
    gamma: float
    epsilon: float
    s0: float
    warnings: tuple = ()
    _s_of_r: Optional[Callable] = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.spec.dim

    @property
    def family(self) -> Family:
        return self.spec.family

    @property
    def compact(self) -> bool:
        return self.family is not Family.Riesz

    @property
    def support_radius(self) -> float:
        return 1.0 if self.compact else math.inf

    def exponent(self, r):
        """Power ``n + s(r) - 1`` of the algebraic singularity."""
        if self.family is Family.VariableExponent:
            return self.n + np.asarray(self._s_of_r(r), dtype=float) - 1.0
        return self.n + float(self.spec.s) - 1.0

    def raw_log_profile(self, r):
        """log of the un-normalized profile; -inf outside the support."""
        r = np.asarray(r, dtype=float)
        fam = self.family
        if fam is Family.Custom:
            with np.errstate(divide="ignore"):
                return np.log(np.asarray(self.spec.profile(r), dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -self.exponent(r) * np.log(r)
            if fam is Family.Riesz:
                return out
            out = out + self.spec.cutoff.log(r)
            if fam is Family.LogCorrected:
                lg = np.log(np.where(r < 1.0, -np.log(np.where(r < 1.0, r, 0.5)), 1.0))
                out = np.where(r < 1.0, out + self.spec.kappa * lg, -np.inf)
        return out

    def log_rho_bar(self, r):
        return math.log(self.norm_const) + self.raw_log_profile(r)

    def rho_bar(self, r):
        with np.errstate(over="ignore"):
            return np.exp(self.log_rho_bar(r))

    def radial_measure(self, t):
        """Density ``rho_bar(t) t^(n-1)`` of the radial measure."""
        t = np.asarray(t, dtype=float)
        return self.rho_bar(t) * t ** (self.n - 1)

    def radial_rule(self, freq: float = 0.0, order: int = 16):
        """Quadrature for ``int_0^1 rho_bar(t) t^(n-1) g(t) dt`` (compact kernels)."""
        return quadrature.radial_rule(self.radial_measure, self.s0, freq=freq, order=order)

    def mass(self, order: int = 16) -> float:
        """``int rho dx`` by radial quadrature."""
        t, w = self.radial_rule(order=order)
        return sphere_area(self.n) * float(np.sum(w))


def exponents(spec: KernelSpec) -> tuple[float, float, float]:
    """``(sigma, gamma, s0)`` of a validated spec, from its parameters alone.

    ``s0`` is the singular exponent at the origin, which is also the limiting
    fractional exponent of the diverging-horizon scaling for the shipped
    families.
    """
    fam = spec.family
    if fam in (Family.TruncatedFractional, Family.Riesz):
        s = float(spec.s)
        return s, s, s
    if fam is Family.LogCorrected:
        s = float(spec.s)
        if spec.kappa == 1:
            return s, 0.5 * (s + 1.0), s
        return 0.5 * s, s, s
    if fam is Family.VariableExponent:
        s_of_r = _s_function(spec.s_fn)
        probe = np.asarray(s_of_r(np.linspace(0.0, 1.0, 2001)), dtype=float)
        return float(probe.min()), float(probe.max()), float(s_of_r(0.0))
    s0 = float(spec.s)
    sigma = float(spec.sigma if spec.sigma is not None else s0)
    gamma = float(spec.gamma if spec.gamma is not None else s0)
    return sigma, gamma, s0


def make_kernel(spec: KernelSpec) -> Kernel:
    """Assemble the profile of ``spec`` and normalize it to ``int rho = n``."""
    validate_spec(spec)
    n = spec.dim
    s_of_r = _s_function(spec.s_fn) if spec.family is Family.VariableExponent else None
    sigma, gamma, s0 = exponents(spec)
    if spec.family is Family.Riesz:
        return Kernel(spec, 1.0, sigma, gamma, math.inf, s0)
    if not 0.0 < sigma <= gamma < 1.0:
        raise ValidationError(f"need 0 < sigma <= gamma < 1, got {sigma}, {gamma}")
    epsilon = spec.cutoff.epsilon
    raw = Kernel(spec, 1.0, sigma, gamma, epsilon, s0, _s_of_r=s_of_r)
    coarse = raw.mass(order=16)
    fine = raw.mass(order=24)
    if not (np.isfinite(coarse) and np.isfinite(fine) and fine > 0.0) or \
            abs(coarse - fine) > 1e-10 * abs(fine):
        raise NormalizationFailure(
            f"radial mass quadrature did not converge ({coarse!r} vs {fine!r})")
    warnings = _cutoff_warnings(raw)
    return Kernel(spec, n / fine, sigma, gamma, epsilon, s0, tuple(warnings), s_of_r)


def _cutoff_warnings(kernel: Kernel) -> list[str]:
    """Check that ``rho_bar(r) r^(n-2)`` (i.e. w/|.|^(1+s) etc.) is radially decreasing."""
    r = np.geomspace(1e-6, 0.999, 2000)
    with np.errstate(divide="ignore"):
        g = kernel.raw_log_profile(r) + (kernel.n - 2) * np.log(r)
    g = g[np.isfinite(g)]
    rise = np.max(np.diff(g)) if g.size > 1 else 0.0
    if rise > 1e-12:
        return [f"cutoff profile is not radially decreasing (log increase {rise:.3g})"]
    return []


@dataclass(frozen=True)
class ScaledKernel:
    """``rho_delta = c_delta rho(./delta)``."""

    base: Kernel
    delta: float
    regime: Regime
    c_delta: float

    @property
    def n(self) -> int:
        return self.base.n

    def rho_bar(self, r):
        r = np.asarray(r, dtype=float)
        return self.c_delta * self.base.rho_bar(r / self.delta)

    def radial_measure(self, t):
        t = np.asarray(t, dtype=float)
        return self.rho_bar(t) * t ** (self.n - 1)

    @property
    def q_scale(self) -> float:
        """Factor in ``Qhat_delta(xi) = q_scale * Qhat(delta xi)``."""
        return self.c_delta * self.delta**self.n

    @property
    def support_radius(self) -> float:
        return self.delta * self.base.support_radius


def admissible_delta(kernel: Kernel, delta: float, regime: Regime) -> None:
    regime = Regime.parse(regime)
    if not (np.isfinite(delta) and delta > 0.0):
        raise OutOfRangeDelta(f"delta must be positive and finite, got {delta}")
    if regime is Regime.Vanishing and delta > 1.0:
        raise OutOfRangeDelta(
            f"delta={delta} outside the admissible range (0, 1] for the Vanishing regime")
    if regime is Regime.Diverging and not delta * kernel.epsilon > 1.0:
        raise OutOfRangeDelta(
            f"delta={delta} must exceed 1/epsilon={1.0 / kernel.epsilon:.6g} "
            "for the Diverging regime")


def scale_kernel(kernel: Kernel, delta: float, regime) -> ScaledKernel:
    regime = Regime.parse(regime)
    delta = float(delta)
    admissible_delta(kernel, delta, regime)
    if regime is Regime.Vanishing:
        c = delta ** (-kernel.n)
    else:
        c = math.exp(-float(kernel.log_rho_bar(1.0 / delta)))
    return ScaledKernel(kernel, delta, regime, c)


DEFAULT_LIMIT_DELTAS = tuple(10.0 ** k for k in (2, 4, 8, 16, 32, 64, 128))


def limit_exponent(kernel: Kernel, delta_list: Sequence[float] = DEFAULT_LIMIT_DELTAS):
    """Estimate the limiting fractional exponent of the diverging-horizon scaling.

    Per-delta estimate: ``log(rho_bar(1/(e delta)) / rho_bar(1/delta)) - n + 1``.
    The extrapolated value is a first-order Richardson step in
    ``h = 1/log(delta)`` on the last two estimates, which removes the
    ``1/log(delta)`` error of logarithmically corrected kernels and is harmless
    for algebraically converging ones.
    """
    deltas = np.asarray(delta_list, dtype=float)
    if deltas.ndim != 1 or deltas.size == 0:
        raise ValidationError("delta_list must be a non-empty 1-d sequence")
    if np.any(np.diff(deltas) <= 0):
        raise ValidationError("delta_list must be strictly increasing")
    if np.any(deltas * kernel.epsilon <= 1.0) or np.any(deltas <= 1.0):
        raise OutOfRangeDelta("every delta must exceed max(1, 1/epsilon)")
    lo = kernel.log_rho_bar(1.0 / deltas)
    hi = kernel.log_rho_bar(1.0 / (math.e * deltas))
    if not np.all(np.isfinite(lo)):
        raise ZeroProfile("rho_bar(1/delta) vanishes for some delta in the list")
    est = hi - lo - kernel.n + 1.0
    if est.size == 1:
        return est.tolist(), float(est[-1])
    h = 1.0 / np.log(deltas)
    e1, e2 = est[-2], est[-1]
    if abs(e2 - e1) <= 1e-13:
        return est.tolist(), float(e2)
    extrap = e2 - h[-1] * (e1 - e2) / (h[-2] - h[-1])
    return est.tolist(), float(extrap)


@dataclass(frozen=True)
class HypothesisCheck:
    passed: bool
    constant: float
    max_violation: float
    worst_r: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {"pass": bool(self.passed), "constant": float(self.constant),
                "max_violation": float(self.max_violation),
                "worst_r": float(self.worst_r), "detail": self.detail}


@dataclass(frozen=True)
class HypothesisReport:
    h1: HypothesisCheck
    h1_nu: HypothesisCheck
    h2: HypothesisCheck
    h3: HypothesisCheck
    h4: HypothesisCheck
    nu: float
    tol: float

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in (self.h1, self.h1_nu, self.h2, self.h3, self.h4))

    def to_dict(self) -> dict:
        return {"H1": self.h1.to_dict(), "H1_nu": self.h1_nu.to_dict(),
                "H2": self.h2.to_dict(), "H3": self.h3.to_dict(), "H4": self.h4.to_dict(),
                "nu": self.nu, "tol": self.tol, "all_passed": self.all_passed}


def _monotone_constant(log_g, r, decreasing: bool):
    """Largest violation ratio over pairs ``t <= r`` on the grid.

    For an (almost) decreasing g this is ``max_{t<=r} g(r)/g(t)``; for an
    (almost) increasing one ``max_{t<=r} g(t)/g(r)``. Returns (constant, r at
    which the worst pair ends).
    """
    if decreasing:
        run = np.minimum.accumulate(log_g)
        viol = log_g - run
    else:
        run = np.maximum.accumulate(log_g)
        viol = run - log_g
    i = int(np.argmax(viol))
    return float(np.exp(viol[i])), float(r[i])


def _last_decade(r) -> int:
    """Index of the first grid point at least ten times the smallest radius."""
    cut = int(np.searchsorted(r, 10.0 * r[0]))
    return min(cut, r.size - 2)


def _almost_check(log_g, r, decreasing: bool, tol: float, name: str) -> HypothesisCheck:
    """Almost monotone: the constant must not keep growing as the grid reaches 0.

    Growth is measured over the lowest decade of the grid, which tolerates
    constants that converge logarithmically slowly.
    """
    const, worst = _monotone_constant(log_g, r, decreasing)
    cut = _last_decade(r)
    upper_const, _ = _monotone_constant(log_g[cut:], r[cut:], decreasing)
    growth = const / upper_const
    ok = bool(np.isfinite(const) and growth <= tol)
    return HypothesisCheck(ok, const, const - 1.0, worst,
                           f"{name}: tail growth {growth:.6g} (limit {tol})")


def check_hypotheses(kernel: Kernel, r_grid=None, tol: float = 1.05) -> HypothesisReport:
    """Grid spot checks of the structural kernel hypotheses.

    H1 is checked as genuine monotonicity (up to the multiplicative slack
    ``tol``); H3/H4 are almost-monotonicity statements and pass when the
    constant does not grow as the grid is extended toward the origin; H2 is
    checked for k = 1, 2 by central differences with step ``r*1e-4`` and passes
    when the constants are bounded in the same sense and stable under halving
    the step.
    """
    if r_grid is None:
        r_grid = np.geomspace(1e-6, 0.2, 400)
    r = np.asarray(r_grid, dtype=float)
    if np.any(np.diff(r) <= 0) or r[0] <= 0 or r[-1] >= 1.0:
        raise ValidationError("r_grid must be sorted and contained in (0, 1)")
    r = r[r < kernel.epsilon]
    n = kernel.n
    logr = np.log(r)
    log_rho = kernel.log_rho_bar(r)
    log_f = (n - 2) * logr + log_rho

    c1, w1 = _monotone_constant(log_f, r, decreasing=True)
    h1 = HypothesisCheck(bool(c1 <= tol), c1, c1 - 1.0, w1, "f_rho decreasing")

    nu = _largest_nu(log_f, logr, tol)
    cnu, wnu = _monotone_constant(log_f + nu * logr, r, decreasing=True)
    h1_nu = HypothesisCheck(bool(nu > 0.0 and cnu <= tol), cnu, cnu - 1.0, wnu,
                            f"r^nu f_rho decreasing, nu={nu:.4g}")

    h3 = _almost_check((n + kernel.sigma - 1.0) * logr + log_rho, r, True, tol,
                       "r^(n+sigma-1) rho_bar almost decreasing")
    h4 = _almost_check((n + kernel.gamma - 1.0) * logr + log_rho, r, False, tol,
                       "r^(n+gamma-1) rho_bar almost increasing")
    h2 = _derivative_check(kernel, r, tol)
    return HypothesisReport(h1, h1_nu, h2, h3, h4, nu, tol)


def _largest_nu(log_f, logr, tol: float, nu_max: float = 4.0) -> float:
    """Largest nu on a bisection grid for which r^nu f_rho stays decreasing."""
    def ok(nu):
        c, _ = _monotone_constant(log_f + nu * logr, logr, decreasing=True)
        return c <= tol

    if not ok(1e-6):
        return 0.0
    lo, hi = 1e-6, nu_max
    if ok(hi):
        return hi
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def _derivative_check(kernel: Kernel, r, tol: float) -> HypothesisCheck:
    n = kernel.n

    def f(x):
        return kernel.rho_bar(x) * x ** (n - 2.0)

    def constants(step_factor):
        h = r * step_factor
        fp, f0, fm = f(r + h), f(r), f(r - h)
        d1 = (fp - fm) / (2.0 * h)
        d2 = (fp - 2.0 * f0 + fm) / (h * h)
        return np.abs(d1) * r / f0, np.abs(d2) * r * r / f0

    a1, a2 = constants(1e-4)
    b1, b2 = constants(0.5e-4)
    worst = 0.0
    const = 0.0
    worst_r = float(r[0])
    ok = True
    detail = []
    for k, (ca, cb) in enumerate(((a1, b1), (a2, b2)), start=1):
        ck = float(np.max(ca))
        i = int(np.argmax(np.abs(ca - cb) / np.maximum(cb, 1e-300)))
        unstable = float(np.max(np.maximum(ca, cb) / np.maximum(np.minimum(ca, cb), 1e-300)))
        stable_ratio = unstable if np.isfinite(unstable) else math.inf
        cut = _last_decade(r)
        growth = ck / max(float(np.max(ca[cut:])), 1e-300)
        # a constant below 1e-8 cannot be destabilised meaningfully
        kok = np.isfinite(ck) and growth <= tol and (stable_ratio <= tol or ck < 1e-8)
        ok = ok and bool(kok)
        detail.append(f"C{k}={ck:.4g} growth={growth:.4g} step_ratio={stable_ratio:.4g}")
        if ck > const:
            const, worst_r = ck, float(r[i])
        worst = max(worst, stable_ratio - 1.0)
    return HypothesisCheck(ok, const, worst, worst_r, "; ".join(detail))


def wedge_check(sk: ScaledKernel, x_grid) -> tuple[float, float]:
    """Tightest constants of the two-sided power-law wedge on ``x_grid``."""
    if sk.regime is not Regime.Diverging:
        raise ValidationError("wedge_check applies to Diverging-regime kernels")
    r = np.asarray(x_grid, dtype=float)
    limit = sk.delta * sk.base.epsilon
    if np.any(r <= 0.0) or np.any(r >= limit):
        raise ValidationError(f"x_grid must lie in (0, {limit:.6g})")
    n, sig, gam = sk.n, sk.base.sigma, sk.base.gamma
    logr = np.log(r)
    log_rho = math.log(sk.c_delta) + sk.base.log_rho_bar(r / sk.delta)
    lo = np.minimum(-(n + sig - 1) * logr, -(n + gam - 1) * logr)
    hi = np.maximum(-(n + sig - 1) * logr, -(n + gam - 1) * logr)
    return float(np.exp(np.min(log_rho - lo))), float(np.exp(np.max(log_rho - hi)))


def l1_distance_to_limit(kernel: Kernel, delta: float, s_inf: Optional[float] = None) -> float:
    """``||(rho_delta - rho_inf) min(1, 1/|x|)||_L1`` under diverging scaling.

    ``rho_inf = |x|^-(n+s_inf-1)``; ``s_inf`` defaults to the extrapolated
    :func:`limit_exponent`.
    """
    sk = scale_kernel(kernel, delta, Regime.Diverging)
    if s_inf is None:
        s_inf = limit_exponent(kernel)[1]
    n = kernel.n
    p_inf = n + s_inf - 1.0
    if not kernel.compact:
        # rho_delta is evaluated in log form; the difference is pure roundoff
        r = np.geomspace(1e-6, 1e6, 2001)
        diff = np.abs(np.expm1(math.log(sk.c_delta) + kernel.log_rho_bar(r / delta)
                               + p_inf * np.log(r)))
        return float(sphere_area(n) * np.max(diff) * (1.0 / (1.0 - s_inf) + 1.0 / s_inf))

    def integrand(t):
        # |rho_delta - rho_inf| t^(n-1) min(1, 1/t), relative form avoids cancellation
        with np.errstate(divide="ignore", over="ignore"):
            rel = np.expm1(math.log(sk.c_delta) + kernel.log_rho_bar(t / delta) + p_inf * np.log(t))
        rel = np.where(t / delta < 1.0, rel, -1.0)
        return np.abs(rel) * t ** (-p_inf + n - 1.0) * np.minimum(1.0, 1.0 / t)

    # (0, 1]: singular like t^-s_inf
    t_in, w_in = quadrature.graded_power_rule(1.0, min(max(s_inf, 0.0), 0.999))
    inner = float(np.sum(w_in * integrand(t_in)))
    # [1, delta]: smooth on a log scale, breakpoints at the cutoff structure
    edges = np.unique(np.concatenate([np.geomspace(1.0, delta, 8 * max(1, int(np.log2(delta))) + 1),
                                      [kernel.epsilon * delta, delta]]))
    edges = edges[(edges >= 1.0) & (edges <= delta)]
    t_mid, w_mid = quadrature.panel_rule(edges, 24)
    mid = float(np.sum(w_mid * integrand(t_mid)))
    tail = delta ** (-s_inf) / s_inf  # rho_delta = 0 beyond delta
    check_t, check_w = quadrature.panel_rule(edges, 32)
    mid_fine = float(np.sum(check_w * integrand(check_t)))
    if abs(mid_fine - mid) > 1e-8 * max(abs(mid_fine), 1e-14) + 1e-14:
        raise QuadratureFailure("L1 distance quadrature did not converge")
    return sphere_area(n) * (inner + mid + tail)
