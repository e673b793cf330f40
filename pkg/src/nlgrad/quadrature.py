"""
Composite Gauss rules for radially singular and oscillatory integrals.

Everything here integrates against the radial measure ``rho_bar(t) t^(n-1) dt``
of a kernel whose profile behaves like ``t^(-s0)`` (possibly times a
logarithm) at the origin. The inner region is handled by the substitution
``t = t_c u^beta`` with ``beta = 2/(1 - s0)``, which turns the algebraic
singularity into a factor ``u`` and leaves only mild logarithmic terms, and
graded Gauss-Legendre panels in ``u``. The outer region is split into panels
no wider than half an oscillation period.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QuadratureFailure

__all__ = [
    "gauss_legendre",
    "panel_rule",
    "graded_power_rule",
    "radial_rule",
    "wynn_epsilon",
    "oscillatory_sum",
]


@lru_cache(maxsize=16)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1] (cached, read-only)."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(edges, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on consecutive panels ``edges[i], edges[i+1]``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def graded_power_rule(t_c: float, s0: float, order: int = 16, levels: int = 50,
                      t_floor: float = 1e-120):
    """Rule for ``int_0^t_c t^(-s0) h(t) dt`` with ``h`` bounded near 0.

    Returns nodes ``t`` and plain weights ``W`` (the singular factor is *not*
    folded in), so the caller multiplies by the full integrand evaluated at the
    nodes. The substitution ``t = t_c u^beta`` makes ``dt = t_c beta u^(beta-1)
    du``; combined with ``t^(-s0)`` this leaves ``u^1``, which graded panels in
    ``u`` integrate to near machine precision.

    Panels stop at ``t_floor`` (to keep the integrand finite in floating
    point); the remaining piece ``[0, t_min]`` is represented by one node at
    ``t_min`` with weight ``t_min/(1 - s0)``, i.e. ``h`` frozen at ``t_min``.
    """
    if not 0.0 <= s0 < 1.0:
        raise ValueError(f"singular exponent must lie in [0, 1), got {s0}")
    beta = 2.0 / (1.0 - s0)
    depth = np.log(t_c / t_floor) / (beta * np.log(2.0)) if t_c > t_floor else 1.0
    levels = int(max(1, min(levels, np.floor(depth))))
    # geometric panels toward u = 0, uniform on [1/2, 1] (finer when few levels fit)
    geo = 0.5 ** np.arange(levels, 0, -1)
    nupper = 4 if levels >= 20 else 16
    edges = np.concatenate([geo, np.linspace(0.5, 1.0, nupper + 1)[1:]])
    u, wu = panel_rule(edges, order)
    t = t_c * u**beta
    jac = t_c * beta * u ** (beta - 1.0)
    t_min = t_c * geo[0] ** beta
    return np.concatenate([[t_min], t]), np.concatenate([[t_min / (1.0 - s0)], wu * jac])


def radial_rule(profile_measure, s0: float, freq: float = 0.0, upper: float = 1.0,
                order: int = 16, max_width: float = 0.05):
    """Nodes/weights ``(t, W)`` with ``sum W g(t) ~ int_0^upper m(t) g(t) dt``.

    ``profile_measure(t)`` is the radial measure density ``rho_bar(t) t^(n-1)``;
    ``s0`` its singular exponent at the origin; ``freq`` the highest oscillation
    frequency (cycles per unit length) of the test functions ``g``.
    """
    freq = abs(float(freq))
    t_c = min(0.25 * upper, 0.25 / freq) if freq > 0 else 0.25 * upper
    t_in, w_in = graded_power_rule(t_c, s0, order)
    width = max_width * upper
    if freq > 0:
        width = min(width, 0.5 / freq)
    npan = max(1, int(np.ceil((upper - t_c) / width)))
    t_out, w_out = panel_rule(np.linspace(t_c, upper, npan + 1), order)
    t = np.concatenate([t_in, t_out])
    w = np.concatenate([w_in, w_out])
    m = profile_measure(t)
    return t, w * m


def wynn_epsilon(partial_sums) -> float:
    """Wynn's epsilon extrapolation of a sequence of partial sums.

    Returns the highest-order even column entry, which is the accelerated
    limit estimate.
    """
    s = np.asarray(partial_sums, dtype=float)
    n = s.size
    if n < 3:
        return float(s[-1])
    prev = np.zeros(n + 1)
    cur = s.copy()
    best = float(s[-1])
    col = 0
    while cur.size > 1:
        diff = cur[1:] - cur[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = prev[1: cur.size] + 1.0 / diff
        if not np.all(np.isfinite(nxt)):
            break
        prev, cur = cur, nxt
        col += 1
        if col % 2 == 0:
            best = float(cur[-1])
    return best


def oscillatory_sum(f, zeros, order: int = 16, tol: float = 1e-12,
                    max_terms: int = 4000, chunk: int = 200) -> float:
    """Integrate ``f`` from ``zeros[0]`` to infinity between consecutive zeros.

    ``zeros(k)`` returns the first ``k`` zeros of the oscillating factor (an
    increasing array starting at the lower limit). Half-period contributions
    are accumulated in chunks and the partial sums accelerated with Wynn's
    epsilon until two successive estimates agree within ``tol`` relative.
    """
    last = None
    total = 0.0
    done = 0
    partial: list[float] = []
    while done < max_terms:
        z = np.asarray(zeros(done + chunk + 1), dtype=float)
        t, w = panel_rule(z[done:], order)
        vals = (f(t) * w).reshape(-1, order).sum(axis=1)
        for v in vals:
            total += v
            partial.append(total)
        done += chunk
        est = wynn_epsilon(partial[-40:])
        if last is not None and abs(est - last) <= tol * max(abs(est), 1e-300):
            return est
        last = est
    raise QuadratureFailure(
        f"oscillatory tail did not stabilise to {tol:g} after {max_terms} half-periods")
