"""Small numerical building blocks shared across the toolkit.

Nothing in here knows about potentials or charts: piecewise Chebyshev
antiderivatives for fast repeated phase integrals, composite
Gauss-Legendre panels, geometric-sequence extrapolation, and log-log
slope fits.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import chebyshev as _cheb


# ---------------------------------------------------------------------------
# Gauss-Legendre panels
# ---------------------------------------------------------------------------

def gl_panel_rule(edges: np.ndarray, order: int = 8):
    """Composite Gauss-Legendre nodes/weights for the panels given by `edges`.

    Returns (nodes, weights), both 1-D, covering [edges[0], edges[-1]].
    """
    edges = np.asarray(edges, dtype=float)
    x, w = np.polynomial.legendre.leggauss(order)
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w[None, :] * np.ones_like(nodes)
    return nodes.ravel(), weights.ravel()


def integrate_panels(fun, edges: np.ndarray, order: int = 8):
    nodes, weights = gl_panel_rule(edges, order)
    return np.sum(fun(nodes) * weights, axis=-1)


def cumulative_panel_integrals(fun, edges: np.ndarray, order: int = 8):
    """Integral of `fun` over each panel, as an array of len(edges)-1."""
    edges = np.asarray(edges, dtype=float)
    x, w = np.polynomial.legendre.leggauss(order)
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    vals = fun(nodes.ravel()).reshape(nodes.shape)
    return np.sum(vals * (0.5 * (b - a) * w[None, :]), axis=1)


def phase_resolved_edges(a: float, b: float, phase_density, pts_per_unit: float = 12.0,
                         max_log_step: float = 0.12, breakpoints=()):
    """Panel edges on [a, b] resolving both a phase density and log-scale.

    `phase_density(r)` is the local phase rate (e.g. f(r)); the edge spacing
    satisfies dr * phase_density <= 1/pts_per_unit and dln r <= max_log_step.
    Breakpoints are forced onto the edge set.
    """
    if b <= a:
        return np.array([a, b])
    edges = [float(a)]
    r = float(a)
    while r < b:
        dens = float(np.max(phase_density(np.array([r]))))
        dr_phase = 1.0 / (pts_per_unit * dens) if dens > 0 else np.inf
        dr_log = max(r, 1e-3) * max_log_step
        dr = min(dr_phase, dr_log)
        r = min(r + dr, b)
        edges.append(r)
    edges = np.array(edges)
    bk = [p for p in breakpoints if a < p < b]
    if bk:
        edges = np.unique(np.concatenate([edges, np.array(bk, dtype=float)]))
    return edges


# ---------------------------------------------------------------------------
# Piecewise Chebyshev antiderivative
# ---------------------------------------------------------------------------

class ChebAntiderivative:
    """F(r) = integral of `fun` from `a` to r, r >= a, built lazily.

    Panels grow dyadically; within each panel the integrand is interpolated
    by a Chebyshev series and integrated exactly, so the result is at machine
    precision for integrands analytic between the supplied breakpoints.
    """

    def __init__(self, fun, a: float, breakpoints=(), deg: int = 48,
                 first_width: float = 1.0):
        self.fun = fun
        self.a = float(a)
        self.deg = int(deg)
        self.breakpoints = sorted(float(p) for p in breakpoints if p > a)
        self.first_width = float(first_width)
        self._edges = [self.a]
        self._series = []        # antiderivative Chebyshev series per panel
        self._offsets = [0.0]    # F at left edge of each panel

    def _next_edge(self, left: float) -> float:
        width = max(self.first_width, left - self.a)
        right = left + width
        for p in self.breakpoints:
            if left < p < right:
                right = p
                break
        return right

    def _extend_to(self, r: float):
        while self._edges[-1] < r:
            left = self._edges[-1]
            right = self._next_edge(left)
            ser = _cheb.Chebyshev.interpolate(lambda t: self.fun(np.asarray(t)),
                                              self.deg, domain=[left, right])
            anti = ser.integ(lbnd=left)
            self._edges.append(right)
            self._series.append(anti)
            self._offsets.append(self._offsets[-1] + float(anti(right)))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        if np.any(r < self.a - 1e-12):
            raise ValueError("query below lower limit of antiderivative")
        rmax = float(np.max(r))
        self._extend_to(rmax)
        edges = np.asarray(self._edges)
        idx = np.clip(np.searchsorted(edges, r, side="right") - 1, 0, len(self._series) - 1)
        out = np.empty_like(r)
        for k in np.unique(idx):
            sel = idx == k
            out[sel] = self._offsets[k] + self._series[k](r[sel])
        out[r <= self.a] = 0.0
        return out[0] if scalar else out


# ---------------------------------------------------------------------------
# Extrapolation and fits
# ---------------------------------------------------------------------------

def richardson_limit(s_values: np.ndarray, samples: np.ndarray):
    """Extrapolate samples F(s_k) -> F(inf) on a geometric schedule.

    Assumes an error model F(s) = F_inf + c * s**(-p) with p fitted from the
    last increments. `samples` may be complex and of shape (n_s, ...).
    Returns (limit, info) where info carries the fitted rate and the last
    increment size as a convergence certificate.
    """
    s = np.asarray(s_values, dtype=float)
    F = np.asarray(samples)
    if len(s) < 3:
        return F[-1], {"rate": np.nan, "increment": np.nan, "cauchy": False}
    dF = F[1:] - F[:-1]
    mags = np.linalg.norm(dF.reshape(len(dF), -1), axis=1)
    # fit p on the last few ratios; the schedule need not be exactly geometric
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = mags[1:] / mags[:-1]
        rhos = s[2:] / s[1:-1]
    good = (mags[1:] > 0) & (mags[:-1] > 0)
    if not np.any(good):
        return F[-1], {"rate": np.inf, "increment": 0.0, "cauchy": True}
    p_est = np.median(-np.log(ratios[good]) / np.log(rhos[good]))
    limit = F[-1]
    if np.isfinite(p_est) and p_est > 0.05:
        rho = s[-1] / s[-2]
        limit = F[-1] + dF[-1] / (rho ** p_est - 1.0)
    tail = mags[-4:]
    info = {
        "rate": float(p_est),
        "increment": float(mags[-1]),
        "increments": mags,
        "cauchy": bool(mags[-1] <= mags[0] and np.all(tail[1:] <= tail[:-1] * 1.2)),
    }
    return limit, info


def loglog_slope(x: np.ndarray, y: np.ndarray):
    """Least-squares slope of log y against log x (y > 0)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    lx, ly = np.log(x[keep]), np.log(y[keep])
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    return float(coef[0])


def linear_slope(x: np.ndarray, y: np.ndarray):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])
