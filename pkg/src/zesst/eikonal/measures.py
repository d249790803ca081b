"""Measure identities on eikonal charts: co-area, Gauss, scaling report.

Both checks compare a flow-coordinate quadrature (using the chart's
surface density) against a direct Euclidean quadrature that never sees
the chart's variational data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numutil import gl_panel_rule
from .chart import FlowChart, RadialChart


@dataclass(frozen=True)
class IsoGaussian:
    """phi(x) = exp(-|x - c|^2 / (2 w^2))."""

    center: np.ndarray
    width: float

    def value(self, x):
        d2 = np.sum((np.asarray(x) - self.center) ** 2, axis=-1)
        return np.exp(-d2 / (2.0 * self.width ** 2))

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        return self.value(x)[..., None] * (-(x - self.center) / self.width ** 2)

    def support_radius(self, tol: float = 1e-14):
        return float(np.linalg.norm(self.center) + self.width * np.sqrt(-2 * np.log(tol)))


@dataclass(frozen=True)
class AnisoGaussian:
    """phi(x) = exp(-sum (x_i - c_i)^2 / (2 w_i^2))."""

    center: np.ndarray
    widths: np.ndarray

    def value(self, x):
        u = (np.asarray(x) - self.center) / self.widths
        return np.exp(-0.5 * np.sum(u * u, axis=-1))

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        return self.value(x)[..., None] * (-(x - self.center) / np.asarray(self.widths) ** 2)

    def support_radius(self, tol: float = 1e-14):
        return float(np.linalg.norm(self.center)
                     + np.max(self.widths) * np.sqrt(-2 * np.log(tol)))


def _euclidean_integral(phi_vals_fn, chart, r_max: float, n_r: int = 800, order: int = 10):
    """integral over R^d of a function given by values(points), in polar form."""
    d = chart.dim
    nodes, weights = gl_panel_rule(np.linspace(0.0, r_max, n_r), order)
    sig, wsig, _ = (chart.sigma_nodes, chart.sigma_weights, None)
    pts = nodes[:, None, None] * sig[None, :, :]
    vals = phi_vals_fn(pts.reshape(-1, d)).reshape(len(nodes), len(sig))
    ang = vals @ wsig
    return float(np.sum(ang * weights * nodes ** (d - 1)))


def _flow_side(chart, integrand_fn, s_max: float, n_panels: int = 400, order: int = 10):
    """int_0^s_max ds int (integrand * m)(Phi(s, .)) dsigma on the chart lattice."""
    s_nodes, s_weights = gl_panel_rule(np.geomspace(1e-3, s_max, n_panels), order)
    if isinstance(chart, RadialChart):
        r = chart.r_of_s(s_nodes)
        m = chart.m_of_r(r)
        pts = r[:, None, None] * chart.sigma_nodes[None, :, :]
        vals = integrand_fn(pts.reshape(-1, chart.dim)).reshape(len(r), -1)
        ang = vals @ chart.sigma_weights
        return float(np.sum(ang * m * s_weights))
    states = chart.flow_points(s_nodes)
    vals = integrand_fn(states.x.reshape(-1, chart.dim)).reshape(states.x.shape[:2])
    ang = np.einsum("sm,sm,m->s", vals, states.m_eps, chart.sigma_weights)
    return float(np.sum(ang * s_weights))


def coarea_check(chart, phi, s_max: float = None):
    """Volume integral of phi two ways: direct polar quadrature vs the
    flow-coordinate nested quadrature with the chart's surface density."""
    r_support = phi.support_radius()
    s_cap = chart.s_max if np.isfinite(chart.s_max) else None
    s_needed = float(chart.model.S0(r_support) * 1.05)
    s_max = s_max or s_needed
    truncated = s_cap is not None and s_max > s_cap
    if truncated:
        s_max = s_cap
    lhs = _euclidean_integral(phi.value, chart, r_support)
    rhs = _flow_side(chart, phi.value, s_max)
    rel = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return {"lhs": lhs, "rhs": rhs, "rel_error": rel, "truncated": truncated}


def gauss_check(chart, phi, j: int, s: float, boundary_fn=None):
    """Gauss identity at level s: int_{S<=s} d_j phi dx against the flux
    int (phi (d_j S) m)(Phi(s, .)) dsigma."""
    d = chart.dim
    # rhs: flux through the level set, from the chart
    if isinstance(chart, RadialChart):
        r_b = float(chart.r_of_s(s))
        pts = r_b * chart.sigma_nodes
        gradS = chart.gradS(pts)
        m = chart.m_of_r(np.full(len(pts), r_b))
        vals = phi.value(pts)
        rhs = float(np.sum(vals * gradS[:, j] * m * chart.sigma_weights))
    else:
        states = chart.flow_points(np.array([s]))
        vals = phi.value(states.x[0])
        rhs = float(np.sum(vals * states.xi[0, :, j] * states.m_eps[0] * chart.sigma_weights))

    # lhs: direct quadrature of d_j phi over {S <= s} with an independent
    # boundary description (exact radial inverse, or the analytic eikonal)
    if boundary_fn is None:
        if isinstance(chart, RadialChart):
            r_b = float(chart.r_of_s(s))
            boundary_fn = lambda sig: np.full(len(sig), r_b)
        else:
            eik = getattr(chart.model.pert, "eik", None)
            if eik is None:
                raise ValueError("gauss_check needs a boundary description for "
                                 "non-radial models without the analytic example")

            def boundary_fn(sig):
                out = np.empty(len(sig))
                for i, u in enumerate(sig):
                    lo, hi = 1e-6, 1.0
                    while eik.S(np.array([hi * u])) < s:
                        hi *= 2.0
                    for _ in range(80):
                        mid = 0.5 * (lo + hi)
                        if eik.S(np.array([mid * u])) < s:
                            lo = mid
                        else:
                            hi = mid
                    out[i] = 0.5 * (lo + hi)
                return out

    sig, wsig = chart.sigma_nodes, chart.sigma_weights
    r_b = boundary_fn(sig)
    lhs = 0.0
    for i in range(len(sig)):
        nodes, weights = gl_panel_rule(np.linspace(0.0, r_b[i], 400), 10)
        pts = nodes[:, None] * sig[i][None, :]
        gvals = phi.grad(pts)[:, j]
        lhs += wsig[i] * float(np.sum(gvals * weights * nodes ** (d - 1)))
    rel = abs(lhs - rhs) / max(abs(rhs), abs(lhs), 1e-300)
    return {"lhs": lhs, "rhs": rhs, "rel_error": rel}


def eikonal_bounds_report(charts: dict, radial_model, sample_s=None):
    """Scaling of sup |S_eps/S0 - 1| and sup |grad S_eps / f - rhat| over an
    eps-grid of charts sharing the same radial part."""
    from ..numutil import loglog_slope
    eps_list = sorted(charts)
    sup_S, sup_G = [], []
    for eps in eps_list:
        ch = charts[eps]
        s_vals = sample_s if sample_s is not None else np.geomspace(1.5, ch.s_max * 0.98, 40)
        st = ch.flow_points(s_vals)
        r = np.linalg.norm(st.x, axis=-1)
        S0 = radial_model.S0(r.ravel()).reshape(r.shape)
        sup_S.append(float(np.max(np.abs(st.s[:, None] / S0 - 1.0))))
        f = radial_model.f(r.ravel()).reshape(r.shape)
        xhat = st.x / r[..., None]
        dev = st.xi / f[..., None] - xhat
        sup_G.append(float(np.max(np.linalg.norm(dev, axis=-1))))
    out = {
        "eps": eps_list, "sup_S_dev": sup_S, "sup_grad_dev": sup_G,
        "slope_S": loglog_slope(np.array(eps_list), np.array(sup_S)),
        "slope_grad": loglog_slope(np.array(eps_list), np.array(sup_G)),
    }
    return out
