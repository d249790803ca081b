"""Eikonal charts: sampled geodesic flow with off-lattice queries.

`FlowChart` is the construction of record (geodesic shooting); it carries
the flow Phi(s, sigma), the gradient field xi = grad S on the flow, the
surface density m = sqrt(|g| / K) from the variational log-determinant,
and an (s, sigma) Newton inverse for arbitrary-point queries.

`RadialChart` is the closed-form chart of a radial model (S = S0(r),
m = r^(d-1)/f) used as the exact oracle wherever the perturbation vanishes.
"""

from __future__ import annotations

import csv

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .geodesics import FlowSolution, FlowStates
from ..numutil import gl_panel_rule


def sphere_lattice(d: int, n: int):
    """Quadrature lattice on S^(d-1): (nodes (m,d), weights (m,)).

    d=2: uniform angles with trapezoid weights (spectrally accurate);
    d=3: Gauss-Legendre in the polar cosine times uniform azimuth.
    """
    if d == 2:
        th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        nodes = np.stack([np.cos(th), np.sin(th)], axis=1)
        return nodes, np.full(n, 2.0 * np.pi / n), th
    if d == 3:
        n_polar = max(4, int(np.sqrt(n / 2)))
        n_az = 2 * n_polar
        mu, wmu = np.polynomial.legendre.leggauss(n_polar)
        phi = np.linspace(0.0, 2.0 * np.pi, n_az, endpoint=False)
        MU, PHI = np.meshgrid(mu, phi, indexing="ij")
        st = np.sqrt(1.0 - MU ** 2)
        nodes = np.stack([st * np.cos(PHI), st * np.sin(PHI), MU], axis=-1).reshape(-1, 3)
        w = (wmu[:, None] * np.full((1, n_az), 2.0 * np.pi / n_az)).ravel()
        return nodes, w, None
    raise ValueError("dimensions 2 and 3 only")


def icosphere(subdivisions: int = 2):
    """Vertices of a subdivided icosahedron (alternative d=3 direction set)."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
                      [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
                      [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]], dtype=float)
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    verts = [v for v in verts]
    for _ in range(subdivisions):
        new_faces = []
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                v = verts[i] + verts[j]
                v /= np.linalg.norm(v)
                verts.append(v)
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return np.array(verts)


class ChartError(RuntimeError):
    pass


class FlowChart:
    """Chart built by geodesic shooting over an angular lattice."""

    def __init__(self, model, dim: int, s_max: float, n_sigma: int = 256,
                 n_s: int = 400, tol: float = 1e-10):
        self.model = model
        self.dim = int(dim)
        self.lam = model.lam
        self.s_max = float(s_max)
        self.f0 = model.f0
        nodes, weights, thetas = sphere_lattice(self.dim, n_sigma)
        self.sigma_nodes = nodes
        self.sigma_weights = weights
        self.thetas = thetas
        self.flow = FlowSolution(model, nodes, s_max, tol=tol)
        self.tol = tol
        self.s_grid = np.concatenate([np.linspace(0.05, 1.0, 9, endpoint=False),
                                      np.geomspace(1.0, s_max, n_s)])
        self.lattice = self.flow.states(self.s_grid)
        self.defect_max = self.flow.defect_max
        self._check_injectivity()
        if self.dim == 2:
            self._build_splines()

    # -- lattice health ------------------------------------------------------
    def _check_injectivity(self):
        X = self.lattice.x.reshape(-1, self.dim)
        s_rep = np.repeat(self.s_grid, len(self.sigma_nodes))
        try:
            from scipy.spatial import cKDTree
        except ImportError:  # pragma: no cover
            return
        tree = cKDTree(X)
        dist, idx = tree.query(X, k=2)
        near = dist[:, 1]
        ds_pairs = np.abs(s_rep - s_rep[idx[:, 1]])
        suspicious = (near < 1e-9 * (1.0 + np.linalg.norm(X, axis=1))) & (ds_pairs > 1e-6)
        if np.any(suspicious):
            raise ChartError("distinct lattice points coincide: flow is not "
                             "injective at this perturbation strength")

    # -- interpolation (d = 2) -------------------------------------------------
    def _build_splines(self):
        th = self.thetas
        pad = 5
        th_ext = np.concatenate([th[-pad:] - 2 * np.pi, th, th[:pad] + 2 * np.pi])
        ls = np.log(self.s_grid)

        def extend(F):
            return np.concatenate([F[:, -pad:], F, F[:, :pad]], axis=1)

        self._spl = {}
        fields = {
            "x0": self.lattice.x[..., 0], "x1": self.lattice.x[..., 1],
            "xi0": self.lattice.xi[..., 0], "xi1": self.lattice.xi[..., 1],
            "A0": self.lattice.A[..., 0, 0], "A1": self.lattice.A[..., 1, 0],
            "logm": np.log(self.lattice.m_eps),
            "lapS": self.lattice.lapS,
        }
        for name, F in fields.items():
            self._spl[name] = RectBivariateSpline(ls, th_ext, extend(F), kx=5, ky=5)

    def _interp(self, name, s, th):
        th = np.mod(th, 2.0 * np.pi)
        return self._spl[name](np.log(s), th, grid=False)

    # -- queries ---------------------------------------------------------------
    def flow_points(self, s, sigma_idx=None) -> FlowStates:
        """Exact flow states at arclengths `s` on the whole sigma lattice."""
        return self.flow.states(s)

    def phi(self, s, th):
        return np.stack([self._interp("x0", s, th), self._interp("x1", s, th)], axis=-1)

    def inverse(self, xy, tol: float = 1e-11, max_iter: int = 40):
        """(s, theta) with Phi(s, theta) = x, by Newton with the exact
        flow Jacobian columns (xi/K, A); smallest-s convention on ties."""
        if self.dim != 2:
            raise NotImplementedError("chart inverse implemented for d = 2")
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        r = np.linalg.norm(xy, axis=1)
        th = np.mod(np.arctan2(xy[:, 1], xy[:, 0]), 2 * np.pi)
        # flat core: the chart is exactly linear there
        core = r <= 0.98 * self.model.radial.flat_radius
        s = np.where(core, self.f0 * r, np.clip(self.model.S0(r), 0.06, self.s_max * 0.9999))
        free = ~core
        ok = core.copy()
        for _ in range(max_iter):
            if np.all(ok):
                break
            sf, tf = s[free], th[free]
            X = self.phi(sf, tf)
            G = X - xy[free]
            good = np.linalg.norm(G, axis=1) <= tol * (1.0 + r[free])
            ok[free] = good
            xi = np.stack([self._interp("xi0", sf, tf), self._interp("xi1", sf, tf)], -1)
            K = np.sum(xi * xi, axis=-1)
            dds = xi / K[:, None]
            ddth = np.stack([self._interp("A0", sf, tf), self._interp("A1", sf, tf)], -1)
            det = dds[:, 0] * ddth[:, 1] - dds[:, 1] * ddth[:, 0]
            ds = (G[:, 0] * ddth[:, 1] - G[:, 1] * ddth[:, 0]) / det
            dth = (dds[:, 0] * G[:, 1] - dds[:, 1] * G[:, 0]) / det
            ds = np.clip(ds, -0.5 * np.maximum(sf, 1.0), 0.5 * np.maximum(sf, 1.0))
            dth = np.clip(dth, -0.3, 0.3)
            s[free] = np.clip(sf - ds, 0.06, self.s_max * 0.99999)
            th[free] = tf - dth
        if not np.all(ok):
            raise ChartError("chart inverse did not converge for some points")
        return s, np.mod(th, 2 * np.pi)

    def S(self, xy):
        s, _ = self.inverse(xy)
        return s

    def gradS(self, xy):
        s, th = self.inverse(xy)
        return np.stack([self._interp("xi0", s, th), self._interp("xi1", s, th)], -1)

    def m_at(self, xy):
        s, th = self.inverse(xy)
        return np.exp(self._interp("logm", s, th))

    def state_at(self, xy):
        s, th = self.inverse(xy)
        xi = np.stack([self._interp("xi0", s, th), self._interp("xi1", s, th)], -1)
        return {
            "s": s, "theta": th, "xi": xi, "K": np.sum(xi * xi, -1),
            "m": np.exp(self._interp("logm", s, th)),
            "lapS": self._interp("lapS", s, th),
        }

    # -- export ------------------------------------------------------------------
    def export_csv(self, path):
        d = self.dim
        header = (["s"] + [f"sigma{i}" for i in range(d)] + [f"x{i}" for i in range(d)]
                  + [f"xi{i}" for i in range(d)] + ["m_eps", "loggram"])
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(header)
            for i, s in enumerate(self.s_grid):
                for j in range(len(self.sigma_nodes)):
                    row = ([repr(float(s))] + [repr(float(v)) for v in self.sigma_nodes[j]]
                           + [repr(float(v)) for v in self.lattice.x[i, j]]
                           + [repr(float(v)) for v in self.lattice.xi[i, j]]
                           + [repr(float(self.lattice.m_eps[i, j])),
                              repr(float(self.lattice.loggram[i, j]))])
                    wr.writerow(row)


class RadialChart:
    """Closed-form chart of a radial model: Phi(s, sigma) = r(s) sigma,
    S = S0(r), grad S = f(r) rhat, m = r^(d-1)/f(r)."""

    def __init__(self, model, dim: int, s_max: float = np.inf, n_sigma: int = 64):
        if model.pert is not None:
            raise ValueError("RadialChart requires a radial model")
        self.model = model
        self.dim = int(dim)
        self.lam = model.lam
        self.s_max = float(s_max)
        self.f0 = model.f0
        self.sigma_nodes, self.sigma_weights, self.thetas = sphere_lattice(dim, n_sigma)

    def r_of_s(self, s):
        return self.model.s0_inverse(s)

    def S(self, xy):
        r = np.linalg.norm(np.atleast_2d(xy), axis=-1)
        return self.model.S0(r)

    def gradS(self, xy):
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        r = np.linalg.norm(xy, axis=-1)
        return self.model.f(r)[:, None] * xy / r[:, None]

    def m_of_r(self, r):
        r = np.asarray(r, dtype=float)
        return r ** (self.dim - 1) / self.model.f(r)

    def m_at(self, xy):
        return self.m_of_r(np.linalg.norm(np.atleast_2d(xy), axis=-1))

    def lapS_of_r(self, r):
        r = np.asarray(r, dtype=float)
        return self.model.f(r, 1) + (self.dim - 1) * self.model.f(r) / r

    def inverse(self, xy):
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        r = np.linalg.norm(xy, axis=-1)
        return self.model.S0(r), xy / r[:, None]


def build_chart(model, dim: int, s_max: float, n_sigma: int = 256, n_s: int = 400,
                tol: float = 1e-10) -> FlowChart:
    """Geodesic-shooting chart (the construction of record)."""
    return FlowChart(model, dim, s_max, n_sigma=n_sigma, n_s=n_s, tol=tol)
