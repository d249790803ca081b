"""Unit-speed geodesic flow of the conformal metric K dx^2.

The flow is integrated in Hamiltonian form

    dx/ds  = xi / K(x),          dxi/ds = |xi|^2 grad K(x) / (2 K(x)^2),

whose exact solutions conserve |xi|^2 / K = 1 (the eikonal equation along
the trajectory); the conservation defect is the accept/retry criterion.
The variational matrix d(x, xi)/d(initial angles) rides along in the same
system and yields the angular Gram determinant used by the surface density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp


class MetricDegeneracyError(RuntimeError):
    """K <= 0 encountered along a trajectory."""


class StiffnessError(RuntimeError):
    """Integrator step-size underflow."""


def tangent_frame(sigmas: np.ndarray) -> np.ndarray:
    """Orthonormal tangent vectors at unit directions: shape (m, d, d-1)."""
    m, d = sigmas.shape
    if d == 2:
        t = np.stack([-sigmas[:, 1], sigmas[:, 0]], axis=1)
        return t[:, :, None]
    if d == 3:
        ref = np.tile(np.array([0.0, 0.0, 1.0]), (m, 1))
        swap = np.abs(sigmas[:, 2]) > 0.9
        ref[swap] = np.array([1.0, 0.0, 0.0])
        t1 = np.cross(ref, sigmas)
        t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
        t2 = np.cross(sigmas, t1)
        return np.stack([t1, t2], axis=2)
    raise ValueError("dimensions 2 and 3 only")


@dataclass
class FlowStates:
    """Flow data at a batch of arclengths: arrays indexed (s, sigma, ...)."""

    s: np.ndarray
    x: np.ndarray        # (n_s, m, d)
    xi: np.ndarray       # (n_s, m, d)
    K: np.ndarray        # (n_s, m)
    m_eps: np.ndarray    # (n_s, m)
    loggram: np.ndarray  # (n_s, m)
    lapS: np.ndarray     # (n_s, m)
    defect: np.ndarray   # (n_s, m): |xi|^2/K - 1
    A: np.ndarray        # (n_s, m, d, d-1) position variational block


class FlowSolution:
    """Dense geodesic-flow solution for a sigma batch (s >= s_start = 1 by
    the flat-core initial condition; s <= 1 is the exact linear regime)."""

    def __init__(self, model, sigmas: np.ndarray, s_max: float, tol: float = 1e-10,
                 max_retries: int = 2):
        self.model = model
        self.sigmas = np.asarray(sigmas, dtype=float)
        self.m, self.d = self.sigmas.shape
        self.s_max = float(s_max)
        self.f0 = model.f0
        self.frames = tangent_frame(self.sigmas)
        self.tol = float(tol)
        self._integrate(max_retries)

    # -- state packing -----------------------------------------------------
    def _pack(self, x, xi, A, B):
        return np.concatenate([x, xi, A.reshape(self.m, -1), B.reshape(self.m, -1)],
                              axis=1).ravel()

    def _unpack(self, y):
        d, m = self.d, self.m
        nv = d * (d - 1)
        Y = y.reshape(m, 2 * d + 2 * nv)
        x = Y[:, :d]
        xi = Y[:, d:2 * d]
        A = Y[:, 2 * d:2 * d + nv].reshape(m, d, d - 1)
        B = Y[:, 2 * d + nv:].reshape(m, d, d - 1)
        return x, xi, A, B

    def _rhs(self, s, y):
        x, xi, A, B = self._unpack(y)
        K = self.model.K(x)
        if np.any(K <= 0.0):
            raise MetricDegeneracyError(
                f"metric degenerate at s={s:.6g}, min K = {np.min(K):.3e}")
        G = self.model.gradK(x)
        H = self.model.hessK(x)
        xi2 = np.sum(xi * xi, axis=1)
        xdot = xi / K[:, None]
        xidot = (xi2 / (2.0 * K * K))[:, None] * G
        GdotA = np.einsum("mi,mia->ma", G, A)
        Adot = B / K[:, None, None] - (xi[:, :, None] * GdotA[:, None, :]) / (K * K)[:, None, None]
        xiB = np.einsum("mi,mia->ma", xi, B)
        HA = np.einsum("mij,mja->mia", H, A)
        Bdot = (G[:, :, None] * xiB[:, None, :]) / (K * K)[:, None, None] \
            + (xi2 / (2.0 * K * K))[:, None, None] * HA \
            - (G[:, :, None] * GdotA[:, None, :]) * (xi2 / K ** 3)[:, None, None]
        return self._pack(xdot, xidot, Adot, Bdot)

    def _initial_state(self):
        x = self.sigmas / self.f0
        xi = self.f0 * self.sigmas
        A = self.frames / self.f0
        B = self.frames * self.f0
        return self._pack(x, xi, A, B)

    def _integrate(self, max_retries: int):
        y0 = self._initial_state()
        tol = self.tol
        for attempt in range(max_retries + 1):
            sol = solve_ivp(self._rhs, (1.0, self.s_max), y0, method="DOP853",
                            rtol=tol, atol=tol * 1e-2, dense_output=True)
            if not sol.success:
                if "step size" in (sol.message or "").lower():
                    raise StiffnessError(sol.message)
                raise RuntimeError(f"flow integration failed: {sol.message}")
            self.sol = sol.sol
            check = np.geomspace(1.0, self.s_max, 64)
            defect = np.max(np.abs(self.states(check).defect))
            self.defect_max = float(defect)
            if defect <= 10.0 * self.tol or attempt == max_retries:
                break
            tol = tol / 30.0

    # -- evaluation ----------------------------------------------------------
    def states(self, s_values) -> FlowStates:
        s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
        n = len(s_values)
        d, m = self.d, self.m
        out_x = np.empty((n, m, d))
        out_xi = np.empty((n, m, d))
        out_A = np.empty((n, m, d, d - 1))
        out_B = np.empty((n, m, d, d - 1))
        core = s_values <= 1.0
        if np.any(core):
            sc = s_values[core]
            out_x[core] = sc[:, None, None] * self.sigmas[None, :, :] / self.f0
            out_xi[core] = np.broadcast_to(self.f0 * self.sigmas, (int(np.sum(core)), m, d))
            out_A[core] = sc[:, None, None, None] * self.frames[None] / self.f0
            out_B[core] = np.broadcast_to(self.f0 * self.frames, (int(np.sum(core)), m, d, d - 1))
        if np.any(~core):
            st = s_values[~core]
            Y = self.sol(st)  # (dim, n)
            for k, yk in enumerate(Y.T):
                x, xi, A, B = self._unpack(yk)
                idx = np.nonzero(~core)[0][k]
                out_x[idx], out_xi[idx], out_A[idx], out_B[idx] = x, xi, A, B
        K = self.model.K(out_x.reshape(-1, d)).reshape(n, m)
        xi2 = np.sum(out_xi ** 2, axis=-1)
        defect = xi2 / K - 1.0
        # Gram determinant of the angular frame
        AtA = np.einsum("smia,smib->smab", out_A, out_A)
        if d == 2:
            gram = AtA[..., 0, 0]
        else:
            gram = AtA[..., 0, 0] * AtA[..., 1, 1] - AtA[..., 0, 1] * AtA[..., 1, 0]
        loggram = np.log(np.maximum(gram, 1e-300))
        m_eps = np.sqrt(np.maximum(gram, 0.0) / K)
        # Laplacian of S from d/ds ln|g| and d/ds ln K
        G = self.model.gradK(out_x.reshape(-1, d)).reshape(n, m, d)
        GdotA = np.einsum("smi,smia->sma", G, out_A)
        Adot = out_B / K[..., None, None] - (out_xi[..., None] * GdotA[:, :, None, :]) \
            / (K * K)[..., None, None]
        dAtA = np.einsum("smia,smib->smab", Adot, out_A)
        dAtA = dAtA + np.swapaxes(dAtA, -1, -2)
        if d == 2:
            dlng = dAtA[..., 0, 0] / AtA[..., 0, 0]
        else:
            inv = np.linalg.inv(AtA)
            dlng = np.einsum("smab,smba->sm", inv, dAtA)
        dlnK = np.einsum("smi,smi->sm", G, out_xi) / (K * K)
        lapS = 0.5 * K * (dlng + dlnK)
        if np.any(gram[s_values > 1e-12] <= 0.0):
            raise MetricDegeneracyError("non-positive angular Gram determinant "
                                        "(conjugate point)")
        return FlowStates(s=s_values, x=out_x, xi=out_xi, K=K, m_eps=m_eps,
                          loggram=loggram, lapS=lapS, defect=defect,
                          A=out_A)
