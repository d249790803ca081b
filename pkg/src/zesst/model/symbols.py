"""Classical phase-space symbols and their Poisson-bracket identities.

The localization observables are

    a_lam = |xi|^2 / f(r,lam)^2,      b_lam = (xi . x) / (f(r,lam) rtilde(r)),

together with the zero-energy pair (a_0, b_0) built on the decay weight
f_0(x) = (Kc <x>^-mu)^(1/2) and x/<x>.  The bracket of b with the radial
Hamiltonian h_rad = |xi|^2 + V_rad has the closed form

    {h_rad, b} = (2f/rt)(1 - r V'/(2f^2))(1 - b^2) + (2/(f rt))(h_rad - lam),

exact wherever rtilde(r) = r (r >= 3/4 for the fixed profile); adding a
perturbation W contributes  -(grad W . x)/(f rt) - 2W/(f rt)  on top of the
same closed form, which is the O(eps) f/rt remainder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cutoffs import CutoffKit, DEFAULT_KIT
from .potentials import EnergyModel


@dataclass(frozen=True)
class BracketDecomposition:
    lhs: np.ndarray          # {h, b} from closed-form partial derivatives
    rhs_flow: np.ndarray     # (2f/rt)(1 - rV'/(2f^2))(1 - b^2)
    rhs_shell: np.ndarray    # (2/(f rt))(h - lam)
    remainder: np.ndarray    # lhs - rhs_flow - rhs_shell (zero radially, O(eps) f/rt else)


def symbol_ab(model: EnergyModel, x, xi, kind: str = "lambda",
              kit: CutoffKit = DEFAULT_KIT):
    """(a, b) at phase points; kind = "lambda" uses f(r, lam) and rtilde,
    kind = "zero" uses the decay weight f_0 and x/<x>."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    xidotx = np.sum(xi * x, axis=-1)
    xi2 = np.sum(xi * xi, axis=-1)
    if kind == "zero":
        rad = model.radial
        kc = rad.eps1 * rad.eps1_tilde / (2.0 - rad.mu)
        f = np.sqrt(kc) * (1.0 + r * r) ** (-rad.mu / 4.0)
        denom = np.sqrt(1.0 + r * r)
    else:
        f = model.f(r)
        denom = kit.rtilde(r)
    a = xi2 / f ** 2
    b = xidotx / (f * denom)
    return a, b


def h_rad(model: EnergyModel, x, xi):
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    return np.sum(np.asarray(xi) ** 2, axis=-1) + model.radial.V(r)


def h_eps(model: EnergyModel, x, xi):
    out = h_rad(model, x, xi)
    if model.pert is not None:
        out = out + model.pert.value(np.asarray(x, dtype=float))
    return out


def poisson_bracket_b(model: EnergyModel, x, xi, perturbed: bool = False,
                      kit: CutoffKit = DEFAULT_KIT) -> BracketDecomposition:
    """Bracket {h, b_lam} from analytic partial derivatives, with the two
    closed-form terms and the perturbation remainder.

    Phase points with f = 0 are rejected (cannot occur at lam >= 0 for
    admissible potentials).
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    f = model.f(r)
    if np.any(f <= 0.0):
        raise ValueError("phase point with f = 0 rejected")
    fp = model.f(r, 1)
    rt = kit.rtilde(r)
    rtp = kit.rtilde(r, 1)
    Vp = model.radial.deriv(r, 1)
    xhat = x / np.maximum(r, 1e-300)[..., None]
    xidotx = np.sum(xi * x, axis=-1)
    xi2 = np.sum(xi * xi, axis=-1)
    b = xidotx / (f * rt)

    # 2 xi . d_x b - dV/dx . d_xi b,  all partials in closed form
    lhs = 2.0 * xi2 / (f * rt) \
        - 2.0 * xidotx * np.sum(xi * xhat, axis=-1) * (fp * rt + f * rtp) / (f * rt) ** 2 \
        - Vp * r / (f * rt)
    lam = model.lam
    hval = xi2 + model.radial.V(r)
    if perturbed and model.pert is not None:
        lhs = lhs - np.sum(model.pert.grad(x) * x, axis=-1) / (f * rt)
        hval = hval + model.pert.value(x)
    rhs_flow = (2.0 * f / rt) * (1.0 - r * Vp / (2.0 * f ** 2)) * (1.0 - b ** 2)
    rhs_shell = (2.0 / (f * rt)) * (hval - lam)
    return BracketDecomposition(lhs=lhs, rhs_flow=rhs_flow, rhs_shell=rhs_shell,
                                remainder=lhs - rhs_flow - rhs_shell)


def poisson_bracket_fd(model: EnergyModel, x, xi, perturbed: bool = False,
                       kit: CutoffKit = DEFAULT_KIT, h_rel: float = 1e-3):
    """{h, b_lam} by centered finite differences with one Richardson pass,
    independent of every analytic derivative above."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    d = x.shape[-1]

    def bfun(xx, xxi):
        _, b = symbol_ab(model, xx, xxi, kind="lambda", kit=kit)
        return b

    def hfun(xx, xxi):
        return h_eps(model, xx, xxi) if perturbed else h_rad(model, xx, xxi)

    r = np.linalg.norm(x, axis=-1)
    out = np.zeros(x.shape[:-1])
    for j in range(d):
        ej = np.zeros(d)
        ej[j] = 1.0
        hx = (h_rel * np.maximum(r, 1.0))[..., None] * ej
        hxi = (h_rel * np.maximum(np.linalg.norm(xi, axis=-1), 0.3))[..., None] * ej

        def d4(fun, pt, other, step, wrt_x):
            def ev(shift):
                return fun(pt + shift, other) if wrt_x else fun(other, pt + shift)
            h1 = np.linalg.norm(step, axis=-1)
            d_h = (ev(step) - ev(-step)) / (2.0 * h1)
            d_h2 = (ev(step / 2.0) - ev(-step / 2.0)) / h1
            return (4.0 * d_h2 - d_h) / 3.0

        dbdx = d4(bfun, x, xi, hx, True)
        dbdxi = d4(bfun, xi, x, hxi, False)
        dhdx = d4(hfun, x, xi, hx, True)
        dhdxi = d4(hfun, xi, x, hxi, False)
        out = out + dhdxi * dbdx - dhdx * dbdxi
    return out


def sample_phase_points(model: EnergyModel, n: int, rng, d: int = 2,
                        r_range=(1.0, 1e4), on_shell: bool = False,
                        b2_max: float = None, kit: CutoffKit = DEFAULT_KIT):
    """Random phase points with log-uniform radii; optionally restricted to
    the energy shell h = lam and to {b^2 <= b2_max}."""
    r = np.exp(rng.uniform(np.log(r_range[0]), np.log(r_range[1]), n))
    u = rng.normal(size=(n, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    x = r[:, None] * u
    if on_shell:
        kloc = model.K(x) if model.pert is not None else model.K0r(r)
        direction = rng.normal(size=(n, d))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        if b2_max is not None:
            # bias directions towards the transverse cone so b^2 <= b2_max
            for _ in range(200):
                _, b = symbol_ab(model, x, np.sqrt(kloc)[:, None] * direction, kit=kit)
                bad = b ** 2 > b2_max
                if not np.any(bad):
                    break
                mix = rng.normal(size=(int(np.sum(bad)), d))
                mix /= np.linalg.norm(mix, axis=1, keepdims=True)
                direction[bad] = mix
        xi = np.sqrt(kloc)[:, None] * direction
    else:
        scale = model.f(r) * np.exp(rng.uniform(-1.0, 1.0, n))
        direction = rng.normal(size=(n, d))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        xi = scale[:, None] * direction
    return x, xi
