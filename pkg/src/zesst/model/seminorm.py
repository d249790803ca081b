"""Weighted derivative seminorm of perturbations.

The smallness measure is  max_{|alpha| <= l} sup_x <x>^(mu+|alpha|)
|d^alpha W(x)|, approximated on a geometric radial lattice with uniform
angles.  Derivatives of order <= 2 use the perturbation's exact gradient
and Hessian; orders 3 and 4 are centered finite differences of the exact
Hessian field (adequate for maximizer location and scaling fits; the
result is reported as a lower bound).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np


@dataclass
class SeminormReport:
    value: float
    argmax_x: np.ndarray
    argmax_alpha: tuple
    per_order: dict
    l: int


def _alphas(d: int, l: int):
    out = []
    for a in product(range(l + 1), repeat=d):
        if 0 < sum(a) <= l:
            out.append(a)
    return out


def _fd_hess_entry(pert, xy, i, entry, h):
    e = np.zeros(xy.shape[-1])
    e[i] = 1.0
    hp = pert.hess(xy + h[..., None] * e)[..., entry[0], entry[1]]
    hm = pert.hess(xy - h[..., None] * e)[..., entry[0], entry[1]]
    return (hp - hm) / (2.0 * h)


def _deriv_alpha(pert, xy, alpha, h):
    """d^alpha W for |alpha| <= 4 (exact through order 2, FD beyond)."""
    order = sum(alpha)
    idx = [i for i, a in enumerate(alpha) for _ in range(a)]
    if order == 1:
        return pert.grad(xy)[..., idx[0]]
    if order == 2:
        return pert.hess(xy)[..., idx[0], idx[1]]
    if order == 3:
        return _fd_hess_entry(pert, xy, idx[0], (idx[1], idx[2]), h)
    if order == 4:
        e = np.zeros(xy.shape[-1])
        e[idx[0]] = 1.0
        dp = _fd_hess_entry(pert, xy + h[..., None] * e, idx[1], (idx[2], idx[3]), h)
        dm = _fd_hess_entry(pert, xy - h[..., None] * e, idx[1], (idx[2], idx[3]), h)
        return (dp - dm) / (2.0 * h)
    raise ValueError("seminorm implemented for l <= 4")


def smallness_seminorm(pert, mu: float, l: int = 4, n_r: int = 120, n_angle: int = 48,
                       r_max: float = 1e4, full: bool = False):
    """Lower bound on the smallness seminorm with maximizer location.

    Returns the scalar value, or the full SeminormReport with `full=True`.
    Zero perturbation gives 0.
    """
    if pert is None:
        return SeminormReport(0.0, np.zeros(2), (0,) * 2, {}, l) if full else 0.0
    d = pert.dim
    r0 = max(getattr(pert, "support_radius", 1.0) * 0.5, 1e-2)
    radii = np.geomspace(r0, r_max, n_r)
    thetas = np.linspace(0.0, 2.0 * np.pi, n_angle, endpoint=False)
    if d != 2:
        raise ValueError("seminorm lattice implemented for d = 2")
    R, T = np.meshgrid(radii, thetas, indexing="ij")
    xy = np.stack([R * np.cos(T), R * np.sin(T)], axis=-1).reshape(-1, 2)
    r = np.linalg.norm(xy, axis=-1)
    w = np.sqrt(1.0 + r * r)
    h = 5e-3 * np.maximum(r, 1.0)

    best = 0.0
    best_x = xy[0]
    best_alpha = (0,) * d
    per_order = {}
    vals0 = w ** mu * np.abs(pert.value(xy))
    per_order[0] = float(np.max(vals0))
    k = int(np.argmax(vals0))
    if per_order[0] > best:
        best, best_x, best_alpha = per_order[0], xy[k], (0,) * d
    for alpha in _alphas(d, l):
        order = sum(alpha)
        vals = w ** (mu + order) * np.abs(_deriv_alpha(pert, xy, alpha, h))
        m = float(np.max(vals))
        per_order[order] = max(per_order.get(order, 0.0), m)
        if m > best:
            best = m
            best_x = xy[int(np.argmax(vals))]
            best_alpha = alpha
    rep = SeminormReport(value=best, argmax_x=best_x, argmax_alpha=best_alpha,
                         per_order=per_order, l=l)
    return rep if full else best
