"""Two-dimensional winding example: closed-form eikonal and its potential.

In polar coordinates, for a 2pi-periodic profile g with max g' >= 1 - mu/2,

    S(r, theta) = h(r) * exp( eps * g(theta - eps ln r) * chi(r/n) ),
    V(x)        = -|grad S|^2         (zero energy),

with h the truncated phase profile h(r) = int_0^r sqrt(-V_n).  All partial
derivatives up to third order are evaluated in closed form, which makes this
family the exact oracle for charts, measures and perturbation seminorms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cutoffs import CutoffKit, DEFAULT_KIT
from .potentials import (EnergyModel, PowerLawProfile, PreconditionError,
                         RadialPotential, truncate_radial)
from ..numutil import ChebAntiderivative


@dataclass(frozen=True)
class SinProfile:
    """g(psi) = amplitude * sin(psi)."""

    amplitude: float = 1.0

    def val(self, psi, k: int = 0):
        return self.amplitude * np.sin(np.asarray(psi, dtype=float) + k * np.pi / 2.0)

    @property
    def max_deriv(self) -> float:
        return abs(self.amplitude)

    label = "sin"


def make_profile(name: str):
    if name == "sin":
        return SinProfile()
    raise ValueError(f"unknown periodic profile {name!r}")


class TruncatedPhase:
    """h(r) = int_0^r sqrt(-V_n(t)) dt with derivatives up to order 3.

    Linear core h = r/n for r <= n; power tail (1-mu/2)^-1 r^(1-mu/2) + C_n
    for r >= 2n.
    """

    def __init__(self, radial: RadialPotential):
        self.radial = radial
        self.n = radial.flat_radius
        self._anti = ChebAntiderivative(lambda t: self.deriv(t, 1), self.n,
                                        breakpoints=radial.knots, first_width=self.n)

    def value(self, r):
        r = np.asarray(r, dtype=float)
        core = np.minimum(r, self.n) / self.n
        out = core
        mask = r > self.n
        if np.any(mask):
            out = out + np.where(mask, self._anti(np.maximum(r, self.n)), 0.0)
        return out

    def deriv(self, r, k: int = 1):
        r = np.asarray(r, dtype=float)
        if k == 0:
            return self.value(r)
        h1 = np.sqrt(-self.radial.V(r))
        if k == 1:
            return h1
        h2 = -self.radial.deriv(r, 1) / (2.0 * h1)
        if k == 2:
            return h2
        if k == 3:
            return (-self.radial.deriv(r, 2) - 2.0 * h2 * h2) / (2.0 * h1)
        raise ValueError("TruncatedPhase derivatives implemented for k <= 3")


# ---------------------------------------------------------------------------
# polar <-> cartesian derivative conversion
# ---------------------------------------------------------------------------

def polar_grad_to_cart(r, th, Gr, Gt):
    c, s = np.cos(th), np.sin(th)
    gx = c * Gr - s / r * Gt
    gy = s * Gr + c / r * Gt
    return np.stack([gx, gy], axis=-1)

def polar_hess_to_cart(r, th, Gr, Gt, Grr, Grt, Gtt):
    c, s = np.cos(th), np.sin(th)
    gxx = c * c * Grr - 2 * c * s / r * Grt + s * s / r ** 2 * Gtt \
        + s * s / r * Gr + 2 * c * s / r ** 2 * Gt
    gyy = s * s * Grr + 2 * c * s / r * Grt + c * c / r ** 2 * Gtt \
        + c * c / r * Gr - 2 * c * s / r ** 2 * Gt
    gxy = c * s * Grr + (c * c - s * s) / r * Grt - c * s / r ** 2 * Gtt \
        - c * s / r * Gr - (c * c - s * s) / r ** 2 * Gt
    H = np.empty(np.shape(r) + (2, 2))
    H[..., 0, 0] = gxx
    H[..., 1, 1] = gyy
    H[..., 0, 1] = gxy
    H[..., 1, 0] = gxy
    return H


class ExampleEikonal2D:
    """Closed-form zero-energy eikonal family in d = 2."""

    def __init__(self, mu: float, n: int, eps: float, g=None,
                 kit: CutoffKit = DEFAULT_KIT):
        g = g if g is not None else SinProfile()
        if g.max_deriv < 1.0 - mu / 2.0:
            raise PreconditionError(
                f"profile inadmissible: max g' = {g.max_deriv:.4g} < 1 - mu/2 = "
                f"{1 - mu / 2:.4g}")
        self.mu, self.n, self.eps, self.g, self.kit = mu, int(n), eps, g, kit
        self.radial = truncate_radial(PowerLawProfile(mu), n, kit,
                                      label=f"example(mu={mu}, n={n})")
        self.h = TruncatedPhase(self.radial)

    # -- polar derivative stacks ------------------------------------------
    def _P_stack(self, r, th):
        eps, n = self.eps, self.n
        psi = th - eps * np.log(r)
        g = [self.g.val(psi, k) for k in range(4)]
        c = [self.kit.chi_plus(r / n, k) * n ** (-k) for k in range(4)]
        pr = -eps / r
        prr = eps / r ** 2
        prrr = -2.0 * eps / r ** 3
        P = {}
        P[""] = eps * g[0] * c[0]
        P["r"] = eps * (g[1] * pr * c[0] + g[0] * c[1])
        P["t"] = eps * g[1] * c[0]
        P["rr"] = eps * (g[2] * pr ** 2 * c[0] + g[1] * prr * c[0]
                         + 2 * g[1] * pr * c[1] + g[0] * c[2])
        P["rt"] = eps * (g[2] * pr * c[0] + g[1] * c[1])
        P["tt"] = eps * g[2] * c[0]
        P["rrr"] = eps * (g[3] * pr ** 3 * c[0] + 3 * g[2] * pr * prr * c[0]
                          + 3 * g[2] * pr ** 2 * c[1] + g[1] * prrr * c[0]
                          + 3 * g[1] * prr * c[1] + 3 * g[1] * pr * c[2]
                          + g[0] * c[3])
        P["rrt"] = eps * (g[3] * pr ** 2 * c[0] + g[2] * prr * c[0]
                          + 2 * g[2] * pr * c[1] + g[1] * c[2])
        P["rtt"] = eps * (g[3] * pr * c[0] + g[2] * c[1])
        P["ttt"] = eps * g[3] * c[0]
        return P

    def S_polar(self, r, th, order: int = 3):
        """Partial derivatives of S in polar coordinates up to `order`."""
        r = np.asarray(r, dtype=float)
        th = np.asarray(th, dtype=float)
        h = [self.h.deriv(r, k) for k in range(4)]
        P = self._P_stack(r, th)
        E = np.exp(P[""])
        S = {"": h[0] * E}
        if order >= 1:
            S["r"] = (h[1] + h[0] * P["r"]) * E
            S["t"] = h[0] * P["t"] * E
        if order >= 2:
            S["rr"] = (h[2] + 2 * h[1] * P["r"] + h[0] * (P["rr"] + P["r"] ** 2)) * E
            S["rt"] = (h[1] * P["t"] + h[0] * (P["rt"] + P["r"] * P["t"])) * E
            S["tt"] = h[0] * (P["tt"] + P["t"] ** 2) * E
        if order >= 3:
            S["rrr"] = (h[3] + 3 * h[2] * P["r"] + 3 * h[1] * (P["rr"] + P["r"] ** 2)
                        + h[0] * (P["rrr"] + 3 * P["r"] * P["rr"] + P["r"] ** 3)) * E
            S["rrt"] = (h[2] * P["t"] + 2 * h[1] * (P["rt"] + P["r"] * P["t"])
                        + h[0] * (P["rrt"] + P["rr"] * P["t"] + 2 * P["r"] * P["rt"]
                                  + P["r"] ** 2 * P["t"])) * E
            S["rtt"] = (h[1] * (P["tt"] + P["t"] ** 2)
                        + h[0] * (P["rtt"] + P["r"] * P["tt"] + 2 * P["t"] * P["rt"]
                                  + P["r"] * P["t"] ** 2)) * E
            S["ttt"] = h[0] * (P["ttt"] + 3 * P["t"] * P["tt"] + P["t"] ** 3) * E
        return S

    def K0_polar(self, r, th, order: int = 2):
        """|grad S|^2 = S_r^2 + S_t^2 / r^2 and polar derivatives (order <= 2)."""
        S = self.S_polar(r, th, order=order + 1)
        r = np.asarray(r, dtype=float)
        K = {"": S["r"] ** 2 + S["t"] ** 2 / r ** 2}
        if order >= 1:
            K["r"] = 2 * S["r"] * S["rr"] + 2 * S["t"] * S["rt"] / r ** 2 \
                - 2 * S["t"] ** 2 / r ** 3
            K["t"] = 2 * S["r"] * S["rt"] + 2 * S["t"] * S["tt"] / r ** 2
        if order >= 2:
            K["rr"] = 2 * S["rr"] ** 2 + 2 * S["r"] * S["rrr"] \
                + 2 * (S["rt"] ** 2 + S["t"] * S["rrt"]) / r ** 2 \
                - 8 * S["t"] * S["rt"] / r ** 3 + 6 * S["t"] ** 2 / r ** 4
            K["rt"] = 2 * (S["rt"] * S["rr"] + S["r"] * S["rrt"]) \
                + 2 * (S["tt"] * S["rt"] + S["t"] * S["rtt"]) / r ** 2 \
                - 4 * S["t"] * S["tt"] / r ** 3
            K["tt"] = 2 * S["rt"] ** 2 + 2 * S["r"] * S["rtt"] \
                + 2 * (S["tt"] ** 2 + S["t"] * S["ttt"]) / r ** 2
        return K

    # -- cartesian interface ------------------------------------------------
    @staticmethod
    def _polar(xy):
        xy = np.asarray(xy, dtype=float)
        r = np.hypot(xy[..., 0], xy[..., 1])
        th = np.arctan2(xy[..., 1], xy[..., 0])
        return r, th

    def S(self, xy):
        r, th = self._polar(xy)
        return self.S_polar(r, th, order=0)[""]

    def gradS(self, xy):
        r, th = self._polar(xy)
        S = self.S_polar(r, th, order=1)
        return polar_grad_to_cart(r, th, S["r"], S["t"])

    def K0(self, xy):
        r, th = self._polar(xy)
        return self.K0_polar(r, th, order=0)[""]

    def gradK0(self, xy):
        r, th = self._polar(xy)
        K = self.K0_polar(r, th, order=1)
        return polar_grad_to_cart(r, th, K["r"], K["t"])

    def hessK0(self, xy):
        r, th = self._polar(xy)
        K = self.K0_polar(r, th, order=2)
        return polar_hess_to_cart(r, th, K["r"], K["t"], K["rr"], K["rt"], K["tt"])

    def V(self, xy):
        return -self.K0(xy)


class ExamplePerturbation:
    """W(x) = V(x) - V_n(r) for the winding example; vanishes for r <= n."""

    dim = 2

    def __init__(self, eik: ExampleEikonal2D, order: int = 4):
        self.eik = eik
        self.order = order
        self.support_radius = eik.n

    def value(self, xy):
        xy = np.asarray(xy, dtype=float)
        r = np.hypot(xy[..., 0], xy[..., 1])
        return -self.eik.K0(xy) - self.eik.radial.V(r)

    def grad(self, xy):
        xy = np.asarray(xy, dtype=float)
        r = np.hypot(xy[..., 0], xy[..., 1])
        rs = np.maximum(r, 1e-300)
        return -self.eik.gradK0(xy) - self.eik.radial.deriv(r, 1)[..., None] * xy / rs[..., None]

    def hess(self, xy):
        xy = np.asarray(xy, dtype=float)
        r = np.hypot(xy[..., 0], xy[..., 1])
        rs = np.maximum(r, 1e-300)
        xhat = xy / rs[..., None]
        P = xhat[..., :, None] * xhat[..., None, :]
        Pperp = np.eye(2) - P
        Vp = self.eik.radial.deriv(r, 1)
        Vpp = self.eik.radial.deriv(r, 2)
        radial_hess = Vpp[..., None, None] * P + (Vp / rs)[..., None, None] * Pperp
        return -self.eik.hessK0(xy) - radial_hess


def example_perturbation(mu: float, n: int, eps: float, g="sin",
                         kit: CutoffKit = DEFAULT_KIT):
    """Build the winding-example pair: the closed-form eikonal and the
    zero-energy model whose conformal factor it solves exactly."""
    prof = make_profile(g) if isinstance(g, str) else g
    eik = ExampleEikonal2D(mu, n, eps, prof, kit)
    pert = ExamplePerturbation(eik) if eps != 0.0 else None
    model = EnergyModel(lam=0.0, radial=eik.radial, pert=pert)
    return eik, model
