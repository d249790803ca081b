"""Radial potential families, truncation, and the energy model.

The structural constants follow the standing assumptions on the
unperturbed potential: V_rad <= -eps1 <r>^-mu, weighted derivative
bounds <r>^(mu+k) |V^(k)| < C, the virial inequality
-2 V_rad - r V_rad' >= -eps1_tilde V_rad, and a flat core
V_rad(r) = V_rad(0) for r <= R = (-V_rad(0))^(-1/2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import brentq

from .cutoffs import CutoffKit, DEFAULT_KIT
from ..numutil import ChebAntiderivative


class PreconditionError(ValueError):
    """A construction precondition failed; the message carries the inequality."""


# ---------------------------------------------------------------------------
# Raw profiles (inputs to truncation)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerLawProfile:
    """Raw attractive tail -r^-mu (singular at 0; only used through truncation)."""

    mu: float
    eps1: float = 1.0

    @property
    def eps1_tilde(self) -> float:
        # -2V - rV' = (2 - mu) r^-mu, so the best virial constant is 2 - mu.
        return 2.0 - self.mu

    def deriv(self, r, k: int = 0):
        r = np.asarray(r, dtype=float)
        coef = -1.0
        for j in range(k):
            coef *= -(self.mu + j)
        with np.errstate(divide="ignore", over="ignore"):
            out = coef * r ** (-self.mu - k)
        return out


def angle_bracket(r, k: int = 0):
    """<r> = sqrt(1+r^2) and its first two derivatives."""
    r = np.asarray(r, dtype=float)
    b = np.sqrt(1.0 + r * r)
    if k == 0:
        return b
    if k == 1:
        return r / b
    if k == 2:
        return 1.0 / b ** 3
    raise ValueError("angle_bracket derivatives implemented for k <= 2")


@dataclass(frozen=True)
class PositiveTailRadial:
    """V = +eps1 <r>^-mu: outside the admissible class (sign), used as the
    control model for limiting-absorption failure probes."""

    mu: float = 1.0
    eps1: float = 1.0
    eps1_tilde: float = 0.0
    flat_radius: float = 0.0
    label: str = "positive-tail"
    knots: tuple = ()

    def deriv(self, r, k: int = 0):
        r = np.asarray(r, dtype=float)
        m = self.mu
        b = np.sqrt(1.0 + r * r)
        if k == 0:
            return self.eps1 * b ** (-m)
        if k == 1:
            return self.eps1 * (-m) * r * b ** (-m - 2)
        if k == 2:
            return self.eps1 * (-m) * (b ** (-m - 2) + r * r * (-m - 2) * b ** (-m - 4))
        raise ValueError("PositiveTailRadial derivatives implemented for k <= 2")

    def V(self, r):
        return self.deriv(r, 0)


# ---------------------------------------------------------------------------
# Truncated / flat-core radial potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialPotential:
    """Smooth radial potential with flat core and structural constants.

    `deriv_fn(r, k)` evaluates the k-th derivative; `knots` are the radii
    where the defining profile is only finitely smooth (panel/ODE breakpoints).
    """

    mu: float
    eps1: float
    eps1_tilde: float
    flat_radius: float
    deriv_fn: object = field(compare=False, repr=False)
    knots: tuple = ()
    label: str = ""

    def deriv(self, r, k: int = 0):
        return self.deriv_fn(r, k)

    def V(self, r):
        return self.deriv_fn(r, 0)

    @property
    def v0(self) -> float:
        return float(self.deriv_fn(np.array([0.0]), 0)[0])


def truncate_radial(raw, n: int, kit: CutoffKit = DEFAULT_KIT, strict: bool = True,
                    label: str = "") -> RadialPotential:
    """Flat-core truncation V_n(r) = V_raw(r) chi_plus(r/n) - n^-2 chi_minus(r/n).

    Requires n large enough that eps1 <2n>^-mu >= n^-2; the output keeps the
    raw virial constant, has eps1 = n^-2 and flat radius n.
    """
    n = int(n)
    mu = raw.mu
    lhs = raw.eps1 * (1.0 + 4.0 * n * n) ** (-mu / 2.0)
    rhs = n ** (-2.0)
    if strict and lhs < rhs:
        raise PreconditionError(
            f"truncation scale too small: eps1*<2n>^-mu = {lhs:.6g} < n^-2 = {rhs:.6g} "
            f"(mu={mu}, n={n})")

    inv_n2 = 1.0 / (n * n)

    def deriv_fn(r, k: int = 0):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        # flat region: chi_plus and derivatives vanish for r <= n
        mask = r > n
        if np.any(mask):
            rm = r[mask]
            acc = np.zeros_like(rm)
            for j in range(k + 1):
                cj = kit.chi_plus(rm / n, k - j) * n ** (-(k - j))
                acc += comb(k, j) * (raw.deriv(rm, j) + (inv_n2 if j == 0 else 0.0)) * cj
            out[mask] = acc
        if k == 0:
            out = out - inv_n2
        return out

    return RadialPotential(
        mu=mu, eps1=inv_n2, eps1_tilde=raw.eps1_tilde, flat_radius=float(n),
        deriv_fn=deriv_fn, knots=(float(n), 2.0 * n),
        label=label or f"trunc(mu={mu}, n={n})")


def flat_well(v0: float, a: float) -> RadialPotential:
    """Sharp finite well V = -v0 on [0, a), 0 beyond: the textbook comparison
    model (outside the long-range class; positive energies only)."""

    def deriv_fn(r, k: int = 0):
        r = np.asarray(r, dtype=float)
        if k == 0:
            return np.where(r < a, -v0, 0.0)
        return np.zeros_like(r)

    return RadialPotential(mu=1.0, eps1=0.0, eps1_tilde=0.0, flat_radius=float(a),
                           deriv_fn=deriv_fn, knots=(float(a),), label=f"flat-well({v0},{a})")


def condition_report(pot: RadialPotential, r_max: float = 1e8, l: int = 4,
                     n_grid: int = 4000) -> dict:
    """Pointwise margins of the three structural inequalities on a log grid."""
    r = np.geomspace(max(pot.flat_radius, 1.0) * 1e-3, r_max, n_grid)
    V = pot.V(r)
    Vp = pot.deriv(r, 1)
    w = np.sqrt(1.0 + r * r)
    rep = {
        "cond1_margin": float(np.min(-V - pot.eps1 * w ** (-pot.mu))),
        "virial_margin": float(np.min(-2.0 * V - r * Vp + pot.eps1_tilde * V)),
        "flat_defect": float(np.max(np.abs(pot.V(np.linspace(0, pot.flat_radius, 200))
                                           - pot.v0))),
    }
    rep["deriv_bounds"] = {
        k: float(np.max(w ** (pot.mu + k) * np.abs(pot.deriv(r, k)))) for k in range(l + 1)
    }
    rep["ok"] = rep["cond1_margin"] >= -1e-12 and rep["virial_margin"] >= -1e-10 \
        and rep["flat_defect"] == 0.0
    return rep


# ---------------------------------------------------------------------------
# Energy model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyModel:
    """Energy lambda >= 0 together with the radial part, an optional smooth
    perturbation W (entering the conformal factor K = lambda - V_rad - W) and
    an optional bounded compactly supported local term V2 (seen only by the
    Schroedinger operator, never by the eikonal geometry)."""

    lam: float
    radial: RadialPotential
    pert: object = None
    v2: object = None

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("negative energy rejected")

    # -- radial quantities ---------------------------------------------------
    def K0r(self, r):
        return self.lam - self.radial.V(np.asarray(r, dtype=float))

    def f(self, r, k: int = 0):
        """f(r, lambda) = sqrt(lambda - V_rad(r)) and derivatives (k <= 2)."""
        r = np.asarray(r, dtype=float)
        f0 = np.sqrt(self.K0r(r))
        if k == 0:
            return f0
        f1 = -self.radial.deriv(r, 1) / (2.0 * f0)
        if k == 1:
            return f1
        if k == 2:
            return (-self.radial.deriv(r, 2) - 2.0 * f1 * f1) / (2.0 * f0)
        raise ValueError("f derivatives implemented for k <= 2")

    @property
    def f0(self) -> float:
        """f(0, lambda), the flat-core phase speed."""
        return float(np.sqrt(self.lam - self.radial.v0))

    def S0(self, r):
        """S0(r) = int_0^r f(t, lambda) dt, exact in the flat core and by
        panelwise Chebyshev antiderivatives beyond it."""
        r = np.asarray(r, dtype=float)
        R = self.radial.flat_radius
        anti = self._s0_anti()
        rc = np.minimum(r, R)
        out = self.f0 * rc
        mask = r > R
        if np.any(mask):
            out = out + np.where(mask, anti(np.maximum(r, R)), 0.0)
        return out

    def _s0_anti(self):
        if not hasattr(self, "_s0_cache"):
            anti = ChebAntiderivative(lambda t: self.f(t), self.radial.flat_radius,
                                      breakpoints=self.radial.knots,
                                      first_width=max(self.radial.flat_radius, 1.0))
            object.__setattr__(self, "_s0_cache", anti)
        return self._s0_cache

    def s0_inverse(self, s):
        """r such that S0(r) = s (safeguarded Newton; S0 is strictly increasing)."""
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s).astype(float)
        r = np.maximum(s / self.f0, 1e-12)
        for _ in range(60):
            g = self.S0(r) - s
            r_new = r - g / self.f(r)
            r_new = np.clip(r_new, r * 0.2, r * 5.0 + 1.0)
            if np.max(np.abs(r_new - r) / np.maximum(r, 1e-12)) < 1e-14:
                r = r_new
                break
            r = r_new
        return float(r[0]) if scalar else r

    # -- full conformal factor (excludes V2 by definition) --------------------
    def _split(self, xy):
        xy = np.asarray(xy, dtype=float)
        r = np.linalg.norm(xy, axis=-1)
        return xy, r

    def W(self, xy):
        if self.pert is None:
            xy = np.asarray(xy, dtype=float)
            return np.zeros(xy.shape[:-1])
        return self.pert.value(xy)

    def K(self, xy):
        xy, r = self._split(xy)
        out = self.lam - self.radial.V(r)
        if self.pert is not None:
            out = out - self.pert.value(xy)
        return out

    def gradK(self, xy):
        xy, r = self._split(xy)
        rs = np.maximum(r, 1e-300)
        out = -self.radial.deriv(r, 1)[..., None] * xy / rs[..., None]
        if self.pert is not None:
            out = out - self.pert.grad(xy)
        return out

    def hessK(self, xy):
        xy, r = self._split(xy)
        d = xy.shape[-1]
        rs = np.maximum(r, 1e-300)
        xhat = xy / rs[..., None]
        P = xhat[..., :, None] * xhat[..., None, :]
        eye = np.eye(d)
        Pperp = eye - P
        Vp = self.radial.deriv(r, 1)
        Vpp = self.radial.deriv(r, 2)
        out = -(Vpp[..., None, None] * P + (Vp / rs)[..., None, None] * Pperp)
        if self.pert is not None:
            out = out - self.pert.hess(xy)
        return out

    # -- oracle-side potential (includes V2) ----------------------------------
    def V_oracle(self, r):
        out = self.radial.V(np.asarray(r, dtype=float))
        if self.pert is not None:
            raise ValueError("radial oracle requires a radial model (pert is None)")
        if self.v2 is not None:
            out = out + self.v2.value(np.asarray(r, dtype=float))
        return out

    def V_oracle_deriv(self, r, k: int):
        out = self.radial.deriv(np.asarray(r, dtype=float), k)
        if self.v2 is not None:
            out = out + self.v2.deriv(np.asarray(r, dtype=float), k)
        return out

    @property
    def oracle_knots(self):
        ks = list(self.radial.knots)
        if self.v2 is not None:
            ks += list(getattr(self.v2, "knots", ()))
        return tuple(sorted(ks))

    def with_lambda(self, lam: float) -> "EnergyModel":
        return EnergyModel(lam=lam, radial=self.radial, pert=self.pert, v2=self.v2)


@dataclass(frozen=True)
class RadialBump:
    """Bounded compactly supported radial V2 built on a smooth bump."""

    amplitude: float
    center: float
    width: float
    knots: tuple = ()

    def value(self, r):
        u = (np.asarray(r, dtype=float) - self.center) / self.width
        return self.amplitude * np.exp(-u * u) * (np.abs(u) < 6.0)

    def deriv(self, r, k: int):
        if k == 0:
            return self.value(r)
        u = (np.asarray(r, dtype=float) - self.center) / self.width
        g = np.exp(-u * u) * (np.abs(u) < 6.0)
        if k == 1:
            return self.amplitude * (-2.0 * u) * g / self.width
        if k == 2:
            return self.amplitude * (4.0 * u * u - 2.0) * g / self.width ** 2
        raise ValueError("RadialBump derivatives implemented for k <= 2")

    @property
    def support(self):
        return (self.center - 6.0 * self.width, self.center + 6.0 * self.width)


# ---------------------------------------------------------------------------
# Energy-dependent weights
# ---------------------------------------------------------------------------

def eval_f_lambda(model: EnergyModel, x, lam: float = None, variant: str = "decay"):
    """Energy weight at a point.

    variant="decay":  (lambda + Kc <x>^-mu)^(1/2) with Kc = eps1*eps1_tilde/(2-mu);
    variant="radial": f(r, lambda) = sqrt(lambda - V_rad(r)).
    """
    lam = model.lam if lam is None else lam
    if lam < 0:
        raise ValueError("negative energy rejected")
    x = np.asarray(x, dtype=float)
    r = x if x.ndim == 0 else np.linalg.norm(x, axis=-1)
    if variant == "radial":
        m = model if lam == model.lam else model.with_lambda(lam)
        return m.f(r)
    rad = model.radial
    kc = rad.eps1 * rad.eps1_tilde / (2.0 - rad.mu)
    return np.sqrt(lam + kc * (1.0 + r * r) ** (-rad.mu / 2.0))


def reference_model(mu: float = 1.0, n: int = 4, lam: float = 0.0,
                    kit: CutoffKit = DEFAULT_KIT) -> EnergyModel:
    """The toolkit's reference radial model: truncation of -r^-mu at scale n."""
    return EnergyModel(lam=lam, radial=truncate_radial(PowerLawProfile(mu), n, kit))
