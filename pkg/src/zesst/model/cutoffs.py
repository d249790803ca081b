"""Smooth cutoff profiles.

All cutoffs are built from one fixed polynomial smoothstep whose first
`p` derivatives vanish at both ends of the ramp, so every profile is
C^p across its knots and all required derivatives are exact polynomials.
The default p = 8 leaves ample margin over the derivative orders (<= 6)
used anywhere in the toolkit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.special import beta as _beta, betainc as _betainc

SMOOTHSTEP_ORDER = 8


def _falling(p: int, m: int) -> float:
    out = 1.0
    for j in range(m):
        out *= (p - j)
    return out


class Smoothstep:
    """Monotone ramp s: [0,1] -> [0,1], s'(t) = t^p (1-t)^p / B(p+1,p+1),
    with s^(k)(0) = s^(k)(1) = 0 for 1 <= k <= p.

    Values use the regularized incomplete beta; derivatives use the factored
    Leibniz form, so everything is sign-stable to machine precision.
    """

    def __init__(self, p: int = SMOOTHSTEP_ORDER):
        self.p = int(p)
        self._norm = _beta(p + 1, p + 1)

    def antiderivative(self, t):
        """int_0^t s(v) dv for t in [0,1] (clipped), via parts."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        p = self.p
        tail = _betainc(p + 2, p + 1, t) * _beta(p + 2, p + 1) / self._norm
        return t * _betainc(p + 1, p + 1, t) - tail

    def __call__(self, t, k: int = 0):
        """k-th derivative of the ramp, zero-extended outside [0,1]
        (value-extended by 0/1 for k = 0)."""
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 0.0, 1.0)
        p = self.p
        if k == 0:
            out = _betainc(p + 1, p + 1, tc)
            return np.where(t <= 0.0, 0.0, np.where(t >= 1.0, 1.0, out))
        m = k - 1
        if m > 2 * p:
            return np.zeros_like(t)
        acc = np.zeros_like(tc)
        for j in range(m + 1):
            if j > p or (m - j) > p:
                continue
            acc += (comb(m, j) * _falling(p, j) * ((-1.0) ** (m - j)) * _falling(p, m - j)
                    * tc ** (p - j) * (1.0 - tc) ** (p - (m - j)))
        out = acc / self._norm
        return np.where((t <= 0.0) | (t >= 1.0), 0.0, out)


def _ramp(t, k, lo, hi, step: Smoothstep):
    """step((t-lo)/(hi-lo)) and its t-derivatives."""
    scale = 1.0 / (hi - lo)
    return step((np.asarray(t, dtype=float) - lo) * scale, k) * scale ** k


@dataclass(frozen=True)
class CutoffKit:
    """The fixed cutoff family used throughout.

    chi_lt:    decreasing, = 1 for t <= 1/2 and 0 for t >= 1.
    chi_plus:  increasing, = 0 for t <= 1 and 1 for t >= 2 (chi_minus = 1 - chi_plus);
               this is the pair of the radial truncation and also realizes the
               spatial cutoff chi(r > 2).
    """

    order: int = SMOOTHSTEP_ORDER
    step: Smoothstep = field(default=None, compare=False)

    def __post_init__(self):
        if self.step is None:
            object.__setattr__(self, "step", Smoothstep(self.order))

    def chi_lt(self, t, k: int = 0):
        base = _ramp(t, k, 0.5, 1.0, self.step)
        return (1.0 - base) if k == 0 else -base

    def chi_less(self, t, kappa: float, k: int = 0):
        """chi(t < kappa) = chi_lt(t / kappa)."""
        return self.chi_lt(np.asarray(t, dtype=float) / kappa, k) / kappa ** k

    def chi_plus(self, t, k: int = 0):
        return _ramp(t, k, 1.0, 2.0, self.step)

    def chi_minus(self, t, k: int = 0):
        base = _ramp(t, k, 1.0, 2.0, self.step)
        return (1.0 - base) if k == 0 else -base

    def chi_r_gt2(self, r, k: int = 0):
        """Spatial cutoff chi(r > 2): 0 for r <= 1, 1 for r >= 2."""
        return self.chi_plus(r, k)

    def rtilde(self, r, k: int = 0):
        """Smoothed radius: convex, = 1/2 for r <= 1/4 and = r for r >= 3/4.

        rtilde'(r) = step(2(r - 1/4)), which integrates to the correct
        boundary data, so the function is C^p and convex globally.
        """
        r = np.asarray(r, dtype=float)
        u = 2.0 * (r - 0.25)
        if k == 0:
            mid = 0.5 + 0.5 * self.step.antiderivative(u)
            return np.where(r <= 0.25, 0.5, np.where(r >= 0.75, r, mid))
        if k == 1:
            return self.step(u, 0)
        return self.step(u, k - 1) * 2.0 ** (k - 1)


DEFAULT_KIT = CutoffKit()
