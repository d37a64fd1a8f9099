"""Similarity solution of the 1D one-phase Stefan problem.

The front position is X(t) = 2 sqrt(alpha) lambda sqrt(t) and the liquid
temperature follows an error-function profile; lambda is the unique
positive root of

    f(lambda) = St exp(-lambda^2) / (sqrt(pi) erf(lambda)) - lambda

with the (positive) Stefan number St = c_p (T_l - T_m) / h_m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf


def _f(lam, St):
    return St * np.exp(-lam * lam) / (np.sqrt(np.pi) * erf(lam)) - lam


def stefan_lambda(St):
    """Root of f(lambda) by bisection on [1e-12, 10] to |f| < 1e-13."""
    if St <= 0:
        raise ValueError("Stefan number must be positive")
    lo, hi = 1e-12, 10.0
    if _f(hi, St) > 0:
        raise ValueError("no root bracket for the given Stefan number")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = _f(mid, St)
        if abs(fm) < 1e-13:
            return mid
        if fm > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class AnalyticalStefan:
    lam: float        # similarity root
    alpha: float      # thermal diffusivity, m^2/s
    t_l: float        # hot-boundary temperature, K
    t_m: float        # melting temperature, K

    @property
    def stefan_number(self):
        # recovered from the root for reference only
        return float(self.lam * np.sqrt(np.pi) * erf(self.lam)
                     * np.exp(self.lam ** 2))

    @classmethod
    def from_materials(cls, cp, t_l, t_m, h_m, kappa, rho):
        St = cp * (t_l - t_m) / h_m
        return cls(lam=stefan_lambda(St), alpha=kappa / (rho * cp),
                   t_l=t_l, t_m=t_m)


def front_position(params, t):
    """X(t) = 2 sqrt(alpha) lambda sqrt(t)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return 2.0 * np.sqrt(params.alpha) * params.lam * np.sqrt(t)


def stefan_analytical(x, t, params):
    """(T, X) at position x and time t > 0.

    T follows the erf profile for x < X(t) and equals T_m beyond.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    X = front_position(params, t)
    x = np.asarray(x, dtype=np.float64)
    arg = x / (2.0 * np.sqrt(params.alpha * t))
    T = params.t_l - (params.t_l - params.t_m) * erf(arg) / erf(params.lam)
    T = np.where(x < X, T, params.t_m)
    if T.ndim == 0:
        return float(T), X
    return T, X
