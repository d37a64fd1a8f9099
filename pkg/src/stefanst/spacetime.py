"""Reference-element machinery for space-time slabs.

The space-time basis on a slab is the tensor product of a spatial P1
(triangle) or Q1 (quadrilateral) basis with the linear temporal pair
{1 - theta, theta} on theta in [0, 1]. The spatial domain does not deform
in time, so the slab Jacobian factorizes into (spatial Jacobian) * dt.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# reference nodes: tri on the unit simplex, quad on [-1, 1]^2
_SQ3 = 1.0 / np.sqrt(3.0)


@dataclass(frozen=True)
class StabilizationParams:
    """Element stabilization coefficients for the slab weak forms."""
    tau_mom: float
    tau_cont: float
    tau_temp: float


@dataclass(frozen=True)
class RefTables:
    """Quadrature and shape-function tables for one element kind.

    ``Ns``/``dNxi``/``ws`` are the spatial rule (values, reference
    gradients, weights); ``theta``/``wt`` the 2-point Gauss rule in time.
    """
    kind: str
    Ns: np.ndarray      # (nqs, ns)
    dNxi: np.ndarray    # (nqs, ns, 2)
    ws: np.ndarray      # (nqs,)
    theta: np.ndarray   # (2,)
    wt: np.ndarray      # (2,)


def shape_functions(kind, xi):
    """Spatial shape values and reference gradients at one point.

    Returns (N, dN) with shapes (ns,) and (ns, 2).
    """
    x, y = xi
    if kind == "tri":
        N = np.array([1.0 - x - y, x, y])
        dN = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    elif kind == "quad":
        N = 0.25 * np.array([(1 - x) * (1 - y), (1 + x) * (1 - y),
                             (1 + x) * (1 + y), (1 - x) * (1 + y)])
        dN = 0.25 * np.array([
            [-(1 - y), -(1 - x)],
            [(1 - y), -(1 + x)],
            [(1 + y), (1 + x)],
            [-(1 + y), (1 - x)],
        ])
    else:
        raise ValueError(f"unknown element kind {kind!r}")
    return N, dN


def eval_basis(kind, xi, theta):
    """Space-time basis at reference point (xi, theta).

    Returns (values, spatial reference gradients, d/dtheta derivatives),
    each indexed by space-time node: the ns bottom-level (theta=0)
    functions first, then the ns top-level ones.
    """
    N, dN = shape_functions(kind, xi)
    tv = np.array([1.0 - theta, theta])
    td = np.array([-1.0, 1.0])
    values = np.concatenate([N * tv[0], N * tv[1]])
    grads = np.concatenate([dN * tv[0], dN * tv[1]], axis=0)
    dtheta = np.concatenate([N * td[0], N * td[1]])
    return values, grads, dtheta


def spatial_rule(kind):
    """Spatial quadrature: 3-point degree-2 rule (tri) or 2x2 Gauss (quad)."""
    if kind == "tri":
        pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
        w = np.full(3, 1 / 6)
    elif kind == "quad":
        g = _SQ3
        pts = np.array([[-g, -g], [g, -g], [g, g], [-g, g]])
        w = np.ones(4)
    else:
        raise ValueError(f"unknown element kind {kind!r}")
    return pts, w


def time_rule():
    """2-point Gauss on theta in [0, 1]."""
    theta = np.array([0.5 * (1 - _SQ3), 0.5 * (1 + _SQ3)])
    wt = np.array([0.5, 0.5])
    return theta, wt


def quadrature(kind):
    """Tensor-product space-time rule as a list of (xi, theta, weight)."""
    pts, ws = spatial_rule(kind)
    theta, wt = time_rule()
    out = []
    for qt in range(2):
        for qs in range(len(ws)):
            out.append((pts[qs].copy(), float(theta[qt]),
                        float(ws[qs] * wt[qt])))
    return out


def ref_tables(kind):
    """Precomputed tables consumed by the assembly kernels."""
    pts, ws = spatial_rule(kind)
    nqs = len(ws)
    ns = 3 if kind == "tri" else 4
    Ns = np.empty((nqs, ns))
    dNxi = np.empty((nqs, ns, 2))
    for q in range(nqs):
        Ns[q], dNxi[q] = shape_functions(kind, pts[q])
    theta, wt = time_rule()
    return RefTables(kind, Ns, dNxi, np.asarray(ws, dtype=np.float64),
                     theta, wt)


def stabilization_params(h_e, u_local, nu_local, dt, alpha_local=None):
    """SUPG/PSPG-style stabilization coefficients.

    tau_mom = [(2/dt)^2 + (2|u|/h)^2 + (4 nu/h^2)^2]^(-1/2);
    tau_cont = |u| h / 2, falling back to h^2/(4 tau_mom) for |u| ~ 0;
    tau_temp uses the tau_mom formula with the thermal diffusivity.
    """
    h_e = np.asarray(h_e, dtype=np.float64)
    u = np.asarray(u_local, dtype=np.float64)
    nu = np.asarray(nu_local, dtype=np.float64)
    if np.any(h_e <= 0) or dt <= 0:
        raise ValueError("h_e and dt must be positive")
    if alpha_local is None:
        alpha_local = nu
    alpha = np.asarray(alpha_local, dtype=np.float64)

    def _tau(diff):
        return 1.0 / np.sqrt((2.0 / dt) ** 2 + (2.0 * u / h_e) ** 2
                             + (4.0 * diff / h_e ** 2) ** 2)

    tau_mom = _tau(nu)
    tau_cont = np.where(u < 1e-12, h_e ** 2 / (4.0 * tau_mom),
                        u * h_e / 2.0)
    tau_temp = _tau(alpha)
    if np.ndim(h_e) == 0 and np.ndim(u) == 0:
        return StabilizationParams(float(tau_mom), float(tau_cont),
                                   float(tau_temp))
    return StabilizationParams(tau_mom, tau_cont, tau_temp)
