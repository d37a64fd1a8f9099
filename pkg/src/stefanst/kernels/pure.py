"""Pure-numpy assembly kernels (fallback backend).

All three kernels are mirrored by the Cython extension in ``_core``;
the two backends must agree to floating-point roundoff and are cross
checked in the test suite. Element-local matrices are returned densely;
scatter into the global sparse system happens in the calling module.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _geometry(coords, dNxi_q):
    """Jacobian inverse-transpose gradients and determinant at one point.

    coords: (ne, ns, 2); dNxi_q: (ns, 2). Returns dNx (ne, ns, 2), det (ne,).
    """
    J = np.einsum("eai,aj->eij", coords, dNxi_q)
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    inv = np.empty_like(J)
    inv[:, 0, 0] = J[:, 1, 1]
    inv[:, 0, 1] = -J[:, 0, 1]
    inv[:, 1, 0] = -J[:, 1, 0]
    inv[:, 1, 1] = J[:, 0, 0]
    inv /= det[:, None, None]
    dNx = np.einsum("aj,eji->eai", dNxi_q, inv)
    return dNx, det


def scalar_slab(coords, Ns, dNxi, ws, theta, wt,
                rhoc, kappa, vbot, vtop, tprev, tau, dt):
    """Element matrices for one scalar advection-diffusion space-time slab.

    Dof ordering per element: ns bottom-level values then ns top-level.
    Contains the Galerkin terms, the temporal jump term against ``tprev``
    and SUPG stabilization weighted by ``tau``.
    """
    ne, ns, _ = coords.shape
    n2 = 2 * ns
    A = np.zeros((ne, n2, n2))
    b = np.zeros((ne, n2))
    nqs = len(ws)

    for qs in range(nqs):
        dNx, det = _geometry(coords, dNxi[qs])
        N = Ns[qs]

        # jump term: spatial integral over the slab bottom (theta = 0+)
        rc_s = rhoc @ N
        w_s = ws[qs] * det * rc_s
        A[:, :ns, :ns] += np.einsum("e,a,b->eab", w_s, N, N)
        b[:, :ns] += np.einsum("e,a->ea", w_s * (tprev @ N), N)

        for qt in range(len(theta)):
            tv = (1.0 - theta[qt], theta[qt])
            td = (-1.0, 1.0)
            val = np.concatenate([N * tv[0], N * tv[1]])          # (n2,)
            pt = np.concatenate([N * td[0], N * td[1]]) / dt      # (n2,)
            g = np.concatenate([dNx * tv[0], dNx * tv[1]], axis=1)  # (ne,n2,2)

            rc = rhoc @ N
            kp = kappa @ N
            uq = np.einsum("a,eai->ei", N, tv[0] * vbot + tv[1] * vtop)
            Lop = pt[None, :] + np.einsum("ei,eIi->eI", uq, g)

            wq = ws[qs] * wt[qt] * det * dt
            A += np.einsum("e,I,eJ->eIJ", wq * rc, val, Lop)
            A += np.einsum("e,eIi,eJi->eIJ", wq * kp, g, g)
            A += np.einsum("e,eI,eJ->eIJ", wq * rc * tau, Lop, Lop)
    return A, b


def ns_slab(coords, Ns, dNxi, ws, theta, wt,
            rho, mu, abot, atop, uprev, f, tau_mom, tau_cont, dt):
    """Element matrices for one Navier-Stokes space-time slab (Picard).

    Unknown ordering per element: dof = (level*ns + node)*3 + component
    with components (u, v, p). ``abot``/``atop`` carry the advection
    linearization state; ``uprev`` the slab-bottom trace for the jump term.
    """
    ne, ns, _ = coords.shape
    n2 = 2 * ns
    A5 = np.zeros((ne, n2, 3, n2, 3))
    b5 = np.zeros((ne, n2, 3))
    fx, fy = float(f[0]), float(f[1])
    nqs = len(ws)

    for qs in range(nqs):
        dNx, det = _geometry(coords, dNxi[qs])
        N = Ns[qs]

        # temporal jump term, spatial rule at theta = 0+
        rho_s = rho @ N
        w_s = ws[qs] * det * rho_s
        blk = np.einsum("e,a,b->eab", w_s, N, N)
        for c in range(2):
            A5[:, :ns, c, :ns, c] += blk
            b5[:, :ns, c] += np.einsum("e,a->ea", w_s * (uprev[:, :, c] @ N), N)

        for qt in range(len(theta)):
            tv = (1.0 - theta[qt], theta[qt])
            td = (-1.0, 1.0)
            val = np.concatenate([N * tv[0], N * tv[1]])
            pt = np.concatenate([N * td[0], N * td[1]]) / dt
            g = np.concatenate([dNx * tv[0], dNx * tv[1]], axis=1)

            rho_q = rho @ N
            mu_q = mu @ N
            aq = np.einsum("a,eai->ei", N, tv[0] * abot + tv[1] * atop)
            adv = np.einsum("ei,eIi->eI", aq, g)          # a . grad(phi_I)
            Lop = pt[None, :] + adv
            gdot = np.einsum("eIi,eJi->eIJ", g, g)

            wq = ws[qs] * wt[qt] * det * dt

            # momentum Galerkin (time derivative + advection) and SUPG
            m_adv = np.einsum("e,I,eJ->eIJ", wq * rho_q, val, Lop)
            s_adv = np.einsum("e,eI,eJ->eIJ", wq * rho_q * tau_mom, adv, Lop)
            visc_iso = wq[:, None, None] * mu_q[:, None, None] * gdot
            for c in range(2):
                A5[:, :, c, :, c] += m_adv + s_adv + visc_iso
                for d in range(2):
                    A5[:, :, c, :, d] += np.einsum(
                        "e,eI,eJ->eIJ", wq * mu_q, g[:, :, d], g[:, :, c])
                    A5[:, :, c, :, d] += np.einsum(
                        "e,eI,eJ->eIJ", wq * rho_q * tau_cont,
                        g[:, :, c], g[:, :, d])
                # pressure gradient (integrated by parts) + PSPG coupling
                A5[:, :, c, :, 2] += np.einsum(
                    "e,eI,J->eIJ", -wq, g[:, :, c], val)
                A5[:, :, c, :, 2] += np.einsum(
                    "e,eI,eJ->eIJ", wq * tau_mom, adv, g[:, :, c])
                # continuity + PSPG momentum residual
                A5[:, :, 2, :, c] += np.einsum(
                    "e,I,eJ->eIJ", wq, val, g[:, :, c])
                A5[:, :, 2, :, c] += np.einsum(
                    "e,eI,eJ->eIJ", wq * tau_mom, g[:, :, c], Lop)
                fc = (fx, fy)[c]
                if fc != 0.0:
                    b5[:, :, c] += np.einsum("e,I->eI", wq * rho_q, val) * fc
                    b5[:, :, c] += np.einsum(
                        "e,eI->eI", wq * rho_q * tau_mom, adv) * fc
                    b5[:, :, 2] += np.einsum(
                        "e,eI->eI", wq * tau_mom, g[:, :, c]) * fc
            A5[:, :, 2, :, 2] += wq[:, None, None] * tau_mom[:, None, None] \
                / rho_q[:, None, None] * gdot

    return A5.reshape(ne, 3 * n2, 3 * n2), b5.reshape(ne, 3 * n2)


def reinit_distance(points, seg_a, seg_b, cpts):
    """Brute-force distance to the interface polyline.

    Returns (distance to the union of segments and crossing points,
    index of the nearest crossing point) for every query point.
    """
    n = points.shape[0]
    d2c = np.sum((points[:, None, :] - cpts[None, :, :]) ** 2, axis=2)
    nearest = np.argmin(d2c, axis=1).astype(np.int64)
    dist = np.sqrt(d2c[np.arange(n), nearest])

    if seg_a.shape[0]:
        ab = seg_b - seg_a                                   # (m, 2)
        denom = np.maximum(np.sum(ab * ab, axis=1), 1e-300)
        ap = points[:, None, :] - seg_a[None, :, :]          # (n, m, 2)
        t = np.clip(np.einsum("nmi,mi->nm", ap, ab) / denom, 0.0, 1.0)
        proj = seg_a[None, :, :] + t[:, :, None] * ab[None, :, :]
        dseg = np.sqrt(np.sum((points[:, None, :] - proj) ** 2, axis=2))
        dist = np.minimum(dist, dseg.min(axis=1))
    return dist, nearest
