# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled assembly kernels; loop-level mirror of ``pure``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

BACKEND = "cython"


def scalar_slab(double[:, :, ::1] coords, double[:, ::1] Ns,
                double[:, :, ::1] dNxi, double[::1] ws,
                double[::1] theta, double[::1] wt,
                double[:, ::1] rhoc, double[:, ::1] kappa,
                double[:, :, ::1] vbot, double[:, :, ::1] vtop,
                double[:, ::1] tprev, double[::1] tau, double dt):
    cdef Py_ssize_t ne = coords.shape[0], ns = coords.shape[1]
    cdef Py_ssize_t n2 = 2 * ns, nqs = ws.shape[0], nqt = theta.shape[0]
    A_arr = np.zeros((ne, n2, n2))
    b_arr = np.zeros((ne, n2))
    cdef double[:, :, ::1] A = A_arr
    cdef double[:, ::1] b = b_arr

    cdef Py_ssize_t e, qs, qt, a, bb, i, I, J, L, M
    cdef double J00, J01, J10, J11, det, inv00, inv01, inv10, inv11
    cdef double rc, kp, tvL, w_s, tprev_q, wq, uqx, uqy, tv0, tv1
    cdef double[:, ::1] dNx = np.empty((ns, 2))
    cdef double[::1] val = np.empty(n2)
    cdef double[::1] pt = np.empty(n2)
    cdef double[:, ::1] g = np.empty((n2, 2))
    cdef double[::1] Lop = np.empty(n2)

    for e in range(ne):
        for qs in range(nqs):
            J00 = J01 = J10 = J11 = 0.0
            for a in range(ns):
                J00 += coords[e, a, 0] * dNxi[qs, a, 0]
                J01 += coords[e, a, 0] * dNxi[qs, a, 1]
                J10 += coords[e, a, 1] * dNxi[qs, a, 0]
                J11 += coords[e, a, 1] * dNxi[qs, a, 1]
            det = J00 * J11 - J01 * J10
            inv00 = J11 / det
            inv01 = -J01 / det
            inv10 = -J10 / det
            inv11 = J00 / det
            for a in range(ns):
                dNx[a, 0] = dNxi[qs, a, 0] * inv00 + dNxi[qs, a, 1] * inv10
                dNx[a, 1] = dNxi[qs, a, 0] * inv01 + dNxi[qs, a, 1] * inv11

            # jump term on the slab bottom
            rc = 0.0
            tprev_q = 0.0
            for a in range(ns):
                rc += rhoc[e, a] * Ns[qs, a]
                tprev_q += tprev[e, a] * Ns[qs, a]
            w_s = ws[qs] * det * rc
            for a in range(ns):
                for bb in range(ns):
                    A[e, a, bb] += w_s * Ns[qs, a] * Ns[qs, bb]
                b[e, a] += w_s * tprev_q * Ns[qs, a]

            for qt in range(nqt):
                tv0 = 1.0 - theta[qt]
                tv1 = theta[qt]
                rc = 0.0
                kp = 0.0
                uqx = 0.0
                uqy = 0.0
                for a in range(ns):
                    rc += rhoc[e, a] * Ns[qs, a]
                    kp += kappa[e, a] * Ns[qs, a]
                    uqx += Ns[qs, a] * (tv0 * vbot[e, a, 0] + tv1 * vtop[e, a, 0])
                    uqy += Ns[qs, a] * (tv0 * vbot[e, a, 1] + tv1 * vtop[e, a, 1])
                for L in range(2):
                    tvL = tv0 if L == 0 else tv1
                    for a in range(ns):
                        I = L * ns + a
                        val[I] = Ns[qs, a] * tvL
                        pt[I] = Ns[qs, a] * (-1.0 if L == 0 else 1.0) / dt
                        g[I, 0] = dNx[a, 0] * tvL
                        g[I, 1] = dNx[a, 1] * tvL
                        Lop[I] = pt[I] + uqx * g[I, 0] + uqy * g[I, 1]
                wq = ws[qs] * wt[qt] * det * dt
                for I in range(n2):
                    for J in range(n2):
                        A[e, I, J] += wq * (
                            rc * val[I] * Lop[J]
                            + kp * (g[I, 0] * g[J, 0] + g[I, 1] * g[J, 1])
                            + rc * tau[e] * Lop[I] * Lop[J])
    return A_arr, b_arr


def ns_slab(double[:, :, ::1] coords, double[:, ::1] Ns,
            double[:, :, ::1] dNxi, double[::1] ws,
            double[::1] theta, double[::1] wt,
            double[:, ::1] rho, double[:, ::1] mu,
            double[:, :, ::1] abot, double[:, :, ::1] atop,
            double[:, :, ::1] uprev, double[::1] f,
            double[::1] tau_mom, double[::1] tau_cont, double dt):
    cdef Py_ssize_t ne = coords.shape[0], ns = coords.shape[1]
    cdef Py_ssize_t n2 = 2 * ns, nd = 6 * ns
    cdef Py_ssize_t nqs = ws.shape[0], nqt = theta.shape[0]
    A_arr = np.zeros((ne, nd, nd))
    b_arr = np.zeros((ne, nd))
    cdef double[:, :, ::1] A = A_arr
    cdef double[:, ::1] b = b_arr

    cdef Py_ssize_t e, qs, qt, a, bb, c, d, I, J, L
    cdef double J00, J01, J10, J11, det, inv00, inv01, inv10, inv11
    cdef double rho_q, mu_q, w_s, wq, aqx, aqy, tv0, tv1, tvL, up
    cdef double tm, tc, fx = f[0], fy = f[1], fc, gd
    cdef double[:, ::1] dNx = np.empty((ns, 2))
    cdef double[::1] val = np.empty(n2)
    cdef double[::1] pt = np.empty(n2)
    cdef double[:, ::1] g = np.empty((n2, 2))
    cdef double[::1] Lop = np.empty(n2)
    cdef double[::1] adv = np.empty(n2)

    for e in range(ne):
        tm = tau_mom[e]
        tc = tau_cont[e]
        for qs in range(nqs):
            J00 = J01 = J10 = J11 = 0.0
            for a in range(ns):
                J00 += coords[e, a, 0] * dNxi[qs, a, 0]
                J01 += coords[e, a, 0] * dNxi[qs, a, 1]
                J10 += coords[e, a, 1] * dNxi[qs, a, 0]
                J11 += coords[e, a, 1] * dNxi[qs, a, 1]
            det = J00 * J11 - J01 * J10
            inv00 = J11 / det
            inv01 = -J01 / det
            inv10 = -J10 / det
            inv11 = J00 / det
            for a in range(ns):
                dNx[a, 0] = dNxi[qs, a, 0] * inv00 + dNxi[qs, a, 1] * inv10
                dNx[a, 1] = dNxi[qs, a, 0] * inv01 + dNxi[qs, a, 1] * inv11

            rho_q = 0.0
            for a in range(ns):
                rho_q += rho[e, a] * Ns[qs, a]
            w_s = ws[qs] * det * rho_q
            for c in range(2):
                up = 0.0
                for a in range(ns):
                    up += uprev[e, a, c] * Ns[qs, a]
                for a in range(ns):
                    for bb in range(ns):
                        A[e, a * 3 + c, bb * 3 + c] += \
                            w_s * Ns[qs, a] * Ns[qs, bb]
                    b[e, a * 3 + c] += w_s * up * Ns[qs, a]

            for qt in range(nqt):
                tv0 = 1.0 - theta[qt]
                tv1 = theta[qt]
                rho_q = 0.0
                mu_q = 0.0
                aqx = 0.0
                aqy = 0.0
                for a in range(ns):
                    rho_q += rho[e, a] * Ns[qs, a]
                    mu_q += mu[e, a] * Ns[qs, a]
                    aqx += Ns[qs, a] * (tv0 * abot[e, a, 0] + tv1 * atop[e, a, 0])
                    aqy += Ns[qs, a] * (tv0 * abot[e, a, 1] + tv1 * atop[e, a, 1])
                for L in range(2):
                    tvL = tv0 if L == 0 else tv1
                    for a in range(ns):
                        I = L * ns + a
                        val[I] = Ns[qs, a] * tvL
                        pt[I] = Ns[qs, a] * (-1.0 if L == 0 else 1.0) / dt
                        g[I, 0] = dNx[a, 0] * tvL
                        g[I, 1] = dNx[a, 1] * tvL
                        adv[I] = aqx * g[I, 0] + aqy * g[I, 1]
                        Lop[I] = pt[I] + adv[I]
                wq = ws[qs] * wt[qt] * det * dt

                for I in range(n2):
                    for J in range(n2):
                        gd = g[I, 0] * g[J, 0] + g[I, 1] * g[J, 1]
                        for c in range(2):
                            A[e, I * 3 + c, J * 3 + c] += wq * (
                                rho_q * val[I] * Lop[J]
                                + rho_q * tm * adv[I] * Lop[J]
                                + mu_q * gd)
                            for d in range(2):
                                A[e, I * 3 + c, J * 3 + d] += wq * (
                                    mu_q * g[I, d] * g[J, c]
                                    + rho_q * tc * g[I, c] * g[J, d])
                            A[e, I * 3 + c, J * 3 + 2] += wq * (
                                -g[I, c] * val[J] + tm * adv[I] * g[J, c])
                            A[e, I * 3 + 2, J * 3 + c] += wq * (
                                val[I] * g[J, c] + tm * g[I, c] * Lop[J])
                        A[e, I * 3 + 2, J * 3 + 2] += wq * tm / rho_q * gd
                if fx != 0.0 or fy != 0.0:
                    for I in range(n2):
                        for c in range(2):
                            fc = fx if c == 0 else fy
                            b[e, I * 3 + c] += wq * rho_q * fc * (
                                val[I] + tm * adv[I])
                            b[e, I * 3 + 2] += wq * tm * g[I, c] * fc
    return A_arr, b_arr


def reinit_distance(double[:, ::1] points, double[:, ::1] seg_a,
                    double[:, ::1] seg_b, double[:, ::1] cpts):
    cdef Py_ssize_t n = points.shape[0], m = seg_a.shape[0]
    cdef Py_ssize_t k = cpts.shape[0]
    dist_arr = np.empty(n)
    near_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] dist = dist_arr
    cdef long long[::1] near = near_arr
    cdef Py_ssize_t p, s, c, best
    cdef double px, py, dx, dy, d2, bd2, abx, aby, apx, apy, t, denom

    for p in range(n):
        px = points[p, 0]
        py = points[p, 1]
        bd2 = 1e300
        best = 0
        for c in range(k):
            dx = px - cpts[c, 0]
            dy = py - cpts[c, 1]
            d2 = dx * dx + dy * dy
            if d2 < bd2:
                bd2 = d2
                best = c
        near[p] = best
        for s in range(m):
            abx = seg_b[s, 0] - seg_a[s, 0]
            aby = seg_b[s, 1] - seg_a[s, 1]
            denom = abx * abx + aby * aby
            if denom < 1e-300:
                denom = 1e-300
            apx = px - seg_a[s, 0]
            apy = py - seg_a[s, 1]
            t = (apx * abx + apy * aby) / denom
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            dx = apx - t * abx
            dy = apy - t * aby
            d2 = dx * dx + dy * dy
            if d2 < bd2:
                bd2 = d2
        dist[p] = sqrt(bd2)
    return dist_arr, near_arr
