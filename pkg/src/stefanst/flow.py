"""Stabilized space-time Navier-Stokes slabs with blended material fields.

Equal-order linear velocity/pressure interpolation, SUPG/PSPG momentum
stabilization and grad-div continuity stabilization. The advective term
is linearized by Picard iteration; each slab couples to the previous one
through the weak temporal jump term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .assembly import apply_dirichlet, element_sizes, scatter, solve_direct
from .exceptions import NonConvergenceError
from .spacetime import ref_tables, stabilization_params


@dataclass
class FlowState:
    """Nodal velocity and pressure at the slab bottom and top levels."""
    vel_bot: np.ndarray   # (nn, 2)
    vel_top: np.ndarray   # (nn, 2)
    p_bot: np.ndarray     # (nn,)
    p_top: np.ndarray     # (nn,)

    @classmethod
    def rest(cls, n_nodes):
        return cls(np.zeros((n_nodes, 2)), np.zeros((n_nodes, 2)),
                   np.zeros(n_nodes), np.zeros(n_nodes))


@dataclass
class FlowBC:
    """Velocity boundary conditions keyed by boundary tag.

    ``dirichlet[tag]`` is a constant (ux, uy) pair or a callable
    (x, y) -> (ux, uy); ``neumann[tag]`` a constant traction vector.
    With no Neumann boundary the pressure constant mode is removed by
    pinning the pressure at one node.
    """
    dirichlet: dict
    neumann: dict = None

    def resolve(self, mesh):
        nodes, values = [], []
        for tag, val in self.dirichlet.items():
            for n in mesh.boundary_nodes(tag):
                x, y = mesh.node_coords[n]
                v = val(x, y) if callable(val) else val
                nodes.append(int(n))
                values.append((float(v[0]), float(v[1])))
        return np.array(nodes, dtype=np.int64), np.array(values).reshape(-1, 2)


def _dof(level, node, comp, nn):
    return (level * nn + node) * 3 + comp


def assemble_ns_slab(mesh, prev_state, materials, dt, lin_bot, lin_top,
                     bc, body_force=(0.0, 0.0)):
    """Assemble one Navier-Stokes slab around the given linearization state.

    Dof ordering: (level * n_nodes + node) * 3 + component with
    components (u, v, p). Dirichlet velocity rows are replaced in place;
    returns (A, b).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    nn = mesh.n_nodes
    if len(materials.rho) != nn or lin_bot.shape != (nn, 2):
        raise ValueError("field sizes do not match the mesh")

    conn = mesh.elements
    coords = np.ascontiguousarray(mesh.node_coords[conn])
    tab = ref_tables(mesh.kind)

    _, h_e = element_sizes(mesh)
    vmag = 0.5 * (np.linalg.norm(lin_bot, axis=1)
                  + np.linalg.norm(lin_top, axis=1))
    u_el = vmag[conn].mean(axis=1)
    nu_el = (materials.mu[conn] / materials.rho[conn]).mean(axis=1)
    taus = stabilization_params(h_e, u_el, nu_el, dt)

    Ae, be = kernels.ns_slab(
        coords, tab.Ns, tab.dNxi, tab.ws, tab.theta, tab.wt,
        np.ascontiguousarray(materials.rho[conn]),
        np.ascontiguousarray(materials.mu[conn]),
        np.ascontiguousarray(lin_bot[conn]),
        np.ascontiguousarray(lin_top[conn]),
        np.ascontiguousarray(prev_state.vel_top[conn]),
        np.asarray(body_force, dtype=np.float64),
        np.ascontiguousarray(np.asarray(taus.tau_mom)),
        np.ascontiguousarray(np.asarray(taus.tau_cont)), float(dt))

    ns = mesh.nodes_per_element
    base = np.concatenate([conn, conn + nn], axis=1)       # (ne, 2ns)
    dof_map = (base[:, :, None] * 3
               + np.arange(3)[None, None, :]).reshape(-1, 6 * ns)
    A, b = scatter(Ae, be, dof_map, 6 * nn)

    # traction on tagged boundary edges
    for tag, h in (bc.neumann or {}).items():
        hx, hy = float(h[0]), float(h[1])
        if hx == 0.0 and hy == 0.0:
            continue
        for i, j in mesh.tagged_edges(tag):
            ln = np.linalg.norm(mesh.node_coords[i] - mesh.node_coords[j])
            w = ln / 2.0 * dt / 2.0
            for n in (i, j):
                for lev in (0, 1):
                    b[_dof(lev, n, 0, nn)] += w * hx
                    b[_dof(lev, n, 1, nn)] += w * hy

    dir_nodes, dir_vals = bc.resolve(mesh)
    dofs, vals = [], []
    for (n, (ux, uy)) in zip(dir_nodes, dir_vals):
        for lev in (0, 1):
            dofs += [_dof(lev, n, 0, nn), _dof(lev, n, 1, nn)]
            vals += [ux, uy]
    if not bc.neumann:
        # closed domain: pin the pressure gauge at node 0, both levels
        dofs += [_dof(0, 0, 2, nn), _dof(1, 0, 2, nn)]
        vals += [0.0, 0.0]
    A, b = apply_dirichlet(A, b, np.array(dofs, dtype=np.int64),
                           np.array(vals))
    return A, b


def _unpack(x, nn):
    blk = x.reshape(2, nn, 3)
    return FlowState(vel_bot=blk[0, :, :2].copy(), vel_top=blk[1, :, :2].copy(),
                     p_bot=blk[0, :, 2].copy(), p_top=blk[1, :, 2].copy())


def _pack(state, nn):
    blk = np.empty((2, nn, 3))
    blk[0, :, :2] = state.vel_bot
    blk[1, :, :2] = state.vel_top
    blk[0, :, 2] = state.p_bot
    blk[1, :, 2] = state.p_top
    return blk.ravel()


def solve_ns_slab(mesh, prev_state, materials, dt, bc,
                  body_force=(0.0, 0.0), tol=1e-8, max_iter=30):
    """Picard iteration on the advective linearization for one slab.

    Converged when the relative nonlinear residual drops below ``tol``
    or the velocity increment max-norm below 1e-10. Raises
    :class:`NonConvergenceError` carrying the residual history.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    nn = mesh.n_nodes
    state = FlowState(prev_state.vel_top.copy(), prev_state.vel_top.copy(),
                      prev_state.p_top.copy(), prev_state.p_top.copy())
    x = _pack(state, nn)
    residuals = []
    for it in range(max_iter):
        A, b = assemble_ns_slab(mesh, prev_state, materials, dt,
                                state.vel_bot, state.vel_top, bc, body_force)
        bnorm = np.linalg.norm(b)
        res = np.linalg.norm(b - A @ x) / max(bnorm, 1e-300)
        residuals.append(res)
        if res < tol:
            return state, residuals
        x_new = solve_direct(A, b)
        new_state = _unpack(x_new, nn)
        dv = max(np.abs(new_state.vel_bot - state.vel_bot).max(),
                 np.abs(new_state.vel_top - state.vel_top).max())
        state, x = new_state, x_new
        if dv < 1e-10:
            return state, residuals
    raise NonConvergenceError(
        f"Picard iteration did not reach tol={tol:g} in {max_iter} "
        f"iterations (last residual {residuals[-1]:.3e})", residuals)


def divergence_norm(mesh, state):
    """L2 norm of the element-wise velocity divergence at the slab top."""
    tab = ref_tables(mesh.kind)
    conn = mesh.elements
    coords = mesh.node_coords[conn]
    u = state.vel_top[conn]                               # (ne, ns, 2)
    total = 0.0
    for q in range(len(tab.ws)):
        J = np.einsum("eai,aj->eij", coords, tab.dNxi[q])
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        inv = np.empty_like(J)
        inv[:, 0, 0] = J[:, 1, 1]
        inv[:, 0, 1] = -J[:, 0, 1]
        inv[:, 1, 0] = -J[:, 1, 0]
        inv[:, 1, 1] = J[:, 0, 0]
        inv /= det[:, None, None]
        dNx = np.einsum("aj,eji->eai", tab.dNxi[q], inv)
        div = np.einsum("eai,eai->e", dNx, u)
        total += np.sum(tab.ws[q] * det * div ** 2)
    return float(np.sqrt(total))
