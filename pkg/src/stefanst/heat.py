"""Stabilized space-time advection-diffusion slabs for the temperature field.

Systems can be assembled over the whole mesh or over a ghost-split
subdomain whose ghost nodes carry the melting temperature as Dirichlet
data. Per element the unknowns live at the slab bottom and top time
levels; weak temporal continuity couples slabs through a jump term.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .assembly import apply_dirichlet, element_sizes, scatter, solve_direct
from .spacetime import ref_tables, stabilization_params


@dataclass
class TempField:
    """Nodal temperature at the slab bottom and top time levels."""
    t_bot: np.ndarray
    t_top: np.ndarray

    @classmethod
    def constant(cls, n_nodes, value):
        return cls(np.full(n_nodes, float(value)),
                   np.full(n_nodes, float(value)))


@dataclass
class SubdomainSpec:
    """Active region of one phase plus its melting-temperature ghosts."""
    active_elements: np.ndarray
    active_nodes: np.ndarray
    ghost_nodes: np.ndarray
    t_m: float = 0.0

    @property
    def empty(self):
        return len(self.active_elements) == 0


def _resolve_dirichlet(mesh, dirichlet):
    """Tag-keyed Dirichlet spec -> (nodes, values) arrays."""
    nodes, values = [], []
    for tag, val in (dirichlet or {}).items():
        for n in mesh.boundary_nodes(tag):
            x, y = mesh.node_coords[n]
            nodes.append(int(n))
            values.append(float(val(x, y)) if callable(val) else float(val))
    return np.array(nodes, dtype=np.int64), np.array(values)


def assemble_heat_slab(mesh, prev_temp, vel_bot, vel_top, rhoc, kappa, dt,
                       dirichlet=None, neumann=None, subdomain=None,
                       tau_override=None):
    """Assemble one scalar space-time slab.

    Returns (A, b, active_nodes). Dof ordering: level * n_active + local
    node index. ``rhoc``/``kappa`` are nodal fields; ``prev_temp`` is the
    slab-bottom trace; ``dirichlet`` maps boundary tag to value/callable;
    ``neumann`` maps tag to a constant boundary flux. Ghost nodes of the
    subdomain get identity rows at the melting temperature.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    nn = mesh.n_nodes
    if subdomain is None:
        elems = np.arange(mesh.n_elements)
        active = np.arange(nn)
        ghost = np.array([], dtype=np.int64)
        t_m = 0.0
    else:
        elems = np.asarray(subdomain.active_elements, dtype=np.int64)
        active = np.asarray(subdomain.active_nodes, dtype=np.int64)
        ghost = np.asarray(subdomain.ghost_nodes, dtype=np.int64)
        t_m = subdomain.t_m
    for arr in (prev_temp, rhoc, kappa):
        if len(arr) != nn:
            raise ValueError("nodal field size does not match the mesh")

    loc = -np.ones(nn, dtype=np.int64)
    loc[active] = np.arange(len(active))
    if np.any(loc[mesh.elements[elems].ravel()] < 0):
        raise ValueError("active element references inactive node")

    conn = mesh.elements[elems]
    coords = np.ascontiguousarray(mesh.node_coords[conn])
    tab = ref_tables(mesh.kind)

    _, h_e = element_sizes(mesh, elems)
    vmag = 0.5 * (np.linalg.norm(vel_bot, axis=1)
                  + np.linalg.norm(vel_top, axis=1))
    u_el = vmag[conn].mean(axis=1)
    alpha_el = (kappa[conn] / np.maximum(rhoc[conn], 1e-300)).mean(axis=1)
    if tau_override is not None:
        tau = np.full(len(elems), float(tau_override))
    else:
        tau = np.asarray(
            stabilization_params(h_e, u_el, alpha_el, dt,
                                 alpha_local=alpha_el).tau_temp)

    Ae, be = kernels.scalar_slab(
        coords, tab.Ns, tab.dNxi, tab.ws, tab.theta, tab.wt,
        np.ascontiguousarray(rhoc[conn]), np.ascontiguousarray(kappa[conn]),
        np.ascontiguousarray(vel_bot[conn]),
        np.ascontiguousarray(vel_top[conn]),
        np.ascontiguousarray(prev_temp[conn]),
        np.ascontiguousarray(tau), float(dt))

    na = len(active)
    lconn = loc[conn]
    dof_map = np.concatenate([lconn, lconn + na], axis=1)
    A, b = scatter(Ae, be, dof_map, 2 * na)

    # boundary flux contributions on tagged edges (space-time lateral face)
    for tag, flux in (neumann or {}).items():
        if flux == 0.0:
            continue
        for i, j in mesh.tagged_edges(tag):
            if loc[i] < 0 or loc[j] < 0:
                continue
            ln = np.linalg.norm(mesh.node_coords[i] - mesh.node_coords[j])
            w = flux * ln / 2.0 * dt / 2.0
            for n in (loc[i], loc[j]):
                b[n] += w
                b[n + na] += w

    dir_nodes, dir_vals = _resolve_dirichlet(mesh, dirichlet)
    mask = loc[dir_nodes] >= 0 if len(dir_nodes) else np.array([], dtype=bool)
    dn = loc[dir_nodes[mask]] if len(dir_nodes) else np.array([], dtype=np.int64)
    dv = dir_vals[mask] if len(dir_nodes) else np.array([])
    gn = loc[ghost]
    dofs = np.concatenate([dn, dn + na, gn, gn + na])
    vals = np.concatenate([dv, dv, np.full(len(gn), t_m),
                           np.full(len(gn), t_m)])
    A, b = apply_dirichlet(A, b, dofs, vals)
    return A, b, active


def solve_heat_slab(mesh, prev_temp, vel_bot, vel_top, rhoc, kappa, dt,
                    dirichlet=None, neumann=None, subdomain=None,
                    tau_override=None):
    """Solve one slab; returns a TempField on the full mesh.

    Inactive nodes keep their previous value untouched.
    """
    A, b, active = assemble_heat_slab(
        mesh, prev_temp, vel_bot, vel_top, rhoc, kappa, dt,
        dirichlet, neumann, subdomain, tau_override)
    x = solve_direct(A, b)
    na = len(active)
    t_bot = prev_temp.copy()
    t_top = prev_temp.copy()
    t_bot[active] = x[:na]
    t_top[active] = x[na:]
    return TempField(t_bot, t_top)


def solve_ghost_split(mesh, prev_temp, vel_bot, vel_top, pair, spec_liquid,
                      spec_solid, liquid_mask, dt, dirichlet=None,
                      neumann=None):
    """Solve the per-phase temperature subproblems and compose the result.

    Each subproblem uses its own phase's constants un-blended and sees the
    opposite phase only through ghost nodes pinned at T_m. Returns
    (composite TempField, liquid-problem top values, solid-problem top
    values); the raw per-phase fields feed the flux recovery.
    """
    nn = mesh.n_nodes
    fields = {}
    for name, spec, ph in (("liquid", spec_liquid, pair.liquid),
                           ("solid", spec_solid, pair.solid)):
        if spec.empty:
            fields[name] = TempField(prev_temp.copy(), prev_temp.copy())
            continue
        rhoc = np.full(nn, ph.rho * ph.cp)
        kappa = np.full(nn, ph.kappa)
        # the subproblem's slab-bottom trace carries T_m at ghost nodes;
        # the composite previous field holds the other phase's value there
        prev_sub = prev_temp.copy()
        prev_sub[np.asarray(spec.ghost_nodes, dtype=np.int64)] = pair.t_m
        fields[name] = solve_heat_slab(
            mesh, prev_sub, vel_bot, vel_top, rhoc, kappa, dt,
            dirichlet, neumann, subdomain=spec)

    t_bot = np.where(liquid_mask, fields["liquid"].t_bot,
                     fields["solid"].t_bot)
    t_top = np.where(liquid_mask, fields["liquid"].t_top,
                     fields["solid"].t_top)
    # nodes sitting exactly on the interface are ghosts of both problems
    both_ghost = np.intersect1d(spec_liquid.ghost_nodes,
                                spec_solid.ghost_nodes)
    t_bot[both_ghost] = pair.t_m
    t_top[both_ghost] = pair.t_m
    return (TempField(t_bot, t_top),
            fields["liquid"].t_top, fields["solid"].t_top)
