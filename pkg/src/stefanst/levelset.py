"""Level-set representation of the phase-change interface.

phi is negative in the liquid (phase 1) and positive in the solid
(phase 2); the interface is the zero level set. Material blending uses
a smoothed Heaviside of half-width epsilon (epsilon = 0 selects a sharp
step). Advection reuses the scalar space-time slab machinery with unit
capacity and zero diffusivity; reinitialization is a brute-force signed
distance to the discrete interface polyline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .exceptions import DegenerateGradientError, NoInterfaceError
from .stefan import recover_nodal_gradients


@dataclass
class LevelSet:
    phi: np.ndarray
    epsilon: float = 0.0
    reinit_interval: int = 1
    #: per-node index of the nearest interface crossing, filled by
    #: reinitialize() and reused by the velocity extension
    nearest_crossing: np.ndarray = field(default=None, repr=False)

    def copy_with(self, phi, nearest=None):
        return LevelSet(phi, self.epsilon, self.reinit_interval, nearest)


def init_from_geometry(mesh, geometry):
    """Exact signed distance for a simple interface geometry.

    ``geometry`` is ("vline", x0), ("hline", y0) or
    ("circle", (cx, cy), r). Liquid (phi < 0) lies left of a vertical
    line, above a horizontal line and inside a circle; pass
    ("vline", x0, "right") etc. to flip the liquid side.
    """
    x = mesh.node_coords[:, 0]
    y = mesh.node_coords[:, 1]
    kind = geometry[0]
    if kind == "vline":
        phi = x - geometry[1]
        if len(geometry) > 2 and geometry[2] == "right":
            phi = -phi
    elif kind == "hline":
        phi = geometry[1] - y
        if len(geometry) > 2 and geometry[2] == "below":
            phi = -phi
    elif kind == "circle":
        (cx, cy), r = geometry[1], geometry[2]
        phi = np.hypot(x - cx, y - cy) - r
    else:
        raise ValueError(f"unknown geometry kind {kind!r}")
    if phi.min() > 0 or phi.max() < 0:
        raise ValueError("interface geometry does not intersect the domain")
    return LevelSet(phi)


def smoothed_heaviside(phi, epsilon):
    """Regularized step of half-width epsilon; sharp step for epsilon = 0."""
    phi = np.asarray(phi, dtype=np.float64)
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if epsilon == 0.0:
        out = np.where(phi < 0, 0.0, np.where(phi > 0, 1.0, 0.5))
    else:
        z = np.clip(phi / epsilon, -1.0, 1.0)
        out = np.where(
            phi < -epsilon, 0.0,
            np.where(phi > epsilon, 1.0,
                     0.5 * (1.0 + z + np.sin(np.pi * z) / np.pi)))
        out = np.clip(out, 0.0, 1.0)   # guard roundoff at the band edges
    return out if out.ndim else float(out)


def blend(p1, p2, phi, epsilon):
    """Property blending p1 + (p2 - p1) * H_eps(phi)."""
    return p1 + (p2 - p1) * smoothed_heaviside(phi, epsilon)


def interface_normal(mesh, levelset, node):
    """Unit normal grad(phi)/|grad(phi)| from nodal gradient recovery."""
    g = recover_nodal_gradients(mesh, levelset.phi)[node]
    norm = np.linalg.norm(g)
    if norm <= 1e-12:
        raise DegenerateGradientError(
            f"level-set gradient vanishes at node {node}")
    return g / norm


def interface_curvature(mesh, levelset, node):
    """Curvature -div(grad(phi)/|grad(phi)|) via two recovery passes.

    Diagnostic only; never enters the interface propagation.
    """
    g = recover_nodal_gradients(mesh, levelset.phi)
    norms = np.linalg.norm(g, axis=1)
    if norms[node] <= 1e-12:
        raise DegenerateGradientError(
            f"level-set gradient vanishes at node {node}")
    n = g / np.maximum(norms, 1e-12)[:, None]
    dnx = recover_nodal_gradients(mesh, n[:, 0])
    dny = recover_nodal_gradients(mesh, n[:, 1])
    return float(-(dnx[node, 0] + dny[node, 1]))


def _inflow_boundary_nodes(mesh, velocity):
    """Boundary nodes where the advection velocity points into the domain."""
    nodes = set()
    for i, j, _tag in mesh.boundary_edges:
        n = mesh.boundary_edge_normal(i, j)
        for k in (i, j):
            if np.dot(velocity[k], n) < 0:
                nodes.add(int(k))
    return sorted(nodes)


def advect(mesh, levelset, velocity, dt):
    """Propagate phi through one SUPG-stabilized space-time slab.

    The transport equation carries no boundary condition; phi is frozen
    at its pre-step value on inflow boundary nodes.
    """
    if np.all(velocity == 0.0):
        return levelset.copy_with(levelset.phi.copy())
    nn = mesh.n_nodes
    frozen = _inflow_boundary_nodes(mesh, velocity)

    from .assembly import apply_dirichlet, solve_direct
    from .heat import assemble_heat_slab

    A, b, _active = assemble_heat_slab(
        mesh, levelset.phi, velocity, velocity,
        rhoc=np.ones(nn), kappa=np.zeros(nn), dt=dt)
    if frozen:
        frozen = np.array(frozen, dtype=np.int64)
        dofs = np.concatenate([frozen, frozen + nn])
        vals = np.concatenate([levelset.phi[frozen], levelset.phi[frozen]])
        A, b = apply_dirichlet(A, b, dofs, vals)
    x = solve_direct(A, b)
    return levelset.copy_with(x[nn:])


def _interface_segments(mesh, crossings):
    """Pair crossing points into segments inside each cut element."""
    per_elem = {}
    for idx, c in enumerate(crossings):
        for e in c.elements:
            per_elem.setdefault(e, []).append(idx)
    seg_a, seg_b = [], []
    for idx_list in per_elem.values():
        pts = [crossings[i].position for i in idx_list]
        if len(pts) < 2:
            continue
        if len(pts) == 2:
            pairs = [(0, 1)]
        else:
            # rare multi-cut element: greedily pair nearest points
            remaining = list(range(len(pts)))
            pairs = []
            while len(remaining) > 1:
                i = remaining.pop(0)
                dists = [np.linalg.norm(pts[i] - pts[j]) for j in remaining]
                j = remaining.pop(int(np.argmin(dists)))
                pairs.append((i, j))
        for i, j in pairs:
            if np.linalg.norm(pts[i] - pts[j]) > 1e-300:
                seg_a.append(pts[i])
                seg_b.append(pts[j])
    if seg_a:
        return np.ascontiguousarray(seg_a), np.ascontiguousarray(seg_b)
    return np.empty((0, 2)), np.empty((0, 2))


def reinitialize(mesh, levelset, crossings):
    """Reset phi to the signed distance to the discrete interface.

    Brute force over all (node, crossing) pairs; signs never flip. The
    nearest-crossing index of every node is stored on the result for the
    velocity extension.
    """
    if not crossings:
        raise NoInterfaceError("no interface crossing exists")
    cpts = np.ascontiguousarray([c.position for c in crossings])
    seg_a, seg_b = _interface_segments(mesh, crossings)
    dist, nearest = kernels.reinit_distance(
        np.ascontiguousarray(mesh.node_coords), seg_a, seg_b, cpts)
    phi = np.sign(levelset.phi) * dist
    return levelset.copy_with(phi, nearest)


def liquid_phi_integral(mesh, levelset):
    """Integral of phi over the region phi < 0 (cut elements clipped)."""
    total = 0.0
    conn = mesh.elements
    coords = mesh.node_coords
    for elem in conn:
        if mesh.kind == "quad":
            tris = [(elem[0], elem[1], elem[2]), (elem[0], elem[2], elem[3])]
        else:
            tris = [tuple(elem)]
        for tri in tris:
            total += _tri_liquid_integral(coords[list(tri)],
                                          levelset.phi[list(tri)])
    return total


def _tri_liquid_integral(xy, phi):
    """Exact integral of the linear interpolant of phi over {phi < 0}."""
    if np.all(phi >= 0):
        return 0.0
    poly_x, poly_p = [], []
    for k in range(3):
        k2 = (k + 1) % 3
        if phi[k] <= 0:
            poly_x.append(xy[k])
            poly_p.append(phi[k])
        if phi[k] * phi[k2] < 0:
            t = phi[k] / (phi[k] - phi[k2])
            poly_x.append(xy[k] + t * (xy[k2] - xy[k]))
            poly_p.append(0.0)
    if len(poly_x) < 3:
        return 0.0
    total = 0.0
    for k in range(1, len(poly_x) - 1):
        a, b, c = poly_x[0], poly_x[k], poly_x[k + 1]
        area = 0.5 * abs((b[0] - a[0]) * (c[1] - a[1])
                         - (c[0] - a[0]) * (b[1] - a[1]))
        total += area * (poly_p[0] + poly_p[k] + poly_p[k + 1]) / 3.0
    return total


def liquid_fraction_integral(mesh, levelset, reference):
    """Liquid-area diagnostic I(t): integral of phi over the liquid region
    normalized by its initial value."""
    if reference == 0.0:
        raise ValueError("reference integral must be nonzero")
    return liquid_phi_integral(mesh, levelset) / reference
