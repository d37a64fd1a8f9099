"""Interface coupling: crossings, flux nodes, gradient recovery, the
Stefan condition, ghost-split subdomains, velocity extension and the
adaptive time-step bound."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateCrossingError
from .heat import SubdomainSpec
from .materials import MaterialPair, PhaseProperties  # re-export  # noqa: F401
from .mesh import min_face_length
from .spacetime import shape_functions


@dataclass
class InterfaceCrossing:
    """One intersection of the zero level set with the mesh."""
    position: np.ndarray
    kind: str                      # "edge" or "node"
    edge: tuple = None             # (i, j) for edge crossings
    node: int = None               # hit node for node crossings
    elements: tuple = ()
    liquid_nodes: tuple = ()
    solid_nodes: tuple = ()


@dataclass
class CrossingVelocity:
    U: np.ndarray                  # m/s, parallel to n
    n: np.ndarray                  # unit normal, liquid -> solid


@dataclass
class TimeStepController:
    dt_nominal: float
    adaptive: bool = False
    h_min: float = 0.0
    v_max: float = field(default=0.0, init=True)


def node_hit_tolerance(mesh):
    return 1e-12 * min_face_length(mesh)


def find_crossings(mesh, levelset):
    """All intersections of phi = 0 with mesh edges and nodes.

    Edge crossings interpolate linearly along the cut edge; nodes with
    |phi| below 1e-12 h count as node hits (one crossing per hit node).
    Output is deterministically ordered by (min node, max node).
    """
    phi = levelset.phi
    tol = node_hit_tolerance(mesh)
    hit = np.abs(phi) < tol
    coords = mesh.node_coords
    entries = []
    for n in np.nonzero(hit)[0]:
        n = int(n)
        c = InterfaceCrossing(position=coords[n].copy(), kind="node", node=n,
                              elements=tuple(mesh.node_to_elements[n]))
        entries.append(((n, n), c))
    for i, j in mesh.edges:
        i, j = int(i), int(j)
        if hit[i] or hit[j] or phi[i] * phi[j] >= 0:
            continue
        t = phi[i] / (phi[i] - phi[j])
        pos = coords[i] + t * (coords[j] - coords[i])
        c = InterfaceCrossing(
            position=pos, kind="edge", edge=(i, j),
            elements=tuple(mesh.edge_to_elements[(i, j)]))
        entries.append(((i, j), c))
    entries.sort(key=lambda kv: kv[0])
    crossings = [c for _, c in entries]
    for c in crossings:
        c.liquid_nodes, c.solid_nodes = classify_flux_nodes(mesh, levelset, c)
    return crossings


def classify_flux_nodes(mesh, levelset, crossing):
    """Flux nodes of a crossing, split into (liquid, solid) tuples.

    Edge crossings use the two edge endpoints; node hits use all
    edge-adjacent neighbors of the hit node. A side with no flux node
    raises :class:`DegenerateCrossingError`.
    """
    phi = levelset.phi
    if crossing.kind == "edge":
        i, j = crossing.edge
        liquid = tuple(n for n in (i, j) if phi[n] < 0)
        solid = tuple(n for n in (i, j) if phi[n] >= 0)
    else:
        tol = node_hit_tolerance(mesh)
        nbrs = mesh.node_neighbors[crossing.node]
        liquid = tuple(n for n in nbrs if phi[n] < -tol)
        solid = tuple(n for n in nbrs if phi[n] > tol)
    if not liquid or not solid:
        raise DegenerateCrossingError(
            f"crossing at {crossing.position} has no flux node on one side")
    return liquid, solid


def _element_gradients(mesh, values):
    """Gradient of a nodal field per element, at the element centroid."""
    if mesh.kind == "tri":
        xi = (1 / 3, 1 / 3)
    else:
        xi = (0.0, 0.0)
    _, dN = shape_functions(mesh.kind, xi)
    coords = mesh.node_coords[mesh.elements]
    J = np.einsum("eai,aj->eij", coords, dN)
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    inv = np.empty_like(J)
    inv[:, 0, 0] = J[:, 1, 1]
    inv[:, 0, 1] = -J[:, 0, 1]
    inv[:, 1, 0] = -J[:, 1, 0]
    inv[:, 1, 1] = J[:, 0, 0]
    inv /= det[:, None, None]
    dNx = np.einsum("aj,eji->eai", dN, inv)
    return np.einsum("eai,ea->ei", dNx, values[mesh.elements])


def recover_nodal_gradients(mesh, values):
    """Least-squares nodal gradient recovery for all nodes at once.

    For linear elements this reduces to the unweighted mean of the
    element-wise gradients over each node's patch.
    """
    eg = _element_gradients(mesh, np.asarray(values, dtype=np.float64))
    out = np.zeros((mesh.n_nodes, 2))
    counts = np.zeros(mesh.n_nodes)
    for k in range(mesh.nodes_per_element):
        np.add.at(out, mesh.elements[:, k], eg)
        np.add.at(counts, mesh.elements[:, k], 1.0)
    out /= np.maximum(counts, 1.0)[:, None]
    return out


def recover_nodal_gradient(mesh, values, node):
    """Recovered gradient of a nodal scalar field at one node."""
    if not 0 <= node < mesh.n_nodes:
        raise ValueError(f"node index {node} out of range")
    return recover_nodal_gradients(mesh, values)[node]


def stefan_velocity(crossing, grad_liquid, grad_solid, materials, normal):
    """Stefan-condition propagation velocity at one crossing.

    The heat-flux jump q = (-kappa_L grad T_L + kappa_S grad T_S) . n is
    divided by rho_ref h_m with rho_ref the liquid density; the result is
    projected onto the interface normal n (liquid -> solid). Positive
    U . n means melting.
    """
    if materials.h_m <= 0:
        raise ValueError("latent heat must be positive")
    n = np.asarray(normal, dtype=np.float64)
    q = (-materials.liquid.kappa * np.asarray(grad_liquid)
         + materials.solid.kappa * np.asarray(grad_solid)) @ n
    U = q / (materials.liquid.rho * materials.h_m) * n
    return CrossingVelocity(U=U, n=n)


def build_ghost_split(mesh, levelset, t_m=0.0):
    """Per-phase subdomains for the ghost-split temperature solves.

    A phase's active elements are those with at least one node of its
    sign; ghost nodes are the opposite-sign nodes of active elements and
    carry T_m. Nodes sitting exactly on the interface are ghosts of both
    subproblems.
    """
    phi = levelset.phi
    tol = node_hit_tolerance(mesh)
    on_pci = np.abs(phi) < tol
    liquid = (phi < 0) & ~on_pci
    solid = (phi > 0) & ~on_pci

    specs = []
    for owner in (liquid, solid):
        elem_mask = owner[mesh.elements].any(axis=1)
        elems = np.nonzero(elem_mask)[0]
        nodes = np.unique(mesh.elements[elems].ravel())
        ghost = nodes[~owner[nodes]]
        specs.append(SubdomainSpec(elems, nodes, ghost, t_m))
    return specs[0], specs[1]


def extend_velocity(mesh, crossings, velocities, nearest):
    """Nearest-crossing extension of the Stefan velocity to all nodes."""
    if nearest is None:
        raise ValueError("nearest-crossing map is required "
                         "(produced by reinitialize)")
    if len(velocities) != len(crossings):
        raise ValueError("one velocity per crossing required")
    U = np.array([v.U for v in velocities])
    return U[np.asarray(nearest, dtype=np.int64)]


def adaptive_dt(controller, velocity_field):
    """Next time step: dt_nominal, capped by h_min / v_max when adaptive."""
    v_max = float(np.max(np.linalg.norm(
        np.asarray(velocity_field).reshape(-1, 2), axis=1)))
    controller.v_max = v_max
    if not controller.adaptive or v_max == 0.0:
        return controller.dt_nominal
    return min(controller.dt_nominal, controller.h_min / v_max)
