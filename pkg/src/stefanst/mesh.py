"""2D simplicial/quadrilateral meshes with boundary tags and adjacency.

Meshes are immutable after construction. Supported flavours:
structured quadrilateral grids, structured triangular grids (each cell
split along the lower-left to upper-right diagonal) and unstructured
triangle meshes loaded from the plain-text format below.

Mesh text format (ASCII, whitespace separated):
    line 1: ``nodes N elements E boundary B kind {tri|quad}``
    next N lines: ``x y``
    next E lines: node indices (0-based, 3 or 4 per line)
    next B lines: ``i j tagname``
"""

from __future__ import annotations

import numpy as np

from .exceptions import MeshFormatError


def _signed_area(coords):
    """Shoelace signed area of a polygon given as (n, 2) vertex array."""
    x = coords[:, 0]
    y = coords[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


class Mesh:
    """Immutable 2D mesh of triangles or axis-ordered quadrilaterals.

    Attributes
    ----------
    node_coords : (n_nodes, 2) float array
    elements : (n_elements, 3 or 4) int array, counter-clockwise
    kind : "tri" or "quad"
    boundary_edges : list of (i, j, tag)
    edges : (n_edges, 2) int array, unique, i < j
    node_to_elements : tuple of tuples, elements containing each node
    node_neighbors : tuple of tuples, edge-connected neighbor nodes
    """

    def __init__(self, node_coords, elements, boundary_edges, kind,
                 fix_orientation=False):
        coords = np.ascontiguousarray(node_coords, dtype=np.float64)
        elems = np.ascontiguousarray(elements, dtype=np.int64)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise MeshFormatError("node_coords must have shape (n, 2)")
        if elems.ndim != 2 or elems.shape[1] not in (3, 4):
            raise MeshFormatError("elements must have 3 or 4 nodes each")
        if kind not in ("tri", "quad"):
            raise MeshFormatError(f"unknown mesh kind {kind!r}")
        if elems.shape[1] != (3 if kind == "tri" else 4):
            raise MeshFormatError(f"{kind} mesh with {elems.shape[1]}-node elements")

        n_nodes = coords.shape[0]
        if elems.size and (elems.min() < 0 or elems.max() >= n_nodes):
            raise MeshFormatError("element references node index out of range")

        for e, elem in enumerate(elems):
            area = _signed_area(coords[elem])
            if area < 0 and fix_orientation:
                elems[e] = elem[::-1]
                area = -area
            if area <= 0:
                raise MeshFormatError(
                    f"element {e} has non-positive area {area:g}")

        self.node_coords = coords
        self.elements = elems
        self.kind = kind
        self.n_nodes = n_nodes
        self.n_elements = elems.shape[0]
        self.nodes_per_element = elems.shape[1]

        # unique undirected edges and edge -> owning elements adjacency
        e2e = {}
        ns = elems.shape[1]
        for e, elem in enumerate(elems):
            for k in range(ns):
                i, j = int(elem[k]), int(elem[(k + 1) % ns])
                key = (min(i, j), max(i, j))
                e2e.setdefault(key, []).append(e)
        self.edge_to_elements = {k: tuple(v) for k, v in e2e.items()}
        self.edges = np.array(sorted(e2e), dtype=np.int64).reshape(-1, 2)
        counts = {k: len(v) for k, v in e2e.items()}

        validated = []
        for entry in boundary_edges:
            i, j, tag = int(entry[0]), int(entry[1]), str(entry[2])
            if not (0 <= i < n_nodes and 0 <= j < n_nodes):
                raise MeshFormatError(f"boundary edge ({i},{j}) out of range")
            key = (min(i, j), max(i, j))
            if counts.get(key, 0) != 1:
                raise MeshFormatError(
                    f"boundary edge ({i},{j}) is not a boundary face "
                    f"(owned by {counts.get(key, 0)} elements)")
            validated.append((i, j, tag))
        self.boundary_edges = tuple(validated)
        self.boundary_tags = frozenset(t for _, _, t in validated)

        n2e = [[] for _ in range(n_nodes)]
        for e, elem in enumerate(elems):
            for a in elem:
                n2e[a].append(e)
        self.node_to_elements = tuple(tuple(v) for v in n2e)

        nbrs = [set() for _ in range(n_nodes)]
        for i, j in self.edges:
            nbrs[i].add(int(j))
            nbrs[j].add(int(i))
        self.node_neighbors = tuple(tuple(sorted(s)) for s in nbrs)

        lengths = np.linalg.norm(
            coords[self.edges[:, 0]] - coords[self.edges[:, 1]], axis=1)
        self._min_face_length = float(lengths.min()) if lengths.size else 0.0

    def boundary_edge_normal(self, i, j):
        """Unit outward normal of the boundary edge (i, j)."""
        key = (min(i, j), max(i, j))
        owners = self.edge_to_elements.get(key, ())
        if len(owners) != 1:
            raise ValueError(f"({i},{j}) is not a boundary edge")
        a, b = self.node_coords[i], self.node_coords[j]
        t = b - a
        n = np.array([t[1], -t[0]])
        n /= np.linalg.norm(n)
        centroid = self.node_coords[self.elements[owners[0]]].mean(axis=0)
        if np.dot(n, 0.5 * (a + b) - centroid) < 0:
            n = -n
        return n

    def element_coords(self):
        """Coordinates of all element nodes, shape (n_elements, ns, 2)."""
        return self.node_coords[self.elements]

    def boundary_nodes(self, tag):
        """Sorted node indices lying on boundary edges with the given tag."""
        nodes = set()
        for i, j, t in self.boundary_edges:
            if t == tag:
                nodes.add(i)
                nodes.add(j)
        return np.array(sorted(nodes), dtype=np.int64)

    def tagged_edges(self, tag):
        return [(i, j) for i, j, t in self.boundary_edges if t == tag]


def generate_structured(nx, ny, Lx, Ly, origin=(0.0, 0.0), kind="quad"):
    """Uniform structured grid on [origin, origin + (Lx, Ly)].

    ``quad`` yields (nx+1)(ny+1) nodes and nx*ny cells; ``tri`` splits each
    cell along the lower-left to upper-right diagonal into two triangles.
    Boundary edges are tagged left/right/top/bottom.
    """
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be >= 1")
    if Lx <= 0 or Ly <= 0:
        raise ValueError("Lx and Ly must be positive")
    x = origin[0] + np.linspace(0.0, Lx, nx + 1)
    y = origin[1] + np.linspace(0.0, Ly, ny + 1)
    return structured_from_lines(x, y, kind)


def structured_from_lines(x_lines, y_lines, kind="quad", cell_mask=None,
                          tag_fn=None):
    """Tensor-product grid from explicit coordinate lines.

    ``cell_mask(ix, iy) -> bool`` drops cells (used for non-rectangular
    domains); ``tag_fn(xm, ym) -> str`` overrides the default
    left/right/top/bottom boundary tagging given an edge midpoint.
    """
    x_lines = np.asarray(x_lines, dtype=np.float64)
    y_lines = np.asarray(y_lines, dtype=np.float64)
    nx = len(x_lines) - 1
    ny = len(y_lines) - 1
    nid = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    xx, yy = np.meshgrid(x_lines, y_lines)
    coords = np.column_stack([xx.ravel(), yy.ravel()])

    cells = []
    for iy in range(ny):
        for ix in range(nx):
            if cell_mask is not None and not cell_mask(ix, iy):
                continue
            n00 = nid[iy, ix]
            n10 = nid[iy, ix + 1]
            n11 = nid[iy + 1, ix + 1]
            n01 = nid[iy + 1, ix]
            if kind == "quad":
                cells.append((n00, n10, n11, n01))
            else:
                cells.append((n00, n10, n11))
                cells.append((n00, n11, n01))

    elems = np.array(cells, dtype=np.int64)

    # boundary edges: element edges owned by exactly one cell
    ns = 3 if kind == "tri" else 4
    counts = {}
    directed = {}
    for elem in elems:
        for k in range(ns):
            i, j = int(elem[k]), int(elem[(k + 1) % ns])
            key = (min(i, j), max(i, j))
            counts[key] = counts.get(key, 0) + 1
            directed[key] = (i, j)

    xmin, xmax = x_lines[0], x_lines[-1]
    ymin, ymax = y_lines[0], y_lines[-1]
    tol = 1e-12 * max(xmax - xmin, ymax - ymin)
    boundary = []
    for key, c in counts.items():
        if c != 1:
            continue
        i, j = directed[key]
        xm = 0.5 * (coords[i, 0] + coords[j, 0])
        ym = 0.5 * (coords[i, 1] + coords[j, 1])
        if tag_fn is not None:
            tag = tag_fn(xm, ym)
        elif abs(xm - xmin) < tol:
            tag = "left"
        elif abs(xm - xmax) < tol:
            tag = "right"
        elif abs(ym - ymin) < tol:
            tag = "bottom"
        elif abs(ym - ymax) < tol:
            tag = "top"
        else:
            tag = "interior"
        boundary.append((i, j, tag))
    boundary.sort(key=lambda t: (t[0], t[1]))

    mesh = Mesh(coords, elems, boundary, kind)
    # drop nodes not referenced by any element (masked grids)
    used = np.zeros(mesh.n_nodes, dtype=bool)
    used[elems.ravel()] = True
    if not used.all():
        remap = -np.ones(mesh.n_nodes, dtype=np.int64)
        remap[used] = np.arange(used.sum())
        elems2 = remap[elems]
        boundary2 = [(int(remap[i]), int(remap[j]), t) for i, j, t in boundary]
        mesh = Mesh(coords[used], elems2, boundary2, kind)
    return mesh


def min_face_length(mesh):
    """Minimum Euclidean edge length over all element faces."""
    return mesh._min_face_length


def node_patch(mesh, node):
    """All elements containing ``node`` (no duplicates)."""
    if not 0 <= node < mesh.n_nodes:
        raise ValueError(f"node index {node} out of range")
    return list(mesh.node_to_elements[node])


def load_mesh(text):
    """Parse the plain-text mesh format; see module docstring.

    Clockwise elements are reordered counter-clockwise. Malformed counts,
    out-of-range indices and degenerate elements raise
    :class:`MeshFormatError` naming the offending line.
    """
    lines = text.splitlines()
    content = [(k + 1, ln.strip()) for k, ln in enumerate(lines)
               if ln.strip() and not ln.lstrip().startswith("#")]
    if not content:
        raise MeshFormatError("empty mesh document")
    lineno, header = content[0]
    toks = header.split()
    try:
        assert toks[0] == "nodes" and toks[2] == "elements" and \
            toks[4] == "boundary" and toks[6] == "kind"
        n_nodes, n_elems, n_bnd = int(toks[1]), int(toks[3]), int(toks[5])
        kind = toks[7]
    except (AssertionError, IndexError, ValueError):
        raise MeshFormatError(f"line {lineno}: bad header {header!r}") from None
    if kind not in ("tri", "quad"):
        raise MeshFormatError(f"line {lineno}: unknown kind {kind!r}")

    expected = 1 + n_nodes + n_elems + n_bnd
    if len(content) != expected:
        raise MeshFormatError(
            f"line {lineno}: header promises {expected} content lines, "
            f"document has {len(content)}")

    rows = content[1:]
    coords = np.empty((n_nodes, 2))
    for k in range(n_nodes):
        ln_no, ln = rows[k]
        parts = ln.split()
        if len(parts) != 2:
            raise MeshFormatError(f"line {ln_no}: expected 'x y'")
        try:
            coords[k] = [float(parts[0]), float(parts[1])]
        except ValueError:
            raise MeshFormatError(f"line {ln_no}: bad coordinate") from None

    ns = 3 if kind == "tri" else 4
    elems = np.empty((n_elems, ns), dtype=np.int64)
    for k in range(n_elems):
        ln_no, ln = rows[n_nodes + k]
        parts = ln.split()
        if len(parts) != ns:
            raise MeshFormatError(
                f"line {ln_no}: expected {ns} node indices")
        try:
            idx = [int(p) for p in parts]
        except ValueError:
            raise MeshFormatError(f"line {ln_no}: bad node index") from None
        for i in idx:
            if not 0 <= i < n_nodes:
                raise MeshFormatError(
                    f"line {ln_no}: node index {i} out of range "
                    f"(mesh has {n_nodes} nodes)")
        elems[k] = idx

    boundary = []
    for k in range(n_bnd):
        ln_no, ln = rows[n_nodes + n_elems + k]
        parts = ln.split()
        if len(parts) != 3:
            raise MeshFormatError(f"line {ln_no}: expected 'i j tagname'")
        try:
            boundary.append((int(parts[0]), int(parts[1]), parts[2]))
        except ValueError:
            raise MeshFormatError(f"line {ln_no}: bad boundary edge") from None

    try:
        return Mesh(coords, elems, boundary, kind, fix_orientation=True)
    except MeshFormatError as exc:
        raise MeshFormatError(f"mesh validation failed: {exc}") from None


def load_mesh_file(path):
    with open(path, encoding="ascii") as fh:
        return load_mesh(fh.read())


def save_mesh(mesh):
    """Serialize to the plain-text format; round-trips coordinates bit-exactly."""
    out = [f"nodes {mesh.n_nodes} elements {mesh.n_elements} "
           f"boundary {len(mesh.boundary_edges)} kind {mesh.kind}"]
    for x, y in mesh.node_coords:
        out.append(f"{float(x)!r} {float(y)!r}")
    for elem in mesh.elements:
        out.append(" ".join(str(int(i)) for i in elem))
    for i, j, tag in mesh.boundary_edges:
        out.append(f"{i} {j} {tag}")
    return "\n".join(out) + "\n"
