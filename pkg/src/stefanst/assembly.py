"""Shared sparse-assembly helpers: scatter, Dirichlet rows, direct solve."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import SolverError

#: relative residual contract for the linear solves
LINEAR_TOL = 1e-10


def element_sizes(mesh, elems=None):
    """Per-element area and length scale h_e = sqrt(area)."""
    conn = mesh.elements if elems is None else mesh.elements[elems]
    c = mesh.node_coords[conn]
    x, y = c[..., 0], c[..., 1]
    area = 0.5 * np.abs(
        np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y,
               axis=1))
    return area, np.sqrt(area)


def scatter(Ae, be, dof_map, n_dofs):
    """Sum element-local dense blocks into a global CSR matrix and rhs.

    ``dof_map`` has shape (ne, nd_local) giving the global dof of each
    local dof. COO duplicate summation keeps accumulation deterministic.
    """
    ne, nd = dof_map.shape
    rows = np.repeat(dof_map, nd, axis=1).ravel()
    cols = np.tile(dof_map, (1, nd)).ravel()
    A = sp.coo_matrix((Ae.ravel(), (rows, cols)),
                      shape=(n_dofs, n_dofs)).tocsr()
    b = np.zeros(n_dofs)
    np.add.at(b, dof_map.ravel(), be.ravel())
    return A, b


def apply_dirichlet(A, b, dofs, values):
    """Replace the given rows with identity rows carrying fixed values."""
    if len(dofs) == 0:
        return A, b
    dofs = np.asarray(dofs, dtype=np.int64)
    keep = np.ones(A.shape[0])
    keep[dofs] = 0.0
    fix = np.zeros(A.shape[0])
    fix[dofs] = 1.0
    A = sp.diags(keep) @ A + sp.diags(fix)
    b = keep * b
    b[dofs] = values
    return A.tocsr(), b


def solve_direct(A, b):
    """Sparse direct solve honoring the LINEAR_TOL residual contract."""
    try:
        lu = spla.splu(A.tocsc())
        x = lu.solve(b)
    except RuntimeError as exc:
        raise SolverError(f"sparse factorization failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("linear solve produced non-finite values")
    bnorm = np.linalg.norm(b)
    if bnorm > 0:
        rel = np.linalg.norm(A @ x - b) / bnorm
        if rel > LINEAR_TOL * 1e3:
            raise SolverError(f"linear solve residual {rel:.2e} too large")
    return x
