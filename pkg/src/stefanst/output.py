"""Writers for VTK snapshots, time-series CSVs, and convergence tables."""

from __future__ import annotations

import csv
import os

import numpy as np

from .levelset import smoothed_heaviside


def _fmt(x):
    # repr-style shortest round-trip float formatting for determinism
    return format(float(x), ".17g")


def write_vtk(path, mesh, state):
    """Legacy-ASCII VTK unstructured grid with point data.

    `state` maps field name -> nodal array; expected keys are
    u, v, p, T, phi (H_eps(phi) is appended automatically when both
    phi and epsilon are supplied via the "epsilon" entry).
    """
    nn = mesh.node_coords.shape[0]
    ne = mesh.elements.shape[0]
    npe = mesh.elements.shape[1]
    cell_type = 5 if mesh.kind == "tri" else 9

    eps = float(state.get("epsilon", 0.0))
    fields = [(k, np.asarray(state[k], dtype=np.float64))
              for k in ("u", "v", "p", "T", "phi") if k in state]
    if "phi" in state:
        fields.append(("H", smoothed_heaviside(
            np.asarray(state["phi"], dtype=np.float64), eps)))

    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write("stefanst snapshot\n")
        fh.write("ASCII\n")
        fh.write("DATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {nn} double\n")
        for x, y in mesh.node_coords:
            fh.write(f"{_fmt(x)} {_fmt(y)} 0\n")
        fh.write(f"CELLS {ne} {ne * (npe + 1)}\n")
        for conn in mesh.elements:
            fh.write(str(npe) + " " + " ".join(str(int(i)) for i in conn)
                     + "\n")
        fh.write(f"CELL_TYPES {ne}\n")
        for _ in range(ne):
            fh.write(f"{cell_type}\n")
        fh.write(f"POINT_DATA {nn}\n")
        for name, vals in fields:
            if vals.shape[0] != nn:
                raise ValueError(f"field {name!r} has wrong length")
            fh.write(f"SCALARS {name} double 1\n")
            fh.write("LOOKUP_TABLE default\n")
            for v in vals:
                fh.write(_fmt(v) + "\n")


TIMESERIES_HEADER = ["t", "pci_x", "I", "v_max", "dt"]


def write_timeseries(path, rows):
    """CSV of per-step diagnostics: t, pci_x, I, v_max, dt."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TIMESERIES_HEADER)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_timeseries(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != TIMESERIES_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        data = [[float(v) for v in row] for row in r]
    return np.asarray(data, dtype=np.float64)


def write_convergence(path, rows):
    """CSV of the refinement study: h, nodes, abs_err, rel_err."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["h", "nodes", "abs_err", "rel_err"])
        for h, nodes, abs_err, rel_err in rows:
            w.writerow([_fmt(h), str(int(nodes)), _fmt(abs_err),
                        _fmt(rel_err)])


def read_convergence(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != ["h", "nodes", "abs_err", "rel_err"]:
            raise ValueError(f"unexpected header {header!r}")
        data = [[float(v) for v in row] for row in r]
    return np.asarray(data, dtype=np.float64)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
