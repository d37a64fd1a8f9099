"""Time-stepping orchestration: the coupled melting/solidification loop,
error norms against the similarity solution, and the mesh-refinement
study."""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass, field

import numpy as np

from .analytic import front_position, stefan_analytical
from .exceptions import NoInterfaceError
from .flow import FlowState, solve_ns_slab
from .heat import solve_ghost_split
from .levelset import (advect, liquid_fraction_integral, liquid_phi_integral,
                       reinitialize)
from .materials import blend_materials
from .mesh import min_face_length
from .output import ensure_dir, write_timeseries, write_vtk
from .spacetime import shape_functions, spatial_rule
from .stefan import (TimeStepController, adaptive_dt, build_ghost_split,
                     extend_velocity, find_crossings, recover_nodal_gradients,
                     stefan_velocity, CrossingVelocity)

#: per-step stage order of the coupled loop (flow omitted when disabled)
STEP_STAGES = ("materials", "flow", "temperature", "crossings", "stefan",
               "extension", "reinit", "advect")


def thread_count():
    """Worker cap from STEFANST_THREADS; hardware parallelism by default."""
    val = os.environ.get("STEFANST_THREADS")
    if val:
        n = int(val)
        if n < 1:
            raise ValueError("STEFANST_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


@dataclass
class RunResult:
    scenario: object
    records: list                 # rows (t, pci_x, I, v_max, dt)
    temperature: np.ndarray       # final nodal T
    levelset: object
    flow_state: FlowState
    t_final: float
    molten_step: int = None      # first step with no interface, if any
    steps_run: int = 0

    @property
    def records_array(self):
        return np.asarray(self.records, dtype=np.float64)


def _interface_normals(mesh, levelset, crossings):
    """Unit normals (liquid -> solid) at each crossing from the recovered
    level-set gradient, interpolated along cut edges."""
    gphi = recover_nodal_gradients(mesh, levelset.phi)
    phi = levelset.phi
    normals = []
    for c in crossings:
        if c.kind == "node":
            g = gphi[c.node]
        else:
            i, j = c.edge
            t = phi[i] / (phi[i] - phi[j])
            g = (1.0 - t) * gphi[i] + t * gphi[j]
        norm = np.linalg.norm(g)
        if norm <= 1e-12:
            # flat patch: fall back to the liquid->solid chord direction
            pl = mesh.node_coords[list(c.liquid_nodes)].mean(axis=0)
            ps = mesh.node_coords[list(c.solid_nodes)].mean(axis=0)
            g = ps - pl
            norm = np.linalg.norm(g)
        normals.append(g / norm)
    return normals


def _crossing_velocities(mesh, scenario, levelset, crossings,
                         t_liquid, t_solid):
    normals = _interface_normals(mesh, levelset, crossings)
    grad_l = recover_nodal_gradients(mesh, t_liquid)
    grad_s = recover_nodal_gradients(mesh, t_solid)
    out = []
    for c, n in zip(crossings, normals):
        if scenario.freeze_interface:
            out.append(CrossingVelocity(U=np.zeros(2), n=n))
            continue
        gl = grad_l[list(c.liquid_nodes)].mean(axis=0)
        gs = grad_s[list(c.solid_nodes)].mean(axis=0)
        out.append(stefan_velocity(c, gl, gs, scenario.materials, n))
    return out


def run_simulation(scenario, out_dir=None, trace=None, steps=None):
    """Execute the coupled step loop; returns a RunResult.

    ``trace(stage, step)`` is called at each stage of every step in the
    loop order of STEP_STAGES. ``out_dir`` enables VTK/CSV output at the
    scenario's cadence. Any solver error is re-raised with the failing
    step number attached as ``exc.step``.
    """
    mesh = scenario.mesh
    nn = mesh.n_nodes
    ls = scenario.levelset
    pair = scenario.materials
    temp = scenario.initial_temperature.copy()
    flow_state = FlowState.rest(nn)
    zeros_vel = np.zeros((nn, 2))
    ext_vel = np.zeros((nn, 2))
    reference = liquid_phi_integral(mesh, ls)
    controller = TimeStepController(scenario.dt, scenario.adaptive,
                                    h_min=min_face_length(mesh))
    n_steps = scenario.steps if steps is None else int(steps)
    t = scenario.t_start
    records = []
    molten_step = None

    if out_dir is not None:
        ensure_dir(out_dir)
        _write_fields(out_dir, 0, mesh, flow_state, temp, ls)

    def emit(stage, step):
        if trace is not None:
            trace(stage, step)

    step = 0
    try:
        for step in range(1, n_steps + 1):
            dt = adaptive_dt(controller, ext_vel)

            emit("materials", step)
            mats = blend_materials(pair, ls)

            if scenario.solve_flow:
                emit("flow", step)
                flow_state, _ = solve_ns_slab(
                    mesh, flow_state, mats, dt, scenario.flow_bc,
                    body_force=scenario.body_force)
                vel_bot, vel_top = flow_state.vel_bot, flow_state.vel_top
            else:
                vel_bot = vel_top = zeros_vel

            emit("temperature", step)
            spec_l, spec_s = build_ghost_split(mesh, ls, pair.t_m)
            comp, t_liq, t_sol = solve_ghost_split(
                mesh, temp, vel_bot, vel_top, pair, spec_l, spec_s,
                liquid_mask=ls.phi < 0, dt=dt,
                dirichlet=scenario.temp_dirichlet,
                neumann=scenario.temp_neumann)

            emit("crossings", step)
            crossings = find_crossings(mesh, ls)
            if not crossings and molten_step is None:
                molten_step = step

            emit("stefan", step)
            velocities = _crossing_velocities(mesh, scenario, ls, crossings,
                                              t_liq, t_sol)

            emit("extension", step)
            if crossings:
                reinit_ls = reinitialize(mesh, ls, crossings)
                ext_vel = extend_velocity(mesh, crossings, velocities,
                                          reinit_ls.nearest_crossing)
            else:
                reinit_ls = None
                ext_vel = np.zeros((nn, 2))

            emit("reinit", step)
            if reinit_ls is not None and step % ls.reinit_interval == 0:
                ls = reinit_ls

            emit("advect", step)
            ls = advect(mesh, ls, ext_vel, dt)

            temp = comp.t_top
            t += dt
            if crossings:
                pci_x = float(np.mean([c.position[0] for c in crossings]))
            else:
                pci_x = float("nan")
            v_max = float(np.max(np.linalg.norm(ext_vel, axis=1)))
            if step % scenario.series_every == 0:
                records.append((t, pci_x,
                                liquid_fraction_integral(mesh, ls, reference),
                                v_max, dt))
            if out_dir is not None and step % scenario.fields_every == 0:
                _write_fields(out_dir, step, mesh, flow_state, temp, ls)
    except NoInterfaceError:
        raise
    except Exception as exc:
        exc.step = step
        raise

    if out_dir is not None:
        write_timeseries(os.path.join(out_dir, "timeseries.csv"), records)
    return RunResult(scenario=scenario, records=records, temperature=temp,
                     levelset=ls, flow_state=flow_state, t_final=t,
                     molten_step=molten_step, steps_run=n_steps)


def _write_fields(out_dir, step, mesh, flow_state, temp, ls):
    state = {"u": flow_state.vel_top[:, 0], "v": flow_state.vel_top[:, 1],
             "p": flow_state.p_top, "T": temp, "phi": ls.phi,
             "epsilon": ls.epsilon}
    write_vtk(os.path.join(out_dir, f"step_{step:06d}.vtk"), mesh, state)


def l2_error(mesh, numerical, evaluator):
    """Area-averaged L2 error of a nodal field against a reference.

    Element quadrature of (T_h - T_ref)^2, normalized by the domain area
    so the absolute error carries the field's units; the relative error
    divides by the same norm of the reference.
    """
    pts, ws = spatial_rule(mesh.kind)
    err2 = 0.0
    ref2 = 0.0
    area = 0.0
    coords_all = mesh.node_coords[mesh.elements]
    vals_all = np.asarray(numerical, dtype=np.float64)[mesh.elements]
    for q in range(len(ws)):
        N, dN = shape_functions(mesh.kind, pts[q])
        J = np.einsum("eai,aj->eij", coords_all, dN)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        xq = np.einsum("a,eai->ei", N, coords_all)
        th = vals_all @ N
        tref = np.asarray(evaluator(xq[:, 0], xq[:, 1]), dtype=np.float64)
        w = ws[q] * det
        err2 += float(np.sum(w * (th - tref) ** 2))
        ref2 += float(np.sum(w * tref ** 2))
        area += float(np.sum(w))
    absolute = np.sqrt(err2 / area)
    ref_norm = np.sqrt(ref2 / area)
    relative = absolute / ref_norm if ref_norm > 0 else float("inf")
    return absolute, relative


@dataclass
class ConvergenceRow:
    h: float
    nodes: int
    abs_err: float
    rel_err: float
    pci_err: float = field(default=float("nan"))


def _final_errors(result):
    """Temperature and front-position errors of a finished 1D melting run
    against the similarity solution."""
    scn = result.scenario
    params = scn.analytic
    t_end = result.t_final

    def evaluator(x, y):
        T, _ = stefan_analytical(x, t_end, params)
        return T

    abs_err, rel_err = l2_error(scn.mesh, result.temperature, evaluator)
    rec = result.records_array
    pci = rec[~np.isnan(rec[:, 1]), 1]
    x_exact = front_position(params, t_end)
    pci_err = abs(pci[-1] - x_exact) if len(pci) else float("nan")
    return abs_err, rel_err, pci_err


def convergence_study(base_cfg, h_list, build=None, runner=None):
    """Run the 1D melting benchmark per mesh size; returns (rows, rate).

    The rate is the least-squares slope of log(relative error) against
    log(h); with error ~ h^p this reports p directly.
    """
    from .scenarios import build_scenario

    if len(h_list) < 3:
        raise ValueError("need at least 3 mesh sizes")
    build = build or build_scenario
    runner = runner or run_simulation
    rows = []
    for h in h_list:
        cfg = copy.deepcopy(base_cfg)
        cfg.setdefault("mesh", {})["h"] = float(h)
        scn = build(cfg)
        result = runner(scn)
        abs_err, rel_err, pci_err = _final_errors(result)
        rows.append(ConvergenceRow(h=scn.h, nodes=scn.mesh.n_nodes,
                                   abs_err=abs_err, rel_err=rel_err,
                                   pci_err=pci_err))
    rate = fit_rate([r.h for r in rows], [r.rel_err for r in rows])
    return rows, rate


def fit_rate(h_values, errors):
    """Least-squares slope of log(error) vs log(h)."""
    h = np.log(np.asarray(h_values, dtype=np.float64))
    e = np.log(np.asarray(errors, dtype=np.float64))
    if np.allclose(e, e[0]):
        return 0.0
    return float(np.polyfit(h, e, 1)[0])
