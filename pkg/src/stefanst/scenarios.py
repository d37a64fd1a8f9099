"""Scenario configuration: TOML parsing, validation, and builders for the
built-in setups (1D melting benchmark, phase-change lid-driven cavity,
corner flow) plus fully custom problems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:          # Python < 3.11
    import tomli as tomllib

from .analytic import AnalyticalStefan, front_position, stefan_analytical
from .exceptions import ConfigError
from .flow import FlowBC
from .levelset import LevelSet, init_from_geometry
from .materials import MaterialPair, PhaseProperties
from .mesh import generate_structured, load_mesh_file, structured_from_lines

SCENARIO_KINDS = ("stefan_1d", "cavity_melt", "corner_flow", "custom")


@dataclass
class Scenario:
    """A fully resolved simulation setup, ready for the step loop."""
    kind: str
    mesh: object
    materials: MaterialPair
    t_start: float
    dt: float
    steps: int
    epsilon: float
    reinit_interval: int
    adaptive: bool
    freeze_interface: bool
    solve_flow: bool
    flow_bc: FlowBC
    temp_dirichlet: dict
    temp_neumann: dict
    initial_temperature: np.ndarray
    levelset: LevelSet
    fields_every: int = 10
    series_every: int = 1
    body_force: tuple = (0.0, 0.0)
    analytic: AnalyticalStefan = None
    h: float = 0.0
    raw: dict = field(default_factory=dict, repr=False)


def load_config(path):
    """Parse a TOML config file into a plain dict."""
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from exc


def apply_overrides(cfg, overrides):
    """Apply ``section.key=value`` command-line overrides in place.

    Values are parsed with TOML literal syntax, falling back to a bare
    string (so ``mesh.kind=tri`` works without quotes).
    """
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form k=v")
        key, _, text = item.partition("=")
        try:
            value = tomllib.loads(f"v = {text}")["v"]
        except tomllib.TOMLDecodeError:
            value = text
        node = cfg
        parts = key.strip().split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} traverses a scalar")
        node[parts[-1]] = value
    return cfg


def _require(cond, msg, errors):
    if not cond:
        errors.append(msg)


def validate_config(cfg):
    """Validate a config dict; raises ConfigError listing every problem."""
    errors = []
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a table")
    scn = cfg.get("scenario", {})
    kind = scn.get("kind")
    _require(kind in SCENARIO_KINDS,
             f"scenario.kind must be one of {SCENARIO_KINDS}, got {kind!r}",
             errors)
    dt = scn.get("dt", _DEFAULTS.get(kind, {}).get("dt"))
    steps = scn.get("steps", _DEFAULTS.get(kind, {}).get("steps"))
    if dt is not None:
        _require(isinstance(dt, (int, float)) and dt > 0,
                 "scenario.dt must be positive", errors)
    if steps is not None:
        _require(isinstance(steps, int) and steps >= 1,
                 "scenario.steps must be an integer >= 1", errors)
    eps = scn.get("epsilon")
    if eps is not None:
        _require(isinstance(eps, (int, float)) and eps >= 0,
                 "scenario.epsilon must be nonnegative", errors)
    ri = scn.get("reinit_interval")
    if ri is not None:
        _require(isinstance(ri, int) and ri >= 1,
                 "scenario.reinit_interval must be an integer >= 1", errors)
    mesh = cfg.get("mesh", {})
    mk = mesh.get("kind", "quad")
    _require(mk in ("quad", "tri"), "mesh.kind must be 'quad' or 'tri'",
             errors)
    if "h" in mesh:
        _require(isinstance(mesh["h"], (int, float)) and mesh["h"] > 0,
                 "mesh.h must be positive", errors)
    if kind == "custom":
        _require("materials" in cfg, "custom scenarios need [materials]",
                 errors)
        _require("initial" in cfg and "interface" in cfg.get("initial", {}),
                 "custom scenarios need initial.interface", errors)
        _require("h" in mesh or "file" in mesh,
                 "custom scenarios need mesh.h or mesh.file", errors)
    out = cfg.get("output", {})
    for key in ("fields_every", "series_every"):
        if key in out:
            _require(isinstance(out[key], int) and out[key] >= 1,
                     f"output.{key} must be an integer >= 1", errors)
    if errors:
        raise ConfigError("; ".join(errors))
    return cfg


_DEFAULTS = {
    "stefan_1d": dict(dt=0.5, steps=2000, t_start=10.0, epsilon=0.0,
                      h=1e-3),
    "cavity_melt": dict(dt=0.1, steps=500, t_start=0.0, epsilon=0.001,
                        h=0.02),
    "corner_flow": dict(dt=5.0, steps=500, t_start=0.0, epsilon=0.001,
                        h=0.0),
    "custom": dict(dt=1.0, steps=1, t_start=0.0, epsilon=0.0, h=0.0),
}


def _common(cfg, kind):
    scn = cfg.get("scenario", {})
    d = _DEFAULTS[kind]
    out = cfg.get("output", {})
    return dict(
        t_start=float(scn.get("t_start", d["t_start"])),
        dt=float(scn.get("dt", d["dt"])),
        steps=int(scn.get("steps", d["steps"])),
        epsilon=float(scn.get("epsilon", d["epsilon"])),
        reinit_interval=int(scn.get("reinit_interval", 1)),
        adaptive=bool(scn.get("adaptive", True)),
        freeze_interface=bool(scn.get("freeze_interface", False)),
        fields_every=int(out.get("fields_every", 10)),
        series_every=int(out.get("series_every", 1)),
    )


def _build_stefan_1d(cfg):
    """Melting of ice by a hot left wall on a 0.01 x 0.01 square.

    No flow; temperature fixed at 300 K on the left boundary, melting
    temperature 273 K; the run starts from the similarity solution at
    t_start so the front sits strictly inside the domain.
    """
    common = _common(cfg, "stefan_1d")
    mcfg = cfg.get("mesh", {})
    h = float(mcfg.get("h", _DEFAULTS["stefan_1d"]["h"]))
    kind = mcfg.get("kind", "quad")
    L = 0.01
    n = max(1, round(L / h))
    mesh = generate_structured(n, n, L, L, kind=kind)

    liquid = PhaseProperties(rho=1000.0, cp=4200.0, kappa=0.6, mu=1.0)
    solid = PhaseProperties(rho=1000.0, cp=4200.0, kappa=0.6, mu=1.0)
    pair = MaterialPair(liquid, solid, h_m=333700.0, t_m=273.0)
    params = AnalyticalStefan.from_materials(
        cp=liquid.cp, t_l=300.0, t_m=pair.t_m, h_m=pair.h_m,
        kappa=liquid.kappa, rho=liquid.rho)

    x0 = front_position(params, common["t_start"])
    ls = init_from_geometry(mesh, ("vline", x0))
    ls.epsilon = common["epsilon"]
    ls.reinit_interval = common["reinit_interval"]
    T0, _ = stefan_analytical(mesh.node_coords[:, 0], common["t_start"],
                              params)
    return Scenario(
        kind="stefan_1d", mesh=mesh, materials=pair, solve_flow=False,
        flow_bc=None, temp_dirichlet={"left": params.t_l}, temp_neumann={},
        initial_temperature=np.asarray(T0, dtype=np.float64), levelset=ls,
        analytic=params, h=L / n, raw=cfg, **common)


def _build_cavity_melt(cfg):
    """Unit-square lid-driven cavity, liquid top half over a solid block.

    Lid at u = (1, 0) and T = 1; no-slip and adiabatic lateral/bottom
    walls; initial temperature at the melting point everywhere.
    """
    common = _common(cfg, "cavity_melt")
    mcfg = cfg.get("mesh", {})
    h = float(mcfg.get("h", _DEFAULTS["cavity_melt"]["h"]))
    kind = mcfg.get("kind", "quad")
    n = max(2, round(1.0 / h))
    mesh = generate_structured(n, n, 1.0, 1.0, kind=kind)

    liquid = PhaseProperties(rho=2.0, cp=1e3, kappa=1.0, mu=1.0)
    solid = PhaseProperties(rho=1.0, cp=1.0, kappa=1.0, mu=1e4)
    pair = MaterialPair(liquid, solid, h_m=1.0, t_m=0.0)

    # nodes exactly on the front would average the two viscosities
    # (H(0) = 1/2) and drag the first liquid cell row; a negligible
    # nudge puts them strictly on the liquid side of the sharp front
    ls = init_from_geometry(mesh, ("hline", 0.5 - 1e-9))   # liquid above
    ls.epsilon = common["epsilon"]
    ls.reinit_interval = common["reinit_interval"]
    # corner nodes take the lid value: the tag listed last wins
    bc = FlowBC(dirichlet={"left": (0.0, 0.0), "right": (0.0, 0.0),
                           "bottom": (0.0, 0.0), "top": (1.0, 0.0)})
    return Scenario(
        kind="cavity_melt", mesh=mesh, materials=pair, solve_flow=True,
        flow_bc=bc, temp_dirichlet={"top": 1.0}, temp_neumann={},
        initial_temperature=np.zeros(mesh.n_nodes), levelset=ls,
        h=1.0 / n, raw=cfg, **common)


def corner_flow_mesh(d=0.2, inflow_length=0.2, inflow_width=0.01,
                     channel_height=1.0, channel_cells=8, wall_cells=12,
                     inflow_cells=6, kind="quad"):
    """L-shaped corner-flow domain: a thin horizontal inflow duct feeding
    a vertical outflow channel of thickness ``d``.

    The grid is graded: fine near the duct, coarsening towards the top.
    Boundary tags: ``in`` (duct inlet), ``top`` (channel outlet),
    ``right`` (heated channel wall), ``wall`` (everything else).
    """
    x_join = inflow_length
    x_end = inflow_length + d
    # duct: cluster x-lines towards the channel entrance
    s = np.linspace(0.0, 1.0, inflow_cells + 1)
    x_duct = x_join * (1.0 - (1.0 - s) ** 1.5)
    x_chan = np.linspace(x_join, x_end, channel_cells + 1)
    x_lines = np.concatenate([x_duct[:-1], x_chan])
    # two cell rows across the duct, then geometric growth to the top
    s = np.linspace(0.0, 1.0, wall_cells + 1)[1:]
    y_upper = inflow_width + (channel_height - inflow_width) * s ** 1.5
    y_lines = np.concatenate([[0.0, 0.5 * inflow_width, inflow_width],
                              y_upper])
    n_duct_x = inflow_cells
    n_strip_rows = 2

    def keep(ix, iy):
        return iy < n_strip_rows or ix >= n_duct_x

    tol = 1e-9

    def tag(xm, ym):
        if abs(xm) < tol:
            return "in"
        if abs(ym - channel_height) < tol:
            return "top"
        if abs(xm - x_end) < tol:
            return "right"
        return "wall"

    return structured_from_lines(x_lines, y_lines, kind=kind,
                                 cell_mask=keep, tag_fn=tag)


def _build_corner_flow(cfg):
    """Warm-water duct flow diverted upward into an ice-filled channel.

    The duct and the left half of the channel hold water; the right half
    holds ice. Hot Dirichlet temperatures on the inlet and the right
    wall drive the melting; the outlet at the top is traction-free.
    """
    common = _common(cfg, "corner_flow")
    ccfg = cfg.get("corner_flow", {})
    d = float(ccfg.get("d", 0.2))
    inflow_length = float(ccfg.get("inflow_length", 0.2))
    inflow_width = float(ccfg.get("inflow_width", 0.01))
    channel_height = float(ccfg.get("channel_height", 1.0))
    pci_x = float(ccfg.get("pci_x", inflow_length + 0.5 * d))
    mcfg = cfg.get("mesh", {})
    mesh = corner_flow_mesh(
        d=d, inflow_length=inflow_length, inflow_width=inflow_width,
        channel_height=channel_height,
        channel_cells=int(ccfg.get("channel_cells", 8)),
        wall_cells=int(ccfg.get("wall_cells", 12)),
        inflow_cells=int(ccfg.get("inflow_cells", 6)),
        kind=mcfg.get("kind", "quad"))

    liquid = PhaseProperties(rho=999.88, cp=4179.6, kappa=0.5557, mu=1.787)
    solid = PhaseProperties(rho=916.8, cp=2090.0, kappa=2.220, mu=1e4)
    pair = MaterialPair(liquid, solid, h_m=333700.0, t_m=273.0)

    ls = init_from_geometry(mesh, ("vline", pci_x))  # liquid on duct side
    ls.epsilon = common["epsilon"]
    ls.reinit_interval = common["reinit_interval"]
    T0 = np.where(ls.phi < 0, 273.0, 268.0)

    a, w = 5000.0, inflow_width

    def inflow(x, y):
        return (a * y * (w - y), 0.0)

    bc = FlowBC(dirichlet={"wall": (0.0, 0.0), "right": (0.0, 0.0),
                           "in": inflow},
                neumann={"top": (0.0, 0.0)})
    return Scenario(
        kind="corner_flow", mesh=mesh, materials=pair, solve_flow=True,
        flow_bc=bc,
        temp_dirichlet={"in": 353.0, "right": 353.0, "top": 278.0},
        temp_neumann={},
        initial_temperature=T0, levelset=ls,
        h=min(d / int(ccfg.get("channel_cells", 8)), inflow_width / 2),
        raw=cfg, **common)


def _phase_from_table(tab, name):
    try:
        return PhaseProperties(rho=float(tab["rho"]), cp=float(tab["cp"]),
                               kappa=float(tab["kappa"]),
                               mu=float(tab["mu"]))
    except KeyError as exc:
        raise ConfigError(f"materials.{name} is missing {exc}") from exc


def _resolve_velocity_bc(spec):
    if isinstance(spec, dict):
        if "parabolic" in spec:
            a, w = (float(v) for v in spec["parabolic"])
            return lambda x, y: (a * y * (w - y), 0.0)
        raise ConfigError(f"unknown velocity bc table {spec!r}")
    ux, uy = (float(v) for v in spec)
    return (ux, uy)


def _build_custom(cfg):
    common = _common(cfg, "custom")
    mcfg = cfg.get("mesh", {})
    if "file" in mcfg:
        mesh = load_mesh_file(mcfg["file"])
        h = float(mcfg.get("h", mesh._min_face_length))
    else:
        Lx = float(mcfg.get("Lx", 1.0))
        Ly = float(mcfg.get("Ly", 1.0))
        h = float(mcfg["h"])
        mesh = generate_structured(max(1, round(Lx / h)),
                                   max(1, round(Ly / h)),
                                   Lx, Ly, kind=mcfg.get("kind", "quad"))

    mats = cfg["materials"]
    pair = MaterialPair(_phase_from_table(mats["liquid"], "liquid"),
                        _phase_from_table(mats["solid"], "solid"),
                        h_m=float(mats["h_m"]), t_m=float(mats["t_m"]))

    init = cfg["initial"]
    geom = init["interface"]
    if geom[0] == "circle":
        geometry = ("circle", (float(geom[1]), float(geom[2])),
                    float(geom[3]))
    else:
        geometry = tuple(geom)
    ls = init_from_geometry(mesh, geometry)
    ls.epsilon = common["epsilon"]
    ls.reinit_interval = common["reinit_interval"]
    T0 = np.where(ls.phi < 0, float(init.get("T_liquid", pair.t_m)),
                  float(init.get("T_solid", pair.t_m)))

    bcs = cfg.get("bc", {})
    tags = {t for _, _, t in mesh.boundary_edges}
    for group in ("velocity", "traction", "temperature", "flux"):
        for tag in bcs.get(group, {}):
            if tag not in tags:
                raise ConfigError(
                    f"bc.{group} references unknown boundary tag {tag!r}")
    solve_flow = bool(cfg.get("flow", {}).get("enabled",
                                              bool(bcs.get("velocity"))))
    flow_bc = None
    if solve_flow:
        flow_bc = FlowBC(
            dirichlet={t: _resolve_velocity_bc(v)
                       for t, v in bcs.get("velocity", {}).items()},
            neumann={t: tuple(float(c) for c in v)
                     for t, v in bcs.get("traction", {}).items()} or None)
    temp_d = {t: float(v) for t, v in bcs.get("temperature", {}).items()}
    temp_n = {t: float(v) for t, v in bcs.get("flux", {}).items()}
    return Scenario(
        kind="custom", mesh=mesh, materials=pair, solve_flow=solve_flow,
        flow_bc=flow_bc, temp_dirichlet=temp_d, temp_neumann=temp_n,
        initial_temperature=T0, levelset=ls, h=h, raw=cfg, **common)


_BUILDERS = {
    "stefan_1d": _build_stefan_1d,
    "cavity_melt": _build_cavity_melt,
    "corner_flow": _build_corner_flow,
    "custom": _build_custom,
}


def build_scenario(cfg):
    """Validate a config dict and construct the runnable Scenario."""
    validate_config(cfg)
    kind = cfg["scenario"]["kind"]
    try:
        scenario = _BUILDERS[kind](cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} configuration: {exc}") from exc
    if not math.isfinite(scenario.dt) or scenario.dt <= 0:
        raise ConfigError("dt must be positive and finite")
    return scenario


def load_scenario(path, overrides=None):
    cfg = load_config(path)
    apply_overrides(cfg, overrides)
    return build_scenario(cfg)
