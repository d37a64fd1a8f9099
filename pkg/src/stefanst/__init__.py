"""stefanst: convection-coupled solidification/melting on space-time
finite elements with a level-set interface and Stefan-condition
propagation."""

from .analytic import AnalyticalStefan, front_position, stefan_analytical, \
    stefan_lambda
from .driver import (RunResult, convergence_study, l2_error, run_simulation,
                     thread_count)
from .exceptions import (ConfigError, DegenerateCrossingError,
                         DegenerateGradientError, MeshFormatError,
                         NoInterfaceError, NonConvergenceError, SolverError,
                         StefanstError)
from .kernels import BACKEND as KERNEL_BACKEND
from .levelset import (LevelSet, init_from_geometry, liquid_fraction_integral,
                       smoothed_heaviside)
from .materials import MaterialPair, PhaseProperties, blend_materials
from .mesh import Mesh, generate_structured, load_mesh, load_mesh_file, \
    save_mesh
from .scenarios import (Scenario, apply_overrides, build_scenario,
                        load_config, load_scenario, validate_config)

__version__ = "0.1.0"

__all__ = [
    "AnalyticalStefan", "front_position", "stefan_analytical",
    "stefan_lambda", "RunResult", "convergence_study", "l2_error",
    "run_simulation", "thread_count", "ConfigError",
    "DegenerateCrossingError", "DegenerateGradientError", "MeshFormatError",
    "NoInterfaceError", "NonConvergenceError", "SolverError",
    "StefanstError", "KERNEL_BACKEND", "LevelSet", "init_from_geometry",
    "liquid_fraction_integral", "smoothed_heaviside", "MaterialPair",
    "PhaseProperties", "blend_materials", "Mesh", "generate_structured",
    "load_mesh", "load_mesh_file", "save_mesh", "Scenario",
    "apply_overrides", "build_scenario", "load_config", "load_scenario",
    "validate_config",
]
