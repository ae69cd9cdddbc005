"""2-D creeping-flow solver for an Oldroyd-B fluid.

Couples a pressure-stabilised equal-order Q1-Q1 Stokes solve with a
semi-Lagrangian, positivity-preserving update of the conformation tensor,
plus a lid-driven cavity benchmark harness.
"""

__version__ = "0.1.0"

from .mesh import (
    Mesh,
    LocatedPoint,
    build_quadratic_graded_mesh,
    build_ratio_graded_mesh,
    build_uniform_mesh,
    locate_point,
    mesh_statistics,
)
from .fields import (
    ConfField,
    ScalarField,
    VectorField,
    eval_conf,
    eval_scalar,
    eval_vector,
    sym_eigenvalues,
    vertex_averaged_gradient,
)
from .stokes import (
    LidProfile,
    StokesSystem,
    assemble_rhs,
    assemble_stokes_matrix,
    lid_velocity,
    solve_stokes,
)
from .constitutive import (
    UpdateParams,
    check_time_step,
    conformation_update,
    departure_point,
    discrete_deformation_gradient,
)
from .driver import SimConfig, SimState, checkpoint, restore, run_simulation, steady_state_residual
from .postprocess import (
    Metrics,
    eigenvalue_fields,
    global_max_sigma11,
    midline_max_log_sigma11,
    sample_cross_section,
    vortex_center,
)

__all__ = [name for name in dir() if not name.startswith("_")]
