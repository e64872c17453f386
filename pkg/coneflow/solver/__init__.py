from coneflow.solver.boundary import (
    BoundaryConditions,
    BoundarySpec,
    GhostFiller,
    apply_boundary_conditions,
    reflect_wall_velocity,
    tangential_wall_velocity,
)
from coneflow.solver.marching import (
    Solution,
    SolverContext,
    compute_time_step,
    initial_field,
    run_to_steady,
    step,
)
from coneflow.solver.mesh import N_GHOST, Mesh, build_mesh
from coneflow.solver.reconstruction import minmod, reconstruct
from coneflow.solver.residual import (
    divergence_and_source,
    face_fluxes,
    llf_flux,
    semidiscrete_residual,
    wall_flux,
)
