from coneflow.validate.manufactured import (
    ManufacturedField,
    TrigComponent,
    general_residual,
    oracle_discrepancy,
    random_primitive_states,
    spherical_residual_oracle,
    transform_to_spherical_form,
)
from coneflow.validate.mms import MMSResult, mms_convergence, mms_error
from coneflow.validate.report import SUITES, VerificationReport, run_verification
from coneflow.validate.surface import (
    SurfaceComparison,
    compare_surface_pressure,
    surface_pressure_coefficient,
)
from coneflow.validate.taylor_maccoll import (
    TaylorMaccollSolution,
    oblique_shock,
    pressure_ratio_to_cp,
    taylor_maccoll,
)
