"""Ground states and multi-bump solutions of the logarithmic Schrodinger
equation -Lap u + V(x) u = Q(x) u log u^2 with 1-periodic coefficients."""

__version__ = "0.1.0"

from .coefficients import Coefficients, constant_descriptor, make_coefficients
from .energy import (
    DELTA_DEFAULT,
    DELTA_MAX,
    EnergyBreakdown,
    SplitParams,
    energy,
    f1_eval,
    f1_prime,
    f2_eval,
    f2_prime,
    gradient_field,
    logsob_slack,
    weighted_entropy,
    weighted_logsob_bound,
)
from .lattice import (
    Boundary,
    Field,
    Grid,
    field_from_function,
    gradient_sq_integral,
    h1_norm_sq,
    inner,
    integrate,
    l2_norm_sq,
    laplacian_apply,
    shift,
)
from .nehari import FiberReport, fiber_report, fiber_value, nehari_project, nehari_scale
from .plap import (
    PLapParams,
    plap_descend,
    plap_energy,
    plap_fiber_value,
    plap_gradient,
    plap_nehari_project,
    plap_nehari_residual,
    plap_nehari_scale,
)
from .solver import (
    GaussonParams,
    SolverConfig,
    SolverReport,
    descend,
    gausson,
    multistart,
    orbit_distance,
    sign_pattern,
)
