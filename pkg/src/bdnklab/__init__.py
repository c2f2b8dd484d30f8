"""bdnklab: a numerical laboratory for first-order causal relativistic
viscous hydrodynamics of a barotropic fluid.

Modules:

* ``eos``        -- equations of state and transport-coefficient models
* ``kinematics`` -- Minkowski tensor algebra and the constitutive map
* ``symbol``     -- characteristic analysis: determinants, causality, spectra
* ``evolve``     -- periodic-torus method-of-lines evolution with monitors
* ``cli``        -- batch subcommands driven by a YAML config
"""

from .eos import (
    CoefficientSample,
    TransportModel,
    constant_transport_model,
    evaluate,
    power_law_transport_model,
    tabulated_transport_model,
)
from .errors import BdnkError
from .evolve import Fields, Grid, initial_fields, rk4_step
from .kinematics import (
    METRIC,
    FluidPointState,
    normalize_velocity,
    stress_energy,
    stress_energy_upper,
)
from .symbol import (
    betas,
    causality_report,
    characteristic_speeds,
    det_factorization_check,
    eigenstructure,
    second_order_det_check,
)

__version__ = "0.1.0"

__all__ = [
    "BdnkError",
    "CoefficientSample",
    "TransportModel",
    "constant_transport_model",
    "power_law_transport_model",
    "tabulated_transport_model",
    "evaluate",
    "METRIC",
    "FluidPointState",
    "normalize_velocity",
    "stress_energy",
    "stress_energy_upper",
    "betas",
    "causality_report",
    "characteristic_speeds",
    "det_factorization_check",
    "second_order_det_check",
    "eigenstructure",
    "Grid",
    "Fields",
    "initial_fields",
    "rk4_step",
    "__version__",
]
