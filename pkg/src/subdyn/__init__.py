"""Single-subdynamics kinetics of a two-level atom coupled to a scalar field.

The public entry points are re-exported here; see the submodules for details.
"""

from .errors import (ConfigError, ConsistencyError, ContractViolation, ConvergenceError,
                     NearPoleError, ResourceError, SingularError, SubdynError)
from .model import FormFactor, ModelSpec, OracleSpec, load_config, spec_from_dict
from .greens import find_pole, golden_rule_width, liouville_poles
from .subdyn import Kinetics, SectorBlock
from .dressing import build_chi_diag, build_chi_dipolar, build_X_and_phi_vertex
from .oracle import Oracle

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConsistencyError", "ContractViolation", "ConvergenceError", "NearPoleError",
    "ResourceError", "SingularError", "SubdynError", "FormFactor", "ModelSpec", "OracleSpec",
    "load_config", "spec_from_dict", "find_pole", "golden_rule_width", "liouville_poles",
    "Kinetics", "SectorBlock", "build_chi_diag", "build_chi_dipolar", "build_X_and_phi_vertex",
    "Oracle", "__version__",
]
