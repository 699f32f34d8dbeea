"""Perturbed derivations on C^n and M_k, pushed back to exact ones.

The package builds approximate derivations on the modules C^n and M_k over
themselves, computes the stabilized limit by dyadic iteration, and certifies
it with residual and fixed-point checks.
"""

from .control import (
    DOUBLING,
    HALVING,
    AlphaNotAllowed,
    ControlFunction,
    PEqualsOne,
    PsiFunction,
    check_admissibility,
    conclusion_bound,
    gavruta_tilde,
    regime_constants,
)
from .cstar_core import (
    INFINITY,
    NotHermitian,
    StabilityError,
    adjoint,
    hermitian_eigenvalues,
    is_positive,
    operator_norm,
)
from .derivation_lab import (
    Derivation,
    MapUnderTest,
    Perturbation,
    defect_envelope,
    derivation_residual,
    non_adjointable_witness,
    random_skew,
)
from .fixed_point import SampleGrid, TabulatedMap, apply_J, contraction_check, gen_distance, orbit_distances
from .module_space import ModuleSpace, verify_axioms
from .stabilizer import (
    HypothesisViolated,
    NotConverged,
    StabilizedMap,
    rate_estimate,
    scalar_linearity_check,
    stabilize,
    three_unimodular,
    uniqueness_probe,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaNotAllowed",
    "ControlFunction",
    "DOUBLING",
    "Derivation",
    "HALVING",
    "HypothesisViolated",
    "INFINITY",
    "MapUnderTest",
    "ModuleSpace",
    "NotConverged",
    "NotHermitian",
    "PEqualsOne",
    "Perturbation",
    "PsiFunction",
    "SampleGrid",
    "StabilityError",
    "StabilizedMap",
    "TabulatedMap",
    "adjoint",
    "apply_J",
    "check_admissibility",
    "conclusion_bound",
    "contraction_check",
    "defect_envelope",
    "derivation_residual",
    "gavruta_tilde",
    "gen_distance",
    "hermitian_eigenvalues",
    "is_positive",
    "non_adjointable_witness",
    "operator_norm",
    "orbit_distances",
    "random_skew",
    "rate_estimate",
    "regime_constants",
    "scalar_linearity_check",
    "stabilize",
    "three_unimodular",
    "uniqueness_probe",
    "verify_axioms",
]
