"""Measurement-after-interaction squeezing gains for distributed quantum sensors.

Closed-form covariance/commutator blocks for OAT spin states and TMSV light,
a measurement-optimized moment-matrix pipeline for the multiparameter
squeezing parameter xi^-2(n), an exact state-vector oracle, and a CLI for
reproducible sweeps.
"""

from .errors import (
    DegenerateScenarioError,
    DimensionCapError,
    EmptyRangeError,
    InvalidScenarioError,
    MaisenseError,
    SingularGammaError,
)
from .gaussian_cv import (
    CvStrategy,
    GaussianScenario,
    cv_matrices,
    cv_xi2_closed,
    cv_xi2_matrix,
    noise_ratio,
)
from .optimizer import (
    EstimationTarget,
    GeneratorSpec,
    ScalingResult,
    SqueezingOutcome,
    default_mai_range,
    moment_matrix,
    optimal_measurement,
    optimize_phi,
    optimize_scenario,
    scaling_sweep,
    squeezing_and_xi2,
)
from .oracle import (
    CollectiveState,
    coherent_x_state,
    evolve_oat,
    oracle_blocks,
    oracle_moment_data,
    oracle_xi2,
)
from .spin_moments import (
    BlockSet,
    MomentData,
    Prep,
    SpinScenario,
    Strategy,
    assemble_full,
    spin_blocks,
    spin_moment_data,
)
from .validation import run_validation

__version__ = "0.1.0"
