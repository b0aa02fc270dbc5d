"""Python library for Levy processes on the truncated dual of a nuclear space."""

from __future__ import annotations

__version__ = '0.1.0'

from .char_func import (  # noqa: E402
    CharTriplet,
    CovarianceForm,
    cf_compensated,
    cf_levy,
    cf_poisson_integral,
    cf_poisson_measure,
    cf_wiener,
    covariance,
    decomposition_factors,
    hilbert_second_moment,
    lk_exponent,
    moments_poisson_integral,
    nth_root_triplet,
    second_moment_small_jumps,
    small_ball_seminorm_sq,
)
from .coordinator import ReplicaCoordinator  # noqa: E402
from .exceptions import (  # noqa: E402
    ConfigError,
    DimensionError,
    DomainError,
    EmptyRegionError,
    InfiniteMassError,
    InvalidMeasureError,
    InvalidParameterError,
    LevyException,
    MatrixError,
    NonIntegrableError,
    OrderingError,
)
from .levy_measure import (  # noqa: E402
    Atom,
    AtomicAxis,
    LevyMeasureSpec,
    PowerLawAxis,
    Region,
    complement_mass,
    first_moment,
    integrability_functional,
    region_mass,
    sample_jump,
    sample_jumps,
    second_moment,
    shell_decomposition,
    validate,
)
from .models import RunConfig, get_reference_config, load_run_config  # noqa: E402
from .sequence_space import (  # noqa: E402
    DualPoint,
    SeminormIndex,
    TestFunction,
    dual_maximizer,
    dual_norm,
    hs_norm_sq,
    op_norm,
    pairing,
    seminorm,
)
from .simulate import (  # noqa: E402
    PathSkeleton,
    SimConfig,
    assemble_levy,
    count_jumps,
    evaluate_component,
    evaluate_path,
    sample_large_jumps,
    sample_small_jumps,
    sample_wiener,
)
from .state import SimulationSummary, TestReport, ValidationReport  # noqa: E402
from .verify import (  # noqa: E402
    ecf_test,
    fernique_check,
    independence_test,
    infdiv_test,
    jump_count_test,
    minlos_check,
    moment_tests,
    poisson_domination_check,
    run_suite,
    semigroup_test,
    small_ball_bound_check,
)

__all__ = [
    'Atom',
    'AtomicAxis',
    'CharTriplet',
    'ConfigError',
    'CovarianceForm',
    'DimensionError',
    'DomainError',
    'DualPoint',
    'EmptyRegionError',
    'InfiniteMassError',
    'InvalidMeasureError',
    'InvalidParameterError',
    'LevyException',
    'LevyMeasureSpec',
    'MatrixError',
    'NonIntegrableError',
    'OrderingError',
    'PathSkeleton',
    'PowerLawAxis',
    'Region',
    'ReplicaCoordinator',
    'RunConfig',
    'SeminormIndex',
    'SimConfig',
    'SimulationSummary',
    'TestFunction',
    'TestReport',
    'ValidationReport',
    'assemble_levy',
    'cf_compensated',
    'cf_levy',
    'cf_poisson_integral',
    'cf_poisson_measure',
    'cf_wiener',
    'complement_mass',
    'count_jumps',
    'covariance',
    'decomposition_factors',
    'dual_maximizer',
    'dual_norm',
    'ecf_test',
    'evaluate_component',
    'evaluate_path',
    'fernique_check',
    'first_moment',
    'get_reference_config',
    'hilbert_second_moment',
    'hs_norm_sq',
    'independence_test',
    'infdiv_test',
    'integrability_functional',
    'jump_count_test',
    'lk_exponent',
    'load_run_config',
    'minlos_check',
    'moment_tests',
    'moments_poisson_integral',
    'nth_root_triplet',
    'op_norm',
    'pairing',
    'poisson_domination_check',
    'region_mass',
    'run_suite',
    'sample_jump',
    'sample_jumps',
    'sample_large_jumps',
    'sample_small_jumps',
    'sample_wiener',
    'second_moment',
    'second_moment_small_jumps',
    'seminorm',
    'semigroup_test',
    'shell_decomposition',
    'small_ball_bound_check',
    'small_ball_seminorm_sq',
    'validate',
]
