"""divsum: summing matrix series, including ones divergent in the conventional sense.

The package combines eight regular summation methods (Norlund means, Cesaro,
Euler transforms; Abelian means, Abel, Lambert, weak/strong Borel,
Mittag-Leffler) with floating-point summation kernels whose error budgets are
known a priori, and with Pade / Schur-Parlett evaluators for power series.
"""

from .errors import (
    DegeneratePadeError,
    DivergentIntegralError,
    DivsumError,
    InvalidInputError,
    InvalidWeightsError,
    NotSummableError,
    NumericalFailureError,
    PoleError,
    SchemaError,
    SieveRangeError,
    SingularOracleError,
    SingularSylvesterError,
)
from .linalg import (
    UNIT_ROUNDOFF,
    as_cmatrix,
    dirichlet_pow,
    hadamard_closed_form,
    is_positive_definite,
    jordan_block,
    jordan_function_oracle,
    loewner_less,
    mat_exp,
    mat_pow_nat,
    mat_sin,
    neumann_closed_form,
    spectral_norm,
)
from .schur import SchurForm, reorder_schur, schur, sylvester_solve
from .series import (
    MatrixSeries,
    PartialSums,
    coeff_power_terms,
    dirichlet_mobius_terms,
    hadamard_power_terms,
    memoized,
    mobius,
    neumann_terms,
    partial_sums,
    scalar_series,
    square_wave_fourier_terms,
    sum_terms,
    tail_series,
)
from .floatsum import (
    ErrorBudget,
    TermStream,
    block_sum,
    compensated_sum,
    error_budget,
    horner_matrix_poly,
    mixed_block_sum,
    parse_kernel,
    recursive_sum,
)
from .sequential import (
    NorlundWeights,
    RegularityDiagnostics,
    SeqWeights,
    SumReport,
    cesaro_sum,
    cesaro_weights,
    check_regularity_conditions,
    euler_sum,
    euler_transform_term,
    norlund_condition_check,
    norlund_transform,
)
from .functional import (
    AbelianWeights,
    LimitSchedule,
    QuadratureSpec,
    abel_eval,
    abelian_means_eval,
    approach_infinity,
    approach_one,
    approach_zero,
    lambert_eval,
    log_gamma,
    mittag_leffler_sum,
    strong_borel_sum,
    take_limit,
    weak_borel_eval,
)
from .matfunc import (
    BlockPattern,
    PadeApproximant,
    ScalarSeqWeights,
    eigen_cluster,
    pade_approximant,
    pade_with_summation,
    schur_parlett_with_summation,
    sequential_poly_sum,
    transformed_coeffs,
    weighted_power_sum,
    weights_b,
)
from .experiments import ExperimentSpec, gen_bidiagonal, gen_with_spectrum, run_experiment

__version__ = "0.1.0"
