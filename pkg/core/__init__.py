"""Core package for Chen-series heat approximations and the local index density."""

from .checks import (
    chen_identity_check,
    convergence_order_check,
    grade_cancellation_check,
    local_index_check,
    moment_agreement_check,
    run_checks,
)
from .clifford import CliffordElement, cl_exp, cl_mul, commutator, d_map, supertrace
from .curvature_forms import (
    CurvatureTensor,
    FormElement,
    FormMatrix,
    a_genus_form,
    a_genus_top,
    curvature_form,
    make_curvature,
    parse_curvature_spec,
    wedge,
)
from .errors import ChenIndexError
from .index_density import dr_element, grade_cancellation_residual, mc_density, mc_form_density, verify_local_index
from .model import (
    ChenCoefficients,
    CheckResult,
    ConvergenceReport,
    DensityEstimate,
    IndexReport,
    MomentTable,
    RunConfig,
    SemigroupEstimate,
)
from .moments import (
    expected_word_sum,
    in_concat_set,
    moment_table,
    moment_words,
    monte_carlo_moments,
    stratonovich_moment,
)
from .semigroup_approx import (
    MatrixModel,
    approx_semigroup,
    conditional_semigroup,
    convergence_study,
    estimate_semigroup,
    exact_semigroup,
    kernel_diagonal,
    taylor_reference,
)
from .stochastic_paths import (
    PathBatch,
    PathSample,
    chen_identity_residual,
    chen_strichartz,
    iterated_integral,
    iterated_integral_arrays,
    levy_area,
    sample_bridge,
    sample_brownian,
    signature,
)
from .store import ResultStore
from .tensor_algebra import TensorSeries, commutator_expand, ts_exp, ts_log, ts_mul, word_degree

__all__ = [
    "chen_identity_check",
    "convergence_order_check",
    "grade_cancellation_check",
    "local_index_check",
    "moment_agreement_check",
    "run_checks",
    "CliffordElement",
    "cl_exp",
    "cl_mul",
    "commutator",
    "d_map",
    "supertrace",
    "CurvatureTensor",
    "FormElement",
    "FormMatrix",
    "a_genus_form",
    "a_genus_top",
    "curvature_form",
    "make_curvature",
    "parse_curvature_spec",
    "wedge",
    "ChenIndexError",
    "dr_element",
    "grade_cancellation_residual",
    "mc_density",
    "mc_form_density",
    "verify_local_index",
    "ChenCoefficients",
    "CheckResult",
    "ConvergenceReport",
    "DensityEstimate",
    "IndexReport",
    "MomentTable",
    "RunConfig",
    "SemigroupEstimate",
    "expected_word_sum",
    "in_concat_set",
    "moment_table",
    "moment_words",
    "monte_carlo_moments",
    "stratonovich_moment",
    "MatrixModel",
    "approx_semigroup",
    "conditional_semigroup",
    "convergence_study",
    "estimate_semigroup",
    "exact_semigroup",
    "kernel_diagonal",
    "taylor_reference",
    "PathBatch",
    "PathSample",
    "chen_identity_residual",
    "chen_strichartz",
    "iterated_integral",
    "iterated_integral_arrays",
    "levy_area",
    "sample_bridge",
    "sample_brownian",
    "signature",
    "ResultStore",
    "TensorSeries",
    "commutator_expand",
    "ts_exp",
    "ts_log",
    "ts_mul",
    "word_degree",
]
