"""indexbench: index pairings on weighted-trace matrix algebras.

Finite direct sums of matrix factors with positive block weights carry a
trace tau whose projections can have fractional measure; this package builds
the bounded and unbounded module calculus over such algebras (heat-kernel
simplex brackets, JLO and Connes characters, K-theory Chern chains) and
cross-checks every index computation it implements against the others.
"""

__version__ = "0.1.0"

from .chains import Chain, Cochain, boundary_B, boundary_b, canonicalize, growth_report, pair
from .context import (
    Grading,
    Operator,
    SingularProfile,
    TraceContext,
    heat_trace,
    holder_check,
    p_norm,
    singular_profile,
    summability_report,
    trace,
)
from .errors import (
    CapError,
    ContextError,
    IndexbenchError,
    InvertibilityError,
    LevelError,
    ParameterError,
    RefinementError,
    ScenarioError,
    StructuralError,
    ValidationError,
)
from .fredholm import (
    BoundedModule,
    IndexReport,
    UnboundedModule,
    d_alpha,
    double,
    double_generator,
    ef_index_kernel,
    ef_index_parametrix,
    interpolation_bound_check,
    log_commutator_check,
    mckean_singer,
    pairing_even_bounded,
    pairing_odd_bounded,
    perturbation_bound_check,
    pseudo_parametrix,
    spectral_flow,
    to_bounded,
    validate,
)
from .heatbracket import HeatBracketRequest, PreparedBracket, heat_bracket, lemma_misc_check
from .characters import (
    QuadratureSpec,
    alpha_cochain,
    chern_minus,
    chern_plus,
    connes_cochain,
    connes_transgression_check,
    d_alpha_transgression_check,
    duhamel_check,
    getzler_bound,
    jlo_cochain,
    jlo_cocycle_check,
    jlo_transgression_check,
    jlo_v_cochain,
    jlo_vw_cochain,
    level2_aux_check,
    psi_cochain,
    reduction_check,
    retracted_jlo,
    scaling_limit_decay,
    theorem_transgression_check,
)
from .pairings import connes_pairing, jlo_pairing
from .scenarios import Scenario, load_scenario, run
from .verify import run_suite
