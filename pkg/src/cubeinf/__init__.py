"""Analysis of Boolean functions on the infinite Hamming cube.

Exact spectral and influence computation for finitely supported
restrictions, Monte Carlo estimation for functions given by query
algorithms, auditors for the classical inequalities (Poincaré, KKL,
hypercontractivity, revealment), and a discrete-time edge-ordered voter
model with its coalescing-walk dual.
"""

from .bitstream import FlipView, LazyInput, NoiseCoupling, couple, derive_seed, flip
from .funcmodel import (
    DEFAULT_BUDGET,
    EvaluationOutcome,
    QueryFunction,
    TruthTableFunction,
    WitnessRecord,
    boolean_approx,
    eval_query,
    eval_table,
    knowability_moment,
    minimal_witness,
    sequential_querier,
)
from .influence import (
    InfluenceProfile,
    discrete_derivative,
    h_combinatorial,
    influence_mc,
    influences_exact,
    influences_fourier,
    pivotal_set,
)
from .inequalities import (
    AuditReport,
    KKL_CONSTANT,
    exact_audit_suite,
    finitary_kkl_check,
    kk_diagnostic,
    kkl_check,
    low_level_energy_diagnostic,
    maxinf_lemma_check,
    poincare_check,
)
from .revealment import (
    RevealmentEstimate,
    estimate_revealment,
    lift_algorithm,
    random_order_algorithm,
    revealment_inequality_audit,
    truncate_algorithm,
)
from .spectral import (
    Spectrum,
    apply_noise,
    energy_profile,
    noise_correlation,
    noise_correlation_mc,
    project_prefix,
    tail_energy,
    transform,
    xi,
)
from .voter import (
    OrderedDigraph,
    backward_cycle_matrix,
    directed_cycle,
    initial_state_stability_check,
    revealment_bound_audit,
    rho_algorithm,
    rho_indicator,
    sensitivity_sweep,
    simulate_forward,
    stationary,
    zeta,
)
from . import zoo

__version__ = "0.1.0"
