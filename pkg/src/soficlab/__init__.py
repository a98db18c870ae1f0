"""Finite-scale machinery for sofic entropy: sofic maps, good models, separated
sets, approximate stabilizers and the randomized dominating-set lemma."""

from .errors import (
    ConfigError,
    EmptyRestriction,
    ExhaustedTries,
    HypothesisViolated,
    InconsistentHom,
    Infeasible,
    InsufficientWindow,
    LengthMismatch,
    PreconditionUnverified,
    SoficLabError,
    SupportTooSmall,
    TooLarge,
)
from .groups import (
    FiniteGroup,
    FreeGroup,
    Integers,
    Lattice,
    ball,
    group_from_spec,
    interval,
    inverse_set,
    power_set,
    product_set,
    symmetrize,
)
from .sofic import (
    ApproxQuality,
    RandomSoficModel,
    SoficMap,
    build_cyclic,
    build_quotient,
    build_torus,
    quality,
    regular_representation,
    sample_free,
)
from .shift import (
    Configuration,
    EmpiricalDistribution,
    ExplicitMarginal,
    Neighborhood,
    PeriodicMixture,
    PeriodicPoint,
    ProductMeasure,
    Proposal,
    StabBlock,
    WindowedPoint,
    empirical_distribution,
    is_good_model,
    measure_from_spec,
    pullback_name,
    sample_good_models,
    tv_distance,
)
from .metrics import (
    FinitePointSet,
    dinf,
    dV,
    exact_covering,
    exact_separated,
    greedy_separated,
    log_ball_volume,
    product_bound_check,
    sep_cov_sandwich,
)
from .graphs import (
    DirectedGraph,
    bernoulli_subset,
    domination,
    graph_from_sofic,
    hypothesis_check,
    lemma_montecarlo,
    lemma_trial,
    regularity,
)
from .stabilizers import (
    approx_stabilizer,
    conjugation_check,
    exact_stabilizer,
    good_vertices,
    neighborhood_constraints,
)
from .keylemma import StabExperimentConfig, build_gs, build_selector, claimA_check, claimD_check, run_stab_experiment, stab_label
from .planner import plan_parameters, separation_bound
from .entropy import NEG_INF, EntropyEstimate, equivariance_check, equivariance_violations, finite_scale_entropy, random_sofic_entropy

__version__ = "0.1.0"
