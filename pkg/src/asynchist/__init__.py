"""Asynchronous deterministic automata whose histories do not depend on update order."""

from .commutativity import (
    ViolationWitness,
    check_local_commutativity_1d,
    check_monotonicity,
    check_pair,
    check_pairwise_network,
    witness_to_schedules,
)
from .core import (
    Background,
    BoundaryMode,
    Configuration,
    Cyclic,
    FreeHalfLine,
    MarchingState,
    NetworkAutomaton,
    RuleTable1D,
    StateSpace,
    eval_local,
    identity_rule,
    max_rule,
    network_from_rule,
    random_rule,
    shift_rule,
    validate,
    xor_rule,
)
from .gadgets import build_gprime, build_undec_rule, divergence_demo, standard_base
from .history import (
    SiteHistory,
    check_domination,
    compare_histories,
    extract_history,
    invariant_history_test,
    zeta_from_synchronous,
)
from .marching import (
    MarchingRule,
    amod,
    lift_config,
    marching_transform,
    project_cur,
    reconstruct_1d,
    verify_reconstruction,
)
from .trajectory import (
    Bernoulli,
    Explicit,
    RoundRobin,
    Synchronous,
    Trajectory,
    apply,
    effective_age,
    free_sites,
    simulate,
)

__version__ = "0.1.0"
