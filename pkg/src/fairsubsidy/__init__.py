"""Envy-free allocations of indivisible goods with bounded subsidies."""

from .core import (
    AdditiveValuation,
    Allocation,
    BudgetAdditiveValuation,
    Instance,
    InputError,
    InvalidInstanceError,
    PaymentVector,
    TableValuation,
    UnitDemandValuation,
    Violation,
    additive_instance,
    bundle_value,
    render_value,
    to_value,
    validate_instance,
)
from .matching import max_weight_matching
from .envy_graph import (
    CycleWitness,
    EnvyGraph,
    HeaviestPaths,
    NotEnvyFreeableError,
    build_envy_graph,
    find_positive_cycle,
    heaviest_paths,
    is_envy_freeable,
    minimal_payments,
    rematch_bundles,
    welfare_maximizing_permutation,
)
from .additive import (
    CertificationError,
    RoundTrace,
    build_modified_profile,
    certify_one_dollar,
    solve_additive,
)
from .monotone import envy_cycles_allocate, solve_monotone
from .verify import brute_force_min_subsidy, check_balanced, check_ef1, check_envy_free

__version__ = "0.1.0"
