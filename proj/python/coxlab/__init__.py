"""Modulated Cox/G/1 workload and supermodular-order tools."""

from ._coxlab import (
    CoxlabError,
    Ctmc,
    Deterministic,
    Erlang,
    Exponential,
    GridDistribution,
    Hyperexponential,
    check_ccp_structure,
    check_generator_monotonicity,
    check_stochastic_monotonicity,
    counterexample_search,
    finite_dimensional_law,
    is_reversible,
    load_chain,
    modulate,
    qbd_mean_workload,
    rolski_bounds,
    simulate_mean_workload,
    sm_check,
    sm_decrease_scan,
    stability_check,
    time_reverse,
    transition_probabilities,
    w_curve,
)

__version__ = "0.1.0"
