"""CHSH-based randomness certification under reduced measurement independence.

Trade-offs between the CHSH violation S, an adversary's guessing probability G
and the free-will parameter P (the maximal probability of any setting pair
given the adversary's side information), with explicit optimal no-signalling
models, biased-settings quantum bounds, verification oracles and a Monte
Carlo simulator with min-entropy accounting.
"""

from .bounds import (
    BiasedDistribution,
    DomainError,
    alpha_opt,
    g_bound_fac,
    g_bound_ns,
    min_entropy_bound,
    s_max_fac,
    s_max_ns,
    s_max_quantum,
    s_max_quantum_fac,
    s_q_max_dist,
)
from .core import (
    Box,
    HiddenVariableModel,
    ModelReport,
    SettingsDistribution,
    ValidationError,
    chsh_of_box,
    free_will_parameter,
    guessing_probability,
    is_factorizable,
    model_from_json,
    model_to_json,
    observed_S,
    validate,
)
from .optimal_models import (
    build_fac_model_high_P,
    build_fac_model_low_P,
    build_general_model,
    build_high_P_model,
)
from .oracle import lp_deterministic_max_S, maximize_S_fac, maximize_S_ns
from .quantum import (
    Observable,
    QuantumStrategy,
    TwoQubitState,
    evaluate_strategy,
    optimal_settings,
    optimize_strategy_numeric,
    strategy_guessing_probability,
)
from .simulate import (
    SimulationReport,
    TrialCounts,
    certify,
    estimate_S,
    eve_guess_accuracy,
    run_trials,
)

__version__ = "0.1.0"
