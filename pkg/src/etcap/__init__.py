"""Outage and ergodic transmission capacity of Poisson ad hoc networks with
finite-state Markov fading: closed-form bounds plus a Monte-Carlo engine."""

from .bounds import (
    BoundConstants,
    CaotDecision,
    EtcResult,
    GeometricView,
    NuCTable,
    OutageBounds,
    caot_beneficial,
    constants,
    etc_bounds,
    etc_bounds_caot,
    geometric_view,
    im_etc_bounds,
    im_outage_bounds,
    lambda_cap,
    lambda_eps_k,
    optimize_gamma,
    outage_bounds,
    outage_bounds_caot,
    scaling_lambda,
)
from .fsmc import (
    ChannelModel,
    empirical_occupancy,
    invariant_distribution,
    reversible_from_invariant,
    sample_stationary,
    simulate_trajectory,
    step,
    validate_model,
)
# the sir() function stays namespaced under etcap.sir to avoid shadowing the module
from .sir import (
    ImPolicy,
    SirSample,
    aggregate_interference,
    cancellation_set,
    delta_level_set,
    delta_radius,
    sir_with_im,
)
from .spatial import (
    MarkedPattern,
    NetworkParams,
    choose_window_radius,
    path_loss,
    sample_ppp,
    thin_by_state,
    truncation_tail_mean,
)

__version__ = "0.1.0"
