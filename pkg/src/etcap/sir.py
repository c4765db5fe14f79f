"""Interference, SIR, outage events, delta-level interfering coverage and
interference-management mechanics.

Suppression is applied as a per-realization power scaling by gamma_k (exact
per realization); the equivalent thinned-intensity view gamma^(2/alpha)*lam
is used only by the closed-form bounds. Cancellation is single-pass: the
decode test uses the full suppressed aggregate (candidate included), then all
passing interferers are removed at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, PolicyDisabled
from .fsmc import ChannelModel
from .spatial import MarkedPattern, NetworkParams, path_loss


@dataclass(frozen=True)
class SirSample:
    """One SIR evaluation at the typical receiver."""

    desired_gain: float  # s_k * d^-alpha
    interference: float  # effective aggregate in the SIR denominator
    sir: float  # +inf when interference == 0
    outage: bool  # sir < beta


@dataclass(frozen=True)
class ImPolicy:
    """Per-state interference management: reduction factors and cancellation."""

    gammas: tuple  # reduction factor per state, in (0, 1]
    cancellation_enabled: bool = False
    gamma_mins: tuple | None = None  # lower bounds, same length
    nu_c: tuple | None = None  # mean cancellation-coverage area per state

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=float)
        if np.any(g <= 0) or np.any(g > 1):
            raise ConfigError("im.gamma: every gamma_k must be in (0, 1]")
        if self.gamma_mins is not None:
            gm = np.asarray(self.gamma_mins, dtype=float)
            if gm.shape != g.shape or np.any(gm <= 0) or np.any(gm > g):
                raise ConfigError("im.gamma_min: need 0 < gamma_min_k <= gamma_k")
        if self.nu_c is not None:
            nc = np.asarray(self.nu_c, dtype=float)
            if nc.shape != g.shape or np.any(nc < 0):
                raise ConfigError("im.nu_c: need nu_c_k >= 0 per state")

    @classmethod
    def no_op(cls, m: int) -> "ImPolicy":
        return cls(gammas=(1.0,) * m, cancellation_enabled=False)


def aggregate_interference(
    pattern: MarkedPattern, model: ChannelModel, alpha: float, min_distance: float = 1.0
) -> float:
    """Shot-noise aggregate: sum of s_mark * pathloss(|X|) over the pattern."""
    if len(pattern) == 0:
        return 0.0
    gains = model.states[pattern.marks]
    return float(np.sum(gains * path_loss(pattern.radii, alpha, min_distance)))


def sir(s_k: float, params: NetworkParams, interference: float) -> SirSample:
    """SIR of the typical link with desired-channel gain s_k.

    Zero interference gives +inf (interference-limited network: never outage).
    """
    desired = s_k * params.signal
    ratio = np.inf if interference == 0.0 else desired / interference
    return SirSample(
        desired_gain=desired,
        interference=interference,
        sir=ratio,
        outage=bool(ratio < params.beta),
    )


def delta_radius(s_k: float, interferer_gain: float, params: NetworkParams) -> float:
    """Outer radius of the delta-level interfering coverage for an interferer
    with gain h: r* = d * (delta*beta*h/s_k)^(1/alpha)."""
    return float(
        params.d * (params.delta * params.beta * interferer_gain / s_k) ** (1.0 / params.alpha)
    )


def delta_level_set(
    pattern: MarkedPattern, s_k: float, model: ChannelModel, params: NetworkParams
) -> MarkedPattern:
    """Members of the delta-level interfering point process.

    A point with gain h is a member iff 1 <= |X| < r*(h); below distance 1 the
    path loss is zero, so membership there is vacuous.
    """
    if len(pattern) == 0:
        return pattern
    r = pattern.radii
    rstar = params.d * (
        params.delta * params.beta * model.states[pattern.marks] / s_k
    ) ** (1.0 / params.alpha)
    keep = (r >= 1.0) & (r < rstar)
    return MarkedPattern(
        xy=pattern.xy[keep],
        marks=pattern.marks[keep],
        window_radius=pattern.window_radius,
        intensity_used=pattern.intensity_used,
    )


def cancellation_mask(
    pattern: MarkedPattern,
    s_k: float,
    gamma_k: float,
    model: ChannelModel,
    params: NetworkParams,
) -> np.ndarray:
    """Boolean mask of decodable (hence cancelable) interferers.

    Decode test: gamma*h*|X|^-alpha against beta/(beta+1) times the desired
    power plus the suppressed aggregate (candidate included). The decode power
    carries no unit-distance cutoff; points inside it contribute nothing to the
    aggregate anyway.
    """
    if len(pattern) == 0:
        return np.zeros(0, dtype=bool)
    r = pattern.radii
    gains = model.states[pattern.marks]
    decode_power = gamma_k * gains * r**-params.alpha
    i0 = float(np.sum(gains * path_loss(r, params.alpha)))
    threshold = params.beta / (params.beta + 1.0) * (s_k * params.signal + gamma_k * i0)
    return decode_power >= threshold


def cancellation_set(
    pattern: MarkedPattern,
    s_k: float,
    k: int,
    policy: ImPolicy,
    model: ChannelModel,
    params: NetworkParams,
) -> MarkedPattern:
    """Sub-pattern inside the cancellation coverage for state index k."""
    if not policy.cancellation_enabled:
        raise PolicyDisabled("cancellation_set called with cancellation disabled")
    keep = cancellation_mask(pattern, s_k, policy.gammas[k], model, params)
    return MarkedPattern(
        xy=pattern.xy[keep],
        marks=pattern.marks[keep],
        window_radius=pattern.window_radius,
        intensity_used=pattern.intensity_used,
    )


def sir_with_im(
    pattern: MarkedPattern,
    k: int,
    policy: ImPolicy,
    model: ChannelModel,
    params: NetworkParams,
) -> SirSample:
    """SIR after suppression by gamma_k and removal of the cancelable set.

    With cancellation disabled the denominator is gamma_k times the full
    aggregate, so gamma_k = 1 reduces to the plain SIR.
    """
    s_k = float(model.states[k])
    gamma_k = float(policy.gammas[k])
    if len(pattern) == 0:
        return sir(s_k, params, 0.0)
    gains = model.states[pattern.marks]
    contrib = gains * path_loss(pattern.radii, params.alpha)
    if policy.cancellation_enabled:
        keep = ~cancellation_mask(pattern, s_k, gamma_k, model, params)
        residual = float(np.sum(contrib[keep]))
    else:
        residual = float(np.sum(contrib))
    return sir(s_k, params, gamma_k * residual)
