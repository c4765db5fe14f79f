"""Closed-form layer: outage-probability bounds, ETC bounds with and without
opportunistic transmission and interference management, scaling laws, the
vector geometry of the capacity expression, and the reduction-factor
optimization.

Everything here is deterministic; Monte-Carlo inputs (nu_c tables) arrive as
plain data. All infima are solved by bisection to relative tolerance 1e-9 on
boundary functions that are monotone inside the bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadThreshold,
    ConfigError,
    DegenerateGeometry,
    MissingNuC,
    NonMonotoneTable,
    SingularDenominator,
)
from .fsmc import ChannelModel
from .sir import ImPolicy
from .spatial import NetworkParams

BISECT_RTOL = 1e-9
SINGULARITY_RTOL = 1e-12


@dataclass(frozen=True)
class BoundConstants:
    """Interference-coverage constants of the outage bounds.

    nu: mean area of the delta-level coverage at unit desired gain;
    eta / sigma2: mean and variance coefficients of the interference from
    outside that coverage at unit intensity and unit desired gain.
    """

    nu: float
    eta: float
    sigma2: float


@dataclass(frozen=True)
class OutageBounds:
    lower: float
    upper: float
    clamped_lower: bool = False
    clamped_upper: bool = False
    past_singularity: bool = False

    @property
    def gap(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class LambdaEps:
    """Per-state maximum contention intensity (infimum of the feasibility set)."""

    value: float
    empty: bool = False


@dataclass(frozen=True)
class EtcResult:
    """Bounds on the maximum contention intensity and the resulting ETC.

    lambda_* bound the nominal intensity; etc_* = b * (1 - eps) *
    active_fraction * lambda_*, i.e. the realized area throughput (the active
    fraction is 1 without opportunistic transmission). lambda_upper is None
    when only the lower bound exists.
    """

    lambda_lower: float
    lambda_upper: float | None
    etc_lower: float
    etc_upper: float | None
    per_state_lambda_eps: tuple
    active_fraction: float = 1.0
    upper_available: bool = True
    lambda_upper_proof_variant: float | None = None
    case: str = "plain"


@dataclass(frozen=True)
class GeometricView:
    """Inner-product form of the capacity scaling for a given channel."""

    s_eps: np.ndarray
    phi: np.ndarray
    inner: float
    theta: float
    phi_star: np.ndarray
    phi_star_inner: float


@dataclass(frozen=True)
class CaotDecision:
    beneficial: bool
    threshold: float
    phi_g: float
    gain: float
    loss: float


@dataclass(frozen=True)
class NuCTable:
    """Tabulated mean cancellation-coverage area per state over a gamma grid."""

    gammas: np.ndarray  # (G,) increasing grid
    raw: np.ndarray  # (m, G) Monte-Carlo estimates
    stderr: np.ndarray  # (m, G)
    smoothed: np.ndarray  # (m, G) nonincreasing isotonic projection

    def value(self, k: int, gamma: float) -> float:
        return float(np.interp(gamma, self.gammas, self.smoothed[k]))


@dataclass(frozen=True)
class GammaOptimum:
    gamma_star: np.ndarray
    objective: float
    grid: np.ndarray
    objective_per_state: np.ndarray  # (m, G) per-state objective terms on the grid


def constants(params: NetworkParams, model: ChannelModel) -> BoundConstants:
    """Coverage constants nu, eta, sigma2 for the outage bounds."""
    a = params.alpha
    db = params.delta * params.beta
    phi, s = model.invariant, model.states
    nu = math.pi * params.d**2 * float(phi @ (db * s) ** (2.0 / a))
    eta = 2.0 * nu / ((a - 2.0) * params.d**a * db)
    sigma2 = (
        math.pi
        * params.d ** (2.0 - 2.0 * a)
        / (a - 1.0)
        * db ** (1.0 / a - 1.0)
        * float(phi @ s ** (1.0 / a + 1.0))
    )
    return BoundConstants(nu=nu, eta=eta, sigma2=sigma2)


def _lambda_cap_parts(s_k: float, params: NetworkParams, c: BoundConstants):
    """(a, b, cnum) with Lambda_k(lam) = cnum*lam / (a - b*lam)^2."""
    a = params.alpha
    pole_num = s_k ** (2.0 / a - 1.0) / (params.d**a * params.delta * params.beta)
    return pole_num, c.eta, s_k ** (3.0 / a - 1.0) * c.sigma2


def lambda_singularity(k: int, params: NetworkParams, model: ChannelModel,
                       c: BoundConstants | None = None) -> float:
    """Intensity at which the Chebyshev denominator vanishes."""
    c = c or constants(params, model)
    a, b, _ = _lambda_cap_parts(float(model.states[k]), params, c)
    return a / b


def lambda_cap(lam: float, k: int, params: NetworkParams, model: ChannelModel,
               c: BoundConstants | None = None) -> float:
    """Chebyshev term Lambda_k(lam) of the outage upper bound."""
    if lam < 0:
        raise ConfigError("lam must be >= 0")
    c = c or constants(params, model)
    a, b, cnum = _lambda_cap_parts(float(model.states[k]), params, c)
    denom = a - b * lam
    if abs(denom) <= SINGULARITY_RTOL * a:
        raise SingularDenominator(
            f"Lambda_{k} evaluated at its pole lam={a / b:.6g}"
        )
    return cnum * lam / denom**2


def outage_bounds(lam: float, k: int, params: NetworkParams, model: ChannelModel,
                  c: BoundConstants | None = None) -> OutageBounds:
    """Per-state outage probability bounds.

    Past the Chebyshev pole (lam >= lambda_singularity) the upper bound is
    reported as 1 with past_singularity set, since the concentration argument
    is vacuous there. Probability clamps to [0, 1] set the clamped flags.
    """
    c = c or constants(params, model)
    s_k = float(model.states[k])
    expo = lam * (c.nu * s_k ** (-2.0 / params.alpha) - math.pi)
    lower_raw = 1.0 - math.exp(-expo)
    clamped_lower = lower_raw < 0.0
    lower = min(max(lower_raw, 0.0), 1.0)

    a, b, _ = _lambda_cap_parts(s_k, params, c)
    past = lam >= (a / b) * (1.0 - SINGULARITY_RTOL)
    if past:
        return OutageBounds(lower=lower, upper=1.0, clamped_lower=clamped_lower,
                            past_singularity=True)
    cap = lambda_cap(lam, k, params, model, c)
    upper_raw = 1.0 - max(1.0 - cap, 0.0) * math.exp(-expo)
    clamped_upper = upper_raw < 0.0 or upper_raw > 1.0
    upper = min(max(upper_raw, 0.0), 1.0)
    upper = max(upper, lower)
    return OutageBounds(lower=lower, upper=upper, clamped_lower=clamped_lower,
                        clamped_upper=clamped_upper)


def _check_threshold(g: int, m: int) -> None:
    if not 0 <= g < m:
        raise BadThreshold(f"good-state threshold {g} outside [0, {m})")


def caot_interferer_model(g: int, model: ChannelModel, conditioned: bool = True) -> ChannelModel:
    """Channel model describing the interferer marks under opportunistic
    transmission: states >= g with the renormalized invariant.

    conditioned=False keeps the full-mark model, which is the literal
    replace-lambda-only reading; the conditioned variant is the default
    because the active point process carries good-state marks only.
    """
    _check_threshold(g, model.m)
    return model.conditioned(g) if conditioned else model


def outage_bounds_caot(lam: float, k: int, g: int, params: NetworkParams,
                       model: ChannelModel, conditioned: bool = True) -> OutageBounds:
    """Outage bounds when only states >= g transmit: the bound formulas at
    active intensity lam * phi_g with interferer-mark constants per
    `caot_interferer_model`."""
    _check_threshold(g, model.m)
    lam_g = lam * model.good_fraction(g)
    imodel = caot_interferer_model(g, model, conditioned)
    c = constants(params, imodel)
    return outage_bounds(lam_g, k, params, model, c)


def lambda_eps_k(epsilon: float, k: int, params: NetworkParams, model: ChannelModel,
                 c: BoundConstants | None = None, rhs: float | None = None) -> LambdaEps:
    """Infimum of {lam > 0 : ln[(1-Lambda_k)^+ / (1-eps)] / lam <= rhs}.

    rhs defaults to nu*s_k^(-2/alpha) - pi. The boundary function is strictly
    decreasing up to the intensity where Lambda_k reaches eps, which brackets
    the crossing; bisection then converges unconditionally.
    """
    if not 0 < epsilon < 1:
        raise ConfigError("epsilon must be in (0, 1)")
    c = c or constants(params, model)
    s_k = float(model.states[k])
    if rhs is None:
        rhs = c.nu * s_k ** (-2.0 / params.alpha) - math.pi
    if rhs <= 0:
        return LambdaEps(value=0.0, empty=True)

    a, b, cnum = _lambda_cap_parts(s_k, params, c)
    # smaller root of Lambda_k(lam) = eps; the condition holds there exactly
    qa = epsilon * b**2
    qb = 2.0 * a * b * epsilon + cnum
    qc = epsilon * a**2
    disc = qb**2 - 4.0 * qa * qc
    hi = (qb - math.sqrt(disc)) / (2.0 * qa)

    log1meps = math.log1p(-epsilon)

    def f(lam: float) -> float:
        cap = cnum * lam / (a - b * lam) ** 2
        if cap >= 1.0:
            return -math.inf
        return (math.log1p(-cap) - log1meps) / lam - rhs

    if f(hi) > 0:
        return LambdaEps(value=0.0, empty=True)
    lo = hi * 1e-12
    while f(lo) <= 0:
        lo *= 1e-3
        if lo < 1e-300:
            return LambdaEps(value=lo, empty=False)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= BISECT_RTOL * hi:
            break
    return LambdaEps(value=hi, empty=False)


def _check_geometry(params: NetworkParams, model: ChannelModel, nu: float,
                    ks=None) -> None:
    s = model.states if ks is None else model.states[list(ks)]
    bad = nu - math.pi * s ** (2.0 / params.alpha)
    if np.any(bad <= 0):
        raise DegenerateGeometry(
            "nu <= pi*s_k^(2/alpha) for some state; increase d or delta"
        )


def etc_bounds(epsilon: float, params: NetworkParams, model: ChannelModel) -> EtcResult:
    """Bounds on the maximum contention intensity and the resulting ETC.

    The upper bound carries a single s_k^(2/alpha) weight per state; the
    alternative reading with the factor squared is exposed as
    lambda_upper_proof_variant.
    """
    c = constants(params, model)
    _check_geometry(params, model, c.nu)
    a = params.alpha
    phi, s = model.invariant, model.states
    w = s ** (2.0 / a)
    denom = c.nu - w * math.pi

    eps_k = tuple(lambda_eps_k(epsilon, k, params, model, c) for k in range(model.m))
    lam_lower = float(np.sum(w * phi * np.array([e.value for e in eps_k])))
    neg_log = -math.log1p(-epsilon)
    lam_upper = neg_log * float(np.sum(w * phi / denom))
    lam_upper_proof = neg_log * float(np.sum(w**2 * phi / denom))
    scale = params.b * (1.0 - epsilon)
    return EtcResult(
        lambda_lower=lam_lower,
        lambda_upper=lam_upper,
        etc_lower=scale * lam_lower,
        etc_upper=scale * lam_upper,
        per_state_lambda_eps=eps_k,
        lambda_upper_proof_variant=lam_upper_proof,
    )


def etc_bounds_caot(epsilon: float, g: int, params: NetworkParams, model: ChannelModel,
                    conditioned: bool = True) -> EtcResult:
    """ETC bounds under opportunistic transmission above threshold g.

    lambda_* bound the nominal node intensity (the 1/phi_g convention);
    etc_* scale by the active fraction phi_g, i.e. they bound the realized
    area throughput b * phi_g * lambda * (1 - eps).
    """
    _check_threshold(g, model.m)
    phi_g = model.good_fraction(g)
    imodel = caot_interferer_model(g, model, conditioned)
    c = constants(params, imodel)
    _check_geometry(params, model, c.nu, ks=range(g, model.m))
    a = params.alpha
    phi, s = model.invariant, model.states

    eps_k = tuple(lambda_eps_k(epsilon, k, params, model, c) for k in range(g, model.m))
    w = s[g:] ** (2.0 / a)
    denom = c.nu - w * math.pi
    lam_lower = float(np.sum(w * phi[g:] * np.array([e.value for e in eps_k]))) / phi_g
    neg_log = -math.log1p(-epsilon)
    lam_upper = neg_log * float(np.sum(w * phi[g:] / denom)) / phi_g
    lam_upper_proof = neg_log * float(np.sum(w**2 * phi[g:] / denom)) / phi_g
    scale = params.b * (1.0 - epsilon) * phi_g
    return EtcResult(
        lambda_lower=lam_lower,
        lambda_upper=lam_upper,
        etc_lower=scale * lam_lower,
        etc_upper=scale * lam_upper,
        per_state_lambda_eps=eps_k,
        active_fraction=phi_g,
        lambda_upper_proof_variant=lam_upper_proof,
        case="caot",
    )


@dataclass(frozen=True)
class ScalingLaw:
    value: float
    dense_limit: float  # nu -> infinity limit, fading-independent


def scaling_lambda(epsilon: float, params: NetworkParams, model: ChannelModel) -> ScalingLaw:
    """Small-eps scaling of the maximum contention intensity (linear in eps;
    quantitatively meaningful for eps <= 0.05)."""
    c = constants(params, model)
    _check_geometry(params, model, c.nu)
    a = params.alpha
    w = model.states ** (2.0 / a)
    value = epsilon / c.nu * float(np.sum(model.invariant * w / (1.0 - math.pi * w / c.nu)))
    dense = epsilon / (
        math.pi * params.d**2 * (params.delta * params.beta) ** (2.0 / a)
    )
    return ScalingLaw(value=value, dense_limit=dense)


def geometric_view(epsilon: float, params: NetworkParams, model: ChannelModel) -> GeometricView:
    """Inner-product decomposition of the capacity scaling.

    phi_star is the invariant vector aligned with s_eps; it maximizes the
    alignment cos(theta) over the probability simplex (the inner product at
    fixed magnitude), not the raw inner product, whose simplex maximum sits at
    a vertex.
    """
    c = constants(params, model)
    _check_geometry(params, model, c.nu)
    w = model.states ** (2.0 / params.alpha)
    s_eps = epsilon * w / (c.nu - math.pi * w)
    phi = model.invariant
    inner = float(phi @ s_eps)
    theta = math.acos(
        min(1.0, max(-1.0, inner / (np.linalg.norm(phi) * np.linalg.norm(s_eps))))
    )
    phi_star = s_eps / s_eps.sum()
    return GeometricView(
        s_eps=s_eps,
        phi=phi.copy(),
        inner=inner,
        theta=theta,
        phi_star=phi_star,
        phi_star_inner=float(s_eps @ s_eps) / float(s_eps.sum()),
    )


def caot_beneficial(g: int, epsilon: float, params: NetworkParams, model: ChannelModel,
                    conditioned: bool = True) -> CaotDecision:
    """Whether opportunistic transmission above g raises the nominal-intensity
    upper bound: the good-state gain against the bad-state loss, and the
    equivalent threshold on phi_g."""
    if not 1 <= g < model.m:
        raise BadThreshold(f"threshold {g} outside [1, {model.m})")
    c_all = constants(params, model)
    _check_geometry(params, model, c_all.nu)
    imodel = caot_interferer_model(g, model, conditioned)
    c_g = constants(params, imodel)
    _check_geometry(params, model, c_g.nu, ks=range(g, model.m))
    a = params.alpha
    phi, s = model.invariant, model.states
    w = s ** (2.0 / a)
    t_all = w * phi / (c_all.nu - math.pi * w)
    t_good = w[g:] * phi[g:] / (c_g.nu - math.pi * w[g:])
    phi_g = model.good_fraction(g)
    gain = float(t_good.sum()) / phi_g - float(t_all[g:].sum())
    loss = float(t_all[:g].sum())
    threshold = epsilon * float(t_good.sum()) / (epsilon * float(t_all.sum()))
    return CaotDecision(
        beneficial=bool(gain >= loss),
        threshold=threshold,
        phi_g=phi_g,
        gain=gain,
        loss=loss,
    )


def containment_delta_threshold(beta: float) -> float:
    """Delta above which the cancellation coverage is nested in the
    delta-level coverage on every realization: (1 + beta) / beta^2."""
    return (1.0 + beta) / beta**2


def _policy_nu_c(policy: ImPolicy, m: int) -> np.ndarray:
    if policy.nu_c is None:
        raise MissingNuC("policy.nu_c required: estimate it or supply values")
    nc = np.asarray(policy.nu_c, dtype=float)
    if nc.shape != (m,):
        raise MissingNuC(f"policy.nu_c must have one entry per state ({m})")
    return nc


def im_outage_bounds(lam: float, k: int, policy: ImPolicy, params: NetworkParams,
                     model: ChannelModel, c: BoundConstants | None = None) -> OutageBounds:
    """Outage bounds with suppression by gamma_k and perfect cancellation over
    the mean coverage nu_c_k.

    The effective delta-level intensity is gamma^(2/alpha)*lam*(1-nu_c/nu)^+;
    the Chebyshev term is evaluated at the suppressed intensity
    gamma^(2/alpha)*lam.
    """
    c = c or constants(params, model)
    nu_c = _policy_nu_c(policy, model.m)[k]
    gamma_k = float(policy.gammas[k])
    a = params.alpha
    s_k = float(model.states[k])
    lam_thin = gamma_k ** (2.0 / a) * lam
    frac = 1.0 - nu_c / c.nu
    lam_m = lam_thin * max(frac, 0.0)
    expo = lam_m * (c.nu * s_k ** (-2.0 / a) - math.pi)
    lower_raw = 1.0 - math.exp(-expo)
    clamped_lower = lower_raw < 0.0 or frac < 0.0
    lower = min(max(lower_raw, 0.0), 1.0)

    ca, cb, _ = _lambda_cap_parts(s_k, params, c)
    past = lam_thin >= (ca / cb) * (1.0 - SINGULARITY_RTOL)
    if past:
        return OutageBounds(lower=lower, upper=1.0, clamped_lower=clamped_lower,
                            past_singularity=True)
    cap = lambda_cap(lam_thin, k, params, model, c)
    upper_raw = 1.0 - max(1.0 - cap, 0.0) * math.exp(-expo)
    clamped_upper = upper_raw < 0.0 or upper_raw > 1.0
    upper = max(min(max(upper_raw, 0.0), 1.0), lower)
    return OutageBounds(lower=lower, upper=upper, clamped_lower=clamped_lower,
                        clamped_upper=clamped_upper)


def im_etc_bounds(epsilon: float, policy: ImPolicy, params: NetworkParams,
                  model: ChannelModel) -> EtcResult:
    """ETC bounds with interference management.

    With delta >= (1+beta)/beta^2 and nu > nu_c_k for every state the
    cancellation coverage nests inside the delta-level coverage and both
    bounds exist; otherwise every delta-level interferer is cancelable, the
    upper bound disappears, and the lower bound comes from the quadratic
    feasibility condition.
    """
    c = constants(params, model)
    _check_geometry(params, model, c.nu)
    nu_c = _policy_nu_c(policy, model.m)
    gammas = np.asarray(policy.gammas, dtype=float)
    a = params.alpha
    phi, s = model.invariant, model.states
    w = s ** (2.0 / a)
    w_im = (s / gammas) ** (2.0 / a)
    denom = c.nu - w * math.pi

    case1 = params.delta >= containment_delta_threshold(params.beta) and bool(
        np.all(c.nu > nu_c)
    )
    if case1:
        rhs = (1.0 - nu_c / c.nu) * denom
        eps_k = tuple(
            lambda_eps_k(epsilon, k, params, model, c, rhs=float(rhs[k]))
            for k in range(model.m)
        )
        lam_lower = float(np.sum(w_im * phi * np.array([e.value for e in eps_k])))
        lam_upper = -math.log1p(-epsilon) * float(
            np.sum(w_im * phi / (denom * (1.0 - nu_c / c.nu)))
        )
        scale = params.b * (1.0 - epsilon)
        return EtcResult(
            lambda_lower=lam_lower,
            lambda_upper=lam_upper,
            etc_lower=scale * lam_lower,
            etc_upper=scale * lam_upper,
            per_state_lambda_eps=eps_k,
            case="cc_in_delta",
        )

    # all delta-level interferers cancelable: lower bound only, from the
    # quadratic condition (A - B*lam)^2 <= C*lam with the smaller root
    eps_k = []
    values = np.empty(model.m)
    A = 1.0 / (params.d**a * params.delta * params.beta)
    for k in range(model.m):
        B = c.eta * s[k] ** (1.0 - 2.0 / a) * gammas[k] ** (-2.0 / a)
        C = s[k] ** (1.0 - 1.0 / a) * gammas[k] ** (2.0 / a) * c.sigma2 / epsilon
        qb = 2.0 * A * B + C
        disc = qb**2 - 4.0 * (B * A) ** 2
        if disc < 0:
            eps_k.append(LambdaEps(value=0.0, empty=True))
            values[k] = 0.0
            continue
        root = (qb - math.sqrt(disc)) / (2.0 * B**2)
        eps_k.append(LambdaEps(value=root))
        values[k] = root
    lam_lower = float(np.sum(w_im * phi * values))
    scale = params.b * (1.0 - epsilon)
    return EtcResult(
        lambda_lower=lam_lower,
        lambda_upper=None,
        etc_lower=scale * lam_lower,
        etc_upper=None,
        per_state_lambda_eps=tuple(eps_k),
        upper_available=False,
        case="delta_in_cc",
    )


def isotonic_nonincreasing(values: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators projection onto nonincreasing sequences."""
    v = np.asarray(values, dtype=float)
    level = [-x for x in v]
    weight = [1.0] * len(level)
    # PAVA for nondecreasing on the negated sequence
    out_v: list[float] = []
    out_w: list[float] = []
    for x, wt in zip(level, weight):
        out_v.append(x)
        out_w.append(wt)
        while len(out_v) > 1 and out_v[-2] > out_v[-1]:
            merged = (out_v[-2] * out_w[-2] + out_v[-1] * out_w[-1]) / (out_w[-2] + out_w[-1])
            out_w[-2] += out_w[-1]
            out_v[-2] = merged
            out_v.pop()
            out_w.pop()
    res = np.concatenate([np.full(int(wt), val) for val, wt in zip(out_v, out_w)])
    return -res


def optimize_gamma(
    nu_c_table: NuCTable,
    gamma_mins,
    params: NetworkParams,
    model: ChannelModel,
    z_tol: float = 4.0,
) -> GammaOptimum:
    """Reduction factors maximizing the IM throughput objective.

    The per-state objective term (phi_k s_k^(2/a)/(nu - pi s_k^(2/a)))^(a/2)
    / (gamma_k (1 - nu_c_k(gamma_k)/nu)^(a/2)) is nonincreasing in gamma_k
    because nu_c_k is nonincreasing, so the maximum sits at gamma_min_k. The
    table is validated against monotonicity violations beyond z_tol combined
    standard errors and evaluated through its isotonic projection.
    """
    c = constants(params, model)
    _check_geometry(params, model, c.nu)
    gm = np.asarray(gamma_mins, dtype=float)
    if gm.shape != (model.m,) or np.any(gm <= 0) or np.any(gm > 1):
        raise ConfigError("gamma_mins must have one entry in (0, 1] per state")

    grid = nu_c_table.gammas
    a = params.alpha
    for k in range(model.m):
        raw, se = nu_c_table.raw[k], nu_c_table.stderr[k]
        rise = raw[1:] - raw[:-1]
        slack = z_tol * np.hypot(se[1:], se[:-1])
        if np.any(rise > slack):
            i = int(np.argmax(rise - slack))
            raise NonMonotoneTable(
                f"nu_c table for state {k} increases at gamma={grid[i + 1]:.4g} "
                f"beyond {z_tol} combined standard errors"
            )

    w = model.states ** (2.0 / a)
    base = (model.invariant * w / (c.nu - math.pi * w)) ** (a / 2.0)
    per_state = np.empty((model.m, grid.size))
    for k in range(model.m):
        frac = 1.0 - nu_c_table.smoothed[k] / c.nu
        if np.any(frac <= 0):
            raise DegenerateGeometry(
                f"nu_c(gamma) >= nu for state {k}: objective undefined"
            )
        per_state[k] = base[k] / (grid * frac ** (a / 2.0))

    objective = 0.0
    for k in range(model.m):
        frac = 1.0 - nu_c_table.value(k, float(gm[k])) / c.nu
        objective += float(base[k] / (gm[k] * frac ** (a / 2.0)))
    return GammaOptimum(
        gamma_star=gm.copy(),
        objective=objective,
        grid=grid.copy(),
        objective_per_state=per_state,
    )
