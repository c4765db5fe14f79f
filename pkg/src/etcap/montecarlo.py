"""Monte-Carlo engine: per-state outage estimation, maximum-contention-
intensity search, empirical ETC (with opportunistic transmission and
interference management), cancellation-coverage estimation, and oracle checks
of the coverage-count and residual-interference formulas.

Each trial draws a fresh pattern with stationary marks from its own
counter-based random stream keyed by (seed, trial index), so results are
bit-identical for a given seed regardless of chunking or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import bounds as bnd
from .errors import BracketFailure, ConfigError
from .fsmc import ChannelModel, marks_after_burn_in
from .sir import ImPolicy
from .spatial import NetworkParams, choose_window_radius

CHUNK_POINT_BUDGET = 400_000  # concatenated points per vectorized chunk


@dataclass(frozen=True)
class ExperimentConfig:
    trials: int = 10_000
    seed: int = 0
    window_radius: float | None = None
    tail_fraction: float = 0.005
    burn_in: int = 0
    confidence_z: float = 3.0
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("mc.trials must be >= 1")
        if not 0 < self.tail_fraction <= 0.05:
            raise ConfigError("mc.tail_fraction must be in (0, 0.05]")
        if self.window_radius is not None and self.window_radius < 1:
            raise ConfigError("mc.window_radius must be >= 1")
        if self.threads < 1:
            raise ConfigError("mc.threads must be >= 1")

    def window(self, alpha: float) -> float:
        if self.window_radius is not None:
            return float(self.window_radius)
        return choose_window_radius(alpha, self.tail_fraction)

    def with_(self, **kw) -> "ExperimentConfig":
        from dataclasses import replace

        return replace(self, **kw)


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    trials: int
    flags: tuple = ()

    def ci(self, z: float = 3.0) -> tuple[float, float]:
        return self.mean - z * self.stderr, self.mean + z * self.stderr


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, trial], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _chunk_ranges(n: int, chunk: int):
    for lo in range(0, n, chunk):
        yield lo, min(lo + chunk, n)


def _sample_chunk(lam, radius, model, cfg, mark_cum, lo, hi):
    """Concatenated squared radii and marks for trials [lo, hi)."""
    mu = lam * math.pi * radius * radius
    counts = np.empty(hi - lo, dtype=np.intp)
    r2s, mks = [], []
    for i, t in enumerate(range(lo, hi)):
        rng = _trial_rng(cfg.seed, t)
        n = int(rng.poisson(mu))
        counts[i] = n
        r2s.append(radius * radius * rng.random(n))
        if cfg.burn_in > 0:
            mks.append(marks_after_burn_in(model, n, cfg.burn_in, rng))
        else:
            mks.append(np.searchsorted(mark_cum, rng.random(n), side="right"))
    return counts, np.concatenate(r2s), np.concatenate(mks)


def _segment_sums(values: np.ndarray, counts: np.ndarray) -> np.ndarray:
    out = np.zeros(counts.size)
    if values.size == 0:
        return out
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    nonempty = counts > 0
    sums = np.add.reduceat(values, offsets[nonempty]) if nonempty.any() else []
    out[nonempty] = sums
    return out


def _run_chunks(n_trials: int, lam: float, radius: float, model: ChannelModel,
                cfg: ExperimentConfig, mark_cum: np.ndarray, work) -> None:
    """Apply `work(lo, hi, counts, r2, marks)` over fixed trial chunks,
    optionally on a thread pool; chunk boundaries are seed-independent and the
    per-trial streams make the result independent of scheduling."""
    mu = max(lam * math.pi * radius * radius, 1.0)
    chunk = max(1, int(CHUNK_POINT_BUDGET / mu))

    def job(bounds_pair):
        lo, hi = bounds_pair
        counts, r2, marks = _sample_chunk(lam, radius, model, cfg, mark_cum, lo, hi)
        work(lo, hi, counts, r2, marks)

    ranges = list(_chunk_ranges(n_trials, chunk))
    if cfg.threads == 1:
        for r in ranges:
            job(r)
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            list(pool.map(job, ranges))


def outage_matrix(
    lam: float,
    params: NetworkParams,
    model: ChannelModel,
    cfg: ExperimentConfig,
    policy: ImPolicy | None = None,
    mark_dist: np.ndarray | None = None,
    states: list[int] | None = None,
) -> np.ndarray:
    """(trials, len(states)) outage indicators.

    Without a policy the aggregate interference is shared by all desired
    states; with one, the cancellation set is recomputed per state. mark_dist
    overrides the interferer mark distribution (used by the opportunistic-
    transmission estimator together with a thinned intensity).
    """
    radius = cfg.window(params.alpha)
    ks = list(range(model.m)) if states is None else list(states)
    out = np.empty((cfg.trials, len(ks)), dtype=bool)
    mark_cum = np.cumsum(model.invariant if mark_dist is None else mark_dist)
    s = model.states
    alpha = params.alpha
    thr = s[ks] * params.signal / params.beta  # outage iff I_eff > thr

    if policy is None:
        def work(lo, hi, counts, r2, marks):
            li = np.where(r2 >= 1.0, r2 ** (-alpha / 2.0), 0.0)
            agg = _segment_sums(s[marks] * li, counts)
            out[lo:hi] = agg[:, None] > thr[None, :]
    else:
        gammas = np.asarray(policy.gammas, dtype=float)
        bb = params.beta / (params.beta + 1.0)

        def work(lo, hi, counts, r2, marks):
            gains = s[marks]
            li = np.where(r2 >= 1.0, r2 ** (-alpha / 2.0), 0.0)
            contrib = gains * li
            agg = _segment_sums(contrib, counts)
            if policy.cancellation_enabled:
                decode = gains * r2 ** (-alpha / 2.0)  # no unit cutoff
                agg_rep = np.repeat(agg, counts)
                for j, k in enumerate(ks):
                    g = gammas[k]
                    cancel = g * decode >= bb * (s[k] * params.signal + g * agg_rep)
                    residual = agg - _segment_sums(contrib * cancel, counts)
                    out[lo:hi, j] = g * residual > thr[j]
            else:
                for j, k in enumerate(ks):
                    out[lo:hi, j] = gammas[k] * agg > thr[j]

    _run_chunks(cfg.trials, lam, radius, model, cfg, mark_cum, work)
    return out


def _estimate_from_indicator(values: np.ndarray) -> Estimate:
    m = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return Estimate(mean=m, stderr=se, trials=values.size)


def estimate_qk(
    lam: float,
    k: int,
    params: NetworkParams,
    model: ChannelModel,
    cfg: ExperimentConfig,
    policy: ImPolicy | None = None,
) -> Estimate:
    """Outage probability of a link in channel state k at intensity lam."""
    if lam == 0.0:
        return Estimate(mean=0.0, stderr=0.0, trials=cfg.trials)
    out = outage_matrix(lam, params, model, cfg, policy=policy, states=[k])
    return _estimate_from_indicator(out[:, 0].astype(float))


def estimate_qbar(
    lam: float,
    params: NetworkParams,
    model: ChannelModel,
    cfg: ExperimentConfig,
    policy: ImPolicy | None = None,
    weights: np.ndarray | None = None,
    mark_dist: np.ndarray | None = None,
) -> Estimate:
    """State-averaged outage sum_k w_k q_k with the per-trial covariance
    folded into the standard error (states share interference samples)."""
    w = model.invariant if weights is None else np.asarray(weights, dtype=float)
    if lam == 0.0:
        return Estimate(mean=0.0, stderr=0.0, trials=cfg.trials)
    ks = [k for k in range(model.m) if w[k] != 0.0]
    out = outage_matrix(lam, params, model, cfg, policy=policy,
                        mark_dist=mark_dist, states=ks)
    y = out.astype(float) @ w[ks]
    return _estimate_from_indicator(y)


@dataclass(frozen=True)
class MaxIntensityResult:
    lam_hat: float
    lam_lo: float
    lam_hi: float
    q_lo: Estimate
    q_hi: Estimate
    evaluations: int
    at_bracket_edge: bool = False

    @property
    def half_width(self) -> float:
        return 0.5 * (self.lam_hi - self.lam_lo)


def find_max_intensity(
    epsilon: float,
    params: NetworkParams,
    model: ChannelModel,
    cfg: ExperimentConfig,
    policy: ImPolicy | None = None,
    weights: np.ndarray | None = None,
    mark_dist: np.ndarray | None = None,
    intensity_scale: float = 1.0,
    lam_max: float = 1.0,
    rtol: float = 0.05,
    max_iters: int = 26,
) -> MaxIntensityResult:
    """Bisection for the largest lam with averaged outage <= epsilon.

    Monotonicity of the outage average in lam is assumed. The pattern
    intensity is lam * intensity_scale (the opportunistic-transmission path
    passes the active fraction). Bracket decisions use confidence intervals at
    cfg.confidence_z; when an interval straddles epsilon the trial budget is
    doubled (up to 4x) before falling back to the point estimate. Returns the
    final bracket; lam_hat is its geometric midpoint.
    """
    if not 0 < epsilon < 1:
        raise ConfigError("epsilon must be in (0, 1)")
    z = cfg.confidence_z
    evals = 0

    def qbar(lam: float, trials: int) -> Estimate:
        nonlocal evals
        evals += 1
        c = cfg.with_(trials=trials)
        return estimate_qbar(lam * intensity_scale, params, model, c,
                             policy=policy, weights=weights, mark_dist=mark_dist)

    # scale-free starting point: dense-limit scaling of the contention intensity
    lam0 = epsilon / (math.pi * params.d**2
                      * (params.delta * params.beta) ** (2.0 / params.alpha))
    lam0 = min(lam0, lam_max)

    hi = lam0
    q_hi = qbar(hi, cfg.trials)
    while q_hi.mean - z * q_hi.stderr <= epsilon:
        if hi >= lam_max:
            est = qbar(lam_max, cfg.trials)
            if est.mean + z * est.stderr < epsilon:
                raise BracketFailure(
                    f"averaged outage {est.mean:.4g} still below eps={epsilon} "
                    f"at lam_max={lam_max}"
                )
            return MaxIntensityResult(lam_hat=lam_max, lam_lo=lam_max, lam_hi=lam_max,
                                      q_lo=est, q_hi=est, evaluations=evals,
                                      at_bracket_edge=True)
        hi = min(hi * 2.0, lam_max)
        q_hi = qbar(hi, cfg.trials)

    lo = min(lam0, hi / 2.0)
    q_lo = qbar(lo, cfg.trials)
    while q_lo.mean + z * q_lo.stderr >= epsilon:
        lo /= 4.0
        if lo < 1e-15:
            break
        q_lo = qbar(lo, cfg.trials)

    for _ in range(max_iters):
        if hi / lo <= 1.0 + rtol:
            break
        mid = math.sqrt(lo * hi)
        trials = cfg.trials
        while True:
            est = qbar(mid, trials)
            if est.mean - z * est.stderr > epsilon:
                hi, q_hi = mid, est
                break
            if est.mean + z * est.stderr < epsilon:
                lo, q_lo = mid, est
                break
            if trials >= 4 * cfg.trials:
                if est.mean > epsilon:
                    hi, q_hi = mid, est
                else:
                    lo, q_lo = mid, est
                break
            trials *= 2

    return MaxIntensityResult(lam_hat=math.sqrt(lo * hi), lam_lo=lo, lam_hi=hi,
                              q_lo=q_lo, q_hi=q_hi, evaluations=evals)


@dataclass(frozen=True)
class EtcEstimate:
    """Empirical ETC at the estimated maximum contention intensity.

    etc_constraint is b*(1-eps)*active_fraction*lam_hat; etc_realized uses the
    measured per-state success fractions instead of (1-eps). The two agree at
    the constraint boundary.
    """

    lam: MaxIntensityResult
    etc_constraint: Estimate
    etc_realized: Estimate
    active_fraction: float = 1.0
    per_state_q: tuple = ()

    @property
    def lam_nominal(self) -> float:
        return self.lam.lam_hat


def estimate_etc(
    epsilon: float,
    params: NetworkParams,
    model: ChannelModel,
    cfg: ExperimentConfig,
    policy: ImPolicy | None = None,
) -> EtcEstimate:
    """ETC without scheduling: outage average over all states at full intensity."""
    res = find_max_intensity(epsilon, params, model, cfg, policy=policy)
    out = outage_matrix(res.lam_hat, params, model, cfg, policy=policy)
    qk = [_estimate_from_indicator(out[:, k].astype(float)) for k in range(model.m)]
    return _etc_from_parts(epsilon, params, model, res, qk, model.invariant, 1.0)


def estimate_caot(
    epsilon: float,
    g: int,
    params: NetworkParams,
    model: ChannelModel,
    cfg: ExperimentConfig,
) -> EtcEstimate:
    """ETC when only states >= g transmit.

    Interferer patterns are the good-state thinning of the full process
    (intensity lam*phi_g, marks conditioned on >= g), the desired channel is
    conditioned on >= g, and lam_hat is the nominal node intensity; the ETC
    accounting multiplies by the active fraction phi_g.
    """
    phi_g = model.good_fraction(g)
    cond = np.zeros(model.m)
    cond[g:] = model.invariant[g:] / phi_g
    res = find_max_intensity(
        epsilon, params, model, cfg,
        weights=cond, mark_dist=cond, intensity_scale=phi_g,
    )
    out = outage_matrix(res.lam_hat * phi_g, params, model, cfg,
                        mark_dist=cond, states=list(range(g, model.m)))
    qk = [_estimate_from_indicator(out[:, j].astype(float))
          for j in range(model.m - g)]
    return _etc_from_parts(epsilon, params, model, res, qk, cond[g:], phi_g)


def _etc_from_parts(epsilon, params, model, res, qk, weights, active_fraction):
    lam_se = res.half_width
    scale = params.b * (1.0 - epsilon) * active_fraction
    etc_c = Estimate(mean=scale * res.lam_hat, stderr=scale * lam_se,
                     trials=res.q_hi.trials)
    succ = float(np.sum(np.asarray(weights) * (1.0 - np.array([q.mean for q in qk]))))
    succ_se = float(
        np.sqrt(np.sum((np.asarray(weights) * np.array([q.stderr for q in qk])) ** 2))
    )
    mean_r = params.b * active_fraction * res.lam_hat * succ
    se_r = params.b * active_fraction * math.hypot(lam_se * succ, res.lam_hat * succ_se)
    etc_r = Estimate(mean=mean_r, stderr=se_r, trials=qk[0].trials)
    return EtcEstimate(lam=res, etc_constraint=etc_c, etc_realized=etc_r,
                       active_fraction=active_fraction,
                       per_state_q=tuple(qk))


def estimate_nu_c(
    lam: float,
    k: int,
    policy: ImPolicy,
    params: NetworkParams,
    model: ChannelModel,
    cfg: ExperimentConfig,
) -> Estimate:
    """Mean cancellation-coverage area for state k.

    The per-realization count of decodable interferers under power-scaled
    suppression is divided by gamma^(2/alpha)*lam, converting the power-
    scaling count into the thinned-view area that the bounds consume; the raw
    count per intensity is mean * gamma^(2/alpha).
    """
    if not policy.cancellation_enabled:
        raise ConfigError("estimate_nu_c requires cancellation_enabled")
    table = estimate_nu_c_table(lam, params, model, cfg,
                                np.array([policy.gammas[k]]), states=[k])
    return Estimate(mean=float(table.raw[0, 0]), stderr=float(table.stderr[0, 0]),
                    trials=cfg.trials)


def estimate_nu_c_table(
    lam: float,
    params: NetworkParams,
    model: ChannelModel,
    cfg: ExperimentConfig,
    gamma_grid: np.ndarray,
    states: list[int] | None = None,
) -> bnd.NuCTable:
    """Cancellation-coverage areas on a gamma grid, one trial pass for the
    whole grid, with a nonincreasing isotonic projection for the optimizer."""
    radius = cfg.window(params.alpha)
    grid = np.asarray(gamma_grid, dtype=float)
    ks = list(range(model.m)) if states is None else list(states)
    counts_out = np.empty((cfg.trials, len(ks), grid.size))
    mark_cum = np.cumsum(model.invariant)
    s = model.states
    alpha = params.alpha
    bb = params.beta / (params.beta + 1.0)

    def work(lo, hi, counts, r2, marks):
        gains = s[marks]
        li = np.where(r2 >= 1.0, r2 ** (-alpha / 2.0), 0.0)
        agg = _segment_sums(gains * li, counts)
        decode = gains * r2 ** (-alpha / 2.0)
        agg_rep = np.repeat(agg, counts)
        ones = np.ones_like(decode)
        for j, k in enumerate(ks):
            for gi, g in enumerate(grid):
                cancel = g * decode >= bb * (s[k] * params.signal + g * agg_rep)
                counts_out[lo:hi, j, gi] = _segment_sums(ones * cancel, counts)

    _run_chunks(cfg.trials, lam, radius, model, cfg, mark_cum, work)

    denom = grid ** (2.0 / alpha) * lam
    raw = counts_out.mean(axis=0) / denom
    stderr = counts_out.std(axis=0, ddof=1) / math.sqrt(cfg.trials) / denom
    smoothed = np.stack([bnd.isotonic_nonincreasing(raw[j]) for j in range(len(ks))])
    return bnd.NuCTable(gammas=grid, raw=raw, stderr=stderr, smoothed=smoothed)


def _rel_err(observed: float, expected: float) -> float:
    if expected == 0.0:
        return 0.0 if observed == 0.0 else math.inf
    return abs(observed - expected) / abs(expected)


@dataclass(frozen=True)
class MomentReport:
    """Residual-interference moments against the closed forms and an
    independent in-window Campbell quadrature."""

    mean: Estimate
    variance: Estimate
    mean_formula: float
    var_formula: float
    mean_campbell: float
    var_campbell: float
    window_radius: float

    @property
    def mean_rel_err(self) -> float:
        return _rel_err(self.mean.mean, self.mean_formula)

    @property
    def var_rel_err(self) -> float:
        return _rel_err(self.variance.mean, self.var_formula)

    @property
    def mean_campbell_rel_err(self) -> float:
        return _rel_err(self.mean.mean, self.mean_campbell)

    @property
    def var_campbell_rel_err(self) -> float:
        return _rel_err(self.variance.mean, self.var_campbell)


def residual_moment_window(lam: float, k: int, params: NetworkParams,
                           model: ChannelModel, bias_fraction: float = 0.015) -> float:
    """Window radius keeping the truncated tail below bias_fraction of the
    residual-interference mean (the default 0.5% total-interference rule is
    too coarse for moment checks: the residual is a small share of the total)."""
    c = bnd.constants(params, model)
    s_k = float(model.states[k])
    mean_resid = lam * s_k ** (1.0 - 2.0 / params.alpha) * c.eta
    tail_coeff = 2.0 * math.pi * lam * model.mean_gain() / (params.alpha - 2.0)
    return (tail_coeff / (bias_fraction * mean_resid)) ** (1.0 / (params.alpha - 2.0))


def verify_interference_moments(
    lam: float,
    k: int,
    params: NetworkParams,
    model: ChannelModel,
    cfg: ExperimentConfig,
) -> MomentReport:
    """Empirical mean and variance of the interference from outside the
    delta-level coverage of state k, against lam*s^(1-2/a)*eta and
    lam*s^(1-1/a)*sigma2, plus in-window Campbell integrals evaluated by
    quadrature as an independent oracle."""
    radius = cfg.window_radius or residual_moment_window(lam, k, params, model)
    s_k = float(model.states[k])
    alpha = params.alpha
    rstar = np.array([
        params.d * (params.delta * params.beta * float(si) / s_k) ** (1.0 / alpha)
        for si in model.states
    ])
    vals = np.empty(cfg.trials)
    mark_cum = np.cumsum(model.invariant)
    s = model.states

    def work(lo, hi, counts, r2, marks):
        li = np.where(r2 >= 1.0, r2 ** (-alpha / 2.0), 0.0)
        contrib = s[marks] * li
        outside = r2 >= rstar[marks] ** 2
        vals[lo:hi] = _segment_sums(contrib * outside, counts)

    _run_chunks(cfg.trials, lam, radius, model, cfg, mark_cum, work)

    n = cfg.trials
    mean = _estimate_from_indicator(vals)
    v = float(vals.var(ddof=1))
    centered = vals - vals.mean()
    m4 = float(np.mean(centered**4))
    var_se = math.sqrt(max(m4 - v * v, 0.0) / n)
    variance = Estimate(mean=v, stderr=var_se, trials=n)

    c = bnd.constants(params, model)
    mean_formula = lam * s_k ** (1.0 - 2.0 / alpha) * c.eta
    var_formula = lam * s_k ** (1.0 - 1.0 / alpha) * c.sigma2

    mean_q, var_q = 0.0, 0.0
    for i in range(model.m):
        lo_r = max(1.0, rstar[i])
        phi_i, s_i = float(model.invariant[i]), float(model.states[i])
        if lo_r < radius:
            mean_q += phi_i * s_i * quad(
                lambda x: x ** (1.0 - alpha), lo_r, radius)[0]
            var_q += phi_i * s_i**2 * quad(
                lambda x: x ** (1.0 - 2.0 * alpha), lo_r, radius)[0]
    mean_q *= 2.0 * math.pi * lam
    var_q *= 2.0 * math.pi * lam

    return MomentReport(mean=mean, variance=variance, mean_formula=mean_formula,
                        var_formula=var_formula, mean_campbell=mean_q,
                        var_campbell=var_q, window_radius=radius)


@dataclass(frozen=True)
class CountReport:
    """Empirical delta-level interferer count against lam*(nu*s^(-2/a) - pi)."""

    count: Estimate
    formula: float
    negative_prediction: bool

    @property
    def rel_err(self) -> float:
        return _rel_err(self.count.mean, self.formula)


def verify_delta_count(
    lam: float,
    k: int,
    params: NetworkParams,
    model: ChannelModel,
    cfg: ExperimentConfig,
) -> CountReport:
    """Brute-force mean cardinality of the delta-level interfering set."""
    radius = cfg.window(params.alpha)
    s_k = float(model.states[k])
    alpha = params.alpha
    rstar = np.array([
        params.d * (params.delta * params.beta * float(si) / s_k) ** (1.0 / alpha)
        for si in model.states
    ])
    if np.max(rstar) > radius:
        raise ConfigError("window too small: delta-level coverage spills past it")
    vals = np.empty(cfg.trials)
    mark_cum = np.cumsum(model.invariant)

    def work(lo, hi, counts, r2, marks):
        inside = (r2 >= 1.0) & (r2 < rstar[marks] ** 2)
        vals[lo:hi] = _segment_sums(inside.astype(float), counts)

    _run_chunks(cfg.trials, lam, radius, model, cfg, mark_cum, work)

    c = bnd.constants(params, model)
    area = c.nu * s_k ** (-2.0 / alpha) - math.pi
    return CountReport(count=_estimate_from_indicator(vals), formula=lam * area,
                       negative_prediction=area <= 0.0)
