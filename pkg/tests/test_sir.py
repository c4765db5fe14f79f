import math

import numpy as np
import pytest

from etcap import errors, fsmc, sir, spatial
from etcap.bounds import containment_delta_threshold


def _pattern(xy, marks, radius=50.0, lam=0.01):
    return spatial.MarkedPattern(
        xy=np.asarray(xy, dtype=float).reshape(-1, 2),
        marks=np.asarray(marks, dtype=np.intp),
        window_radius=radius,
        intensity_used=lam,
    )


def _empty():
    return _pattern(np.empty((0, 2)), [])


def test_aggregate_examples(two_state_model):
    assert sir.aggregate_interference(_empty(), two_state_model, 3.0) == 0.0
    one = _pattern([[2.0, 0.0]], [1])
    assert sir.aggregate_interference(one, two_state_model, 3.0) == pytest.approx(0.25)
    near = _pattern([[0.5, 0.0]], [1])
    assert sir.aggregate_interference(near, two_state_model, 3.0) == 0.0


def test_sir_examples(dense_params):
    zero = sir.sir(2.0, dense_params, 0.0)
    assert math.isinf(zero.sir) and not zero.outage
    s = sir.sir(2.0, dense_params, 0.004)
    assert s.sir == pytest.approx(4.0)
    assert not s.outage  # beta = 2
    assert sir.sir(2.0, dense_params, 0.009).outage  # 1.78 < 2


def test_delta_radius(dense_params):
    # delta*beta*h/s == 1 -> r* = d
    p = dense_params.with_(beta=1.0, delta=1.0)
    assert sir.delta_radius(2.0, 2.0, p) == pytest.approx(p.d)
    # d=5, delta=1, beta=2, h=2, s=0.5, alpha=3 -> 5 * 8^(1/3) = 10
    assert sir.delta_radius(0.5, 2.0, dense_params) == pytest.approx(10.0)
    assert sir.delta_radius(1e9, 2.0, dense_params) < 1.0


def test_delta_level_set_membership(two_state_model, dense_params):
    assert len(sir.delta_level_set(_empty(), 0.5, two_state_model, dense_params)) == 0
    rstar = sir.delta_radius(0.5, 2.0, dense_params)
    inside = _pattern([[rstar - 1e-9, 0.0]], [1])
    assert len(sir.delta_level_set(inside, 0.5, two_state_model, dense_params)) == 1
    outside = _pattern([[rstar + 1e-9, 0.0]], [1])
    assert len(sir.delta_level_set(outside, 0.5, two_state_model, dense_params)) == 0
    vacuous = _pattern([[0.5, 0.0]], [1])
    assert len(sir.delta_level_set(vacuous, 0.5, two_state_model, dense_params)) == 0


def test_delta_level_superset_in_delta(two_state_model, dense_params, rng):
    for _ in range(50):
        pat = spatial.sample_ppp(0.02, 40.0, two_state_model, rng)
        small = sir.delta_level_set(pat, 0.5, two_state_model, dense_params)
        big = sir.delta_level_set(pat, 0.5, two_state_model,
                                  dense_params.with_(delta=2.5))
        assert len(big) >= len(small)
        assert set(map(tuple, small.xy)) <= set(map(tuple, big.xy))


def test_delta_one_members_force_outage(two_state_model, dense_params, rng):
    # every dominant-coverage member alone pushes SIR below beta
    for k, s_k in enumerate(two_state_model.states):
        for _ in range(50):
            pat = spatial.sample_ppp(0.02, 40.0, two_state_model, rng)
            dom = sir.delta_level_set(pat, float(s_k), two_state_model, dense_params)
            for j in range(len(dom)):
                alone = float(two_state_model.states[dom.marks[j]]
                              * spatial.path_loss(dom.radii[j], dense_params.alpha))
                assert sir.sir(float(s_k), dense_params, alone).outage


def test_delta_count_matches_formula(two_state_model, dense_params, rng):
    from etcap.bounds import constants

    c = constants(dense_params, two_state_model)
    target = 0.01 * (c.nu * 0.5 ** (-2.0 / 3.0) - math.pi)
    counts = [
        len(sir.delta_level_set(spatial.sample_ppp(0.01, 50.0, two_state_model, rng),
                                0.5, two_state_model, dense_params))
        for _ in range(4000)
    ]
    assert abs(np.mean(counts) - target) / target < 0.05


def test_cancellation_requires_policy(two_state_model, dense_params):
    off = sir.ImPolicy(gammas=(1.0, 1.0), cancellation_enabled=False)
    with pytest.raises(errors.PolicyDisabled):
        sir.cancellation_set(_empty(), 0.5, 0, off, two_state_model, dense_params)


def test_cancellation_strong_interferer(two_state_model):
    # single strong interferer at |X|=1 with the policy of the worked example
    p = spatial.NetworkParams(lam=0.01, d=10.0, alpha=3.0, beta=2.0)
    pol = sir.ImPolicy(gammas=(0.6, 0.6), cancellation_enabled=True)
    pat = _pattern([[1.0, 0.0]], [1])
    got = sir.cancellation_set(pat, 0.5, 0, pol, two_state_model, p)
    assert len(got) == 1
    # far weak interferer is not decodable
    far = _pattern([[30.0, 0.0]], [0])
    assert len(sir.cancellation_set(far, 0.5, 0, pol, two_state_model, p)) == 0


def test_policy_validation():
    with pytest.raises(errors.ConfigError):
        sir.ImPolicy(gammas=(0.0, 0.5))
    with pytest.raises(errors.ConfigError):
        sir.ImPolicy(gammas=(1.5,))
    with pytest.raises(errors.ConfigError):
        sir.ImPolicy(gammas=(0.5,), gamma_mins=(0.6,))
    ok = sir.ImPolicy(gammas=(0.5,), gamma_mins=(0.5,), nu_c=(3.0,))
    assert ok.nu_c == (3.0,)


def test_sir_with_im_identity(two_state_model, dense_params, rng):
    # gamma = 1, cancellation off: identical to the plain SIR
    noop = sir.ImPolicy.no_op(2)
    for _ in range(20):
        pat = spatial.sample_ppp(0.02, 40.0, two_state_model, rng)
        agg = sir.aggregate_interference(pat, two_state_model, dense_params.alpha)
        plain = sir.sir(0.5, dense_params, agg)
        im = sir.sir_with_im(pat, 0, noop, two_state_model, dense_params)
        assert im.sir == pytest.approx(plain.sir)
        assert im.outage == plain.outage


def test_cancel_all_gives_infinite_sir(two_state_model):
    p = spatial.NetworkParams(lam=0.01, d=10.0, alpha=3.0, beta=2.0)
    pol = sir.ImPolicy(gammas=(1.0, 1.0), cancellation_enabled=True)
    pat = _pattern([[1.0, 0.0]], [1])
    out = sir.sir_with_im(pat, 0, pol, two_state_model, p)
    assert math.isinf(out.sir) and not out.outage


def test_removing_interferer_never_decreases_sir(two_state_model, im_params, rng):
    pol = sir.ImPolicy(gammas=(0.6, 0.6), cancellation_enabled=True)
    for _ in range(60):
        pat = spatial.sample_ppp(0.02, 30.0, two_state_model, rng)
        if len(pat) < 2:
            continue
        full = sir.sir_with_im(pat, 0, pol, two_state_model, im_params)
        drop = int(rng.integers(len(pat)))
        keep = np.ones(len(pat), dtype=bool)
        keep[drop] = False
        sub = spatial.MarkedPattern(xy=pat.xy[keep], marks=pat.marks[keep],
                                    window_radius=pat.window_radius,
                                    intensity_used=pat.intensity_used)
        assert sir.sir_with_im(sub, 0, pol, two_state_model, im_params).sir \
            >= full.sir - 1e-12


def test_containment_cc_inside_delta(two_state_model, im_params, rng):
    # delta >= (1+beta)/beta^2: cancellation coverage nested in delta coverage
    assert im_params.delta >= containment_delta_threshold(im_params.beta)
    pol = sir.ImPolicy(gammas=(0.6, 0.6), cancellation_enabled=True)
    for k, s_k in enumerate(two_state_model.states):
        for _ in range(40):
            pat = spatial.sample_ppp(0.02, 30.0, two_state_model, rng)
            cc = sir.cancellation_set(pat, float(s_k), k, pol, two_state_model, im_params)
            dl = sir.delta_level_set(pat, float(s_k), two_state_model, im_params)
            dl_pts = set(map(tuple, dl.xy))
            for pt, r in zip(cc.xy, cc.radii):
                if r >= 1.0:  # unit-disk members carry no interference either way
                    assert tuple(pt) in dl_pts


def test_containment_delta_inside_cc_sparse_limit(rng):
    # beta < golden ratio puts the threshold above 1; with gamma=1 and sparse
    # patterns every delta-level interferer is decodable
    model = fsmc.validate_model([0.5, 2.0], [[0.5, 0.5], [0.5, 0.5]])
    p = spatial.NetworkParams(lam=1e-4, d=10.0, alpha=3.0, beta=0.5, delta=2.0)
    assert p.delta < containment_delta_threshold(p.beta)
    pol = sir.ImPolicy(gammas=(1.0, 1.0), cancellation_enabled=True)
    checked = 0
    for _ in range(400):
        pat = spatial.sample_ppp(p.lam, 60.0, model, rng)
        if len(pat) != 1:  # isolate the vanishing-interference limit
            continue
        dl = sir.delta_level_set(pat, 0.5, model, p)
        if len(dl) == 0:
            continue
        cc = sir.cancellation_set(pat, 0.5, 0, pol, model, p)
        assert len(cc) == 1
        checked += 1
    assert checked > 0


def test_suppression_scaling_exact_map(two_state_model, rng):
    # per realization: gamma-scaling the powers equals rescaling the pattern
    # onto intensity gamma^(2/alpha)*lam with exclusion and window stretched
    # by gamma^(-1/alpha) (the conservation property, exercised end to end)
    alpha, gamma = 3.0, 0.5
    scale = gamma ** (-1.0 / alpha)
    for _ in range(200):
        pat = spatial.sample_ppp(0.01, 60.0, two_state_model, rng)
        a = gamma * sir.aggregate_interference(pat, two_state_model, alpha)
        mapped = spatial.MarkedPattern(
            xy=pat.xy * scale, marks=pat.marks,
            window_radius=pat.window_radius * scale,
            intensity_used=pat.intensity_used * gamma ** (2.0 / alpha),
        )
        b = sir.aggregate_interference(mapped, two_state_model, alpha,
                                       min_distance=scale)
        assert b == pytest.approx(a, rel=1e-12)


def test_suppression_thinning_duality(two_state_model, rng):
    # gamma-scaled interference at intensity lam equals, in distribution, the
    # unscaled interference at intensity gamma^(2/alpha)*lam with the unit
    # exclusion and the window both rescaled by gamma^(-1/alpha); independent
    # samplers, moments compared against their own standard errors
    lam, R, alpha, gamma, n = 0.01, 60.0, 3.0, 0.5, 60_000
    scale = gamma ** (-1.0 / alpha)
    a = np.empty(n)
    b = np.empty(n)
    for i in range(n):
        pat = spatial.sample_ppp(lam, R, two_state_model, rng)
        a[i] = gamma * sir.aggregate_interference(pat, two_state_model, alpha)
        pat2 = spatial.sample_ppp(gamma ** (2.0 / alpha) * lam, scale * R,
                                  two_state_model, rng)
        b[i] = sir.aggregate_interference(pat2, two_state_model, alpha,
                                          min_distance=scale)
    ma, mb = a.mean(), b.mean()
    assert abs(ma - mb) / ma < 0.03
    va, vb = a.var(ddof=1), b.var(ddof=1)

    def var_se(x, v):
        c = x - x.mean()
        return np.sqrt(max(np.mean(c**4) - v * v, 0.0) / x.size)

    assert abs(va - vb) <= 4 * np.hypot(var_se(a, va), var_se(b, vb))


def test_suppression_thinning_relaxed_exclusion_median(two_state_model, rng):
    # with the exclusion relaxed to zero the scale invariance is exact up to
    # the window; medians are the stable statistic there (the mean diverges)
    lam, R, alpha, gamma, n = 0.01, 60.0, 3.0, 0.5, 20_000
    scale = gamma ** (-1.0 / alpha)
    a = np.empty(n)
    b = np.empty(n)
    for i in range(n):
        pat = spatial.sample_ppp(lam, R, two_state_model, rng)
        a[i] = gamma * sir.aggregate_interference(pat, two_state_model, alpha,
                                                  min_distance=0.0)
        pat2 = spatial.sample_ppp(gamma ** (2.0 / alpha) * lam, scale * R,
                                  two_state_model, rng)
        b[i] = sir.aggregate_interference(pat2, two_state_model, alpha,
                                          min_distance=0.0)
    ma, mb = np.median(a), np.median(b)
    assert abs(ma - mb) / ma < 0.03
