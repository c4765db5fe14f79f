"""Acceptance suite: one test per criterion, at the stated budgets and
tolerances, printing one pass/fail line each (run with -s to see them).

Two sub-checks are strict expected failures with the analysis recorded in the
repo notes: the closed-form residual-variance coefficient disagrees with the
Campbell integral the simulation provably follows, and the simulated
opportunistic-transmission ordering at the bad-state-dominant configuration
comes out opposite to the bound-level comparison.
"""

import math
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from etcap import bounds as bnd
from etcap import cli, fsmc, montecarlo as mc, spatial
from etcap.config import load_spec
from etcap.sir import ImPolicy

BASE_NET = dict(lam=0.01, d=5.0, alpha=3.0, beta=2.0, delta=1.0, epsilon=0.1)
CAOT_NET = dict(lam=0.01, d=10.0, alpha=3.0, beta=2.0, delta=1.5, epsilon=0.1)
IM_NET = dict(lam=0.02, d=10.0, alpha=3.0, beta=2.0, delta=2.0, epsilon=0.1)
SEED = 20240913


def _line(num: int, ok: bool, desc: str, t0: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\nCRITERION {num:2d}: {status} ({time.time() - t0:5.1f}s) {desc}")


@pytest.fixture(scope="module")
def base_model():
    return fsmc.validate_model([0.5, 2.0], [[0.5, 0.5], [0.5, 0.5]])


@pytest.fixture(scope="module")
def base_params():
    return spatial.NetworkParams(**BASE_NET)


def test_criterion_01_outage_bound_sandwich(base_params, base_model):
    t0 = time.time()
    cfg = mc.ExperimentConfig(trials=100_000, seed=SEED)
    outm = mc.outage_matrix(base_params.lam, base_params, base_model, cfg)
    ok = True
    for k in range(2):
        q = float(outm[:, k].mean())
        se = float(outm[:, k].std(ddof=1) / math.sqrt(cfg.trials))
        for delta in (1.0, 1.5, 2.0, 3.0):
            ob = bnd.outage_bounds(base_params.lam, k,
                                   base_params.with_(delta=delta), base_model)
            ok &= ob.lower - 3 * se <= q <= ob.upper + 3 * se
    _line(1, ok, "Monte-Carlo q_k inside the bound sandwich for "
          "delta in {1,1.5,2,3}, both states, 1e5 trials", t0)
    assert ok


def test_criterion_02_gap_monotone_in_delta(base_params, base_model):
    t0 = time.time()
    deltas = np.linspace(1.0, 4.0, 13)
    ok = True
    for k in (0, 1):
        gaps = [bnd.outage_bounds(base_params.lam, k,
                                  base_params.with_(delta=float(d)),
                                  base_model).gap for d in deltas]
        ok &= bool(np.all(np.diff(gaps) <= 0))
    g = [bnd.outage_bounds(base_params.lam, k, base_params, base_model).gap
         for k in (0, 1)]
    ok &= g[1] > g[0]
    _line(2, ok, "bound gap nonincreasing on a 13-point delta grid; "
          "good-state gap larger at delta=1", t0)
    assert ok


def test_criterion_03_ergodicity(base_model):
    t0 = time.time()
    chain = fsmc.validate_model([0.5, 2.0], [[0.9, 0.1], [0.3, 0.7]])
    traj = fsmc.simulate_trajectory(chain, 1_000_000, np.random.default_rng(SEED))
    occ = fsmc.empirical_occupancy(traj, m=2)
    ok = bool(np.max(np.abs(occ - [0.75, 0.25])) < 1e-2)

    lam, R = 0.01, 100.0
    rng = np.random.default_rng(SEED + 1)
    counts = np.array([
        len(spatial.thin_by_state(spatial.sample_ppp(lam, R, base_model, rng), 0))
        for _ in range(10_000)
    ])
    target = 0.5 * lam * math.pi * R * R
    ok &= abs(counts.mean() - target) / target < 0.02
    _line(3, ok, "1e6-step occupancy within 1e-2 of [0.75, 0.25]; "
          "thinned intensity within 2% of phi_k*lam", t0)
    assert ok


def test_criterion_04_coverage_count_and_residual_mean(base_params, base_model):
    t0 = time.time()
    cfg = mc.ExperimentConfig(trials=100_000, seed=SEED)
    ok = True
    for k in (0, 1):
        rep = mc.verify_delta_count(base_params.lam, k, base_params, base_model, cfg)
        ok &= rep.rel_err <= 0.03
    for k in (0, 1):
        mom = mc.verify_interference_moments(base_params.lam, k, base_params,
                                             base_model, cfg)
        ok &= mom.mean_rel_err <= 0.03
        # variance against the independent Campbell quadrature (the criterion's
        # closed-form variance coefficient is checked by the xfail companion)
        ok &= mom.var_campbell_rel_err <= 0.05
    _line(4, ok, "coverage counts within 3%, residual mean within 3%, "
          "residual variance within 5% of the Campbell quadrature, 1e5 trials", t0)
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason="printed residual-variance coefficient: the closed form disagrees "
    "with the Campbell variance integral by the factor "
    "(delta*beta/s_k)^(1-1/alpha) * E[s^(1+1/a)]/E[s^(2/a)] (3.3x / 1.3x at "
    "this configuration); the simulation reproduces the integral to <2%, so "
    "the 5% closed-form check cannot pass (see notes/decisions.md)",
)
def test_criterion_04_residual_variance_closed_form(base_params, base_model):
    t0 = time.time()
    cfg = mc.ExperimentConfig(trials=100_000, seed=SEED)
    ok = True
    for k in (0, 1):
        mom = mc.verify_interference_moments(base_params.lam, k, base_params,
                                             base_model, cfg)
        ok &= mom.var_rel_err <= 0.05
    _line(4, ok, "(closed-form variance coefficient, expected failure)", t0)
    assert ok


def test_criterion_05_etc_sandwich(base_params, base_model):
    t0 = time.time()
    cfg = mc.ExperimentConfig(trials=6_000, seed=SEED)
    ok = True
    for eps in (0.05, 0.1, 0.2):
        b = bnd.etc_bounds(eps, base_params, base_model)
        res = mc.find_max_intensity(eps, base_params, base_model, cfg)
        ok &= res.lam_hi >= b.lambda_lower and res.lam_lo <= b.lambda_upper
    _line(5, ok, "simulated max contention intensity inside the bound "
          "interval widened by the bisection bracket, eps in {.05,.1,.2}", t0)
    assert ok


def test_criterion_06_scaling_law(base_params, base_model):
    t0 = time.time()
    a = base_params.alpha
    c = bnd.constants(base_params, base_model)
    ok = True
    for k in (0, 1):  # deterministic part: small-eps closed form within 5%
        eps = 1e-4
        s_k = float(base_model.states[k])
        asym = s_k ** (2 / a) * eps / (
            (c.sigma2 * base_params.d ** (2 * a) * base_params.beta**2
             * base_params.delta**2 * s_k ** (1 + 1 / a) + c.nu)
            - s_k ** (2 / a) * math.pi
        )
        got = bnd.lambda_eps_k(eps, k, base_params, base_model).value
        ok &= abs(got - asym) / asym <= 0.05

    cfg = mc.ExperimentConfig(trials=20_000, seed=SEED)
    ratios = []
    for eps in (0.005, 0.01, 0.02):
        res = mc.find_max_intensity(eps, base_params, base_model, cfg, rtol=0.03)
        ratios.append(res.lam_hat / eps)
    spread = (max(ratios) - min(ratios)) / min(ratios)
    ok &= spread < 0.15
    _line(6, ok, f"lambda_hat/eps spread {spread:.1%} over "
          "{.005,.01,.02}; small-eps per-state closed form within 5%", t0)
    assert ok


@pytest.fixture(scope="module")
def caot_setup():
    params = spatial.NetworkParams(**CAOT_NET)
    model = fsmc.reversible_from_invariant([0.5, 2.0], [0.8, 0.2])
    return params, model


def test_criterion_07_caot_bounds_and_decision(caot_setup):
    t0 = time.time()
    params, model = caot_setup
    g = 1
    b_no = bnd.etc_bounds(params.epsilon, params, model)
    b_c = bnd.etc_bounds_caot(params.epsilon, g, params, model)
    dec = bnd.caot_beneficial(g, params.epsilon, params, model)
    ok = b_c.etc_upper < b_no.etc_upper and b_c.etc_lower < b_no.etc_lower
    ok &= not dec.beneficial
    # threshold consistency: the flag reproduces the phi_g comparison and the
    # nominal upper-bound ordering
    ok &= (dec.phi_g <= dec.threshold) == dec.beneficial
    ok &= (b_c.lambda_upper >= b_no.lambda_upper) == dec.beneficial
    _line(7, ok, "bound-level ETC with CAOT below no-CAOT; "
          "caot_beneficial false with a consistent threshold", t0)
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason="simulated realized ETC with CAOT exceeds no-CAOT by ~1.1x at this "
    "configuration for every eps probed: conditioning the desired channel on "
    "the good state outweighs the stronger active-set interference, so the "
    "claimed simulated ordering is not reproducible (see notes/decisions.md)",
)
def test_criterion_07_caot_simulated_ordering(caot_setup):
    t0 = time.time()
    params, model = caot_setup
    cfg = mc.ExperimentConfig(trials=5_000, seed=SEED)
    e_no = mc.estimate_etc(params.epsilon, params, model, cfg)
    e_c = mc.estimate_caot(params.epsilon, 1, params, model, cfg)
    margin = 3 * math.hypot(e_c.etc_constraint.stderr, e_no.etc_constraint.stderr)
    ok = e_c.etc_constraint.mean < e_no.etc_constraint.mean - margin
    _line(7, ok, "(simulated CAOT ordering, expected failure)", t0)
    assert ok


def test_criterion_08_interference_management(base_model):
    t0 = time.time()
    params = spatial.NetworkParams(**IM_NET)
    model = base_model  # same two-state symmetric chain
    base_policy = ImPolicy(gammas=(0.6, 0.6), cancellation_enabled=True)
    cfg_nu = mc.ExperimentConfig(trials=10_000, seed=SEED)
    nu_est = [mc.estimate_nu_c(params.lam, k, base_policy, params, model, cfg_nu)
              for k in range(2)]
    policy = replace(base_policy, nu_c=tuple(e.mean for e in nu_est))
    c = bnd.constants(params, model)
    ok = all(e.mean < c.nu for e in nu_est)

    b_no = bnd.etc_bounds(params.epsilon, params, model)
    b_im = bnd.im_etc_bounds(params.epsilon, policy, params, model)
    ok &= b_im.case == "cc_in_delta"
    ok &= b_im.lambda_lower > b_no.lambda_lower
    ok &= b_im.lambda_upper > b_no.lambda_upper

    cfg = mc.ExperimentConfig(trials=6_000, seed=SEED)
    e_no = mc.find_max_intensity(params.epsilon, params, model, cfg)
    e_im = mc.find_max_intensity(params.epsilon, params, model, cfg, policy=policy)
    ok &= e_im.lam_hat > e_no.lam_hat

    cfg_q = mc.ExperimentConfig(trials=100_000, seed=SEED)
    outm = mc.outage_matrix(params.lam, params, model, cfg_q, policy=policy)
    for k in range(2):
        q = float(outm[:, k].mean())
        se = float(outm[:, k].std(ddof=1) / math.sqrt(cfg_q.trials))
        ob = bnd.im_outage_bounds(params.lam, k, policy, params, model)
        ok &= ob.lower - 3 * se <= q <= ob.upper + 3 * se
    _line(8, ok, "management raises bound-level and simulated capacity; "
          "managed outage inside the management bound sandwich", t0)
    assert ok


def test_criterion_09_geometric_layer(base_params, base_model):
    t0 = time.time()
    eps = base_params.epsilon
    g = bnd.geometric_view(eps, base_params, base_model)
    inner_decomp = float(np.linalg.norm(g.phi) * np.linalg.norm(g.s_eps)
                         * math.cos(g.theta))
    ok = abs(g.inner - inner_decomp) < 1e-10

    # the aligned vector maximizes the normalized inner product on the grid
    unit = g.s_eps / np.linalg.norm(g.s_eps)
    best = float(g.phi_star @ unit) / float(np.linalg.norm(g.phi_star))
    for p0 in np.arange(0.0, 1.0 + 1e-12, 0.01):
        phi = np.array([p0, 1.0 - p0])
        ok &= float(phi @ unit) / float(np.linalg.norm(phi)) <= best + 1e-12

    upper = bnd.etc_bounds(eps, base_params, base_model).lambda_upper
    ok &= abs(upper - (-math.log1p(-eps) / eps) * g.inner) < 1e-10
    _line(9, ok, "inner-product decomposition to 1e-10; aligned vector "
          "maximal on the 0.01 simplex grid; factored upper bound identity", t0)
    assert ok


def test_criterion_10_gamma_optimization(base_model):
    t0 = time.time()
    params = spatial.NetworkParams(**IM_NET)
    cfg = mc.ExperimentConfig(trials=8_000, seed=SEED)
    grid = np.linspace(0.5, 1.0, 16)
    table = mc.estimate_nu_c_table(params.lam, params, base_model, cfg, grid)
    res = bnd.optimize_gamma(table, [0.5, 0.5], params, base_model)
    ok = bool(np.allclose(res.gamma_star, [0.5, 0.5]))
    totals = res.objective_per_state.sum(axis=0)
    ok &= int(np.argmax(totals)) == 0  # boundary of the grid
    ok &= bool(np.all(np.diff(res.objective_per_state, axis=1) <= 1e-12))
    _line(10, ok, "objective maximal at gamma_min over the 16-point grid "
          "(nu_c table estimated by simulation)", t0)
    assert ok


def test_criterion_11_verify_determinism(tmp_path):
    t0 = time.time()
    spec = load_spec(Path(__file__).resolve().parents[1] / "configs" / "bound_gap.toml")
    spec = replace(spec, mc=spec.mc.with_(trials=40_000, seed=SEED))
    rc1 = cli.run("verify", replace(spec, mc=spec.mc.with_(threads=1)),
                  tmp_path / "t1")
    rc4 = cli.run("verify", replace(spec, mc=spec.mc.with_(threads=4)),
                  tmp_path / "t4")
    a = (tmp_path / "t1" / "verify.csv").read_bytes()
    b = (tmp_path / "t4" / "verify.csv").read_bytes()
    ok = rc1 == rc4 == 0
    ok &= a.replace(b"threads=1", b"") == b.replace(b"threads=4", b"")
    _line(11, ok, "verify passes and produces bit-identical CSVs across "
          "thread counts", t0)
    assert ok
