"""Finite-state Markov chain fading model.

States are ordered channel gains s_0 < s_1 < ... < s_{m-1}; the chain must be
irreducible (periodicity is allowed). State indices are 0-based everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (
    BadStateIndex,
    EmptyTrajectory,
    NoConvergence,
    NotOrdered,
    NotStochastic,
    Reducible,
)

ROW_SUM_TOL = 1e-12
INVARIANT_TOL = 1e-10
# direct linear solve up to this size, power iteration beyond
DIRECT_SOLVE_MAX = 64
POWER_MAX_ITERS = 200_000


@dataclass(frozen=True)
class ChannelModel:
    """Validated fading model: gains, transition matrix, invariant vector."""

    states: np.ndarray
    transition: np.ndarray
    invariant: np.ndarray

    def __post_init__(self):
        for arr in (self.states, self.transition, self.invariant):
            arr.setflags(write=False)

    @property
    def m(self) -> int:
        return self.states.shape[0]

    def mean_gain(self) -> float:
        """E[H] under the invariant distribution."""
        return float(self.invariant @ self.states)

    def mean_gain_pow(self, p: float) -> float:
        """E[H^p] under the invariant distribution."""
        return float(self.invariant @ self.states**p)

    def good_fraction(self, g: int) -> float:
        """Steady-state probability of being in a state with index >= g."""
        if not 0 <= g < self.m:
            raise BadStateIndex(f"threshold index {g} outside [0, {self.m})")
        return float(self.invariant[g:].sum())

    def conditioned(self, g: int) -> "ChannelModel":
        """Model restricted to states >= g with the renormalized invariant.

        The transition matrix of the restriction is synthesized as a
        reversible chain with the conditional invariant; only the invariant
        matters to steady-state quantities.
        """
        frac = self.good_fraction(g)
        inv = self.invariant[g:] / frac
        return reversible_from_invariant(self.states[g:], inv)


def _check_states(states: np.ndarray) -> None:
    if states.ndim != 1 or states.size < 1:
        raise NotOrdered("states must be a non-empty 1-D vector")
    if not np.all(states > 0):
        raise NotOrdered("states must be positive")
    if not np.all(np.diff(states) > 0):
        raise NotOrdered("states must be strictly increasing")


def _check_stochastic(transition: np.ndarray) -> None:
    if transition.ndim != 2 or transition.shape[0] != transition.shape[1]:
        raise NotStochastic("transition matrix must be square")
    if np.any(transition < 0) or np.any(transition > 1):
        raise NotStochastic("transition entries must lie in [0, 1]")
    rows = transition.sum(axis=1)
    bad = np.where(np.abs(rows - 1.0) > ROW_SUM_TOL)[0]
    if bad.size:
        raise NotStochastic(
            f"row {bad[0]} sums to {rows[bad[0]]!r}, expected 1 within {ROW_SUM_TOL}"
        )


def _check_irreducible(transition: np.ndarray) -> None:
    n, _ = connected_components(
        sp.csr_matrix(transition > 0), directed=True, connection="strong"
    )
    if n != 1:
        raise Reducible(f"transition graph has {n} strongly connected components")


def invariant_distribution(transition) -> np.ndarray:
    """Stationary vector of an irreducible stochastic matrix.

    Solves phi^T P = phi^T with sum(phi) = 1 by a direct linear solve for
    small matrices; beyond DIRECT_SOLVE_MAX uses power iteration on the lazy
    chain (P + I)/2, which shares the invariant vector and is aperiodic.
    """
    P = np.asarray(transition, dtype=float)
    _check_stochastic(P)
    _check_irreducible(P)
    m = P.shape[0]
    if m == 1:
        return np.array([1.0])
    if m <= DIRECT_SOLVE_MAX:
        a = P.T - np.eye(m)
        a[-1, :] = 1.0
        b = np.zeros(m)
        b[-1] = 1.0
        phi = np.linalg.solve(a, b)
    else:
        lazy = 0.5 * (P + np.eye(m))
        phi = np.full(m, 1.0 / m)
        for _ in range(POWER_MAX_ITERS):
            nxt = phi @ lazy
            nxt /= nxt.sum()
            if np.max(np.abs(nxt - phi)) < 1e-14:
                phi = nxt
                break
            phi = nxt
        else:
            raise NoConvergence(
                f"power iteration not converged after {POWER_MAX_ITERS} iterations"
            )
    phi = np.clip(phi, 0.0, None)
    phi /= phi.sum()
    resid = np.max(np.abs(phi @ P - phi))
    if resid > INVARIANT_TOL:
        raise NoConvergence(f"invariant residual {resid:g} exceeds {INVARIANT_TOL}")
    return phi


def validate_model(states, transition) -> ChannelModel:
    """Build a ChannelModel, rejecting unordered states, non-stochastic rows
    and reducible chains."""
    s = np.asarray(states, dtype=float)
    P = np.asarray(transition, dtype=float)
    _check_states(s)
    phi = invariant_distribution(P)
    return ChannelModel(states=s, transition=P, invariant=phi)


def reversible_from_invariant(states, invariant) -> ChannelModel:
    """Synthesize a reversible chain with the given invariant vector.

    Metropolis construction over a uniform proposal: p_ij = min(1, phi_j/phi_i)/m
    for j != i, remainder on the diagonal. Used when a config specifies only
    the invariant distribution.
    """
    s = np.asarray(states, dtype=float)
    phi = np.asarray(invariant, dtype=float)
    _check_states(s)
    if phi.shape != s.shape:
        raise NotStochastic("invariant length must match states length")
    if np.any(phi <= 0) or abs(phi.sum() - 1.0) > 1e-9:
        raise NotStochastic("invariant must be positive and sum to 1")
    phi = phi / phi.sum()
    m = phi.size
    if m == 1:
        return ChannelModel(states=s, transition=np.array([[1.0]]), invariant=np.array([1.0]))
    P = np.minimum(1.0, phi[None, :] / phi[:, None]) / m
    np.fill_diagonal(P, 0.0)
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    return validate_model(s, P)


def step(current: int, model: ChannelModel, rng: np.random.Generator) -> int:
    """One chain transition from `current`; reproducible given the rng state."""
    if not 0 <= current < model.m:
        raise BadStateIndex(f"state index {current} outside [0, {model.m})")
    u = rng.random()
    return int(np.searchsorted(np.cumsum(model.transition[current]), u, side="right"))


def sample_stationary(model: ChannelModel, rng: np.random.Generator) -> int:
    """Draw a state index from the invariant distribution."""
    u = rng.random()
    return int(np.searchsorted(np.cumsum(model.invariant), u, side="right"))


def sample_stationary_many(model: ChannelModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized i.i.d. draws from the invariant distribution."""
    u = rng.random(n)
    return np.searchsorted(np.cumsum(model.invariant), u, side="right").astype(np.intp)


def marks_after_burn_in(
    model: ChannelModel, n: int, steps: int, rng: np.random.Generator
) -> np.ndarray:
    """States of n independent chains after `steps` transitions from a uniform start.

    Validation path for the stationary-sampling shortcut: with steps of the
    order of the mixing time the result is indistinguishable from
    sample_stationary_many.
    """
    if steps <= 0:
        return sample_stationary_many(model, n, rng)
    cum = np.cumsum(model.transition, axis=1)
    state = rng.integers(0, model.m, size=n)
    for _ in range(steps):
        u = rng.random(n)
        state = (cum[state] < u[:, None]).sum(axis=1)
    return state.astype(np.intp)


def simulate_trajectory(
    model: ChannelModel, length: int, rng: np.random.Generator, start: int | None = None
) -> np.ndarray:
    """State-index trajectory of the chain; starts from the invariant draw
    unless `start` is given."""
    if length < 1:
        raise EmptyTrajectory("trajectory length must be >= 1")
    cum = np.cumsum(model.transition, axis=1)
    out = np.empty(length, dtype=np.intp)
    cur = sample_stationary(model, rng) if start is None else start
    if not 0 <= cur < model.m:
        raise BadStateIndex(f"start index {cur} outside [0, {model.m})")
    us = rng.random(length)
    for t in range(length):
        out[t] = cur
        cur = int(np.searchsorted(cum[cur], us[t], side="right"))
    return out


def empirical_occupancy(trajectory, m: int | None = None) -> np.ndarray:
    """Per-state visit frequencies of a state-index trajectory."""
    traj = np.asarray(trajectory, dtype=np.intp)
    if traj.size == 0:
        raise EmptyTrajectory("empty trajectory has no occupancy")
    if m is None:
        m = int(traj.max()) + 1
    if traj.min() < 0 or traj.max() >= m:
        raise BadStateIndex("trajectory contains indices outside [0, m)")
    return np.bincount(traj, minlength=m) / traj.size
