"""Geometry layer: marked PPP sampling in a disk window, path loss,
state-thinning and window-truncation control.

The typical receiver sits at the origin (Slivnyak); the simulation window is
a disk of radius R around it. No edge correction is needed because only
statistics at the origin are measured.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BadStateIndex, ConfigError
from .fsmc import ChannelModel, marks_after_burn_in, sample_stationary_many

DEFAULT_TAIL_FRACTION = 0.005


@dataclass(frozen=True)
class NetworkParams:
    """Network constants: intensity, link distance, path loss, SIR threshold,
    interfering-coverage level, outage constraint and rate."""

    lam: float  # transmitter intensity (nodes per unit area)
    d: float  # TX-RX distance, > 1
    alpha: float  # path loss exponent, > 2
    beta: float  # SIR threshold
    delta: float = 1.0  # interfering-coverage level, >= 1
    epsilon: float = 0.1  # outage constraint, in (0, 1)
    b: float = 1.0  # supportable rate (bps/Hz)

    def __post_init__(self):
        checks = [
            (self.lam > 0, "lam must be > 0"),
            (self.d > 1, "d must be > 1"),
            (self.alpha > 2, "alpha must be > 2"),
            (self.beta > 0, "beta must be > 0"),
            (self.delta >= 1, "delta must be >= 1"),
            (0 < self.epsilon < 1, "epsilon must be in (0, 1)"),
            (self.b > 0, "b must be > 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)

    def with_(self, **kw) -> "NetworkParams":
        return replace(self, **kw)

    @property
    def signal(self) -> float:
        """Received desired power per unit fading gain, d^-alpha."""
        return self.d**-self.alpha


@dataclass(frozen=True)
class MarkedPattern:
    """One realization of the marked PPP inside the window disk."""

    xy: np.ndarray  # (n, 2) interferer locations
    marks: np.ndarray  # (n,) state indices into the channel model
    window_radius: float
    intensity_used: float

    def __post_init__(self):
        self.xy.setflags(write=False)
        self.marks.setflags(write=False)

    def __len__(self) -> int:
        return self.marks.shape[0]

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.xy[:, 0], self.xy[:, 1])


def path_loss(distance, alpha: float, min_distance: float = 1.0):
    """Bounded power-law path loss: r^-alpha for r >= min_distance, else 0.

    min_distance=1 is the model everywhere; other values exist only for the
    suppression/thinning duality check, where the exclusion must be rescaled.
    """
    r = np.asarray(distance, dtype=float)
    out = np.zeros_like(r)
    np.divide(1.0, r**alpha, out=out, where=r >= min_distance)
    if out.ndim == 0:
        return float(out)
    return out


def choose_window_radius(alpha: float, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> float:
    """Smallest R with mean out-of-window interference <= tail_fraction times
    the in-window mean.

    Both means are Campbell integrals of r^-alpha; the intensity and the mark
    mean cancel, so R depends only on alpha and the fraction.
    """
    if not 0 < tail_fraction <= 0.05:
        raise ConfigError("tail_fraction must be in (0, 0.05]")
    return float((tail_fraction / (1.0 + tail_fraction)) ** (-1.0 / (alpha - 2.0)))


def truncation_tail_mean(
    lam: float, window_radius: float, model: ChannelModel, alpha: float
) -> float:
    """Mean interference from beyond the window: 2*pi*lam*E[H]*R^(2-a)/(a-2)."""
    if window_radius < 1:
        raise ConfigError("window_radius must be >= 1")
    return float(
        2.0 * np.pi * lam * model.mean_gain() * window_radius ** (2.0 - alpha) / (alpha - 2.0)
    )


def in_window_mean_interference(
    lam: float, window_radius: float, model: ChannelModel, alpha: float
) -> float:
    """Mean interference from the window annulus [1, R]."""
    return float(
        2.0
        * np.pi
        * lam
        * model.mean_gain()
        * (1.0 - window_radius ** (2.0 - alpha))
        / (alpha - 2.0)
    )


def sample_ppp(
    lam: float,
    window_radius: float,
    model: ChannelModel,
    rng: np.random.Generator,
    burn_in: int = 0,
) -> MarkedPattern:
    """Homogeneous marked PPP on the window disk.

    Count ~ Poisson(lam*pi*R^2), locations uniform on the disk, marks i.i.d.
    from the invariant distribution (or from burn_in chain steps when
    burn_in > 0).
    """
    if lam < 0 or window_radius <= 0:
        raise ConfigError("lam must be >= 0 and window_radius > 0")
    n = rng.poisson(lam * np.pi * window_radius**2)
    r = window_radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    xy = np.column_stack((r * np.cos(theta), r * np.sin(theta)))
    if burn_in > 0:
        marks = marks_after_burn_in(model, n, burn_in, rng)
    else:
        marks = sample_stationary_many(model, n, rng)
    return MarkedPattern(xy=xy, marks=marks, window_radius=window_radius, intensity_used=lam)


def thin_by_state(pattern: MarkedPattern, k: int, m: int | None = None) -> MarkedPattern:
    """Sub-pattern of the points carrying mark k."""
    if k < 0 or (m is not None and k >= m):
        raise BadStateIndex(f"state index {k} invalid")
    keep = pattern.marks == k
    return MarkedPattern(
        xy=pattern.xy[keep],
        marks=pattern.marks[keep],
        window_radius=pattern.window_radius,
        intensity_used=pattern.intensity_used,
    )


def thin_good_states(pattern: MarkedPattern, g: int) -> MarkedPattern:
    """Sub-pattern of points with mark >= g (the CAOT active set)."""
    keep = pattern.marks >= g
    return MarkedPattern(
        xy=pattern.xy[keep],
        marks=pattern.marks[keep],
        window_radius=pattern.window_radius,
        intensity_used=pattern.intensity_used,
    )
