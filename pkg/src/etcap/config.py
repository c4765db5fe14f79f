"""Experiment configuration: TOML files with [network], [channel], optional
[im], [mc] and [sweep] sections.

Numbers are parsed by the TOML grammar (locale-independent). The channel
accepts either a transition matrix or just an invariant vector; in the latter
case a reversible chain with that invariant is synthesized.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, EtcapError
from .fsmc import ChannelModel, reversible_from_invariant, validate_model
from .montecarlo import ExperimentConfig
from .sir import ImPolicy
from .spatial import NetworkParams

SWEEP_AXES = ("delta", "epsilon", "lam", "beta", "d")


@dataclass(frozen=True)
class Sweep:
    axis: str
    values: tuple


@dataclass(frozen=True)
class ExperimentSpec:
    network: NetworkParams
    channel: ChannelModel
    mc: ExperimentConfig
    im: ImPolicy | None = None
    good_threshold: int = 1  # CAOT threshold index g
    sweep: Sweep | None = None

    def network_at(self, value: float | None = None) -> NetworkParams:
        """Network params with the sweep axis set to `value` (if sweeping)."""
        if value is None or self.sweep is None:
            return self.network
        return self.network.with_(**{self.sweep.axis: value})

    def sweep_values(self, default_axis: str, defaults: tuple) -> tuple[str, tuple]:
        """Sweep axis and values; an empty value list means a single-point run
        at the configured network value."""
        if self.sweep is not None:
            values = self.sweep.values
            if not values:
                values = (getattr(self.network, self.sweep.axis),)
            return self.sweep.axis, values
        return default_axis, defaults


def _section(raw: dict, name: str, required: bool = True) -> dict:
    sec = raw.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"{name}: section missing")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: must be a table")
    return sec


def _get(sec: dict, path: str, key: str, default=None, required: bool = False):
    if key not in sec:
        if required:
            raise ConfigError(f"{path}.{key}: required key missing")
        return default
    return sec[key]


def _build_channel(sec: dict) -> ChannelModel:
    states = _get(sec, "channel", "states", required=True)
    transition = _get(sec, "channel", "transition")
    invariant = _get(sec, "channel", "invariant")
    if (transition is None) == (invariant is None):
        raise ConfigError("channel: give exactly one of transition, invariant")
    try:
        if transition is not None:
            return validate_model(states, transition)
        return reversible_from_invariant(states, invariant)
    except EtcapError as exc:
        raise ConfigError(f"channel: {exc}") from exc


def _build_network(sec: dict) -> NetworkParams:
    kwargs = {}
    for key, required in [("lam", True), ("d", True), ("alpha", True),
                          ("beta", True), ("delta", False), ("epsilon", False),
                          ("b", False)]:
        val = _get(sec, "network", key, required=required)
        if val is not None:
            kwargs[key] = float(val)
    try:
        return NetworkParams(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"network: {exc}") from exc


def _build_im(sec: dict, m: int) -> ImPolicy | None:
    if not sec:
        return None
    gamma = _get(sec, "im", "gamma", required=True)
    if np.isscalar(gamma):
        gamma = [float(gamma)] * m
    if len(gamma) != m:
        raise ConfigError("im.gamma: need one value per channel state")
    gamma_min = _get(sec, "im", "gamma_min")
    if gamma_min is not None and np.isscalar(gamma_min):
        gamma_min = [float(gamma_min)] * m
    nu_c = _get(sec, "im", "nu_c")
    try:
        return ImPolicy(
            gammas=tuple(float(x) for x in gamma),
            cancellation_enabled=bool(_get(sec, "im", "cancellation", default=True)),
            gamma_mins=None if gamma_min is None else tuple(float(x) for x in gamma_min),
            nu_c=None if nu_c is None else tuple(float(x) for x in nu_c),
        )
    except ConfigError as exc:
        raise ConfigError(f"im: {exc}") from exc


def _build_mc(sec: dict) -> ExperimentConfig:
    kwargs = {}
    for key, cast in [("trials", int), ("seed", int), ("window_radius", float),
                      ("tail_fraction", float), ("burn_in", int),
                      ("confidence_z", float), ("threads", int)]:
        val = _get(sec, "mc", key)
        if val is not None:
            kwargs[key] = cast(val)
    try:
        return ExperimentConfig(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"mc: {exc}") from exc


def _build_sweep(sec: dict) -> Sweep | None:
    if not sec:
        return None
    axis = _get(sec, "sweep", "axis", required=True)
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep.axis: {axis!r} not one of {SWEEP_AXES}")
    values = _get(sec, "sweep", "values", required=True)
    if not isinstance(values, list):
        raise ConfigError("sweep.values: must be a list")
    return Sweep(axis=axis, values=tuple(float(v) for v in values))


def load_spec(path: str | Path) -> ExperimentSpec:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    channel = _build_channel(_section(raw, "channel"))
    network = _build_network(_section(raw, "network"))
    mc = _build_mc(_section(raw, "mc", required=False))
    im = _build_im(_section(raw, "im", required=False), channel.m)
    sweep = _build_sweep(_section(raw, "sweep", required=False))
    g = int(_get(_section(raw, "caot", required=False), "caot", "g",
                 default=min(1, channel.m - 1)))
    if not 0 <= g < channel.m:
        raise ConfigError(f"caot.g: {g} outside [0, {channel.m})")
    return ExperimentSpec(network=network, channel=channel, mc=mc, im=im,
                          good_threshold=g, sweep=sweep)
