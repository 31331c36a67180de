"""Large-scale propagation: three-state blockage, pathloss and shadowing.

All functions accept scalars or numpy arrays of distances (meters) and draw
randomness only from the ``numpy.random.Generator`` they are given.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .config import ChannelModel, ModelParams

THERMAL_NOISE_DBM_HZ = -174.0


class LinkState(enum.IntEnum):
    LoS = 0
    NLoS = 1
    Outage = 2


def _check_distance(d):
    d = np.asarray(d, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError("link distance must be strictly positive")
    return d


def state_probabilities(d, params: ModelParams):
    """Return ``(p_out, p_los, p_nlos)`` for distance(s) ``d`` in meters."""
    d = _check_distance(d)
    p_out = np.maximum(0.0, 1.0 - np.exp(-params.a_out * d + params.b_out))
    p_los = (1.0 - p_out) * np.exp(-params.a_los * d)
    p_nlos = 1.0 - p_out - p_los
    if d.ndim == 0:
        return float(p_out), float(p_los), float(p_nlos)
    return p_out, p_los, p_nlos


def model_state_probabilities(d, model: ChannelModel, params: ModelParams):
    """State probabilities as used by ``model``.

    Models 1 and 4 have no outage state; the outage mass is spread over LoS
    and NLoS in proportion, which leaves ``p_los = exp(-a_los d)``.
    """
    p_out, p_los, p_nlos = (np.asarray(p) for p in state_probabilities(d, params))
    if model.simplified_pathloss:
        p_los = np.exp(-params.a_los * np.asarray(d, dtype=float))
        p_nlos = 1.0 - p_los
        p_out = np.zeros_like(p_los)
    return p_out, p_los, p_nlos


def sample_state(d, model: ChannelModel, params: ModelParams, rng: np.random.Generator):
    """Draw a LinkState per distance. Returns an int array of LinkState values
    (or a single LinkState for scalar input)."""
    scalar = np.ndim(d) == 0
    _, p_los, p_nlos = model_state_probabilities(d, model, params)
    u = rng.random(np.shape(d))
    state = np.where(u < p_los, LinkState.LoS,
                     np.where(u < p_los + p_nlos, LinkState.NLoS, LinkState.Outage)).astype(np.int8)
    if scalar:
        return LinkState(int(state))
    return state


def pathloss_db(d, state, model: ChannelModel, params: ModelParams):
    """Distance-dependent pathloss in dB (no shadowing).

    Models 2/3 use the measured ``alpha + 10 beta log10(d)`` fit; Models 1/4
    use ``ref_loss + 10 n log10(d)`` with a per-state exponent. Passing an
    outage state is a contract violation.
    """
    d = _check_distance(d)
    state = np.asarray(state)
    if np.any(state == LinkState.Outage):
        raise ValueError("pathloss is undefined for outage links")
    out = _pathloss_no_check(d, state, model, params)
    return float(out) if out.ndim == 0 else out


def _pathloss_no_check(d, state, model, params):
    los = state == LinkState.LoS
    logd = np.log10(d)
    if model.simplified_pathloss:
        n = np.where(los, params.model1_n_los, params.model1_n_nlos)
        return params.model1_ref_loss_db + 10.0 * n * logd
    alpha = np.where(los, params.los_alpha_db, params.nlos_alpha_db)
    beta = np.where(los, params.los_beta, params.nlos_beta)
    return alpha + 10.0 * beta * logd


def sample_shadowing(state, model: ChannelModel, params: ModelParams, rng: np.random.Generator):
    """Log-normal shadowing in dB; zero for Models 1/4 and for outage links.

    One standard normal is consumed per link whatever the model, so paired
    runs across models see the same downstream random stream.
    """
    state = np.asarray(state)
    z = rng.standard_normal(state.shape)
    if model.simplified_pathloss:
        xi = np.zeros(state.shape)
    else:
        sigma = np.where(state == LinkState.LoS, params.los_sigma_db, params.nlos_sigma_db)
        xi = np.where(state == LinkState.Outage, 0.0, sigma * z)
    return float(xi) if xi.ndim == 0 else xi


@dataclass(frozen=True)
class LargeScale:
    """Per-link large-scale realization; arrays share one shape."""

    state: np.ndarray
    pathloss_db: np.ndarray
    shadowing_db: np.ndarray
    distance_m: np.ndarray

    @property
    def loss_db(self) -> np.ndarray:
        """Pathloss plus shadowing; +inf on outage links."""
        return self.pathloss_db + self.shadowing_db


def sample_large_scale(d, model: ChannelModel, params: ModelParams,
                       state_rng: np.random.Generator, shadow_rng: np.random.Generator) -> LargeScale:
    d = _check_distance(d)
    state = np.asarray(sample_state(d, model, params, state_rng), dtype=np.int8).reshape(d.shape)
    pl = np.where(state == LinkState.Outage, np.inf, _pathloss_no_check(d, state, model, params))
    xi = np.asarray(sample_shadowing(state, model, params, shadow_rng)).reshape(d.shape)
    return LargeScale(state=state, pathloss_db=pl, shadowing_db=xi, distance_m=d)


def noise_power_dbm(bw_hz: float, nf_db: float) -> float:
    """Thermal noise over ``bw_hz`` plus receiver noise figure."""
    if not bw_hz > 0:
        raise ValueError("bandwidth must be positive")
    return float(THERMAL_NOISE_DBM_HZ + 10.0 * np.log10(bw_hz) + nf_db)
