"""Per-drop SINR/rate evaluation and the Monte Carlo campaign runner."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry, mimo
from .config import ChannelModel, Scenario, SimulationConfig
from .metrics import rate_of
from .propagation import LinkState, noise_power_dbm, sample_large_scale
from .units import db2lin, lin2db

# Substream tags. Appending new tags never shifts the draws of existing ones.
STREAMS = ("deploy", "state", "shadow", "clusters", "orientation", "steer", "rect")


@dataclass(frozen=True)
class ScenarioSpec:
    scenario: Scenario
    bandwidth_hz: float
    open_access: bool
    same_operator_interference_only: bool

    @classmethod
    def from_config(cls, config: SimulationConfig) -> "ScenarioSpec":
        sc = config.scenario
        exclusive = sc is Scenario.NoSharing
        return cls(
            scenario=sc,
            bandwidth_hz=config.bw_hz / config.num_operators if exclusive else config.bw_hz,
            open_access=sc is Scenario.SpectrumAccess,
            same_operator_interference_only=exclusive,
        )


@dataclass(frozen=True)
class DropResult:
    """Typical-user outcome of one drop. ``sinr_db`` is -inf on outage."""

    drop: int
    sinr_db: float
    rate_bps: float
    load: int
    state: LinkState

    @property
    def outage(self) -> bool:
        return math.isinf(self.sinr_db) and self.sinr_db < 0

    @property
    def sinr(self) -> float:
        return 0.0 if self.outage else float(db2lin(self.sinr_db))


def drop_streams(seed: int, drop: int) -> dict[str, np.random.Generator]:
    """Independent generators keyed by (seed, drop index, purpose)."""
    return {tag: np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(drop, i)))
            for i, tag in enumerate(STREAMS)}


def sinr(p_tx_dbm: float, serving_loss_db: float, serving_gain: float,
         interferer_loss_db, interferer_gain, noise_dbm: float) -> float:
    """Linear SINR; losses are pathloss + shadowing in dB (inf = outage),
    gains are linear beamforming gains."""
    p_mw = db2lin(p_tx_dbm)
    signal = p_mw * db2lin(-serving_loss_db) * serving_gain
    il = np.asarray(interferer_loss_db, dtype=float)
    interference = float(np.sum(p_mw * db2lin(-il) * np.asarray(interferer_gain, dtype=float)))
    return float(signal / (interference + db2lin(noise_dbm)))


def _mimo_gains(config: SimulationConfig, streams, serving: int, n_bs: int):
    """Linear gain from every BS to the typical UE.

    The serving BS steers at the strongest cluster of its link to the typical
    UE; the UE steers its receive beam likewise. Every other BS steers at its
    own scheduled user, whose strongest-cluster direction is an independent
    draw from the cluster-angle distribution. Each BS uses the panel that
    faces its beam direction.
    """
    p = config.model_params
    cs = mimo.sample_cluster_sets(p, streams["clusters"], n_bs)
    orientation = streams["orientation"].uniform(0.0, 2.0 * np.pi, n_bs)
    beam_az, beam_el = mimo.cluster_center(p, streams["steer"], n_bs)

    k = mimo.strongest_cluster(cs)[serving]
    beam_az[serving], beam_el[serving] = cs.aod_az[k], cs.aod_el[k]
    rx_beam = (cs.aoa_az[k], cs.aoa_el[k])

    boresight = mimo.select_panel(orientation, beam_az, p.bs_panels)
    return mimo.link_gains(cs, config.tx_dims, config.rx_dims, boresight,
                           (beam_az, beam_el), rx_beam, config.channel_model)


def _rect_gains(config: SimulationConfig, streams, serving: int, n_bs: int):
    p = config.model_params
    u = streams["rect"].random((2, n_bs))
    q = mimo.rect_alignment_probability(p)
    g = mimo.rect_gain_linear(u[0] < q, u[1] < q, p)
    g[serving] = db2lin(p.rect_gmax_db)
    return g


def _large_scale(dep: geometry.Deployment, model, params, streams):
    """Loss matrix (UE x BS, +inf where not sampled or in outage) and the
    typical user's per-BS link states.

    Only links that can matter are realized: every candidate (UE, BS) pair
    for association, plus the typical user's link to every BS for
    interference.
    """
    t = dep.typical_ue
    loss = np.full((len(dep.ue_xy), dep.n_bs), np.inf)
    typ_state = np.full(dep.n_bs, LinkState.Outage, dtype=np.int8)
    done = np.zeros(dep.n_bs, dtype=bool)
    for ues, bss in dep.candidate_blocks():
        if len(ues) == 0 or len(bss) == 0:
            continue
        ls = sample_large_scale(dep.distances(ues, bss), model, params, streams["state"], streams["shadow"])
        loss[np.ix_(ues, bss)] = ls.loss_db
        if ues[0] == t:
            typ_state[bss] = ls.state[0]
            done[bss] = True
    rest = np.flatnonzero(~done)
    if len(rest):
        ls = sample_large_scale(dep.distances([t], rest), model, params, streams["state"], streams["shadow"])
        loss[t, rest] = ls.loss_db[0]
        typ_state[rest] = ls.state[0]
    return loss, typ_state


def interferer_mask(dep: geometry.Deployment, serving: int, spec: ScenarioSpec) -> np.ndarray:
    """BSs whose downlink reaches the typical user in its band: same-operator
    BSs under exclusive spectrum, every BS otherwise; never the server."""
    mask = np.ones(dep.n_bs, dtype=bool)
    if spec.same_operator_interference_only:
        mask &= dep.bs_op == dep.ue_op[dep.typical_ue]
    mask[serving] = False
    return mask


def run_drop(config: SimulationConfig, drop: int = 0, interference: bool = True) -> DropResult:
    """Deploy, associate, and evaluate the typical user for drop ``drop``.

    ``interference=False`` evaluates the same realization with every
    interferer removed.
    """
    streams = drop_streams(config.rng_seed, drop)
    spec = ScenarioSpec.from_config(config)
    model = config.channel_model
    p = config.model_params

    dep = geometry.deploy(config, streams["deploy"])
    loss, state = _large_scale(dep, model, p, streams)
    assoc = geometry.associate(dep, loss)

    t = dep.typical_ue
    s = int(assoc[t])
    if s == geometry.UNASSOCIATED:
        return DropResult(drop, -math.inf, 0.0, 0, LinkState.Outage)
    load = geometry.cell_load(s, assoc)

    n_bs = dep.n_bs
    if model.uses_mimo:
        gain = _mimo_gains(config, streams, s, n_bs)
    else:
        gain = _rect_gains(config, streams, s, n_bs)

    interferers = interferer_mask(dep, s, spec)
    if not interference:
        interferers[:] = False

    noise = noise_power_dbm(spec.bandwidth_hz, config.noise_figure_db)
    g_s = float(gain[s])
    if g_s <= 0.0:
        # nothing reaches the user through the serving beam
        return DropResult(drop, -math.inf, 0.0, load, LinkState(int(state[s])))
    ratio = sinr(config.p_tx_dbm, float(loss[t, s]), g_s, loss[t, interferers], gain[interferers], noise)
    rate = rate_of(ratio, spec.bandwidth_hz, load, config.half_duplex_factor)
    return DropResult(drop, float(lin2db(ratio)), rate, load, LinkState(int(state[s])))


def _run_chunk(args) -> list[DropResult]:
    config, drops = args
    return [run_drop(config, d) for d in drops]


def run_campaign(config: SimulationConfig, workers: int = 1, chunk: int = 250) -> list[DropResult]:
    """``config.num_drops`` drops in drop order. Output does not depend on
    ``workers``: every drop owns its random streams."""
    n = config.num_drops
    if workers <= 1 or n <= chunk:
        return [run_drop(config, d) for d in range(n)]
    jobs = [(config, range(i, min(i + chunk, n))) for i in range(0, n, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return [r for part in ex.map(_run_chunk, jobs) for r in part]
