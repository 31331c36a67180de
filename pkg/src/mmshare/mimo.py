"""Cluster/subpath MIMO channel, UPA steering vectors and beamforming gain.

Angles are in radians. Horizontal angles (azimuth) are measured in the
global frame unless a function says otherwise; an array with boresight
``b`` sees a ray at azimuth ``az`` under the relative angle ``az - b``.
A half-wavelength UPA only resolves ``sin(az - b)``, so a ray and its mirror
image behind the array are indistinguishable: the back lobe. A reflector
behind the base-station array (Model 3) removes every cluster departing
into the back half-space of the transmitting panel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ChannelModel, ModelParams
from .units import db2lin


class AllClustersSuppressed(ValueError):
    """Every cluster of a link lies behind the array; the link is unusable."""


def wrap_angle(a):
    """Wrap to [-pi, pi)."""
    return (np.asarray(a) + np.pi) % (2.0 * np.pi) - np.pi


def in_back_half(az, boresight):
    return np.abs(wrap_angle(np.asarray(az) - boresight)) > np.pi / 2


def spatial_signature(dims, az, el):
    """Steering vector of a half-wavelength UPA with ``dims = (n_h, n_v)``.

    Element ``(p, q)`` carries phase ``pi (p sin(az) cos(el) + q sin(el))``
    where ``az`` is relative to boresight. The result is the Kronecker
    product of the horizontal and vertical progressions, length
    ``n_h * n_v``, with unit-modulus entries. Array-valued angles return
    one vector per angle along a trailing axis.
    """
    n_h, n_v = dims
    az = np.asarray(az, dtype=float)
    el = np.asarray(el, dtype=float)
    s = (np.sin(az) * np.cos(el))[..., None]
    t = np.sin(el)[..., None]
    h = np.exp(1j * np.pi * np.arange(n_h) * s)
    v = np.exp(1j * np.pi * np.arange(n_v) * t)
    return (h[..., :, None] * v[..., None, :]).reshape(*h.shape[:-1], n_h * n_v)


def _array_factor(dims, az, el, az0, el0):
    """``u(az0, el0)^H u(az, el) / sqrt(n)`` without building the vectors.

    This is the response of a unit-norm beam steered to ``(az0, el0)`` to a
    ray at ``(az, el)``; all angles relative to boresight, broadcastable.
    """
    n_h, n_v = dims
    ds = np.sin(az) * np.cos(el) - np.sin(az0) * np.cos(el0)
    dt = np.sin(el) - np.sin(el0)
    h = np.exp(1j * np.pi * np.arange(n_h) * np.asarray(ds)[..., None]).sum(-1)
    v = np.exp(1j * np.pi * np.arange(n_v) * np.asarray(dt)[..., None]).sum(-1)
    return h * v / np.sqrt(n_h * n_v)


@dataclass(frozen=True)
class ClusterSet:
    """Clusters and subpaths for one or more links, stored flat.

    Cluster arrays have one entry per cluster (all links concatenated);
    subpath arrays one entry per subpath. ``subpath_power`` sums to one per
    link. The Doppler terms are kept for completeness but evaluate to one
    at the static snapshot time ``t = 0``.
    """

    n_links: int
    cluster_link: np.ndarray
    n_subpaths: np.ndarray
    aod_az: np.ndarray
    aod_el: np.ndarray
    aoa_az: np.ndarray
    aoa_el: np.ndarray
    subpath_cluster: np.ndarray
    subpath_power: np.ndarray
    subpath_phase: np.ndarray
    sub_aod_az: np.ndarray
    sub_aod_el: np.ndarray
    sub_aoa_az: np.ndarray
    sub_aoa_el: np.ndarray
    max_doppler_hz: float = 0.0
    snapshot_time_s: float = 0.0

    @property
    def n_clusters(self) -> np.ndarray:
        return np.bincount(self.cluster_link, minlength=self.n_links)

    @property
    def cluster_power(self) -> np.ndarray:
        return np.bincount(self.subpath_cluster, weights=self.subpath_power,
                           minlength=len(self.cluster_link))

    @property
    def subpath_link(self) -> np.ndarray:
        return self.cluster_link[self.subpath_cluster]

    def gains(self) -> np.ndarray:
        return small_scale_gain(self.subpath_power, self.subpath_phase)

    def select(self, keep_cluster: np.ndarray) -> "ClusterSet":
        """Drop clusters (and their subpaths) where ``keep_cluster`` is False.
        Powers are not renormalized: removed energy is lost."""
        keep_cluster = np.asarray(keep_cluster, dtype=bool)
        new_index = np.cumsum(keep_cluster) - 1
        keep_sub = keep_cluster[self.subpath_cluster]
        return ClusterSet(
            n_links=self.n_links,
            cluster_link=self.cluster_link[keep_cluster],
            n_subpaths=self.n_subpaths[keep_cluster],
            aod_az=self.aod_az[keep_cluster], aod_el=self.aod_el[keep_cluster],
            aoa_az=self.aoa_az[keep_cluster], aoa_el=self.aoa_el[keep_cluster],
            subpath_cluster=new_index[self.subpath_cluster[keep_sub]],
            subpath_power=self.subpath_power[keep_sub],
            subpath_phase=self.subpath_phase[keep_sub],
            sub_aod_az=self.sub_aod_az[keep_sub], sub_aod_el=self.sub_aod_el[keep_sub],
            sub_aoa_az=self.sub_aoa_az[keep_sub], sub_aoa_el=self.sub_aoa_el[keep_sub],
            max_doppler_hz=self.max_doppler_hz, snapshot_time_s=self.snapshot_time_s,
        )


def cluster_center(params: ModelParams, rng: np.random.Generator, size=None):
    """Central (azimuth, elevation) of a cluster: azimuth uniform on the
    circle, elevation uniform within +-cluster_el_max_deg."""
    el_max = np.deg2rad(params.cluster_el_max_deg)
    az = rng.uniform(0.0, 2.0 * np.pi, size)
    el = rng.uniform(-el_max, el_max, size)
    return az, el


def cluster_powers(u, v, z_db, n_subpaths, r_tau):
    """Unnormalized per-subpath power of each cluster,
    ``U^(r_tau - 1) 10^(-0.1 Z + V) / L``."""
    return np.power(u, r_tau - 1.0) * np.power(10.0, -0.1 * np.asarray(z_db) + v) / n_subpaths


def sample_cluster_sets(params: ModelParams, rng: np.random.Generator, n_links: int) -> ClusterSet:
    """Independent cluster sets for ``n_links`` links, drawn in one batch."""
    if not params.cluster_mean > 0:
        raise ValueError("cluster_mean must be positive")
    k = np.maximum(1, rng.poisson(params.cluster_mean, n_links))
    n_cl = int(k.sum())
    cluster_link = np.repeat(np.arange(n_links), k)
    n_sub = rng.integers(1, 11, n_cl)
    u = rng.random(n_cl)
    v = rng.uniform(0.0, 0.6, n_cl)
    z = rng.normal(0.0, params.zeta_db, n_cl)
    aod_az, aod_el = cluster_center(params, rng, n_cl)
    aoa_az, aoa_el = cluster_center(params, rng, n_cl)

    n_s = int(n_sub.sum())
    sub_cluster = np.repeat(np.arange(n_cl), n_sub)
    daz = np.deg2rad(params.subpath_az_spread_deg)
    delv = np.deg2rad(params.subpath_el_spread_deg)
    offs = rng.uniform(-1.0, 1.0, (4, n_s)) * np.array([daz, delv, daz, delv])[:, None]
    phase = rng.uniform(0.0, 2.0 * np.pi, n_s)

    p_sub = cluster_powers(u, v, z, n_sub, params.r_tau)[sub_cluster]
    link_total = np.bincount(cluster_link[sub_cluster], weights=p_sub, minlength=n_links)
    p_sub = p_sub / link_total[cluster_link[sub_cluster]]

    return ClusterSet(
        n_links=n_links, cluster_link=cluster_link, n_subpaths=n_sub,
        aod_az=aod_az, aod_el=aod_el, aoa_az=aoa_az, aoa_el=aoa_el,
        subpath_cluster=sub_cluster, subpath_power=p_sub, subpath_phase=phase,
        sub_aod_az=aod_az[sub_cluster] + offs[0], sub_aod_el=aod_el[sub_cluster] + offs[1],
        sub_aoa_az=aoa_az[sub_cluster] + offs[2], sub_aoa_el=aoa_el[sub_cluster] + offs[3],
    )


def sample_cluster_set(params: ModelParams, rng: np.random.Generator) -> ClusterSet:
    return sample_cluster_sets(params, rng, 1)


def small_scale_gain(power, phase, doppler_hz=0.0, motion_angle=0.0, t=0.0):
    """Complex subpath gain ``sqrt(P) e^{j psi} e^{j 2 pi f_d cos(omega) t}``.

    The uniform phase ``psi`` stands in for the delay term at the carrier.
    """
    power = np.asarray(power, dtype=float)
    if np.any((power < 0) | (power > 1)):
        raise ValueError("subpath power must lie in [0, 1]")
    doppler = np.exp(2j * np.pi * doppler_hz * np.cos(motion_angle) * t)
    return np.sqrt(power) * np.exp(1j * np.asarray(phase)) * doppler


def back_lobe_filter(cs: ClusterSet, tx_boresight, model: ChannelModel) -> ClusterSet:
    """Remove clusters departing into the back half of the transmit panel.

    ``tx_boresight`` is a scalar or one value per link. Only Model 3 has a
    reflector; other models return ``cs`` unchanged.
    """
    if model is not ChannelModel.Model3:
        return cs
    b = np.broadcast_to(np.asarray(tx_boresight, dtype=float), (cs.n_links,))
    back = in_back_half(cs.aod_az, b[cs.cluster_link])
    if not back.any():
        return cs
    return cs.select(~back)


def channel_matrix(cs: ClusterSet, tx_dims, rx_dims, model: ChannelModel = ChannelModel.Model2,
                   tx_boresight: float = 0.0, rx_boresight: float = 0.0) -> np.ndarray:
    """Narrowband ``n_rx x n_tx`` channel of a single-link cluster set."""
    if cs.n_links != 1:
        raise ValueError(f"channel_matrix needs a single-link ClusterSet, got {cs.n_links} links")
    cs = back_lobe_filter(cs, tx_boresight, model)
    u_rx = spatial_signature(rx_dims, cs.sub_aoa_az - rx_boresight, cs.sub_aoa_el)
    u_tx = spatial_signature(tx_dims, cs.sub_aod_az - tx_boresight, cs.sub_aod_el)
    g = cs.gains()
    return np.einsum("s,sr,st->rt", g, u_rx, u_tx.conj())


@dataclass(frozen=True)
class BeamPair:
    w_tx: np.ndarray
    w_rx: np.ndarray


def steering_beam(dims, az, el) -> np.ndarray:
    """Unit-norm beam matched to direction ``(az, el)`` (relative to boresight)."""
    u = spatial_signature(dims, az, el)
    return u / np.sqrt(u.shape[-1])


def strongest_cluster(cs: ClusterSet) -> np.ndarray:
    """Index of the highest-power cluster of each link (-1 if a link has none)."""
    p = cs.cluster_power
    best = np.full(cs.n_links, -1)
    if len(p):
        order = np.lexsort((-p, cs.cluster_link))
        first = np.ones(len(order), dtype=bool)
        first[1:] = cs.cluster_link[order][1:] != cs.cluster_link[order][:-1]
        best[cs.cluster_link[order][first]] = order[first]
    return best


def beamforming_vectors(cs: ClusterSet, tx_dims, rx_dims, model: ChannelModel = ChannelModel.Model2,
                        tx_boresight: float = 0.0, rx_boresight: float = 0.0) -> BeamPair:
    """Steer both ends at the central AoD/AoA of the strongest usable cluster."""
    if cs.n_links != 1:
        raise ValueError("beamforming_vectors needs a single-link ClusterSet")
    usable = back_lobe_filter(cs, tx_boresight, model)
    k = strongest_cluster(usable)[0]
    if k < 0:
        raise AllClustersSuppressed("all clusters lie behind the transmit array")
    return BeamPair(
        w_tx=steering_beam(tx_dims, usable.aod_az[k] - tx_boresight, usable.aod_el[k]),
        w_rx=steering_beam(rx_dims, usable.aoa_az[k] - rx_boresight, usable.aoa_el[k]),
    )


def bf_gain(H, pair: BeamPair) -> float:
    """``|w_rx^H H w_tx|^2``."""
    return float(np.abs(pair.w_rx.conj() @ np.asarray(H) @ pair.w_tx) ** 2)


def link_gains(cs: ClusterSet, tx_dims, rx_dims, tx_boresight, tx_beam, rx_beam,
               model: ChannelModel, rx_boresight: float = 0.0) -> np.ndarray:
    """Beamforming gain of every link in a batched ClusterSet.

    Equivalent to ``bf_gain(channel_matrix(...), beams)`` per link, computed
    from per-subpath array factors instead of full matrices.
    ``tx_boresight`` and ``tx_beam = (az, el)`` (global azimuth) are per link;
    ``rx_beam`` is one ``(az, el)`` shared by all links (a single receiver)
    or per link.
    """
    cs = back_lobe_filter(cs, tx_boresight, model)
    lk = cs.subpath_link
    tb = np.broadcast_to(np.asarray(tx_boresight, dtype=float), (cs.n_links,))[lk]
    t_az = np.broadcast_to(np.asarray(tx_beam[0], dtype=float), (cs.n_links,))[lk]
    t_el = np.broadcast_to(np.asarray(tx_beam[1], dtype=float), (cs.n_links,))[lk]
    r_az = np.broadcast_to(np.asarray(rx_beam[0], dtype=float), (cs.n_links,))[lk]
    r_el = np.broadcast_to(np.asarray(rx_beam[1], dtype=float), (cs.n_links,))[lk]
    # w_rx^H u_rx and u_tx^H w_tx
    a_rx = _array_factor(rx_dims, cs.sub_aoa_az - rx_boresight, cs.sub_aoa_el, r_az - rx_boresight, r_el)
    a_tx = np.conj(_array_factor(tx_dims, cs.sub_aod_az - tb, cs.sub_aod_el, t_az - tb, t_el))
    amp = cs.gains() * a_rx * a_tx
    re = np.bincount(lk, weights=amp.real, minlength=cs.n_links)
    im = np.bincount(lk, weights=amp.imag, minlength=cs.n_links)
    return re * re + im * im


def select_panel(orientation, beam_az, n_panels: int):
    """Boresight of the panel (out of ``n_panels`` evenly spaced, the first at
    ``orientation``) closest to ``beam_az``. The beam then sits within
    ``pi / n_panels`` of boresight, always in the front half-space."""
    step = 2.0 * np.pi / n_panels
    idx = np.round(wrap_angle(np.asarray(beam_az) - orientation) / step)
    return wrap_angle(orientation + idx * step)


def rect_gain(tx_aligned, rx_aligned, params: ModelParams):
    """Rect-pattern aggregate gain in dB.

    Each side contributes half of ``rect_gmax_db`` when aligned and half of
    ``rect_gmin_db`` otherwise, so the aggregate spans [G_min, G_max].
    """
    tx = np.where(tx_aligned, params.rect_gmax_db / 2, params.rect_gmin_db / 2)
    rx = np.where(rx_aligned, params.rect_gmax_db / 2, params.rect_gmin_db / 2)
    g = tx + rx
    return float(g) if np.ndim(g) == 0 else g


def rect_alignment_probability(params: ModelParams) -> float:
    """Chance that a random direction falls inside the main lobe of one side."""
    return 2.0 * params.rect_half_beamwidth_deg / 360.0


def gain_pattern(dims_tx, dims_rx, az_grid):
    """Aggregate TX+RX gain in dB when both beams point at boresight and a
    single ray sweeps azimuth (elevation 0)."""
    g_tx = np.abs(_array_factor(dims_tx, az_grid, 0.0, 0.0, 0.0)) ** 2
    g_rx = np.abs(_array_factor(dims_rx, az_grid, 0.0, 0.0, 0.0)) ** 2
    with np.errstate(divide="ignore"):
        return 10 * np.log10(g_tx * g_rx)


def rect_gain_linear(tx_aligned, rx_aligned, params: ModelParams):
    return db2lin(rect_gain(tx_aligned, rx_aligned, params))
