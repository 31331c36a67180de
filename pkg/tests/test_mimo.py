import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmshare.config import ChannelModel, ModelParams
from mmshare.mimo import (AllClustersSuppressed, BeamPair, ClusterSet, back_lobe_filter, beamforming_vectors,
                          bf_gain, channel_matrix, cluster_powers, gain_pattern, link_gains, rect_alignment_probability,
                          rect_gain, sample_cluster_set, sample_cluster_sets, select_panel, small_scale_gain,
                          spatial_signature, steering_beam, wrap_angle)

P = ModelParams()
M2, M3 = ChannelModel.Model2, ChannelModel.Model3
TX, RX = (8, 8), (4, 4)


def clusters(specs, phase=0.0):
    """Single-link ClusterSet with one subpath per cluster and no angular spread.
    ``specs`` is a list of (aod_az, aod_el, aoa_az, aoa_el, power)."""
    a = np.array(specs, dtype=float).reshape(-1, 5)
    k = len(a)
    return ClusterSet(
        n_links=1, cluster_link=np.zeros(k, dtype=int), n_subpaths=np.ones(k, dtype=int),
        aod_az=a[:, 0], aod_el=a[:, 1], aoa_az=a[:, 2], aoa_el=a[:, 3],
        subpath_cluster=np.arange(k), subpath_power=a[:, 4], subpath_phase=np.full(k, phase),
        sub_aod_az=a[:, 0], sub_aod_el=a[:, 1], sub_aoa_az=a[:, 2], sub_aoa_el=a[:, 3],
    )


# ---------------------------------------------------------------- clusters

def test_zero_poisson_draw_gives_one_cluster(rng):
    cs = sample_cluster_sets(ModelParams(cluster_mean=1e-12), rng, 1000)
    assert np.all(cs.n_clusters == 1)


def test_singleton_cluster_has_unit_power(rng):
    p = ModelParams(cluster_mean=1e-12)
    for _ in range(50):
        cs = sample_cluster_set(p, rng)
        if cs.n_subpaths[0] == 1:
            assert cs.subpath_power[0] == pytest.approx(1.0, abs=1e-15)
            return
    pytest.fail("no single-subpath draw in 50 tries")


def test_power_spread_example():
    raw = cluster_powers(np.array([0.5, 0.25]), np.zeros(2), np.zeros(2), np.ones(2), 2.8)
    assert raw[0] / raw[1] == pytest.approx(2 ** 1.8, rel=1e-12)
    norm = raw / raw.sum()
    assert norm == pytest.approx([0.7769, 0.2231], abs=1e-4)


def test_power_divides_by_subpath_count():
    raw = cluster_powers(np.array([0.5, 0.5]), np.zeros(2), np.zeros(2), np.array([1, 4]), 2.8)
    assert raw[0] / raw[1] == pytest.approx(4.0)


def test_subpath_counts_in_range_and_powers_normalized(rng):
    cs = sample_cluster_sets(P, rng, 10_000)
    assert cs.n_subpaths.min() >= 1 and cs.n_subpaths.max() <= 10
    assert set(np.unique(cs.n_subpaths)) == set(range(1, 11))
    total = np.bincount(cs.subpath_link, weights=cs.subpath_power, minlength=10_000)
    assert np.max(np.abs(total - 1.0)) < 1e-9
    assert np.all(cs.n_clusters >= 1)


def test_mean_cluster_count(rng):
    lam = 1.8
    analytic = lam + math.exp(-lam)  # E[max(1, Poisson)]
    assert analytic == pytest.approx(1.965, abs=1e-3)
    k = sample_cluster_sets(P, rng, 100_000).n_clusters
    assert k.mean() == pytest.approx(analytic, rel=0.02)


def test_angle_ranges(rng):
    cs = sample_cluster_sets(P, rng, 5000)
    assert np.all((cs.aod_az >= 0) & (cs.aod_az < 2 * np.pi))
    assert np.all(np.abs(cs.aoa_el) <= np.deg2rad(30))
    off = wrap_angle(cs.sub_aod_az - cs.aod_az[cs.subpath_cluster])
    assert np.all(np.abs(off) <= np.deg2rad(10) + 1e-12)
    assert np.all(np.abs(cs.sub_aoa_el - cs.aoa_el[cs.subpath_cluster]) <= np.deg2rad(5) + 1e-12)


# ---------------------------------------------------------------- steering

def test_boresight_signature_all_ones():
    assert np.allclose(spatial_signature(TX, 0.0, 0.0), np.ones(64))


def test_single_element_signature():
    assert np.allclose(spatial_signature((1, 1), 1.1, -0.3), [1.0])


@given(st.floats(-np.pi, np.pi), st.floats(-1.2, 1.2), st.integers(1, 6), st.integers(1, 6))
def test_signature_elementwise_formula(az, el, nh, nv):
    u = spatial_signature((nh, nv), az, el)
    ref = np.array([np.exp(1j * np.pi * (p * np.sin(az) * np.cos(el) + q * np.sin(el)))
                    for p in range(nh) for q in range(nv)])
    assert np.allclose(u, ref)
    assert np.allclose(np.abs(u), 1.0)
    assert abs(np.vdot(u, u)) / (nh * nv) == pytest.approx(1.0)


def test_front_back_ambiguity():
    # a half-wavelength planar array cannot tell az from pi - az
    assert np.allclose(spatial_signature(TX, 0.3, 0.1), spatial_signature(TX, np.pi - 0.3, 0.1))


# ---------------------------------------------------------------- small-scale gain

def test_small_scale_gain_values():
    assert small_scale_gain(1.0, 0.0) == pytest.approx(1 + 0j)
    psi = np.linspace(0, 2 * np.pi, 17)
    assert np.abs(small_scale_gain(np.full(17, 0.3), psi)) ** 2 == pytest.approx(np.full(17, 0.3))
    # static snapshot: Doppler factor is exactly one at t = 0
    assert small_scale_gain(0.5, 1.0, doppler_hz=1e3, motion_angle=0.4) == small_scale_gain(0.5, 1.0)


def test_small_scale_energy_sums_to_one(rng):
    cs = sample_cluster_set(P, rng)
    assert np.sum(np.abs(cs.gains()) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_small_scale_gain_rejects_bad_power():
    with pytest.raises(ValueError):
        small_scale_gain(1.5, 0.0)


# ---------------------------------------------------------------- channel matrix

def test_single_path_matrix_is_rank_one():
    cs = clusters([(0.4, 0.1, -0.7, 0.2, 1.0)])
    H = channel_matrix(cs, TX, RX)
    assert H.shape == (16, 64)
    assert np.linalg.matrix_rank(H) == 1
    assert np.sum(np.abs(H) ** 2) == pytest.approx(64 * 16, rel=1e-12)
    assert np.allclose(H, np.outer(spatial_signature(RX, -0.7, 0.2), spatial_signature(TX, 0.4, 0.1).conj()))


def test_model3_back_cluster_removed():
    cs = clusters([(np.pi, 0.0, 0.3, 0.0, 1.0)])
    assert np.all(channel_matrix(cs, TX, RX, M3, tx_boresight=0.0) == 0)
    assert np.any(channel_matrix(cs, TX, RX, M2, tx_boresight=0.0) != 0)


def test_model3_equals_model2_without_back_content(rng):
    cs = sample_cluster_set(ModelParams(subpath_az_spread_deg=0), rng)
    bore = float(np.mean(cs.aod_az))
    if np.any(np.abs(wrap_angle(cs.aod_az - bore)) > np.pi / 2):
        cs = cs.select(np.abs(wrap_angle(cs.aod_az - bore)) <= np.pi / 2)
    assert np.array_equal(channel_matrix(cs, TX, RX, M3, bore), channel_matrix(cs, TX, RX, M2, bore))


def test_channel_matrix_needs_single_link(rng):
    with pytest.raises(ValueError):
        channel_matrix(sample_cluster_sets(P, rng, 2), TX, RX)


# ---------------------------------------------------------------- beams and gain

def test_beams_are_unit_norm(rng):
    pair = beamforming_vectors(sample_cluster_set(P, rng), TX, RX)
    assert np.linalg.norm(pair.w_tx) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(pair.w_rx) == pytest.approx(1.0, abs=1e-12)


def test_matched_single_path_gain():
    cs = clusters([(0.5, 0.2, 1.3, -0.1, 1.0)])
    pair = beamforming_vectors(cs, TX, RX)
    assert abs(np.vdot(spatial_signature(TX, 0.5, 0.2), pair.w_tx)) ** 2 == pytest.approx(64, rel=1e-9)
    g = bf_gain(channel_matrix(cs, TX, RX), pair)
    assert g == pytest.approx(1024, rel=1e-9)
    assert 10 * math.log10(g) == pytest.approx(30.1, abs=0.01)


def test_steering_follows_strongest_cluster():
    cs = clusters([(0.2, 0.0, 0.1, 0.0, 0.2), (1.0, 0.1, -0.5, 0.05, 0.8)])
    pair = beamforming_vectors(cs, TX, RX)
    assert np.allclose(pair.w_tx, steering_beam(TX, 1.0, 0.1))
    assert np.allclose(pair.w_rx, steering_beam(RX, -0.5, 0.05))


def test_strongest_usable_cluster_under_model3():
    cs = clusters([(np.pi, 0.0, 0.1, 0.0, 0.8), (0.3, 0.0, -0.5, 0.0, 0.2)])
    pair = beamforming_vectors(cs, TX, RX, M3, tx_boresight=0.0)
    assert np.allclose(pair.w_tx, steering_beam(TX, 0.3, 0.0))


def test_all_back_lobe_is_unusable():
    cs = clusters([(np.pi, 0.0, 0.1, 0.0, 0.6), (2.5, 0.0, 0.2, 0.0, 0.4)])
    with pytest.raises(AllClustersSuppressed):
        beamforming_vectors(cs, TX, RX, M3, tx_boresight=0.0)


def test_zero_channel_zero_gain():
    pair = BeamPair(steering_beam(TX, 0.1, 0.0), steering_beam(RX, 0.2, 0.0))
    assert bf_gain(np.zeros((16, 64)), pair) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 5))
def test_gain_bounded_by_spectral_norm(seed, nr, nt):
    r = np.random.default_rng(seed)
    H = r.normal(size=(nr, nt)) + 1j * r.normal(size=(nr, nt))
    w_t = r.normal(size=nt) + 1j * r.normal(size=nt)
    w_r = r.normal(size=nr) + 1j * r.normal(size=nr)
    pair = BeamPair(w_t / np.linalg.norm(w_t), w_r / np.linalg.norm(w_r))
    smax = np.linalg.svd(H, compute_uv=False)[0]
    assert bf_gain(H, pair) <= smax ** 2 * (1 + 1e-12)


@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_gain_phase_invariant(a, b):
    r = np.random.default_rng(7)
    cs = sample_cluster_set(P, r)
    H = channel_matrix(cs, TX, RX)
    pair = beamforming_vectors(cs, TX, RX)
    rot = BeamPair(pair.w_tx * np.exp(1j * a), pair.w_rx * np.exp(1j * b))
    assert bf_gain(H, rot) == pytest.approx(bf_gain(H, pair), rel=1e-9)


@pytest.mark.parametrize("model", [M2, M3])
def test_batched_gains_match_matrix_path(rng, model):
    n = 40
    cs = sample_cluster_sets(P, rng, n)
    bore = rng.uniform(0, 2 * np.pi, n)
    t_az, t_el = rng.uniform(0, 2 * np.pi, n), rng.uniform(-0.5, 0.5, n)
    r_az, r_el = 0.7, -0.2
    fast = link_gains(cs, TX, RX, bore, (t_az, t_el), (r_az, r_el), model)
    for i in range(n):
        one = cs.select(cs.cluster_link == i)
        one = ClusterSet(**{**one.__dict__, "n_links": 1, "cluster_link": np.zeros(len(one.cluster_link), int)})
        H = channel_matrix(one, TX, RX, model, tx_boresight=bore[i])
        pair = BeamPair(steering_beam(TX, t_az[i] - bore[i], t_el[i]), steering_beam(RX, r_az, r_el))
        assert fast[i] == pytest.approx(bf_gain(H, pair), rel=1e-9, abs=1e-15)


def test_model3_reduces_interference_in_distribution(rng):
    # same links, same beams; only the reflector differs
    n = 20_000
    cs = sample_cluster_sets(P, rng, n)
    orient = rng.uniform(0, 2 * np.pi, n)
    t_az, t_el = rng.uniform(0, 2 * np.pi, n), rng.uniform(-0.5, 0.5, n)
    bore = select_panel(orient, t_az, P.bs_panels)
    g2 = link_gains(cs, TX, RX, bore, (t_az, t_el), (0.0, 0.0), M2)
    g3 = link_gains(cs, TX, RX, bore, (t_az, t_el), (0.0, 0.0), M3)
    assert g3.mean() < g2.mean()
    front = ~np.isin(np.arange(n), cs.cluster_link[np.abs(wrap_angle(cs.aod_az - bore[cs.cluster_link])) > np.pi / 2])
    assert front.any()
    assert np.array_equal(g3[front], g2[front])


def test_back_lobe_filter_is_noop_for_model2(rng):
    cs = sample_cluster_sets(P, rng, 10)
    assert back_lobe_filter(cs, 0.0, M2) is cs


@given(st.floats(0, 2 * np.pi), st.floats(-10, 10))
def test_selected_panel_faces_beam(orient, beam):
    b = select_panel(orient, beam, 3)
    assert abs(wrap_angle(beam - b)) <= np.pi / 3 + 1e-9


# ---------------------------------------------------------------- rect model

@pytest.mark.parametrize("tx, rx, expected", [(True, True, 26.0), (False, False, -4.0), (True, False, 11.0),
                                              (False, True, 11.0)])
def test_rect_gain(tx, rx, expected):
    assert rect_gain(tx, rx, P) == expected


def test_rect_alignment_probability():
    assert rect_alignment_probability(P) == pytest.approx(56 / 360)


def test_gain_pattern_peak_is_matched_bound():
    g = gain_pattern(TX, RX, np.deg2rad(np.linspace(-180, 180, 721)))
    assert g.max() == pytest.approx(10 * math.log10(1024), abs=1e-9)
    # back lobe: mirror of boresight carries the same peak
    assert g[0] == pytest.approx(g.max())
