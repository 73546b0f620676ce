import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risma.model import (ConfigError, SystemConfig, dbm_to_watt, effective_channel,
                         field_response_matrix, path_loss, rate_from_sinr, sample_scenario,
                         sinr, sinr_from_channels, sum_rate)



def test_path_loss_reference_points():
    assert path_loss(1.0, 1.0, 0.0) == pytest.approx(10 ** -9.25, rel=1e-12)
    # 92.5 + 20log10(2) + 20log10(0.05) - 10
    expected = 92.5 + 20 * math.log10(2) + 20 * math.log10(0.05) - 10
    assert expected == pytest.approx(62.5, abs=1e-12)
    assert -10 * math.log10(path_loss(0.05, 2.0, 10.0)) == pytest.approx(62.5, abs=1e-9)
    assert -10 * math.log10(path_loss(0.1, 2.0, 10.0)) == pytest.approx(68.5206, abs=1e-4)


@pytest.mark.parametrize("d,f", [(0.0, 2.0), (-1.0, 2.0), (1.0, 0.0)])
def test_path_loss_rejects_nonpositive(d, f):
    with pytest.raises(ValueError):
        path_loss(d, f, 0.0)


def test_unit_conversions(config):
    assert dbm_to_watt(-100) == pytest.approx(1e-13, rel=1e-12)
    assert dbm_to_watt(10) == pytest.approx(0.01, rel=1e-12)
    assert config.noise_power == pytest.approx(1e-13, rel=1e-12)
    assert config.wavelength == pytest.approx(299792458.0 / 2e9)


@pytest.mark.parametrize("changes", [
    dict(n_antennas=0), dict(n_users=0), dict(ris_mode="foo"), dict(antenna_mode="x"),
    dict(ris_mode="dps", dps_levels=1), dict(min_dist_lambda=3.0, region_lambda=2.0),
    dict(carrier_ghz=0.0), dict(gr_model="other"),
])
def test_config_validation(changes):
    with pytest.raises(ConfigError):
        SystemConfig(**changes)


def test_scenario_shapes_and_determinism(config):
    s1 = sample_scenario(config, 11)
    s2 = sample_scenario(config, 11)
    assert s1.path_angles.shape == (4, 2)
    assert s1.nu.shape == (4,)
    assert s1.G_r.shape == (4, 16)
    assert s1.h.shape == (4, 16)
    for name in ("path_angles", "ris_angles", "nu", "G_r", "h"):
        assert np.array_equal(getattr(s1, name), getattr(s2, name))
    assert not np.array_equal(s1.h, sample_scenario(config, 12).h)
    assert np.all((s1.path_angles >= 0) & (s1.path_angles <= np.pi))
    assert np.allclose(np.abs(s1.G_r), 1.0, atol=1e-12)
    assert np.all((s1.user_dist_m >= 90) & (s1.user_dist_m <= 110))


def test_gaussian_gr_option(config):
    s = sample_scenario(config.replace(gr_model="gaussian"), 0)
    assert s.G_r.shape == (4, 16)
    assert not np.allclose(np.abs(s.G_r), 1.0)


def test_path_response_variance_matches_path_loss():
    config = SystemConfig(n_paths=100, n_ris=1, n_users=1)
    nu = np.concatenate([sample_scenario(config, s).nu for s in range(1000)])
    target = path_loss(0.05, 2.0, 10.0) / 100
    assert nu.size == 100_000
    assert np.mean(np.abs(nu) ** 2) == pytest.approx(target, rel=0.02)


def test_field_response_hand_values():
    lam = 0.15
    angles = np.array([[0.3, 1.2], [2.0, 0.4]])
    assert np.allclose(field_response_matrix(np.zeros((3, 2)), angles, lam), 1.0)
    G = field_response_matrix([[lam / 4, 0.0]], [[np.pi / 2, 0.0]], lam)
    assert G[0, 0] == pytest.approx(1j, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6),
       st.lists(st.floats(0, np.pi), min_size=4, max_size=4))
def test_field_response_unit_modulus(coords, angles):
    T = np.reshape(coords, (3, 2))
    G = field_response_matrix(T, np.reshape(angles, (2, 2)), 0.15)
    assert np.allclose(np.abs(G), 1.0, atol=1e-12)


def test_effective_channel_zero_phases(instance):
    config, scenario, state = instance
    H = effective_channel(scenario, np.zeros(16, complex), state.T)
    assert np.all(H == 0)


def test_effective_channel_scalar_hand_product():
    config = SystemConfig(n_antennas=1, n_users=1, n_ris=1, n_paths=1)
    s = sample_scenario(config, 4)
    T = np.array([[0.03, 0.07]])
    psi = np.exp(0.7j)
    phi = np.array([np.conj(psi)])  # phi stacks diag(Phi^H)
    g = field_response_matrix(T, s.path_angles, s.wavelength)[0, 0]
    expected = np.conj(g) * np.conj(s.nu[0]) * s.G_r[0, 0] * np.conj(psi) * s.h[0, 0]
    assert effective_channel(s, phi, T)[0, 0] == pytest.approx(expected, rel=1e-12)


def test_effective_channel_dense_oracle(instance):
    config, s, state = instance
    G_t = np.zeros((s.n_paths, 4), complex)
    for l in range(s.n_paths):
        th, az = s.path_angles[l]
        rho = np.array([np.sin(th) * np.cos(az), np.cos(th)])
        for n in range(4):
            G_t[l, n] = np.exp(1j * 2 * np.pi / s.wavelength * state.T[n] @ rho)
    G = G_t.conj().T @ np.diag(s.nu).conj().T @ s.G_r
    Phi = np.diag(state.phi.conj())
    H = effective_channel(s, state.phi, state.T)
    for k in range(4):
        assert np.allclose(H[k], G @ Phi.conj().T @ s.h[k], rtol=1e-12, atol=0)


def test_sinr_edge_cases(instance):
    config, s, state = instance
    noise = config.noise_power
    assert sinr(0, np.zeros((4, 4)), state.phi, state.T, s, noise) == 0.0
    assert sum_rate(np.zeros((4, 4)), state.phi, state.T, s, noise) == 0.0
    H = effective_channel(s, state.phi, state.T)[:1]
    w = state.W[:, :1]
    assert sinr_from_channels(H, w, noise)[0] == pytest.approx(
        abs(H[0].conj() @ w[:, 0]) ** 2 / noise, rel=1e-12)


def test_sinr_direct_formula(instance):
    config, s, state = instance
    noise = config.noise_power
    Phi = np.diag(state.phi.conj())
    G_t = field_response_matrix(state.T, s.path_angles, s.wavelength)
    for k in range(4):
        amp = [s.h[k].conj() @ Phi @ s.G_r.conj().T @ np.diag(s.nu) @ G_t @ state.W[:, i]
               for i in range(4)]
        p = np.abs(amp) ** 2
        expected = p[k] / (p.sum() - p[k] + noise)
        assert sinr(k, state.W, state.phi, state.T, s, noise) == pytest.approx(expected, rel=1e-10)
    gammas = [sinr(k, state.W, state.phi, state.T, s, noise) for k in range(4)]
    assert sum_rate(state.W, state.phi, state.T, s, noise) == pytest.approx(
        sum(np.log2(1 + g) for g in gammas), abs=1e-12)


def test_rate_trivial_values():
    assert rate_from_sinr([0.0, 0.0]) == 0.0
    assert rate_from_sinr([1.0, 1.0]) == 2.0


def test_sinr_scaling(instance):
    config, s, state = instance
    noise = config.noise_power
    H = effective_channel(s, state.phi, state.T)
    X = np.abs(H.conj() @ state.W) ** 2
    for c in (0.5, 3.0):
        got = sinr_from_channels(H, c * state.W, noise)
        sig = c ** 2 * np.diag(X)
        assert np.allclose(got, sig / (c ** 2 * (X.sum(1) - np.diag(X)) + noise), rtol=1e-12)


def test_rate_monotone_in_signal(instance):
    config, s, state = instance
    rng = np.random.default_rng(3)
    H = effective_channel(s, state.phi, state.T)
    P = np.abs(H.conj() @ state.W) ** 2
    noise = config.noise_power

    def rate(P):
        sig = np.diag(P)
        return rate_from_sinr(sig / (P.sum(1) - sig + noise))

    base = rate(P)
    for _ in range(20):
        k = rng.integers(4)
        Q = P.copy()
        Q[k, k] *= 1 + rng.uniform(0, 2)  # only user k's numerator grows
        assert rate(Q) >= base
