import numpy as np
import pytest

from risma import positions, ris
from risma.checks import fd_gradient, position_aux, random_instance
from risma.model import SystemConfig, field_response_matrix
from risma.solver import initial_positions


def _aux_and_terms(instance):
    config, s, state = instance
    aux = position_aux(config, s, state)
    return config, s, state, aux


def test_delta_has_epsilon_form(instance):
    config, s, state = instance
    a = ris.cascade_terms(s, state.T, state.W)
    alpha = np.array([0.5, 1.0, 2.0, 0.0])
    assert np.array_equal(positions.update_delta(a, state.phi, alpha, config.noise_power),
                          ris.update_epsilon(a, state.phi, alpha, config.noise_power))


def test_objective_vanishes_without_beamformer(instance):
    config, s, state = instance
    aux = positions.PositionAuxiliaries.build(s, state.phi, np.zeros((4, 4)), np.ones(4),
                                              np.ones(4))
    assert positions.position_objective(state.T, aux) == 0.0


def test_objective_expanded_oracle(instance):
    config, s, state, aux = _aux_and_terms(instance)
    G = field_response_matrix(state.T, s.path_angles, s.wavelength)
    K, L = aux.P.shape
    N = state.T.shape[0]
    total = 0.0
    for k in range(K):
        lin = sum(np.conj(aux.P[k, l]) * G[l, n] * state.W[n, k]
                  for l in range(L) for n in range(N))
        quad = sum(np.conj(aux.P[k, l]) * G[l, n] * aux.Pi[n, m] * np.conj(G[j, m]) * aux.P[k, j]
                   for l in range(L) for n in range(N) for j in range(L) for m in range(N))
        total += 2 * aux.weight[k] * np.real(lin) - np.real(quad)
    assert positions.position_objective(state.T, aux) == pytest.approx(total, rel=1e-10)


def test_objective_matches_transformed_rate(instance):
    """With delta at its optimum the position objective is tight on the weighted rate."""
    config, s, state, aux = _aux_and_terms(instance)
    a = ris.cascade_terms(s, state.T, state.W)
    alpha = aux.weight ** 2 - 1
    delta = ris.update_epsilon(a, state.phi, alpha, config.noise_power)
    f5 = positions.position_objective(state.T, aux) - config.noise_power * np.sum(np.abs(delta) ** 2)
    assert f5 == pytest.approx(ris.weighted_ratio(a, state.phi, alpha, config.noise_power),
                               rel=1e-9)


def test_gradient_matches_finite_differences(instance):
    config, s, state, aux = _aux_and_terms(instance)
    g = positions.position_gradients(state.T, aux)
    fd = fd_gradient(state.T, aux, 1e-6 * config.wavelength)
    assert np.max(np.abs(g - fd)) <= 1e-5 * np.max(np.abs(g))
    for n in range(4):
        assert np.array_equal(positions.position_gradient(state.T, n, aux), g[n])


def test_gradient_single_antenna_single_path():
    config, s, state = random_instance(3, n_antennas=1, n_paths=1)
    aux = position_aux(config, s, state)
    k0 = 2 * np.pi / config.wavelength
    c, _ = positions._coupling(state.T, aux)
    scale = k0 * np.sum(2 * aux.weight * np.abs(c[:, 0] * state.W[0]))
    # moving the lone antenna rotates every channel by one common phase, so the
    # rate is flat and with delta at its optimum so is f5
    assert np.linalg.norm(positions.position_gradients(state.T, aux)) <= 1e-9 * scale

    off = positions.PositionAuxiliaries.build(s, state.phi, state.W,
                                              np.full(4, 1e10 + 2e10j), aux.weight ** 2 - 1)
    g = positions.position_gradients(state.T, off)
    rho = s.rho[0]
    assert np.linalg.norm(g) > 0
    assert abs(g[0, 0] * rho[1] - g[0, 1] * rho[0]) <= 1e-9 * np.linalg.norm(g)
    fd = fd_gradient(state.T, off, 1e-6 * config.wavelength)
    assert np.allclose(g, fd, rtol=1e-5, atol=1e-5 * np.abs(g).max())


def test_feasibility_examples():
    config = SystemConfig(min_dist_lambda=0.5, region_lambda=2.0)
    lam = config.wavelength
    assert positions.feasible(initial_positions(config), config)
    assert not positions.feasible([[0, 0], [0.25 * lam, 0]], config)
    assert not positions.feasible([[-0.01 * lam, 0], [lam, 0]], config)
    assert not positions.feasible([[0, 0], [2.01 * lam, 0]], config)
    assert positions.feasible([[0, 0], [2 * lam, 2 * lam]], config)
    assert positions.feasible([[0, 0], [0.5 * lam, 0]], config)


def test_zero_gradient_is_a_fixed_point(instance):
    config, s, state = instance
    aux = positions.PositionAuxiliaries.build(s, state.phi, np.zeros((4, 4)), np.ones(4),
                                              np.ones(4))
    T0 = initial_positions(config)
    T, trace = positions.optimize_positions(T0, aux, config)
    assert np.array_equal(T, T0)
    assert trace[-1] == trace[0] == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_position_block_ascent_and_feasibility(seed):
    config, s, state = random_instance(seed, region_lambda=3.0)
    # a spread-out feasible start that leaves room to move
    lam = config.wavelength
    state.T = np.array([[0.4, 0.4], [2.6, 0.4], [0.4, 2.6], [2.6, 2.6]]) * lam
    aux = position_aux(config, s, state)
    T, trace = positions.optimize_positions(state.T, aux, config)
    assert positions.feasible(T, config)
    assert np.all(np.diff(trace) >= 0)
    assert trace[-1] == pytest.approx(positions.position_objective(T, aux))
    assert trace[-1] > trace[0]


def test_single_antenna_reaches_cosine_ridge():
    # one path along x: f5 = c0 + c1 cos(k0 x + const); a period fits in the region
    config = SystemConfig(n_antennas=1, n_users=1, n_paths=1, region_lambda=2.0)
    lam = config.wavelength
    aux = positions.PositionAuxiliaries(
        P=np.array([[0.8 * np.exp(0.3j)]]), Pi=np.array([[1.0 + 0j]]), W=np.array([[1.0 + 0j]]),
        weight=np.array([1.5]), rho=np.array([[1.0, 0.0]]), wavelength=lam)
    xs = np.linspace(0, 2 * lam, 4001)
    best = max(positions.position_objective([[x, lam]], aux) for x in xs)
    T, _ = positions.optimize_positions(np.array([[lam, lam]]), aux, config, q_max=200, rtol=0)
    assert positions.position_objective(T, aux) == pytest.approx(best, rel=1e-6)
