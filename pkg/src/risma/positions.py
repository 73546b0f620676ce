"""
Antenna-position block.

With ``W``, ``phi`` and the transform auxiliary ``delta`` fixed, the position
objective is

    f5(T) = sum_k 2 sqrt(1+alpha_k) Re{P_k^H G_t(T) w_k} - P_k^H G_t Pi G_t^H P_k

with ``P_k = Lambda^H G_r S_k phi delta_k`` and ``Pi = W W^H``.  Antennas are
moved one at a time by gradient ascent with a halving step size; a move is
accepted only if it keeps the layout feasible and strictly improves ``f5``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import Scenario, SystemConfig, field_response_matrix
from .ris import update_epsilon

# The delta auxiliary has exactly the form of the RIS-block epsilon.
update_delta = update_epsilon

_FEAS_RTOL = 1e-9


@dataclass(frozen=True)
class PositionAuxiliaries:
    P: np.ndarray  # (K, L)
    Pi: np.ndarray  # (N, N)
    W: np.ndarray  # (N, K)
    weight: np.ndarray  # sqrt(1 + alpha), (K,)
    rho: np.ndarray  # (L, 2)
    wavelength: float

    @classmethod
    def build(cls, scenario: Scenario, phi, W, delta, alpha):
        # P_k = Lambda^H G_r diag(h_k) phi delta_k
        hp = scenario.h * np.asarray(phi)[None, :]  # (K, M)
        P = (hp @ scenario.G_r.T) * scenario.nu.conj()[None, :] * np.asarray(delta)[:, None]
        W = np.asarray(W)
        return cls(P=P, Pi=W @ W.conj().T, W=W, weight=np.sqrt(1 + np.asarray(alpha)),
                   rho=scenario.rho, wavelength=scenario.wavelength)


def _coupling(T, aux):
    """``c[k, n] = (P_k^H G_t)_n`` and the field response ``G_t``."""
    G_t = np.exp(1j * (2 * np.pi / aux.wavelength) * (aux.rho @ np.asarray(T, float).T))
    return aux.P.conj() @ G_t, G_t


def position_objective(T, aux: PositionAuxiliaries) -> float:
    c, _ = _coupling(T, aux)
    lin = 2 * aux.weight * np.real(np.einsum("kn,nk->k", c, aux.W))
    quad = np.real(np.einsum("kn,nm,km->k", c, aux.Pi, c.conj()))
    return float(np.sum(lin - quad))


def position_gradients(T, aux: PositionAuxiliaries) -> np.ndarray:
    """Analytic gradient of ``f5`` with respect to every ``t_n``, ``(N, 2)``."""
    c, G_t = _coupling(T, aux)
    k0 = 2 * np.pi / aux.wavelength
    # dc[k, n, :] = d c[k, n] / d t_n
    dc = 1j * k0 * np.einsum("kl,ln,ld->knd", aux.P.conj(), G_t, aux.rho)
    resid = aux.weight[None, :] * aux.W - aux.Pi @ c.conj().T  # (N, K)
    return 2 * np.real(np.einsum("knd,nk->nd", dc, resid))


def position_gradient(T, n: int, aux: PositionAuxiliaries) -> np.ndarray:
    return position_gradients(T, aux)[n]


def feasible(T, config: SystemConfig) -> bool:
    """Region and minimum-spacing check.

    Boundaries count as feasible; a relative slack of 1e-9 wavelengths
    absorbs rounding in layouts built on exact half-wavelength grids.
    """
    T = np.asarray(T, dtype=float)
    lam = config.wavelength
    slack = _FEAS_RTOL * lam
    side = config.region_lambda * lam
    if np.any(T < -slack) or np.any(T > side + slack):
        return False
    dmin = config.min_dist_lambda * lam - slack
    for i, j in itertools.combinations(range(T.shape[0]), 2):
        if np.hypot(*(T[i] - T[j])) < dmin:
            return False
    return True


def _feasible_move(T, n, cand, side, dmin, slack):
    if np.any(cand < -slack) or np.any(cand > side + slack):
        return False
    d = np.hypot(*(T - cand).T)
    d[n] = np.inf
    return bool(np.all(d >= dmin))


def optimize_positions(T0, aux: PositionAuxiliaries, config: SystemConfig, mu0=None,
                       mu_min=None, q_max=None, rtol=1e-6):
    """Per-antenna gradient ascent with backtracking on ``f5``.

    Returns ``(T, trace)`` where ``trace`` lists ``f5`` after every sweep,
    starting with the value at ``T0``.
    """
    lam = config.wavelength
    mu0 = config.mu0_lambda * lam if mu0 is None else mu0
    mu_min = config.mu_min_lambda * lam if mu_min is None else mu_min
    q_max = config.q_max if q_max is None else q_max
    side = config.region_lambda * lam
    slack = _FEAS_RTOL * lam
    dmin = config.min_dist_lambda * lam - slack

    T = np.array(T0, dtype=float, copy=True)
    f = position_objective(T, aux)
    trace = [f]
    for _ in range(q_max):
        f_start = f
        for n in range(T.shape[0]):
            grad = position_gradient(T, n, aux)
            if not np.any(grad):
                continue
            mu = mu0
            while mu >= mu_min:
                cand = T[n] + mu * grad
                if _feasible_move(T, n, cand, side, dmin, slack):
                    T_try = T.copy()
                    T_try[n] = cand
                    f_try = position_objective(T_try, aux)
                    if f_try > f:
                        T, f = T_try, f_try
                        break
                mu /= 2
        trace.append(f)
        if abs(f - f_start) <= rtol * max(abs(f_start), 1e-300):
            break
    return T, trace
