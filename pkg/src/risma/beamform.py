"""
Beamforming block of the fractional-programming solver.

With the effective channels ``H`` fixed, the sum-rate is lifted by the
Lagrangian dual transform (auxiliary ``alpha``) and the quadratic transform
(auxiliary ``beta``).  The beamformer then has a closed form parametrized by
the dual variable ``lam0`` of the total power constraint, which is found by
bisection.
"""

from __future__ import annotations

import numpy as np

from .model import signal_matrix, sinr_from_channels


class NumericalFailure(RuntimeError):
    """An inner solver did not reach its tolerance within its iteration cap.

    ``best`` carries the best feasible iterate found, when there is one.
    """

    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


class SingularSystem(np.linalg.LinAlgError):
    """The beamforming system at ``lam0 = 0`` has no unique solution."""


def update_alpha(gamma):
    return np.array(gamma, dtype=float, copy=True)


def auxiliaries(H, W, noise):
    """Per-user signal amplitude ``A_k`` and received power ``B_k``."""
    X = signal_matrix(H, W)
    A = np.diag(X).copy()
    B = noise + np.sum(np.abs(X) ** 2, axis=1)
    return A, B


def update_beta(H, W, alpha, noise):
    A, B = auxiliaries(H, W, noise)
    return np.sqrt(1.0 + alpha) * A / B


def lagrangian_objective(H, W, alpha, beta, noise):
    """Transformed objective (in nats) that the W-block maximizes.

    ``sum log(1+a) - sum a + sum [2 sqrt(1+a) Re{conj(b) A} - |b|^2 B]``
    """
    A, B = auxiliaries(H, W, noise)
    inner = 2 * np.sqrt(1 + alpha) * np.real(beta.conj() * A) - np.abs(beta) ** 2 * B
    return float(np.sum(np.log1p(alpha)) - np.sum(alpha) + np.sum(inner))


def _system(H, beta, lam0):
    N = H.shape[1]
    wH = np.abs(beta)[:, None] * H
    return lam0 * np.eye(N) + wH.T @ wH.conj()


def update_w(H, alpha, beta, lam0):
    """Closed-form beamformer for a fixed power dual ``lam0``.

    Solves ``(lam0 I + sum |beta_i|^2 H_i H_i^H) w_k = sqrt(1+alpha_k) beta_k H_k``
    for all users with one factorization.
    """
    H = np.asarray(H)
    rhs = (np.sqrt(1 + alpha) * beta)[None, :] * H.T
    S = _system(H, beta, lam0)
    if lam0 <= 0:
        # Sum of K rank-one terms: singular whenever K < N or beta has zeros.
        s = np.linalg.svd(S, compute_uv=False)
        if s[0] == 0 or s[-1] <= 1e-12 * s[0]:
            raise SingularSystem("needs positive dual: system is singular at lam0 = 0")
    return np.linalg.solve(S, rhs)


def _power(W):
    return float(np.sum(np.abs(W) ** 2))


def solve_power_dual(H, alpha, beta, pmax, tol=1e-8, max_iter=200):
    """Smallest ``lam0 >= 0`` whose beamformer meets the power budget.

    Returns ``(lam0, W)``.  When the constraint binds, the bisection keeps
    the feasible end of the bracket and the result is finally rescaled onto
    the budget, so ``sum ||w_k||^2 == pmax`` up to rounding.
    """
    try:
        W = update_w(H, alpha, beta, 0.0)
        if _power(W) <= pmax:
            return 0.0, W
    except (SingularSystem, np.linalg.LinAlgError):
        pass

    lo, hi = 0.0, 1.0
    W_hi = update_w(H, alpha, beta, hi)
    for _ in range(2000):
        if _power(W_hi) <= pmax:
            break
        lo, hi = hi, 2 * hi
        W_hi = update_w(H, alpha, beta, hi)
    else:
        raise NumericalFailure("could not bracket the power dual")
    if _power(W_hi) == 0.0:
        # beta == 0: no signal to steer, any lam0 > 0 gives W = 0
        return hi, W_hi

    lo = max(lo, 1e-12 * hi) if lo == 0.0 else lo
    lam, W = hi, W_hi
    reached = abs(_power(W) - pmax) <= tol * pmax
    for _ in range(max_iter):
        if abs(_power(W) - pmax) <= 1e-13 * pmax or hi - lo <= 1e-15 * hi:
            break
        mid = 0.5 * (lo + hi)
        W_mid = update_w(H, alpha, beta, mid)
        if _power(W_mid) > pmax:
            lo = mid
        else:
            hi, lam, W = mid, mid, W_mid
        reached = reached or abs(_power(W) - pmax) <= tol * pmax
    if not reached:
        raise NumericalFailure("power dual bisection did not converge", best=W)
    return lam, W * np.sqrt(pmax / _power(W))


def beamforming_step(H, W, noise, pmax, tol=1e-8):
    """One full W-block update: ``alpha``, ``beta``, then ``(lam0, W)``."""
    alpha = update_alpha(sinr_from_channels(H, W, noise))
    beta = update_beta(H, W, alpha, noise)
    lam0, W_new = solve_power_dual(H, alpha, beta, pmax, tol=tol)
    return W_new, alpha, beta, lam0
