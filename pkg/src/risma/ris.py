"""
RIS reflection block.

With ``W`` and the positions fixed, the weighted SINR-ratio objective is
quadratic-transformed (auxiliary ``eps``) into the concave quadratic

    f2(phi) = -phi^H U phi + 2 Re{V^H phi}

which is then maximized over one of three feasible sets:

* ``irc``  ``|phi_m| <= 1``; convex, solved through its Lagrange dual with the
  ellipsoid method,
* ``cps``  ``|phi_m| == 1``; majorization-minimization (MM) iterations,
* ``dps``  unit modulus with phases on a ``levels``-point grid; MM iterations
  whose iterates are quantized, keeping the best point seen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .beamform import NumericalFailure
from .model import Scenario, reflection_basis


@dataclass(frozen=True)
class QuadraticForm:
    U: np.ndarray
    V: np.ndarray
    lam_max: float

    @classmethod
    def from_arrays(cls, U, V):
        U = np.asarray(U, dtype=complex)
        U = 0.5 * (U + U.conj().T)
        lam_max = float(np.linalg.eigvalsh(U)[-1]) if U.size else 0.0
        return cls(U=U, V=np.asarray(V, dtype=complex), lam_max=max(lam_max, 0.0))

    @property
    def size(self) -> int:
        return self.V.shape[0]

    def value(self, phi) -> float:
        """``f2(phi)``."""
        phi = np.asarray(phi)
        return float(-np.real(phi.conj() @ self.U @ phi) + 2 * np.real(self.V.conj() @ phi))


def cascade_terms(scenario: Scenario, T, W) -> np.ndarray:
    """``a[k, i] = S_k^H G_r^H Lambda G_t w_i`` as a ``(K, K, M)`` array.

    The received amplitude of stream ``i`` at user ``k`` is ``phi^H a[k, i]``.
    """
    Bw = reflection_basis(scenario, T) @ W  # (M, K)
    return scenario.h.conj()[:, None, :] * Bw.T[None, :, :]


def _amplitudes(a, phi):
    return np.einsum("m,kim->ki", np.asarray(phi).conj(), a)


def update_epsilon(a, phi, alpha, noise):
    """Optimal quadratic-transform auxiliary for fixed ``phi``."""
    X = _amplitudes(a, phi)
    num = np.sqrt(1 + alpha) * np.diag(X)
    return num / (np.sum(np.abs(X) ** 2, axis=1) + noise)


def transformed_objective(a, phi, eps, alpha, noise) -> float:
    """Quadratic-transform objective in ``(phi, eps)``.

    Equals ``sum (1+alpha_k) gamma_k / (1+gamma_k)`` when ``eps`` is optimal.
    """
    X = _amplitudes(a, phi)
    lin = 2 * np.sqrt(1 + alpha) * np.real(eps.conj() * np.diag(X))
    quad = np.abs(eps) ** 2 * (np.sum(np.abs(X) ** 2, axis=1) + noise)
    return float(np.sum(lin - quad))


def weighted_ratio(a, phi, alpha, noise) -> float:
    """``sum_k (1+alpha_k) gamma_k / (1+gamma_k)``."""
    P = np.abs(_amplitudes(a, phi)) ** 2
    sig = np.diag(P)
    return float(np.sum((1 + alpha) * sig / (P.sum(axis=1) + noise)))


def assemble_quadratic(a, eps, alpha) -> QuadraticForm:
    K, _, M = a.shape
    w = np.abs(eps)[:, None, None] * a  # |eps_k| a[k, i]
    flat = w.reshape(K * K, M)
    U = flat.T @ flat.conj()
    V = np.einsum("k,km->m", np.sqrt(1 + alpha) * eps.conj(), a[np.arange(K), np.arange(K)])
    return QuadraticForm.from_arrays(U, V)


def mm_step(q: QuadraticForm, phi):
    """Maximize the MM surrogate of ``f2`` at ``phi`` over unit-modulus vectors."""
    return np.exp(1j * np.angle(q.lam_max * phi - q.U @ phi + q.V))


def quantize_phases(phi, levels: int):
    """Snap each phase to the nearest of ``levels`` equally spaced values.

    Ties go to the smaller grid phase.
    """
    step = 2 * np.pi / levels
    ang = np.mod(np.angle(phi), 2 * np.pi) / step
    idx = np.ceil(ang - 0.5)  # round half down
    idx = np.mod(idx, levels)
    return np.exp(1j * step * idx)


def _project_disk(phi):
    mag = np.abs(phi)
    return np.where(mag > 1.0, phi / np.maximum(mag, 1e-300), phi)


def _solve_shifted(U, eta, V):
    S = U + np.diag(eta)
    try:
        return np.linalg.solve(S, V)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(S, V, rcond=None)[0]


def _polish_irc(q, phi, max_iter, rtol=1e-13):
    """Projected-gradient ascent with step ``1/lam_max`` (monotone in ``f2``)."""
    if q.lam_max <= 0:
        return phi
    f = q.value(phi)
    for _ in range(max_iter):
        nxt = _project_disk(phi + (q.V - q.U @ phi) / q.lam_max)
        fn = q.value(nxt)
        if fn < f:
            break
        done = fn - f <= rtol * max(1.0, abs(f))
        phi, f = nxt, fn
        if done:
            break
    return phi


@numba.njit(cache=True)
def _ellipsoid_dual(U, V, center, radius, tol, max_iter):
    """Central-cut ellipsoid minimization of the IRC dual over ``eta >= 0``.

    Returns the best feasible center and whether either the cut-based bound
    or the duality gap against the disk-projected primal point met ``tol``.
    """
    M = V.shape[0]
    c = center.copy()
    P = np.eye(M) * radius ** 2
    best_g = np.inf
    best_f = -np.inf
    best_x = np.zeros(M, dtype=V.dtype)
    best_eta = np.maximum(c, 0.0)
    s = np.zeros(M)
    for _ in range(max_iter):
        j = -1
        for m in range(M):
            if c[m] < 0 and (j < 0 or c[m] < c[j]):
                j = m
        if j >= 0:
            # feasibility cut for eta_j >= 0
            s[:] = 0.0
            s[j] = -1.0
        else:
            S = U.copy()
            for m in range(M):
                S[m, m] += c[m]
            phi = np.linalg.solve(S, V)
            g = np.real(np.vdot(V, phi)) + c.sum()
            if g < best_g:
                best_g = g
                best_eta = c.copy()
            x = phi.copy()
            for m in range(M):
                r = abs(x[m])
                if r > 1.0:
                    x[m] /= r
            f = 2.0 * np.real(np.vdot(V, x)) - np.real(np.vdot(x, U @ x))
            if f > best_f:
                best_f = f
                best_x = x
            if best_g - best_f <= tol * max(1.0, abs(best_g)):
                return best_eta, best_x, True
            for m in range(M):
                s[m] = 1.0 - (phi[m].real ** 2 + phi[m].imag ** 2)
        Ps = P @ s
        sPs = s @ Ps
        if j < 0 and np.sqrt(max(sPs, 0.0)) < tol:
            return best_eta, best_x, True
        if sPs <= 0:
            return best_eta, best_x, j < 0
        gt = Ps / np.sqrt(sPs)
        if M == 1:
            c = c - 0.5 * gt
            P = P / 4.0
        else:
            c = c - gt / (M + 1)
            P = (M * M / (M * M - 1.0)) * (P - (2.0 / (M + 1)) * np.outer(gt, gt))
            P = 0.5 * (P + P.T)
    return best_eta, best_x, False


def solve_irc(q: QuadraticForm, tol=1e-6, phi0=None, max_iter=None, polish_iter=2000):
    """Maximize ``f2`` subject to ``|phi_m| <= 1``.

    The dual ``g(eta) = V^H (U + diag eta)^{-1} V + sum eta`` is minimized over
    ``eta >= 0`` by the central-cut ellipsoid method in units normalized by
    ``max(lam_max, max|V|)``.  It stops once the cut-based gap bound
    ``sqrt(s^T P s)`` at a feasible center drops below ``tol``.  The primal
    point ``phi(eta)`` is projected onto the disks and polished by projected
    gradient steps; ``phi0`` (if feasible and better) is used as the polishing
    start instead, so the result never has lower ``f2`` than ``phi0``.
    """
    M = q.size
    if not np.any(q.V):
        return np.zeros(M, dtype=complex)
    max_iter = 500 * M if max_iter is None else max_iter

    phi_u = np.linalg.lstsq(q.U, q.V, rcond=None)[0] if q.lam_max > 0 else None
    if (phi_u is not None
            and np.linalg.norm(q.U @ phi_u - q.V) <= 1e-9 * np.linalg.norm(q.V)
            and np.all(np.abs(phi_u) <= 1.0)):
        return phi_u

    scale = max(q.lam_max, float(np.max(np.abs(q.V))))
    U, V = q.U / scale, q.V / scale
    best_eta, best_x, converged = _ellipsoid_dual(U, V, np.ones(M), 10.0 * np.sqrt(M),
                                                  tol, max_iter)

    phi = _project_disk(_solve_shifted(U, best_eta, V))
    if q.value(best_x) > q.value(phi):
        phi = best_x
    if phi0 is not None:
        phi0 = np.asarray(phi0, dtype=complex)
        if np.all(np.abs(phi0) <= 1.0 + 1e-12) and q.value(phi0) > q.value(phi):
            phi = _project_disk(phi0)
    phi = _polish_irc(q, phi, polish_iter)
    if not converged:
        # the polished primal may close the duality gap the raw projection left open
        g = float(np.real(np.vdot(V, _solve_shifted(U, best_eta, V)))) + float(best_eta.sum())
        converged = g - q.value(phi) / scale <= tol * max(1.0, abs(g))
    if not converged:
        raise NumericalFailure("ellipsoid method hit its iteration cap", best=phi)
    return phi


def refine_discrete(q: QuadraticForm, phi, levels: int, max_sweeps: int = 100):
    """Greedy element-wise search over the phase grid (never lowers ``f2``).

    Each sweep moves every element to its best grid phase given the others,
    using the exact change ``2 Re{conj(d) (V - U phi)_m} - |d|^2 U_mm`` of
    replacing ``phi_m`` by ``phi_m + d``.
    """
    grid = np.exp(2j * np.pi * np.arange(levels) / levels)
    phi = np.array(phi, dtype=complex, copy=True)
    Uphi = q.U @ phi
    diag = np.real(np.diag(q.U))
    for _ in range(max_sweeps):
        moved = False
        for m in range(q.size):
            d = grid - phi[m]
            gain = 2 * np.real(d.conj() * (q.V[m] - Uphi[m])) - np.abs(d) ** 2 * diag[m]
            j = int(np.argmax(gain))
            if gain[j] > 1e-14 * (abs(q.V[m]) + abs(Uphi[m]) + diag[m]):
                Uphi += q.U[:, m] * d[j]
                phi[m] = grid[j]
                moved = True
        if not moved:
            break
    return phi


def optimize_phases(q: QuadraticForm, phi0, mode: str, levels: int = 4, tau_max: int = 100,
                    tol: float = 1e-6, ellipsoid_tol: float = 1e-6, refine: bool = True):
    """Run the constraint-specific solver for the RIS coefficients.

    ``phi0`` is the current (feasible) point; the returned point never has
    lower ``f2`` than it for any mode.  With ``refine`` the quantized MM
    result is finished by :func:`refine_discrete`.
    """
    if mode == "irc":
        return solve_irc(q, tol=ellipsoid_tol, phi0=phi0)
    if mode not in ("cps", "dps"):
        raise ValueError(f"unsupported mode for phase optimization: {mode!r}")

    phi = np.asarray(phi0, dtype=complex)
    f = q.value(phi)
    best, best_f = phi, f
    for _ in range(tau_max):
        nxt = mm_step(q, phi)
        if mode == "dps":
            nxt = quantize_phases(nxt, levels)
        fn = q.value(nxt)
        if fn > best_f:
            best, best_f = nxt, fn
        stalled = abs(fn - f) <= tol * max(1.0, abs(f))
        phi, f = nxt, fn
        if stalled:
            break
    if mode == "dps" and refine:
        best = refine_discrete(q, best, levels)
    return best
