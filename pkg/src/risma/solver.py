"""
Outer block-coordinate loop: (alpha, beta) -> W -> eps -> phi -> delta -> T.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import beamform, positions, ris
from .model import (ConfigError, Scenario, SystemConfig, effective_channel, rate_from_sinr,
                    sinr_from_channels)


class SolverError(RuntimeError):
    """A block failed; ``state`` and ``trace`` hold the best point reached."""

    def __init__(self, msg, state=None, trace=None):
        super().__init__(msg)
        self.state = state
        self.trace = trace


@dataclass
class SolverState:
    W: np.ndarray
    phi: np.ndarray
    T: np.ndarray
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    eps: np.ndarray | None = None
    delta: np.ndarray | None = None
    lam0: float = 0.0
    r: int = 0

    def copy(self) -> "SolverState":
        return replace(self, W=self.W.copy(), phi=self.phi.copy(), T=self.T.copy())


@dataclass(frozen=True)
class IterationRecord:
    r: int
    sum_rate: float
    wall_ms: float
    block_ms: dict


@dataclass
class SolverTrace:
    initial_rate: float
    records: list = field(default_factory=list)
    status: str = "running"

    @property
    def rates(self) -> np.ndarray:
        return np.array([rec.sum_rate for rec in self.records])

    @property
    def final_rate(self) -> float:
        return self.records[-1].sum_rate if self.records else self.initial_rate


def linear_array(n, spacing):
    return np.stack([np.arange(n) * spacing, np.zeros(n)], axis=1)


def initial_positions(config: SystemConfig) -> np.ndarray:
    """Half-wavelength ULA on the lower edge of the region.

    Movable antennas whose ULA would not fit in the region are wrapped onto
    further rows of the same half-wavelength grid.
    """
    lam = config.wavelength
    N = config.n_antennas
    pitch = max(0.5, config.min_dist_lambda)
    if config.antenna_mode == "fpa":
        return linear_array(N, pitch * lam)
    per_row = int(math.floor(config.region_lambda / pitch + 1e-9)) + 1
    rows = -(-N // per_row)
    if (rows - 1) * pitch > config.region_lambda + 1e-9:
        raise ConfigError(
            f"{N} antennas with spacing {pitch} wavelengths do not fit a "
            f"{config.region_lambda}-wavelength region")
    idx = np.arange(N)
    T = pitch * lam * np.stack([idx % per_row, idx // per_row], axis=1).astype(float)
    if not positions.feasible(T, config):
        raise ConfigError("initial antenna layout is infeasible")
    return T


def matched_filter(H, pmax):
    W = H.T.copy()
    norms = np.linalg.norm(W, axis=0)
    W = W / np.where(norms > 0, norms, 1.0)
    total = np.sum(np.abs(W) ** 2)
    return W * np.sqrt(pmax / total) if total > 0 else W


def initialize(scenario: Scenario, config: SystemConfig, seed=None) -> SolverState:
    """Starting point shared by every variant solved on ``scenario``.

    ``seed`` (default: the scenario's seed) drives the random RIS phases.
    """
    seed = scenario.seed if seed is None else seed
    rng = np.random.default_rng([seed, 1])
    phi = np.exp(2j * np.pi * rng.uniform(size=scenario.n_ris))
    if config.ris_mode == "dps":
        phi = ris.quantize_phases(phi, config.dps_levels)
    T = initial_positions(config)
    H = effective_channel(scenario, phi, T)
    return SolverState(W=matched_filter(H, config.pmax), phi=phi, T=T)


def current_rate(state, scenario, config) -> float:
    H = effective_channel(scenario, state.phi, state.T)
    return rate_from_sinr(sinr_from_channels(H, state.W, config.noise_power))


def iterate(state: SolverState, scenario: Scenario, config: SystemConfig) -> dict:
    """One outer iteration, in place.  Returns per-block timings in ms."""
    noise = config.noise_power
    timings = {}

    t0 = time.perf_counter()
    H = effective_channel(scenario, state.phi, state.T)
    state.W, state.alpha, state.beta, state.lam0 = beamform.beamforming_step(
        H, state.W, noise, config.pmax, tol=config.bisect_tol)
    timings["W"] = 1e3 * (time.perf_counter() - t0)

    if config.ris_mode != "fixed":
        t0 = time.perf_counter()
        a = ris.cascade_terms(scenario, state.T, state.W)
        state.eps = ris.update_epsilon(a, state.phi, state.alpha, noise)
        q = ris.assemble_quadratic(a, state.eps, state.alpha)
        state.phi = ris.optimize_phases(q, state.phi, config.ris_mode, levels=config.dps_levels,
                                        tau_max=config.tau_max, tol=config.mm_tol,
                                        ellipsoid_tol=config.ellipsoid_tol)
        timings["phi"] = 1e3 * (time.perf_counter() - t0)

    if config.antenna_mode == "ma":
        t0 = time.perf_counter()
        a = ris.cascade_terms(scenario, state.T, state.W)
        state.delta = positions.update_delta(a, state.phi, state.alpha, noise)
        aux = positions.PositionAuxiliaries.build(scenario, state.phi, state.W, state.delta,
                                                  state.alpha)
        state.T, _ = positions.optimize_positions(state.T, aux, config)
        timings["T"] = 1e3 * (time.perf_counter() - t0)

    state.r += 1
    return timings


def solve(scenario: Scenario, config: SystemConfig, state: SolverState | None = None,
          seed=None, callback=None):
    """Run the outer loop until the relative rate change drops below ``config.tol``.

    Returns ``(state, trace)``; a block failure raises :class:`SolverError`
    carrying the last completed state and its trace.  ``callback(state, record)``
    is invoked after every iteration.
    """
    state = initialize(scenario, config, seed=seed) if state is None else state
    rate = current_rate(state, scenario, config)
    trace = SolverTrace(initial_rate=rate)
    t_start = time.perf_counter()
    for _ in range(config.r_max):
        prev_state = state.copy()
        try:
            timings = iterate(state, scenario, config)
        except (beamform.NumericalFailure, np.linalg.LinAlgError) as exc:
            trace.status = "failure"
            raise SolverError(str(exc), state=prev_state, trace=trace) from exc
        new_rate = current_rate(state, scenario, config)
        trace.records.append(IterationRecord(
            r=state.r, sum_rate=new_rate, wall_ms=1e3 * (time.perf_counter() - t_start),
            block_ms=timings))
        if callback is not None:
            callback(state, trace.records[-1])
        if abs(new_rate - rate) <= config.tol * max(abs(rate), 1e-300):
            trace.status = "converged"
            return state, trace
        rate = new_rate
    trace.status = "iteration-cap"
    return state, trace
