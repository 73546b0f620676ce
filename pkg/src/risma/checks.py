"""
Seeded numerical self-checks of the solver blocks.

Each suite draws random instances, compares an implementation against an
independent oracle and returns a :class:`CheckReport`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import beamform, positions, ris
from .model import SystemConfig, effective_channel, sample_scenario, sinr_from_channels, sum_rate
from .solver import initialize


@dataclass
class CheckReport:
    name: str
    passed: bool = True
    lines: list = field(default_factory=list)
    worst: float = 0.0

    def fail(self, msg):
        self.passed = False
        self.lines.append("FAIL " + msg)

    def text(self) -> str:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: worst residual {self.worst:.3e}"
        return "\n".join([head] + ["  " + line for line in self.lines])


def random_instance(seed, n_antennas=4, n_users=4, n_ris=16, n_paths=4, **overrides):
    """A scenario plus a random feasible-power state with random positions.

    Positions are uniform in the region (spacing is not enforced; the
    oracles here do not need it).
    """
    config = SystemConfig(n_antennas=n_antennas, n_users=n_users, n_ris=n_ris,
                          n_paths=n_paths, seed=seed, **overrides)
    scenario = sample_scenario(config, seed)
    rng = np.random.default_rng([seed, 7])
    state = initialize(scenario, config)
    state.T = rng.uniform(0, config.region_lambda * config.wavelength, size=(n_antennas, 2))
    W = rng.standard_normal((n_antennas, n_users)) + 1j * rng.standard_normal((n_antennas, n_users))
    state.W = W * np.sqrt(config.pmax / np.sum(np.abs(W) ** 2))
    return config, scenario, state


def position_aux(config, scenario, state):
    H = effective_channel(scenario, state.phi, state.T)
    alpha = sinr_from_channels(H, state.W, config.noise_power)
    a = ris.cascade_terms(scenario, state.T, state.W)
    delta = positions.update_delta(a, state.phi, alpha, config.noise_power)
    return positions.PositionAuxiliaries.build(scenario, state.phi, state.W, delta, alpha)


def fd_gradient(T, aux, step):
    g = np.zeros(T.shape)
    for n, d in itertools.product(range(T.shape[0]), range(2)):
        Tp, Tm = T.copy(), T.copy()
        Tp[n, d] += step
        Tm[n, d] -= step
        g[n, d] = (positions.position_objective(Tp, aux)
                   - positions.position_objective(Tm, aux)) / (2 * step)
    return g


def check_gradients(instances=100, tol=1e-5, seed0=0) -> CheckReport:
    rep = CheckReport("gradients")
    for s in range(seed0, seed0 + instances):
        config, scenario, state = random_instance(s)
        aux = position_aux(config, scenario, state)
        g = positions.position_gradients(state.T, aux)
        fd = fd_gradient(state.T, aux, 1e-6 * config.wavelength)
        for n in range(g.shape[0]):
            err = np.linalg.norm(g[n] - fd[n]) / max(np.linalg.norm(fd[n]), 1e-300)
            rep.worst = max(rep.worst, err)
            if err >= tol:
                rep.fail(f"seed {s} antenna {n}: relative error {err:.3e}")
    rep.lines.append(f"{instances} instances, max relative FD error {rep.worst:.3e}")
    return rep


def random_quadratic(rng, M=16, rank=None):
    rank = M if rank is None else rank
    A = rng.standard_normal((rank, M)) + 1j * rng.standard_normal((rank, M))
    V = rng.standard_normal(M) + 1j * rng.standard_normal(M)
    return ris.QuadraticForm.from_arrays(A.conj().T @ A, V)


def check_mm(instances=100, steps=50, seed0=0) -> CheckReport:
    rep = CheckReport("mm")
    violations = 0
    for s in range(seed0, seed0 + instances):
        rng = np.random.default_rng(s)
        q = random_quadratic(rng, rank=int(rng.integers(1, 17)))
        phi = np.exp(2j * np.pi * rng.uniform(size=q.size))
        f = q.value(phi)
        for _ in range(steps):
            phi = ris.mm_step(q, phi)
            fn = q.value(phi)
            drop = (f - fn) / max(1.0, abs(f))
            rep.worst = max(rep.worst, drop)
            if drop > 1e-10:
                violations += 1
                rep.fail(f"seed {s}: f2 fell by {f - fn:.3e}")
            f = fn
    rep.lines.append(f"{instances} instances x {steps} steps, {violations} violations")
    return rep


def check_bisect(instances=50, seed0=0) -> CheckReport:
    rep = CheckReport("bisect")
    grid = np.logspace(-6, 3, 40)
    for s in range(seed0, seed0 + instances):
        config, scenario, state = random_instance(s)
        H = effective_channel(scenario, state.phi, state.T)
        alpha = sinr_from_channels(H, state.W, config.noise_power)
        beta = beamform.update_beta(H, state.W, alpha, config.noise_power)
        powers = [np.sum(np.abs(beamform.update_w(H, alpha, beta, lam)) ** 2) for lam in grid]
        if np.any(np.diff(powers) > 1e-12 * max(powers)):
            rep.fail(f"seed {s}: power not monotone in lam0")
        lam0, W = beamform.solve_power_dual(H, alpha, beta, config.pmax)
        p = np.sum(np.abs(W) ** 2)
        if lam0 > 0:
            err = abs(p - config.pmax) / config.pmax
            rep.worst = max(rep.worst, err)
            if err > 1e-8:
                rep.fail(f"seed {s}: binding power off by {err:.3e}")
        elif p > config.pmax * (1 + 1e-9):
            rep.fail(f"seed {s}: lam0 = 0 but power exceeds budget")
    rep.lines.append(f"{instances} instances, worst relative power residual {rep.worst:.3e}")
    return rep


def check_tightness(instances=50, seed0=0) -> CheckReport:
    rep = CheckReport("tightness")
    for s in range(seed0, seed0 + instances):
        config, scenario, state = random_instance(s)
        noise = config.noise_power
        H = effective_channel(scenario, state.phi, state.T)
        gamma = sinr_from_channels(H, state.W, noise)
        alpha = beamform.update_alpha(gamma)
        beta = beamform.update_beta(H, state.W, alpha, noise)
        R = sum_rate(state.W, state.phi, state.T, scenario, noise) * math.log(2)
        lag = beamform.lagrangian_objective(H, state.W, alpha, beta, noise)
        a = ris.cascade_terms(scenario, state.T, state.W)
        eps = ris.update_epsilon(a, state.phi, alpha, noise)
        qt = ris.transformed_objective(a, state.phi, eps, alpha, noise)
        ratio = ris.weighted_ratio(a, state.phi, alpha, noise)
        aux = position_aux(config, scenario, state)
        f5 = positions.position_objective(state.T, aux) - noise * np.sum(
            np.abs(positions.update_delta(a, state.phi, alpha, noise)) ** 2)
        for label, x, y in (("lagrangian", lag, R), ("epsilon", qt, ratio), ("delta", f5, ratio)):
            err = abs(x - y) / max(abs(y), 1e-300)
            rep.worst = max(rep.worst, err)
            if err > 1e-9:
                rep.fail(f"seed {s} {label}: relative gap {err:.3e}")
    rep.lines.append(f"{instances} instances, worst relative gap {rep.worst:.3e}")
    return rep


def dps_instance(seed, levels=2):
    """Small DPS problem at the solver's starting point: ``(q, phi0)``."""
    config = SystemConfig(n_antennas=2, n_users=2, n_ris=8, n_paths=2, ris_mode="dps",
                          dps_levels=levels, seed=seed)
    scenario = sample_scenario(config, seed)
    state = initialize(scenario, config)
    H = effective_channel(scenario, state.phi, state.T)
    W, alpha, _, _ = beamform.beamforming_step(H, state.W, config.noise_power, config.pmax)
    a = ris.cascade_terms(scenario, state.T, W)
    eps = ris.update_epsilon(a, state.phi, alpha, config.noise_power)
    return config, ris.assemble_quadratic(a, eps, alpha), state.phi


def brute_force_dps(q, levels):
    grid = np.exp(2j * np.pi * np.arange(levels) / levels)
    best = -np.inf
    for combo in itertools.product(range(levels), repeat=q.size):
        best = max(best, q.value(grid[list(combo)]))
    return best


def check_brute_dps(instances=50, levels=2, min_hit_rate=0.7, seed0=0) -> CheckReport:
    rep = CheckReport("brute_dps")
    hits = 0
    for s in range(seed0, seed0 + instances):
        config, q, phi0 = dps_instance(s, levels)
        phi = ris.optimize_phases(q, phi0, "dps", levels=levels, tau_max=config.tau_max,
                                  tol=config.mm_tol)
        f, opt = q.value(phi), brute_force_dps(q, levels)
        scale = max(1.0, abs(opt))
        gap = (opt - f) / scale
        rep.worst = max(rep.worst, gap)
        if gap < -1e-12:
            rep.fail(f"seed {s}: heuristic {f:.6g} exceeds exhaustive optimum {opt:.6g}")
        hits += gap <= 1e-9
    rate = hits / instances
    rep.lines.append(f"{instances} instances, optimum found on {hits} ({rate:.0%}), "
                     f"worst relative gap {rep.worst:.3e}")
    if rate < min_hit_rate:
        rep.fail(f"hit rate {rate:.0%} below {min_hit_rate:.0%}")
    return rep


SUITES = {
    "gradients": check_gradients,
    "mm": check_mm,
    "bisect": check_bisect,
    "tightness": check_tightness,
    "brute_dps": check_brute_dps,
}


def self_check(which: str) -> CheckReport:
    if which not in SUITES:
        raise KeyError(f"unknown check suite {which!r}; choose from {sorted(SUITES)}")
    return SUITES[which]()
