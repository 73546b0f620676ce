"""
System model for an RIS-aided multiuser MISO downlink whose base station
uses movable antennas.

Conventions used throughout the package
---------------------------------------
* ``T`` is an ``(N, 2)`` array of antenna positions in meters.
* ``phi`` is the length-``M`` vector of RIS coefficients stacked as the
  diagonal of ``Phi^H``; the reflection applied by element ``m`` is
  ``conj(phi[m])``.
* ``W`` is ``(N, K)``, column ``k`` is the beamformer of user ``k``.
* ``H`` (effective channels) is ``(K, N)``, row ``k`` is ``H_k`` so that the
  received amplitude of stream ``i`` at user ``k`` is ``H[k].conj() @ W[:, i]``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299792458.0

RIS_MODES = ("irc", "cps", "dps", "fixed")
ANTENNA_MODES = ("ma", "fpa")
GR_MODELS = ("frv", "gaussian")


class ConfigError(ValueError):
    """Raised for an invalid system configuration."""


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def path_loss(distance_km, f0_ghz, reflection_gain_db=0.0):
    """Linear power gain of the free-space model used for both RIS hops.

    ``loss_dB = 92.5 + 20 log10(f0[GHz]) + 20 log10(d[km]) - gain_dB``
    """
    distance_km = np.asarray(distance_km, dtype=float)
    if np.any(distance_km <= 0):
        raise ValueError("distance must be positive")
    if f0_ghz <= 0:
        raise ValueError("carrier frequency must be positive")
    loss_db = 92.5 + 20 * np.log10(f0_ghz) + 20 * np.log10(distance_km) - reflection_gain_db
    gain = 10.0 ** (-loss_db / 10.0)
    return float(gain) if gain.ndim == 0 else gain


@dataclass(frozen=True)
class SystemConfig:
    """All scalar parameters of one simulated system.

    Powers are given in dBm; the watt values ``pmax`` and ``noise_power``
    and the carrier ``wavelength`` are derived once at construction.
    ``region_lambda`` and ``min_dist_lambda`` are multiples of the wavelength.
    """

    n_antennas: int = 4
    n_users: int = 4
    n_ris: int = 16
    n_paths: int = 4
    carrier_ghz: float = 2.0
    region_lambda: float = 2.0
    min_dist_lambda: float = 0.5
    pmax_dbm: float = 10.0
    noise_dbm: float = -100.0
    ris_mode: str = "cps"
    dps_levels: int = 4
    antenna_mode: str = "ma"
    reflection_gain_db: float = 10.0
    bs_ris_km: float = 0.05
    ris_user_center_m: float = 100.0
    user_radius_m: float = 10.0
    gr_model: str = "frv"
    angle_max_rad: float = math.pi
    seed: int = 0
    # outer loop
    tol: float = 1e-4
    r_max: int = 100
    # RIS block
    tau_max: int = 100
    mm_tol: float = 1e-6
    ellipsoid_tol: float = 1e-6
    # beamforming block
    bisect_tol: float = 1e-8
    # position block
    q_max: int = 50
    mu0_lambda: float = 0.1
    mu_min_lambda: float = 1e-4

    wavelength: float = field(init=False, repr=False)
    pmax: float = field(init=False, repr=False)
    noise_power: float = field(init=False, repr=False)

    def __post_init__(self):
        self.validate()
        object.__setattr__(self, "wavelength", SPEED_OF_LIGHT / (self.carrier_ghz * 1e9))
        object.__setattr__(self, "pmax", dbm_to_watt(self.pmax_dbm))
        object.__setattr__(self, "noise_power", dbm_to_watt(self.noise_dbm))

    def validate(self):
        for name in ("n_antennas", "n_users", "n_ris", "n_paths", "r_max", "tau_max", "q_max"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.ris_mode not in RIS_MODES:
            raise ConfigError(f"ris_mode must be one of {RIS_MODES}, got {self.ris_mode!r}")
        if self.antenna_mode not in ANTENNA_MODES:
            raise ConfigError(
                f"antenna_mode must be one of {ANTENNA_MODES}, got {self.antenna_mode!r}")
        if self.gr_model not in GR_MODELS:
            raise ConfigError(f"gr_model must be one of {GR_MODELS}, got {self.gr_model!r}")
        if self.ris_mode == "dps" and self.dps_levels < 2:
            raise ConfigError("dps_levels must be >= 2")
        for name in ("carrier_ghz", "region_lambda", "bs_ris_km", "ris_user_center_m",
                     "angle_max_rad", "mu0_lambda", "mu_min_lambda"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.min_dist_lambda < 0:
            raise ConfigError("min_dist_lambda must be nonnegative")
        if self.user_radius_m < 0 or self.user_radius_m >= self.ris_user_center_m:
            raise ConfigError("user_radius_m must lie in [0, ris_user_center_m)")
        if self.n_antennas >= 2 and self.min_dist_lambda > self.region_lambda * math.sqrt(2):
            raise ConfigError("min_dist_lambda exceeds the region diagonal")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        for name in ("tol", "mm_tol", "ellipsoid_tol", "bisect_tol"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.init}


@dataclass(frozen=True)
class Scenario:
    """One random channel realization (everything except positions and RIS)."""

    path_angles: np.ndarray  # (L, 2) elevation, azimuth
    ris_angles: np.ndarray  # (L, 2)
    nu: np.ndarray  # (L,)
    G_r: np.ndarray  # (L, M)
    h: np.ndarray  # (K, M)
    user_dist_m: np.ndarray  # (K,)
    wavelength: float
    seed: int = 0

    @property
    def rho(self) -> np.ndarray:
        return direction_vectors(self.path_angles)

    @property
    def n_paths(self) -> int:
        return self.nu.shape[0]

    @property
    def n_ris(self) -> int:
        return self.G_r.shape[1]

    @property
    def n_users(self) -> int:
        return self.h.shape[0]

    def S(self, k: int) -> np.ndarray:
        """``diag(h_k)``, materialized on demand."""
        return np.diag(self.h[k])


def direction_vectors(angles) -> np.ndarray:
    """Map (elevation, azimuth) pairs to planar vectors ``[sin t cos p, cos t]``."""
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    theta, az = angles[:, 0], angles[:, 1]
    return np.stack([np.sin(theta) * np.cos(az), np.cos(theta)], axis=1)


def field_response_matrix(T, angles, wavelength) -> np.ndarray:
    """``(L, N)`` matrix with entry ``exp(j 2pi/lambda t_n . rho_l)``."""
    T = np.atleast_2d(np.asarray(T, dtype=float))
    rho = direction_vectors(angles)
    return np.exp(1j * (2 * np.pi / wavelength) * (rho @ T.T))


def ris_grid(n_ris, wavelength) -> np.ndarray:
    """Element positions of a square-ish planar RIS with half-wavelength pitch."""
    cols = int(math.ceil(math.sqrt(n_ris)))
    m = np.arange(n_ris)
    return 0.5 * wavelength * np.stack([m % cols, m // cols], axis=1).astype(float)


def _crandn(rng, shape, var):
    return np.sqrt(var / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_scenario(config: SystemConfig, seed=None) -> Scenario:
    """Draw a channel realization; deterministic in ``(config, seed)``.

    The draw order is fixed: BS-side path angles, RIS-side angles, path
    responses, user drops, RIS-user fading, then (Gaussian model only) ``G_r``.
    """
    if seed is None:
        seed = config.seed
    rng = np.random.default_rng(seed)
    L, M, K = config.n_paths, config.n_ris, config.n_users
    lam = config.wavelength

    path_angles = rng.uniform(0.0, config.angle_max_rad, size=(L, 2))
    ris_angles = rng.uniform(0.0, config.angle_max_rad, size=(L, 2))

    v = path_loss(config.bs_ris_km, config.carrier_ghz, config.reflection_gain_db)
    nu = _crandn(rng, L, v / L)

    # uniform over the disk area
    r = config.user_radius_m * np.sqrt(rng.uniform(size=K))
    ang = rng.uniform(0.0, 2 * np.pi, size=K)
    xy = np.stack([config.ris_user_center_m + r * np.cos(ang), r * np.sin(ang)], axis=1)
    d = np.linalg.norm(xy, axis=1)
    u = path_loss(d / 1000.0, config.carrier_ghz, config.reflection_gain_db)
    h = _crandn(rng, (K, M), 1.0) * np.sqrt(u)[:, None]

    if config.gr_model == "frv":
        G_r = field_response_matrix(ris_grid(M, lam), ris_angles, lam)
    else:
        G_r = _crandn(rng, (L, M), 1.0)

    return Scenario(path_angles=path_angles, ris_angles=ris_angles, nu=nu, G_r=G_r, h=h,
                    user_dist_m=d, wavelength=lam, seed=int(seed))


def reflection_basis(scenario: Scenario, T) -> np.ndarray:
    """``G_r^H Lambda G_t`` as an ``(M, N)`` matrix."""
    G_t = field_response_matrix(T, scenario.path_angles, scenario.wavelength)
    return scenario.G_r.conj().T @ (scenario.nu[:, None] * G_t)


def effective_channel(scenario: Scenario, phi, T) -> np.ndarray:
    """Cascaded BS->RIS->user channels ``H_k = G_t^H Lambda^H G_r Phi^H h_k``.

    Returns a ``(K, N)`` array; row ``k`` is ``H_k``.
    """
    phi = np.asarray(phi)
    if phi.shape != (scenario.n_ris,):
        raise ValueError(f"phi must have shape ({scenario.n_ris},), got {phi.shape}")
    B = reflection_basis(scenario, T)
    # H_k = B^H diag(phi) h_k
    return (scenario.h * phi[None, :]) @ B.conj()


def signal_matrix(H, W) -> np.ndarray:
    """``X[k, i] = H_k^H w_i``: amplitude of stream ``i`` at user ``k``."""
    return np.asarray(H).conj() @ np.asarray(W)


def sinr_from_channels(H, W, noise) -> np.ndarray:
    P = np.abs(signal_matrix(H, W)) ** 2
    sig = np.diag(P).copy()
    return sig / (P.sum(axis=1) - sig + noise)


def sinr(k, W, phi, T, scenario, noise) -> float:
    """SINR of user ``k`` (zero-based)."""
    return float(sinr_from_channels(effective_channel(scenario, phi, T), W, noise)[k])


def rate_from_sinr(gamma) -> float:
    return float(np.sum(np.log2(1.0 + np.asarray(gamma))))


def sum_rate(W, phi, T, scenario, noise) -> float:
    """Sum-rate in bits/s/Hz."""
    return rate_from_sinr(sinr_from_channels(effective_channel(scenario, phi, T), W, noise))
