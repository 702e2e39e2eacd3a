"""Channel and scenario generation for the four beamforming problems.

Link budgets are handled in dB; everything handed to :mod:`fireflybeam.problems`
is linear (watts, linear SINR).  Angles are accepted in degrees.

Scenario configurations are plain dictionaries (loadable from JSON) with the
keys listed in :data:`DEFAULTS`; :func:`build_scenario` fills nothing in
silently, so call :func:`default_config` and override what you need.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError, ContractViolation
from .problems import ClassicScenario, CognitiveScenario, RisScenario, WptScenario


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def dbm_to_watts(dbm):
    return db_to_linear(dbm) * 1e-3


def watts_to_dbm(w):
    return linear_to_db(np.asarray(w, dtype=float) * 1e3)


@dataclass(frozen=True)
class LinkBudget:
    """Large-scale terms of one link plus the receiver noise parameters.

    ``shadowing_db`` is the realized shadowing loss of this link (positive
    means extra attenuation).
    """

    pathloss_db: float = 0.0
    shadowing_db: float = 0.0
    antenna_gain_db: float = 0.0
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 5.0
    bandwidth_hz: float = 15e3

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ContractViolation("bandwidth must be positive")

    @property
    def gain_db(self) -> float:
        return self.antenna_gain_db - self.pathloss_db - self.shadowing_db


@dataclass(frozen=True)
class CovarianceParams:
    """Uniform-linear-array covariance toward ``angle_deg`` with Gaussian angular spread."""

    angle_deg: float
    spread_deg: float = 2.0
    spacing_ratio: float = 0.5
    antennas: int = 8

    def __post_init__(self):
        if self.antennas < 1:
            raise ContractViolation("antennas must be at least 1")
        if self.spread_deg < 0 or self.spacing_ratio <= 0:
            raise ContractViolation("spread must be non-negative and spacing positive")


def rayleigh_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. CN(0, 1) entries: variance 1/2 on each real and imaginary part."""
    if dim < 1:
        raise ContractViolation(f"dimension must be at least 1, got {dim}")
    return (rng.standard_normal(dim) + 1j * rng.standard_normal(dim)) * math.sqrt(0.5)


def rayleigh_matrix(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ContractViolation(f"shape must be positive, got {(rows, cols)}")
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) * math.sqrt(0.5)


def classic_pathloss_db(l_km: float) -> float:
    """Macro-cell path loss ``35 + 34.5 log10(l)`` with ``l`` in km."""
    if not l_km > 0:
        raise ContractViolation(f"distance must be positive, got {l_km}")
    return 35.0 + 34.5 * math.log10(l_km)


def ris_pathloss_db(d_m: float) -> float:
    """Signed large-scale gain ``-30 - 22 log10(d)`` with ``d`` in metres."""
    if not d_m > 0:
        raise ContractViolation(f"distance must be positive, got {d_m}")
    return -30.0 - 22.0 * math.log10(d_m)


def noise_power_dbm(budget: LinkBudget) -> float:
    return budget.noise_psd_dbm_hz + 10.0 * math.log10(budget.bandwidth_hz) + budget.noise_figure_db


def steering_vector(angle_deg: float, antennas: int, spacing_ratio: float = 0.5) -> np.ndarray:
    """ULA response ``a_m = exp(-j 2 pi spacing (m-1) sin(angle))``.

    The sign matches :func:`angular_covariance`: ``a a^H`` equals the
    covariance at zero angular spread.
    """
    m = np.arange(antennas)
    return np.exp(-2j * np.pi * spacing_ratio * m * math.sin(math.radians(angle_deg)))


def angular_covariance(params: CovarianceParams) -> np.ndarray:
    """Entry ``(m, n)``: ``exp(j2pi s (n-m) sin z) * exp(-2 [pi s d (n-m) cos z]^2)``.

    ``s`` is the spacing-to-wavelength ratio, ``z`` the angle and ``d`` the
    angular spread (both in radians).
    """
    zeta = math.radians(params.angle_deg)
    spread = math.radians(params.spread_deg)
    idx = np.arange(params.antennas)
    diff = idx[None, :] - idx[:, None]           # n - m
    s = params.spacing_ratio
    phase = np.exp(2j * np.pi * s * diff * math.sin(zeta))
    taper = np.exp(-2.0 * (np.pi * s * spread * diff * math.cos(zeta)) ** 2)
    return phase * taper


def ris_cascade(g, H) -> np.ndarray:
    """``G^H = diag(conj(g)) H^H`` for surface-to-user ``g`` (N_t) and BS-to-surface ``H`` (M_t x N_t)."""
    g = np.asarray(g, dtype=complex)
    if g.ndim == 2 and g.shape[1] == 1:
        g = g[:, 0]
    H = np.asarray(H, dtype=complex)
    if g.ndim != 1 or H.ndim != 2 or H.shape[1] != g.size:
        raise ContractViolation(f"g has shape {g.shape} but H is {H.shape}; need H with {g.size} columns")
    return g.conj()[:, None] * H.conj().T


# ---------------------------------------------------------------------------
# Scenario configs
# ---------------------------------------------------------------------------

DEFAULTS: dict[str, dict[str, Any]] = {
    "classic": {
        "users": 2,
        "antennas": 4,
        "sinr_db": 10.0,
        "cell_radius_km": 2.0,
        "min_distance_km": 0.05,
        "antenna_gain_db": 15.0,
        "shadowing_std_db": 8.0,
        "noise_psd_dbm_hz": -174.0,
        "noise_figure_db": 5.0,
        "bandwidth_hz": 15e3,
    },
    "cognitive": {
        "antennas": 8,
        "su_angles_deg": [-5.0, 10.0, 25.0],
        "pu_angles_deg": [30.0, 50.0],
        "spread_deg": 2.0,
        "spacing_ratio": 0.5,
        "sigma2": 0.1,
        "sinr_db": 0.0,
        "interference_caps": [1e-3, 1e-4],
    },
    "ris": {
        "users": 2,
        "antennas": 3,
        "ris_elements": 8,
        "sinr_db": 10.0,
        "bs_ris_distance_m": 10.0,
        "user_distance_m": 6.0,
        "noise_dbm": -124.0,
    },
    "wpt": {
        "users": 2,
        "antennas": 3,
        "ris_elements": 8,
        "power_dbm": 30.0,
        "bs_ris_distance_m": 10.0,
        "user_distance_m": 2.0,
        "weights": None,
    },
}


def default_config(kind: str) -> dict[str, Any]:
    if kind not in DEFAULTS:
        raise ConfigError(f"unknown scenario kind {kind!r}; expected one of {sorted(DEFAULTS)}")
    return copy.deepcopy(DEFAULTS[kind])


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a JSON object from ``path``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def _require(config: Mapping[str, Any], kind: str) -> None:
    missing = tuple(key for key in DEFAULTS[kind] if key not in config)
    if missing:
        raise ConfigError(f"incomplete {kind} config", missing)


def _classic(config, rng) -> ClassicScenario:
    u, m = int(config["users"]), int(config["antennas"])
    lo, hi = float(config["min_distance_km"]), float(config["cell_radius_km"])
    if not 0 < lo <= hi:
        raise ConfigError("need 0 < min_distance_km <= cell_radius_km")
    budget = LinkBudget(noise_psd_dbm_hz=config["noise_psd_dbm_hz"],
                        noise_figure_db=config["noise_figure_db"],
                        bandwidth_hz=config["bandwidth_hz"])
    sigma2 = float(dbm_to_watts(noise_power_dbm(budget)))
    R = np.empty((u, m, m), dtype=complex)
    for i in range(u):
        link = LinkBudget(pathloss_db=classic_pathloss_db(rng.uniform(lo, hi)),
                          shadowing_db=config["shadowing_std_db"] * rng.standard_normal(),
                          antenna_gain_db=config["antenna_gain_db"])
        h = math.sqrt(db_to_linear(link.gain_db)) * rayleigh_vector(m, rng)
        R[i] = np.outer(h, h.conj())
    return ClassicScenario(R=R, sigma2=np.full(u, sigma2),
                           gamma=db_to_linear(np.broadcast_to(config["sinr_db"], (u,))))


def _cognitive(config, rng) -> CognitiveScenario:
    m = int(config["antennas"])

    def covariances(angles):
        return np.array([angular_covariance(CovarianceParams(a, config["spread_deg"],
                                                             config["spacing_ratio"], m))
                         for a in angles]).reshape(len(angles), m, m)

    su, pu = list(config["su_angles_deg"]), list(config["pu_angles_deg"])
    caps = np.asarray(config["interference_caps"], dtype=float).reshape(-1)
    if caps.size != len(pu):
        raise ConfigError(f"{len(pu)} primary users but {caps.size} interference caps")
    return CognitiveScenario(R_s=covariances(su), R_p=covariances(pu),
                             sigma2=np.full(len(su), float(config["sigma2"])),
                             eta=db_to_linear(np.broadcast_to(config["sinr_db"], (len(su),))),
                             I_to=caps)


def _cascades(config, rng) -> np.ndarray:
    u, m, n = int(config["users"]), int(config["antennas"]), int(config["ris_elements"])
    h_gain = db_to_linear(ris_pathloss_db(config["bs_ris_distance_m"]))
    g_gain = db_to_linear(ris_pathloss_db(config["user_distance_m"]))
    H = math.sqrt(h_gain) * rayleigh_matrix(m, n, rng)
    return np.stack([ris_cascade(math.sqrt(g_gain) * rayleigh_vector(n, rng), H) for _ in range(u)])


def _ris(config, rng) -> RisScenario:
    cascade = _cascades(config, rng)
    u = cascade.shape[0]
    return RisScenario(cascade=cascade,
                       sigma2=np.full(u, float(dbm_to_watts(config["noise_dbm"]))),
                       eta=db_to_linear(np.broadcast_to(config["sinr_db"], (u,))))


def _wpt(config, rng) -> WptScenario:
    cascade = _cascades(config, rng)
    weights = config["weights"]
    alpha = np.ones(cascade.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    return WptScenario(cascade=cascade, alpha=alpha, P=float(dbm_to_watts(config["power_dbm"])))


_BUILDERS = {"classic": _classic, "cognitive": _cognitive, "ris": _ris, "wpt": _wpt}


def build_scenario(kind: str, config: Mapping[str, Any], rng: np.random.Generator):
    """Draw one scenario realization of the given kind.

    Classic users are placed at a distance drawn uniformly in
    ``[min_distance_km, cell_radius_km]`` with log-normal shadowing; RIS and
    WPT users sit at a fixed distance from the surface with Rayleigh fading on
    both hops.  The cognitive scenario is deterministic.

    Raises:
        ConfigError: listing every missing key.
    """
    if kind not in _BUILDERS:
        raise ConfigError(f"unknown scenario kind {kind!r}; expected one of {sorted(_BUILDERS)}")
    _require(config, kind)
    try:
        return _BUILDERS[kind](config, rng)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid {kind} config: {exc}") from exc
