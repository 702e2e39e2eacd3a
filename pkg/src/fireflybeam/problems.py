"""Downlink beamforming problems expressed as :class:`~fireflybeam.fa.ProblemSpec`.

Four instances are provided:

* classic: minimize total transmit power subject to per-user SINR targets;
* cognitive: the same with interference caps at primary-user receivers;
* ris: joint active/passive beamforming through a reflecting surface whose
  coefficients satisfy ``|theta_k| <= 1``;
* wpt: maximize weighted received power through the surface with a transmit
  power budget and unit-modulus coefficients.

All targets and powers are linear.  Beamformers are stacked column-wise in
``W`` (``M_t x U``); surface coefficients form the column ``theta``
(``N_t x 1``).  Each builder records the natural magnitude of every
constraint (its value at ``W = 0``) in ``inequality_scale`` /
``equality_scale`` so callers can normalize penalty weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .fa import ProblemSpec, Variable
from .numerics import is_hermitian

PSD_TOL = 1e-10


def _stack(mats, name: str, ndim: int = 3) -> np.ndarray:
    arr = np.asarray(mats, dtype=complex)
    if arr.ndim == ndim - 1 and arr.size == 0:
        return arr.reshape((0,) * ndim)
    if arr.ndim != ndim:
        raise ContractViolation(f"{name} must be a stack of matrices, got shape {arr.shape}")
    return arr


def _positive(values, n: int, name: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(values, dtype=float), (n,)).copy()
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ContractViolation(f"{name} must be positive and finite")
    return arr


def _check_psd(mats: np.ndarray, name: str) -> None:
    for k, R in enumerate(mats):
        if not is_hermitian(R):
            raise ContractViolation(f"{name}[{k}] is not Hermitian")
        lo = np.linalg.eigvalsh(0.5 * (R + R.conj().T))[0]
        if lo < -PSD_TOL * max(1.0, np.abs(R).max()):
            raise ContractViolation(f"{name}[{k}] is not PSD (min eigenvalue {lo:.3e})")


def _gram_forms(W: np.ndarray, R: np.ndarray) -> np.ndarray:
    """``out[k, j] = Re(w_j^H R_k w_j)`` for a stack ``R`` of shape (K, M, M)."""
    return np.real(np.einsum("mj,kmn,nj->kj", W.conj(), R, W, optimize=False))


def _as_w(W, m: int, u: int) -> np.ndarray:
    W = np.asarray(W, dtype=complex)
    if W.shape != (m, u):
        raise ContractViolation(f"W must be {m}x{u}, got {W.shape}")
    return W


def _as_theta(theta, n: int) -> np.ndarray:
    t = np.asarray(theta, dtype=complex)
    if t.shape not in ((n,), (n, 1)):
        raise ContractViolation(f"theta must have {n} entries, got shape {t.shape}")
    return t.reshape(n)


# ---------------------------------------------------------------------------
# Classic beamforming
# ---------------------------------------------------------------------------

@dataclass
class ClassicScenario:
    """Covariances ``R[i]`` (instantaneous ``h h^H`` or statistical), noise and SINR targets."""

    R: np.ndarray
    sigma2: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        self.R = _stack(self.R, "R")
        if self.R.shape[0] < 1 or self.R.shape[1] != self.R.shape[2]:
            raise ContractViolation("R must hold at least one square matrix")
        _check_psd(self.R, "R")
        self.sigma2 = _positive(self.sigma2, self.users, "sigma2")
        self.gamma = _positive(self.gamma, self.users, "gamma")

    @property
    def users(self) -> int:
        return self.R.shape[0]

    @property
    def antennas(self) -> int:
        return self.R.shape[1]


def sinr_classic(W, scenario: ClassicScenario, i: int) -> float:
    W = _as_w(W, scenario.antennas, scenario.users)
    forms = _gram_forms(W, scenario.R[i:i + 1])[0]
    interference = forms.sum() - forms[i]
    return float(forms[i] / (interference + scenario.sigma2[i]))


def classic_constraints(W, scenario: ClassicScenario) -> np.ndarray:
    """``d_i(W) = -w_i^H R_i w_i + gamma_i sum_{j!=i} w_j^H R_i w_j + gamma_i sigma_i^2``."""
    forms = _gram_forms(W, scenario.R)
    own = np.diag(forms)
    interference = forms.sum(axis=1) - own
    return -own + scenario.gamma * (interference + scenario.sigma2)


def total_power(W) -> float:
    W = np.asarray(W)
    return float(np.vdot(W, W).real)


def classic_problem(scenario: ClassicScenario) -> ProblemSpec:
    m, u = scenario.antennas, scenario.users
    return ProblemSpec(
        variables=(Variable("W", (m, u)),),
        objective=lambda x: total_power(x["W"]),
        inequalities=lambda x: classic_constraints(x["W"], scenario),
        n_inequalities=u,
        name="classic",
        inequality_scale=scenario.gamma * scenario.sigma2,
    )


# ---------------------------------------------------------------------------
# Cognitive beamforming
# ---------------------------------------------------------------------------

@dataclass
class CognitiveScenario:
    """Secondary-user covariances ``R_s``, primary-user covariances ``R_p`` and limits."""

    R_s: np.ndarray
    R_p: np.ndarray
    sigma2: np.ndarray
    eta: np.ndarray
    I_to: np.ndarray

    def __post_init__(self):
        self.R_s = _stack(self.R_s, "R_s")
        m = self.R_s.shape[1]
        self.R_p = _stack(self.R_p, "R_p") if len(self.R_p) else np.zeros((0, m, m), complex)
        if self.R_s.shape[0] < 1 or self.R_p.shape[1:] != self.R_s.shape[1:]:
            raise ContractViolation("R_s and R_p must be stacks of equally sized square matrices")
        _check_psd(self.R_s, "R_s")
        _check_psd(self.R_p, "R_p")
        self.sigma2 = _positive(self.sigma2, self.users, "sigma2")
        self.eta = _positive(self.eta, self.users, "eta")
        self.I_to = _positive(self.I_to, self.primary_users, "I_to") if self.primary_users else np.zeros(0)

    @property
    def users(self) -> int:
        return self.R_s.shape[0]

    @property
    def primary_users(self) -> int:
        return self.R_p.shape[0]

    @property
    def antennas(self) -> int:
        return self.R_s.shape[1]


def cognitive_constraints(W, scenario: CognitiveScenario) -> np.ndarray:
    """SINR constraints of the secondary users followed by the interference constraints."""
    forms = _gram_forms(W, scenario.R_s)
    own = np.diag(forms)
    sinr_part = scenario.eta * (forms.sum(axis=1) - own + scenario.sigma2) - own
    if scenario.primary_users == 0:
        return sinr_part
    leaked = _gram_forms(W, scenario.R_p).sum(axis=1)
    return np.concatenate((sinr_part, leaked - scenario.I_to))


def interference_at_primary(W, scenario: CognitiveScenario) -> np.ndarray:
    return _gram_forms(np.asarray(W, dtype=complex), scenario.R_p).sum(axis=1)


def sinr_cognitive(W, scenario: CognitiveScenario, t: int) -> float:
    forms = _gram_forms(np.asarray(W, dtype=complex), scenario.R_s[t:t + 1])[0]
    return float(forms[t] / (forms.sum() - forms[t] + scenario.sigma2[t]))


def cognitive_problem(scenario: CognitiveScenario) -> ProblemSpec:
    m, u, k = scenario.antennas, scenario.users, scenario.primary_users
    return ProblemSpec(
        variables=(Variable("W", (m, u)),),
        objective=lambda x: total_power(x["W"]),
        inequalities=lambda x: cognitive_constraints(x["W"], scenario),
        n_inequalities=u + k,
        name="cognitive",
        inequality_scale=np.concatenate((scenario.eta * scenario.sigma2, scenario.I_to)),
    )


# ---------------------------------------------------------------------------
# RIS-aided beamforming
# ---------------------------------------------------------------------------

@dataclass
class RisScenario:
    """Cascaded channels through the surface.

    ``cascade[i]`` is the ``N_t x M_t`` matrix ``G_i^H = diag(g_i^*) H^H`` so
    that user ``i`` receives ``theta^H G_i^H w``.
    """

    cascade: np.ndarray
    sigma2: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        self.cascade = _stack(self.cascade, "cascade")
        if self.cascade.shape[0] < 1 or min(self.cascade.shape[1:]) < 1:
            raise ContractViolation("cascade must hold at least one N_t x M_t matrix")
        self.sigma2 = _positive(self.sigma2, self.users, "sigma2")
        self.eta = _positive(self.eta, self.users, "eta")

    @property
    def users(self) -> int:
        return self.cascade.shape[0]

    @property
    def elements(self) -> int:
        return self.cascade.shape[1]

    @property
    def antennas(self) -> int:
        return self.cascade.shape[2]


def _ris_amplitudes(W: np.ndarray, theta: np.ndarray, cascade: np.ndarray) -> np.ndarray:
    """``out[i, j] = |theta^H G_i^H w_j|^2``."""
    a = np.einsum("n,inm,mj->ij", theta.conj(), cascade, W, optimize=False)
    return a.real ** 2 + a.imag ** 2


def sinr_ris(W, theta, scenario: RisScenario, i: int) -> float:
    W = _as_w(W, scenario.antennas, scenario.users)
    theta = _as_theta(theta, scenario.elements)
    amp = _ris_amplitudes(W, theta, scenario.cascade[i:i + 1])[0]
    return float(amp[i] / (amp.sum() - amp[i] + scenario.sigma2[i]))


def ris_constraints(W, theta, scenario: RisScenario) -> np.ndarray:
    """Noise-normalized SINR constraints followed by ``|theta_k| - 1``."""
    theta = np.asarray(theta, dtype=complex).reshape(-1)
    amp = _ris_amplitudes(np.asarray(W, dtype=complex), theta, scenario.cascade)
    own = np.diag(amp)
    eta, s2 = scenario.eta, scenario.sigma2
    phi = eta * amp.sum(axis=1) / s2 + eta - (1.0 + eta) * own / s2
    return np.concatenate((phi, np.abs(theta) - 1.0))


def ris_problem(scenario: RisScenario) -> ProblemSpec:
    m, u, n = scenario.antennas, scenario.users, scenario.elements
    return ProblemSpec(
        variables=(Variable("W", (m, u)), Variable("theta", (n, 1), unit_modulus=True)),
        objective=lambda x: total_power(x["W"]),
        inequalities=lambda x: ris_constraints(x["W"], x["theta"], scenario),
        n_inequalities=u + n,
        name="ris",
        inequality_scale=np.concatenate((scenario.eta, np.ones(n))),
    )


# ---------------------------------------------------------------------------
# RIS-aided wireless power transfer
# ---------------------------------------------------------------------------

@dataclass
class WptScenario:
    """Cascaded channels (as in :class:`RisScenario`), receiver weights and power budget."""

    cascade: np.ndarray
    alpha: np.ndarray
    P: float

    def __post_init__(self):
        self.cascade = _stack(self.cascade, "cascade")
        if self.cascade.shape[0] < 1 or min(self.cascade.shape[1:]) < 1:
            raise ContractViolation("cascade must hold at least one N_t x M_t matrix")
        self.alpha = np.broadcast_to(np.asarray(self.alpha, dtype=float), (self.users,)).copy()
        if np.any(self.alpha < 0):
            raise ContractViolation("alpha must be non-negative")
        if not self.P > 0:
            raise ContractViolation("power budget P must be positive")
        self.P = float(self.P)

    @property
    def users(self) -> int:
        return self.cascade.shape[0]

    @property
    def elements(self) -> int:
        return self.cascade.shape[1]

    @property
    def antennas(self) -> int:
        return self.cascade.shape[2]


def wpt_objective(W, theta, scenario: WptScenario) -> float:
    """Weighted sum of received powers ``sum_i alpha_i sum_j |theta^H G_i^H w_j|^2``."""
    W = np.asarray(W, dtype=complex)
    if W.ndim == 1:
        W = W[:, None]
    theta = _as_theta(theta, scenario.elements)
    amp = _ris_amplitudes(W, theta, scenario.cascade)
    return float(scenario.alpha @ amp.sum(axis=1))


def wpt_constraints(W, theta, scenario: WptScenario) -> tuple[np.ndarray, np.ndarray]:
    theta = np.asarray(theta, dtype=complex).reshape(-1)
    return np.array([total_power(W) - scenario.P]), np.abs(theta) - 1.0


def wpt_problem(scenario: WptScenario) -> ProblemSpec:
    m, u, n = scenario.antennas, scenario.users, scenario.elements
    return ProblemSpec(
        variables=(Variable("W", (m, u)), Variable("theta", (n, 1), unit_modulus=True)),
        objective=lambda x: wpt_objective(x["W"], x["theta"], scenario),
        inequalities=lambda x: np.array([total_power(x["W"]) - scenario.P]),
        equalities=lambda x: np.abs(x["theta"].reshape(-1)) - 1.0,
        n_inequalities=1,
        n_equalities=n,
        sense="maximize",
        name="wpt",
        inequality_scale=np.array([scenario.P]),
        equality_scale=np.ones(n),
    )


def project_unit_modulus(theta) -> np.ndarray:
    """``theta_k / |theta_k|`` with zero entries mapped to 1."""
    theta = np.asarray(theta, dtype=complex)
    mag = np.abs(theta)
    out = np.ones_like(theta)
    nz = mag > 0
    out[nz] = theta[nz] / mag[nz]
    return out
