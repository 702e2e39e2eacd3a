"""Deterministic reference solvers.

* :func:`duality_solve` is the virtual-uplink fixed-point iteration for the
  classic power-minimization problem; its output assigns the dual uplink
  powers directly to the uplink directions.
* :func:`downlink_power_recovery` re-solves the downlink powers for those
  directions so every SINR constraint is met with equality.
* :func:`sca_wpt_solve` alternates the closed-form common energy beam and
  the unit-modulus phase update for RIS-aided power transfer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, DegenerateChannelError, InfeasibleError
from .numerics import dominant_eigvec, max_eig_hermitian, solve_hpd
from .problems import ClassicScenario, WptScenario, project_unit_modulus, wpt_objective


@dataclass
class DualityState:
    p: np.ndarray
    w_hat: np.ndarray
    iteration: int
    residual_history: list[float] = field(default_factory=list)


@dataclass
class ScaState:
    w: np.ndarray
    theta: np.ndarray
    objective_history: list[float] = field(default_factory=list)


def _uplink_step(p: np.ndarray, scenario: ClassicScenario) -> tuple[np.ndarray, np.ndarray]:
    """Uplink directions and ``t(p)`` for the current dual powers."""
    m, u = scenario.antennas, scenario.users
    R = scenario.R
    weighted = np.einsum("t,tmn->mn", p, R)
    eye = np.eye(m)
    w_hat = np.empty((m, u), dtype=complex)
    t = np.empty(u)
    for i in range(u):
        Q = weighted - p[i] * R[i] + scenario.sigma2[i] * eye
        G = p[i] * solve_hpd(Q, R[i])
        w = dominant_eigvec(G, check_degenerate=False).vector
        w /= np.linalg.norm(w)
        gain = np.vdot(w, R[i] @ w).real
        if gain <= 1e-300:
            raise DegenerateChannelError(f"user {i}: channel orthogonal to uplink direction")
        t[i] = np.vdot(w, Q @ w).real / gain
        w_hat[:, i] = w
    return w_hat, t


def duality_solve(scenario: ClassicScenario, T: int = 50, p0=None,
                  early_exit_tol: float | None = None) -> tuple[np.ndarray, DualityState]:
    """Run ``T`` iterations of ``p <- Gamma t(p)`` and return ``W = [sqrt(p_i) w_hat_i]``.

    ``p0`` defaults to all ones.  With ``early_exit_tol`` set, the loop stops
    once ``||p - Gamma t(p)|| / ||p||`` falls below it.
    """
    u = scenario.users
    p = np.ones(u) if p0 is None else np.asarray(p0, dtype=float).reshape(u).copy()
    if np.any(p <= 0):
        raise ContractViolation("initial dual powers must be positive")
    if T < 1:
        raise ContractViolation("T must be at least 1")
    history = []
    iteration = 0
    for iteration in range(1, T + 1):
        _, t = _uplink_step(p, scenario)
        p_next = scenario.gamma * t
        history.append(float(np.linalg.norm(p - p_next) / np.linalg.norm(p)))
        p = p_next
        if early_exit_tol is not None and history[-1] < early_exit_tol:
            break
    w_hat, _ = _uplink_step(p, scenario)
    W = w_hat * np.sqrt(p)
    return W, DualityState(p=p, w_hat=w_hat, iteration=iteration, residual_history=history)


def downlink_power_recovery(scenario: ClassicScenario, w_hat) -> np.ndarray:
    """Downlink beamformers along ``w_hat`` meeting every SINR target with equality.

    Solves ``q_i a_ii - gamma_i sum_{j!=i} a_ij q_j = gamma_i sigma_i^2`` with
    ``a_ij = w_hat_j^H R_i w_hat_j``.

    Raises:
        InfeasibleError: if the solution has a non-positive power.
    """
    w_hat = np.asarray(w_hat, dtype=complex)
    if w_hat.shape != (scenario.antennas, scenario.users):
        raise ContractViolation(f"w_hat must be {scenario.antennas}x{scenario.users}")
    w_hat = w_hat / np.linalg.norm(w_hat, axis=0)
    a = np.real(np.einsum("mj,imn,nj->ij", w_hat.conj(), scenario.R, w_hat))
    gamma = scenario.gamma
    system = -gamma[:, None] * a
    np.fill_diagonal(system, np.diag(a))
    try:
        q = np.linalg.solve(system, gamma * scenario.sigma2)
    except np.linalg.LinAlgError as exc:
        raise InfeasibleError(f"downlink power system is singular: {exc}") from exc
    if np.any(q <= 0) or not np.all(np.isfinite(q)):
        raise InfeasibleError(f"SINR targets unreachable with these directions (powers {q})")
    return w_hat * np.sqrt(q)


def sca_wpt_solve(scenario: WptScenario, theta0=None, m0: int = 10) -> ScaState:
    """Alternate the common energy beam and the phase update for ``m0`` iterations.

    ``theta0`` must be unit modulus; it defaults to all ones.
    """
    n = scenario.elements
    theta = np.ones(n, dtype=complex) if theta0 is None else np.asarray(theta0, dtype=complex).reshape(n)
    if not np.allclose(np.abs(theta), 1.0, atol=1e-12):
        raise ContractViolation("theta0 entries must have unit modulus")
    if m0 < 1:
        raise ContractViolation("m0 must be at least 1")
    C = scenario.cascade               # C[i] = G_i^H, shape (N_t, M_t)
    alpha = scenario.alpha
    history = []
    w = np.zeros(scenario.antennas, dtype=complex)
    for _ in range(m0):
        b = np.einsum("n,inm->im", theta.conj(), C)        # rows: theta^H G_i^H
        A = np.einsum("i,im,ik->mk", alpha, b.conj(), b)   # sum alpha_i G_i theta theta^H G_i^H
        w = np.sqrt(scenario.P) * max_eig_hermitian(A).vector
        c = C @ w                                          # rows: G_i^H w
        mu = np.einsum("i,in,i->n", alpha, c, c.conj() @ theta)
        theta = project_unit_modulus(mu)
        history.append(wpt_objective(w[:, None], theta, scenario))
    return ScaState(w=w[:, None], theta=theta[:, None], objective_history=history)
