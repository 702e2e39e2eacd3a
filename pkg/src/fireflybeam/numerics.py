"""Complex-matrix kernels: quadratic forms, distances, eigenpairs, HPD solves.

Vectors may be passed either as 1-D arrays or as ``(n, 1)`` columns; returned
vectors are 1-D.  Every routine is pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ContractViolation, IterationLimitError, NumericError, SingularityError

HERMITIAN_RTOL = 1e-10
_STAGNATION_WINDOW = 100
_PERTURB_SEED = 0x5EED


@dataclass(frozen=True)
class EigenResult:
    """Unit-norm eigenvector, its eigenvalue and the achieved residual."""

    vector: np.ndarray
    value: float
    residual: float = 0.0
    iterations: int = 0
    degenerate: bool = False


def as_vector(w, name: str = "vector") -> np.ndarray:
    """Return ``w`` as a finite 1-D complex array."""
    arr = np.asarray(w, dtype=complex)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1 or arr.size == 0:
        raise ContractViolation(f"{name} must be a non-empty column, got shape {np.shape(w)}")
    _require_finite(arr, name)
    return arr


def as_square(m, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ContractViolation(f"{name} must be square, got shape {np.shape(m)}")
    _require_finite(arr, name)
    return arr


def _require_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains NaN or Inf")


def is_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    scale = np.linalg.norm(m)
    return bool(np.linalg.norm(m - m.conj().T) <= rtol * max(scale, np.finfo(float).tiny))


def require_hermitian(m: np.ndarray, name: str = "matrix") -> None:
    if not is_hermitian(m):
        raise ContractViolation(f"{name} is not Hermitian within {HERMITIAN_RTOL:g} relative")


def herm_quadratic_form(w, R) -> float:
    """Real part of ``w^H R w`` for Hermitian ``R``."""
    v = as_vector(w, "w")
    R = as_square(R, "R")
    if R.shape[0] != v.size:
        raise ContractViolation(f"w has length {v.size} but R is {R.shape[0]}x{R.shape[0]}")
    require_hermitian(R, "R")
    return float(np.real(np.vdot(v, R @ v)))


def frobenius_distance(A, B) -> float:
    """Frobenius norm of ``A - B``; shapes must agree exactly."""
    a = np.asarray(A, dtype=complex)
    b = np.asarray(B, dtype=complex)
    if a.shape != b.shape:
        raise ContractViolation(f"shape mismatch {a.shape} vs {b.shape}")
    _require_finite(a, "A")
    _require_finite(b, "B")
    return float(np.linalg.norm((a - b).ravel()))


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # Rotate so the largest-modulus entry is real positive: deterministic output.
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return v
    return v * (np.abs(v[k]) / v[k])


def _spectral_tie(eigenvalues: np.ndarray, rtol: float) -> bool:
    if eigenvalues.size < 2:
        return False
    mags = np.sort(np.abs(eigenvalues))[::-1]
    return bool(mags[0] - mags[1] <= rtol * max(mags[0], np.finfo(float).tiny))


def dominant_eigvec(M, tol: float = 1e-12, max_iter: int = 20_000,
                    check_degenerate: bool = True) -> EigenResult:
    """Dominant eigenpair of ``M`` by power iteration.

    Intended for matrices whose dominant eigenvalue is real and separated,
    e.g. ``P @ S`` with ``P`` Hermitian positive definite and ``S`` Hermitian
    PSD.  Iteration starts from the normalized all-ones vector; a seeded
    perturbation is injected only if the residual stagnates.

    Returns once ``||M v - lambda v|| <= tol * ||M||_F``.

    Raises:
        IterationLimitError: if the residual target is not met in ``max_iter``
            iterations.
    """
    M = as_square(M, "M")
    n = M.shape[0]
    norm_m = float(np.linalg.norm(M))
    if norm_m == 0.0:
        v = np.ones(n, dtype=complex) / np.sqrt(n)
        return EigenResult(v, 0.0, 0.0, 0, degenerate=n > 1)

    rng = None
    v = np.ones(n, dtype=complex) / np.sqrt(n)
    y = M @ v
    best = np.inf
    since_best = 0
    residual = np.inf
    for it in range(1, max_iter + 1):
        ny = np.linalg.norm(y)
        if ny <= 1e-14 * norm_m:
            # Start vector (numerically) in the null space.
            rng = rng or np.random.default_rng(_PERTURB_SEED)
            v = v + rng.standard_normal(n) + 1j * rng.standard_normal(n)
            v /= np.linalg.norm(v)
            y = M @ v
            continue
        v = y / ny
        y = M @ v
        value = np.vdot(v, y)
        residual = float(np.linalg.norm(y - value * v))
        if residual <= tol * norm_m:
            degenerate = check_degenerate and _spectral_tie(np.linalg.eigvals(M), 1e-8)
            return EigenResult(_fix_phase(v), float(value.real), residual, it, degenerate)
        if residual < 0.999 * best:
            best, since_best = residual, 0
        else:
            since_best += 1
            if since_best >= _STAGNATION_WINDOW:
                rng = rng or np.random.default_rng(_PERTURB_SEED)
                v = v + 1e-3 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
                v /= np.linalg.norm(v)
                y = M @ v
                best, since_best = np.inf, 0
    raise IterationLimitError(f"power iteration did not converge in {max_iter} iterations",
                              residual)


def max_eig_hermitian(M) -> EigenResult:
    """Largest eigenvalue of a Hermitian matrix and its unit eigenvector."""
    M = as_square(M, "M")
    require_hermitian(M, "M")
    H = 0.5 * (M + M.conj().T)
    values, vectors = np.linalg.eigh(H)
    v = _fix_phase(vectors[:, -1])
    lam = float(values[-1])
    residual = float(np.linalg.norm(H @ v - lam * v))
    return EigenResult(v, lam, residual, 1, _spectral_tie(values, 1e-8))


def solve_hpd(Q, b) -> np.ndarray:
    """Solve ``Q x = b`` for Hermitian positive definite ``Q`` by Cholesky.

    ``b`` may be a vector or a matrix of right-hand sides.  One step of
    iterative refinement is applied; the result satisfies
    ``||Q x - b|| <= 1e-10 ||b||``.

    Raises:
        SingularityError: if the factorization detects a non-HPD matrix.
        NumericError: if the residual bound cannot be met (ill-conditioning).
    """
    Q = as_square(Q, "Q")
    require_hermitian(Q, "Q")
    rhs = np.asarray(b, dtype=complex)
    vector_input = rhs.ndim == 1
    if rhs.shape[0] != Q.shape[0]:
        raise ContractViolation(f"b has {rhs.shape[0]} rows but Q is {Q.shape[0]}x{Q.shape[0]}")
    _require_finite(rhs, "b")
    try:
        factor = scipy.linalg.cho_factor(0.5 * (Q + Q.conj().T), lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(f"Q is not positive definite: {exc}") from exc
    x = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    x = x + scipy.linalg.cho_solve(factor, rhs - Q @ x, check_finite=False)
    norm_b = np.linalg.norm(rhs)
    residual = np.linalg.norm(Q @ x - rhs)
    if residual > 1e-10 * norm_b:
        raise NumericError(f"HPD solve residual {residual:.3e} exceeds 1e-10*||b|| = {1e-10 * norm_b:.3e}")
    return x if not vector_input else x.reshape(-1)
