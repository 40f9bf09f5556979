"""Dense complex linear-algebra helpers used by the beamforming solvers.

Thin, contract-checked wrappers around LAPACK (via numpy/scipy). Sizes here
are tiny (n = M^2 <= 64), so robustness and a deterministic eigenvector
phase convention matter more than speed.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

__all__ = ["cholesky", "hermitian_eig_max", "gen_eig_max", "solve", "fix_phase"]

_HERM_TOL = 1e-10


def _check_hermitian(X: np.ndarray, name: str = "matrix") -> None:
    scale = np.linalg.norm(X)
    if scale > 0 and np.linalg.norm(X - X.conj().T) > _HERM_TOL * scale:
        raise ValueError(f"{name} is not Hermitian")


def cholesky(K: np.ndarray) -> np.ndarray:
    """Upper-triangular J with J^H J = K for Hermitian positive definite K."""
    _check_hermitian(K, "cholesky input")
    try:
        L = np.linalg.cholesky(K)  # lower, L L^H = K
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("not positive definite") from None
    return L.conj().T


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate v so its largest-magnitude component is real positive."""
    k = int(np.argmax(np.abs(v)))
    pivot = v[k]
    if pivot == 0:
        return v
    return v * (abs(pivot) / pivot)


def hermitian_eig_max(H: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and a unit eigenvector of Hermitian H.

    The eigenvector phase is fixed so the largest-magnitude component is
    real positive, making results reproducible across runs.
    """
    _check_hermitian(H, "eigensolver input")
    vals, vecs = np.linalg.eigh((H + H.conj().T) / 2.0)
    v = fix_phase(vecs[:, -1])
    return float(vals[-1]), v / np.linalg.norm(v)


def gen_eig_max(Anum: np.ndarray, Bden: np.ndarray) -> tuple[float, np.ndarray]:
    """Maximize x^H Anum x / x^H Bden x over x != 0, Bden positive definite.

    Solved by whitening rather than forming Bden^{-1} Anum (which is
    non-Hermitian and fragile when Bden is ill conditioned): factor
    Bden = J^H J, take the top eigenpair of J^{-H} Anum J^{-1}, and map the
    eigenvector back through J^{-1}. Returns (lambda_max, v) with v a unit
    vector, phase-fixed.
    """
    J = cholesky(Bden)
    # S = J^{-H} Anum J^{-1} via two triangular solves
    T = solve_triangular(J.conj().T, Anum, lower=True)
    S = solve_triangular(J.conj().T, T.conj().T, lower=True).conj().T
    lam, u = hermitian_eig_max((S + S.conj().T) / 2.0)
    v = solve_triangular(J, u, lower=False)
    v = fix_phase(v)
    return lam, v / np.linalg.norm(v)


def solve(K: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Solve K x = y for square invertible K."""
    return np.linalg.solve(K, y)
