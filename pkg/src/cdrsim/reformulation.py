"""Rate-product objective over a whitened beamforming vector.

The sum-rate maximization over the M x M relay matrix W is rewritten as the
maximization of a product of two fractional quadratic forms

    G(w~) = (w~^H A w~ / w~^H B w~) * (w~^H C w~ / w~^H D w~)

over the whitened vector w~ = J vec(W), where J^H J is the Gram matrix of
the relay power constraint. The chain is

  1. vectorize: w = vec(W) column-major, so that scalar link combinations
     like h_br W h_r1 become row-vector products (h_r1^T kron h_br) w;
  2. the power constraint becomes w^H (J^H J) w <= P_R with J upper
     triangular from a Cholesky factorization (the constraint is active at
     any optimum, so it is treated as an equality);
  3. substitute w = J^{-1} w~, and replace the "+1" noise constants by
     w~^H w~ / P_R, which is exact on the sphere ||w~||^2 = P_R and makes
     both fractions scale free.

Because each numerator equals its denominator plus a PSD term, G >= 1
everywhere, and 1/2 log2(G) equals the achieved sum rate whenever w~ sits
on the full-power sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import linalg
from .model import ChannelSet, RatePair

__all__ = ["QuadraticForms", "Solution", "build_forms", "lift", "objective_G", "kkt_residual"]


@dataclass(frozen=True)
class QuadraticForms:
    """The four Hermitian matrices of the rate-product objective.

    A/B describe flow 1 (relayed uplink), C/D flow 2 (direct downlink);
    J is the upper-triangular whitening factor of the power constraint.
    a, C1 and f are the unwhitened building blocks kept for the upper-bound
    subproblems: a^H w = h_2r W h_r1, C1 w = (h_2r W)^T, and
    f^H w = h_2b (h_2r W h_r1) - h_21 (h_2r W h_rb).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    J: np.ndarray
    antennas: int
    node_power: float
    relay_budget: float
    a: np.ndarray
    C1: np.ndarray
    f: np.ndarray


@dataclass
class Solution:
    """Solver output: whitened vector, lifted beamformer, rates, diagnostics."""

    w_tilde: np.ndarray
    W: np.ndarray
    rates: RatePair
    objective: float
    iterations: int
    converged: bool
    algorithm: str
    diagnostics: dict = field(default_factory=dict)


def _hermitize(X: np.ndarray) -> np.ndarray:
    return (X + X.conj().T) / 2.0


class _RawQuadratics:
    """Unwhitened w-space matrices shared by the objective and the bound."""

    def __init__(self, cs: ChannelSet, P: float):
        m = cs.antennas
        eye = np.eye(m, dtype=complex)
        # row operators acting on w = vec(W)
        k_r1_br = np.kron(cs.h_r1, cs.h_br)            # (h_r1^T x h_br) w = h_br W h_r1
        self.C1B = np.kron(eye, cs.h_br.reshape(1, m))  # (I x h_br) w = (h_br W)^T
        self.C1 = np.kron(eye, cs.h_2r.reshape(1, m))   # (I x h_2r) w = (h_2r W)^T
        T_r1 = np.kron(cs.h_r1.reshape(1, m), eye)      # (h_r1^T x I) w = W h_r1
        T_rb = np.kron(cs.h_rb.reshape(1, m), eye)      # (h_rb^T x I) w = W h_rb

        self.u1 = k_r1_br.conj()                        # |u1^H w|^2 = |h_br W h_r1|^2
        self.a = np.kron(cs.h_r1, cs.h_2r).conj()       # |a^H w|^2 = |h_2r W h_r1|^2
        f_h = cs.h_2b * np.kron(cs.h_r1, cs.h_2r) - cs.h_21 * np.kron(cs.h_rb, cs.h_2r)
        self.f = f_h.conj()

        self.B1 = _hermitize(self.C1B.conj().T @ self.C1B)
        self.K_r1 = _hermitize(T_r1.conj().T @ T_r1)    # w^H K_r1 w = ||W h_r1||^2
        self.K_rb = _hermitize(T_rb.conj().T @ T_rb)    # w^H K_rb w = ||W h_rb||^2
        self.C1HC1 = _hermitize(self.C1.conj().T @ self.C1)
        self.h21_sq = abs(cs.h_21) ** 2
        # power-constraint Gram: w^H gram w = relay transmit power
        n = m * m
        self.gram = _hermitize(P * (self.K_rb + self.K_r1) + np.eye(n, dtype=complex))


def build_forms(cs: ChannelSet, P: float, P_R: float) -> QuadraticForms:
    """Assemble (A, B, C, D, J) for one channel realization.

    The whitening congruences J^{-H} X J^{-1} are applied through triangular
    solves, and every output matrix is re-symmetrized to remove roundoff
    asymmetry before any eigensolve consumes it.
    """
    raw = _RawQuadratics(cs, P)
    n = cs.antennas ** 2
    eye = np.eye(n, dtype=complex)
    J = linalg.cholesky(raw.gram)

    def whiten(X: np.ndarray) -> np.ndarray:
        T = solve_triangular(J.conj().T, X, lower=True)
        Y = solve_triangular(J.conj().T, T.conj().T, lower=True).conj().T
        return _hermitize(Y)

    A = whiten(P * np.outer(raw.u1, raw.u1.conj()) + raw.B1) + eye / P_R
    B = whiten(raw.B1) + eye / P_R

    den2 = raw.h21_sq * raw.C1HC1 + np.outer(raw.a, raw.a.conj())
    C = whiten(den2 + P * np.outer(raw.f, raw.f.conj())) + (raw.h21_sq / P_R) * eye
    D = whiten(den2) + (raw.h21_sq / P_R) * eye

    return QuadraticForms(
        A=_hermitize(A),
        B=_hermitize(B),
        C=_hermitize(C),
        D=_hermitize(D),
        J=J,
        antennas=cs.antennas,
        node_power=P,
        relay_budget=P_R,
        a=raw.a,
        C1=raw.C1,
        f=raw.f,
    )


def lift(forms: QuadraticForms, w_tilde: np.ndarray) -> np.ndarray:
    """Map a whitened vector back to a full-power M x M beamformer.

    The norm of w_tilde is irrelevant (the objective is scale free); the
    output always uses the whole relay budget.
    """
    norm = np.linalg.norm(w_tilde)
    if norm == 0:
        raise ValueError("zero beamforming vector")
    w = solve_triangular(forms.J, math.sqrt(forms.relay_budget) * w_tilde / norm, lower=False)
    m = forms.antennas
    return w.reshape((m, m), order="F")


def _quad(X: np.ndarray, v: np.ndarray) -> float:
    return float(np.real(np.vdot(v, X @ v)))


def objective_G(forms: QuadraticForms, w_tilde: np.ndarray) -> tuple[float, float, float]:
    """Evaluate (G, g1, g2) at w_tilde; invariant to any nonzero rescaling."""
    if not np.any(w_tilde):
        raise ValueError("zero beamforming vector")
    g1 = _quad(forms.A, w_tilde) / _quad(forms.B, w_tilde)
    g2 = _quad(forms.C, w_tilde) / _quad(forms.D, w_tilde)
    return g1 * g2, g1, g2


def kkt_residual(forms: QuadraticForms, w_tilde: np.ndarray) -> float:
    """Relative first-order stationarity residual of the rate product.

    Setting the gradient of G to zero yields the fixed-point equation
    G(w~) [ (w~^H B w~) D + (w~^H D w~) B ] w~
        = [ (w~^H C w~) A + (w~^H A w~) C ] w~,
    and this returns ||G V w~ - R w~|| / ||R w~||. Zero at any stationary
    point; invariant under rescaling of w_tilde.
    """
    G, _, _ = objective_G(forms, w_tilde)
    V = _quad(forms.B, w_tilde) * forms.D + _quad(forms.D, w_tilde) * forms.B
    R = _quad(forms.C, w_tilde) * forms.A + _quad(forms.A, w_tilde) * forms.C
    rw = R @ w_tilde
    return float(np.linalg.norm(G * (V @ w_tilde) - rw) / np.linalg.norm(rw))
