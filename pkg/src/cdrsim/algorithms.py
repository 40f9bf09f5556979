"""Beamforming solvers for the rate-product objective.

Five ways to pick the whitened vector w~:

* max_snr1 / max_sinr2 -- single-criterion baselines; each maximizes one of
  the two fractions exactly via a generalized eigenproblem.
* asa -- weights the two whitened quotient matrices B^{-1}A and D^{-1}C by
  an adaptive factor alpha, takes the dominant eigenvector of the average,
  and searches alpha in [0, 1]; candidates are scored by the true product.
* pia -- power iteration on the first-order stationarity equation
  G V(w~) w~ = R(w~) w~, re-solving the linear system at each iterate.
* lss -- searches the two-dimensional span of the baseline vectors for the
  best real combination w~1 + b w~2.

Every candidate is scored after projection onto the full-power sphere and
the winning vector is returned exactly as scored, so the reported objective
is the tracked maximum (in particular, asa and lss can never report less
than either baseline: the baseline vectors are scored through the same
code path).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg, scalar_opt
from .model import RatePair
from .reformulation import QuadraticForms, Solution, lift, objective_G

__all__ = ["PiaConfig", "max_snr1", "max_sinr2", "asa", "pia", "lss"]


@dataclass(frozen=True)
class PiaConfig:
    """Power-iteration settings: iteration cap, relative-G stop, start vector."""

    max_iter: int = 20
    rel_tol: float = 1e-8
    init: str = "pureamp"  # pureamp | maxsnr1 | maxsinr2 | ones

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.init not in ("pureamp", "maxsnr1", "maxsinr2", "ones"):
            raise ValueError(f"unknown init strategy {self.init!r}")


def _quad(X: np.ndarray, v: np.ndarray) -> float:
    return float(np.real(np.vdot(v, X @ v)))


def _to_sphere(forms: QuadraticForms, v: np.ndarray) -> np.ndarray:
    return math.sqrt(forms.relay_budget) * v / np.linalg.norm(v)


def _solution_at(forms: QuadraticForms, w_tilde: np.ndarray, algorithm: str,
                 iterations: int = 0, converged: bool = True,
                 diagnostics: dict | None = None) -> Solution:
    """Package an already power-normalized vector with its rates."""
    G, g1, g2 = objective_G(forms, w_tilde)
    r1 = 0.5 * math.log2(g1)
    r2 = 0.5 * math.log2(g2)
    return Solution(
        w_tilde=w_tilde,
        W=lift(forms, w_tilde),
        rates=RatePair(r1=r1, r2=r2, sum=r1 + r2),
        objective=G,
        iterations=iterations,
        converged=converged,
        algorithm=algorithm,
        diagnostics=diagnostics or {},
    )


def max_snr1(forms: QuadraticForms) -> Solution:
    """Maximize the first-flow quotient g1 alone (full-power SNR1 optimum)."""
    _, v = linalg.gen_eig_max(forms.A, forms.B)
    return _solution_at(forms, _to_sphere(forms, v), "maxsnr1")


def max_sinr2(forms: QuadraticForms) -> Solution:
    """Maximize the second-flow quotient g2 alone (full-power SINR2 optimum)."""
    _, v = linalg.gen_eig_max(forms.C, forms.D)
    return _solution_at(forms, _to_sphere(forms, v), "maxsinr2")


def _power_iteration(Pi: np.ndarray, v0: np.ndarray, max_iter: int = 200,
                     tol: float = 1e-10) -> tuple[np.ndarray, bool]:
    """Dominant eigenvector of a (possibly non-Hermitian) square matrix.

    Convergence is checked phase-invariantly via |<v_k, v_{k+1}>| -> 1;
    a complex dominant eigenvalue pair shows up as oscillation and is
    reported as failure.
    """
    v = v0 / np.linalg.norm(v0)
    for _ in range(max_iter):
        u = Pi @ v
        norm = math.sqrt(np.real(np.vdot(u, u)))
        if norm == 0:
            return v, False
        u = u / norm
        if abs(1.0 - abs(np.vdot(v, u))) < tol:
            return u, True
        v = u
    return v, False


def _grad_quotient(num: np.ndarray, den: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Wirtinger gradient of v^H num v / v^H den v with respect to v^H."""
    dv = _quad(den, v)
    g = _quad(num, v) / dv
    return 2.0 * (num @ v - g * (den @ v)) / dv


def _projected_ascent(forms: QuadraticForms, alpha: float, v0: np.ndarray,
                      steps: int = 50) -> np.ndarray:
    """Maximize alpha*g1 + (1-alpha)*g2 on the unit sphere by ascent steps."""
    v = v0 / np.linalg.norm(v0)

    def val(x):
        _, g1, g2 = objective_G(forms, x)
        return alpha * g1 + (1.0 - alpha) * g2

    cur = val(v)
    step = 1.0
    for _ in range(steps):
        grad = alpha * _grad_quotient(forms.A, forms.B, v) \
            + (1.0 - alpha) * _grad_quotient(forms.C, forms.D, v)
        gnorm = np.linalg.norm(grad)
        if gnorm == 0:
            break
        cand = v + step * grad / gnorm
        cand = cand / np.linalg.norm(cand)
        new = val(cand)
        if new > cur:
            v, cur = cand, new
            step *= 1.5
        else:
            step *= 0.5
    return v


def asa(forms: QuadraticForms, grid_points: int = 51, tol: float = 1e-6) -> Solution:
    """Adaptive averaging of the two whitened quotient subspaces.

    For each weight alpha the dominant eigenvector of
    Pi(alpha) = alpha B^{-1}A + (1-alpha) D^{-1}C is a candidate; alpha is
    tuned by grid search plus Nelder-Mead on the true objective G. The
    single-criterion eigenvectors (the exactly solved alpha = 1 / alpha = 0
    cases) are always in the candidate set, so the result can never fall
    below either baseline.

    Pi is non-Hermitian; its dominant eigenvector comes from plain power
    iteration, with a projected-ascent fallback for the rare weights where
    the iteration oscillates (counted in diagnostics).
    """
    X = linalg.solve(forms.B, forms.A)
    Y = linalg.solve(forms.D, forms.C)
    n = forms.A.shape[0]
    v0 = np.ones(n, dtype=complex) / math.sqrt(n)

    _, v1 = linalg.gen_eig_max(forms.A, forms.B)
    _, v2 = linalg.gen_eig_max(forms.C, forms.D)
    fallbacks = 0
    best = {"G": -math.inf, "w": None, "alpha": math.nan}

    def score(v: np.ndarray, alpha: float) -> float:
        w = _to_sphere(forms, v)
        G = objective_G(forms, w)[0]
        if G > best["G"]:
            best.update(G=G, w=w, alpha=alpha)
        return G

    ascent_start = v1 if score(v1, 1.0) >= score(v2, 0.0) else v2

    def eval_alpha(x) -> float:
        nonlocal fallbacks
        alpha = float(np.atleast_1d(x)[0])
        Pi = alpha * X + (1.0 - alpha) * Y
        v, ok = _power_iteration(Pi, v0)
        if not ok:
            fallbacks += 1
            v = _projected_ascent(forms, alpha, ascent_start)
        return score(v, alpha)

    scalar_opt.maximize(eval_alpha, [(0.0, 1.0)], grid_points, tol)
    return _solution_at(forms, best["w"], "asa",
                        diagnostics={"alpha": best["alpha"],
                                     "power_iteration_fallbacks": fallbacks})


def _initial_vector(forms: QuadraticForms, strategy: str) -> np.ndarray:
    n = forms.A.shape[0]
    if strategy == "pureamp":
        # whitened vectorized scaled identity; the scale cancels on normalization
        return forms.J @ np.eye(forms.antennas, dtype=complex).flatten(order="F")
    if strategy == "maxsnr1":
        return linalg.gen_eig_max(forms.A, forms.B)[1]
    if strategy == "maxsinr2":
        return linalg.gen_eig_max(forms.C, forms.D)[1]
    return np.ones(n, dtype=complex)


def pia(forms: QuadraticForms, cfg: PiaConfig | None = None) -> Solution:
    """Fixed-point power iteration on the stationarity equation.

    Each step solves V(w~) q = R(w~) w~ with
    V = (w~^H B w~) D + (w~^H D w~) B and R = (w~^H C w~) A + (w~^H A w~) C,
    then renormalizes q to the power sphere. Stops on relative change of G
    below rel_tol or at max_iter. Convergence is not guaranteed for this
    non-convex problem, so the best iterate seen is returned rather than
    the last one.
    """
    cfg = cfg or PiaConfig()
    w = _to_sphere(forms, _initial_vector(forms, cfg.init))

    G_prev = objective_G(forms, w)[0]
    best_G, best_w = G_prev, w
    converged = False
    ridge_used = False
    iterations = cfg.max_iter

    for n_iter in range(1, cfg.max_iter + 1):
        V = _quad(forms.B, w) * forms.D + _quad(forms.D, w) * forms.B
        rhs = (_quad(forms.C, w) * forms.A + _quad(forms.A, w) * forms.C) @ w
        try:
            q = linalg.solve(V, rhs)
        except np.linalg.LinAlgError:
            ridge = 1e-12 * np.real(np.trace(V)) / V.shape[0]
            q = linalg.solve(V + ridge * np.eye(V.shape[0]), rhs)
            ridge_used = True
        w = _to_sphere(forms, q)
        G = objective_G(forms, w)[0]
        if G > best_G:
            best_G, best_w = G, w
        if abs(G - G_prev) / G_prev < cfg.rel_tol:
            converged = True
            iterations = n_iter
            break
        G_prev = G

    return _solution_at(forms, best_w, "pia", iterations=iterations, converged=converged,
                        diagnostics={"ridge_fallback": ridge_used, "init": cfg.init})


def lss(forms: QuadraticForms, grid_points: int = 51, tol: float = 1e-6,
        phase_align: bool = False, complex_b: bool = False) -> Solution:
    """Best combination w~1 + b w~2 of the two single-criterion vectors.

    The real coefficient b is compactified through b = tan(theta): the
    candidate cos(theta) w~1 + sin(theta) w~2 is a positive multiple of
    w~1 + b w~2 for every finite b, and theta = +-pi/2 contributes the pure
    w~2 endpoint. G is scale free, so theta in [-pi/2, pi/2] covers the
    whole span; the grid contains theta in {-pi/2, 0, pi/2}, which makes
    the result at least as good as both baselines.

    phase_align rotates w~2 so <w~1, w~2> is real positive before the
    search; complex_b extends the search with an independent phase on w~2.
    Both are off by default.
    """
    _, v1 = linalg.gen_eig_max(forms.A, forms.B)
    _, v2 = linalg.gen_eig_max(forms.C, forms.D)
    if phase_align:
        inner = np.vdot(v1, v2)
        if inner != 0:
            v2 = v2 * (abs(inner) / inner)

    best = {"G": -math.inf, "w": None, "theta": 0.0, "phi": 0.0}

    def score(v: np.ndarray, theta: float, phi: float) -> float:
        if np.linalg.norm(v) < 1e-12:  # exact cancellation when v2 == c*v1
            return 0.0
        w = _to_sphere(forms, v)
        G = objective_G(forms, w)[0]
        if G > best["G"]:
            best.update(G=G, w=w, theta=theta, phi=phi)
        return G

    def evaluate(x) -> float:
        x = np.atleast_1d(x)
        theta = float(x[0])
        phi = float(x[1]) if x.size > 1 else 0.0
        return score(math.cos(theta) * v1 + math.sin(theta) * np.exp(1j * phi) * v2, theta, phi)

    half_pi = math.pi / 2.0
    score(v1, 0.0, 0.0)        # pure w~1, exact baseline candidate
    score(v2, half_pi, 0.0)    # pure w~2, exact baseline candidate
    if complex_b:
        scalar_opt.maximize(evaluate, [(-half_pi, half_pi), (-math.pi, math.pi)], 21, tol)
    else:
        scalar_opt.maximize(evaluate, [(-half_pi, half_pi)], grid_points, tol)

    b = math.tan(best["theta"]) if abs(best["theta"]) < half_pi else math.inf
    return _solution_at(forms, best["w"], "lss",
                        diagnostics={"theta": best["theta"], "b": b, "phi": best["phi"]})
