"""Derivative-free maximization in one or two dimensions.

Coarse lattice search to locate the basin, then Nelder-Mead to polish. Used
for the subspace-averaging weight, the span-combination coefficient, and
the noise-split/power-split search of the upper bound. Everything here is
deterministic: the same callback and box always give the same result.
"""

from __future__ import annotations

import itertools

import numpy as np

__all__ = ["grid_search", "nelder_mead", "maximize"]


def _as_box(box) -> list[tuple[float, float]]:
    box = [(float(lo), float(hi)) for lo, hi in box]
    if not 1 <= len(box) <= 2:
        raise ValueError("box must have 1 or 2 dimensions")
    for lo, hi in box:
        if not lo < hi:
            raise ValueError("box bounds must satisfy lo < hi")
    return box


def _clamp(x: np.ndarray, box) -> np.ndarray:
    return np.array([min(max(xi, lo), hi) for xi, (lo, hi) in zip(x, box)])


def grid_search(f, box, points_per_dim: int):
    """Evaluate f on a uniform lattice (endpoints included) and return the best.

    Ties break toward the lexicographically first lattice point, so results
    do not depend on evaluation order.
    """
    if points_per_dim < 2:
        raise ValueError("points_per_dim must be >= 2")
    box = _as_box(box)
    axes = [np.linspace(lo, hi, points_per_dim) for lo, hi in box]
    x_best, f_best = None, -np.inf
    for point in itertools.product(*axes):
        val = f(np.array(point))
        if val > f_best:
            x_best, f_best = np.array(point), val
    return x_best, float(f_best)


def nelder_mead(f, x0, tol: float, max_iter: int, box=None):
    """Maximize f by the Nelder-Mead simplex method, confined to a box.

    Standard coefficients (reflection 1, expansion 2, contraction 1/2,
    shrink 1/2), initial simplex steps of 5% of the box width, candidate
    points clamped to the box. Stops once the spread of simplex function
    values drops below tol AND the simplex has collapsed spatially (below
    1e-5 of the box width per coordinate), or after max_iter iterations;
    returns the best point seen. The size condition is needed because two
    vertices straddling a peak symmetrically can have equal values while
    still being far from it.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if box is None:
        box = [(xi - 1.0, xi + 1.0) for xi in x0]
    box = _as_box(box)
    dim = len(x0)
    x0 = _clamp(x0, box)
    widths = np.array([hi - lo for lo, hi in box])

    simplex = [x0]
    for i in range(dim):
        step = 0.05 * widths[i]
        x = x0.copy()
        x[i] = x[i] + step if x[i] + step <= box[i][1] else x[i] - step
        simplex.append(_clamp(x, box))
    vals = [f(x) for x in simplex]

    for _ in range(max_iter):
        order = np.argsort(vals)[::-1]  # descending: best first
        simplex = [simplex[i] for i in order]
        vals = [vals[i] for i in order]
        sizes = np.ptp(np.array(simplex), axis=0)
        if vals[0] - vals[-1] < tol and np.all(sizes < 1e-5 * widths):
            break

        centroid = np.mean(simplex[:-1], axis=0)
        xr = _clamp(centroid + (centroid - simplex[-1]), box)
        fr = f(xr)
        if vals[0] >= fr > vals[-2]:
            simplex[-1], vals[-1] = xr, fr
        elif fr > vals[0]:
            xe = _clamp(centroid + 2.0 * (centroid - simplex[-1]), box)
            fe = f(xe)
            if fe > fr:
                simplex[-1], vals[-1] = xe, fe
            else:
                simplex[-1], vals[-1] = xr, fr
        else:
            xc = _clamp(centroid + 0.5 * (simplex[-1] - centroid), box)
            fc = f(xc)
            if fc > vals[-1]:
                simplex[-1], vals[-1] = xc, fc
            else:
                for i in range(1, len(simplex)):
                    simplex[i] = _clamp(simplex[0] + 0.5 * (simplex[i] - simplex[0]), box)
                    vals[i] = f(simplex[i])

    k = int(np.argmax(vals))
    return simplex[k], float(vals[k])


def maximize(f, box, grid_points: int, tol: float, max_iter: int = 200):
    """Grid search, then Nelder-Mead from the grid winner; best of both.

    The result can never fall below the best lattice value (refinement is
    monotone by construction).
    """
    x_g, f_g = grid_search(f, box, grid_points)
    x_n, f_n = nelder_mead(f, x_g, tol, max_iter, box=box)
    if f_n > f_g:
        return x_n, f_n
    return x_g, f_g
