import numpy as np
import pytest

from cdrsim import scalar_opt


def test_grid_search_linear():
    x, f = scalar_opt.grid_search(lambda x: x[0], [(0.0, 1.0)], 11)
    assert x[0] == 1.0 and f == 1.0


def test_grid_search_quadratic_on_lattice():
    x, f = scalar_opt.grid_search(lambda x: -((x[0] - 0.5) ** 2), [(0.0, 1.0)], 11)
    assert x[0] == pytest.approx(0.5)


def test_grid_search_2d():
    x, f = scalar_opt.grid_search(lambda x: -((x[0] - 0.2) ** 2) - (x[1] - 0.8) ** 2,
                                  [(0.0, 1.0), (0.0, 1.0)], 21)
    assert x[0] == pytest.approx(0.2) and x[1] == pytest.approx(0.8)


def test_grid_search_validates_points():
    with pytest.raises(ValueError):
        scalar_opt.grid_search(lambda x: 0.0, [(0.0, 1.0)], 1)


def test_nelder_mead_quadratic():
    x, f = scalar_opt.nelder_mead(lambda x: -((x[0] - 0.3) ** 2), [0.0], 1e-12, 500,
                                  box=[(-1.0, 1.0)])
    assert x[0] == pytest.approx(0.3, abs=1e-6)


def test_nelder_mead_constant():
    x, f = scalar_opt.nelder_mead(lambda x: 2.5, [0.4], 1e-8, 100, box=[(0.0, 1.0)])
    assert f == 2.5
    assert x[0] == pytest.approx(0.4, abs=0.06)  # never leaves the initial simplex


def test_nelder_mead_nonsmooth_vs_fine_grid():
    f = lambda x: -abs(x[0] - 0.7) ** 1.5
    x, fx = scalar_opt.nelder_mead(f, [0.0], 1e-12, 1000, box=[(0.0, 1.0)])
    grid = np.linspace(0.0, 1.0, 1_000_001)
    x_fine = grid[np.argmax(-np.abs(grid - 0.7) ** 1.5)]
    assert x[0] == pytest.approx(x_fine, abs=1e-4)


def test_nelder_mead_respects_box():
    x, f = scalar_opt.nelder_mead(lambda x: x[0], [0.9], 1e-10, 200, box=[(0.0, 1.0)])
    assert x[0] <= 1.0
    assert x[0] == pytest.approx(1.0, abs=1e-9)


def test_maximize_unimodal():
    x, f = scalar_opt.maximize(lambda x: -((x[0] - 0.37) ** 2), [(0.0, 1.0)], 51, 1e-10)
    assert x[0] == pytest.approx(0.37, abs=1e-5)


def test_maximize_bimodal_finds_tall_peak():
    # peaks at 0.1 (height 1) and 0.9 (height 2); oracle = fine grid
    def f(x):
        return np.exp(-((x[0] - 0.1) / 0.02) ** 2) + 2.0 * np.exp(-((x[0] - 0.9) / 0.02) ** 2)

    grid = np.linspace(0.0, 1.0, 1_000_001)
    vals = np.exp(-((grid - 0.1) / 0.02) ** 2) + 2.0 * np.exp(-((grid - 0.9) / 0.02) ** 2)
    x_fine, f_fine = grid[np.argmax(vals)], vals.max()

    x, fx = scalar_opt.maximize(f, [(0.0, 1.0)], 21, 1e-10)
    assert x[0] == pytest.approx(x_fine, abs=1e-4)
    assert fx == pytest.approx(f_fine, abs=1e-6)


def test_maximize_never_below_grid():
    rng = np.random.default_rng(0)
    for _ in range(20):
        coeffs = rng.standard_normal(4)

        def f(x):
            return float(coeffs[0] + coeffs[1] * x[0] + coeffs[2] * np.sin(5 * x[0])
                         + coeffs[3] * x[0] ** 2)

        _, f_grid = scalar_opt.grid_search(f, [(0.0, 1.0)], 31)
        _, f_max = scalar_opt.maximize(f, [(0.0, 1.0)], 31, 1e-8)
        assert f_max >= f_grid


def test_deterministic():
    f = lambda x: -((x[0] - 0.123) ** 2) - (x[1] + 0.5) ** 2
    box = [(-1.0, 1.0), (-1.0, 1.0)]
    first = scalar_opt.maximize(f, box, 15, 1e-9)
    second = scalar_opt.maximize(f, box, 15, 1e-9)
    assert np.array_equal(first[0], second[0]) and first[1] == second[1]
