import math

import numpy as np
import pytest
from conftest import make_instance

from cdrsim import algorithms, linalg, model
from cdrsim.reformulation import _RawQuadratics
from cdrsim.upper_bound import SearchConfig, _SubrateProfiles, r_ub, subrate1, subrate2


def test_subrate_argument_validation():
    cs, _, _ = make_instance(2, 10.0, 0)
    with pytest.raises(ValueError):
        subrate1(cs, 10.0, 0.0, 5.0)
    with pytest.raises(ValueError):
        subrate1(cs, 10.0, -0.1, 5.0)
    with pytest.raises(ValueError):
        subrate1(cs, 10.0, 0.5, 0.0)
    with pytest.raises(ValueError):
        subrate2(cs, 10.0, 0.0, 5.0)
    with pytest.raises(ValueError):
        subrate2(cs, 10.0, 0.5, -1.0)


def test_subrate1_monotone_in_power_share():
    cs, _, _ = make_instance(2, 10.0, 1)
    for kappa in (0.2, 0.5, 0.8):
        r_small = subrate1(cs, 10.0, kappa, 2.0)
        r_large = subrate1(cs, 10.0, kappa, 4.0)
        assert r_large >= r_small


def test_subrate1_monotone_in_noise_split():
    cs, _, _ = make_instance(2, 10.0, 2)
    for p1 in (2.0, 5.0):
        assert subrate1(cs, 10.0, 0.25, p1) >= subrate1(cs, 10.0, 0.5, p1)


def test_subrate2_monotonicities():
    cs, _, _ = make_instance(2, 10.0, 3)
    assert subrate2(cs, 10.0, 0.5, 6.0) >= subrate2(cs, 10.0, 0.5, 3.0)
    assert subrate2(cs, 10.0, 0.25, 3.0) >= subrate2(cs, 10.0, 0.5, 3.0)


def test_subrate_optimum_achievable_by_direct_formula():
    # project the claimed optimizer onto the constraint surface and recompute
    # its rate from the defining SNR/SINR expressions: must agree exactly
    rng = np.random.default_rng(4)
    for seed in range(10):
        P = 100.0
        cs, _, _ = make_instance(2, P, 1000 + seed)
        raw = _RawQuadratics(cs, P)
        kappa1 = float(rng.uniform(0.1, 0.9))
        p1 = float(P * rng.uniform(0.1, 0.9))
        n = 4

        E1 = P * raw.K_r1 + kappa1 * np.eye(n)
        lam, v = linalg.gen_eig_max(P * np.outer(raw.u1, raw.u1.conj()), raw.B1 + E1 / p1)
        w = v * math.sqrt(p1 / float(np.real(np.vdot(v, E1 @ v))))
        W1 = w.reshape((2, 2), order="F")
        # constraint met with equality, rate matches the closed form
        used = P * np.linalg.norm(W1 @ cs.h_r1) ** 2 + kappa1 * np.linalg.norm(W1, "fro") ** 2
        assert used == pytest.approx(p1, rel=1e-10)
        assert 0.5 * math.log2(1 + model.snr1(cs, W1, P)) == pytest.approx(
            subrate1(cs, P, kappa1, p1), abs=1e-10)

        kappa2, p2 = 1.0 - kappa1, P - p1
        E2 = P * raw.K_rb + kappa2 * np.eye(n)
        den = raw.h21_sq * raw.C1HC1 + np.outer(raw.a, raw.a.conj()) + (raw.h21_sq / p2) * E2
        lam2, v2 = linalg.gen_eig_max(P * np.outer(raw.f, raw.f.conj()), den)
        w2 = v2 * math.sqrt(p2 / float(np.real(np.vdot(v2, E2 @ v2))))
        W2 = w2.reshape((2, 2), order="F")
        used2 = P * np.linalg.norm(W2 @ cs.h_rb) ** 2 + kappa2 * np.linalg.norm(W2, "fro") ** 2
        assert used2 == pytest.approx(p2, rel=1e-10)
        assert 0.5 * math.log2(1 + model.sinr2(cs, W2, P)) == pytest.approx(
            subrate2(cs, P, kappa2, p2), abs=1e-10)


def test_subrate_vs_constrained_random_search():
    # light version of the acceptance oracle: the projected search never beats
    # the closed form (it is a lower bound)
    rng = np.random.default_rng(5)
    P = 100.0
    for seed in range(3):
        cs, _, _ = make_instance(2, P, 2000 + seed)
        raw = _RawQuadratics(cs, P)
        kappa1, p1 = 0.5, P / 2
        r1 = subrate1(cs, P, kappa1, p1)
        n = 4
        vecs = rng.standard_normal((100_000, n)) + 1j * rng.standard_normal((100_000, n))
        E1 = P * raw.K_r1 + kappa1 * np.eye(n)
        scale = np.sqrt(p1 / np.einsum("ni,ij,nj->n", vecs.conj(), E1, vecs).real)
        num = P * (np.abs(vecs @ raw.u1.conj()) * scale) ** 2
        den = np.einsum("ni,ij,nj->n", vecs.conj(), raw.B1, vecs).real * scale**2 + 1.0
        best = 0.5 * np.log2(1.0 + (num / den).max())
        assert best <= r1 + 1e-9
        assert r1 - best < 5e-3  # search resolution at 1e5 samples


def test_profile_matches_subrates_exactly():
    rng = np.random.default_rng(6)
    for m in (2, 4):
        P = 50.0
        cs, _, _ = make_instance(m, P, 3000 + m)
        raw = _RawQuadratics(cs, P)
        for _ in range(5):
            kappa1 = float(rng.uniform(0.05, 0.95))
            p1 = float(P * rng.uniform(0.05, 0.95))
            prof = _SubrateProfiles(raw, P, kappa1)
            assert prof.rate1(p1) == pytest.approx(subrate1(cs, P, kappa1, p1), abs=1e-10)
            assert prof.rate2(P - p1) == pytest.approx(
                subrate2(cs, P, 1.0 - kappa1, P - p1), abs=1e-10)


def test_r_ub_breakdown_consistency():
    cs, _, _ = make_instance(2, 10.0, 7)
    bound = r_ub(cs, 10.0, 10.0)
    assert bound.r_ub == pytest.approx(bound.r1_at_opt + bound.r2_at_opt, abs=1e-12)
    assert 0.0 < bound.kappa1 < 1.0
    assert bound.kappa1 + bound.kappa2 == pytest.approx(1.0)
    assert 0.0 < bound.p1 < 10.0
    assert bound.p1 + bound.p2 == pytest.approx(10.0)


def test_r_ub_dominates_all_solvers():
    rng = np.random.default_rng(8)
    for m in (2, 4):
        for trial in range(25):
            P = float(10 ** rng.uniform(0.5, 2.0))
            cs, forms, _ = make_instance(m, P, 4000 + 100 * m + trial)
            bound = r_ub(cs, P, P)
            rates = [algorithms.pia(forms).rates.sum,
                     algorithms.asa(forms).rates.sum,
                     algorithms.lss(forms).rates.sum,
                     algorithms.max_snr1(forms).rates.sum,
                     algorithms.max_sinr2(forms).rates.sum,
                     model.sum_rate(cs, model.pure_amplification(cs, P, P), P).sum]
            assert max(rates) <= bound.r_ub + 1e-6


def test_inner_max_dominates_random_power_splits():
    # the reported inner maximizer beats 50 random feasible splits at the same kappa
    cs, _, _ = make_instance(2, 10.0, 9)
    P = P_R = 10.0
    bound = r_ub(cs, P, P_R)
    raw = _RawQuadratics(cs, P)
    prof = _SubrateProfiles(raw, P, bound.kappa1)
    inner_best = prof.rate1(bound.p1) + prof.rate2(P_R - bound.p1)
    rng = np.random.default_rng(10)
    for _ in range(50):
        p1 = float(rng.uniform(1e-3 * P_R, (1 - 1e-3) * P_R))
        assert prof.rate1(p1) + prof.rate2(P_R - p1) <= inner_best + 1e-9


def test_outer_min_monotone_on_nested_grids():
    # with refinement off, a finer kappa lattice can only lower the reported min
    for seed in range(5):
        cs, _, _ = make_instance(2, 10.0, 5000 + seed)
        coarse = r_ub(cs, 10.0, 10.0, SearchConfig(kappa_grid=11, refine=False)).r_ub
        fine = r_ub(cs, 10.0, 10.0, SearchConfig(kappa_grid=21, refine=False)).r_ub
        assert fine <= coarse + 1e-12


def test_noise_split_endpoint_behavior():
    # R(kappa) is monotone over the guarded interval on most instances, so the
    # outer minimum typically sits AT a guard (verified against an independent
    # scalar closed form at M=1; build-time measurement: 46/50 at a guard for
    # this seed family). The bound stays finite and valid there; this test
    # freezes that behavior and the guard containment.
    eps = 1e-3
    interior = 0
    for seed in range(50):
        cs, _, _ = make_instance(2, 10.0, 6000 + seed)
        bound = r_ub(cs, 10.0, 10.0)
        assert eps <= bound.kappa1 <= 1.0 - eps
        assert math.isfinite(bound.r_ub) and bound.r_ub > 0
        if eps < bound.kappa1 < 1.0 - eps:
            interior += 1
    assert 1 <= interior <= 15  # regression band around the measured 4/50


def test_r_ub_smooth_over_power_sweep():
    cs, _, _ = make_instance(2, 1.0, 11)
    values = []
    for snr_db in np.linspace(0.0, 28.5, 20):
        p = 10 ** (snr_db / 10.0)
        bound = r_ub(cs, p, p)
        assert math.isfinite(bound.r_ub)
        values.append(bound.r_ub)
    diffs = np.abs(np.diff(values))
    assert diffs.max() < 2.5  # no jumps across a 1.5 dB step


def test_r_ub_deterministic():
    cs, _, _ = make_instance(4, 100.0, 12)
    a = r_ub(cs, 100.0, 100.0)
    b = r_ub(cs, 100.0, 100.0)
    assert a.r_ub == b.r_ub and a.kappa1 == b.kappa1 and a.p1 == b.p1


def test_r_ub_matches_scalar_closed_form():
    # at M=1 every subproblem has a closed form (the budget constraint pins
    # |w| directly), so the whole min-max can be recomputed independently on
    # a fine lattice; the production path must agree to grid resolution
    def scalar_reference(cs, P, P_R, eps=1e-3, points=801):
        h_r1, h_rb, h_br, h_2r = cs.h_r1[0], cs.h_rb[0], cs.h_br[0], cs.h_2r[0]
        best_outer = math.inf
        for k1 in np.linspace(eps, 1 - eps, points):
            best_inner = -math.inf
            for p1 in np.linspace(eps * P_R, (1 - eps) * P_R, points):
                t1 = p1 / (P * abs(h_r1) ** 2 + k1)
                s1 = P * abs(h_br * h_r1) ** 2 * t1 / (abs(h_br) ** 2 * t1 + 1.0)
                t2 = (P_R - p1) / (P * abs(h_rb) ** 2 + (1.0 - k1))
                num = P * t2 * abs(h_2r) ** 2 * abs(cs.h_2b * h_r1 - cs.h_21 * h_rb) ** 2
                den = abs(cs.h_21) ** 2 * (abs(h_2r) ** 2 * t2 + 1.0) \
                    + abs(h_2r) ** 2 * abs(h_r1) ** 2 * t2
                r = 0.5 * math.log2(1 + s1) + 0.5 * math.log2(1 + num / den)
                best_inner = max(best_inner, r)
            best_outer = min(best_outer, best_inner)
        return best_outer

    for seed in range(3):
        cs, _, _ = make_instance(1, 10.0, 7000 + seed)
        bound = r_ub(cs, 10.0, 10.0)
        reference = scalar_reference(cs, 10.0, 10.0)
        # the production search refines beyond the reference lattice, so it
        # may only sit slightly below it, never meaningfully above
        assert bound.r_ub <= reference + 1e-6
        assert abs(bound.r_ub - reference) < 5e-4
