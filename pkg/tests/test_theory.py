import math

import numpy as np
import pytest
import sympy as sp

from spf.exceptions import DomainError
from spf.initialization import thresholding_init
from spf.measurement import new_gaussian_operator
from spf.signals import make_instance, sin_angle
from spf.theory import (
    LEMMA_THRESHOLD,
    RECOVERY_THRESHOLD,
    angle_bound,
    adjoint_noise_norm,
    c_delta,
    estimate_rip_constant,
    exhaustive_rip_constant,
    m_delta_nu,
    near_isometry_residual,
    omega_sup,
    sin2_lower_bound,
    sufficient_condition,
    theory_report,
)

from .conftest import crandn

GRID = np.linspace(0.0, LEMMA_THRESHOLD, 100)


def symbolic_c_delta(d):
    d = sp.Rational(d)
    root = sp.sqrt(2 / (1 - d**2))
    return sp.Rational(11, 10) * (root + 1 / (1 - d)) / (1 - root * d)


class TestCDelta:
    def test_zero(self):
        assert c_delta(0.0) == pytest.approx(1.1 * (math.sqrt(2) + 1), rel=1e-15)
        assert c_delta(0.0) == pytest.approx(2.6556, abs=1e-4)

    def test_at_lemma_edge(self):
        assert c_delta(0.04) == pytest.approx(2.8649, abs=1e-4)

    def test_range_on_grid(self):
        vals = [c_delta(d) for d in GRID]
        assert min(vals) >= 2 and max(vals) <= 5
        assert np.all(np.diff(vals) > 0)

    @pytest.mark.parametrize("d", ["0", "1/100", "1/50", "1/25", "3/100"])
    def test_symbolic(self, d):
        exact = float(symbolic_c_delta(d).evalf(30))
        assert c_delta(float(sp.Rational(d))) == pytest.approx(exact, rel=1e-14)

    @pytest.mark.parametrize("d", [-0.1, 0.8, 1.0])
    def test_domain(self, d):
        with pytest.raises(DomainError):
            c_delta(d)


class TestOmegaSup:
    def test_noiseless_isometry(self):
        assert omega_sup(0.0, 0.0) == pytest.approx(math.pi / 2)
        assert math.sin(omega_sup(0.0, 0.0)) == pytest.approx(1.0)

    def test_lemma_edge(self):
        s = math.sin(omega_sup(0.04, 0.04))
        assert 0.5 <= s <= 1

    def test_is_boundary_of_feasible_set(self):
        # the defining inequality holds at omega_sup and fails just above it
        d, nu = 0.03, 0.02
        w = omega_sup(d, nu)
        c = c_delta(d)
        rhs = lambda t: c * (d * math.tan(t) + (1 + d) * nu / math.cos(t))
        assert math.sin(w) >= rhs(w) - 1e-9
        assert math.sin(w + 1e-6) < rhs(w + 1e-6)

    def test_infeasible(self):
        w, ok = omega_sup(0.2, 0.3, return_flag=True)
        assert w == 0.0 and not ok

    def test_lemma_bounds_on_grid(self):
        for d in GRID:
            for nu in GRID:
                s = math.sin(omega_sup(d, nu))
                assert 0.5 <= s <= 1, (d, nu)
                assert s >= sin2_lower_bound(d, nu) - 1e-12, (d, nu)

    def test_monotone(self):
        pts = np.linspace(0, RECOVERY_THRESHOLD, 15)
        for nu in pts:
            w = [omega_sup(d, nu) for d in pts]
            assert np.all(np.diff(w) <= 1e-9)
        for d in pts:
            w = [omega_sup(d, nu) for nu in pts]
            assert np.all(np.diff(w) <= 1e-9)


class TestMDeltaNu:
    @pytest.mark.parametrize("d,nu,expected", [(0, 0, 0), (0.01, 0.01, 0.0402),
                                               (0.04, 0.04, 0.1632)])
    def test_values(self, d, nu, expected):
        assert m_delta_nu(d, nu) == pytest.approx(expected, abs=1e-14)

    @pytest.mark.parametrize("d,nu", [("1/100", "3/100"), ("1/25", "1/50"), ("7/1000", "0")])
    def test_symbolic(self, d, nu):
        d, nu = sp.Rational(d), sp.Rational(nu)
        exact = float(2 * (d + nu + d * nu))
        assert m_delta_nu(float(d), float(nu)) == pytest.approx(exact, rel=1e-14, abs=1e-16)


class TestAngleBound:
    def test_perfect_capture(self):
        assert angle_bound(1, 0, 0, 0) == 0

    def test_no_column_capture(self):
        assert angle_bound(1, 1, 0, 0) == 1

    def test_direct(self):
        assert angle_bound(0.9, 0.2, 0.02, 0.01) == pytest.approx(
            (0.18 + 0.0302) / (0.9 - 0.0302), rel=1e-12)
        assert angle_bound(0.9, 0.2, 0.02, 0.01) == pytest.approx(0.2417, abs=1e-4)

    def test_nonpositive_denominator(self):
        assert angle_bound(0.1, 0.5, 0.05, 0.05) == math.inf


class TestSufficientCondition:
    def test_perfect(self):
        assert sufficient_condition(1, 1, 0, 0)

    def test_failure_regime(self):
        assert not sufficient_condition(0.1, 0.1, 0.04, 0.04)

    def test_monotone_in_pv(self):
        for pu in np.linspace(0.05, 1, 20):
            flags = [sufficient_condition(pu, pv, 0.01, 0.01) for pv in np.linspace(0, 1, 201)]
            # once true, stays true
            first = flags.index(True) if True in flags else len(flags)
            assert all(flags[first:])

    def test_agrees_with_angle_bound(self):
        # inside the sign condition the predicate is exactly "angle bound < sin(omega_sup)"
        d = nu = 0.02
        s = math.sin(omega_sup(d, nu))
        for pu in np.linspace(0.3, 1, 15):
            for pv in np.linspace(0.3, 1, 15):
                pv_perp = math.sqrt(1 - pv**2)
                bound = angle_bound(pu, pv_perp, d, nu)
                if sufficient_condition(pu, pv, d, nu):
                    assert bound < s + 1e-12


def test_theory_report():
    rep = theory_report(0.04, 0.04)
    assert rep.c_delta == pytest.approx(2.8649, abs=1e-4)
    assert rep.m_delta_nu == pytest.approx(0.1632)
    assert rep.condition_holds and rep.lemma_regime and rep.recovery_regime
    assert not theory_report(0.06, 0.0).lemma_regime
    assert theory_report(0.06, 0.0).recovery_regime
    text = rep.format()
    assert "omega_sup" in text and len(text.splitlines()) == len(rep.as_dict())


class TestRipEstimate:
    def test_well_sampled_operator(self):
        n, s = 32, 2
        # four times the minimal oversampling: at the minimum the maximum over
        # 500 probes is heavy-tailed and two seeds differ by > 0.1 about 1 in 5 times
        m = math.ceil(4 * 10 * (2 * s) * math.log(n / s))
        op = new_gaussian_operator(n, n, m, seed=11)
        d1 = estimate_rip_constant(op, s, s, 2, 500, seed=1)
        d2 = estimate_rip_constant(op, s, s, 2, 500, seed=2)
        assert d1 < 0.5 and d2 < 0.5
        assert abs(d1 - d2) <= 0.1

    def test_single_sample_definition(self):
        op = new_gaussian_operator(1, 1, 30, seed=4)
        # the only unit matrix on a 1x1 support is a phase times e_1 e_1^T
        X = np.ones((1, 1))
        expected = abs(np.linalg.norm(op.apply(X)) ** 2 - 1)
        assert estimate_rip_constant(op, 1, 1, 1, 1, seed=9) == pytest.approx(expected, rel=1e-12)

    def test_nondecreasing_in_trials(self, small_op):
        vals = [estimate_rip_constant(small_op, 2, 2, 1, t, seed=5) for t in (1, 5, 20, 80)]
        assert np.all(np.diff(vals) >= 0)

    def test_arguments(self, small_op):
        with pytest.raises(ValueError):
            estimate_rip_constant(small_op, 2, 2, 3, 10, 0)
        with pytest.raises(ValueError):
            estimate_rip_constant(small_op, 2, 2, 1, 0, 0)


class TestExhaustiveRip:
    def test_single_row_support_is_exact(self):
        op = new_gaussian_operator(3, 3, 12, seed=3)
        # brute force: every X on one entry is a scaled e_i e_j^T
        exact = max(abs(np.linalg.norm(op.matrices[:, i, j]) ** 2 - 1)
                    for i in range(3) for j in range(3))
        assert exhaustive_rip_constant(op, 1, 1, 1, seed=0) == pytest.approx(exact, rel=1e-12)

    def test_dominates_random_supports(self):
        op = new_gaussian_operator(5, 5, 30, seed=8)
        full = exhaustive_rip_constant(op, 1, 2, 20, seed=0)
        sampled = estimate_rip_constant(op, 1, 2, 1, 200, seed=0)
        assert full >= sampled - 1e-12

    def test_size_limit(self):
        with pytest.raises(ValueError):
            exhaustive_rip_constant(new_gaussian_operator(7, 3, 5, seed=1), 1, 1, 1, 0)


class TestResiduals:
    def test_zero_noise(self, small_op):
        assert adjoint_noise_norm(small_op, np.zeros(20), [0, 1], [2]) == 0

    def test_zero_signal(self, small_op):
        assert near_isometry_residual(small_op, np.zeros(4), np.zeros(5), [0], [1, 2]) == 0

    def test_against_dense(self, small_op, rng):
        u, v = crandn(rng, 4), crandn(rng, 5)
        X = np.outer(u, v.conj())
        dense = small_op.adjoint(small_op.apply(X)) - X
        J1, J2 = [0, 3], [1, 2, 4]
        assert near_isometry_residual(small_op, u, v, J1, J2) == pytest.approx(
            np.linalg.norm(dense[np.ix_(J1, J2)], 2), rel=1e-12)

    def test_bad_index_set(self, small_op):
        with pytest.raises(ValueError):
            adjoint_noise_norm(small_op, np.zeros(20), [0, 4], [0])

    def test_residual_below_estimated_constant(self):
        good = 0
        for t in range(100):
            op = new_gaussian_operator(32, 32, 300, seed=t)
            inst = make_instance(op, 2, 2, 1, 0.8, 0.8, 0.0, 100 + t, 200 + t, 300 + t)
            J1, J2 = np.flatnonzero(inst.u), np.flatnonzero(inst.v)
            resid = near_isometry_residual(op, inst.u, inst.v, J1, J2)
            good += resid <= estimate_rip_constant(op, 6, 6, 2, 300, seed=t)
        assert good >= 90


def test_condition_predicts_initialization_angle():
    # oversampled so that the estimated constant falls where omega_sup > 0
    holds = good = 0
    for t in range(60):
        op = new_gaussian_operator(32, 32, 800, seed=7000 + t)
        inst = make_instance(op, 2, 2, 1, 0.8, 0.8, 0.0, 7100 + t, 7200 + t, 7300 + t)
        init = thresholding_init(op, inst.b, 2, 2)
        pu = np.linalg.norm(inst.u[init.j1_hat])
        pv = np.linalg.norm(inst.v[init.j2_hat])
        delta_hat = estimate_rip_constant(op, 6, 6, 2, 200, seed=t)
        if delta_hat >= 0.7 or not sufficient_condition(pu, pv, delta_hat, 0.0):
            continue
        holds += 1
        good += sin_angle(init.v0, inst.v) < math.sin(omega_sup(delta_hat, 0.0))
    assert holds >= 30
    assert good >= 0.9 * holds
