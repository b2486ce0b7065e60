"""Driven logistic map analytics: frozen orbits, exponents, predictions."""

import math

import gmpy2
import mpmath
import numpy as np
import pytest

from curvecert import (
    DrivenLogisticParams,
    averaged_lyapunov,
    curve_approx,
    frozen_period2,
    invariance_residual,
    inverse_t2,
    lyapunov_sums,
    oscillation_prediction,
    predict_departure_landing,
    step,
)
from curvecert.errors import DomainViolation, NoSolution
from curvecert.logistic import curve_g1, dstep_dx, h_zeros

mpmath.mp.dps = 50


class TestStep:
    def test_x_zero_maps_to_one(self, params):
        _, x1 = step(params, params.mp("0.77"), params.mp(0))
        assert float(x1) == 1.0

    def test_frozen_unit_point(self):
        p = DrivenLogisticParams(a0="1.0001", eps="0", N=200)
        _, x1 = step(p, p.mp(0), p.mp(1))
        assert abs(float(x1) - (1 - 1.0001)) < 1e-12

    def test_paper_point(self, params):
        _, x1 = step(params, params.mp(0), params.mp(0.5))
        assert abs(float(x1) - 0.6725) < 1e-30

    def test_interval_mode_encloses_point(self, params, ctx):
        th = ctx.from_str("0.3")
        x = ctx.from_str("0.5")
        _, xi = step(params, th, x)
        _, xp = step(params, params.mp("0.3"), params.mp("0.5"))
        assert float(xi.lo) <= float(xp) <= float(xi.hi)

    def test_derivative_matches_finite_difference(self, params):
        th = params.mp("0.37")
        x = params.mp("-0.21")
        d = float(dstep_dx(params, th, x))
        h = 1e-7
        _, xp = step(params, th, params.mp(-0.21 + h))
        _, xm = step(params, th, params.mp(-0.21 - h))
        fd = (float(xp) - float(xm)) / (2 * h)
        assert abs(fd - d) < 1e-6


class TestInverse:
    def test_round_trip_on_curve_neighborhood(self, params):
        c = params.ctx
        pt = (params.mp("0.3"), params.mp("-0.15"))
        thb, xb = inverse_t2(params, *pt)
        th1, x1 = step(params, thb, xb)
        th2, x2 = step(params, th1, x1)
        assert abs(float(c.sub(x2, pt[1]))) < 1e-30
        assert abs(float(c.sub(th2, pt[0]))) < 1e-35

    def test_frozen_period_two_cycles_back(self):
        p = DrivenLogisticParams(a0="1.31", eps="0", N=200)
        x1, x2 = frozen_period2("1.31")
        thb, xb = inverse_t2(p, p.mp(0), x1)
        # two steps back along the frozen period-2 orbit returns x1 itself
        assert abs(float(xb) - float(x1)) < 1e-30

    def test_domain_violation_above_one(self, params):
        with pytest.raises(DomainViolation):
            inverse_t2(params, params.mp(0), params.mp(1.5))

    def test_branch_signs(self, params):
        thb, xb = inverse_t2(params, params.mp("0.3"), params.mp("-0.15"), branch=(1, 1))
        assert float(xb) > 0


class TestFrozenPeriod2:
    def test_a_equal_one(self):
        x1, x2 = frozen_period2(1)
        assert float(x1) == 0.0 and float(x2) == 1.0

    def test_stability_boundary(self):
        # |4(1-a)| = 1 at a = 5/4
        assert abs(4 * (1 - 1.25)) == 1.0
        x1, x2 = frozen_period2(1.25)
        prod = 4 * 1.25 * 1.25 * float(x1) * float(x2)
        assert abs(abs(prod) - 1.0) < 1e-12

    def test_paper_value_and_residual(self):
        x1, _ = frozen_period2("1.31", precision=192)
        assert abs(float(x1) + 0.189566) < 1e-5
        c = gmpy2.context(precision=192)
        a = gmpy2.mpfr("1.31", 192)
        y = c.sub(gmpy2.mpfr(1, 192), c.mul(a, c.mul(x1, x1)))
        z = c.sub(gmpy2.mpfr(1, 192), c.mul(a, c.mul(y, y)))
        assert abs(float(c.sub(z, x1))) < 1e-30

    def test_domain(self):
        with pytest.raises(DomainViolation):
            frozen_period2(0.7)


class TestAveragedLyapunov:
    def test_paper_value(self):
        lam = averaged_lyapunov("1.31", "0.3")
        assert abs(float(lam) + 0.12666931339) < 1e-9

    def test_frozen_limit(self):
        lam = averaged_lyapunov("1.2", "0")
        assert abs(float(lam) - 0.5 * math.log(4 * 0.2)) < 1e-15

    def test_domain(self):
        with pytest.raises(DomainViolation):
            averaged_lyapunov("1.2", "0.3")

    def test_quadrature_cross_check(self):
        """Closed form equals the integral of the Lyapunov integrand."""
        for a0, eps in ((1.31, 0.3), (1.5, 0.2), (1.4, 0.35)):
            closed = float(averaged_lyapunov(str(a0), str(eps)))
            quad = mpmath.quad(
                lambda th: mpmath.log(4 * (a0 - 1 + eps * mpmath.sin(2 * mpmath.pi * th))) / 2,
                [0, 0.25, 0.75, 1],
            )
            assert abs(closed - float(quad)) < 1e-10


class TestOscillation:
    def test_zero_closed_form_matches_root_solve(self):
        from scipy.optimize import brentq

        t1, t2 = h_zeros(1.31, 0.3)
        f = lambda th: 1.31 - 1 + 0.3 * math.sin(2 * math.pi * th) - 0.25
        r1 = brentq(f, 0.5, 0.75, xtol=1e-14)
        r2 = brentq(f, 0.75, 1.0, xtol=1e-14)
        assert abs(t1 - r1) < 1e-9 and abs(t2 - r2) < 1e-9

    def test_prediction_reference_value(self, params):
        pred = oscillation_prediction(1.31, 0.3, float(params.alpha))
        assert abs(pred.lobe_integral - 0.172660185) < 1e-6 * 0.1727
        assert abs(pred.value - 0.27937 * 200) / (0.27937 * 200) < 1e-4

    def test_no_sign_change(self):
        with pytest.raises(DomainViolation):
            h_zeros(1.6, 0.3)


class TestPredictions:
    def test_departure_landing_literal_equations(self, params):
        """The integral equations as stated; see the acceptance notes for the
        relation to the narrative values."""
        td, tl = predict_departure_landing(16, 4, float(params.alpha))
        t1, t2 = h_zeros(1.31, 0.3)
        assert t2 - 1 < td < t1 < tl < t2
        # amplification identity behind the roots
        from scipy.integrate import quad

        I, _ = quad(
            lambda th: 0.5 * math.log(4 * (0.31 + 0.3 * math.sin(2 * math.pi * th))),
            t2 - 1,
            td,
            limit=200,
        )
        assert abs(I - 12 * math.log(10) * float(params.alpha)) < 1e-9

    def test_degenerate_digits(self, params):
        with pytest.raises(DomainViolation):
            predict_departure_landing(4, 4, float(params.alpha))

    def test_no_solution_when_mass_exhausted(self, params):
        with pytest.raises(NoSolution):
            predict_departure_landing(40, 1, float(params.alpha))


class TestCurveExpansion:
    def test_g1_vanishes_without_forcing(self):
        p = DrivenLogisticParams(a0="1.31", eps="0", N=200)
        assert float(curve_g1(p, p.mp("0.1"))) == 0.0

    def test_g1_vanishes_at_cos_zero(self, params):
        v = float(curve_g1(params, params.mp(0.25)))
        assert abs(v) < 1e-30

    def test_g1_scale(self, params):
        sup = max(abs(float(curve_g1(params, params.mp(i) / 64))) for i in range(64))
        assert 0.1 < sup < 10.0

    def test_residual_orders(self, params):
        """G0 residual is O(alpha); adding alpha*G1 makes it O(alpha^2)."""
        sups = {0: {}, 1: {}}
        for N in (200, 400, 800, 1600):
            p = DrivenLogisticParams(N=N)
            for order in (0, 1):
                fn = lambda t, o=order, q=p: curve_approx(q, t, o)
                sup = 0.0
                for i in range(100):
                    r = invariance_residual(p, fn, p.mp(i) / 100)
                    sup = max(sup, abs(float(r)))
                sups[order][N] = sup
        import numpy as np

        ns = np.log([200, 400, 800, 1600])
        s0 = np.polyfit(ns, np.log([sups[0][N] for N in (200, 400, 800, 1600)]), 1)[0]
        s1 = np.polyfit(ns, np.log([sups[1][N] for N in (200, 400, 800, 1600)]), 1)[0]
        assert abs(-s0 - 1) < 0.2
        assert abs(-s1 - 2) < 0.2

    def test_frozen_curve_is_invariant(self):
        p = DrivenLogisticParams(a0="1.2", eps="0", N=200)
        x1, _ = frozen_period2("1.2")
        r = invariance_residual(p, lambda t: p.mp(x1), p.mp("0.3"))
        assert abs(float(r)) < 1e-30


class TestLyapunovRun:
    def test_short_run_statistics(self, params):
        run = lyapunov_sums(params, transient=20_000, iters=20_000, series_stride=100)
        assert -0.14 < run.lam < -0.11
        assert abs(run.os_stat - 56.761) / 56.761 < 0.02
        assert len(run.series) == 200

    def test_frozen_period2_exponent(self):
        p = DrivenLogisticParams(a0="1.2", eps="0", N=200)
        run = lyapunov_sums(p, transient=2_000, iters=4_000)
        assert abs(run.lam - 0.5 * math.log(0.8)) < 1e-3
