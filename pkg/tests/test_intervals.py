"""Rigorous interval arithmetic: containment, monotonicity, enclosures."""

import math

import gmpy2
import mpmath
import numpy as np
import pytest

from curvecert import Context, Interval, IntervalMatrix, elementary, golden_ratio
from curvecert.errors import DomainViolation, PrecisionExhausted, SingularOrUnverifiable
from curvecert.intervals import ELEMENTARY_KINDS

mpmath.mp.dps = 60


def repr_f(v):
    return repr(float(v))


class TestConstruction:
    def test_inverted_interval_rejected(self, ctx):
        with pytest.raises(DomainViolation):
            ctx.interval(2, 1)

    def test_from_str_encloses(self, ctx):
        x = ctx.from_str("1.31")
        assert float(x.lo) <= 1.31 <= float(x.hi)
        assert float(x.width()) < 1e-37

    def test_exact_values_have_zero_width(self, ctx):
        assert float(ctx.interval(0.5).width()) == 0.0
        assert float(ctx.interval(7).width()) == 0.0

    def test_mixed_precision_rejected(self, ctx):
        other = Context(64)
        with pytest.raises(PrecisionExhausted):
            ctx.interval(1) + other.interval(1)


class TestElementaryExamples:
    def test_add_exact(self, ctx):
        r = elementary(ctx.interval(1, 2), "add", ctx.interval(3, 4))
        assert float(r.lo) == 4.0 and float(r.hi) == 6.0

    def test_sqrt_monotone_exact(self, ctx):
        r = elementary(ctx.interval(4, 9), "sqrt")
        assert float(r.lo) == 2.0 and float(r.hi) == 3.0

    def test_sin2pi_quarter_wave(self, ctx):
        r = ctx.interval(0, 0.25).sin2pi()
        assert r.lo <= 0 and r.hi >= 1
        assert float(r.lo) >= -1e-30 and float(r.hi) <= 1 + 1e-30

    def test_div_by_zero_interval(self, ctx):
        with pytest.raises(DomainViolation):
            ctx.interval(1) / ctx.interval(-1, 1)

    def test_log_domain(self, ctx):
        with pytest.raises(DomainViolation):
            ctx.interval(0, 2).log()

    def test_pow_negative_even(self, ctx):
        r = ctx.interval(-3, -2).powi(2)
        assert float(r.lo) == 4.0 and float(r.hi) == 9.0


class TestGoldenRatio:
    def test_reference_value_128(self):
        g = golden_ratio(128)
        # continued-fraction-grade reference at 256 bits
        ref = gmpy2.mpfr("0.618033988749894848204586834365638117720309179805762862135", 256)
        assert g.lo <= ref <= g.hi

    def test_reference_value_53(self):
        g = golden_ratio(53)
        assert g.contains(0.6180339887498949)

    def test_width_within_4_ulp(self):
        for prec in (53, 128, 256):
            g = golden_ratio(prec)
            ulp = 2.0 ** (-prec)
            assert float(g.width()) <= 4 * ulp * float(g.hi)

    def test_width_shrinks_with_precision(self):
        assert float(golden_ratio(256).width()) < float(golden_ratio(64).width())


def _mp_eval(kind, x, y=None):
    f = {
        "add": lambda: x + y,
        "sub": lambda: x - y,
        "mul": lambda: x * y,
        "div": lambda: x / y,
        "sqrt": lambda: mpmath.sqrt(x),
        "log": lambda: mpmath.log(x),
        "sin2pi": lambda: mpmath.sin(2 * mpmath.pi * x),
        "cos2pi": lambda: mpmath.cos(2 * mpmath.pi * x),
        "acos": lambda: mpmath.acos(x),
        "pow": lambda: x**3,
    }[kind]
    return f()


class TestContainmentFuzz:
    def test_ten_thousand_point_containments(self, ctx):
        """f(point) must land inside elementary(interval) for every kind."""
        rng = np.random.default_rng(20260810)
        checked = 0
        violations = 0
        while checked < 10_000:
            kind = ELEMENTARY_KINDS[rng.integers(len(ELEMENTARY_KINDS))]
            lo = rng.uniform(-4, 4)
            hi = lo + abs(rng.normal(0, 1))
            if kind in ("sqrt", "log"):
                lo, hi = abs(lo) + 1e-6, abs(lo) + 1e-6 + abs(rng.normal(0, 1))
            if kind == "acos":
                lo = rng.uniform(-1, 0.9)
                hi = rng.uniform(lo, 1.0)
            x = ctx.interval(float(lo)).hull(ctx.interval(float(hi)))
            t = rng.uniform(lo, hi)
            y = None
            u = None
            if kind in ("add", "sub", "mul", "div"):
                ylo = rng.uniform(-4, 4)
                yhi = ylo + abs(rng.normal(0, 1))
                if kind == "div" and ylo <= 0 <= yhi:
                    ylo, yhi = abs(ylo) + 0.1, abs(ylo) + 0.1 + (yhi - ylo)
                y = ctx.interval(float(ylo)).hull(ctx.interval(float(yhi)))
                u = rng.uniform(ylo, yhi)
            arg = 3 if kind == "pow" else y
            res = elementary(x, kind, arg)
            exact = _mp_eval(kind, mpmath.mpf(repr(t)), mpmath.mpf(repr(u)) if u is not None else None)
            if not (
                mpmath.mpf(str(res.lo)) <= exact <= mpmath.mpf(str(res.hi))
            ):
                violations += 1
            checked += 1
        assert checked == 10_000
        assert violations == 0

    def test_inclusion_monotonicity(self, ctx):
        rng = np.random.default_rng(7)
        for _ in range(400):
            lo = rng.uniform(0.1, 3)
            hi = lo + rng.uniform(0.01, 1)
            pad = rng.uniform(0.0, 0.5)
            x = ctx.interval(float(lo)).hull(ctx.interval(float(hi)))
            ylo = max(1e-3, lo - pad)
            y = ctx.interval(float(ylo)).hull(ctx.interval(float(hi + pad)))
            for kind in ("sqrt", "log", "sin2pi", "cos2pi"):
                a = elementary(x, kind)
                b = elementary(y, kind)
                assert a.is_subset(b), (kind, lo, hi, pad)


class TestPrecisionRefinement:
    def test_averaged_lyapunov_expression_width_decreases(self):
        """Width of the closed-form exponent enclosure shrinks as bits double."""
        widths = []
        for prec in (64, 128, 256):
            c = Context(prec)
            a0 = c.from_str("1.31")
            eps = c.from_str("0.3")
            u = a0 - 1
            expr = ((u + (u.sq() - eps.sq()).sqrt()) * 2).log() / 2
            widths.append(float(expr.width()))
        assert widths[0] >= widths[1] >= widths[2]
        assert widths[2] < 1e-70


class TestVerifiedInverse:
    def test_identity(self, ctx):
        inv = IntervalMatrix.identity(ctx, 3).inverse_verified()
        for i in range(3):
            for j in range(3):
                target = 1.0 if i == j else 0.0
                assert abs(float(inv[i, j].mid()) - target) < 1e-30
                assert float(inv[i, j].width()) <= 2 * 2.0**-120

    def test_diagonal(self, ctx):
        m = IntervalMatrix([[ctx.interval(2), ctx.zero], [ctx.zero, ctx.interval(4)]])
        inv = m.inverse_verified()
        assert abs(float(inv[0, 0].mid()) - 0.5) < 1e-30
        assert abs(float(inv[1, 1].mid()) - 0.25) < 1e-30

    def test_singular_straddle(self, ctx):
        m = IntervalMatrix(
            [[ctx.interval(1), ctx.interval(0.9, 1.1)], [ctx.interval(1), ctx.interval(1)]]
        )
        with pytest.raises(SingularOrUnverifiable):
            m.inverse_verified()

    def test_enclosure_property_random(self, ctx):
        rng = np.random.default_rng(3)
        for _ in range(25):
            a = rng.normal(0, 1, (3, 3)) + 3 * np.eye(3)
            w = rng.uniform(0, 1e-6, (3, 3))
            m = IntervalMatrix(
                [
                    [
                        ctx.interval(float(a[i, j] - w[i, j])).hull(
                            ctx.interval(float(a[i, j] + w[i, j]))
                        )
                        for j in range(3)
                    ]
                    for i in range(3)
                ]
            )
            inv = m.inverse_verified()
            exact = np.linalg.inv(a)
            for i in range(3):
                for j in range(3):
                    assert float(inv[i, j].lo) - 1e-12 <= exact[i, j] <= float(inv[i, j].hi) + 1e-12


class TestSerialization:
    def test_decimal_round_trip(self, ctx):
        x = ctx.from_str("0.1") / ctx.from_str("0.7")
        s = x.to_decimal()
        assert s.startswith("[") and s.endswith("]")
        lo_s, hi_s = s[1:-1].split(", ")
        relo = ctx.from_str(lo_s)
        rehi = ctx.from_str(hi_s)
        assert float(relo.lo) == float(x.lo)
        assert float(rehi.hi) == float(x.hi)
