"""Taylor jets, composition, and the polynomial edge bounds."""

import math

import mpmath
import numpy as np
import pytest

from curvecert.errors import DomainViolation
from curvecert.jets import (
    Affine,
    Const,
    Cos2pi,
    Mul,
    Neg,
    Polynomial,
    Recip,
    Sin2pi,
    Sqrt,
    Square,
    Sub,
    Var,
    centered_bounds,
    compose,
    edge_lower,
    edge_upper,
    jet_of_composition,
)

mpmath.mp.dps = 60


def repr_f(v):
    return repr(float(v))


def poly(ctx, *coeffs, window=1.0):
    return Polynomial(ctx, [ctx._mp(c) for c in coeffs], ctx.zero.hull(ctx.from_str(str(window))))


class TestJetExamples:
    def test_square_of_identity(self, ctx):
        jet, rem = jet_of_composition(Square(Var()), poly(ctx, 0, 1), 1, 1)
        assert float(jet.coeffs[0].mid()) == 0.0
        assert float(jet.coeffs[1].mid()) == 0.0
        assert rem.value.contains(2)

    def test_constant_argument_kills_derivatives(self, ctx):
        g = Sub(Const(ctx.one), Mul(Const(ctx.from_str("1.31")), Square(Var())))
        jet, rem = jet_of_composition(g, poly(ctx, 0.5), 3, 1)
        assert abs(float(jet.coeffs[0].mid()) - 0.6725) < 1e-30
        for c in jet.coeffs[1:]:
            assert c.contains(0) and float(c.width()) < 1e-30

    def test_logistic_jet_against_symbolic(self, ctx):
        g = Sub(Const(ctx.one), Mul(Const(ctx.from_str("1.31")), Square(Var())))
        p = Polynomial(
            ctx,
            [ctx.from_str("-0.19").lo, ctx._mp(0.5)],
            ctx.zero.hull(ctx.from_str("0.01")),
        )
        jet, _ = jet_of_composition(g, p, 2, 0.01)
        # 1 - 1.31*(-0.19 + 0.5 t)^2 has coefficients below
        assert abs(float(jet.coeffs[0].mid()) - 0.952709) < 1e-6
        assert abs(float(jet.coeffs[1].mid()) - 0.24890) < 1e-5
        assert abs(float(jet.coeffs[2].mid()) - (-0.3275)) < 1e-5

    def test_jets_match_reference_taylor(self, ctx):
        expr = Recip(Sqrt(Affine(ctx.from_str("2.0"), ctx.from_str("-3.0"))))
        jet = expr.eval_jet(ctx.from_str("0.1"), 8)
        ref = mpmath.taylor(lambda t: 1 / mpmath.sqrt(2 - 3 * (mpmath.mpf("0.1") + t)), 0, 8)
        for k in range(9):
            assert abs(float(jet.coeffs[k].mid()) - float(ref[k])) <= 1e-10 * max(
                1, abs(float(ref[k]))
            )

    def test_sin_cos_jets(self, ctx):
        expr = Cos2pi(Affine(ctx.from_str("0.3"), ctx.one))
        jet = expr.eval_jet(ctx.zero, 6)
        ref = mpmath.taylor(lambda t: mpmath.cos(2 * mpmath.pi * (mpmath.mpf("0.3") + t)), 0, 6)
        for k in range(7):
            assert abs(float(jet.coeffs[k].mid()) - float(ref[k])) <= 1e-10 * max(
                1, abs(float(ref[k]))
            )

    def test_sqrt_of_indefinite_base(self, ctx):
        with pytest.raises(DomainViolation):
            jet_of_composition(Sqrt(Var()), poly(ctx, 0.0, 1.0), 3, 1)


class TestEdgeBounds:
    def test_square_hand_example(self, ctx):
        g = Square(Var())
        pu = edge_upper(g, poly(ctx, 0, 1, window=0.5), 1, 0.5)
        pl = edge_lower(g, poly(ctx, 0, 1, window=0.5), 1, 0.5)
        assert [float(c) for c in pu.coeffs] == [0.0, 0.5]
        assert [float(c) for c in pl.coeffs] == [0.0, 0.0]

    def test_constant_argument_tight(self, ctx):
        g = Sub(Const(ctx.one), Mul(Const(ctx.from_str("1.31")), Square(Var())))
        pu = edge_upper(g, poly(ctx, 0.25), 3, 1)
        pl = edge_lower(g, poly(ctx, 0.25), 3, 1)
        exact = 1 - 1.31 * 0.0625
        assert abs(float(pu.coeffs[0]) - exact) < 1e-30
        assert abs(float(pl.coeffs[0]) - exact) < 1e-30

    def test_degree_out_of_range(self, ctx):
        with pytest.raises(DomainViolation):
            edge_upper(Square(Var()), poly(ctx, 0, 1), 10, 1)

    @staticmethod
    def _sample_grammar(ctx, rng):
        """Random (expr, poly, window) from the supported closed grammar."""
        c0 = rng.uniform(-0.3, 0.3)
        c1 = rng.uniform(-0.6, 0.6)
        c2 = rng.uniform(-0.3, 0.3)
        r = rng.uniform(0.005, 0.05)
        p = Polynomial(
            ctx,
            [ctx.interval(float(c0)).lo, ctx.interval(float(c1)).lo, ctx.interval(float(c2)).lo],
            ctx.zero.hull(ctx.interval(float(r))),
        )
        kind = rng.integers(4)
        if kind == 0:
            expr = Sub(Const(ctx.one), Mul(Const(ctx.from_str("1.31")), Square(Var())))

            def f(t):
                v = c0 + c1 * t + c2 * t * t
                return 1 - 1.31 * v * v

        elif kind == 1:
            expr = Sqrt(Affine(ctx.from_str("1.5"), ctx.one))
            expr = compose(expr, Var())
            expr = Sqrt(Sub(Const(ctx.from_str("1.5")), Neg(Var())))

            def f(t):
                v = c0 + c1 * t + c2 * t * t
                return math.sqrt(1.5 + v)

        elif kind == 2:
            expr = Recip(Sub(Const(ctx.from_str("2.0")), Var()))

            def f(t):
                v = c0 + c1 * t + c2 * t * t
                return 1 / (2 - v)

        else:
            expr = Sin2pi(Var())

            def f(t):
                v = c0 + c1 * t + c2 * t * t
                return math.sin(2 * math.pi * v)

        return expr, p, r, f

    def test_sandwich_property_sampled(self, ctx):
        """1000 random grammar cases x 50 point checks stay inside [lower, upper]."""
        rng = np.random.default_rng(99)
        cases = 0
        while cases < 1000:
            expr, p, r, f = self._sample_grammar(ctx, rng)
            n = int(rng.integers(1, 10))
            try:
                pu = edge_upper(expr, p, n, r)
                pl = edge_lower(expr, p, n, r)
            except DomainViolation:
                continue
            for t in np.linspace(0, r, 50):
                exact = f(t)
                up = float(pu.eval_interval(ctx.interval(float(float(t)))).hi)
                dn = float(pl.eval_interval(ctx.interval(float(float(t)))).lo)
                assert dn - 1e-12 <= exact <= up + 1e-12, (cases, n, t)
            cases += 1

    def test_finite_difference_agreement(self, ctx):
        """Jet coefficients match central finite differences, orders 1..4."""
        g = Sub(Const(ctx.one), Mul(Const(ctx.from_str("1.31")), Square(Var())))
        p = Polynomial(
            ctx,
            [ctx.from_str("-0.19").lo, ctx._mp(0.5), ctx._mp(-0.25)],
            ctx.zero.hull(ctx.from_str("0.2")),
        )
        jet, _ = jet_of_composition(g, p, 4, 0.2)

        def f(t):
            v = -0.19 + 0.5 * t - 0.25 * t * t
            return 1 - 1.31 * v * v

        # step sizes balance truncation against float64 cancellation per order
        stencils = {
            1: ([-0.5, 0, 0.5], [-1, 0, 1], 1e-4),
            2: ([1, -2, 1], [-1, 0, 1], 1e-4),
            3: ([-0.5, 1, 0, -1, 0.5], [-2, -1, 0, 1, 2], 1e-2),
            4: ([1, -4, 6, -4, 1], [-2, -1, 0, 1, 2], 1e-2),
        }
        for order, (w, offs, h) in stencils.items():
            fd = sum(wi * f(oi * h) for wi, oi in zip(w, offs)) / h**order
            jet_val = float(jet.coeffs[order].mid()) * math.factorial(order)
            assert abs(fd - jet_val) < 1e-6 * max(1, abs(jet_val)), (order, fd, jet_val)

    def test_degree_monotonicity_on_logistic_edge(self, ctx):
        """Higher degree gives a tighter sandwich for the smooth edge case."""
        g = Sqrt(Sub(Const(ctx.from_str("1.2")), Var()))
        p = poly(ctx, -0.19, 0.5, window=0.05)
        widths = {}
        for n in (3, 9):
            pu = edge_upper(g, p, n, 0.05)
            pl = edge_lower(g, p, n, 0.05)
            w = ctx.zero.hull(ctx.from_str("0.05"))
            widths[n] = float((pu.eval_interval(w) - pl.eval_interval(w)).hi)
        assert widths[9] <= widths[3]


class TestCenteredBounds:
    def test_sandwich_and_tightness(self, ctx):
        expr = Sqrt(Affine(ctx.from_str("0.25"), ctx.one))
        w = ctx.from_str("0.003")
        lo, up = centered_bounds(expr, w, 9)
        for i in range(11):
            t = mpmath.mpf("0.003") * i / 10
            exact = mpmath.sqrt(mpmath.mpf("0.25") + t)
            ti = ctx.from_str(mpmath.nstr(t, 40))
            assert mpmath.mpf(str(lo.eval_interval(ti).hi)) <= exact
            assert exact <= mpmath.mpf(str(up.eval_interval(ti).lo))
        gap = float(up.eval_interval(ctx.zero).hi - lo.eval_interval(ctx.zero).lo)
        assert gap < 1e-20

    def test_extra_data_order_tightens(self, ctx):
        expr = Sqrt(Affine(ctx.from_str("0.03"), ctx.one))
        w = ctx.from_str("0.0015")
        lo9, up9 = centered_bounds(expr, w, 9, 9, 1)
        lo11, up11 = centered_bounds(expr, w, 9, 11, 4)
        g9 = float(up9.eval_interval(ctx.zero).hi - lo9.eval_interval(ctx.zero).lo)
        g11 = float(up11.eval_interval(ctx.zero).hi - lo11.eval_interval(ctx.zero).lo)
        assert g11 < g9
