"""The forward/backward itinerary verifier on linear toy fixtures."""

import pytest

from curvecert import (
    BoundMatrix,
    ChainCertificate,
    Gamma,
    ItineraryPlan,
    LocalMapStep,
    check_main_inequality,
    verify_backward_bounds,
    verify_forward_bounds,
)
from curvecert.errors import ConeSignLoss, UnsupportedSignature


def linear_step(ctx, diag, name=""):
    def apply(q):
        return tuple(v * ctx.interval(d) for v, d in zip(q, diag))

    return LocalMapStep(apply, BoundMatrix.diagonal(ctx, list(diag)), name)


@pytest.fixture
def example_chain(ctx):
    maps = {
        1: linear_step(ctx, (0.5, 2)),
        2: linear_step(ctx, (2, 1)),
        3: linear_step(ctx, (5, 2)),
    }
    plan = ItineraryPlan(("i", 0), (1, 2, 3), ("i", 1))
    gamma0 = Gamma.of(ctx, 1, -1)
    gamma1 = Gamma.of(ctx, ctx.from_fraction(1, 4), ctx.from_fraction(-3, 8))
    return maps, plan, gamma0, gamma1


class TestForwardBounds:
    def test_example_chain_passes(self, ctx, example_chain):
        maps, plan, gamma0, gamma1 = example_chain
        cert = verify_forward_bounds(maps, plan, 1, 1, gamma0, gamma1, eps=0, ambient=100)
        assert cert.verdict is True
        radii = [tuple(float(r.mid()) for r in s.radii) for s in cert.steps]
        assert radii == [(0.5, 2.0), (1.0, 2.0), (5.0, 4.0)]
        gammas = [tuple(float(v.mid()) for v in s.gamma.entries()) for s in cert.steps]
        assert gammas[0] == (4.0, -0.25)
        assert gammas[1] == (1.0, -0.25)
        assert gammas[2] == (1 / 25, -1 / 16)
        assert float(cert.terminal_margins["unstable-stretch"].mid()) == 4.0

    def test_identity_step_cannot_expand(self, ctx):
        maps = {1: linear_step(ctx, (1, 1))}
        plan = ItineraryPlan((0, 0), (1,), (0, 1))
        g = Gamma.of(ctx, 1, -1)
        cert = verify_forward_bounds(maps, plan, 0.5, 0.5, g, g, eps=0, ambient=100)
        assert cert.verdict is False
        assert "terminal" in cert.failure

    def test_radius_collapse_reported_with_step(self, ctx):
        maps = {
            1: linear_step(ctx, (2, 1), "ok"),
            2: linear_step(ctx, (1e-14, 1), "collapses"),
        }
        plan = ItineraryPlan((0, 0), (1, 2), (0, 1))
        g = Gamma.of(ctx, 1, -1)
        cert = verify_forward_bounds(maps, plan, 0.1, 0.1, g, g)
        assert cert.verdict is False
        assert "RadiusCollapse" in cert.failure and "step 2" in cert.failure

    def test_eps_inflation_shrinks_margins(self, ctx, example_chain):
        maps, plan, gamma0, gamma1 = example_chain
        tight = verify_forward_bounds(maps, plan, 1, 1, gamma0, gamma1, eps=0, ambient=100)
        padded = verify_forward_bounds(maps, plan, 1, 1, gamma0, gamma1, eps=1e-6, ambient=100)
        assert padded.verdict is True
        assert float(padded.terminal_margins["unstable-stretch"].mid()) < float(
            tight.terminal_margins["unstable-stretch"].mid()
        )

    def test_composability_of_subplans(self, ctx, example_chain):
        """Split plans compose to the same terminal radii and cone, up to rounding."""
        maps, plan, gamma0, gamma1 = example_chain
        full = verify_forward_bounds(maps, plan, 1, 1, gamma0, gamma1, eps=0, ambient=100)
        first = verify_forward_bounds(
            maps, ItineraryPlan(("i", 0), (1, 2), ("m", 0)), 1, 1, gamma0, gamma1, eps=0, ambient=100
        )
        mid_gamma = first.steps[-1].gamma
        mid_radii = first.steps[-1].radii
        # continue by hand through step 3
        from curvecert.cones import propagate_cone, t_matrix

        T = t_matrix(maps[3].bounds)
        r_u = ctx.interval(T[0][0]) * mid_radii[0]
        r_c = ctx.interval(T[1][1]) * mid_radii[1]
        gamma_n = propagate_cone(mid_gamma, maps[3].bounds, eps=0)
        assert abs(float(r_u.mid()) - float(full.steps[-1].radii[0].mid())) < 1e-30
        assert abs(float(r_c.mid()) - float(full.steps[-1].radii[1].mid())) < 1e-30
        assert abs(float(gamma_n.a.mid()) - float(full.steps[-1].gamma.a.mid())) < 1e-30

    def test_monotonicity_of_envelopes(self, ctx):
        """Widening upper bounds or shrinking lower ones never rescues a verdict."""
        g = Gamma.of(ctx, 1, -1)
        base = {1: linear_step(ctx, (1.2, 1))}
        plan = ItineraryPlan((0, 0), (1,), (0, 1))
        ok = verify_forward_bounds(base, plan, 0.3, 0.3, g, g, eps=0, ambient=100)
        assert ok.verdict is True
        worse = {
            1: LocalMapStep(
                base[1].apply,
                BoundMatrix(ctx, [[1.2, 0.4], [0.4, 1.0]], [[1.05, 0], [0, 0.9]], False),
            )
        }
        worse_cert = verify_forward_bounds(worse, plan, 0.3, 0.3, g, g, eps=0, ambient=100)
        # enlarged envelopes can only lose margins (here: verdict flips to False)
        assert worse_cert.verdict is False


class TestBackwardBounds:
    def test_toy_forward_fails_backward_passes(self, ctx):
        """The hyperbolic toy diag(1/2, 2, 1), read as an inverse-map family."""
        inv = {1: linear_step(ctx, (0.5, 2.0, 1.0), "toy")}
        plan = ItineraryPlan((0, 0), (1,), (0, 1))
        gf = Gamma.of(ctx, 1, -1, -1)
        fwd = verify_forward_bounds(inv, plan, 0.3, 0.3, gf, gf, eps=0, ambient=100)
        assert fwd.verdict is False
        gb = Gamma.of(ctx, -1, 1, -1)
        back = verify_backward_bounds(inv, plan, 0.3, 0.3, gb, gb, eps=0, ambient=100)
        assert back.verdict is True

    def test_swap_symmetry_reproduces_forward(self, ctx):
        """Backward on the x<->y mirror equals forward on the original."""
        fwd_maps = {1: linear_step(ctx, (2.0, 0.5, 1.0))}
        plan = ItineraryPlan((0, 0), (1,), (0, 1))
        gf = Gamma.of(ctx, 1, -1, -1)
        fwd = verify_forward_bounds(fwd_maps, plan, 0.3, 0.3, gf, gf, eps=0, ambient=100)
        mirror = {1: linear_step(ctx, (0.5, 2.0, 1.0))}
        gb = Gamma.of(ctx, -1, 1, -1)
        back = verify_backward_bounds(mirror, plan, 0.3, 0.3, gb, gb, eps=0, ambient=100)
        assert fwd.verdict == back.verdict is True
        f_radii = tuple(float(r.mid()) for r in fwd.steps[0].radii)
        b_radii = tuple(float(r.mid()) for r in back.steps[0].radii)
        assert f_radii == b_radii

    def test_no_stable_block(self, ctx):
        maps = {1: linear_step(ctx, (2, 1))}
        plan = ItineraryPlan((0, 0), (1,), (0, 1))
        with pytest.raises(UnsupportedSignature):
            verify_backward_bounds(
                maps, plan, 1, 1, Gamma.of(ctx, -1, -1), Gamma.of(ctx, -1, -1)
            )


class TestMainInequality:
    def test_passing(self, ctx):
        assert check_main_inequality(Gamma.of(ctx, 1, -1, -1), Gamma.of(ctx, -0.5, 2, -1))

    def test_equal_magnitudes(self, ctx):
        assert not check_main_inequality(Gamma.of(ctx, 1, -1, -1), Gamma.of(ctx, -1, 1, -1))

    def test_b_inequality_fails(self, ctx):
        assert not check_main_inequality(Gamma.of(ctx, 1, -2, -1), Gamma.of(ctx, -0.5, 1, -1))

    def test_sign_validation(self, ctx):
        with pytest.raises(ConeSignLoss):
            check_main_inequality(Gamma.of(ctx, -1, -1, -1), Gamma.of(ctx, -0.5, 2, -1))
