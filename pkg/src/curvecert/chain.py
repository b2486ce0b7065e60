"""Forward/backward bounds along a prescribed itinerary.

The verifier walks a user-supplied sequence of local maps, propagating a
center-point enclosure (interval evaluation of each step, never a composed
symbolic map), box radii through T matrices, and cone coefficients through
G matrices, and checks the radius and cone inequalities at every step plus
the terminal stretch/domination conditions.  It verifies; it does not
search for itineraries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cones import BoundMatrix, DEFAULT_EPS, Gamma, check_final_cone, propagate_cone, t_matrix
from .errors import (
    ConeSignLoss,
    DimensionMismatch,
    RadiusCollapse,
    RigorError,
    UnsupportedSignature,
)
from .intervals import Context, Interval

__all__ = [
    "LocalMapStep",
    "ItineraryPlan",
    "ChainStepRecord",
    "ChainCertificate",
    "verify_forward_bounds",
    "verify_backward_bounds",
    "check_main_inequality",
]


class LocalMapStep:
    """One local map: a rigorous point image plus derivative bounds."""

    def __init__(self, apply_fn, bounds: BoundMatrix, name: str = ""):
        self._apply = apply_fn
        self.bounds = bounds
        self.name = name

    def apply(self, q):
        return self._apply(q)


@dataclass(frozen=True)
class ItineraryPlan:
    """Ordered step ids from a start chart/window to a target one."""

    start: tuple
    steps: tuple
    target: tuple

    def __post_init__(self):
        if not self.steps:
            raise DimensionMismatch("empty itinerary")


@dataclass
class ChainStepRecord:
    index: int
    name: str
    center: tuple
    radii: tuple
    gamma: Gamma
    margins: dict
    ok: bool


@dataclass
class ChainCertificate:
    plan: ItineraryPlan
    steps: list = field(default_factory=list)
    verdict: bool = False
    failure: str | None = None
    terminal_margins: dict = field(default_factory=dict)

    def serialize(self) -> list[str]:
        lines = [f"chain plan={self.plan.start}->{self.plan.target} steps={len(self.steps)}"]
        for s in self.steps:
            g = ", ".join(v.to_decimal() for v in s.gamma.entries())
            r = ", ".join(v.to_decimal() for v in s.radii)
            lines.append(f"  step {s.index} [{s.name}] ok={s.ok} radii=({r}) gamma=({g})")
        lines.append(f"chain verdict={self.verdict} failure={self.failure or '-'}")
        return lines


def _norm_hull(v: Interval) -> Interval:
    return v.abs_()


def verify_forward_bounds(
    maps: dict,
    plan: ItineraryPlan,
    r,
    rho,
    gamma0: Gamma,
    gamma1: Gamma,
    eps: float = DEFAULT_EPS,
    ambient=1,
    ctx: Context | None = None,
    start_theta=0,
) -> ChainCertificate:
    """Check the forward-bounds inequalities along ``plan``.

    maps: step id -> LocalMapStep.  The chain starts at the center
    (0, 0, start_theta) with radii (r, r, rho), or (0, start_theta) with
    (r, rho) when the signature has no stable block.
    """
    first = maps[plan.steps[0]]
    has_stable = first.bounds.has_stable
    if ctx is None:
        ctx = first.bounds.ctx
    cert = ChainCertificate(plan=plan)
    rI = ctx.interval(r)
    rhoI = ctx.interval(rho)
    ambI = ctx.interval(ambient) if ambient is not None else None
    if has_stable:
        q = (ctx.zero, ctx.zero, ctx.interval(start_theta))
        radii = [rI, rI, rhoI]
    else:
        q = (ctx.zero, ctx.interval(start_theta))
        radii = [rI, rhoI]
    gamma = gamma0
    n = len(radii)
    try:
        for idx, sid in enumerate(plan.steps, start=1):
            step = maps[sid]
            if step.bounds.has_stable != has_stable:
                raise DimensionMismatch("mixed signatures along the plan")
            q = step.apply(q)
            T = t_matrix(step.bounds)
            new_radii = []
            for i in range(n):
                acc = ctx.zero
                for j in range(n):
                    acc = acc + ctx.interval(T[i][j]) * radii[j]
                acc = acc - ctx.interval(eps) if i == 0 else acc + ctx.interval(eps)
                if not acc.strictly_positive():
                    raise RadiusCollapse(f"step {idx}: radius component {i} collapsed")
                new_radii.append(acc)
            radii = new_radii
            gamma = propagate_cone(gamma, step.bounds, eps=eps)
            margins = {}
            ok = True
            if ambI is not None:
                for i in range(n):
                    slack = ambI - (_norm_hull(q[i]) + radii[i])
                    margins[f"box{i}"] = slack
                    if not slack.strictly_positive():
                        ok = False
            cert.steps.append(
                ChainStepRecord(idx, step.name or str(sid), q, tuple(radii), gamma, margins, ok)
            )
            if not ok:
                cert.failure = f"radius bound left the ambient box at step {idx}"
                return cert
    except (RadiusCollapse, ConeSignLoss, RigorError) as exc:
        cert.failure = f"{type(exc).__name__} at step {len(cert.steps) + 1}: {exc}"
        return cert

    # terminal conditions: r_u^n > r + ||x^n||, r_s^n + ||y^n|| < r, cone domination
    term = {}
    stretch = radii[0] - (rI + _norm_hull(q[0]))
    term["unstable-stretch"] = stretch
    ok = stretch.strictly_positive()
    if has_stable:
        contract = rI - (radii[1] + _norm_hull(q[1]))
        term["stable-contract"] = contract
        ok = ok and contract.strictly_positive()
    cone_ok = check_final_cone(gamma, gamma1)
    term["final-cone"] = cone_ok
    cert.terminal_margins = term
    cert.verdict = bool(ok and cone_ok)
    if not cert.verdict and cert.failure is None:
        cert.failure = "terminal stretch/cone condition failed"
    return cert


def _swap_xy_bounds(b: BoundMatrix) -> BoundMatrix:
    perm = (1, 0, 2)
    u = [[b.upper[perm[i]][perm[j]] for j in range(3)] for i in range(3)]
    l = [[b.lower[perm[i]][perm[j]] for j in range(3)] for i in range(3)]
    return BoundMatrix(b.ctx, u, l, has_stable=True)


def _swap_xy_gamma(g: Gamma) -> Gamma:
    return Gamma(g.b, g.a, g.c)


def verify_backward_bounds(
    inverse_maps: dict,
    plan: ItineraryPlan,
    r,
    rho,
    gamma0_back: Gamma,
    gamma1_back: Gamma,
    eps: float = DEFAULT_EPS,
    ambient=1,
    ctx: Context | None = None,
    start_theta=0,
) -> ChainCertificate:
    """Forward bounds for the inverse map with x and y roles reversed.

    The supplied gammas carry backward signs (a < 0, b > 0, c < 0); bounds
    and gammas are conjugated by the x<->y swap and fed to the forward
    engine.
    """
    first = inverse_maps[plan.steps[0]]
    if not first.bounds.has_stable:
        raise UnsupportedSignature("backward bounds need a stable block to swap into")
    if not gamma0_back.sign_valid_backward() or not gamma1_back.sign_valid_backward():
        raise ConeSignLoss("backward gammas must have signs (a<0, b>0, c<0)")

    def swap_point(q):
        return (q[1], q[0], q[2])

    swapped = {}
    for key, step in inverse_maps.items():
        swapped[key] = LocalMapStep(
            lambda q, s=step: swap_point(s.apply(swap_point(q))),
            _swap_xy_bounds(step.bounds),
            name=step.name or str(key),
        )
    return verify_forward_bounds(
        swapped,
        plan,
        r,
        rho,
        _swap_xy_gamma(gamma0_back),
        _swap_xy_gamma(gamma1_back),
        eps=eps,
        ambient=ambient,
        ctx=ctx,
        start_theta=start_theta,
    )


def check_main_inequality(gamma0_f: Gamma, gamma0_b: Gamma) -> bool:
    """|a0_f| > |a0_b| and |b0_f| < |b0_b| (strict, conservative endpoints)."""
    if not gamma0_f.sign_valid_horizontal():
        raise ConeSignLoss("forward gamma must be horizontal-signed")
    if not gamma0_b.sign_valid_backward():
        raise ConeSignLoss("backward gamma must be backward-signed")
    if gamma0_f.b is None or gamma0_b.b is None:
        raise UnsupportedSignature("main inequality needs stable blocks")
    a_ok = gamma0_f.a.abs_().lo > gamma0_b.a.abs_().hi
    b_ok = gamma0_f.b.abs_().hi < gamma0_b.b.abs_().lo
    return bool(a_ok and b_ok)
