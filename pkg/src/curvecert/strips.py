"""Strip geometry and the end-to-end invariant-curve proof.

The proof works with *curve strips*: theta-windows of width alpha/2 whose
x-extent is bounded by two polynomials, tiling an arc U where the inverse
double-step map expands in x.  The pipeline

* builds 168 affine-edged strips around a non-rigorous curve guess,
* certifies the 164 single-step coverings N_k => N_{k-4} by taking the
  rigorously enclosed image strip and checking that it straddles the target
  on every window subdivision,
* drives four 128-step image-strip chains once around the circle, keeping
  every intermediate strip inside the proof region and finally checking
  strict containment in the union U_{5,168}, and
* runs the cone checks on the strip cover with the rescaled local bound
  matrices.

Every inequality lands in a Certificate record with its decimal margin.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import gmpy2

from .certificate import Certificate
from .cones import BoundMatrix, Gamma, check_final_cone, propagate_cone
from .errors import (
    ConeSignLoss,
    DomainViolation,
    GapCollapse,
    GuessOutOfDomain,
    MonotonicityUnverified,
    RigorError,
)
from .intervals import Context, Interval, _dec
from .jets import Add, Affine, Const, Mul, Neg, PolyExpr, Polynomial, Recip, Sin2pi, Sqrt, Sub, centered_bounds
from .logistic import DrivenLogisticParams, curve_approx, golden_interval

__all__ = [
    "ProofConfig",
    "CurveStrip",
    "CurveGuess",
    "build_initial_strips",
    "image_strip",
    "inset_strip",
    "check_strip_covering",
    "check_strip_inside",
    "check_strip_in_tube",
    "strip_partials",
    "verify_cones_on_cover",
    "run_chain",
    "ChainRun",
    "StripGeometry",
    "strip_csv_rows",
    "run_full_proof",
]


@dataclass(frozen=True)
class ProofConfig:
    precision: int = 128
    degree: int = 9
    subdivisions: int = 10
    strip_count: int = 168
    strip_offset: int = 30  # U starts at 3/4 - strip_offset * (alpha/2)
    chain_sources: int = 4
    chain_steps: int = 128
    half_height_cap: str = "0.001"
    half_height_frac: str = "0.65"  # fraction of the domain margin
    ride_fraction: str = "0.8"  # of the domain margin, chain-strip cap
    chain_cap_max: str = "0.12"
    v_fraction: str = "0.9"  # of the domain margin, proof-region profile
    v_cap: str = "0.13"
    beta: str = "1e6"
    cone_eps: float = 2.0**-40
    guess_extra_bits: int = 64
    taylor_data_order: int = 11
    remainder_pieces: int = 4
    # test hooks: restrict work without changing the geometry
    singles_limit: int = 0  # 0 = all
    emit_strips: bool = False


class CurveStrip:
    """Parallelogram-like ch-set: a theta-window with polynomial x-edges."""

    __slots__ = ("ctx", "index", "base", "width", "p_d", "p_u", "center_image")

    def __init__(self, ctx, index, base, width, p_d, p_u, center_image=None):
        self.ctx = ctx
        self.index = index  # lattice position of the window start, in alpha/2 units
        self.base = base  # Interval: absolute window start (not reduced mod 1)
        self.width = width  # Interval enclosure of alpha/2
        self.p_d = p_d
        self.p_u = p_u
        self.center_image = center_image  # Interval: x-image of the source center

    def window(self) -> Interval:
        """Local parameter range [0, w]."""
        return self.ctx.zero.hull(self.width)

    def theta_window(self) -> Interval:
        return self.base + self.window()

    def gap_interval(self) -> Interval:
        """Enclosure of p_u - p_d over the window (difference polynomial)."""
        out = None
        for sub in _subwindows(self.ctx, self.width, 8):
            g = _eval_edge_diff(self.p_u, self.p_d, self.ctx.zero, sub)
            out = g if out is None else out.hull(g)
        return out

    def min_gap_lower(self, subdivisions: int = 8):
        """Certified lower bound for min(p_u - p_d) over the window."""
        best = None
        for sub in _subwindows(self.ctx, self.width, subdivisions):
            g = _eval_edge_diff(self.p_u, self.p_d, self.ctx.zero, sub).lo
            if best is None or g < best:
                best = g
        return best

    def x_box(self) -> Interval:
        w = self.window()
        return self.p_d.eval_interval(w).hull(self.p_u.eval_interval(w))

    def half_gap_hull(self) -> Interval:
        return self.gap_interval() * self.ctx.from_fraction(1, 2)


def _subwindows(ctx: Context, width: Interval, n: int):
    out = []
    for j in range(n):
        lo = width * ctx.from_fraction(j, n)
        hi = width * ctx.from_fraction(j + 1, n)
        out.append(Interval(ctx, min(lo.lo, hi.lo), max(lo.hi, hi.hi)))
    return out


class CurveGuess:
    """Non-rigorous invariant-curve evaluation used to anchor the geometry.

    Inside the fiber-contracting window the value is refined by forward
    iteration of the double step from a frozen-curve seed placed just past
    the contraction onset (accuracy far below the covering margins);
    elsewhere the order-1 expansion is good enough for the wide tube checks.
    """

    def __init__(self, params: DrivenLogisticParams, extra_bits: int = 64):
        self.p = DrivenLogisticParams(
            a0=params.a0, eps=params.eps, N=params.N, precision=params.precision + extra_bits
        )
        s0 = (0.25 - (float(params.a0_v) - 1.0)) / float(params.eps_v)
        if not (-1.0 < s0 < 1.0):
            raise GuessOutOfDomain("no fiber-contracting window for these parameters")
        self.theta1 = 0.75 - math.acos(-s0) / (2 * math.pi)
        self.theta2 = 0.75 + math.acos(-s0) / (2 * math.pi)
        if float(curve_approx(self.p, self.p.mp(0.75), 0)) > -1e-4:
            raise GuessOutOfDomain("curve guess too close to the x axis")

    def value(self, theta):
        """Curve value at an MPFR angle (guess precision)."""
        p = self.p
        c = p.ctx
        theta = p.mp(theta)
        tf = float(theta)
        frac = tf - math.floor(tf)
        alpha_f = float(p.alpha)
        lo = self.theta1 + 4 * alpha_f
        hi = self.theta2 - 0.5 * alpha_f
        if not (lo <= frac <= hi):
            return curve_approx(p, theta, 1)
        # even step count back to just past the contraction onset
        m = int((frac - lo) / alpha_f)
        m -= m % 2
        if m < 2:
            return curve_approx(p, theta, 1)
        th = c.sub(theta, c.mul(p.alpha, p.mp(m)))
        x = curve_approx(p, th, 1)
        one = p.mp(1)
        for _ in range(m):
            x = c.sub(one, c.mul(p.a_of(th), c.mul(x, x)))
            th = c.add(th, p.alpha)
        return x


@dataclass
class StripGeometry:
    """Shared lattice quantities for one proof run."""

    ctx: Context
    params: DrivenLogisticParams
    config: ProofConfig
    alpha: Interval
    w: Interval
    a0I: Interval
    epsI: Interval

    @classmethod
    def create(cls, params: DrivenLogisticParams, config: ProofConfig) -> "StripGeometry":
        ctx = Context(config.precision)
        alpha = golden_interval(ctx) / ctx.interval(params.N)
        w = alpha / 2
        return cls(
            ctx=ctx,
            params=params,
            config=config,
            alpha=alpha,
            w=w,
            a0I=ctx.from_str(params.a0),
            epsI=ctx.from_str(params.eps),
        )

    def base_of(self, index: int) -> Interval:
        ctx = self.ctx
        return ctx.from_fraction(3, 4) + self.w * ctx.interval(index - self.config.strip_offset)

    def window_zero_w(self) -> Interval:
        return self.ctx.zero.hull(self.w)

    def a_expr(self, theta_offset: Interval):
        """Expression for a(theta_offset + t)."""
        return Add(
            Const(self.a0I),
            Mul(Const(self.epsI), Sin2pi(Affine(theta_offset, self.ctx.one))),
        )

    def a_interval(self, theta: Interval) -> Interval:
        return self.a0I + self.epsI * theta.sin2pi()

    def domain_margin(self, theta: Interval, guess: "CurveGuess") -> Interval:
        """Distance from the curve to the inverse-branch domain boundary.

        The second inverse branch needs x > 1 - a(theta - alpha); the margin
        is guess(theta) - (1 - a(theta - alpha)), strongly asymmetric around
        theta = 3/4 because the true curve rides about alpha*G1 above the
        frozen curve where a is increasing.
        """
        ctx = self.ctx
        center = ctx.interval(ctx._mp(guess.value(theta.mid())))
        return center - (ctx.one - self.a_interval(theta - self.alpha))

    def half_height(self, theta: Interval, guess: "CurveGuess"):
        """Strip-region half-height profile min(cap, frac * margin)."""
        ctx = self.ctx
        cap = ctx.from_str(self.config.half_height_cap)
        prof = ctx.from_str(self.config.half_height_frac) * self.domain_margin(theta, guess)
        return min(cap.lo, prof.lo)

    def chain_cap(self, theta: Interval, guess: "CurveGuess"):
        """Half-height cap for chain strips: ride_fraction of the domain margin."""
        ctx = self.ctx
        ride = ctx.from_str(self.config.ride_fraction)
        cap = ctx.from_str(self.config.chain_cap_max)
        return min(cap.lo, (ride * self.domain_margin(theta, guess)).lo)

    def v_half(self, theta: Interval, guess: "CurveGuess") -> Interval:
        ctx = self.ctx
        cap = ctx.from_str(self.config.v_cap)
        prof = ctx.from_str(self.config.v_fraction) * self.domain_margin(theta, guess)
        return Interval(ctx, min(cap.lo, prof.lo), min(cap.hi, prof.hi))


def build_initial_strips(guess: CurveGuess, geo: StripGeometry) -> list[CurveStrip]:
    """Affine-edged strips around the guess, tiling U, tighter near 3/4."""
    ctx = geo.ctx
    cfg = geo.config
    if not (float(ctx.from_str(cfg.half_height_cap).lo) > 0):
        raise DomainViolation("degenerate strip: half-height cap must be positive")
    strips = []
    for k in range(cfg.strip_count):
        base = geo.base_of(k)
        theta_win = base + geo.window_zero_w()
        h = geo.half_height(theta_win, guess)
        if not (h > 0):
            raise DomainViolation(f"strip {k + 1}: half-height profile collapsed")
        # anchor the affine edges at the window midpoint: the strip center
        # then sits on the guess where the covering center condition looks
        c0 = guess.value(base.mid())
        c1 = guess.value((base + geo.w).mid())
        cm = guess.value((base + geo.w * ctx.from_fraction(1, 2)).mid())
        slope = ctx.near.div(ctx.near.sub(c1, c0), geo.w.mid())
        half_w = ctx.near.div(geo.w.mid(), ctx._mp(2))
        anchor = ctx.near.sub(ctx._mp(cm), ctx.near.mul(slope, half_w))
        lo0 = ctx.down.sub(anchor, h)
        hi0 = ctx.up.add(anchor, h)
        p_d = Polynomial(ctx, [lo0, slope], geo.window_zero_w())
        p_u = Polynomial(ctx, [hi0, slope], geo.window_zero_w())
        strips.append(CurveStrip(ctx, k, base, geo.w, p_d, p_u))
    return strips


# --------------------------------------------------------------------------
# Rigorous inverse-map machinery
# --------------------------------------------------------------------------


def _inverse_edge_expr(geo: StripGeometry, base: Interval, edge: Polynomial):
    """x-component of the inverse double step along the edge graph.

    t |-> -sqrt((1 - sqrt((1 - p(t)) / a(base - alpha + t))) / a(base - 2 alpha + t))
    """
    ctx = geo.ctx
    one = Const(ctx.one)
    a1 = geo.a_expr(base - geo.alpha)
    a2 = geo.a_expr(base - geo.alpha - geo.alpha)
    s1 = Sqrt(Mul(Sub(one, PolyExpr(edge)), Recip(a1)))
    return Neg(Sqrt(Mul(Sub(one, s1), Recip(a2))))


def _partials(geo: StripGeometry, theta: Interval, x: Interval):
    """Interval enclosures of dF/dx and dF/dtheta over a box."""
    ctx = geo.ctx
    a1 = geo.a_interval(theta - geo.alpha)
    a2 = geo.a_interval(theta - geo.alpha - geo.alpha)
    r1 = (ctx.one - x) / a1
    if not r1.strictly_positive():
        raise DomainViolation(f"box leaves the first inverse branch: radicand {r1!r}")
    s1 = r1.sqrt()
    r2 = (ctx.one - s1) / a2
    if not r2.strictly_positive():
        raise DomainViolation(f"box leaves the second inverse branch: radicand {r2!r}")
    s2 = r2.sqrt()
    two_pi_eps = geo.epsI * ctx.pi2()
    a1p = two_pi_eps * (theta - geo.alpha).cos2pi()
    a2p = two_pi_eps * (theta - geo.alpha - geo.alpha).cos2pi()
    ds1_dx = -(ctx.one / (a1 * s1 * 2))
    ds1_dth = -(s1 * a1p) / (a1 * 2)
    dF_ds1 = ctx.one / (a2 * s2 * 2)
    dF_dx = dF_ds1 * ds1_dx
    dF_dth = dF_ds1 * ds1_dth + (s2 / (a2 * 2)) * a2p
    return dF_dx, dF_dth


@dataclass
class ImageDiagnostics:
    monotonicity: Interval
    gap_lower: object


def strip_partials(strip: CurveStrip, geo: StripGeometry, pieces: int = 8):
    """Partials of the inverse step hulled over the strip, theta-subdivided.

    Subdividing in theta keeps the edge position and the local map
    coefficients correlated; a single whole-strip box is too pessimistic
    near the domain boundary.  The piece count is refined automatically
    when decorrelation pushes a radicand across 0.
    """
    while True:
        try:
            dx_hull = None
            dth_hull = None
            for sub in _subwindows(geo.ctx, strip.width, pieces):
                theta = strip.base + sub
                box = strip.p_d.eval_interval(sub).hull(strip.p_u.eval_interval(sub))
                dx, dth = _partials(geo, theta, box)
                dx_hull = dx if dx_hull is None else dx_hull.hull(dx)
                dth_hull = dth if dth_hull is None else dth_hull.hull(dth)
            return dx_hull, dth_hull
        except DomainViolation:
            if pieces >= 512:
                raise
            pieces *= 4


def image_strip(strip: CurveStrip, geo: StripGeometry, degree: int | None = None):
    """Rigorously enclosed image strip of the inverse double step.

    Returns (M, diagnostics) with M's upper edge a certified lower bound of
    the image of the source's lower edge and vice versa, so the source
    covers M by construction.  Raises MonotonicityUnverified, GapCollapse
    (gap lost), or DomainViolation (inverse branch left its domain).
    """
    ctx = geo.ctx
    degree = geo.config.degree if degree is None else degree
    dF_dx, _ = strip_partials(strip, geo, pieces=max(8, geo.config.subdivisions))
    if not dF_dx.strictly_negative():
        raise MonotonicityUnverified(f"dF/dx over the strip straddles 0: {dF_dx!r}")
    g_u = _inverse_edge_expr(geo, strip.base, strip.p_d)
    g_d = _inverse_edge_expr(geo, strip.base, strip.p_u)
    data_order = max(degree, geo.config.taylor_data_order)
    pieces = geo.config.remainder_pieces
    while True:
        try:
            new_pu, _ = centered_bounds(g_u, geo.window_zero_w(), degree, data_order, pieces)
            _, new_pd = centered_bounds(g_d, geo.window_zero_w(), degree, data_order, pieces)
            break
        except DomainViolation:
            # remainder-window decorrelation near the domain boundary:
            # refine the remainder subdivision before giving up
            if pieces >= 256:
                raise
            pieces *= 4
    new_base = strip.base - geo.alpha - geo.alpha
    # rigorous image of the source center (covering condition 1)
    tmid = geo.w * ctx.from_fraction(1, 2)
    xc = (
        strip.p_d.eval_interval(tmid) + strip.p_u.eval_interval(tmid)
    ) * ctx.from_fraction(1, 2)
    cimg = _point_image(geo, strip.base + tmid, xc)
    out = CurveStrip(ctx, strip.index - 4, new_base, geo.w, new_pd, new_pu, cimg)
    gap_lo = out.min_gap_lower(max(4, geo.config.subdivisions))
    if not (gap_lo > 0):
        raise GapCollapse(
            f"image strip gap not certifiably positive (lower bound {float(gap_lo):.3e})",
        )
    diag = ImageDiagnostics(monotonicity=dF_dx, gap_lower=gap_lo)
    return out, diag


def _point_image(geo: StripGeometry, theta: Interval, x: Interval) -> Interval:
    ctx = geo.ctx
    a1 = geo.a_interval(theta - geo.alpha)
    r1 = (ctx.one - x) / a1
    if not r1.strictly_positive():
        raise DomainViolation("center image: first radicand not positive")
    s1 = r1.sqrt()
    a2 = geo.a_interval(theta - geo.alpha - geo.alpha)
    r2 = (ctx.one - s1) / a2
    if not r2.strictly_positive():
        raise DomainViolation("center image: second radicand not positive")
    return -(r2.sqrt())


def inset_strip(
    strip: CurveStrip,
    max_half_gap,
    anchor: Interval | None = None,
    slope=None,
) -> CurveStrip:
    """Inset the band down to the given half-gap.

    Any sub-band of a covered strip is still covered, so insetting is always
    sound; it prevents blow-up when the map is strongly expanding.  With an
    ``anchor`` (the certified image of the source center) and a ``slope``
    the band is replaced by a flat affine band anchor-line +- cap, after a
    rigorous check that the flat band lies inside the old one; this also
    compensates the asymmetry of the fiber derivative across a wide band.
    Without an anchor the band is shifted symmetrically.
    """
    ctx = strip.ctx
    half = strip.half_gap_hull()
    engaged = half.hi > ctx.near.div(ctx._mp(max_half_gap), ctx._mp(2))
    if not engaged:
        # deep contraction: the band self-centers, leave it untouched
        return strip
    cap = ctx.interval(max_half_gap)
    if anchor is not None and slope is not None:
        half_w = ctx.near.div(strip.width.mid(), ctx._mp(2))
        c0 = ctx.near.sub(ctx._mp(anchor.mid()), ctx.near.mul(ctx._mp(slope), half_w))
        line = Polynomial(ctx, [c0, slope], strip.p_d.window)
        d_up = None
        d_dn = None
        for sub in _subwindows(ctx, strip.width, 8):
            up = _eval_edge_diff(strip.p_u, line, ctx.zero, sub).lo
            dn = _eval_edge_diff(line, strip.p_d, ctx.zero, sub).lo
            d_up = up if d_up is None else min(d_up, up)
            d_dn = dn if d_dn is None else min(d_dn, dn)
        room = ctx.near.mul(ctx._mp("0.95"), min(d_up, d_dn))
        cap_eff = min(cap.lo, room)
        if cap_eff > 0:
            line_d = Polynomial(ctx, [ctx.down.sub(c0, cap_eff), slope], strip.p_d.window)
            line_u = Polynomial(ctx, [ctx.up.add(c0, cap_eff), slope], strip.p_u.window)
            return CurveStrip(
                ctx, strip.index, strip.base, strip.width, line_d, line_u, strip.center_image
            )
    # fallback: symmetric constant shift (only when the cap is exceeded)
    delta = ctx.near.sub(half.hi, ctx._mp(max_half_gap))
    if not (delta > 0):
        return strip
    p_u = strip.p_u.shifted(delta, "down")
    p_d = strip.p_d.shifted(delta, "up")
    return CurveStrip(ctx, strip.index, strip.base, strip.width, p_d, p_u, strip.center_image)


# --------------------------------------------------------------------------
# Covering / containment checks
# --------------------------------------------------------------------------


def _margin_str(ctx: Context, margin) -> str:
    return "-1" if margin is None else _dec(ctx, margin, 8)


def _eval_edge_diff(A: Polynomial, B: Polynomial, delta: Interval, t: Interval) -> Interval:
    """Enclosure of A(t) - B(t + delta) over t, as one polynomial.

    Subtracting separately hulled evaluations of two steep, nearly parallel
    edges loses their correlation; expanding B(t + delta) and subtracting
    coefficient-wise keeps the difference flat.
    """
    ctx = A.ctx
    db = B.degree
    # B(t + delta) coefficients via binomial expansion
    shifted = [ctx.zero for _ in range(db + 1)]
    dpow = [ctx.one]
    for _ in range(db):
        dpow.append(dpow[-1] * delta)
    for j, bj in enumerate(B.coeffs):
        bjI = ctx.interval(bj)
        for k in range(j + 1):
            shifted[k] = shifted[k] + bjI * ctx.interval(math.comb(j, k)) * dpow[j - k]
    n = max(A.degree, db)
    coeffs = []
    for k in range(n + 1):
        ak = ctx.interval(A.coeffs[k]) if k <= A.degree else ctx.zero
        bk = shifted[k] if k <= db else ctx.zero
        coeffs.append(ak - bk)
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * t + c
    return acc


def _wrap_shift(ctx: Context, m_base: Interval, s_base: Interval) -> Interval:
    k = round(float(s_base.mid()) - float(m_base.mid()))
    return m_base + ctx.interval(k) - s_base


def _inner_window(s: CurveStrip):
    lo = float(s.base.hi)
    hi = float((s.base + s.width).lo)
    return lo, hi


def check_strip_covering(M: CurveStrip, targets, subdivisions: int):
    """Does the (already enclosed) image strip straddle the targets?

    On every subdivision of M's window, M's upper edge must lie strictly
    above every overlapped target's upper edge and M's lower edge strictly
    below its lower edge; M's window must be covered by the targets'
    windows; and the recorded source-center image must be interior to a
    target.  Returns (ok, min_margin, failing_index).
    """
    ctx = M.ctx
    min_margin = None
    for j, sub in enumerate(_subwindows(ctx, M.width, subdivisions)):
        sub_cov = []
        any_overlap = False
        for S in targets:
            delta = _wrap_shift(ctx, M.base, S.base)
            tt = (sub + delta).intersect(S.window())
            if tt is None:
                continue
            any_overlap = True
            msub = (tt - delta).intersect(sub) or (tt - delta)
            m_up = _eval_edge_diff(M.p_u, S.p_u, delta, msub).lo
            m_dn = (-_eval_edge_diff(M.p_d, S.p_d, delta, msub)).lo
            margin = min(m_up, m_dn)
            if min_margin is None or margin < min_margin:
                min_margin = margin
            if not (margin > 0):
                return False, min_margin, j
            lo, hi = _inner_window(S)
            k = round(lo - float((M.base + sub).lo))
            sub_cov.append((lo - k, hi - k))
        if not any_overlap or not _covers(
            float((M.base + sub).lo), float((M.base + sub).hi), sub_cov
        ):
            return False, min_margin, j
    # covering condition 1: the source-center image is interior to a target
    if M.center_image is not None:
        ok_center = False
        tmid = M.width * ctx.from_fraction(1, 2)
        for S in targets:
            delta = _wrap_shift(ctx, M.base, S.base)
            tt = (tmid + delta).intersect(S.window())
            if tt is None:
                continue
            c_up = (S.p_u.eval_interval(tt) - M.center_image).lo
            c_dn = (M.center_image - S.p_d.eval_interval(tt)).lo
            margin = min(c_up, c_dn)
            if min_margin is None or margin < min_margin:
                min_margin = margin
            if margin > 0:
                ok_center = True
                break
        if not ok_center:
            return False, min_margin, -1
    return True, min_margin, None


def check_strip_inside(M: CurveStrip, targets, subdivisions: int):
    """Strict containment of M in the union of target bands."""
    ctx = M.ctx
    min_margin = None
    for j, sub in enumerate(_subwindows(ctx, M.width, subdivisions)):
        sub_cov = []
        any_overlap = False
        for S in targets:
            delta = _wrap_shift(ctx, M.base, S.base)
            tt = (sub + delta).intersect(S.window())
            if tt is None:
                continue
            any_overlap = True
            msub = (tt - delta).intersect(sub) or (tt - delta)
            m_up = (-_eval_edge_diff(M.p_u, S.p_u, delta, msub)).lo
            m_dn = _eval_edge_diff(M.p_d, S.p_d, delta, msub).lo
            margin = min(m_up, m_dn)
            if min_margin is None or margin < min_margin:
                min_margin = margin
            if not (margin > 0):
                return False, min_margin, j
            lo, hi = _inner_window(S)
            k = round(lo - float((M.base + sub).lo))
            sub_cov.append((lo - k, hi - k))
        if not any_overlap or not _covers(
            float((M.base + sub).lo), float((M.base + sub).hi), sub_cov
        ):
            return False, min_margin, j
    return True, min_margin, None


def _covers(lo: float, hi: float, pieces) -> bool:
    """Whether the union of pieces covers [lo, hi] (float bookkeeping)."""
    if not pieces:
        return False
    pieces = sorted(pieces)
    reach = lo
    slack = 1e-12
    for plo, phi in pieces:
        if plo > reach + slack:
            return False
        reach = max(reach, phi)
        if reach >= hi - slack:
            return True
    return reach >= hi - slack


def _guess_slope(guess: CurveGuess, geo: StripGeometry, strip: CurveStrip):
    """Secant slope of the guess curve across a strip window (MPFR)."""
    c0 = guess.value(strip.base.mid())
    c1 = guess.value((strip.base + strip.width).mid())
    return geo.ctx.near.div(geo.ctx.near.sub(c1, c0), strip.width.mid())


def check_strip_in_tube(strip: CurveStrip, guess: CurveGuess, geo: StripGeometry, samples: int = 8):
    """Containment of a strip in the proof-region tube around the guess.

    Sampled at subwindow midpoints with a curvature slack covering the
    between-sample variation of (edge - curve).  This anchors the
    certificate's region bookkeeping; domain validity itself is enforced
    rigorously by the inverse-branch radicand checks.
    """
    ctx = geo.ctx
    min_margin = None
    curv = 200.0
    for sub in _subwindows(ctx, strip.width, samples):
        tmid = ctx.interval(sub.mid())
        theta = strip.base + tmid
        vh = geo.v_half(theta, guess)
        center = ctx.interval(ctx._mp(guess.value(theta.mid())))
        slack = ctx.from_str(repr(curv * float(sub.width()) ** 2))
        up = (center + vh - slack - strip.p_u.eval_interval(tmid)).lo
        dn = (strip.p_d.eval_interval(tmid) - (center - vh + slack)).lo
        margin = min(up, dn)
        if min_margin is None or margin < min_margin:
            min_margin = margin
    return (min_margin is not None and min_margin > 0), min_margin


# --------------------------------------------------------------------------
# Cone verification on the strip cover
# --------------------------------------------------------------------------


def strip_bound_matrix(geo: StripGeometry, src: CurveStrip, tgt: CurveStrip, beta: Interval):
    """Local-chart bound matrix for the step src -> tgt.

    Charts normalize each strip to its half-height; the central rescaling by
    beta suppresses the off-diagonal dF/dtheta term, which is carried
    rigorously rather than dropped.
    """
    ctx = geo.ctx
    dF_dx, dF_dth = strip_partials(src, geo, pieces=max(8, geo.config.subdivisions))
    h_src = src.half_gap_hull()
    h_tgt = tgt.half_gap_hull()
    ratio = h_src / h_tgt
    a_xx = dF_dx.abs_() * ratio
    a_xt = dF_dth.abs_() * ratio / beta
    a_tt = ratio
    upper = [[a_xx.hi, a_xt.hi], [0, a_tt.hi]]
    lower = [[a_xx.mig(), a_xt.mig()], [0, a_tt.mig()]]
    return BoundMatrix(ctx, upper, lower, has_stable=False)


def verify_cones_on_cover(strips, geo: StripGeometry, gamma0: Gamma | None = None):
    """Cone refinement on every single-step region pair of the cover.

    For each pair (k, k-4) the propagated cone must strictly dominate the
    starting cone (terminal-cone inequalities with gamma1 = gamma0).
    Returns a list of (label, ok, margin, extras).
    """
    ctx = geo.ctx
    if gamma0 is None:
        gamma0 = Gamma.of(ctx, 1, -1)
    beta = ctx.from_str(geo.config.beta)
    eps = geo.config.cone_eps
    out = []
    for k in range(4, len(strips)):
        src = strips[k]
        tgt = strips[k - 4]
        label = f"cone {k + 1}->{k - 3}"
        try:
            bm = strip_bound_matrix(geo, src, tgt, beta)
            gamma_p = propagate_cone(gamma0, bm, eps=eps)
        except (ConeSignLoss, RigorError) as exc:
            out.append((label, False, f"-1 ({type(exc).__name__})", {}))
            continue
        dom = check_final_cone(gamma_p, gamma0)
        margin_a = ctx.down.sub(gamma0.a.lo, gamma_p.a.hi)
        ratio = gamma_p.c / gamma_p.a
        margin_c = ctx.down.sub((gamma0.c / gamma0.a).lo, ratio.hi)
        margin = min(margin_a, margin_c)
        out.append(
            (
                label,
                bool(dom),
                _dec(ctx, margin, 8),
                {
                    "a_new": _dec(ctx, gamma_p.a.hi, 8),
                    "c_over_a": _dec(ctx, ratio.hi, 8),
                },
            )
        )
    return out


# --------------------------------------------------------------------------
# The full proof driver
# --------------------------------------------------------------------------


def strip_csv_rows(strip_id: str, strip: CurveStrip, grid: int = 8):
    """Rows (id, theta, p_d, p_u) sampling a strip's edges for plotting."""
    ctx = strip.ctx
    rows = []
    for i in range(grid + 1):
        t = strip.width * ctx.from_fraction(i, grid)
        theta = float((strip.base + t).mid()) % 1.0
        rows.append(
            (
                strip_id,
                theta,
                float(strip.p_d.eval_interval(ctx.interval(t.mid())).mid()),
                float(strip.p_u.eval_interval(ctx.interval(t.mid())).mid()),
            )
        )
    return rows


@dataclass
class ChainRun:
    strips: list  # post-inset strip per step
    min_gap: float
    min_gap_step: int
    tube_margins: list
    failed_step: int | None = None
    error: Exception | None = None

    @property
    def terminal(self):
        return self.strips[-1] if self.strips else None


def run_chain(geo: StripGeometry, guess: CurveGuess, source: CurveStrip, steps: int) -> ChainRun:
    """Drive one image-strip chain, capping and tube-checking each step."""
    s = source
    out = ChainRun(strips=[], min_gap=float("inf"), min_gap_step=0, tube_margins=[])
    for m in range(1, steps + 1):
        try:
            s, diag = image_strip(s, geo)
        except RigorError as exc:
            out.failed_step = m
            out.error = exc
            return out
        gap = float(diag.gap_lower)
        if gap < out.min_gap:
            out.min_gap = gap
            out.min_gap_step = m
        cap = geo.chain_cap(s.theta_window(), guess)
        s = inset_strip(s, cap, anchor=s.center_image, slope=_guess_slope(guess, geo, s))
        ok_tube, tube_margin = check_strip_in_tube(s, guess, geo)
        out.tube_margins.append(tube_margin)
        out.strips.append(s)
        if not ok_tube:
            out.failed_step = m
            out.error = GapCollapse("strip left the proof region", step=m)
            return out
    return out


def run_full_proof(params: DrivenLogisticParams, config: ProofConfig) -> Certificate:
    """Execute the complete certification pipeline.

    Any rigorous failure (gap collapse, monotonicity, domain) aborts with a
    failing record carrying the chain id and step index.
    """
    start = time.time()
    geo = StripGeometry.create(params, config)
    cert = Certificate(
        config={
            "a0": params.a0,
            "eps": params.eps,
            "N": params.N,
            **{k: getattr(config, k) for k in (
                "precision",
                "degree",
                "subdivisions",
                "strip_count",
                "strip_offset",
                "chain_sources",
                "chain_steps",
                "half_height_cap",
                "half_height_frac",
                "ride_fraction",
                "chain_cap_max",
                "v_fraction",
                "v_cap",
                "beta",
            )},
        },
        environment={
            "interval-endpoints": f"mpfr-{config.precision}bit",
            "gmpy2": gmpy2.version(),
        },
    )
    guess = CurveGuess(params, extra_bits=config.guess_extra_bits)
    strips = build_initial_strips(guess, geo)

    min_gap = None
    min_gap_at = None
    terminal_gaps = []

    # 1. single-step coverings N_k => N_{k-4}
    last = config.strip_count
    if config.singles_limit:
        last = min(last, 4 + config.singles_limit)
    for k in range(5, last + 1):
        label = f"N{k}=>N{k - 4}"
        try:
            M, diag = image_strip(strips[k - 1], geo)
        except RigorError as exc:
            cert.add("strip-covering", label, "-1", False, error=type(exc).__name__, step=k)
            cert.failure = f"{type(exc).__name__} at single-step {k}: {exc}"
            cert.wall_clock = time.time() - start
            return cert.finalize()
        ok, margin, fail_idx = check_strip_covering(M, [strips[k - 5]], config.subdivisions)
        extras = {"subdivisions": config.subdivisions}
        if fail_idx is not None:
            extras["failing_subinterval"] = fail_idx
        cert.add("strip-covering", label, _margin_str(geo.ctx, margin), ok, **extras)

    # 2. the long chains
    union = strips[4:]
    for i in range(1, config.chain_sources + 1):
        run = run_chain(geo, guess, strips[i - 1], config.chain_steps)
        if run.min_gap_step and (min_gap is None or run.min_gap < min_gap):
            min_gap = run.min_gap
            min_gap_at = (i, run.min_gap_step)
        if run.failed_step is not None:
            exc = run.error
            cert.add(
                "chain",
                f"chain{i}",
                "-1",
                False,
                error=type(exc).__name__,
                failing_step=run.failed_step,
                detail=str(exc)[:120],
            )
            cert.failure = f"chain {i} failed at step {run.failed_step}: {type(exc).__name__}"
            cert.wall_clock = time.time() - start
            return cert.finalize()
        s = run.terminal
        ok, margin, fail_idx = check_strip_inside(s, union, config.subdivisions)
        terminal_gaps.append(float(s.gap_interval().hi))
        extras = {"steps": config.chain_steps, "terminal_gap": f"{float(s.gap_interval().hi):.6e}"}
        if fail_idx is not None:
            extras["failing_subinterval"] = fail_idx
        cert.add("chain-into-union", f"chain{i}", _margin_str(geo.ctx, margin), ok, **extras)

    # 3. cone conditions on the cover
    cone_results = verify_cones_on_cover(strips[: last], geo)
    for label, ok, margin, extras in cone_results:
        cert.add("cone", label, margin, ok, **extras)

    if min_gap is not None:
        cert.config["min_chain_gap"] = f"{min_gap:.6e}"
        cert.config["min_chain_gap_at"] = f"chain{min_gap_at[0]}-step{min_gap_at[1]}"
    if terminal_gaps:
        cert.config["terminal_gaps"] = ",".join(f"{g:.3e}" for g in terminal_gaps)

    cert.wall_clock = time.time() - start
    return cert.finalize()
