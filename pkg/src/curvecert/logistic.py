"""The quasi-periodically driven logistic map and its diagnostics.

The map is (theta, x) -> (theta + alpha, 1 - a(theta) x^2) with
a(theta) = a0 + eps*sin(2*pi*theta) and alpha = g/N for the golden mean g.
Everything here is *non-rigorous* high-precision float arithmetic (MPFR,
round to nearest) plus float64 quadrature: the frozen-map period-2 analysis,
the averaged fiber Lyapunov exponent, Lyapunov sums with their maximal
oscillation, departure/landing predictions for under-precise simulations,
and the perturbative expansion of the invariant curve.  The rigorous side
of the package never calls into this module except for initial guesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DegenerateOrbit, DomainViolation, NoSolution
from .intervals import Interval

__all__ = [
    "DrivenLogisticParams",
    "LyapunovRun",
    "OscillationPrediction",
    "step",
    "dstep_dx",
    "inverse_t2",
    "frozen_period2",
    "averaged_lyapunov",
    "lyapunov_sums",
    "suggested_precision",
    "h_zeros",
    "oscillation_prediction",
    "predict_departure_landing",
    "curve_g1",
    "curve_approx",
    "invariance_residual",
    "simulate_attractor",
    "distance_profile",
    "golden_interval",
]


@dataclass
class DrivenLogisticParams:
    """Map parameters; a0/eps kept as decimal strings for exactness control."""

    a0: str = "1.31"
    eps: str = "0.3"
    N: int = 200
    precision: int = 128

    def __post_init__(self):
        self.ctx = gmpy2.context(precision=self.precision, round=gmpy2.RoundToNearest)
        c = self.ctx
        self.a0_v = self.mp(self.a0)
        self.eps_v = self.mp(self.eps)
        if not (self.eps_v >= 0):
            raise DomainViolation("eps must be >= 0")
        # a(theta) > 1 for all theta, required by the averaged analysis
        if not (c.sub(self.a0_v, self.eps_v) > 1):
            raise DomainViolation("need a0 - eps > 1 so that a(theta) > 1 everywhere")
        if self.N < 1:
            raise DomainViolation("N must be a positive integer")
        self.golden = c.div(c.sub(c.sqrt(self.mp(5)), self.mp(1)), self.mp(2))
        self.alpha = c.div(self.golden, self.mp(self.N))
        self.two_pi = c.mul(c.const_pi(), self.mp(2))

    def mp(self, v):
        return gmpy2.mpfr(v, self.precision)

    def a_of(self, theta):
        c = self.ctx
        return c.add(self.a0_v, c.mul(self.eps_v, c.sin(c.mul(self.two_pi, theta))))

    def a_interval(self, theta: Interval) -> Interval:
        ctx = theta.ctx
        return ctx.from_str(self.a0) + ctx.from_str(self.eps) * theta.sin2pi()


def step(p: DrivenLogisticParams, theta, x):
    """One forward step of the driven map (point MPFR or Interval mode)."""
    if isinstance(theta, Interval):
        a = p.a_interval(theta)
        ctx = theta.ctx
        alpha = golden_interval(ctx) / ctx.interval(p.N)
        return theta + alpha, ctx.one - a * x.sq()
    c = p.ctx
    a = p.a_of(theta)
    return c.add(theta, p.alpha), c.sub(p.mp(1), c.mul(a, c.mul(x, x)))


def golden_interval(ctx) -> Interval:
    return (ctx.interval(5).sqrt() - 1) / 2


def dstep_dx(p: DrivenLogisticParams, theta, x):
    """Fiber derivative of the forward map: -2 a(theta) x."""
    c = p.ctx
    return c.mul(p.mp(-2), c.mul(p.a_of(theta), x))


def inverse_t2(p: DrivenLogisticParams, theta, x, branch=(1, -1)):
    """Two backward steps; branch picks the square-root signs.

    Interval inputs give a rigorous preimage enclosure, MPFR inputs a point
    preimage.  Raises DomainViolation when a radicand is not strictly
    positive and BranchInconsistent-free by construction (signs applied
    directly to positive roots).
    """
    s1sign, s2sign = branch
    if s1sign not in (1, -1) or s2sign not in (1, -1):
        raise DomainViolation("branch signs must be +-1")
    if isinstance(theta, Interval):
        ctx = theta.ctx
        alpha = golden_interval(ctx) / ctx.interval(p.N)
        th1 = theta - alpha
        th2 = th1 - alpha
        r1 = (ctx.one - x) / p.a_interval(th1)
        if not r1.strictly_positive():
            raise DomainViolation(f"first radicand not strictly positive: {r1!r}")
        s1 = r1.sqrt()
        if s1sign < 0:
            s1 = -s1
        r2 = (ctx.one - s1) / p.a_interval(th2)
        if not r2.strictly_positive():
            raise DomainViolation(f"second radicand not strictly positive: {r2!r}")
        s2 = r2.sqrt()
        if s2sign < 0:
            s2 = -s2
        return th2, s2
    c = p.ctx
    th1 = c.sub(theta, p.alpha)
    th2 = c.sub(th1, p.alpha)
    r1 = c.div(c.sub(p.mp(1), x), p.a_of(th1))
    if not (r1 > 0):
        raise DomainViolation(f"first radicand not positive: {r1}")
    s1 = c.sqrt(r1)
    if s1sign < 0:
        s1 = c.minus(s1)
    r2 = c.div(c.sub(p.mp(1), s1), p.a_of(th2))
    if not (r2 > 0):
        raise DomainViolation(f"second radicand not positive: {r2}")
    s2 = c.sqrt(r2)
    if s2sign < 0:
        s2 = c.minus(s2)
    return th2, s2


def frozen_period2(a, precision: int = 128):
    """Period-2 points x1 < x2 of the frozen logistic map at parameter a."""
    c = gmpy2.context(precision=precision, round=gmpy2.RoundToNearest)
    av = gmpy2.mpfr(str(a), precision)
    if av == 0:
        raise DomainViolation("a must be nonzero")
    disc = c.sub(c.mul(gmpy2.mpfr(4, precision), av), gmpy2.mpfr(3, precision))
    if not (disc > 0):
        raise DomainViolation("period-2 orbit needs 4a - 3 > 0")
    root = c.sqrt(disc)
    two_a = c.mul(gmpy2.mpfr(2, precision), av)
    x1 = c.div(c.sub(gmpy2.mpfr(1, precision), root), two_a)
    x2 = c.div(c.add(gmpy2.mpfr(1, precision), root), two_a)
    return x1, x2


def averaged_lyapunov(a0, eps, precision: int = 128):
    """Closed-form averaged fiber Lyapunov exponent of the driven map."""
    c = gmpy2.context(precision=precision, round=gmpy2.RoundToNearest)
    a0v = gmpy2.mpfr(str(a0), precision)
    epsv = gmpy2.mpfr(str(eps), precision)
    u = c.sub(a0v, gmpy2.mpfr(1, precision))
    disc = c.sub(c.mul(u, u), c.mul(epsv, epsv))
    if not (disc > 0):
        raise DomainViolation("need (a0 - 1)^2 > eps^2")
    inner = c.mul(gmpy2.mpfr(2, precision), c.add(u, c.sqrt(disc)))
    return c.div(c.log(inner), gmpy2.mpfr(2, precision))


@dataclass
class LyapunovRun:
    seed: tuple
    transient: int
    iters: int
    lam: float  # least-squares slope of S_j (the paper's "average slope")
    lam_endpoint: float  # plain S_n / n, phase-noisy by ~OS/n
    os_stat: float
    series: list = field(default_factory=list)
    series_stride: int = 0


def suggested_precision(N: int, a0=1.31, eps=0.3, base: int = 128) -> int:
    """Mantissa bits needed so the Lyapunov-sum dip stays above rounding.

    The orbit contracts toward the curve by e^-OS at the oscillation bottom;
    tracking it through requires OS*log2(e) bits plus headroom.
    """
    pred = oscillation_prediction(float(a0), float(eps), (math.sqrt(5.0) - 1) / 2 / N)
    return max(base, int(pred.value * 1.4427) + 64)


def lyapunov_sums(
    p: DrivenLogisticParams,
    seed=(0, 0.5),
    transient: int = 100_000,
    iters: int = 100_000,
    series_stride: int = 0,
) -> LyapunovRun:
    """Lyapunov sums S_j of the fiber derivative, their slope and oscillation.

    OS = max_k (S_k - min_{j<=k} S_j) over the post-transient run.  The
    exponent is the least-squares slope of S_j against j; the endpoint
    average S_n/n is kept as a secondary estimate (its phase error is of
    order OS/n, far above the slope's).
    """
    if iters < 1:
        raise DomainViolation("iters must be >= 1")
    c = p.ctx
    theta = p.mp(seed[0])
    x = p.mp(seed[1])
    one = p.mp(1)
    two = p.mp(2)
    for _ in range(transient):
        a = p.a_of(theta)
        x = c.sub(one, c.mul(a, c.mul(x, x)))
        theta = c.add(theta, p.alpha)
    S = 0.0
    run_min = 0.0
    os_stat = 0.0
    sj = ss = sjs = sjj = 0.0
    series = []
    for j in range(iters):
        a = p.a_of(theta)
        growth = c.abs(c.mul(two, c.mul(a, x)))
        if growth == 0:
            raise DegenerateOrbit(f"fiber derivative vanished at step {j}")
        S += float(c.log(growth))
        if S < run_min:
            run_min = S
        if S - run_min > os_stat:
            os_stat = S - run_min
        jf = float(j)
        sj += jf
        ss += S
        sjs += jf * S
        sjj += jf * jf
        if series_stride and j % series_stride == 0:
            series.append((j, S))
        x = c.sub(one, c.mul(a, c.mul(x, x)))
        theta = c.add(theta, p.alpha)
    n = float(iters)
    slope = (n * sjs - sj * ss) / (n * sjj - sj * sj)
    return LyapunovRun(
        seed=tuple(map(float, seed)),
        transient=transient,
        iters=iters,
        lam=slope,
        lam_endpoint=S / n,
        os_stat=os_stat,
        series=series,
        series_stride=series_stride,
    )


def _h_float(theta: float, a0: float, eps: float) -> float:
    return 0.5 * math.log(4.0 * (a0 - 1.0 + eps * math.sin(2.0 * math.pi * theta)))


@dataclass(frozen=True)
class OscillationPrediction:
    value: float
    theta1: float
    theta2: float
    lobe_integral: float


def h_zeros(a0: float, eps: float) -> tuple[float, float]:
    """Zeros of the Lyapunov integrand around theta = 3/4 (closed form)."""
    s0 = (0.25 - (a0 - 1.0)) / eps
    if not (-1.0 < s0 < 1.0):
        raise DomainViolation("integrand has no sign change for these parameters")
    t = math.acos(-s0) / (2.0 * math.pi)
    return 0.75 - t, 0.75 + t


def oscillation_prediction(a0=1.31, eps=0.3, alpha=None, N: int = 200) -> OscillationPrediction:
    """Predicted maximal oscillation of the Lyapunov sums for small alpha."""
    a0 = float(a0)
    eps = float(eps)
    if alpha is None:
        alpha = (math.sqrt(5.0) - 1.0) / 2.0 / N
    t1, t2 = h_zeros(a0, eps)
    integral, err = quad(_h_float, t2 - 1.0, t1, args=(a0, eps), limit=200, epsabs=1e-13)
    return OscillationPrediction(
        value=integral / alpha, theta1=t1, theta2=t2, lobe_integral=integral
    )


def predict_departure_landing(d: int, p: int, alpha: float, a0=1.31, eps=0.3):
    """Angles where an under-precise simulation visibly departs and re-lands.

    Departure: the error amplification from the Lyapunov-sum minimum reaches
    10^(d-p).  Landing: contraction from O(1) errors back below the pixel
    scale 10^-p.
    """
    if not (d > p > 0):
        raise DomainViolation("need digit counts d > p > 0")
    a0 = float(a0)
    eps = float(eps)
    t1, t2 = h_zeros(a0, eps)

    def cum_from_start(t):
        v, _ = quad(_h_float, t2 - 1.0, t, args=(a0, eps), limit=200, epsabs=1e-13)
        return v

    mass = cum_from_start(t1)
    target_dep = (d - p) * math.log(10.0) * alpha
    if target_dep >= mass:
        raise NoSolution("required amplification exceeds the available positive mass")
    theta_d = brentq(lambda t: cum_from_start(t) - target_dep, t2 - 1.0, t1, xtol=1e-12)

    def cum_from_t1(t):
        v, _ = quad(_h_float, t1, t, args=(a0, eps), limit=200, epsabs=1e-13)
        return v

    target_lan = -p * math.log(10.0) * alpha
    if target_lan <= cum_from_t1(t2):
        raise NoSolution("required contraction exceeds the available negative mass")
    theta_l = brentq(lambda t: cum_from_t1(t) - target_lan, t1, t2, xtol=1e-12)
    return theta_d, theta_l


def curve_g1(p: DrivenLogisticParams, theta):
    """First-order coefficient of the invariant-curve expansion in alpha."""
    c = p.ctx
    a = p.a_of(theta)
    disc = c.sub(c.mul(p.mp(4), a), p.mp(3))
    if not (disc > 0):
        raise DomainViolation("curve expansion needs 4a - 3 > 0")
    root = c.sqrt(disc)
    num = c.sub(
        c.sub(p.mp(3), c.mul(p.mp(2), a)),
        c.div(c.sub(c.mul(p.mp(8), a), p.mp(9)), root),
    )
    den = c.mul(c.mul(p.mp(2), c.mul(a, a)), disc)
    trig = c.mul(
        c.mul(p.two_pi, p.eps_v), c.cos(c.mul(p.two_pi, theta))
    )
    return c.div(c.mul(num, trig), den)


def curve_approx(p: DrivenLogisticParams, theta, order: int = 1):
    """Invariant-curve approximation: x1(a(theta)) plus optional alpha term."""
    if order not in (0, 1):
        raise DomainViolation("order must be 0 or 1")
    c = p.ctx
    a = p.a_of(theta)
    disc = c.sub(c.mul(p.mp(4), a), p.mp(3))
    if not (disc > 0):
        raise DomainViolation("curve needs 4a - 3 > 0")
    g0 = c.div(c.sub(p.mp(1), c.sqrt(disc)), c.mul(p.mp(2), a))
    if order == 0:
        return g0
    return c.add(g0, c.mul(p.alpha, curve_g1(p, theta)))


def invariance_residual(p: DrivenLogisticParams, curve_fn, theta):
    """x-defect of four forward steps started on the curve graph."""
    c = p.ctx
    th = theta
    x = curve_fn(th)
    for _ in range(4):
        th, x = step(p, th, x)
    return c.sub(x, curve_fn(th))


def simulate_attractor(
    p: DrivenLogisticParams,
    precision_bits: int,
    transient: int = 100_000,
    iters: int = 100_000,
    seed=(0, 0.5),
):
    """Raw orbit (theta mod 1, x) at exactly the requested precision."""
    sp = DrivenLogisticParams(a0=p.a0, eps=p.eps, N=p.N, precision=precision_bits)
    c = sp.ctx
    theta = sp.mp(seed[0])
    x = sp.mp(seed[1])
    one = sp.mp(1)
    for _ in range(transient):
        x = c.sub(one, c.mul(sp.a_of(theta), c.mul(x, x)))
        theta = c.add(theta, sp.alpha)
    out = []
    for _ in range(iters):
        x = c.sub(one, c.mul(sp.a_of(theta), c.mul(x, x)))
        theta = c.add(theta, sp.alpha)
        tf = float(theta)
        out.append((tf - math.floor(tf), float(x)))
    return out


def distance_profile(series, a0: float, eps: float, alpha: float, bins: int = 200, x_cut: float = 0.2):
    """Max distance of lower-branch iterates to the order-1 curve, per theta bin.

    The orbit alternates between the two period-2 curves; only iterates with
    x below ``x_cut`` are compared against the lower curve (in the chaotic
    regime plenty of such iterates are far from it, which is the signal).
    """
    prof = [0.0] * bins
    for tf, xf in series:
        if xf >= x_cut:
            continue
        a = a0 + eps * math.sin(2.0 * math.pi * tf)
        disc = 4.0 * a - 3.0
        root = math.sqrt(disc)
        g0 = (1.0 - root) / (2.0 * a)
        g1 = (3.0 - 2.0 * a - (8.0 * a - 9.0) / root) / (2.0 * a * a * disc)
        g1 *= 2.0 * math.pi * eps * math.cos(2.0 * math.pi * tf)
        dist = abs(xf - (g0 + alpha * g1))
        b = min(int(tf * bins), bins - 1)
        if dist > prof[b]:
            prof[b] = dist
    return prof
