"""Univariate Taylor (jet) arithmetic with interval coefficients.

A :class:`Jet` stores scaled Taylor coefficients c_j enclosing
f^(j)(t0)/j! for a function built from a small closed expression grammar
(constants, affine arguments, polynomial edges, +, -, *, square, sqrt,
reciprocal, sin2pi/cos2pi).  Evaluating the same recurrences with the whole
window as the 0-th coefficient yields derivative enclosures over the window,
which is how remainder bounds are produced: the Lagrange term is read off
the (n+1)-st coefficient of a window jet, never from symbolic derivatives.

Two polynomial bound constructions are provided:

* :func:`edge_upper` / :func:`edge_lower` - expansion at the left end of the
  window [0, r], with the remainder folded into the degree-n coefficient
  (conservative joint sup over both remainder factors).
* :func:`centered_bounds` - expansion at the window midpoint with the
  remainder folded into the constant term and an exact outward-rounded
  binomial re-expansion back to the [0, r] basis.  The halved expansion
  radius gains a factor 2^-(n+1) in the remainder, which the strongly
  contracted strips of the proof pipeline need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainViolation
from .intervals import Context, Interval

__all__ = [
    "Jet",
    "Polynomial",
    "RemainderBound",
    "Expr",
    "Var",
    "Const",
    "Affine",
    "PolyExpr",
    "Add",
    "Sub",
    "Mul",
    "Neg",
    "Square",
    "Sqrt",
    "Recip",
    "Sin2pi",
    "Cos2pi",
    "compose",
    "jet_of_composition",
    "edge_upper",
    "edge_lower",
    "centered_bounds",
]

# edge polynomials are capped at degree 9; internal jets may carry a few
# more coefficients for remainder bounding
MAX_EDGE_DEGREE = 9
MAX_ORDER = 13


class Jet:
    """Truncated Taylor series with interval coefficients."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: Context, coeffs):
        self.ctx = ctx
        self.coeffs = list(coeffs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def constant(cls, ctx: Context, value: Interval, order: int) -> "Jet":
        return cls(ctx, [value] + [ctx.zero] * order)

    @classmethod
    def variable(cls, ctx: Context, t0: Interval, order: int) -> "Jet":
        coeffs = [t0] + [ctx.zero] * order
        if order >= 1:
            coeffs[1] = ctx.one
        return cls(ctx, coeffs)

    def __add__(self, other: "Jet") -> "Jet":
        return Jet(self.ctx, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "Jet") -> "Jet":
        return Jet(self.ctx, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "Jet":
        return Jet(self.ctx, [-a for a in self.coeffs])

    def scale(self, s: Interval) -> "Jet":
        return Jet(self.ctx, [a * s for a in self.coeffs])

    def shift(self, s: Interval) -> "Jet":
        out = list(self.coeffs)
        out[0] = out[0] + s
        return Jet(self.ctx, out)

    def __mul__(self, other: "Jet") -> "Jet":
        n = self.order
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(n + 1):
            acc = self.ctx.zero
            for j in range(k + 1):
                acc = acc + a[j] * b[k - j]
            out.append(acc)
        return Jet(self.ctx, out)

    def square(self) -> "Jet":
        return self * self

    def sqrt(self) -> "Jet":
        u = self.coeffs
        if not u[0].strictly_positive():
            raise DomainViolation(f"sqrt jet with sign-indefinite base {u[0]!r}")
        s0 = u[0].sqrt()
        out = [s0]
        two_s0 = s0 * 2
        for k in range(1, self.order + 1):
            acc = u[k]
            for j in range(1, k):
                acc = acc - out[j] * out[k - j]
            out.append(acc / two_s0)
        return Jet(self.ctx, out)

    def recip(self) -> "Jet":
        u = self.coeffs
        if u[0].contains(0):
            raise DomainViolation("reciprocal jet with base containing 0")
        r0 = self.ctx.one / u[0]
        out = [r0]
        for k in range(1, self.order + 1):
            acc = self.ctx.zero
            for j in range(1, k + 1):
                acc = acc + u[j] * out[k - j]
            out.append(-acc / u[0])
        return Jet(self.ctx, out)

    def sin_cos_2pi(self) -> tuple["Jet", "Jet"]:
        """Jets of sin(2*pi*u) and cos(2*pi*u) for this jet u (turns)."""
        ctx = self.ctx
        v = [c * ctx.pi2() for c in self.coeffs]  # radians jet
        s0 = self.coeffs[0].sin2pi()
        c0 = self.coeffs[0].cos2pi()
        s = [s0]
        c = [c0]
        for k in range(1, self.order + 1):
            sa = ctx.zero
            ca = ctx.zero
            for j in range(1, k + 1):
                jv = v[j] * j
                sa = sa + jv * c[k - j]
                ca = ca + jv * s[k - j]
            kinv = ctx.one / ctx.interval(k)
            s.append(sa * kinv)
            c.append(-(ca * kinv))
        return Jet(ctx, s), Jet(ctx, c)

    def eval(self, t: Interval) -> Interval:
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * t + c
        return acc


@dataclass(frozen=True)
class RemainderBound:
    """Enclosure of the raw (n+1)-st derivative of g∘p over the window."""

    value: Interval
    order: int


class Polynomial:
    """Point-coefficient polynomial over a window [0, r].

    Coefficients are plain software floats at the context precision;
    evaluation over intervals is outward-rounded Horner, so a Polynomial is
    itself a rigorous object once its one-sided bound property is certified
    by construction.
    """

    __slots__ = ("ctx", "coeffs", "window")

    def __init__(self, ctx: Context, coeffs, window: Interval):
        self.ctx = ctx
        self.coeffs = list(coeffs)
        self.window = window

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def eval_interval(self, t: Interval) -> Interval:
        ctx = self.ctx
        acc = ctx.interval(self.coeffs[-1])
        for c in reversed(self.coeffs[:-1]):
            acc = acc * t + ctx.interval(c)
        return acc

    def eval_point(self, t) -> object:
        """Nearest-rounded point evaluation (diagnostics only)."""
        ctx = self.ctx
        tm = ctx._mp(t)
        acc = ctx._mp(self.coeffs[-1])
        for c in reversed(self.coeffs[:-1]):
            acc = ctx.near.add(ctx.near.mul(acc, tm), c)
        return acc

    def shifted(self, delta, direction: str) -> "Polynomial":
        """Constant-term shift rounded so the move is never overshot.

        direction 'down' produces a polynomial <= p - delta pointwise,
        'up' produces one >= p + delta (delta >= 0).
        """
        ctx = self.ctx
        c0 = self.coeffs[0]
        if direction == "down":
            nc0 = ctx.down.sub(c0, delta)
        elif direction == "up":
            nc0 = ctx.up.add(c0, delta)
        else:
            raise ValueError(direction)
        return Polynomial(ctx, [nc0] + self.coeffs[1:], self.window)

    def serialize(self) -> str:
        from .intervals import _dec

        parts = ", ".join(_dec(self.ctx, c) for c in self.coeffs)
        return f"window={self.window.to_decimal()} coeffs=[{parts}]"


# --------------------------------------------------------------------------
# Expression grammar
# --------------------------------------------------------------------------


class Expr:
    def eval_interval(self, t: Interval) -> Interval:
        raise NotImplementedError

    def eval_jet(self, t0: Interval, order: int) -> Jet:
        raise NotImplementedError

    def subst(self, inner: "Expr") -> "Expr":
        raise NotImplementedError


class Var(Expr):
    def eval_interval(self, t):
        return t

    def eval_jet(self, t0, order):
        return Jet.variable(t0.ctx, t0, order)

    def subst(self, inner):
        return inner


class Const(Expr):
    def __init__(self, value: Interval):
        self.value = value

    def eval_interval(self, t):
        return self.value

    def eval_jet(self, t0, order):
        return Jet.constant(self.value.ctx, self.value, order)

    def subst(self, inner):
        return self


class Affine(Expr):
    """c0 + c1 * t."""

    def __init__(self, c0: Interval, c1: Interval):
        self.c0 = c0
        self.c1 = c1

    def eval_interval(self, t):
        return self.c0 + self.c1 * t

    def eval_jet(self, t0, order):
        return Jet.variable(t0.ctx, t0, order).scale(self.c1).shift(self.c0)

    def subst(self, inner):
        return Add(Const(self.c0), Mul(Const(self.c1), inner))


class PolyExpr(Expr):
    def __init__(self, poly: Polynomial):
        self.poly = poly

    def eval_interval(self, t):
        return self.poly.eval_interval(t)

    def eval_jet(self, t0, order):
        ctx = self.poly.ctx
        var = Jet.variable(ctx, t0, order)
        acc = Jet.constant(ctx, ctx.interval(self.poly.coeffs[-1]), order)
        for c in reversed(self.poly.coeffs[:-1]):
            acc = (acc * var).shift(ctx.interval(c))
        return acc

    def subst(self, inner):
        raise DomainViolation("polynomial edges are arguments, not function bodies")


class _Unary(Expr):
    def __init__(self, arg: Expr):
        self.arg = arg

    def subst(self, inner):
        return type(self)(self.arg.subst(inner))


class _Binary(Expr):
    def __init__(self, a: Expr, b: Expr):
        self.a = a
        self.b = b

    def subst(self, inner):
        return type(self)(self.a.subst(inner), self.b.subst(inner))


class Add(_Binary):
    def eval_interval(self, t):
        return self.a.eval_interval(t) + self.b.eval_interval(t)

    def eval_jet(self, t0, order):
        return self.a.eval_jet(t0, order) + self.b.eval_jet(t0, order)


class Sub(_Binary):
    def eval_interval(self, t):
        return self.a.eval_interval(t) - self.b.eval_interval(t)

    def eval_jet(self, t0, order):
        return self.a.eval_jet(t0, order) - self.b.eval_jet(t0, order)


class Mul(_Binary):
    def eval_interval(self, t):
        return self.a.eval_interval(t) * self.b.eval_interval(t)

    def eval_jet(self, t0, order):
        return self.a.eval_jet(t0, order) * self.b.eval_jet(t0, order)


class Neg(_Unary):
    def eval_interval(self, t):
        return -self.arg.eval_interval(t)

    def eval_jet(self, t0, order):
        return -self.arg.eval_jet(t0, order)


class Square(_Unary):
    def eval_interval(self, t):
        return self.arg.eval_interval(t).sq()

    def eval_jet(self, t0, order):
        return self.arg.eval_jet(t0, order).square()


class Sqrt(_Unary):
    def eval_interval(self, t):
        v = self.arg.eval_interval(t)
        if not v.strictly_positive():
            raise DomainViolation(f"sqrt radicand not strictly positive: {v!r}")
        return v.sqrt()

    def eval_jet(self, t0, order):
        return self.arg.eval_jet(t0, order).sqrt()


class Recip(_Unary):
    def eval_interval(self, t):
        v = self.arg.eval_interval(t)
        return v.ctx.one / v

    def eval_jet(self, t0, order):
        return self.arg.eval_jet(t0, order).recip()


class Sin2pi(_Unary):
    def eval_interval(self, t):
        return self.arg.eval_interval(t).sin2pi()

    def eval_jet(self, t0, order):
        return self.arg.eval_jet(t0, order).sin_cos_2pi()[0]


class Cos2pi(_Unary):
    def eval_interval(self, t):
        return self.arg.eval_interval(t).cos2pi()

    def eval_jet(self, t0, order):
        return self.arg.eval_jet(t0, order).sin_cos_2pi()[1]


def compose(g: Expr, inner: Expr) -> Expr:
    """g with its variable substituted by `inner`."""
    return g.subst(inner)


# --------------------------------------------------------------------------
# Edge-bound constructions
# --------------------------------------------------------------------------


def _check_order(n: int):
    if not (1 <= n <= MAX_EDGE_DEGREE):
        raise DomainViolation(f"edge degree must be in 1..{MAX_EDGE_DEGREE}, got {n}")


def jet_of_composition(g: Expr, p: Polynomial, order: int, window_r) -> tuple[Jet, RemainderBound]:
    """Taylor data of g∘p at 0 plus a derivative enclosure over [0, r]."""
    if order + 1 > 11:
        raise DomainViolation(f"order {order} exceeds the jet order cap 11")
    ctx = p.ctx
    expr = compose(g, PolyExpr(p))
    point_jet = expr.eval_jet(ctx.zero, order)
    r = window_r if isinstance(window_r, Interval) else ctx.interval(window_r)
    window = ctx.zero.hull(r)
    window_jet = expr.eval_jet(window, order + 1)
    fact = ctx.interval(math.factorial(order + 1))
    remainder = RemainderBound(window_jet.coeffs[order + 1] * fact, order + 1)
    return point_jet, remainder


def _edge_poly(g, p, n, r, upper: bool) -> Polynomial:
    _check_order(n)
    ctx = p.ctx
    jet, rem = jet_of_composition(g, p, n, r)
    rI = r if isinstance(r, Interval) else ctx.interval(r)
    # scaled remainder coefficient: d^{n+1}(v)/(n+1)! * w, v and w over [0, r]
    scaled = rem.value / ctx.interval(math.factorial(n + 1))
    inflation = (scaled * rI).hull(ctx.zero)
    coeffs = []
    for j in range(n + 1):
        cj = jet.coeffs[j]
        if j == n:
            cj = cj + inflation
        coeffs.append(cj.hi if upper else cj.lo)
    return Polynomial(ctx, coeffs, ctx.zero.hull(rI))


def edge_upper(g: Expr, p: Polynomial, n: int, r) -> Polynomial:
    """Degree-n polynomial with g(p(t)) <= result(t) on [0, r]."""
    return _edge_poly(g, p, n, r, upper=True)


def edge_lower(g: Expr, p: Polynomial, n: int, r) -> Polynomial:
    """Degree-n polynomial with result(t) <= g(p(t)) on [0, r]."""
    return _edge_poly(g, p, n, r, upper=False)


def centered_bounds(
    expr: Expr,
    window: Interval,
    n: int,
    data_order: int | None = None,
    remainder_pieces: int = 1,
) -> tuple[Polynomial, Polynomial]:
    """(lower, upper) degree-n bounds of expr over [0, w], midpoint expansion.

    Taylor data at the window midpoint is carried to ``data_order`` (tight
    point-jet coefficients); the terms above degree n plus the Lagrange
    remainder of order data_order+1 (a window jet, optionally evaluated on
    ``remainder_pieces`` subwindows to tame interval decorrelation) are
    folded into the constant coefficient.  The (t - w/2)-basis is then
    re-expanded to the t-basis with interval binomials so the one-signed
    basis coefficient selection applies.
    """
    _check_order(n)
    ctx = window.ctx
    if data_order is None:
        data_order = n
    if not (n <= data_order <= MAX_ORDER - 1):
        raise DomainViolation(f"data order must be in {n}..{MAX_ORDER - 1}")
    w = window.hi
    half = ctx.interval(ctx.near.div(w, ctx._mp(2)))
    point_jet = expr.eval_jet(half, data_order)
    m_rem = data_order + 1
    rem_coeff = None
    for piece in range(max(1, remainder_pieces)):
        lo = ctx.down.mul(w, ctx.down.div(ctx._mp(piece), ctx._mp(remainder_pieces)))
        hi = ctx.up.mul(w, ctx.up.div(ctx._mp(piece + 1), ctx._mp(remainder_pieces)))
        sub = Interval(ctx, min(lo, hi), max(lo, hi))
        cj = expr.eval_jet(sub, m_rem).coeffs[m_rem]
        rem_coeff = cj if rem_coeff is None else rem_coeff.hull(cj)
    # tau^j ranges over tau in [-w/2, w/2]
    tau = Interval(ctx, ctx.neg(half.hi), half.hi)
    inflation = rem_coeff * tau.powi(m_rem)
    for j in range(n + 1, data_order + 1):
        inflation = inflation + point_jet.coeffs[j] * tau.powi(j)
    # binomial re-expansion: sum_{j<=n} c_j (t - t0)^j -> t-basis
    neg_t0 = -half
    full = ctx.zero.hull(ctx.interval(w))
    t_coeffs = [ctx.zero for _ in range(n + 1)]
    pow_cache = [ctx.one]
    for _ in range(n):
        pow_cache.append(pow_cache[-1] * neg_t0)
    for j in range(n + 1):
        cj = point_jet.coeffs[j]
        for k in range(j + 1):
            term = cj * ctx.interval(math.comb(j, k)) * pow_cache[j - k]
            t_coeffs[k] = t_coeffs[k] + term
    t_coeffs[0] = t_coeffs[0] + inflation
    lower = Polynomial(ctx, [c.lo for c in t_coeffs], full)
    upper = Polynomial(ctx, [c.hi for c in t_coeffs], full)
    return lower, upper
