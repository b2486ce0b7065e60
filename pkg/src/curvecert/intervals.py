"""Outward-rounded interval arithmetic on software floats.

Endpoints are MPFR numbers (via gmpy2) at a precision fixed per
:class:`Context`; every operation rounds the lower endpoint toward -inf and
the upper endpoint toward +inf, so each result encloses the exact real
result.  Rounding modes live on per-context gmpy2 context objects, never on
process-global state, which keeps evaluation safe for concurrent use.

Angles are handled in *turns*: ``sin2pi(x)`` encloses sin(2*pi*x) with the
pi enclosure applied internally, so callers never multiply by an enclosure
of 2*pi themselves.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpfr

from .errors import (
    DimensionMismatch,
    DomainViolation,
    PrecisionExhausted,
    SingularOrUnverifiable,
)

__all__ = [
    "Context",
    "Interval",
    "IntervalMatrix",
    "golden_ratio",
    "elementary",
    "ELEMENTARY_KINDS",
]


class Context:
    """A fixed-precision rounding context.

    All intervals created under a context carry a reference to it; binary
    operations require both operands to share the context (mixed precision
    raises :class:`PrecisionExhausted`).
    """

    __slots__ = (
        "precision",
        "down",
        "up",
        "near",
        "_zero",
        "_one",
        "_neg_one",
        "_pi2",
        "_dec_digits",
    )

    def __init__(self, precision: int = 128):
        if precision < 24:
            raise PrecisionExhausted(f"precision {precision} too low for rigorous work")
        self.precision = precision
        self.down = gmpy2.context(precision=precision, round=gmpy2.RoundDown)
        self.up = gmpy2.context(precision=precision, round=gmpy2.RoundUp)
        self.near = gmpy2.context(precision=precision, round=gmpy2.RoundToNearest)
        self._zero = self._mp(0)
        self._one = self._mp(1)
        self._neg_one = self._mp(-1)
        # 2*pi enclosure, reused by the trig wrappers
        pl = self.down.mul(self.down.const_pi(), self._mp(2))
        ph = self.up.mul(self.up.const_pi(), self._mp(2))
        self._pi2 = (pl, ph)
        # digits that guarantee decimal round-trip at this precision
        self._dec_digits = int(precision * 0.30103) + 3

    def _mp(self, v) -> mpfr:
        # nearest-rounded construction; exact whenever v is representable
        return gmpy2.mpfr(v, self.precision)

    def neg(self, v: mpfr) -> mpfr:
        # exact: negation never needs extra significand bits
        return self.near.minus(v)

    def abs(self, v: mpfr) -> mpfr:
        return self.near.abs(v)

    # -- interval factories ------------------------------------------------

    def interval(self, lo, hi=None) -> "Interval":
        """Interval from exactly representable endpoints (str: enclosure)."""
        if isinstance(lo, str) and hi is None:
            return self.from_str(lo)
        if hi is None:
            hi = lo
        l = self._exact(lo)
        h = self._exact(hi)
        return Interval(self, l, h)

    def _exact(self, v) -> mpfr:
        if isinstance(v, mpfr):
            if v.precision > self.precision:
                raise PrecisionExhausted("endpoint precision exceeds context precision")
            return self._mp(v)
        if isinstance(v, (int, float)):
            m = self._mp(v)
            if not gmpy2.is_finite(m):
                raise DomainViolation("non-finite endpoint")
            if m != v:
                raise DomainViolation(f"value {v!r} not exactly representable; use from_str")
            return m
        raise TypeError(f"cannot build exact endpoint from {type(v)!r}")

    def from_str(self, s: str) -> "Interval":
        """Enclosure of a decimal literal (exact when representable)."""
        v = self._mp(s)
        wide = gmpy2.mpfr(s, self.precision + 64)
        if v == wide:
            return Interval(self, v, v)
        return Interval(self, self.near.next_below(v), self.near.next_above(v))

    def from_fraction(self, num: int, den: int) -> "Interval":
        lo = self.down.div(self._mp(num), self._mp(den))
        hi = self.up.div(self._mp(num), self._mp(den))
        return Interval(self, lo, hi)

    def hull_of(self, values) -> "Interval":
        vals = list(values)
        lo = min(v.lo if isinstance(v, Interval) else v for v in vals)
        hi = max(v.hi if isinstance(v, Interval) else v for v in vals)
        return Interval(self, lo, hi)

    @property
    def zero(self) -> "Interval":
        return Interval(self, self._zero, self._zero)

    @property
    def one(self) -> "Interval":
        return Interval(self, self._one, self._one)

    def pi2(self) -> "Interval":
        return Interval(self, self._pi2[0], self._pi2[1])

    def __repr__(self):
        return f"Context(precision={self.precision})"


class Interval:
    """Closed interval [lo, hi] with outward-rounded arithmetic."""

    __slots__ = ("ctx", "lo", "hi")

    def __init__(self, ctx: Context, lo: mpfr, hi: mpfr):
        if gmpy2.is_nan(lo) or gmpy2.is_nan(hi):
            raise DomainViolation("NaN endpoint")
        if lo > hi:
            raise DomainViolation(f"inverted interval [{lo}, {hi}]")
        self.ctx = ctx
        self.lo = lo
        self.hi = hi

    # -- helpers -----------------------------------------------------------

    def _peer(self, other) -> "Interval":
        if isinstance(other, Interval):
            if other.ctx.precision != self.ctx.precision:
                raise PrecisionExhausted("mixed-precision operands")
            return other
        if isinstance(other, (int, float, mpfr)):
            return self.ctx.interval(other)
        return NotImplemented

    def width(self) -> mpfr:
        return self.ctx.up.sub(self.hi, self.lo)

    def mid(self) -> mpfr:
        return self.ctx.near.div(self.ctx.near.add(self.lo, self.hi), self.ctx._mp(2))

    def mag(self) -> mpfr:
        """Upper bound for |x| over the interval."""
        c = self.ctx
        return max(c.abs(self.lo), c.abs(self.hi))

    def mig(self) -> mpfr:
        """Lower bound for |x| over the interval (0 if it contains 0)."""
        c = self.ctx
        if self.lo <= 0 <= self.hi:
            return c._zero
        return min(c.abs(self.lo), c.abs(self.hi))

    def contains(self, v) -> bool:
        if isinstance(v, Interval):
            return self.lo <= v.lo and v.hi <= self.hi
        return self.lo <= v <= self.hi

    def is_subset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersect(self, other: "Interval") -> "Interval | None":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return None
        return Interval(self.ctx, lo, hi)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(self.ctx, min(self.lo, other.lo), max(self.hi, other.hi))

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        o = self._peer(other)
        c = self.ctx
        return Interval(c, c.down.add(self.lo, o.lo), c.up.add(self.hi, o.hi))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._peer(other)
        c = self.ctx
        return Interval(c, c.down.sub(self.lo, o.hi), c.up.sub(self.hi, o.lo))

    def __rsub__(self, other):
        return self._peer(other).__sub__(self)

    def __neg__(self):
        c = self.ctx
        return Interval(c, c.neg(self.hi), c.neg(self.lo))

    def __mul__(self, other):
        o = self._peer(other)
        c = self.ctx
        d, u = c.down.mul, c.up.mul
        a, b = self.lo, self.hi
        e, f = o.lo, o.hi
        if a >= 0:
            if e >= 0:
                return Interval(c, d(a, e), u(b, f))
            if f <= 0:
                return Interval(c, d(b, e), u(a, f))
            return Interval(c, d(b, e), u(b, f))
        if b <= 0:
            if e >= 0:
                return Interval(c, d(a, f), u(b, e))
            if f <= 0:
                return Interval(c, d(b, f), u(a, e))
            return Interval(c, d(a, f), u(a, e))
        if e >= 0:
            return Interval(c, d(a, f), u(b, f))
        if f <= 0:
            return Interval(c, d(b, e), u(a, e))
        return Interval(c, min(d(a, f), d(b, e)), max(u(a, e), u(b, f)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._peer(other)
        if o.lo <= 0 <= o.hi:
            raise DomainViolation("division by an interval containing 0")
        c = self.ctx
        d, u = c.down.div, c.up.div
        cands_lo = (d(self.lo, o.lo), d(self.lo, o.hi), d(self.hi, o.lo), d(self.hi, o.hi))
        cands_hi = (u(self.lo, o.lo), u(self.lo, o.hi), u(self.hi, o.lo), u(self.hi, o.hi))
        return Interval(c, min(cands_lo), max(cands_hi))

    def __rtruediv__(self, other):
        return self._peer(other).__truediv__(self)

    def sq(self) -> "Interval":
        c = self.ctx
        d, u = c.down.mul, c.up.mul
        a, b = self.lo, self.hi
        if a >= 0:
            return Interval(c, d(a, a), u(b, b))
        if b <= 0:
            return Interval(c, d(b, b), u(a, a))
        return Interval(c, c._zero, max(u(a, a), u(b, b)))

    def abs_(self) -> "Interval":
        return Interval(self.ctx, self.mig(), self.mag())

    def powi(self, k: int) -> "Interval":
        if k < 0:
            return self.ctx.one / self.powi(-k)
        if k == 0:
            return self.ctx.one
        if k == 1:
            return self
        half = self.powi(k // 2).sq()
        return half * self if k % 2 else half

    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise DomainViolation(f"sqrt of interval reaching below 0: {self}")
        c = self.ctx
        return Interval(c, c.down.sqrt(self.lo), c.up.sqrt(self.hi))

    def log(self) -> "Interval":
        if self.lo <= 0:
            raise DomainViolation(f"log of interval reaching 0 or below: {self}")
        c = self.ctx
        return Interval(c, c.down.log(self.lo), c.up.log(self.hi))

    def acos(self) -> "Interval":
        if self.lo < -1 or self.hi > 1:
            raise DomainViolation(f"acos argument outside [-1, 1]: {self}")
        c = self.ctx
        return Interval(c, c.down.acos(self.hi), c.up.acos(self.lo))

    def sin2pi(self) -> "Interval":
        """Enclosure of sin(2*pi*x) for x in the interval (x in turns)."""
        c = self.ctx
        if c.up.sub(self.hi, self.lo) >= 1:
            return c.interval(-1, 1)
        # shift by a whole number of turns so endpoints are small
        k = c._mp(int(gmpy2.floor(self.lo)))
        rlo = c.down.sub(self.lo, k)
        rhi = c.up.sub(self.hi, k)
        quarter = c._mp(0.25)
        has_max = _contains_integer(c, c.down.sub(rlo, quarter), c.up.sub(rhi, quarter))
        threeq = c._mp(0.75)
        has_min = _contains_integer(c, c.down.sub(rlo, threeq), c.up.sub(rhi, threeq))
        s_lo = _sin2pi_point(c, rlo)
        s_hi = _sin2pi_point(c, rhi)
        lo = min(s_lo.lo, s_hi.lo)
        hi = max(s_lo.hi, s_hi.hi)
        if has_max:
            hi = c._one
        if has_min:
            lo = c._neg_one
        return Interval(c, max(lo, c._neg_one), min(hi, c._one))

    def cos2pi(self) -> "Interval":
        c = self.ctx
        quarter = c._mp(0.25)
        shifted = Interval(c, c.down.add(self.lo, quarter), c.up.add(self.hi, quarter))
        return shifted.sin2pi()

    # -- predicates used by certificates -------------------------------------

    def strictly_positive(self) -> bool:
        return self.lo > 0

    def strictly_negative(self) -> bool:
        return self.hi < 0

    # -- io -------------------------------------------------------------------

    def to_decimal(self) -> str:
        return f"[{_dec(self.ctx, self.lo)}, {_dec(self.ctx, self.hi)}]"

    def __repr__(self):
        return f"Interval({_dec(self.ctx, self.lo, 8)}, {_dec(self.ctx, self.hi, 8)})"


def _contains_integer(c: Context, lo: mpfr, hi: mpfr) -> bool:
    """Whether [lo, hi] (conservatively widened by rounding) contains an integer."""
    return gmpy2.floor(hi) >= gmpy2.ceil(lo)


def _sin2pi_point(c: Context, t: mpfr) -> Interval:
    """Enclosure of sin(2*pi*t) at a point, via Lipschitz widening.

    The radian argument z = 2*pi*t is itself an enclosure, so the sine range
    over z is enclosed by the endpoint values widened by width(z) (|sin'|<=1),
    valid regardless of critical points inside z.
    """
    pl, ph = c._pi2
    cands = (
        c.down.mul(pl, t),
        c.down.mul(ph, t),
        c.up.mul(pl, t),
        c.up.mul(ph, t),
    )
    zlo, zhi = min(cands), max(cands)
    w = c.up.sub(zhi, zlo)
    slo = min(c.down.sin(zlo), c.down.sin(zhi))
    shi = max(c.up.sin(zlo), c.up.sin(zhi))
    return Interval(c, max(c.down.sub(slo, w), c._neg_one), min(c.up.add(shi, w), c._one))


def _dec(c: Context, v: mpfr, digits: int | None = None) -> str:
    d = digits or c._dec_digits
    if gmpy2.is_zero(v):
        return "0"
    mant, exp, _ = v.digits(10, d)
    sign = "-" if mant.startswith("-") else ""
    mant = mant.lstrip("-")
    return f"{sign}0.{mant}e{exp}"


ELEMENTARY_KINDS = ("add", "sub", "mul", "div", "sqrt", "log", "sin2pi", "cos2pi", "acos", "pow")


def elementary(x: Interval, kind: str, other=None) -> Interval:
    """Dispatch an elementary operation by name (the rigorous op surface)."""
    if kind == "add":
        return x + other
    if kind == "sub":
        return x - other
    if kind == "mul":
        return x * other
    if kind == "div":
        return x / other
    if kind == "sqrt":
        return x.sqrt()
    if kind == "log":
        return x.log()
    if kind == "sin2pi":
        return x.sin2pi()
    if kind == "cos2pi":
        return x.cos2pi()
    if kind == "acos":
        return x.acos()
    if kind == "pow":
        return x.powi(int(other))
    raise DomainViolation(f"unknown elementary kind {kind!r}")


def golden_ratio(precision: int) -> Interval:
    """Enclosure of (sqrt(5) - 1)/2 at the given precision."""
    if precision < 53:
        raise PrecisionExhausted("golden_ratio requires precision >= 53")
    c = Context(precision)
    five = c.interval(5)
    return (five.sqrt() - 1) / 2


class IntervalMatrix:
    """Dense matrix of intervals (small sizes; used for C/G matrices)."""

    def __init__(self, rows):
        self.rows = [list(r) for r in rows]
        self.n = len(self.rows)
        self.m = len(self.rows[0]) if self.rows else 0
        if any(len(r) != self.m for r in self.rows):
            raise DimensionMismatch("ragged interval matrix")
        self.ctx = self.rows[0][0].ctx if self.rows else None

    @classmethod
    def identity(cls, ctx: Context, n: int) -> "IntervalMatrix":
        return cls([[ctx.one if i == j else ctx.zero for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __add__(self, other):
        if (self.n, self.m) != (other.n, other.m):
            raise DimensionMismatch("matrix shapes differ")
        return IntervalMatrix(
            [[self.rows[i][j] + other.rows[i][j] for j in range(self.m)] for i in range(self.n)]
        )

    def __matmul__(self, other):
        if self.m != other.n:
            raise DimensionMismatch("matrix shapes incompatible")
        out = []
        for i in range(self.n):
            row = []
            for j in range(other.m):
                acc = self.ctx.zero
                for k in range(self.m):
                    acc = acc + self.rows[i][k] * other.rows[k][j]
                row.append(acc)
            out.append(row)
        return IntervalMatrix(out)

    def mat_vec(self, vec):
        if self.m != len(vec):
            raise DimensionMismatch("matrix/vector shapes incompatible")
        out = []
        for i in range(self.n):
            acc = self.ctx.zero
            for k in range(self.m):
                acc = acc + self.rows[i][k] * vec[k]
            out.append(acc)
        return out

    def det(self) -> Interval:
        if self.n != self.m:
            raise DimensionMismatch("determinant of non-square matrix")
        if self.n == 1:
            return self.rows[0][0]
        if self.n == 2:
            (a, b), (c, d) = self.rows
            return a * d - b * c
        if self.n == 3:
            (a, b, c), (d, e, f), (g, h, i) = self.rows
            return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
        raise DimensionMismatch("det implemented for n <= 3 only")

    def mid_floats(self):
        return [[float(x.mid()) for x in row] for row in self.rows]

    def inverse_verified(self) -> "IntervalMatrix":
        """Verified enclosure of the inverse via a Neumann residual bound.

        With R an approximate midpoint inverse and E = I - R*A, any point
        inverse lies in (I + D) * R where D has entries bounded by
        q/(1-q), q = the row-sum bound of |E|.  Fails if q >= 1.
        """
        if self.n != self.m:
            raise DimensionMismatch("inverse of non-square matrix")
        ctx = self.ctx
        det = self.det()
        if det.lo <= 0 <= det.hi:
            raise SingularOrUnverifiable(
                f"determinant enclosure {det.to_decimal()} contains 0"
            )
        mid = self.mid_floats()
        R_f = _float_inverse(mid)
        if R_f is None:
            raise SingularOrUnverifiable("midpoint inverse does not exist")
        R = IntervalMatrix([[ctx.interval(v) for v in row] for row in R_f])
        E = IntervalMatrix.identity(ctx, self.n) + _negate(R @ self)
        q = ctx.zero
        for i in range(self.n):
            s = ctx.zero
            for j in range(self.n):
                s = s + E.rows[i][j].abs_()
            if s.hi > q.hi:
                q = s
        if not (q.hi < 1):
            raise SingularOrUnverifiable(
                f"residual norm bound {_dec(ctx, q.hi, 8)} >= 1; enclosure too wide"
            )
        b = ctx.up.div(q.hi, ctx.down.sub(ctx._one, q.hi))
        interior = Interval(ctx, ctx.neg(b), b)
        D = IntervalMatrix(
            [
                [(ctx.one + interior) if i == j else interior for j in range(self.n)]
                for i in range(self.n)
            ]
        )
        return D @ R

    # - block-norm bounds (derivative-bound extraction) -

    def op_norm_upper(self) -> mpfr:
        """Verified spectral-norm upper bound sqrt(norm1 * norminf)."""
        ctx = self.ctx
        n1 = ctx.zero
        for j in range(self.m):
            s = ctx.zero
            for i in range(self.n):
                s = s + self.rows[i][j].abs_()
            if s.hi > n1.hi:
                n1 = s
        ninf = ctx.zero
        for i in range(self.n):
            s = ctx.zero
            for j in range(self.m):
                s = s + self.rows[i][j].abs_()
            if s.hi > ninf.hi:
                ninf = s
        return (n1 * ninf).sqrt().hi

    def sigma_min_lower(self) -> mpfr:
        """Gershgorin-style lower bound for the smallest singular value.

        Exact for 1x1 blocks; for larger square blocks uses the diagonal
        dominance bound min_i (|a_ii| - sum_{j != i} max(|a_ij|, |a_ji|)),
        clamped at 0.
        """
        ctx = self.ctx
        if self.n == 1 and self.m == 1:
            return self.rows[0][0].mig()
        if self.n != self.m:
            return ctx._zero
        best = None
        for i in range(self.n):
            d = ctx.interval(self.rows[i][i].mig())
            off = ctx.zero
            for j in range(self.n):
                if j != i:
                    off = off + ctx.interval(
                        max(self.rows[i][j].mag(), self.rows[j][i].mag())
                    )
            v = (d - off).lo
            if best is None or v < best:
                best = v
        return max(best, ctx._zero)


def _negate(m: IntervalMatrix) -> IntervalMatrix:
    return IntervalMatrix([[-x for x in row] for row in m.rows])


def _float_inverse(a):
    """Plain Gauss-Jordan inverse in float, None if pivoting fails."""
    n = len(a)
    aug = [list(map(float, a[i])) + [1.0 if j == i else 0.0 for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(aug[r][col]))
        if abs(aug[piv][col]) < 1e-300:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        scale = aug[col][col]
        aug[col] = [v / scale for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0.0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]
