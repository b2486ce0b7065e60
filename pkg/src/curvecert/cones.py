"""Ch-sets, quadratic cone forms, and the derivative-bound matrices.

This is the algebraic kernel of the verification scheme: block bounds on a
local map's derivative produce

* a T matrix that propagates box radii (covering step),
* a C matrix with ``Q_gamma(A p) >= Q_{C gamma}(p)``, and
* its verified inverse G that propagates cone coefficients.

Blocks are indexed (x, y, theta) = (unstable, stable, central); the stable
block may be absent (s = 0), which drops the middle row/column everywhere.
All quantities are computed in outward-rounded interval arithmetic, and the
checks compare conservative interval endpoints, so a ``True`` answer is a
certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    ConeSignLoss,
    DimensionMismatch,
    DomainViolation,
    LeftAmbientBox,
    RadiusCollapse,
)
from .intervals import Context, Interval, IntervalMatrix

__all__ = [
    "Gamma",
    "BoundMatrix",
    "ChSet",
    "DEFAULT_EPS",
    "q_form",
    "t_matrix",
    "c_matrix",
    "g_matrix",
    "covering_step",
    "propagate_cone",
    "check_final_cone",
    "check_chart_transition",
    "bound_matrix_from_blocks",
]

# far above 128-bit rounding noise, far below geometric margins
DEFAULT_EPS = 2.0**-40


def _as_interval(ctx: Context, v) -> Interval:
    return v if isinstance(v, Interval) else ctx.interval(v)


@dataclass(frozen=True)
class Gamma:
    """Cone coefficients (a, b, c); b is None for problems without a stable block."""

    a: Interval
    b: Interval | None
    c: Interval

    @classmethod
    def of(cls, ctx: Context, a, b, c=None) -> "Gamma":
        if c is None:
            a, c = a, b
            return cls(_as_interval(ctx, a), None, _as_interval(ctx, c))
        return cls(_as_interval(ctx, a), _as_interval(ctx, b), _as_interval(ctx, c))

    @property
    def has_stable(self) -> bool:
        return self.b is not None

    def entries(self):
        return [v for v in (self.a, self.b, self.c) if v is not None]

    def sign_valid_horizontal(self) -> bool:
        """a > 0 and b, c < 0, certified on the conservative side."""
        ok = self.a.strictly_positive() and self.c.strictly_negative()
        if self.b is not None:
            ok = ok and self.b.strictly_negative()
        return ok

    def sign_valid_backward(self) -> bool:
        """Reversed roles: a < 0, b > 0, c < 0."""
        if self.b is None:
            return False
        return (
            self.a.strictly_negative()
            and self.b.strictly_positive()
            and self.c.strictly_negative()
        )


class BoundMatrix:
    """Componentwise block operator-norm bounds of a derivative enclosure.

    ``upper[i][j]`` bounds sup ||A_ij v_j|| / ||v_j|| from above and
    ``lower[i][j]`` bounds the corresponding inf from below, both as plain
    software floats.  Row/column order is (x, y, theta) with the y slot
    dropped when ``has_stable`` is false.
    """

    def __init__(self, ctx: Context, upper, lower, has_stable: bool):
        self.ctx = ctx
        self.upper = [list(map(ctx._mp, row)) for row in upper]
        self.lower = [list(map(ctx._mp, row)) for row in lower]
        self.has_stable = has_stable
        n = 3 if has_stable else 2
        if len(self.upper) != n or len(self.lower) != n:
            raise DimensionMismatch(f"expected {n}x{n} bound arrays")
        for ru, rl in zip(self.upper, self.lower):
            if len(ru) != n or len(rl) != n:
                raise DimensionMismatch(f"expected {n}x{n} bound arrays")
            for u, l in zip(ru, rl):
                if l < 0 or u < l:
                    raise DomainViolation("need 0 <= lower <= upper componentwise")

    @property
    def n(self) -> int:
        return 3 if self.has_stable else 2

    @classmethod
    def diagonal(cls, ctx: Context, diag) -> "BoundMatrix":
        n = len(diag)
        if n not in (2, 3):
            raise DimensionMismatch("diagonal bound matrix needs 2 or 3 entries")
        u = [[diag[i] if i == j else 0 for j in range(n)] for i in range(n)]
        return cls(ctx, u, [row[:] for row in u], has_stable=(n == 3))

    def u(self, i: int, j: int) -> Interval:
        return self.ctx.interval(self.upper[i][j])

    def l(self, i: int, j: int) -> Interval:
        return self.ctx.interval(self.lower[i][j])


def bound_matrix_from_blocks(ctx: Context, blocks) -> BoundMatrix:
    """BoundMatrix from a grid of interval-matrix blocks.

    1x1 blocks use exact absolute values; larger blocks use the verified
    sqrt(norm1*norminf) upper bound and a Gershgorin-style lower bound.
    """
    n = len(blocks)
    upper = [[None] * n for _ in range(n)]
    lower = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            blk = blocks[i][j]
            if isinstance(blk, Interval):
                blk = IntervalMatrix([[blk]])
            upper[i][j] = blk.op_norm_upper()
            lower[i][j] = blk.sigma_min_lower()
    return BoundMatrix(ctx, upper, lower, has_stable=(n == 3))


def q_form(gamma: Gamma, q, dims=None):
    """Q_gamma(q) = a||x||^2 + b||y||^2 + c||theta||^2.

    ``q`` is a flat sequence of numbers/intervals split per ``dims``
    (defaults to one coordinate per present block).
    """
    ctx = gamma.a.ctx
    entries = gamma.entries()
    if dims is None:
        dims = (1,) * len(entries)
    if len(dims) != len(entries):
        raise DimensionMismatch("dims do not match cone signature")
    if sum(dims) != len(q):
        raise DimensionMismatch(f"vector length {len(q)} != sum(dims) {sum(dims)}")
    acc = ctx.zero
    pos = 0
    for coeff, d in zip(entries, dims):
        norm2 = ctx.zero
        for k in range(d):
            norm2 = norm2 + _as_interval(ctx, q[pos + k]).sq()
        pos += d
        acc = acc + coeff * norm2
    return acc


def t_matrix(b: BoundMatrix):
    """Radius-propagation matrix: first row (lower, -upper, -upper), rest upper."""
    ctx = b.ctx
    n = b.n
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == 0:
                row.append(b.lower[0][0] if j == 0 else ctx.neg(b.upper[0][j]))
            else:
                row.append(b.upper[i][j])
        rows.append(row)
    return rows


def c_matrix(b: BoundMatrix) -> IntervalMatrix:
    """The quadratic-form comparison matrix.

    Row i weights ||p_i||^2; column j carries the gamma_j coefficient, so
    Q_gamma(A p) >= Q_{C gamma}(p) with C gamma a plain matrix-vector product.
    """
    n = b.n
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            if j == 0:
                # lower_{0i}^2 - sum_{k != i} upper_{0i} upper_{0k}
                acc = b.l(0, i).sq()
                for k in range(n):
                    if k != i:
                        acc = acc - b.u(0, i) * b.u(0, k)
                row.append(acc)
            else:
                # sum_k upper_{ji} upper_{jk}
                acc = b.ctx.zero
                for k in range(n):
                    acc = acc + b.u(j, i) * b.u(j, k)
                row.append(acc)
        out.append(row)
    return IntervalMatrix(out)


def g_matrix(b: BoundMatrix) -> IntervalMatrix:
    """Verified enclosure of C^{-1}."""
    return c_matrix(b).inverse_verified()


def covering_step(n1: "ChSet", b: BoundMatrix, q2, eps: float = DEFAULT_EPS, ambient=1):
    """Propagate a ch-set through one local map: N2 = N(q2, T R1 + (-eps, eps, eps)).

    Raises RadiusCollapse if a radius is exhausted and LeftAmbientBox if the
    image box does not stay within the ambient box.
    """
    ctx = n1.ctx
    T = t_matrix(b)
    n = len(T)
    epsI = _as_interval(ctx, eps)
    radii = []
    for i in range(n):
        acc = ctx.zero
        for j in range(n):
            acc = acc + ctx.interval(T[i][j]) * n1.radii[j]
        acc = acc - epsI if i == 0 else acc + epsI
        if not acc.strictly_positive():
            raise RadiusCollapse(f"radius component {i} collapsed: {acc!r}")
        radii.append(acc)
    q2 = [_as_interval(ctx, v) for v in q2]
    if ambient is not None:
        amb = _as_interval(ctx, ambient)
        for i in range(n):
            reach = q2[i].abs_() + radii[i]
            if not (reach.hi <= amb.lo):
                raise LeftAmbientBox(
                    f"component {i}: |center| + radius = {reach!r} exceeds ambient {amb!r}"
                )
    return ChSet(ctx, tuple(q2), tuple(radii), has_stable=n1.has_stable)


def propagate_cone(gamma: Gamma, b: BoundMatrix, eps: float = DEFAULT_EPS) -> Gamma:
    """gamma' = G gamma + (eps, eps, eps), certified sign-valid."""
    ctx = gamma.a.ctx
    if not gamma.sign_valid_horizontal():
        raise ConeSignLoss(f"input cone not horizontal-sign-valid: {gamma}")
    if gamma.has_stable != b.has_stable:
        raise DimensionMismatch("cone and bound matrix signatures differ")
    G = g_matrix(b)
    vec = G.mat_vec(gamma.entries())
    epsI = _as_interval(ctx, eps)
    vec = [v + epsI for v in vec]
    if b.has_stable:
        out = Gamma(vec[0], vec[1], vec[2])
    else:
        out = Gamma(vec[0], None, vec[1])
    if not out.sign_valid_horizontal():
        raise ConeSignLoss(f"propagated cone lost sign validity: {out}")
    return out


def check_final_cone(gamma_n: Gamma, gamma_1: Gamma) -> bool:
    """Terminal cone domination: a1 > a, b1/a1 > b/a, c1/a1 > c/a (strict).

    Comparisons are taken on the conservative interval endpoints, so True
    certifies the strict inequalities for every point selection.
    """
    if gamma_n.has_stable != gamma_1.has_stable:
        raise DimensionMismatch("cone signatures differ")
    if not (gamma_1.a.lo > gamma_n.a.hi):
        return False
    if not (gamma_n.a.strictly_positive() and gamma_1.a.strictly_positive()):
        return False
    if gamma_n.has_stable:
        if not ((gamma_1.b / gamma_1.a).lo > (gamma_n.b / gamma_n.a).hi):
            return False
    return (gamma_1.c / gamma_1.a).lo > (gamma_n.c / gamma_n.a).hi


def check_chart_transition(
    b_trans: BoundMatrix,
    delta,
    rho,
    R,
    r,
    gamma0: Gamma,
    gamma1: Gamma,
    m,
    dom_ok: bool = True,
    image_ok: bool = True,
) -> bool:
    """Chart-transition conditions: the rho-margin and the m-fold domination.

    ``dom_ok``/``image_ok`` stand for the geometric domain/image conditions,
    verified externally and passed as flags.
    """
    ctx = gamma0.a.ctx
    if not (dom_ok and image_ok):
        return False
    mI = _as_interval(ctx, m)
    if not (mI.lo > 1):
        raise DomainViolation("chart transition needs m > 1")
    rhoI = _as_interval(ctx, rho)
    need = (gamma0.a / -gamma0.c).sqrt() * _as_interval(ctx, r) + _as_interval(ctx, delta)
    if not (rhoI.lo > need.hi):
        return False
    Cinv = c_matrix(b_trans).inverse_verified()
    vec = Cinv.mat_vec(gamma1.entries())
    targets = gamma0.entries()
    for tgt, v in zip(targets, vec):
        if not (tgt.lo > (mI * v).hi):
            return False
    return True


class ChSet(object):
    """Box B_u(x, r_u) x B_s(y, r_s) x B_c(theta, r_c) with exit/entry faces.

    Centers and radii are intervals (point intervals for exact data); the
    stable block may be absent.  Faces are implicit: the exit face is the
    x-boundary, the entry face its complement companion.
    """

    def __init__(self, ctx: Context, center, radii, has_stable: bool = True):
        n = 3 if has_stable else 2
        if len(center) != n or len(radii) != n:
            raise DimensionMismatch(f"need {n} center/radius components")
        self.ctx = ctx
        self.center = tuple(_as_interval(ctx, v) for v in center)
        self.radii = tuple(_as_interval(ctx, v) for v in radii)
        self.has_stable = has_stable
        for rad in self.radii:
            if not rad.strictly_positive():
                raise DomainViolation(f"non-positive ch-set radius {rad!r}")

    @classmethod
    def of(cls, ctx: Context, center, radii) -> "ChSet":
        return cls(ctx, center, radii, has_stable=(len(center) == 3))

    def component_interval(self, i: int) -> Interval:
        return self.center[i] + self.radii[i].hull(-self.radii[i])

    def __repr__(self):
        c = ", ".join(repr(v) for v in self.center)
        r = ", ".join(repr(v) for v in self.radii)
        return f"ChSet(center=({c}), radii=({r}))"
