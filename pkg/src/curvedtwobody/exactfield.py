"""Exact arithmetic for the coefficient field Q(i)[kappa, lambda].

The ground field is the Gaussian rationals Q(i); on top of it sits a
quadratic tower generated by two square roots kappa, lambda whose squares
are prescribed Gaussian rationals a, b.  Every scalar is stored by its
coordinates in the basis {1, kappa, lambda, kappa*lambda}, so arithmetic
is exact and reduction by kappa^2 = a, lambda^2 = b is built into the
multiplication table.
"""
from __future__ import annotations

import cmath
from fractions import Fraction
from math import isqrt
from typing import Optional

#: Exact rational numbers.  fractions.Fraction already maintains the
#: invariants we need: lowest terms, positive denominator, big integers.
Rational = Fraction


class ExactFieldError(Exception):
    pass


class DegenerateTower(ExactFieldError):
    """Tower parameters collide (a=0, b=0 or a=b): singular points merge."""


class DivisionByZero(ExactFieldError):
    """Division by zero or by a non-invertible element of a split tower."""


class ContextMismatch(ExactFieldError):
    """Scalars from different towers cannot be combined."""


def _rat(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def rational_sqrt(q: Fraction) -> Optional[Fraction]:
    """Exact nonnegative square root of q, or None if q is not a square."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


class GaussRational:
    """Element re + im*i of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _rat(re)
        self.im = _rat(im)

    def __add__(self, other: GaussRational) -> GaussRational:
        return GaussRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: GaussRational) -> GaussRational:
        return GaussRational(self.re - other.re, self.im - other.im)

    def __neg__(self) -> GaussRational:
        return GaussRational(-self.re, -self.im)

    def __mul__(self, other: GaussRational) -> GaussRational:
        return GaussRational(self.re * other.re - self.im * other.im,
                             self.re * other.im + self.im * other.re)

    def __truediv__(self, other: GaussRational) -> GaussRational:
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise DivisionByZero("division by zero in Q(i)")
        return GaussRational((self.re * other.re + self.im * other.im) / n,
                             (self.im * other.re - self.re * other.im) / n)

    def conjugate(self) -> GaussRational:
        return GaussRational(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, GaussRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def render(self) -> str:
        return f"{self.re.numerator}/{self.re.denominator}" \
               f"{'+' if self.im >= 0 else '-'}{abs(self.im.numerator)}/{self.im.denominator} i"

    def __repr__(self):
        return f"GaussRational({self.re}, {self.im})"


GAUSS_ZERO = GaussRational(0, 0)
GAUSS_ONE = GaussRational(1, 0)


def gauss_sqrt(g: GaussRational) -> Optional[GaussRational]:
    """A Gaussian-rational square root of g, or None if none exists.

    Of the two roots the one with re > 0 (or re = 0, im >= 0) is returned,
    which matches the principal complex square root.
    """
    if g.is_zero():
        return GAUSS_ZERO
    if g.im == 0:
        r = rational_sqrt(g.re)
        if r is not None:
            return GaussRational(r, 0)
        r = rational_sqrt(-g.re)
        if r is not None:
            return GaussRational(0, r)
        return None
    t = rational_sqrt(g.re * g.re + g.im * g.im)
    if t is None:
        return None
    u2 = (g.re + t) / 2
    u = rational_sqrt(u2)
    if u is None or u == 0:
        return None
    v = g.im / (2 * u)
    root = GaussRational(u, v)
    # u = sqrt((re+t)/2) > 0 already picks the principal branch
    return root


class TowerContext:
    """The tower Q(i)[kappa, lambda] with kappa^2 = a, lambda^2 = b."""

    __slots__ = ("a", "b")

    def __init__(self, a: GaussRational, b: GaussRational):
        if a.is_zero() or b.is_zero() or a == b:
            raise DegenerateTower(
                f"tower needs a, b nonzero and distinct, got a={a!r} b={b!r}")
        self.a = a
        self.b = b

    def __eq__(self, other) -> bool:
        if not isinstance(other, TowerContext):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"TowerContext(a={self.a!r}, b={self.b!r})"

    # -- constructors -------------------------------------------------

    def scalar(self, c00, c10=GAUSS_ZERO, c01=GAUSS_ZERO, c11=GAUSS_ZERO) -> TowerScalar:
        if not isinstance(c00, GaussRational):
            c00 = GaussRational(_rat(c00))
        return TowerScalar(self, c00, c10, c01, c11)

    def from_rational(self, q) -> TowerScalar:
        return self.scalar(GaussRational(_rat(q)))

    def from_gauss(self, g: GaussRational) -> TowerScalar:
        return self.scalar(g)

    @property
    def zero(self) -> TowerScalar:
        return self.scalar(GAUSS_ZERO)

    @property
    def one(self) -> TowerScalar:
        return self.scalar(GAUSS_ONE)

    @property
    def kappa(self) -> TowerScalar:
        return TowerScalar(self, GAUSS_ZERO, GAUSS_ONE, GAUSS_ZERO, GAUSS_ZERO)

    @property
    def lam(self) -> TowerScalar:
        return TowerScalar(self, GAUSS_ZERO, GAUSS_ZERO, GAUSS_ONE, GAUSS_ZERO)

    def sqrt_a(self) -> TowerScalar:
        """kappa as a value: the collapsed Gaussian root of a when a is a
        perfect square in Q(i), otherwise the tower generator."""
        s = gauss_sqrt(self.a)
        if s is not None:
            return self.from_gauss(s)
        return self.kappa

    def sqrt_b(self) -> TowerScalar:
        """lambda as a value; collapses to a Gaussian scalar or to a
        Gaussian multiple of kappa whenever possible (keeps coefficient
        arithmetic inside an honest field)."""
        s = gauss_sqrt(self.b)
        if s is not None:
            return self.from_gauss(s)
        if gauss_sqrt(self.a) is None:
            y = gauss_sqrt(self.b / self.a)
            if y is not None:
                return TowerScalar(self, GAUSS_ZERO, y, GAUSS_ZERO, GAUSS_ZERO)
        return self.lam


def make_context(a: GaussRational, b: GaussRational) -> TowerContext:
    """Validated tower context; rejects colliding singular-point data."""
    return TowerContext(a, b)


class TowerScalar:
    """Element c00 + c10*kappa + c01*lambda + c11*kappa*lambda."""

    __slots__ = ("ctx", "c00", "c10", "c01", "c11")

    def __init__(self, ctx: TowerContext, c00: GaussRational, c10: GaussRational,
                 c01: GaussRational, c11: GaussRational):
        self.ctx = ctx
        self.c00 = c00
        self.c10 = c10
        self.c01 = c01
        self.c11 = c11

    # -- helpers ------------------------------------------------------

    def _check(self, other: TowerScalar):
        if self.ctx != other.ctx:
            raise ContextMismatch("scalars from different tower contexts")

    def is_zero(self) -> bool:
        return (self.c00.is_zero() and self.c10.is_zero()
                and self.c01.is_zero() and self.c11.is_zero())

    def is_gaussian(self) -> bool:
        return self.c10.is_zero() and self.c01.is_zero() and self.c11.is_zero()

    def coords(self):
        return (self.c00, self.c10, self.c01, self.c11)

    # -- ring operations ----------------------------------------------

    def __add__(self, other: TowerScalar) -> TowerScalar:
        self._check(other)
        return TowerScalar(self.ctx, self.c00 + other.c00, self.c10 + other.c10,
                           self.c01 + other.c01, self.c11 + other.c11)

    def __sub__(self, other: TowerScalar) -> TowerScalar:
        self._check(other)
        return TowerScalar(self.ctx, self.c00 - other.c00, self.c10 - other.c10,
                           self.c01 - other.c01, self.c11 - other.c11)

    def __neg__(self) -> TowerScalar:
        return TowerScalar(self.ctx, -self.c00, -self.c10, -self.c01, -self.c11)

    def __mul__(self, other: TowerScalar) -> TowerScalar:
        self._check(other)
        x0, x1, x2, x3 = self.coords()
        y0, y1, y2, y3 = other.coords()
        # most pipeline scalars are plain Gaussians; skip the full table then
        if self.is_gaussian():
            if other.is_gaussian():
                return TowerScalar(self.ctx, x0 * y0, GAUSS_ZERO, GAUSS_ZERO, GAUSS_ZERO)
            return TowerScalar(self.ctx, x0 * y0, x0 * y1, x0 * y2, x0 * y3)
        if other.is_gaussian():
            return TowerScalar(self.ctx, x0 * y0, x1 * y0, x2 * y0, x3 * y0)
        a, b = self.ctx.a, self.ctx.b
        ab = a * b
        z0 = x0 * y0 + a * (x1 * y1) + b * (x2 * y2) + ab * (x3 * y3)
        z1 = x0 * y1 + x1 * y0 + b * (x2 * y3 + x3 * y2)
        z2 = x0 * y2 + x2 * y0 + a * (x1 * y3 + x3 * y1)
        z3 = x0 * y3 + x3 * y0 + x1 * y2 + x2 * y1
        return TowerScalar(self.ctx, z0, z1, z2, z3)

    def inverse(self) -> TowerScalar:
        if self.is_zero():
            raise DivisionByZero("inverse of zero")
        if self.is_gaussian():
            return TowerScalar(self.ctx, GAUSS_ONE / self.c00,
                               GAUSS_ZERO, GAUSS_ZERO, GAUSS_ZERO)
        # solve M y = e0 for the multiplication matrix M of self
        a, b = self.ctx.a, self.ctx.b
        ab = a * b
        x0, x1, x2, x3 = self.coords()
        m = [[x0, a * x1, b * x2, ab * x3],
             [x1, x0, b * x3, b * x2],
             [x2, a * x3, x0, a * x1],
             [x3, x2, x1, x0]]
        rhs = [GAUSS_ONE, GAUSS_ZERO, GAUSS_ZERO, GAUSS_ZERO]
        n = 4
        for col in range(n):
            piv = None
            for row in range(col, n):
                if not m[row][col].is_zero():
                    piv = row
                    break
            if piv is None:
                raise DivisionByZero("non-invertible element (split tower zero divisor)")
            m[col], m[piv] = m[piv], m[col]
            rhs[col], rhs[piv] = rhs[piv], rhs[col]
            inv = GAUSS_ONE / m[col][col]
            m[col] = [v * inv for v in m[col]]
            rhs[col] = rhs[col] * inv
            for row in range(n):
                if row != col and not m[row][col].is_zero():
                    f = m[row][col]
                    m[row] = [v - f * w for v, w in zip(m[row], m[col])]
                    rhs[row] = rhs[row] - f * rhs[col]
        return TowerScalar(self.ctx, rhs[0], rhs[1], rhs[2], rhs[3])

    def __truediv__(self, other: TowerScalar) -> TowerScalar:
        self._check(other)
        return self * other.inverse()

    def __eq__(self, other) -> bool:
        if not isinstance(other, TowerScalar):
            return NotImplemented
        return (self.ctx == other.ctx and self.c00 == other.c00
                and self.c10 == other.c10 and self.c01 == other.c01
                and self.c11 == other.c11)

    def __hash__(self):
        return hash((self.c00, self.c10, self.c01, self.c11))

    # -- predicates and embeddings --------------------------------------

    def is_real_rational(self) -> Optional[Fraction]:
        """The rational value of this scalar, if it visibly is one."""
        if self.is_gaussian() and self.c00.im == 0:
            return self.c00.re
        return None

    def is_gauss_value(self) -> Optional[GaussRational]:
        return self.c00 if self.is_gaussian() else None

    def embed_complex(self, branch=(1, 1)) -> complex:
        """Double-precision value with kappa = branch[0]*sqrt(a) etc."""
        sk = branch[0] * cmath.sqrt(self.ctx.a.to_complex())
        sl = branch[1] * cmath.sqrt(self.ctx.b.to_complex())
        return (self.c00.to_complex() + self.c10.to_complex() * sk
                + self.c01.to_complex() * sl + self.c11.to_complex() * sk * sl)

    def render(self) -> str:
        return (f"({self.c00.render()}) + ({self.c10.render()})κ"
                f" + ({self.c01.render()})λ + ({self.c11.render()})κλ")

    def __repr__(self):
        return f"TowerScalar[{self.render()}]"
