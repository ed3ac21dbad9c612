"""Second-order linear ODE infrastructure.

Reduction of the 2x2 first-order systems to a single second-order
equation, gauge transform to the normal form y'' = r y, singular-point
and exponent analysis for Fuchsian equations, and the second symmetric
power residual used by the product-of-solutions test.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .exactfield import TowerContext, TowerScalar, rational_sqrt
from .ratcalc import BadFactorization, Poly, RatFunc


class LinOdeError(Exception):
    pass


class ZeroCoefficient(LinOdeError):
    """The elimination needs C (and the weight) to be nonzero."""


class NonFuchsianEquation(LinOdeError):
    """A singular point of the input fails the regularity bound."""


@dataclass(frozen=True)
class FirstOrderSystem:
    """p1' = A p1 + B w p2,  p2' = C w p1 - A p2, with w = 1 or sqrt(weight)."""

    A: RatFunc
    B: RatFunc
    C: RatFunc
    weight: Optional[RatFunc] = None


@dataclass(frozen=True)
class SecondOrderODE:
    """w'' + p w' + q w = 0."""

    p: RatFunc
    q: RatFunc


@dataclass(frozen=True)
class NormalFormODE:
    """y'' = r y."""

    r: RatFunc


def reduce_to_second_order(system: FirstOrderSystem) -> SecondOrderODE:
    """Eliminate p1; the p2 equation is w'' + p w' + q w = 0 with
    p = -(C'/C [+ f'/(2f)]) and q = -((C'/C [+ f'/(2f)]) A + A^2 + C B [f] - A')."""
    A, B, C = system.A, system.B, system.C
    if C.is_zero():
        raise ZeroCoefficient("C must be nonzero to eliminate p1")
    ctx = A.ctx
    g = C.derivative() / C
    weight_factor = RatFunc.constant(ctx, 1)
    if system.weight is not None:
        f = system.weight
        if f.is_zero():
            raise ZeroCoefficient("weight must be nonzero")
        g = g + f.derivative() / (f * RatFunc.constant(ctx, 2))
        weight_factor = f
    q = g * A + A * A + C * B * weight_factor - A.derivative()
    return SecondOrderODE(p=-g, q=-q)


def to_normal_form(ode: SecondOrderODE) -> NormalFormODE:
    """Gauge w = exp(-1/2 int p) y gives y'' = r y with r = -q + p'/2 + p^2/4."""
    ctx = ode.p.ctx
    half = RatFunc.constant(ctx, Fraction(1, 2))
    quarter = RatFunc.constant(ctx, Fraction(1, 4))
    r = -ode.q + half * ode.p.derivative() + quarter * ode.p * ode.p
    return NormalFormODE(r=r)


def verify_gauge_transform(normal: NormalFormODE, ode: SecondOrderODE,
                           log_derivative: RatFunc) -> bool:
    """Check that u = g y with g'/g = h solves the original equation whenever
    y'' = r y: substituting gives g[(r + h' + h^2 + p h + q) y + (2h + p) y'],
    which must vanish coefficientwise."""
    h = log_derivative
    p, q, r = ode.p, ode.q, normal.r
    ctx = p.ctx
    two = RatFunc.constant(ctx, 2)
    coeff_yprime = two * h + p
    coeff_y = r + h.derivative() + h * h + p * h + q
    return coeff_yprime.is_zero() and coeff_y.is_zero()


AT_INFINITY = None  # location sentinel in SingularPoint


@dataclass(frozen=True)
class SingularPoint:
    location: Optional[TowerScalar]   # None encodes the point at infinity
    order: int
    alpha: TowerScalar
    delta_squared: TowerScalar
    delta_rational: Optional[Fraction]
    exponents: Optional[tuple[Fraction, Fraction]]

    @property
    def is_infinity(self) -> bool:
        return self.location is None


@dataclass(frozen=True)
class SingularitySpectrum:
    points: tuple[SingularPoint, ...]

    @property
    def finite_points(self) -> tuple[SingularPoint, ...]:
        return tuple(pt for pt in self.points if not pt.is_infinity)

    @property
    def infinity(self) -> SingularPoint:
        for pt in self.points:
            if pt.is_infinity:
                return pt
        raise LinOdeError("spectrum lacks the point at infinity")

    def all_deltas_rational(self) -> bool:
        return all(pt.delta_rational is not None for pt in self.points)

    def render_table(self) -> str:
        lines = ["location | order | alpha | delta^2 | exponents"]
        for pt in self.points:
            loc = "infinity" if pt.is_infinity else pt.location.render()
            if pt.exponents is not None:
                expo = f"{pt.exponents[0]}, {pt.exponents[1]}"
            else:
                expo = "(1 +/- sqrt(delta^2))/2" if not pt.is_infinity \
                    else "(-1 +/- sqrt(delta^2))/2"
            lines.append(f"{loc} | {pt.order} | {pt.alpha.render()} | "
                         f"{pt.delta_squared.render()} | {expo}")
        return "\n".join(lines)


def _delta_data(ctx: TowerContext, alpha: TowerScalar):
    """delta^2 = 1 + 4 alpha, with its rational square root when that exists."""
    delta_sq = ctx.one + ctx.from_rational(4) * alpha
    d_rat = None
    q = delta_sq.is_real_rational()
    if q is not None:
        d_rat = rational_sqrt(q)
    return delta_sq, d_rat


def singularity_spectrum(normal: NormalFormODE,
                         poles: Sequence[tuple[TowerScalar, int]]) -> SingularitySpectrum:
    """Per-point order, alpha (the (z-c)^-2 coefficient), delta data and
    exponent pairs, including the point at infinity in the 1/z chart."""
    r = normal.r
    ctx = r.ctx
    if not r.is_zero() and Poly.from_roots(ctx, poles) != r.den:
        raise BadFactorization("supplied poles do not factor den(r)")
    if r.is_zero() and any(m > 0 for _, m in poles):
        raise BadFactorization("zero r has no poles")
    points = []
    for c, mult in poles:
        if mult > 2:
            raise NonFuchsianEquation(
                f"pole of order {mult} at {c.render()}: not regular singular")
        if mult == 2:
            lin2 = Poly.from_roots(ctx, [(c, 2)])
            alpha = RatFunc(r.num * lin2, r.den).evaluate(c)
        else:
            alpha = ctx.zero
        delta_sq, d_rat = _delta_data(ctx, alpha)
        expo = None
        if d_rat is not None:
            expo = ((1 + d_rat) / 2, (1 - d_rat) / 2)
        points.append(SingularPoint(c, mult, alpha, delta_sq, d_rat, expo))
    # infinity in the zeta = 1/z chart: ord = max(0, 4 + deg s - deg t),
    # alpha_inf is the 1/z^2 coefficient, indicial rho(rho+1) = alpha_inf
    ds = r.num.degree()
    dt = r.den.degree()
    if r.is_zero():
        ord_inf = 0
        alpha_inf = ctx.zero
    else:
        ord_inf = max(0, 4 + ds - dt)
        if ord_inf > 2:
            raise NonFuchsianEquation(f"order {ord_inf} at infinity: not regular singular")
        alpha_inf = r.num.leading() if dt - ds == 2 else ctx.zero
    delta_sq, d_rat = _delta_data(ctx, alpha_inf)
    expo = None
    if d_rat is not None:
        expo = ((-1 + d_rat) / 2, (-1 - d_rat) / 2)
    points.append(SingularPoint(AT_INFINITY, ord_inf, alpha_inf, delta_sq, d_rat, expo))
    return SingularitySpectrum(tuple(points))


def symmetric_power_residual(normal: NormalFormODE, v: RatFunc) -> RatFunc:
    """v''' - 4 r v' - 2 r' v; identically zero iff v solves the second
    symmetric power of y'' = r y."""
    r = normal.r
    ctx = r.ctx
    four = RatFunc.constant(ctx, 4)
    two = RatFunc.constant(ctx, 2)
    vp = v.derivative()
    vppp = vp.derivative().derivative()
    return vppp - four * r * vp - two * r.derivative() * v
