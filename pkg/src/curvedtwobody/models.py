"""Model layer: the four (space x potential) reductions and their data.

Builds the first-order variational systems in the z variable, transcribes
the closed-form coefficient tables for r(z), locates singular points in
closed form, checks the reality-condition lemmas, produces the mu = 1
reference solutions, and exposes numeric Hamiltonian evaluators for the
dynamics side.

Mass-ratio dictionary: deriving the simplified Hamiltonians rescales time
by m1 R^2, which makes the kinetic prefactor 1/(2 mu) with
mu = m/m1 = m2/(m1+m2); mu = 1 is the m2 -> infinity limit whose extra
integral is p1 sin(theta) + p2 cos(theta).  Here mu is simply a free
rational parameter and the boundary interpretation stays commentary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

from .exactfield import (DegenerateTower, GaussRational, TowerContext,
                         TowerScalar, make_context)
from .linode import FirstOrderSystem
from .ratcalc import Poly, RatFunc, assemble_over_poles


class Space(Enum):
    SPHERE = "sphere"
    HYPERBOLIC = "hyperbolic"


class Potential(Enum):
    NEWTON = "newton"
    OSCILLATOR = "oscillator"


class ModelError(Exception):
    pass


class DegenerateParameters(ModelError):
    """A closed-form guard failed; carries the violated guard's name."""

    def __init__(self, guard: str):
        super().__init__(guard)
        self.guard = guard


class HypothesisViolated(ModelError):
    """A lemma hypothesis fails for the supplied parameters."""

    def __init__(self, failures: list[str]):
        super().__init__("; ".join(failures))
        self.failures = failures


class NotMu1(ModelError):
    pass


class DomainError(ModelError):
    """Coordinate singularity (theta at 0 or pi, or nonpositive theta)."""


@dataclass(frozen=True)
class ModelParams:
    space: Space
    potential: Potential
    strength: Fraction          # alpha for Newton, beta for the oscillator
    mu: Fraction
    p: Fraction
    eps: Fraction
    kappa2: GaussRational
    lambda2: GaussRational
    z0: Fraction
    ctx: TowerContext

    @property
    def gamma_data(self) -> Fraction:
        """Coadjoint orbit level of the geodesic solutions: gamma^2 = p^2 on
        the sphere, gamma = p^2 on the hyperbolic plane."""
        return self.p * self.p

    def z0_scalar(self) -> TowerScalar:
        return self.ctx.from_rational(self.z0)

    def kappa_value(self) -> TowerScalar:
        return self.ctx.sqrt_a()

    def lambda_value(self) -> TowerScalar:
        return self.ctx.sqrt_b()


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"parameters must be exact rationals, got {x!r}")


def derive_params(space: Space, potential: Potential, strength, mu, p, eps) -> ModelParams:
    """Validated parameter set with the derived kappa^2, lambda^2, z0.

    mu = 1 is allowed (the degenerate-but-integrable certification path);
    mu = 0 is not.
    """
    strength, mu, p, eps = map(_frac, (strength, mu, p, eps))
    if strength <= 0:
        raise DegenerateParameters("strength must be positive")
    if p == 0:
        raise DegenerateParameters("p must be nonzero")
    if mu == 0:
        raise DegenerateParameters("mu must be nonzero")
    i = GaussRational(0, 1)
    if potential is Potential.NEWTON:
        if space is Space.SPHERE:
            kappa2 = GaussRational(2 * mu * eps / strength, 2 * mu / strength)
            lambda2 = GaussRational(2 * mu * eps / strength, -2 * mu / strength)
        else:
            kappa2 = GaussRational(2 * mu * (eps + 1) / strength)
            lambda2 = GaussRational(2 * mu * (eps - 1) / strength)
    else:
        if space is Space.SPHERE:
            kappa2 = GaussRational(mu * (2 * eps + 1) / strength)
        else:
            kappa2 = GaussRational(mu * (2 * eps - 1) / strength)
        lambda2 = GaussRational(2 * mu * eps / strength)
    z0 = mu * p / strength
    try:
        ctx = make_context(kappa2, lambda2)
    except DegenerateTower as exc:
        raise DegenerateParameters(f"singular points collide: {exc}") from exc
    z0g = GaussRational(z0)
    if (z0g * z0g - kappa2).is_zero() or (z0g * z0g - lambda2).is_zero():
        raise DegenerateParameters("z0 collides with +-kappa or +-lambda")
    if potential is Potential.OSCILLATOR:
        d = kappa2 - lambda2
        pg = GaussRational(p)
        if ((d * pg) * (d * pg) - lambda2).is_zero():
            raise DegenerateParameters(
                "beta_0/beta_3/beta_4 denominators vanish: ((kappa^2-lambda^2) p)^2 = lambda^2")
    else:
        # the two closed forms of z0 must agree: mu p / alpha and
        # p (kappa^2 - lambda^2)/(4 i) (sphere) resp. /4 (hyperbolic)
        d = kappa2 - lambda2
        pg = GaussRational(p)
        alt = pg * d / GaussRational(0, 4) if space is Space.SPHERE \
            else pg * d / GaussRational(4)
        assert alt == z0g, "internal: the two z0 closed forms disagree"
    return ModelParams(space, potential, strength, mu, p, eps,
                       kappa2, lambda2, z0, ctx)


# ---------------------------------------------------------------------------
# first-order systems in the z variable
# ---------------------------------------------------------------------------


def build_system(params: ModelParams) -> FirstOrderSystem:
    """A, B, C (and the oscillator weight f) as exact rational functions."""
    ctx = params.ctx
    s, mu, p = params.strength, params.mu, params.p
    z = RatFunc.x(ctx)

    def const(q) -> RatFunc:
        return RatFunc.constant(ctx, q)

    if params.potential is Potential.NEWTON:
        f = RatFunc.from_poly(Poly.from_rationals(ctx, [-params.eps, 0, s / (2 * mu)]))
        lin = const(s) * z + const((2 - mu) * p)
        c_num = const(s) * z - const(mu * p)
        if params.space is Space.SPHERE:
            den = f * f + const(1)
            a = const(p) * f / den
            b = const(p / mu) - lin / den
        else:
            den = f * f - const(1)
            a = const(p) * f / den
            b = const(p / mu) + lin / den
        return FirstOrderSystem(A=a, B=b, C=c_num / den, weight=None)

    f = RatFunc.from_poly(Poly.from_rationals(ctx, [2 * params.eps, 0, -s / mu]))
    lin = const(s) * z + const((2 - mu) * p)
    c_num = const(s) * z - const(mu * p)
    if params.space is Space.SPHERE:
        den = f * (f + const(1))
        b = const(p / mu) / (f * f) - lin / den
    else:
        den = f * (const(1) - f)
        b = const(p / mu) / (f * f) + lin / den
    a = const(p) / den
    return FirstOrderSystem(A=a, B=b, C=c_num / den, weight=f)


def gamma_curve_identity(params: ModelParams) -> bool:
    """Exact factorization of the Gamma-trajectory denominator over the
    singular points: sphere-Newton f^2+1 = -4(z^2-k^2)(z^2-l^2)/(k^2-l^2)^2,
    hyperbolic-Newton f^2-1 = 4(z^2-k^2)(z^2-l^2)/(k^2-l^2)^2, and the
    oscillator f, f+-1 factoring over +-lambda, +-kappa."""
    ctx = params.ctx
    k2 = ctx.from_gauss(params.kappa2)
    l2 = ctx.from_gauss(params.lambda2)
    z = RatFunc.x(ctx)
    zk = z * z - RatFunc(Poly.constant(ctx, k2))
    zl = z * z - RatFunc(Poly.constant(ctx, l2))
    d = RatFunc(Poly.constant(ctx, k2 - l2))
    if params.potential is Potential.NEWTON:
        fpoly = RatFunc.from_poly(Poly.from_rationals(
            ctx, [-params.eps, 0, params.strength / (2 * params.mu)]))
        if params.space is Space.SPHERE:
            lhs = fpoly * fpoly + RatFunc.constant(ctx, 1)
            rhs = RatFunc.constant(ctx, -4) * zl * zk / (d * d)
        else:
            # f-1 = 2(z^2-kappa^2)/d, f+1 = 2(z^2-lambda^2)/d
            lhs = fpoly * fpoly - RatFunc.constant(ctx, 1)
            rhs = RatFunc.constant(ctx, 4) * zl * zk / (d * d)
        return lhs == rhs
    fpoly = RatFunc.from_poly(Poly.from_rationals(
        ctx, [2 * params.eps, 0, -params.strength / params.mu]))
    if params.space is Space.SPHERE:
        checks = [(fpoly, -(zl / d)),
                  (fpoly + RatFunc.constant(ctx, 1), -(zk / d))]
    else:
        checks = [(fpoly, zl / d),
                  (RatFunc.constant(ctx, 1) - fpoly, -(zk / d))]
    return all(lhs == rhs for lhs, rhs in checks)


# ---------------------------------------------------------------------------
# closed-form coefficient tables for r(z)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientTable:
    """alpha_j, beta_j at the poles [z0, +kappa, -kappa, +lambda, -lambda]."""

    poles: tuple[TowerScalar, ...]
    alphas: tuple[TowerScalar, ...]
    betas: tuple[TowerScalar, ...]

    def reconstruct(self, ctx: TowerContext) -> RatFunc:
        pole_list = [(c, 2) for c in self.poles]
        coeffs = {}
        for j in range(5):
            if not self.alphas[j].is_zero():
                coeffs[(j, 2)] = self.alphas[j]
            if not self.betas[j].is_zero():
                coeffs[(j, 1)] = self.betas[j]
        raw = assemble_over_poles(ctx, pole_list, coeffs)
        return raw


def closed_form_r(params: ModelParams) -> CoefficientTable:
    """The closed-form alpha_j/beta_j coefficient tables in tower
    arithmetic, transcribed term by term."""
    ctx = params.ctx
    mu, p = params.mu, params.p
    c = ctx.from_rational
    k = params.kappa_value()
    lam = params.lambda_value()
    k2 = ctx.from_gauss(params.kappa2)
    l2 = ctx.from_gauss(params.lambda2)
    z0s = params.z0_scalar()
    d = k2 - l2

    if params.potential is Potential.NEWTON:
        if params.space is Space.SPHERE:
            fi = ctx.from_gauss(GaussRational(0, 4))      # 4i
            a1 = (c(Fraction(1 - mu, 64)) / k2) \
                * (c(p * (mu - 1)) * (l2 - k2) + fi * k * c(mu + 1)) \
                * (c(p) * (l2 - k2) + fi * k)
            a2 = (c(Fraction(1 - mu, 64)) / k2) \
                * (c(p * (mu - 1)) * (l2 - k2) - fi * k * c(mu + 1)) \
                * (c(p) * (l2 - k2) - fi * k)
            a3 = (c(Fraction(1 - mu, 64)) / l2) \
                * (c(p * (mu - 1)) * d - fi * lam * c(mu + 1)) \
                * (c(p) * d - fi * lam)
            a4 = (c(Fraction(1 - mu, 64)) / l2) \
                * (c(p * (mu - 1)) * d + fi * lam * c(mu + 1)) \
                * (c(p) * d + fi * lam)
            ti = ctx.from_gauss(GaussRational(0, 32))     # 32i
            k3 = k2 * k
            l3 = l2 * lam
            pref_k = c(mu - 1) / (c(64) * d * k3)
            pref_l = c(mu - 1) / (c(64) * d * l3)
            b1 = pref_k * (c((mu - 1) * p * p) * (c(5) * k2 - l2) * d * d
                           - ti * c(mu * p) * d * k3
                           - c(16 * (mu + 1)) * k2 * (c(3) * k2 + l2))
            b2 = pref_k * (c((1 - mu) * p * p) * (c(5) * k2 - l2) * d * d
                           - ti * c(mu * p) * d * k3
                           + c(16 * (mu + 1)) * k2 * (c(3) * k2 + l2))
            b3 = pref_l * (c((1 - mu) * p * p) * (c(5) * l2 - k2) * d * d
                           + ti * c(mu * p) * d * l3
                           + c(16 * (mu + 1)) * l2 * (c(3) * l2 + k2))
            b4 = pref_l * (c((mu - 1) * p * p) * (c(5) * l2 - k2) * d * d
                           + ti * c(mu * p) * d * l3
                           - c(16 * (mu + 1)) * l2 * (c(3) * l2 + k2))
        else:
            four = c(4)
            a1 = (c(Fraction(mu - 1, 64)) / k2) \
                * (c(p * (mu - 1)) * d - four * k * c(mu + 1)) \
                * (c(p) * d - four * k)
            a2 = (c(Fraction(mu - 1, 64)) / k2) \
                * (c(p * (mu - 1)) * d + four * k * c(mu + 1)) \
                * (c(p) * d + four * k)
            a3 = (c(Fraction(mu - 1, 64)) / l2) \
                * (c(p * (mu - 1)) * d - four * lam * c(mu + 1)) \
                * (c(p) * d - four * lam)
            a4 = (c(Fraction(mu - 1, 64)) / l2) \
                * (c(p * (mu - 1)) * d + four * lam * c(mu + 1)) \
                * (c(p) * d + four * lam)
            k3 = k2 * k
            l3 = l2 * lam
            pref_k = c(mu - 1) / (c(64) * d * k3)
            pref_l = c(mu - 1) / (c(64) * d * l3)
            b1 = pref_k * (c((mu - 1) * p * p) * (l2 - c(5) * k2) * d * d
                           + c(32 * mu * p) * d * k3
                           - c(16 * (mu + 1)) * k2 * (c(3) * k2 + l2))
            b2 = pref_k * (c((mu - 1) * p * p) * (c(5) * k2 - l2) * d * d
                           + c(32 * mu * p) * d * k3
                           + c(16 * (mu + 1)) * k2 * (c(3) * k2 + l2))
            b3 = pref_l * (c((mu - 1) * p * p) * (c(5) * l2 - k2) * d * d
                           - c(32 * mu * p) * d * l3
                           + c(16 * (mu + 1)) * l2 * (c(3) * l2 + k2))
            b4 = pref_l * (c((mu - 1) * p * p) * (k2 - c(5) * l2) * d * d
                           - c(32 * mu * p) * d * l3
                           - c(16 * (mu + 1)) * l2 * (c(3) * l2 + k2))
        poles = (z0s, k, -k, lam, -lam)
        alphas = (c(Fraction(3, 4)), a1, a2, a3, a4)
        betas = (ctx.zero, b1, b2, b3, b4)
        return CoefficientTable(poles, alphas, betas)

    # oscillator tables
    a0 = c(Fraction(3, 4))
    a34 = c(Fraction(-3, 16))
    two = c(2)
    if params.space is Space.SPHERE:
        b0 = c(3 * p) * (l2 - k2) / (two * ((l2 - k2) * (l2 - k2) * c(p * p) - l2))
        a1 = (c(Fraction(mu - 1, 4)) / k2) \
            * (c(p * (mu - 1)) * d - k * c(mu + 1)) * (c(p) * d - k)
        a2 = (c(Fraction(mu - 1, 4)) / k2) \
            * (c(p * (mu - 1)) * d + k * c(mu + 1)) * (c(p) * d + k)
        k3 = k2 * k
        pref_k = c(mu - 1) / (c(4) * d * k3)
        b1 = pref_k * (c((mu - 1) * p * p) * (l2 - c(3) * k2) * d * d
                       + c(4 * mu * p) * d * k3
                       - c(mu + 1) * k2 * (k2 + l2))
        b2 = pref_k * (c((mu - 1) * p * p) * (c(3) * k2 - l2) * d * d
                       + c(4 * mu * p) * d * k3
                       + c(mu + 1) * k2 * (k2 + l2))
        common = c(8 * (mu - 1) ** 2 * p ** 3) * d * d * d \
            - c(8 * (3 * mu - 1) * (mu - 1) * p * p) * lam * d * d \
            + lam * (c(5 - 8 * mu * mu) * l2 + c(3) * k2)
        moment = d * (c(9) * k2 + c(24 * mu * mu - 16 * mu - 17) * l2) * c(p)
        b3 = (common + moment) / (c(16) * lam * d * (d * c(p) - lam))
        b4 = (-(c(8 * (mu - 1) ** 2 * p ** 3) * d * d * d)
              - c(8 * (3 * mu - 1) * (mu - 1) * p * p) * lam * d * d
              + lam * (c(5 - 8 * mu * mu) * l2 + c(3) * k2)
              - moment) / (c(16) * lam * d * (d * c(p) + lam))
    else:
        b0 = c(3 * p) * (k2 - l2) / (two * ((l2 - k2) * (l2 - k2) * c(p * p) - l2))
        a1 = (c(Fraction(mu - 1, 4)) / k2) \
            * (c(p * (mu - 1)) * d + k * c(mu + 1)) * (c(p) * d + k)
        a2 = (c(Fraction(mu - 1, 4)) / k2) \
            * (c(p * (mu - 1)) * d - k * c(mu + 1)) * (c(p) * d - k)
        k3 = k2 * k
        pref_k = c(mu - 1) / (c(4) * d * k3)
        b1 = pref_k * (c((mu - 1) * p * p) * (l2 - c(3) * k2) * d * d
                       - c(4 * mu * p) * d * k3
                       - c(mu + 1) * k2 * (k2 + l2))
        b2 = pref_k * (c((mu - 1) * p * p) * (c(3) * k2 - l2) * d * d
                       - c(4 * mu * p) * d * k3
                       + c(mu + 1) * k2 * (k2 + l2))
        common = c(8 * (mu - 1) ** 2 * p ** 3) * d * d * d \
            + c(8 * (3 * mu - 1) * (mu - 1) * p * p) * lam * d * d \
            + lam * (c(8 * mu * mu - 5) * l2 - c(3) * k2)
        moment = d * (c(9) * k2 + c(24 * mu * mu - 16 * mu - 17) * l2) * c(p)
        b3 = (common + moment) / (c(16) * lam * d * (d * c(p) + lam))
        b4 = (-(c(8 * (mu - 1) ** 2 * p ** 3) * d * d * d)
              + c(8 * (3 * mu - 1) * (mu - 1) * p * p) * lam * d * d
              + lam * (c(8 * mu * mu - 5) * l2 - c(3) * k2)
              - moment) / (c(16) * lam * d * (d * c(p) - lam))
    poles = (z0s, k, -k, lam, -lam)
    alphas = (a0, a1, a2, a34, a34)
    betas = (b0, b1, b2, b3, b4)
    return CoefficientTable(poles, alphas, betas)


def candidate_poles(params: ModelParams) -> list[TowerScalar]:
    """All closed-form singular-point locations (z0, +-kappa, +-lambda)."""
    k = params.kappa_value()
    lam = params.lambda_value()
    return [params.z0_scalar(), k, -k, lam, -lam]


def detect_poles(params: ModelParams, r: RatFunc) -> list[tuple[TowerScalar, int]]:
    """Exact multiplicities of the closed-form pole candidates in den(r).

    At mu = 1 most candidates cancel; callers always get the true
    factorization.  Raises if the candidates do not exhaust den(r).
    """
    ctx = params.ctx
    out = []
    total = 0
    for cpole in candidate_poles(params):
        m = r.den.root_multiplicity(cpole)
        if m:
            out.append((cpole, m))
            total += m
    if total != r.den.degree():
        raise DegenerateParameters("den(r) has factors outside the closed-form poles")
    if Poly.from_roots(ctx, out) != r.den:
        raise DegenerateParameters("closed-form poles do not factor den(r)")
    return out


def mu1_solutions(params: ModelParams) -> tuple[RatFunc, RatFunc]:
    """Logarithmic derivatives of the two explicit solutions at mu = 1."""
    if params.mu != 1:
        raise NotMu1(f"mu = {params.mu}, expected 1")
    ctx = params.ctx
    z0 = params.z0
    z = RatFunc.x(ctx)

    def const(q):
        return RatFunc.constant(ctx, q)

    pole0 = z - const(z0)
    if params.potential is Potential.NEWTON:
        omega1 = const(Fraction(3, 2)) / pole0
        omega2 = const(Fraction(-1, 2)) / pole0
        return omega1, omega2
    l2 = ctx.from_gauss(params.lambda2)
    zl = z * z - RatFunc(Poly.constant(ctx, l2))
    omega1 = const(Fraction(3, 2)) * z / zl - const(Fraction(1, 2)) / pole0
    # y2 = (z^2-l^2)^{1/4} (z0 z - l^2) (z-z0)^{-1/2}
    lin = RatFunc(Poly(ctx, [-l2, ctx.from_rational(z0)]))
    omega2 = z / (const(2) * zl) + lin.derivative() / lin - const(Fraction(1, 2)) / pole0
    return omega1, omega2


# ---------------------------------------------------------------------------
# lemma hypothesis checks (reality of the alpha_j)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaReality:
    index: int
    exact: bool                       # decided in exact arithmetic
    imag_part: Optional[Fraction]     # exact imaginary part when available
    imag_float: float                 # branch (+,+) numeric imaginary part
    nonreal: bool


@dataclass(frozen=True)
class LemmaReport:
    lemma: int                        # 1 spherical Newton, 2 hyperbolic Newton, 3 oscillator
    hypotheses_hold: bool
    failures: tuple[str, ...]
    alphas: tuple[AlphaReality, ...]
    identity_checked: bool            # exact Im alpha_1 = -Im alpha_2 identity
    all_nonreal: bool


def _alpha_reality(idx: int, alpha: TowerScalar) -> AlphaReality:
    g = alpha.is_gauss_value()
    if g is not None:
        return AlphaReality(idx, True, g.im, float(g.im), g.im != 0)
    im = alpha.embed_complex((1, 1)).imag
    return AlphaReality(idx, False, None, im, abs(im) > 1e-9)


def lemma_condition(params: ModelParams) -> LemmaReport:
    """Check the hypotheses of the reality lemma matching the case and verify
    its conclusion (the relevant alpha_j are non-real).

    Raises HypothesisViolated when a hypothesis fails; the exception carries
    the partial report in its `report` attribute.
    """
    mu, p, eps, s = params.mu, params.p, params.eps, params.strength
    failures = []
    if mu in (0, 1):
        failures.append("mu must avoid {0, 1}")
    if p == 0:
        failures.append("p must be nonzero")
    if params.potential is Potential.NEWTON:
        if params.space is Space.SPHERE:
            lemma = 1
            # (sqrt(eps^2+1) - eps)(eps^2+1) != (mu-1)^2 p^2 / (4 alpha mu):
            # exactly decidable because the left side is rational only when
            # eps^2+1 is a perfect square
            from .exactfield import rational_sqrt
            rhs = (mu - 1) ** 2 * p * p / (4 * s * mu)
            root = rational_sqrt(eps * eps + 1)
            if root is not None and (root - eps) * (eps * eps + 1) == rhs:
                failures.append(
                    "(sqrt(eps^2+1)-eps)(eps^2+1) equals (mu-1)^2 p^2/(4 alpha mu)")
        else:
            lemma = 2
            if not eps < -1:
                failures.append("eps < -1 required")
    else:
        lemma = 3
        if params.space is Space.SPHERE:
            if not eps < Fraction(-1, 2):
                failures.append("eps < -1/2 required in the spherical case")
        else:
            if not eps < Fraction(1, 2):
                failures.append("eps < 1/2 required in the hyperbolic case")

    table = closed_form_r(params)
    indices = (1, 2, 3, 4) if params.potential is Potential.NEWTON else (1, 2)
    alphas = tuple(_alpha_reality(j, table.alphas[j]) for j in indices)

    identity_checked = False
    if lemma in (2, 3) and not failures:
        # kappa in iQ makes alpha_1,2 Gaussian; then
        # Im alpha_1 = -Im alpha_2 = -mu^2(1-mu) p/(2 strength q), kappa = i q
        kv = params.kappa_value().is_gauss_value()
        if kv is not None and kv.re == 0 and kv.im != 0:
            q = kv.im
            expect = -(mu * mu * (1 - mu) * p) / (2 * s * q)
            a1 = table.alphas[1].is_gauss_value()
            a2 = table.alphas[2].is_gauss_value()
            if a1 is not None and a2 is not None:
                identity_checked = (a1.im == expect and a2.im == -expect)

    report = LemmaReport(lemma, not failures, tuple(failures), alphas,
                         identity_checked, all(a.nonreal for a in alphas))
    if failures:
        exc = HypothesisViolated(failures)
        exc.report = report
        raise exc
    return report


# ---------------------------------------------------------------------------
# numeric Hamiltonian evaluators (simplified units: time rescaled by m1 R^2)
# ---------------------------------------------------------------------------


class HamiltonianKind(Enum):
    FULL_SPHERE = "FullSphere"
    FULL_HYPERBOLIC = "FullHyperbolic"
    GAMMA_RESTRICTION = "GammaRestriction"
    RESTRICTED_PROBLEM = "RestrictedProblem"
    FREE_PART_S1 = "FreePartS1"
    FREE_PART_S2 = "FreePartS2"


def potential_value(params: ModelParams, theta: float) -> float:
    s = float(params.strength)
    if params.potential is Potential.NEWTON:
        if params.space is Space.SPHERE:
            return -s * math.cos(theta) / math.sin(theta)
        return -s * math.cosh(theta) / math.sinh(theta)
    if params.space is Space.SPHERE:
        t = math.tan(theta)
    else:
        t = math.tanh(theta)
    return 0.5 * s * t * t


def potential_slope(params: ModelParams, theta: float) -> float:
    s = float(params.strength)
    if params.potential is Potential.NEWTON:
        if params.space is Space.SPHERE:
            return s / math.sin(theta) ** 2
        return s / math.sinh(theta) ** 2
    if params.space is Space.SPHERE:
        return s * math.tan(theta) / math.cos(theta) ** 2
    return s * math.tanh(theta) / math.cosh(theta) ** 2


def _check_theta(space: Space, theta: float):
    if space is Space.SPHERE:
        if not 0 < theta < math.pi or min(abs(math.sin(theta)), 1) < 1e-12:
            raise DomainError(f"theta = {theta} outside (0, pi)")
    else:
        if theta <= 0:
            raise DomainError(f"theta = {theta} outside (0, infinity)")


@dataclass(frozen=True)
class ReducedHamiltonian:
    """Callable evaluator: value(state) and grad(state) on the chart tuple."""

    kind: HamiltonianKind
    params: ModelParams
    omega: Optional[float] = None     # restricted-problem drift speed
    include_potential: bool = True

    @property
    def dim(self) -> int:
        if self.kind is HamiltonianKind.GAMMA_RESTRICTION:
            return 2
        if self.kind is HamiltonianKind.RESTRICTED_PROBLEM:
            return 4
        return 5

    @property
    def chart(self) -> tuple[str, ...]:
        if self.kind is HamiltonianKind.GAMMA_RESTRICTION:
            return ("theta", "p_theta")
        if self.kind is HamiltonianKind.RESTRICTED_PROBLEM:
            return ("theta", "p_theta", "psi", "p_psi")
        return ("theta", "p_theta", "p0", "p1", "p2")

    def _v(self, theta: float) -> float:
        return potential_value(self.params, theta) if self.include_potential else 0.0

    def _vp(self, theta: float) -> float:
        return potential_slope(self.params, theta) if self.include_potential else 0.0

    def value(self, x) -> float:
        k = self.kind
        mu = float(self.params.mu)
        if k is HamiltonianKind.GAMMA_RESTRICTION:
            theta, pt = x
            _check_theta(self.params.space, theta)
            return pt * pt / (2 * mu) + float(self.params.p) * pt + self._v(theta)
        if k is HamiltonianKind.RESTRICTED_PROBLEM:
            theta, pt, psi, pps = x
            _check_theta(Space.SPHERE, theta)
            sn = math.sin(theta)
            ct = math.cos(theta) / sn
            om = self.omega if self.omega is not None else 1.0
            return (0.5 * (pt * pt + pps * pps / (sn * sn))
                    + om * (pt * math.cos(psi) - pps * math.sin(psi) * ct)
                    + self._v(theta))
        theta, pt, p0, p1, p2 = x
        _check_theta(self.params.space, theta)
        if self.params.space is Space.SPHERE:
            sn, cs = math.sin(theta), math.cos(theta)
            sign = -1.0
        else:
            sn, cs = math.sinh(theta), math.cosh(theta)
            sign = +1.0
        ct = cs / sn
        kinetic = (pt * pt + p2 * p2 / (sn * sn)) / (2 * mu)
        coupling = pt * p0 + sign * p2 * p2 + p1 * p2 * ct
        if k is HamiltonianKind.FREE_PART_S1:
            return kinetic
        if k is HamiltonianKind.FREE_PART_S2:
            return coupling
        return kinetic + coupling + self._v(theta)

    def grad(self, x) -> tuple:
        k = self.kind
        mu = float(self.params.mu)
        if k is HamiltonianKind.GAMMA_RESTRICTION:
            theta, pt = x
            _check_theta(self.params.space, theta)
            return (self._vp(theta), pt / mu + float(self.params.p))
        if k is HamiltonianKind.RESTRICTED_PROBLEM:
            theta, pt, psi, pps = x
            _check_theta(Space.SPHERE, theta)
            sn, cs = math.sin(theta), math.cos(theta)
            ct = cs / sn
            om = self.omega if self.omega is not None else 1.0
            sps, cps = math.sin(psi), math.cos(psi)
            d_theta = (-pps * pps * cs / sn ** 3 + om * pps * sps / (sn * sn)
                       + self._vp(theta))
            d_pt = pt + om * cps
            d_psi = om * (-pt * sps - pps * cps * ct)
            d_pps = pps / (sn * sn) - om * sps * ct
            return (d_theta, d_pt, d_psi, d_pps)
        theta, pt, p0, p1, p2 = x
        _check_theta(self.params.space, theta)
        if self.params.space is Space.SPHERE:
            sn, cs = math.sin(theta), math.cos(theta)
            sign = -1.0
        else:
            sn, cs = math.sinh(theta), math.cosh(theta)
            sign = +1.0
        ct = cs / sn
        # d(cot)/dtheta = -1/sin^2 and d(coth)/dtheta = -1/sinh^2
        dct = -1.0 / (sn * sn)
        kin_theta = -p2 * p2 * cs / (mu * sn ** 3)
        kin_pt = pt / mu
        kin_p2 = p2 / (mu * sn * sn)
        if k is HamiltonianKind.FREE_PART_S1:
            return (kin_theta, kin_pt, 0.0, 0.0, p2 / (mu * sn * sn))
        cup_theta = p1 * p2 * dct
        cup = (cup_theta, p0, pt, p2 * ct, 2 * sign * p2 + p1 * ct)
        if k is HamiltonianKind.FREE_PART_S2:
            return cup
        return (kin_theta + cup_theta + self._vp(theta),
                kin_pt + p0, pt, p2 * ct,
                kin_p2 + 2 * sign * p2 + p1 * ct)


@dataclass(frozen=True)
class CentralMotionHamiltonian:
    """The m1 = infinity system: one body in the fixed central potential.

    Only (theta, p_theta, p2) enter, so p2 is the extra integral."""

    params: ModelParams

    dim = 5
    chart = ("theta", "p_theta", "p0", "p1", "p2")

    def value(self, x) -> float:
        theta, pt, _, _, p2 = x
        _check_theta(self.params.space, theta)
        mu = float(self.params.mu)
        sn = math.sin(theta) if self.params.space is Space.SPHERE else math.sinh(theta)
        return (pt * pt + p2 * p2 / (sn * sn)) / (2 * mu) \
            + potential_value(self.params, theta)

    def grad(self, x) -> tuple:
        theta, pt, _, _, p2 = x
        _check_theta(self.params.space, theta)
        mu = float(self.params.mu)
        if self.params.space is Space.SPHERE:
            sn, cs = math.sin(theta), math.cos(theta)
        else:
            sn, cs = math.sinh(theta), math.cosh(theta)
        return (-p2 * p2 * cs / (mu * sn ** 3) + potential_slope(self.params, theta),
                pt / mu, 0.0, 0.0, p2 / (mu * sn * sn))


def hamiltonian(kind: HamiltonianKind, params: ModelParams,
                omega: Optional[float] = None,
                include_potential: bool = True) -> ReducedHamiltonian:
    if kind is HamiltonianKind.RESTRICTED_PROBLEM and params.space is not Space.SPHERE:
        raise ModelError("the restricted-problem chart is implemented on the sphere")
    if kind is HamiltonianKind.FULL_SPHERE and params.space is not Space.SPHERE:
        raise ModelError("FullSphere needs sphere parameters")
    if kind is HamiltonianKind.FULL_HYPERBOLIC and params.space is not Space.HYPERBOLIC:
        raise ModelError("FullHyperbolic needs hyperbolic parameters")
    return ReducedHamiltonian(kind, params, omega, include_potential)


REFERENCE_PARAMETERS = {
    (Space.SPHERE, Potential.NEWTON):
        dict(strength=Fraction(2), mu=Fraction(1, 2), p=Fraction(1), eps=Fraction(0)),
    (Space.HYPERBOLIC, Potential.NEWTON):
        dict(strength=Fraction(1), mu=Fraction(1, 2), p=Fraction(1), eps=Fraction(-2)),
    (Space.SPHERE, Potential.OSCILLATOR):
        dict(strength=Fraction(1), mu=Fraction(1, 2), p=Fraction(1), eps=Fraction(-1)),
    (Space.HYPERBOLIC, Potential.OSCILLATOR):
        dict(strength=Fraction(1), mu=Fraction(1, 2), p=Fraction(1), eps=Fraction(-1)),
}


def reference_params(space: Space, potential: Potential) -> ModelParams:
    return derive_params(space, potential, **REFERENCE_PARAMETERS[(space, potential)])


def random_admissible_params(space: Space, potential: Potential, rng,
                             mu_one: bool = False) -> ModelParams:
    """Random small-height rational parameters passing every guard."""
    while True:
        strength = Fraction(rng.randint(1, 6), rng.randint(1, 4))
        mu = Fraction(1) if mu_one else Fraction(rng.randint(1, 9), rng.randint(2, 8))
        p = Fraction(rng.choice([-1, 1]) * rng.randint(1, 5), rng.randint(1, 4))
        eps = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        try:
            params = derive_params(space, potential, strength, mu, p, eps)
        except DegenerateParameters:
            continue
        if not mu_one and params.mu == 1:
            continue
        return params
