"""Differential-Galois obstruction engine for y'' = r y over C(z).

Implements the pieces the nonintegrability pipeline needs: the rational
Riccati (case I) search specialized to Fuchsian equations, the case-II
algorithm (candidate exponent sets, Theta, Xi, the auxiliary polynomial
P), the case-III rationality screen, the product-of-solutions exclusion
through the second symmetric power, and the final classification of the
identity component.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

from .exactfield import TowerContext, TowerScalar
from .linode import (NormalFormODE, SingularitySpectrum, SingularPoint,
                     symmetric_power_residual)
from .ratcalc import Poly, RatFunc


class KovacicError(Exception):
    pass


# ---------------------------------------------------------------------------
# Step 1: candidate integer sets E_c
# ---------------------------------------------------------------------------


def e_sets(spec: SingularitySpectrum) -> list[tuple[SingularPoint, tuple[int, ...]]]:
    """The finite integer menu at every singular point, infinity last."""
    out = []
    for pt in spec.finite_points:
        out.append((pt, _e_set_finite(pt)))
    out.append((spec.infinity, _e_set_infinity(spec.infinity)))
    return out


def _e_set_finite(pt: SingularPoint) -> tuple[int, ...]:
    if pt.order == 1:
        return (4,)
    if pt.order == 2:
        vals = {2}
        if pt.delta_rational is not None:
            for s in (1, -1):
                cand = 2 * (1 + s * pt.delta_rational)
                if cand.denominator == 1:
                    vals.add(int(cand))
        return tuple(sorted(vals))
    return (pt.order,)


def _e_set_infinity(pt: SingularPoint) -> tuple[int, ...]:
    if pt.order <= 1:
        return (0, 2, 4)
    if pt.order == 2:
        vals = {2}
        if pt.delta_rational is not None:
            for s in (1, -1):
                cand = 2 * (1 + s * pt.delta_rational)
                if cand.denominator == 1:
                    vals.add(int(cand))
        return tuple(sorted(vals))
    return (4 - pt.order,)


# ---------------------------------------------------------------------------
# Step 2: admissible assignments with d(e) a nonnegative integer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ECandidate:
    finite: tuple[tuple[TowerScalar, int], ...]   # (location, e_c)
    e_infinity: int
    d: Fraction

    def render(self) -> str:
        es = ", ".join(str(e) for _, e in self.finite)
        return f"e = ({es}; {self.e_infinity}), d = {self.d}"


def candidates(esets: Sequence[tuple[SingularPoint, tuple[int, ...]]]) -> list[ECandidate]:
    """Cartesian enumeration filtered to d(e) = (e_inf - sum e_c)/2 in Z>=0."""
    finite = [(pt, menu) for pt, menu in esets if not pt.is_infinity]
    inf_menu = next(menu for pt, menu in esets if pt.is_infinity)
    out = []
    for choice in itertools.product(*(menu for _, menu in finite)):
        total = sum(choice)
        for e_inf in inf_menu:
            d = Fraction(e_inf - total, 2)
            if d >= 0 and d.denominator == 1:
                out.append(ECandidate(
                    tuple((pt.location, e) for (pt, _), e in zip(finite, choice)),
                    e_inf, d))
    out.sort(key=lambda c: (c.e_infinity, tuple(e for _, e in c.finite)))
    return out


# ---------------------------------------------------------------------------
# Step 3: Theta, Xi and the auxiliary polynomial
# ---------------------------------------------------------------------------


def theta(ctx: TowerContext, e: ECandidate) -> RatFunc:
    """Theta = 1/2 sum e_c / (z - c) over the finite singular points."""
    out = RatFunc.constant(ctx, 0)
    half = RatFunc.constant(ctx, Fraction(1, 2))
    for loc, ec in e.finite:
        if ec == 0:
            continue
        term = RatFunc(Poly.constant(ctx, ctx.from_rational(ec)),
                       Poly(ctx, [-loc, ctx.one]))
        out = out + half * term
    return out


def xi(normal: NormalFormODE, th: RatFunc) -> RatFunc:
    """Xi = Theta'' + 3 Theta Theta' + Theta^3 - 4 r Theta - 2 r'."""
    r = normal.r
    ctx = r.ctx
    tp = th.derivative()
    tpp = tp.derivative()
    three = RatFunc.constant(ctx, 3)
    four = RatFunc.constant(ctx, 4)
    two = RatFunc.constant(ctx, 2)
    return tpp + three * th * tp + th * th * th - four * r * th - two * r.derivative()


@dataclass(frozen=True)
class Case2Solution:
    e: ECandidate
    P: Poly
    psi: RatFunc                      # Theta + P'/P
    omega_constant_term: RatFunc      # psi'/2 + psi^2/2 - r in w^2 - psi w + (...) = 0


def _solve_linear_combination(terms: list[RatFunc],
                              require_unique: bool = True) -> Optional[list[TowerScalar]]:
    """Coefficients c_k (k < n) with terms[n] + sum c_k terms[k] = 0.

    Returns None when inconsistent (or, with require_unique, when the
    solution space is positive-dimensional); [] when n = 0 and terms[0]
    is already zero.
    """
    ctx = terms[0].ctx
    n = len(terms) - 1
    if n == 0:
        return [] if terms[0].is_zero() else None
    common = Poly.constant(ctx, 1)
    for t in terms:
        q, rem = (t.den * common).divmod(_poly_gcd_safe(common, t.den))
        assert rem.is_zero()
        common = q
    numerators = []
    for t in terms:
        lift, rem = common.divmod(t.den)
        assert rem.is_zero()
        numerators.append(t.num * lift)
    rows = max(p.degree() for p in numerators) + 1
    if rows == 0:
        # the operator annihilates every basis polynomial
        return None if require_unique else [ctx.zero] * n
    mat = [[numerators[k].coefficient(m) for k in range(n)] for m in range(rows)]
    rhs = [-numerators[n].coefficient(m) for m in range(rows)]
    sol, unique = _gauss_solve(ctx, mat, rhs)
    if sol is None or (require_unique and not unique):
        return None
    return sol


def _poly_gcd_safe(p: Poly, q: Poly) -> Poly:
    from .ratcalc import poly_gcd
    if p.is_zero() and q.is_zero():
        return Poly.constant(p.ctx, 1)
    return poly_gcd(p, q)


def _gauss_solve(ctx, mat, rhs):
    """Exact least-structure solve; returns (solution, unique)."""
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    aug = [list(row) + [rhs[i]] for i, row in enumerate(mat)]
    pivots = []
    rank_row = 0
    for col in range(cols):
        piv = None
        for rr in range(rank_row, rows):
            if not aug[rr][col].is_zero():
                piv = rr
                break
        if piv is None:
            continue
        aug[rank_row], aug[piv] = aug[piv], aug[rank_row]
        inv = aug[rank_row][col].inverse()
        aug[rank_row] = [v * inv for v in aug[rank_row]]
        for rr in range(rows):
            if rr != rank_row and not aug[rr][col].is_zero():
                f = aug[rr][col]
                aug[rr] = [v - f * w for v, w in zip(aug[rr], aug[rank_row])]
        pivots.append(col)
        rank_row += 1
        if rank_row == rows:
            break
    # inconsistent?
    for rr in range(rank_row, rows):
        if not aug[rr][cols].is_zero():
            return None, False
    unique = len(pivots) == cols
    sol = [ctx.zero] * cols
    for i, col in enumerate(pivots):
        sol[col] = aug[i][cols]
    return sol, unique


def search_P(normal: NormalFormODE, e: ECandidate) -> Optional[Case2Solution]:
    """Monic P of degree d(e) solving
    P''' + 3 Th P'' + (3 Th^2 + 3 Th' - 4 r) P' + Xi P = 0,
    plus the algebraic data of the degree-2 omega when it exists."""
    r = normal.r
    ctx = r.ctx
    if e.d < 0 or e.d.denominator != 1:
        return None
    d = int(e.d)
    th = theta(ctx, e)
    three = RatFunc.constant(ctx, 3)
    four = RatFunc.constant(ctx, 4)
    c1 = three * th * th + three * th.derivative() - four * r
    c0 = xi(normal, th)

    def operator(p_poly: Poly) -> RatFunc:
        pr = RatFunc.from_poly(p_poly)
        return (pr.derivative().derivative().derivative()
                + three * th * pr.derivative().derivative()
                + c1 * pr.derivative() + c0 * pr)

    terms = [operator(Poly(ctx, [ctx.zero] * k + [ctx.one])) for k in range(d + 1)]
    coeffs = _solve_linear_combination(terms, require_unique=False)
    if coeffs is None:
        return None
    p_poly = Poly(ctx, coeffs + [ctx.one])
    psi = th + RatFunc.from_poly(p_poly.derivative()) / RatFunc.from_poly(p_poly)
    half = RatFunc.constant(ctx, Fraction(1, 2))
    const_term = half * psi.derivative() + half * psi * psi - r
    return Case2Solution(e, p_poly, psi, const_term)


# ---------------------------------------------------------------------------
# Case I: rational Riccati solutions via the Fuchsian exponent ansatz
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RiccatiSolution:
    omega: RatFunc
    exponent_choices: tuple[tuple[TowerScalar, Fraction], ...]
    infinity_exponent: Fraction
    P: Poly

    def denominator_lcm(self) -> int:
        """Smallest m with m * (every chosen exponent) integral."""
        import math
        m = 1
        for _, rho in self.exponent_choices:
            m = m * rho.denominator // math.gcd(m, rho.denominator)
        m = m * self.infinity_exponent.denominator \
            // math.gcd(m, self.infinity_exponent.denominator)
        return m


def case1_search(normal: NormalFormODE,
                 spec: SingularitySpectrum) -> list[RiccatiSolution]:
    """All solutions y = P(z) prod (z-c)^rho_c with rational exponents.

    A singular point whose exponent pair is not rational prunes the whole
    search: every candidate solution must realize an exponent there.
    Assignments whose linear system is underdetermined are skipped; such
    families are spanned by the solutions of other assignments.
    """
    r = normal.r
    ctx = r.ctx
    finite = spec.finite_points
    for pt in list(finite) + [spec.infinity]:
        if pt.exponents is None:
            return []
    solutions: list[RiccatiSolution] = []
    menus = [pt.exponents for pt in finite]
    for rho_choice in itertools.product(*menus) if menus else [()]:
        total = sum(rho_choice, Fraction(0))
        for sigma in spec.infinity.exponents:
            n = -sigma - total
            if n < 0 or n.denominator != 1:
                continue
            sol = _solve_exponent_assignment(normal, finite, rho_choice, int(n))
            if sol is None:
                continue
            p_poly, omega = sol
            if any(prev.omega == omega for prev in solutions):
                # repeated-exponent menus (delta = 0) revisit the same solution
                continue
            choices = tuple((pt.location, rho) for pt, rho in zip(finite, rho_choice))
            riccati = omega.derivative() + omega * omega - r
            if not riccati.is_zero():
                raise KovacicError("internal: found omega fails the Riccati equation")
            solutions.append(RiccatiSolution(omega, choices, sigma, p_poly))
    return solutions


def _solve_exponent_assignment(normal, finite, rho_choice, n):
    """Monic P (degree n) with P'' + 2 phi P' + (phi' + phi^2 - r) P = 0."""
    ctx = normal.r.ctx
    phi = RatFunc.constant(ctx, 0)
    for pt, rho in zip(finite, rho_choice):
        if rho == 0:
            continue
        phi = phi + RatFunc(Poly.constant(ctx, ctx.from_rational(rho)),
                            Poly(ctx, [-pt.location, ctx.one]))
    two = RatFunc.constant(ctx, 2)
    c0 = phi.derivative() + phi * phi - normal.r

    def operator(p_poly: Poly) -> RatFunc:
        pr = RatFunc.from_poly(p_poly)
        return pr.derivative().derivative() + two * phi * pr.derivative() + c0 * pr

    terms = [operator(Poly(ctx, [ctx.zero] * k + [ctx.one])) for k in range(n + 1)]
    coeffs = _solve_linear_combination(terms)
    if coeffs is None:
        return None
    p_poly = Poly(ctx, coeffs + [ctx.one])
    omega = phi + RatFunc.from_poly(p_poly.derivative()) / RatFunc.from_poly(p_poly)
    return p_poly, omega


# ---------------------------------------------------------------------------
# two-independent-solutions exclusion via the second symmetric power
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductCandidate:
    base_exponents: tuple[tuple[TowerScalar, int], ...]
    poly_degree: int
    solvable: bool
    residual_num_degree: Optional[int]        # for the rigid (degree-0) candidates
    residual_leading: Optional[TowerScalar]


@dataclass(frozen=True)
class PairExclusion:
    candidates: tuple[ProductCandidate, ...]
    excluded: bool                            # no rational y1*y2 exists


def _integer_sums(pt: SingularPoint) -> list[int]:
    """Integer options for the order of v = y1 y2 at a singular point."""
    opts = {1} if pt.order >= 1 else {0}
    if pt.order == 2 and pt.delta_rational is not None:
        for s in (1, -1):
            cand = 1 + s * pt.delta_rational
            if cand.denominator == 1:
                opts.add(int(cand))
    if pt.order == 1:
        opts = {0, 1, 2}
    return sorted(opts)


def pair_exclusion(normal: NormalFormODE, spec: SingularitySpectrum) -> PairExclusion:
    """Decide whether two independent rational-log-derivative solutions can
    exist: their product v = y1 y2 would be a rational function with
    constrained orders at the singular points and constrained growth at
    infinity; every admissible shape is tested against the second
    symmetric power."""
    r = normal.r
    ctx = r.ctx
    finite = spec.finite_points
    menus = [_integer_sums(pt) for pt in finite]
    inf_pt = spec.infinity
    if inf_pt.exponents is not None:
        s1, s2 = inf_pt.exponents
        growth_options = sorted({int(g) for g in (-2 * s1, -s1 - s2, -2 * s2)
                                 if g.denominator == 1})
    else:
        # exponent sum at infinity is -1 regardless, so the mixed product
        # always grows like z; individual doubles are not rational here
        growth_options = [1]
    found: list[ProductCandidate] = []
    any_solvable = False
    for s_choice in itertools.product(*menus) if menus else [()]:
        base_deg = sum(s_choice)
        for g in growth_options:
            n = g - base_deg
            if n < 0:
                continue
            base_num = Poly.constant(ctx, 1)
            base_den = Poly.constant(ctx, 1)
            for pt, s in zip(finite, s_choice):
                lin = Poly(ctx, [-pt.location, ctx.one])
                for _ in range(abs(s)):
                    if s > 0:
                        base_num = base_num * lin
                    else:
                        base_den = base_den * lin
            base = RatFunc(base_num, base_den)

            def residual_of(p_poly: Poly) -> RatFunc:
                return symmetric_power_residual(
                    normal, RatFunc.from_poly(p_poly) * base)

            terms = [residual_of(Poly(ctx, [ctx.zero] * k + [ctx.one]))
                     for k in range(n + 1)]
            coeffs = _solve_linear_combination(terms, require_unique=False)
            solvable = coeffs is not None
            res_deg = None
            res_lead = None
            if n == 0 and not solvable:
                res = terms[0]
                res_deg = res.num.degree()
                res_lead = res.num.leading()
            if solvable:
                any_solvable = True
            found.append(ProductCandidate(
                tuple((pt.location, s) for pt, s in zip(finite, s_choice)),
                n, solvable, res_deg, res_lead))
    return PairExclusion(tuple(found), not any_solvable)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


class Classification(Enum):
    FULL_TRIANGULAR_NONABELIAN = "FullTriangular_NonAbelian"
    DIAGONAL_OR_SMALLER_ABELIAN = "DiagonalOrSmaller_Abelian"
    FINITE_ABELIAN = "Finite_Abelian"
    SL2_NONABELIAN = "SL2_NonAbelian"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class GaloisVerdict:
    case_one: tuple[RiccatiSolution, ...]
    case_two_found: Optional[Case2Solution]
    case_three_possible: bool
    classification: Classification
    identity_component_abelian: Optional[bool]   # None = undetermined
    notes: tuple[str, ...] = ()


def _point_nonreal_exponents(pt: SingularPoint) -> bool:
    q = pt.delta_squared.is_real_rational()
    if q is not None:
        return q < 0
    # reality screen for tower values (same 1e-9 margin as the lemma checks)
    return abs(pt.delta_squared.embed_complex((1, 1)).imag) > 1e-9


def case3_possible(spec: SingularitySpectrum) -> bool:
    """Case III needs every exponent rational (algebraic solutions)."""
    return spec.all_deltas_rational()


def classify(normal: NormalFormODE, spec: SingularitySpectrum,
             case1: Sequence[RiccatiSolution],
             case2: Optional[Case2Solution],
             case_three: bool,
             pair_excluded: Optional[bool] = None) -> GaloisVerdict:
    """Decision table combining the collected evidence.

    The SL2 verdict needs the product test (pair_excluded) on top of an
    empty rational case-I search: without it a diagonal group with
    irrational exponent pairs is not excluded.
    """
    notes: list[str] = []
    distinct = []
    for sol in case1:
        if all(sol.omega != other.omega for other in distinct):
            distinct.append(sol)
    n1 = len(distinct)
    nonreal_somewhere = any(_point_nonreal_exponents(pt) for pt in spec.finite_points)
    if n1 >= 2:
        notes.append("two independent solutions with rational log derivative")
        return GaloisVerdict(tuple(case1), case2, case_three,
                             Classification.DIAGONAL_OR_SMALLER_ABELIAN, True,
                             tuple(notes))
    if n1 == 1:
        if nonreal_somewhere:
            notes.append("single rational-log-derivative solution and non-real exponents")
            return GaloisVerdict(tuple(case1), case2, case_three,
                                 Classification.FULL_TRIANGULAR_NONABELIAN, False,
                                 tuple(notes))
        m = distinct[0].denominator_lcm()
        if m <= 8:
            notes.append(f"y1^{m} is rational: proper triangular subgroup, "
                         "abelian identity component")
            return GaloisVerdict(tuple(case1), case2, case_three,
                                 Classification.INCONCLUSIVE, True, tuple(notes))
        notes.append(f"smallest candidate power m={m} exceeds the search bound 8; "
                     "proper-subgroup status undetermined")
        return GaloisVerdict(tuple(case1), case2, case_three,
                             Classification.INCONCLUSIVE, None, tuple(notes))
    if case2 is not None:
        notes.append("case II solution found: identity component inside the "
                     "diagonal group, abelian")
        return GaloisVerdict(tuple(case1), case2, case_three,
                             Classification.INCONCLUSIVE, True, tuple(notes))
    if case_three:
        notes.append("all exponents rational: a finite group is not excluded")
        return GaloisVerdict(tuple(case1), case2, case_three,
                             Classification.INCONCLUSIVE, None, tuple(notes))
    if pair_excluded:
        notes.append("no rational case-I solution, product test excludes a "
                     "diagonalizable pair, case II empty, case III impossible")
        return GaloisVerdict(tuple(case1), case2, case_three,
                             Classification.SL2_NONABELIAN, False, tuple(notes))
    notes.append("no obstruction evidence is complete without the product test")
    return GaloisVerdict(tuple(case1), case2, case_three,
                         Classification.INCONCLUSIVE, None, tuple(notes))
