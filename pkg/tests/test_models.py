import math
import random
from fractions import Fraction as Fr

import pytest

from curvedtwobody.exactfield import GaussRational
from curvedtwobody.linode import reduce_to_second_order, to_normal_form
from curvedtwobody.models import (DegenerateParameters, DomainError,
                                  HamiltonianKind, HypothesisViolated, NotMu1,
                                  Potential, Space, build_system,
                                  candidate_poles, closed_form_r, derive_params,
                                  detect_poles, gamma_curve_identity,
                                  hamiltonian, lemma_condition, mu1_solutions,
                                  random_admissible_params, reference_params)
from curvedtwobody.ratcalc import partial_fractions

ALL_CASES = [(Space.SPHERE, Potential.NEWTON),
             (Space.HYPERBOLIC, Potential.NEWTON),
             (Space.SPHERE, Potential.OSCILLATOR),
             (Space.HYPERBOLIC, Potential.OSCILLATOR)]


def normal_r(params):
    return to_normal_form(reduce_to_second_order(build_system(params))).r


class TestDeriveParams:
    def test_spherical_newton_reference(self):
        params = derive_params(Space.SPHERE, Potential.NEWTON, 2, Fr(1, 2), 1, 0)
        assert params.kappa2 == GaussRational(0, Fr(1, 2))
        assert params.lambda2 == GaussRational(0, Fr(-1, 2))
        assert params.z0 == Fr(1, 4)

    def test_hyperbolic_newton_reference(self):
        params = derive_params(Space.HYPERBOLIC, Potential.NEWTON, 1, Fr(1, 2), 1, -2)
        assert params.kappa2 == GaussRational(-1)
        assert params.lambda2 == GaussRational(-3)
        assert params.z0 == Fr(1, 2)

    def test_oscillator_lambda_collision(self):
        with pytest.raises(DegenerateParameters):
            derive_params(Space.HYPERBOLIC, Potential.OSCILLATOR, 1, Fr(1, 2), 1, 0)

    @pytest.mark.parametrize("kwargs", [
        dict(strength=0, mu=Fr(1, 2), p=1, eps=0),
        dict(strength=1, mu=0, p=1, eps=0),
        dict(strength=1, mu=Fr(1, 2), p=0, eps=0),
    ])
    def test_guards(self, kwargs):
        with pytest.raises(DegenerateParameters):
            derive_params(Space.SPHERE, Potential.NEWTON, **kwargs)

    def test_string_rationals_accepted(self):
        params = derive_params(Space.SPHERE, Potential.NEWTON, "2", "1/2", "1", "0")
        assert params.mu == Fr(1, 2)

    def test_decimal_rejected(self):
        with pytest.raises(TypeError):
            derive_params(Space.SPHERE, Potential.NEWTON, 2.0, 0.5, 1, 0)


class TestBuildSystem:
    @pytest.mark.parametrize("space,pot", ALL_CASES)
    def test_c_vanishes_at_z0(self, space, pot):
        params = reference_params(space, pot)
        sysz = build_system(params)
        assert sysz.C.evaluate(params.z0_scalar()).is_zero()

    @pytest.mark.parametrize("space,pot", ALL_CASES)
    def test_gamma_curve_identity(self, space, pot):
        assert gamma_curve_identity(reference_params(space, pot))

    def test_weight_only_for_oscillator(self):
        assert build_system(reference_params(Space.SPHERE, Potential.NEWTON)).weight is None
        assert build_system(reference_params(Space.SPHERE, Potential.OSCILLATOR)).weight is not None


class TestClosedFormTables:
    @pytest.mark.parametrize("space,pot", ALL_CASES)
    def test_pipeline_identity_reference(self, space, pot):
        params = reference_params(space, pot)
        table = closed_form_r(params)
        assert normal_r(params) == table.reconstruct(params.ctx)

    @pytest.mark.parametrize("space,pot", ALL_CASES)
    def test_pipeline_identity_random(self, space, pot):
        rng = random.Random(f"{space}{pot}")
        for _ in range(3):
            params = random_admissible_params(space, pot, rng)
            assert normal_r(params) == closed_form_r(params).reconstruct(params.ctx)

    def test_oscillator_fixed_alphas(self):
        for space in Space:
            params = reference_params(space, Potential.OSCILLATOR)
            table = closed_form_r(params)
            ctx = params.ctx
            assert table.alphas[0] == ctx.from_rational(Fr(3, 4))
            assert table.alphas[3] == ctx.from_rational(Fr(-3, 16))
            assert table.alphas[4] == ctx.from_rational(Fr(-3, 16))

    def test_mu1_newton_single_term(self):
        params = derive_params(Space.SPHERE, Potential.NEWTON, 2, 1, 1, 0)
        r = normal_r(params)
        poles = detect_poles(params, r)
        assert poles == [(params.z0_scalar(), 2)]
        pf = partial_fractions(r, poles)
        assert pf.terms == ((params.z0_scalar(), 2,
                             params.ctx.from_rational(Fr(3, 4))),)

    def test_newton_partial_fractions_match_table(self):
        """The pipeline r decomposed at the supplied poles reproduces the
        table coefficients, cross-checked against a numeric series oracle."""
        import mpmath as mp
        mp.mp.dps = 40
        params = reference_params(Space.SPHERE, Potential.NEWTON)
        r = normal_r(params)
        poles = detect_poles(params, r)
        assert len(poles) == 5 and all(m == 2 for _, m in poles)
        pf = partial_fractions(r, poles)
        table = closed_form_r(params)
        for j, pole in enumerate(table.poles):
            assert pf.coefficient(pole, 2) == table.alphas[j]
            assert pf.coefficient(pole, 1) == table.betas[j]
        # numeric circle-average oracle at the first kappa pole
        pole = table.poles[1]
        c = pole.embed_complex((1, 1))
        h = 1e-5
        for order, expected in ((2, table.alphas[1]), (1, table.betas[1])):
            acc = 0j
            npts = 8
            for jj in range(npts):
                w = complex(math.cos(2 * math.pi * jj / npts),
                            math.sin(2 * math.pi * jj / npts))
                acc += r.embed_complex(c + h * w) * (h * w) ** order
            got = acc / npts
            assert abs(got - expected.embed_complex((1, 1))) < 1e-3

    def test_alpha1_alternative_closed_form(self):
        """The compact alpha_1 form
        (mu^2-1)/4 - (mu-1) p mu^2 (2/kappa + p(1-mu)/(kappa^2 alpha))/(4 alpha)
        agrees numerically with the canonical table entry."""
        rng = random.Random(101)
        for _ in range(10):
            params = random_admissible_params(Space.SPHERE, Potential.NEWTON, rng)
            table = closed_form_r(params)
            a, mu, p = map(float, (params.strength, params.mu, params.p))
            k = params.kappa_value().embed_complex((1, 1))
            k2 = complex(params.kappa2.re) + 1j * complex(params.kappa2.im)
            alt = (mu * mu - 1) / 4 - (mu - 1) / (4 * a) * p * mu * mu \
                * (2 / k + p * (1 - mu) / (k2 * a))
            got = table.alphas[1].embed_complex((1, 1))
            assert abs(got - alt) < 1e-9 * max(1.0, abs(alt))

    def test_log_derivative_of_c_partial_fractions(self):
        """C'/C has residue +1 at z0 and -1 at each of +-kappa, +-lambda
        (simple poles of the logarithmic derivative)."""
        params = reference_params(Space.SPHERE, Potential.NEWTON)
        sysz = build_system(params)
        logd = sysz.C.derivative() / sysz.C
        poles = [(c, 1) for c in candidate_poles(params)]
        pf = partial_fractions(logd, poles)
        ctx = params.ctx
        one = ctx.one
        assert pf.coefficient(params.z0_scalar(), 1) == one
        for c in candidate_poles(params)[1:]:
            assert pf.coefficient(c, 1) == -one
        assert pf.polynomial_part.is_zero()

    @pytest.mark.parametrize("space,pot", ALL_CASES)
    def test_z0_formulas_agree(self, space, pot):
        params = reference_params(space, pot)
        d = params.kappa2 - params.lambda2
        pg = GaussRational(params.p)
        if pot is Potential.NEWTON:
            alt = pg * d / GaussRational(0, 4) if space is Space.SPHERE \
                else pg * d / GaussRational(4)
            assert alt == GaussRational(params.z0)


class TestLemmaConditions:
    def test_lemma1_holds_at_reference(self):
        report = lemma_condition(reference_params(Space.SPHERE, Potential.NEWTON))
        assert report.lemma == 1 and report.hypotheses_hold
        assert report.all_nonreal
        assert len(report.alphas) == 4

    def test_lemma2_hyperbolic(self):
        report = lemma_condition(reference_params(Space.HYPERBOLIC, Potential.NEWTON))
        assert report.lemma == 2 and report.hypotheses_hold
        assert report.all_nonreal
        # kappa = i is exactly representable, so alpha_1,2 are decided exactly
        # and the Im alpha_1 = -Im alpha_2 identity is verified
        assert report.identity_checked
        assert report.alphas[0].exact and report.alphas[1].exact

    def test_lemma3_oscillator(self):
        for space in Space:
            report = lemma_condition(reference_params(space, Potential.OSCILLATOR))
            assert report.lemma == 3 and report.hypotheses_hold
            assert report.all_nonreal

    def test_lemma3_exact_identity_with_kappa_in_iq(self):
        # mu=1/2, beta=1, eps=-3/2 gives kappa^2 = -1, kappa = i in iQ
        params = derive_params(Space.SPHERE, Potential.OSCILLATOR,
                               1, Fr(1, 2), 1, Fr(-3, 2))
        report = lemma_condition(params)
        assert report.hypotheses_hold and report.all_nonreal
        assert report.identity_checked
        assert report.alphas[0].exact and report.alphas[1].exact

    def test_lemma1_violation_witness(self):
        # (sqrt(eps^2+1)-eps)(eps^2+1) = (mu-1)^2 p^2/(4 alpha mu) at
        # eps=0, mu=1/2, alpha=1/2, p=2: both sides equal 1 exactly
        with pytest.raises(HypothesisViolated) as err:
            lemma_condition(derive_params(Space.SPHERE, Potential.NEWTON,
                                          Fr(1, 2), Fr(1, 2), 2, 0))
        assert any("(mu-1)^2" in f or "equals" in f for f in err.value.failures)

    def test_lemma2_hypothesis_violation(self):
        with pytest.raises(HypothesisViolated):
            lemma_condition(derive_params(Space.HYPERBOLIC, Potential.NEWTON,
                                          1, Fr(1, 2), 1, 2))

    def test_mu1_is_a_violation(self):
        with pytest.raises(HypothesisViolated):
            lemma_condition(derive_params(Space.SPHERE, Potential.NEWTON, 2, 1, 1, 0))


class TestMu1Solutions:
    def test_newton_forms(self):
        from curvedtwobody.ratcalc import Poly, RatFunc
        params = derive_params(Space.SPHERE, Potential.NEWTON, 2, 1, 1, 0)
        om1, om2 = mu1_solutions(params)
        ctx = params.ctx
        z0 = params.z0_scalar()
        pole = RatFunc.from_poly(Poly(ctx, [-z0, ctx.one]))
        assert om1 == RatFunc.constant(ctx, Fr(3, 2)) / pole
        assert om2 == RatFunc.constant(ctx, Fr(-1, 2)) / pole

    @pytest.mark.parametrize("space,pot", ALL_CASES)
    def test_riccati_exact(self, space, pot):
        kw = dict(strength=1, mu=1, p=1, eps=-2)
        if (space, pot) == (Space.SPHERE, Potential.NEWTON):
            kw = dict(strength=2, mu=1, p=1, eps=0)
        params = derive_params(space, pot, **kw)
        r = normal_r(params)
        for om in mu1_solutions(params):
            assert (om.derivative() + om * om - r).is_zero()

    def test_requires_mu1(self):
        with pytest.raises(NotMu1):
            mu1_solutions(reference_params(Space.SPHERE, Potential.NEWTON))


class TestHamiltonians:
    def test_gamma_restriction_value(self):
        params = reference_params(Space.SPHERE, Potential.NEWTON)
        h0 = hamiltonian(HamiltonianKind.GAMMA_RESTRICTION, params,
                         include_potential=False)
        theta, pt = 1.1, 0.7
        mu, p = float(params.mu), float(params.p)
        assert abs(h0.value((theta, pt)) - (pt * pt / (2 * mu) + p * pt)) < 1e-15

    def test_full_sphere_matches_sum_of_parts(self):
        params = reference_params(Space.SPHERE, Potential.NEWTON)
        h = hamiltonian(HamiltonianKind.FULL_SPHERE, params)
        h1 = hamiltonian(HamiltonianKind.FREE_PART_S1, params)
        h2 = hamiltonian(HamiltonianKind.FREE_PART_S2, params)
        from curvedtwobody.models import potential_value
        rng = random.Random(3)
        for _ in range(20):
            x = (rng.uniform(0.3, 2.8), rng.uniform(-1, 1), rng.uniform(-1, 1),
                 rng.uniform(-1, 1), rng.uniform(-1, 1))
            total = h1.value(x) + h2.value(x) + potential_value(params, x[0])
            assert abs(h.value(x) - total) < 1e-12

    def test_mu1_alternative_form(self):
        # the (p_theta+p0)^2/2 + (p1 sin + p2 cos)^2/(2 sin^2) + V form equals
        # the simplified h_s plus the Casimir constant gamma^2/2
        params = derive_params(Space.SPHERE, Potential.NEWTON, 2, 1, 1, 0)
        h = hamiltonian(HamiltonianKind.FULL_SPHERE, params)
        from curvedtwobody.models import potential_value
        rng = random.Random(11)
        for _ in range(30):
            x = (rng.uniform(0.3, 2.8), rng.uniform(-1, 1), rng.uniform(-1, 1),
                 rng.uniform(-1, 1), rng.uniform(-1, 1))
            theta, pt, p0, p1, p2 = x
            sn, cs = math.sin(theta), math.cos(theta)
            alt = (0.5 * (pt + p0) ** 2
                   + (p1 * sn + p2 * cs) ** 2 / (2 * sn * sn)
                   + potential_value(params, theta))
            casimir_half = 0.5 * (p0 * p0 + p1 * p1 + p2 * p2)
            assert abs(alt - (h.value(x) + casimir_half)) < 1e-12

    def test_gradient_against_finite_differences(self):
        rng = random.Random(23)
        for space, pot in ALL_CASES:
            params = reference_params(space, pot)
            kind = HamiltonianKind.FULL_SPHERE if space is Space.SPHERE \
                else HamiltonianKind.FULL_HYPERBOLIC
            h = hamiltonian(kind, params)
            for _ in range(25):
                x = [rng.uniform(0.4, 1.2), rng.uniform(-1, 1), rng.uniform(-1, 1),
                     rng.uniform(-1, 1), rng.uniform(-1, 1)]
                g = h.grad(tuple(x))
                eps = 1e-6
                for k in range(5):
                    xp = list(x)
                    xm = list(x)
                    xp[k] += eps
                    xm[k] -= eps
                    fd = (h.value(tuple(xp)) - h.value(tuple(xm))) / (2 * eps)
                    scale = max(1.0, abs(g[k]))
                    assert abs(g[k] - fd) / scale < 1e-6

    def test_restricted_problem_gradient(self):
        params = reference_params(Space.SPHERE, Potential.NEWTON)
        h = hamiltonian(HamiltonianKind.RESTRICTED_PROBLEM, params, omega=0.7)
        rng = random.Random(5)
        for _ in range(10):
            x = [rng.uniform(0.4, 2.6), rng.uniform(-1, 1),
                 rng.uniform(-3, 3), rng.uniform(-1, 1)]
            g = h.grad(tuple(x))
            for k in range(4):
                xp, xm = list(x), list(x)
                xp[k] += 1e-6
                xm[k] -= 1e-6
                fd = (h.value(tuple(xp)) - h.value(tuple(xm))) / 2e-6
                assert abs(g[k] - fd) / max(1.0, abs(g[k])) < 1e-6

    def test_domain_error(self):
        params = reference_params(Space.SPHERE, Potential.NEWTON)
        h = hamiltonian(HamiltonianKind.FULL_SPHERE, params)
        with pytest.raises(DomainError):
            h.value((0.0, 0, 0, 0, 0))
        with pytest.raises(DomainError):
            h.value((math.pi, 0, 0, 0, 0))

    def test_candidate_poles_count(self):
        params = reference_params(Space.SPHERE, Potential.NEWTON)
        assert len(candidate_poles(params)) == 5
