"""Certificate assembly: run the full obstruction pipeline for one
parameter set and emit a machine-readable verdict record.

The conclusion field follows the contrapositive of the abelian-identity-
component requirement: NonintegrabilityCertified if and only if the
collected evidence forces a non-abelian identity component, and only with
the four-part soundness gate (table match, case-I count, case-II absence,
case-III impossibility) recorded alongside.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import kovacic, models
from .exactfield import TowerScalar
from .linode import (SingularitySpectrum, reduce_to_second_order,
                     singularity_spectrum, to_normal_form,
                     verify_gauge_transform)
from .models import (DegenerateParameters, HypothesisViolated,
                     Potential, Space)
from .ratcalc import RatFunc


class CertifyError(Exception):
    pass


class InvariantViolation(CertifyError):
    """The evidence and the verdict disagree: an internal bug, never an input
    problem."""


CONCLUSION_CERTIFIED = "NonintegrabilityCertified"
CONCLUSION_NO_OBSTRUCTION = "NoObstructionFound"
CONCLUSION_DEGENERATE = "Degenerate"


def _frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text) -> Fraction:
    """Exact 'n/d' (or integer) strings only; decimals are rejected."""
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if not isinstance(text, str) or "." in text or "e" in text.lower():
        raise CertifyError(f"rational parameters must be exact 'n/d' strings: {text!r}")
    return Fraction(text)


@dataclass(frozen=True)
class RunConfig:
    space: Space
    potential: Potential
    strength: Fraction
    mu: Fraction
    p: Fraction
    eps: Fraction
    seed: int = 0
    identity_samples: int = 20

    @staticmethod
    def from_dict(data: dict) -> RunConfig:
        return RunConfig(
            space=Space(data["space"]),
            potential=Potential(data["potential"]),
            strength=parse_rational(data["strength"]),
            mu=parse_rational(data["mu"]),
            p=parse_rational(data["p"]),
            eps=parse_rational(data["eps"]),
            seed=int(data.get("seed", 0)),
            identity_samples=int(data.get("identity_samples", 20)))

    def to_dict(self) -> dict:
        return {"space": self.space.value, "potential": self.potential.value,
                "strength": _frac_str(self.strength), "mu": _frac_str(self.mu),
                "p": _frac_str(self.p), "eps": _frac_str(self.eps),
                "seed": self.seed, "identity_samples": self.identity_samples}


@dataclass
class Certificate:
    config: RunConfig
    conclusion: str
    degenerate_guard: Optional[str] = None
    params: Optional[dict] = None
    spectrum: list = field(default_factory=list)
    table_match: Optional[bool] = None
    gauge_consistent: Optional[bool] = None
    lemma: Optional[dict] = None
    case1: Optional[dict] = None
    case2: Optional[dict] = None
    case3_possible: Optional[bool] = None
    verdict: Optional[dict] = None
    identity_check: Optional[dict] = None

    def to_dict(self) -> dict:
        out = {
            "params": self.params if self.params is not None
            else {"config": self.config.to_dict()},
            "spectrum": self.spectrum,
            "table_match": self.table_match,
            "gauge_consistent": self.gauge_consistent,
            "lemma": self.lemma,
            "case1": self.case1,
            "case2": self.case2,
            "case3_possible": self.case3_possible,
            "verdict": self.verdict,
            "conclusion": self.conclusion,
            "seed": self.config.seed,
        }
        if self.degenerate_guard is not None:
            out["degenerate_guard"] = self.degenerate_guard
        if self.identity_check is not None:
            out["identity_check"] = self.identity_check
        return out


def _scalar_str(s: TowerScalar) -> str:
    return s.render()


def _spectrum_summary(spec: SingularitySpectrum) -> list:
    out = []
    for pt in spec.points:
        out.append({
            "location": "infinity" if pt.is_infinity else _scalar_str(pt.location),
            "order": pt.order,
            "alpha": _scalar_str(pt.alpha),
            "delta_squared": _scalar_str(pt.delta_squared),
            "delta_rational": _frac_str(pt.delta_rational)
            if pt.delta_rational is not None else None,
            "exponents": [_frac_str(e) for e in pt.exponents]
            if pt.exponents is not None else None,
        })
    return out


def _lemma_summary(report: models.LemmaReport) -> dict:
    return {
        "index": report.lemma,
        "hypotheses_hold": report.hypotheses_hold,
        "failures": list(report.failures),
        "all_nonreal": report.all_nonreal,
        "identity_checked": report.identity_checked,
        "alphas": [{"index": a.index, "exact": a.exact,
                    "imag_exact": _frac_str(a.imag_part) if a.imag_part is not None else None,
                    "imag_float": repr(a.imag_float), "nonreal": a.nonreal}
                   for a in report.alphas],
    }


def _gauge_log_derivative(system, ctx) -> RatFunc:
    half = RatFunc.constant(ctx, Fraction(1, 2))
    quarter = RatFunc.constant(ctx, Fraction(1, 4))
    h = half * system.C.derivative() / system.C
    if system.weight is not None:
        h = h + quarter * system.weight.derivative() / system.weight
    return h


def certify(config: RunConfig) -> Certificate:
    """Full pipeline: parameters -> system -> normal form -> closed-form
    match -> spectrum -> lemma -> case I / product test -> case II -> case
    III screen -> classification -> conclusion."""
    try:
        params = models.derive_params(config.space, config.potential,
                                      config.strength, config.mu,
                                      config.p, config.eps)
    except DegenerateParameters as exc:
        return Certificate(config, CONCLUSION_DEGENERATE, degenerate_guard=exc.guard)

    system = models.build_system(params)
    ode = reduce_to_second_order(system)
    normal = to_normal_form(ode)
    r = normal.r
    ctx = params.ctx

    table = models.closed_form_r(params)
    table_match = (r == table.reconstruct(ctx))
    gauge_ok = verify_gauge_transform(normal, ode,
                                      _gauge_log_derivative(system, ctx))

    try:
        poles = models.detect_poles(params, r)
    except DegenerateParameters as exc:
        return Certificate(config, CONCLUSION_DEGENERATE, degenerate_guard=exc.guard)
    spec = singularity_spectrum(normal, poles)

    try:
        lemma_report = models.lemma_condition(params)
    except HypothesisViolated as exc:
        lemma_report = exc.report
    lemma_summary = _lemma_summary(lemma_report)

    case1 = kovacic.case1_search(normal, spec)
    pair = kovacic.pair_exclusion(normal, spec)
    esets = kovacic.e_sets(spec)
    cands = kovacic.candidates(esets)
    case2 = None
    xi_records = []
    for cand in cands:
        th = kovacic.theta(ctx, cand)
        xi_val = kovacic.xi(normal, th)
        xi_records.append({
            "candidate": cand.render(),
            "is_zero": xi_val.is_zero(),
            "num_degree": xi_val.num.degree(),
            "num_leading": _scalar_str(xi_val.num.leading())
            if not xi_val.is_zero() else None,
        })
        if case2 is None:
            case2 = kovacic.search_P(normal, cand)
    case_three = kovacic.case3_possible(spec)
    verdict = kovacic.classify(normal, spec, case1, case2, case_three,
                               pair.excluded)

    certified = verdict.identity_component_abelian is False
    gate = (table_match
            and len(case1) <= 1
            and case2 is None
            and not case_three)
    if certified and not gate:
        raise InvariantViolation(
            "non-abelian verdict without the full soundness gate: "
            f"table_match={table_match}, case1={len(case1)}, "
            f"case2={case2 is not None}, case3={case_three}")
    conclusion = CONCLUSION_CERTIFIED if certified else CONCLUSION_NO_OBSTRUCTION

    cert = Certificate(
        config=config,
        conclusion=conclusion,
        params={
            "space": params.space.value,
            "potential": params.potential.value,
            "strength": _frac_str(params.strength),
            "mu": _frac_str(params.mu),
            "p": _frac_str(params.p),
            "eps": _frac_str(params.eps),
            "kappa2": params.kappa2.render(),
            "lambda2": params.lambda2.render(),
            "z0": _frac_str(params.z0),
            "gamma_data": _frac_str(params.gamma_data),
        },
        spectrum=_spectrum_summary(spec),
        table_match=table_match,
        gauge_consistent=gauge_ok,
        lemma=lemma_summary,
        case1={
            "count": len(case1),
            "solutions": [{
                "omega": sol.omega.render(),
                "P_degree": sol.P.degree(),
                "exponents": [[_scalar_str(loc), _frac_str(rho)]
                              for loc, rho in sol.exponent_choices],
                "infinity_exponent": _frac_str(sol.infinity_exponent),
            } for sol in case1],
            "pair_excluded": pair.excluded,
            "product_candidates": [{
                "poly_degree": c.poly_degree,
                "solvable": c.solvable,
                "residual_degree": c.residual_num_degree,
                "residual_leading": _scalar_str(c.residual_leading)
                if c.residual_leading is not None else None,
            } for c in pair.candidates],
        },
        case2={
            "e_sets": [{"location": "infinity" if pt.is_infinity
                        else _scalar_str(pt.location),
                        "set": list(menu)} for pt, menu in esets],
            "candidates": [c.render() for c in cands],
            "found": case2 is not None,
            "P_degree": case2.P.degree() if case2 is not None else None,
            "xi": xi_records,
        },
        case3_possible=case_three,
        verdict={
            "classification": verdict.classification.value,
            "identity_component_abelian": verdict.identity_component_abelian,
            "notes": list(verdict.notes),
        },
    )
    if config.identity_samples > 0:
        rng = random.Random(config.seed)
        matches = 0
        for _ in range(config.identity_samples):
            sample = models.random_admissible_params(config.space,
                                                     config.potential, rng)
            rr = to_normal_form(reduce_to_second_order(
                models.build_system(sample))).r
            if rr == models.closed_form_r(sample).reconstruct(sample.ctx):
                matches += 1
        cert.identity_check = {"samples": config.identity_samples,
                               "matches": matches,
                               "all_match": matches == config.identity_samples}
    return cert


def render_report(cert: Certificate, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(cert.to_dict(), sort_keys=True, indent=2) + "\n").encode()
    if fmt != "text":
        raise CertifyError(f"unknown format {fmt!r}")
    lines = [f"conclusion: {cert.conclusion}"]
    if cert.degenerate_guard is not None:
        lines.append(f"degenerate guard: {cert.degenerate_guard}")
        lines.append("")
        return ("\n".join(lines) + "\n").encode()
    p = cert.params
    lines += [
        f"case: {p['space']} / {p['potential']} potential",
        f"parameters: strength={p['strength']} mu={p['mu']} p={p['p']} eps={p['eps']}",
        f"derived: kappa^2 = {p['kappa2']}, lambda^2 = {p['lambda2']}, z0 = {p['z0']}",
        f"closed-form table match: {cert.table_match}",
        f"gauge consistency: {cert.gauge_consistent}",
        "",
        "singular points (location | order | delta^2 | exponents):",
    ]
    for pt in cert.spectrum:
        expo = ", ".join(pt["exponents"]) if pt["exponents"] else "irrational pair"
        lines.append(f"  {pt['location']} | {pt['order']} | "
                     f"{pt['delta_squared']} | {expo}")
    lem = cert.lemma
    names = {1: "spherical Newton reality condition",
             2: "hyperbolic Newton reality condition",
             3: "oscillator reality condition"}
    lines += [
        "",
        f"{names.get(lem['index'], 'reality condition')}: "
        f"hypotheses {'hold' if lem['hypotheses_hold'] else 'violated'}"
        + (f" ({'; '.join(lem['failures'])})" if lem["failures"] else ""),
        f"  relevant second-order coefficients non-real: {lem['all_nonreal']}",
        "",
        f"case I rational solutions: {cert.case1['count']}",
        f"product-of-solutions excluded: {cert.case1['pair_excluded']}",
        f"case II auxiliary polynomial found: {cert.case2['found']}",
    ]
    for rec in cert.case2["xi"]:
        if rec["is_zero"]:
            lines.append(f"  {rec['candidate']}: Xi = 0")
        else:
            lines.append(f"  {rec['candidate']}: Xi numerator degree "
                         f"{rec['num_degree']}, leading {rec['num_leading']}")
    lines += [
        f"case III possible: {cert.case3_possible}",
        "",
        f"classification: {cert.verdict['classification']}",
        f"identity component abelian: {cert.verdict['identity_component_abelian']}",
    ]
    for note in cert.verdict["notes"]:
        lines.append(f"  note: {note}")
    if cert.identity_check is not None:
        lines.append(f"identity samples: {cert.identity_check['matches']}"
                     f"/{cert.identity_check['samples']} matched")
    lines.append(f"conclusion: {cert.conclusion}")
    return ("\n".join(lines) + "\n").encode()
