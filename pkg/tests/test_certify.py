import json
from fractions import Fraction as Fr

import pytest
from click.testing import CliRunner

from curvedtwobody.certify import (CONCLUSION_CERTIFIED,
                                   CONCLUSION_DEGENERATE,
                                   CONCLUSION_NO_OBSTRUCTION, CertifyError,
                                   RunConfig, certify, parse_rational,
                                   render_report)
from curvedtwobody.cli import main as cli_main
from curvedtwobody.models import Potential, Space

ALL_CASES = [(Space.SPHERE, Potential.NEWTON),
             (Space.HYPERBOLIC, Potential.NEWTON),
             (Space.SPHERE, Potential.OSCILLATOR),
             (Space.HYPERBOLIC, Potential.OSCILLATOR)]

REFERENCE = {
    (Space.SPHERE, Potential.NEWTON): ("2", "1/2", "1", "0"),
    (Space.HYPERBOLIC, Potential.NEWTON): ("1", "1/2", "1", "-2"),
    (Space.SPHERE, Potential.OSCILLATOR): ("1", "1/2", "1", "-1"),
    (Space.HYPERBOLIC, Potential.OSCILLATOR): ("1", "1/2", "1", "-1"),
}


def make_config(space, pot, mu=None, **kw):
    # unit tests opt out of the randomized identity sampling (default 20)
    # unless they exercise it explicitly
    strength, mu_ref, p, eps = REFERENCE[(space, pot)]
    return RunConfig(space=space, potential=pot,
                     strength=parse_rational(kw.get("strength", strength)),
                     mu=parse_rational(mu if mu is not None else mu_ref),
                     p=parse_rational(kw.get("p", p)),
                     eps=parse_rational(kw.get("eps", eps)),
                     seed=kw.get("seed", 0),
                     identity_samples=kw.get("identity_samples", 0))


class TestParseRational:
    def test_fraction_strings(self):
        assert parse_rational("3/4") == Fr(3, 4)
        assert parse_rational("-2") == Fr(-2)
        assert parse_rational(5) == Fr(5)

    @pytest.mark.parametrize("bad", ["0.5", "1e-3", "2.0"])
    def test_decimals_rejected(self, bad):
        with pytest.raises(CertifyError):
            parse_rational(bad)


class TestCertify:
    @pytest.mark.parametrize("space,pot", ALL_CASES)
    def test_reference_certified(self, space, pot):
        cert = certify(make_config(space, pot))
        assert cert.conclusion == CONCLUSION_CERTIFIED
        assert cert.table_match is True
        assert cert.gauge_consistent is True
        assert cert.case1["count"] == 0
        assert cert.case1["pair_excluded"] is True
        assert cert.case2["found"] is False
        assert cert.case3_possible is False
        assert cert.verdict["identity_component_abelian"] is False

    def test_mu1_no_obstruction(self):
        cert = certify(make_config(Space.SPHERE, Potential.NEWTON, mu="1"))
        assert cert.conclusion == CONCLUSION_NO_OBSTRUCTION
        assert cert.case1["count"] == 2
        assert cert.verdict["classification"] == "DiagonalOrSmaller_Abelian"
        # the lemma hypotheses are violated at mu=1 and that is recorded,
        # not raised
        assert not cert.lemma["hypotheses_hold"]

    def test_degenerate_input(self):
        cert = certify(make_config(Space.HYPERBOLIC, Potential.OSCILLATOR, eps="0"))
        assert cert.conclusion == CONCLUSION_DEGENERATE
        assert cert.degenerate_guard

    def test_newton_certificate_carries_xi_leading(self):
        cert = certify(make_config(Space.SPHERE, Potential.NEWTON))
        assert cert.case2["xi"]
        rec = cert.case2["xi"][0]
        assert rec["num_degree"] == 6
        assert rec["num_leading"] is not None
        assert not rec["is_zero"]

    def test_identity_samples(self):
        cert = certify(make_config(Space.SPHERE, Potential.OSCILLATOR,
                                   identity_samples=3, seed=7))
        assert cert.identity_check == {"samples": 3, "matches": 3,
                                       "all_match": True}

    def test_spectrum_summary_has_six_points(self):
        cert = certify(make_config(Space.HYPERBOLIC, Potential.NEWTON))
        assert len(cert.spectrum) == 6
        assert cert.spectrum[-1]["location"] == "infinity"


class TestRenderReport:
    def test_json_round_trip(self):
        cert = certify(make_config(Space.SPHERE, Potential.NEWTON))
        payload = render_report(cert, "json")
        parsed = json.loads(payload)
        assert parsed == cert.to_dict()
        assert render_report(cert, "json") == payload

    def test_deterministic_bytes_for_same_seed(self):
        a = render_report(certify(make_config(Space.SPHERE, Potential.OSCILLATOR,
                                              seed=3, identity_samples=2)))
        b = render_report(certify(make_config(Space.SPHERE, Potential.OSCILLATOR,
                                              seed=3, identity_samples=2)))
        assert a == b

    def test_degenerate_text(self):
        cert = certify(make_config(Space.HYPERBOLIC, Potential.OSCILLATOR, eps="0"))
        text = render_report(cert, "text").decode()
        assert "Degenerate" in text
        assert "guard" in text

    def test_text_report_mentions_cases(self):
        cert = certify(make_config(Space.SPHERE, Potential.NEWTON))
        text = render_report(cert, "text").decode()
        assert "case I rational solutions: 0" in text
        assert "spherical Newton reality condition" in text
        assert "conclusion: NonintegrabilityCertified" in text

    def test_unknown_format(self):
        cert = certify(make_config(Space.SPHERE, Potential.NEWTON))
        with pytest.raises(CertifyError):
            render_report(cert, "yaml")


class TestRunConfig:
    def test_dict_round_trip(self):
        cfg = make_config(Space.SPHERE, Potential.NEWTON, seed=5)
        assert RunConfig.from_dict(cfg.to_dict()) == cfg

    def test_from_dict_rejects_decimal(self):
        data = make_config(Space.SPHERE, Potential.NEWTON).to_dict()
        data["mu"] = "0.5"
        with pytest.raises(CertifyError):
            RunConfig.from_dict(data)


class TestCli:
    def test_certify_json_stdout(self):
        runner = CliRunner()
        result = runner.invoke(cli_main, [
            "certify", "--space", "sphere", "--potential", "newton",
            "--strength", "2", "--mu", "1/2", "--p", "1", "--eps", "0",
            "--identity-samples", "2"])
        assert result.exit_code == 0
        data = json.loads(result.output)
        assert data["conclusion"] == "NonintegrabilityCertified"
        assert data["identity_check"]["all_match"] is True

    def test_certify_degenerate_exit_code(self):
        runner = CliRunner()
        result = runner.invoke(cli_main, [
            "certify", "--space", "hyperbolic", "--potential", "oscillator",
            "--strength", "1", "--mu", "1/2", "--p", "1", "--eps", "0"])
        assert result.exit_code == 1

    def test_certify_config_file(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({
            "space": "sphere", "potential": "oscillator", "strength": "1",
            "mu": "1", "p": "1", "eps": "-1", "identity_samples": 0}))
        out = tmp_path / "cert.json"
        runner = CliRunner()
        result = runner.invoke(cli_main, ["certify", "--config", str(cfg),
                                          "--out", str(out)])
        assert result.exit_code == 0
        assert json.loads(out.read_text())["conclusion"] == "NoObstructionFound"

    def test_missing_parameters(self):
        runner = CliRunner()
        result = runner.invoke(cli_main, ["certify", "--space", "sphere"])
        assert result.exit_code != 0
        assert "missing parameters" in result.output

    def test_simulate_writes_csv(self, tmp_path):
        out = tmp_path / "traj.csv"
        runner = CliRunner()
        result = runner.invoke(cli_main, [
            "simulate", "--space", "sphere", "--potential", "newton",
            "--strength", "1/4", "--mu", "1/2", "--p", "1/10", "--eps", "0",
            "--theta0", "1.4", "--p-theta", "0.02", "--p0", "0.08",
            "--p1", "0.04", "--p2", "0.45", "--t-end", "2", "--out", str(out)])
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report["energy_drift"] < 1e-10
        assert out.read_text().startswith("t,theta,p_theta,p0,p1,p2")

    def test_section_counts_crossings(self, tmp_path):
        out = tmp_path / "sec.csv"
        runner = CliRunner()
        result = runner.invoke(cli_main, [
            "section", "--space", "sphere", "--potential", "newton",
            "--strength", "1/4", "--mu", "1/2", "--p", "1/10", "--eps", "0",
            "--theta0", "1.4", "--p-theta", "0.02", "--p0", "0.08",
            "--p1", "0.04", "--p2", "0.45", "--t-end", "40", "--out", str(out)])
        assert result.exit_code == 0
        assert json.loads(result.output)["crossings"] >= 1
        assert out.read_text().splitlines()[0].endswith("crossing_index")

    def test_nve_chain_rule_report(self):
        runner = CliRunner()
        result = runner.invoke(cli_main, [
            "nve", "--space", "sphere", "--potential", "newton",
            "--strength", "2", "--mu", "1/2", "--p", "1", "--eps", "0",
            "--theta0", "1.0", "--t-end", "1"])
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report["chain_rule_residual"] < 1e-6
        assert report["samples"] >= 100

    def test_sweep(self, tmp_path):
        cfg = tmp_path / "sweep.json"
        cfg.write_text(json.dumps({"runs": [
            {"space": "sphere", "potential": "newton", "strength": "2",
             "mu": "1/2", "p": "1", "eps": "0", "identity_samples": 0},
            {"space": "hyperbolic", "potential": "newton", "strength": "1",
             "mu": "1/2", "p": "1", "eps": "-2", "identity_samples": 0},
        ]}))
        out_dir = tmp_path / "certs"
        runner = CliRunner()
        result = runner.invoke(cli_main, ["sweep", "--config", str(cfg),
                                          "--out-dir", str(out_dir)])
        assert result.exit_code == 0
        files = sorted(out_dir.iterdir())
        assert len(files) == 2
        for f in files:
            assert json.loads(f.read_text())["conclusion"] == "NonintegrabilityCertified"
