"""Command-line interface: certify, simulate, section, nve, sweep.

Exit codes: 0 completed (any conclusion), 1 degenerate input, 2 internal
invariant violation.
"""
from __future__ import annotations

import concurrent.futures
import json
import math
import os
import sys
import tempfile

import click

from . import certify as certify_mod
from . import dynamics, models
from .certify import (CONCLUSION_DEGENERATE, InvariantViolation, RunConfig,
                      render_report)
from .dynamics import IntegrationOptions, StepFailure
from .models import HamiltonianKind, Potential, Space

EXIT_DEGENERATE = 1
EXIT_INVARIANT = 2


def _atomic_write_bytes(path: str, data: bytes):
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parameter_options(fn):
    fn = click.option("--space", type=click.Choice([s.value for s in Space]),
                      default=None, help="sphere or hyperbolic")(fn)
    fn = click.option("--potential", type=click.Choice([p.value for p in Potential]),
                      default=None)(fn)
    fn = click.option("--strength", default=None,
                      help="alpha (Newton) or beta (oscillator), as 'n/d'")(fn)
    fn = click.option("--mu", default=None, help="mass-ratio parameter, 'n/d'")(fn)
    fn = click.option("--p", default=None, help="geodesic momentum, 'n/d'")(fn)
    fn = click.option("--eps", default=None, help="energy parameter, 'n/d'")(fn)
    fn = click.option("--config", "config_path", default=None,
                      type=click.Path(exists=True), help="JSON run config")(fn)
    return fn


def _build_config(space, potential, strength, mu, p, eps, config_path,
                  seed=0, identity_samples=0) -> RunConfig:
    data = {}
    if config_path:
        with open(config_path) as fh:
            data = json.load(fh)
    for key, val in (("space", space), ("potential", potential),
                     ("strength", strength), ("mu", mu), ("p", p), ("eps", eps)):
        if val is not None:
            data[key] = val
    missing = [k for k in ("space", "potential", "strength", "mu", "p", "eps")
               if k not in data]
    if missing:
        raise click.UsageError(f"missing parameters: {', '.join(missing)}")
    data.setdefault("seed", seed)
    data.setdefault("identity_samples", identity_samples)
    return RunConfig.from_dict(data)


def _params_from_config(cfg: RunConfig):
    return models.derive_params(cfg.space, cfg.potential, cfg.strength,
                                cfg.mu, cfg.p, cfg.eps)


@click.group()
def main():
    """Exact nonintegrability certificates and simulation for the reduced
    two-body problem on the sphere and the hyperbolic plane."""


@main.command("certify")
@_parameter_options
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--identity-samples", default=20, type=int, show_default=True,
              help="extra random parameter sets for the closed-form identity check")
@click.option("--out", "out_path", default=None, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["json", "text"]),
              default="json", show_default=True)
def certify_cmd(space, potential, strength, mu, p, eps, config_path, seed,
                identity_samples, out_path, fmt):
    """Run the full obstruction pipeline and emit a certificate."""
    cfg = _build_config(space, potential, strength, mu, p, eps, config_path,
                        seed, identity_samples)
    try:
        cert = certify_mod.certify(cfg)
    except InvariantViolation as exc:
        click.echo(f"internal invariant violation: {exc}", err=True)
        sys.exit(EXIT_INVARIANT)
    payload = render_report(cert, fmt)
    if out_path:
        _atomic_write_bytes(out_path, payload)
    else:
        click.echo(payload.decode(), nl=False)
    if cert.conclusion == CONCLUSION_DEGENERATE:
        sys.exit(EXIT_DEGENERATE)


@main.command("simulate")
@_parameter_options
@click.option("--theta0", type=float, required=True)
@click.option("--p-theta", type=float, default=0.0, show_default=True)
@click.option("--p0", type=float, default=0.0, show_default=True)
@click.option("--p1", type=float, default=0.0, show_default=True)
@click.option("--p2", type=float, default=0.3, show_default=True)
@click.option("--t-end", type=float, default=100.0, show_default=True)
@click.option("--step", type=float, default=1e-3, show_default=True)
@click.option("--method", type=click.Choice(["rk4", "rkf45"]), default="rk4",
              show_default=True)
@click.option("--free", is_flag=True, help="drop the potential (V = 0)")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="trajectory CSV path")
def simulate_cmd(space, potential, strength, mu, p, eps, config_path, theta0,
                 p_theta, p0, p1, p2, t_end, step, method, free, out_path):
    """Integrate the reduced Hamiltonian flow and report invariant drift."""
    cfg = _build_config(space, potential, strength, mu, p, eps, config_path)
    try:
        params = _params_from_config(cfg)
    except models.DegenerateParameters as exc:
        click.echo(f"degenerate parameters: {exc.guard}", err=True)
        sys.exit(EXIT_DEGENERATE)
    kind = HamiltonianKind.FULL_SPHERE if params.space is Space.SPHERE \
        else HamiltonianKind.FULL_HYPERBOLIC
    h = models.hamiltonian(kind, params, include_potential=not free)
    x0 = (theta0, p_theta, p0, p1, p2)
    try:
        rep = dynamics.integrate(
            h, x0, t_end, IntegrationOptions(step=step, method=method))
    except StepFailure as exc:
        click.echo(f"integration aborted: {exc}", err=True)
        sys.exit(EXIT_DEGENERATE)
    if out_path:
        dynamics.trajectory_to_csv(rep, out_path)
    click.echo(json.dumps({
        "steps": rep.steps,
        "energy_drift": rep.energy_drift,
        "casimir_drift": rep.casimir_drift,
        "samples": len(rep.times),
    }, sort_keys=True))


@main.command("section")
@_parameter_options
@click.option("--theta0", type=float, required=True)
@click.option("--p-theta", type=float, default=0.0, show_default=True)
@click.option("--p0", type=float, default=0.0, show_default=True)
@click.option("--p1", type=float, default=0.0, show_default=True)
@click.option("--p2", type=float, default=0.3, show_default=True)
@click.option("--t-end", type=float, default=100.0, show_default=True)
@click.option("--step", type=float, default=1e-3, show_default=True)
@click.option("--coordinate", type=int, default=3, show_default=True,
              help="state index defining the section (default p1)")
@click.option("--value", type=float, default=0.0, show_default=True)
@click.option("--direction", type=click.Choice(["1", "-1"]), default="1",
              show_default=True)
@click.option("--free", is_flag=True)
@click.option("--out", "out_path", default=None, type=click.Path())
def section_cmd(space, potential, strength, mu, p, eps, config_path, theta0,
                p_theta, p0, p1, p2, t_end, step, coordinate, value, direction,
                free, out_path):
    """Poincare section crossings exported as CSV."""
    cfg = _build_config(space, potential, strength, mu, p, eps, config_path)
    try:
        params = _params_from_config(cfg)
    except models.DegenerateParameters as exc:
        click.echo(f"degenerate parameters: {exc.guard}", err=True)
        sys.exit(EXIT_DEGENERATE)
    kind = HamiltonianKind.FULL_SPHERE if params.space is Space.SPHERE \
        else HamiltonianKind.FULL_HYPERBOLIC
    h = models.hamiltonian(kind, params, include_potential=not free)
    try:
        points = dynamics.poincare_section(
            h, (theta0, p_theta, p0, p1, p2), t_end, coordinate=coordinate,
            value=value, direction=int(direction), step=step)
    except StepFailure as exc:
        click.echo(f"integration aborted: {exc}", err=True)
        sys.exit(EXIT_DEGENERATE)
    if out_path:
        dynamics.section_to_csv(points, out_path)
    click.echo(json.dumps({"crossings": len(points)}))


@main.command("nve")
@_parameter_options
@click.option("--theta0", type=float, required=True)
@click.option("--branch", type=click.Choice(["1", "-1"]), default="1",
              show_default=True)
@click.option("--t-end", type=float, default=1.0, show_default=True)
@click.option("--step", type=float, default=1e-3, show_default=True)
@click.option("--dp1", type=float, default=1.0, show_default=True)
@click.option("--dp2", type=float, default=0.0, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="CSV of t, p1, p2 samples")
def nve_cmd(space, potential, strength, mu, p, eps, config_path, theta0,
            branch, t_end, step, dp1, dp2, out_path):
    """Integrate the geodesic base curve and the time-domain variational
    equations along it; report the chain-rule consistency with the exact
    z-domain system."""
    cfg = _build_config(space, potential, strength, mu, p, eps, config_path)
    try:
        params = _params_from_config(cfg)
    except models.DegenerateParameters as exc:
        click.echo(f"degenerate parameters: {exc.guard}", err=True)
        sys.exit(EXIT_DEGENERATE)
    try:
        base = dynamics.gamma_trajectory(params, theta0, t_end, step=step,
                                         branch=int(branch), sample_every=10)
        variation = dynamics.nve_time_domain(params, base, (dp1, dp2), step=step)
    except StepFailure as exc:
        click.echo(f"integration aborted: {exc}", err=True)
        sys.exit(EXIT_DEGENERATE)
    # chain-rule residual against the exact z-domain coefficients
    system = models.build_system(params)
    s, mu_f, p_f = map(float, (params.strength, params.mu, params.p))
    worst = 0.0
    for (theta, pt), (_, v1, v2) in zip(base.states, variation):
        z = (pt + mu_f * p_f) / s
        zdot = -models.potential_slope(params, theta) / s
        a_val = system.A.embed_complex(complex(z, 0)).real
        c_val = system.C.embed_complex(complex(z, 0)).real
        dt1, dt2 = dynamics.nve_rhs(params, theta, pt, v1, v2)
        if system.weight is None:
            b_val = system.B.embed_complex(complex(z, 0)).real
            zd1 = (a_val * v1 + b_val * v2) * zdot
            zd2 = (c_val * v1 - a_val * v2) * zdot
        else:
            w = math.tan(theta) if params.space is Space.SPHERE else math.tanh(theta)
            b_val = system.B.embed_complex(complex(z, 0)).real
            zd1 = (a_val * v1 + b_val * w * v2) * zdot
            zd2 = (c_val * w * v1 - a_val * v2) * zdot
        scale = max(1.0, abs(dt1), abs(dt2))
        worst = max(worst, abs(dt1 - zd1) / scale, abs(dt2 - zd2) / scale)
    if out_path:
        lines = ["t,p1,p2"]
        for t, v1, v2 in variation:
            lines.append(f"{t:.17g},{v1:.17g},{v2:.17g}")
        _atomic_write_bytes(out_path, ("\n".join(lines) + "\n").encode())
    click.echo(json.dumps({
        "samples": len(variation),
        "chain_rule_residual": worst,
        "base_energy_drift": base.energy_drift,
    }, sort_keys=True))


def _run_one(run_data: dict, out_dir: str, index: int) -> str:
    cfg = RunConfig.from_dict(run_data)
    cert = certify_mod.certify(cfg)
    name = (f"{index:03d}_{cfg.space.value}_{cfg.potential.value}.json")
    path = os.path.join(out_dir, name)
    _atomic_write_bytes(path, render_report(cert, "json"))
    return f"{name}: {cert.conclusion}"


@main.command("sweep")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="JSON with a 'runs' list of parameter dicts")
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--jobs", type=int, default=1, show_default=True)
def sweep_cmd(config_path, out_dir, jobs):
    """Certify many parameter sets; one JSON certificate per run."""
    with open(config_path) as fh:
        data = json.load(fh)
    runs = data.get("runs", [])
    os.makedirs(out_dir, exist_ok=True)
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_one, run, out_dir, i)
                       for i, run in enumerate(runs)]
            for fut in concurrent.futures.as_completed(futures):
                click.echo(fut.result())
    else:
        for i, run in enumerate(runs):
            click.echo(_run_one(run, out_dir, i))


if __name__ == "__main__":
    main()
