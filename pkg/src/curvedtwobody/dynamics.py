"""Numeric side: Lie-Poisson vector fields, trajectory integration with
invariant monitoring, geodesic base solutions, time-domain variational
equations, Poincare sections, and chart conversions.

Integrators are plain RK4 (fixed step) and an embedded RKF45 pair; no
structure preservation, because invariant drift is itself the evidence
the acceptance suite monitors.
"""
from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .models import (DomainError, HamiltonianKind, ModelParams, Potential,
                     ReducedHamiltonian, Space)


class DynamicsError(Exception):
    pass


class StepFailure(DynamicsError):
    """Integration aborted (coordinate singularity or tolerance failure)."""


class ChartDomainError(DynamicsError):
    """Requested chart conversion outside the chart domain."""


@dataclass(frozen=True)
class PhaseState:
    theta: float
    p_theta: float
    p0: float
    p1: float
    p2: float
    space: Space

    def casimir(self) -> float:
        if self.space is Space.SPHERE:
            return self.p0 ** 2 + self.p1 ** 2 + self.p2 ** 2
        return self.p0 ** 2 + self.p1 ** 2 - self.p2 ** 2

    def as_tuple(self) -> tuple:
        return (self.theta, self.p_theta, self.p0, self.p1, self.p2)


class PoissonStructure:
    """Bracket tables on (theta, p_theta, p0, p1, p2)."""

    def __init__(self, space: Space):
        self.space = space

    def matrix(self, x) -> list[list[float]]:
        _, _, p0, p1, p2 = x
        m = [[0.0] * 5 for _ in range(5)]
        m[0][1], m[1][0] = 1.0, -1.0
        if self.space is Space.SPHERE:
            # {p0,p1} = -p2, {p1,p2} = -p0, {p2,p0} = -p1
            m[2][3], m[3][2] = -p2, p2
            m[3][4], m[4][3] = -p0, p0
            m[4][2], m[2][4] = -p1, p1
        else:
            # {p0,p1} = p2, {p1,p2} = -p0, {p0,p2} = p1
            m[2][3], m[3][2] = p2, -p2
            m[3][4], m[4][3] = -p0, p0
            m[2][4], m[4][2] = p1, -p1
        return m

    def casimir(self, x) -> float:
        _, _, p0, p1, p2 = x
        if self.space is Space.SPHERE:
            return p0 * p0 + p1 * p1 + p2 * p2
        return p0 * p0 + p1 * p1 - p2 * p2


def vector_field(h: ReducedHamiltonian, x) -> tuple:
    """x_dot = Pi grad h for the 5-dim reduced chart; canonical equations for
    the 2-dim geodesic and 4-dim restricted charts."""
    try:
        g = h.grad(x)
    except DomainError as exc:
        raise StepFailure(str(exc)) from exc
    if h.dim == 2:
        return (g[1], -g[0])
    if h.dim == 4:
        return (g[1], -g[0], g[3], -g[2])
    theta, pt, p0, p1, p2 = x
    g_t, g_pt, g0, g1, g2 = g
    if h.params.space is Space.SPHERE:
        return (g_pt, -g_t,
                -p2 * g1 + p1 * g2,
                p2 * g0 - p0 * g2,
                -p1 * g0 + p0 * g1)
    return (g_pt, -g_t,
            p2 * g1 + p1 * g2,
            -p2 * g0 - p0 * g2,
            -p1 * g0 + p0 * g1)


@dataclass
class IntegrationOptions:
    step: float = 1e-3
    method: str = "rk4"              # "rk4" or "rkf45"
    rel_tol: float = 1e-10           # rkf45 local error control
    sample_every: int = 100
    casimir_abort: Optional[float] = 1e-6


@dataclass
class TrajectoryReport:
    times: list[float]
    states: list[tuple]
    energy_drift: float
    casimir_drift: float
    extra_drifts: dict[str, float]
    steps: int

    def final_state(self) -> tuple:
        return self.states[-1]


def _rk4_step(f, x, dt):
    k1 = f(x)
    k2 = f(tuple(xi + 0.5 * dt * ki for xi, ki in zip(x, k1)))
    k3 = f(tuple(xi + 0.5 * dt * ki for xi, ki in zip(x, k2)))
    k4 = f(tuple(xi + dt * ki for xi, ki in zip(x, k3)))
    return tuple(xi + dt / 6.0 * (a + 2 * b + 2 * c + d)
                 for xi, a, b, c, d in zip(x, k1, k2, k3, k4))


# Fehlberg 4(5) tableau
_RKF_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8, 3680 / 513, -845 / 4104),
    (-8 / 27, 2, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_RKF_B5 = (16 / 135, 0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_RKF_B4 = (25 / 216, 0, 1408 / 2565, 2197 / 4104, -1 / 5, 0)


def _rkf45_step(f, x, dt):
    ks = []
    for row in _RKF_A:
        xi = tuple(v + dt * sum(a * k[j] for a, k in zip(row, ks))
                   for j, v in enumerate(x))
        ks.append(f(xi))
    x5 = tuple(v + dt * sum(b * k[j] for b, k in zip(_RKF_B5, ks))
               for j, v in enumerate(x))
    x4 = tuple(v + dt * sum(b * k[j] for b, k in zip(_RKF_B4, ks))
               for j, v in enumerate(x))
    err = max(abs(a - b) for a, b in zip(x5, x4))
    return x5, err


def integrate(h: ReducedHamiltonian, x0, t_end: float,
              opts: Optional[IntegrationOptions] = None,
              extra_integrals: Optional[dict[str, Callable]] = None) -> TrajectoryReport:
    """Fixed-step RK4 (default) or adaptive RKF45 with drift monitoring.

    Drift metrics compare against the initial values of the Hamiltonian,
    the Casimir (5-dim charts), and any registered extra integrals."""
    opts = opts or IntegrationOptions()
    extra_integrals = extra_integrals or {}
    if isinstance(x0, PhaseState):
        x0 = x0.as_tuple()
    x = tuple(float(v) for v in x0)
    f = lambda state: vector_field(h, state)
    poisson = PoissonStructure(h.params.space) if h.dim == 5 else None

    e0 = h.value(x)
    c0 = poisson.casimir(x) if poisson else 0.0
    extras0 = {name: fn(x) for name, fn in extra_integrals.items()}
    times = [0.0]
    states = [x]
    e_drift = 0.0
    c_drift = 0.0
    x_drifts = {name: 0.0 for name in extras0}

    t = 0.0
    steps = 0
    dt = opts.step
    while t < t_end - 1e-15:
        dt_eff = min(dt, t_end - t)
        try:
            if opts.method == "rk4":
                x = _rk4_step(f, x, dt_eff)
            elif opts.method == "rkf45":
                while True:
                    xn, err = _rkf45_step(f, x, dt_eff)
                    scale = max(max(abs(v) for v in x), 1.0)
                    if err <= opts.rel_tol * scale or dt_eff < 1e-12:
                        x = xn
                        break
                    dt_eff *= 0.5
            else:
                raise DynamicsError(f"unknown method {opts.method!r}")
        except (DomainError, StepFailure, ValueError, OverflowError) as exc:
            raise StepFailure(
                f"integration failed at t={t:.6g}: {exc}") from exc
        t += dt_eff
        steps += 1
        try:
            e = h.value(x)
        except DomainError as exc:
            raise StepFailure(f"state left the chart at t={t:.6g}: {exc}") from exc
        e_drift = max(e_drift, abs(e - e0) / max(abs(e0), 1e-30))
        if poisson:
            c = poisson.casimir(x)
            c_drift = max(c_drift, abs(c - c0) / max(abs(c0), 1e-30))
            if opts.casimir_abort is not None and c_drift > opts.casimir_abort:
                raise StepFailure(
                    f"Casimir drift {c_drift:.3e} beyond {opts.casimir_abort:.1e} "
                    f"at t={t:.6g}: integration is untrustworthy")
        for name, fn in extra_integrals.items():
            v = fn(x)
            x_drifts[name] = max(x_drifts[name],
                                 abs(v - extras0[name]) / max(abs(extras0[name]), 1e-30))
        if steps % opts.sample_every == 0 or t >= t_end - 1e-15:
            times.append(t)
            states.append(x)
    return TrajectoryReport(times, states, e_drift, c_drift, x_drifts, steps)


# ---------------------------------------------------------------------------
# geodesic base trajectory and the time-domain variational equations
# ---------------------------------------------------------------------------


def gamma_initial_state(params: ModelParams, theta0: float, branch: int = 1) -> tuple:
    """(theta0, p_theta0) on the geodesic-solution energy surface fixed by eps.

    The base curve has p0 = p, p1 = p2 = 0 and its (theta, p_theta) motion is
    governed by the 1-dof Hamiltonian; eps selects the level through
    f(z) = cot/coth/tan^2/tanh^2(theta)."""
    s, mu, p, eps = map(float, (params.strength, params.mu, params.p, params.eps))
    if params.potential is Potential.NEWTON:
        f0 = (math.cos(theta0) / math.sin(theta0) if params.space is Space.SPHERE
              else math.cosh(theta0) / math.sinh(theta0))
        z2 = 2 * mu * (eps + f0) / s
    else:
        f0 = (math.tan(theta0) ** 2 if params.space is Space.SPHERE
              else math.tanh(theta0) ** 2)
        z2 = mu * (2 * eps - f0) / s
    if z2 < 0:
        raise StepFailure(
            f"theta0={theta0} is not on the eps={eps} level (z^2 = {z2:.3g} < 0)")
    z = branch * math.sqrt(z2)
    return (theta0, s * z - mu * p)


def gamma_trajectory(params: ModelParams, theta0: float, t_end: float,
                     step: float = 1e-3, branch: int = 1,
                     sample_every: int = 10) -> TrajectoryReport:
    """Integrate the 1-dof geodesic-solution Hamiltonian from theta0."""
    from .models import hamiltonian
    h0 = hamiltonian(HamiltonianKind.GAMMA_RESTRICTION, params)
    x0 = gamma_initial_state(params, theta0, branch)
    opts = IntegrationOptions(step=step, sample_every=sample_every)
    return integrate(h0, x0, t_end, opts)


def nve_rhs(params: ModelParams, theta: float, p_theta: float,
            p1: float, p2: float, variant: str = "reduced",
            omega: float = 1.0) -> tuple[float, float]:
    """Right-hand side of the time-domain normal variational equations."""
    mu, p = float(params.mu), float(params.p)
    if params.space is Space.SPHERE:
        sn, cs = math.sin(theta), math.cos(theta)
    else:
        sn, cs = math.sinh(theta), math.cosh(theta)
    ct = cs / sn
    if variant == "restricted":
        if params.space is not Space.SPHERE:
            raise DynamicsError("restricted variational equations are spherical")
        return (-omega * ct * p1 + p2 / (sn * sn),
                omega * p_theta * p1 + omega * ct * p2)
    if params.space is Space.SPHERE:
        return (-p * ct * p1 + (2 * p + p_theta - p / (mu * sn * sn)) * p2,
                -p_theta * p1 + p * ct * p2)
    return (-p * ct * p1 - (2 * p + p_theta + p / (mu * sn * sn)) * p2,
            -p_theta * p1 + p * ct * p2)


def nve_time_domain(params: ModelParams, gamma_report: TrajectoryReport,
                    initial_variation: tuple[float, float],
                    step: float = 1e-3, variant: str = "reduced",
                    omega: float = 1.0) -> list[tuple[float, float, float]]:
    """Evolve (p1, p2) along the supplied geodesic base trajectory.

    The base curve is re-integrated jointly with the linear variational
    system (same RK4 step), and the variation is sampled at the supplied
    report's times."""
    from .models import hamiltonian
    h0 = hamiltonian(HamiltonianKind.GAMMA_RESTRICTION, params)

    def f(x):
        theta, pt, p1, p2 = x
        base = vector_field(h0, (theta, pt))
        lin = nve_rhs(params, theta, pt, p1, p2, variant, omega)
        return (base[0], base[1], lin[0], lin[1])

    theta0, pt0 = gamma_report.states[0][0], gamma_report.states[0][1]
    x = (theta0, pt0, float(initial_variation[0]), float(initial_variation[1]))
    out = [(0.0, x[2], x[3])]
    t = 0.0
    targets = list(gamma_report.times[1:])
    for target in targets:
        while t < target - 1e-12:
            dt = min(step, target - t)
            x = _rk4_step(f, x, dt)
            t += dt
        out.append((t, x[2], x[3]))
    return out


# ---------------------------------------------------------------------------
# Poincare sections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SectionPoint:
    t: float
    state: tuple
    crossing_index: int


def poincare_section(h: ReducedHamiltonian, x0, t_end: float,
                     coordinate: int = 3, value: float = 0.0,
                     direction: int = 1, step: float = 1e-3,
                     residual_tol: float = 1e-10,
                     max_points: int = 100000) -> list[SectionPoint]:
    """Crossings of x[coordinate] = value with the requested sign of the
    derivative, located by bisection on the integration step."""
    if isinstance(x0, PhaseState):
        x0 = x0.as_tuple()
    x = tuple(float(v) for v in x0)
    f = lambda state: vector_field(h, state)
    t = 0.0
    out = []
    s_prev = x[coordinate] - value
    while t < t_end and len(out) < max_points:
        x_new = _rk4_step(f, x, step)
        t_new = t + step
        s_new = x_new[coordinate] - value
        if s_prev * s_new < 0 and (s_new - s_prev) * direction > 0:
            lo_t, lo_x = t, x
            hi_t = t_new
            for _ in range(200):
                mid_dt = (hi_t - lo_t) / 2
                x_mid = _rk4_step(f, lo_x, mid_dt)
                s_mid = x_mid[coordinate] - value
                if abs(s_mid) < residual_tol:
                    out.append(SectionPoint(lo_t + mid_dt, x_mid, len(out)))
                    break
                if (x_mid[coordinate] - value) * (lo_x[coordinate] - value) > 0:
                    lo_t, lo_x = lo_t + mid_dt, x_mid
                else:
                    hi_t = lo_t + mid_dt
            else:
                out.append(SectionPoint(lo_t, lo_x, len(out)))
        x, t, s_prev = x_new, t_new, s_new
    return out


# ---------------------------------------------------------------------------
# chart conversions
# ---------------------------------------------------------------------------


def to_cylinder(state: PhaseState) -> tuple[float, float]:
    """(phi, p_phi) with p0 = m sin phi, p1 = m cos phi, p_phi = p2."""
    if state.space is Space.SPHERE:
        gamma_sq = state.casimir()
        if state.p2 * state.p2 >= gamma_sq:
            raise ChartDomainError("|p2| must stay below gamma on the sphere")
    else:
        if state.casimir() <= 0:
            raise ChartDomainError("cylinder chart needs gamma > 0")
    phi = math.atan2(state.p0, state.p1)
    return (phi, state.p2)


def from_cylinder(phi: float, p_phi: float, casimir: float, space: Space,
                  theta: float = 1.0, p_theta: float = 0.0) -> PhaseState:
    if space is Space.SPHERE:
        m2 = casimir - p_phi * p_phi
        if m2 < 0:
            raise ChartDomainError("|p_phi| must stay below gamma on the sphere")
    else:
        m2 = casimir + p_phi * p_phi
        if m2 < 0:
            raise ChartDomainError("gamma + p_phi^2 must be nonnegative")
    m = math.sqrt(m2)
    return PhaseState(theta, p_theta, m * math.sin(phi), m * math.cos(phi),
                      p_phi, space)


def to_r_chart(theta: float, p_theta: float, space: Space) -> tuple[float, float]:
    """r = tan(theta/2) resp. tanh(theta/2); p_theta = (1 +- r^2) p_r / 2."""
    if space is Space.SPHERE:
        if not 0 < theta < math.pi:
            raise ChartDomainError("theta outside (0, pi)")
        r = math.tan(theta / 2)
        return (r, 2 * p_theta / (1 + r * r))
    if theta <= 0:
        raise ChartDomainError("theta must be positive")
    r = math.tanh(theta / 2)
    return (r, 2 * p_theta / (1 - r * r))


def from_r_chart(r: float, p_r: float, space: Space) -> tuple[float, float]:
    if space is Space.SPHERE:
        if r <= 0:
            raise ChartDomainError("r must be positive on the sphere chart")
        return (2 * math.atan(r), (1 + r * r) * p_r / 2)
    if not 0 < r < 1:
        raise ChartDomainError("r must lie in (0, 1) on the hyperbolic chart")
    return (2 * math.atanh(r), (1 - r * r) * p_r / 2)


def value_in_r_chart(params: ModelParams, r: float, p_r: float,
                     p0: float, p1: float, p2: float) -> float:
    """The original-chart Hamiltonian (time rescaled, Casimir constant
    dropped), for cross-chart agreement checks."""
    from .models import potential_value
    mu = float(params.mu)
    if params.space is Space.SPHERE:
        theta = 2 * math.atan(r)
        om = (1 + r * r)
        kinetic = om * om / (8 * mu) * (p_r * p_r + p2 * p2 / (r * r))
        coupling = om * p_r * p0 / 2 - p2 * p2 + (1 - r * r) * p1 * p2 / (2 * r)
    else:
        theta = 2 * math.atanh(r)
        om = (1 - r * r)
        kinetic = om * om / (8 * mu) * (p_r * p_r + p2 * p2 / (r * r))
        coupling = om * p_r * p0 / 2 + p2 * p2 + (1 + r * r) * p1 * p2 / (2 * r)
    return kinetic + coupling + potential_value(params, theta)


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------


def _atomic_write(path: str, content: str):
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_to_csv(report: TrajectoryReport, path: str):
    lines = ["t,theta,p_theta,p0,p1,p2"]
    for t, state in zip(report.times, report.states):
        padded = tuple(state) + (0.0,) * (5 - len(state))
        lines.append(",".join(f"{v:.17g}" for v in (t,) + padded))
    _atomic_write(path, "\n".join(lines) + "\n")


def section_to_csv(points: Sequence[SectionPoint], path: str):
    lines = ["t,theta,p_theta,p0,p1,p2,crossing_index"]
    for pt in points:
        padded = tuple(pt.state) + (0.0,) * (5 - len(pt.state))
        lines.append(",".join(f"{v:.17g}" for v in (pt.t,) + padded)
                     + f",{pt.crossing_index}")
    _atomic_write(path, "\n".join(lines) + "\n")
