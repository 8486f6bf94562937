"""Analysis constants (beta1, beta2, nu, deltas, good-event probability
lower bounds, Lyapunov values) and inequality verifiers for recorded traces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

from .errors import EpsGOutOfRange, MalformedTrace
from .geometry import Polytope, geometry_constants
from .objectives import QuadraticObjective, max_abs_value


@dataclass(frozen=True)
class AnalysisConstants:
    """All constants the convergence analysis attaches to one problem at one
    target accuracy epsilon and away-step threshold eps_g."""

    epsilon: float
    eps_g: float
    D: float
    L: float
    mu: float
    M: float
    N: int
    omega: float
    beta1: float
    beta2: float
    nu: float
    delta_S: float
    delta_A: float
    pg_standard: float
    pg_away: float


def compute_constants(
    obj: QuadraticObjective,
    P: Polytope,
    epsilon: float,
    eps_g: float | None = None,
) -> AnalysisConstants:
    """Evaluate every analysis constant for the given problem.

    beta1 = min(eps/(8LD^2), 1/4); beta2 is the smaller of the maximal-step
    and interior-step contraction coefficients; nu, delta_A follow the
    closed-form parameter choice; the p_g values are the good-event
    probability lower bounds for the two algorithms. M is the bound
    max(max_X |f|, 1), computed by vertex scan.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    geo = geometry_constants(P)
    D, N, omega = geo.D, geo.N, geo.omega
    if eps_g is None:
        eps_g = 1.0 / (8.0 * D)
    if not 0.0 < eps_g < 1.0 / (4.0 * D):
        raise EpsGOutOfRange(f"eps_g={eps_g} outside (0, {1.0 / (4.0 * D)})")
    L, mu = obj.L, obj.mu
    M = max(max_abs_value(obj, P), 1.0)

    beta1 = min(epsilon / (8.0 * L * D * D), 0.25)
    half_minus = 0.5 - 2.0 * eps_g * D
    beta2 = min(
        half_minus / (1.0 + 2.0 * eps_g * D),
        (omega / N) ** 2 * mu * half_minus / (8.0 * L * D * D * (2.0 * eps_g * D + 1.0) ** 2),
    )
    nu = 1.0 / (1.0 + beta2 * epsilon / 2.0)
    delta_S = beta1 * epsilon / 2.0
    delta_A = (beta2 * epsilon / 2.0) / (2.0 + beta2 * epsilon)
    assert 0.0 < delta_A < min(nu * beta2 * epsilon - 1.0 + nu, 1.0 - nu) + 1e-15

    # expm1 keeps the numerator/denominator difference accurate when the
    # exponents underflow; at tiny epsilon the ratios round to exactly 1.0.
    e2m1 = math.expm1(2.0 * M)
    pg_standard = (e2m1 - math.expm1(-delta_S)) / (e2m1 - math.expm1(-beta1 * epsilon))
    top = math.expm1(2.0 * M * nu + 1.0 - nu)
    floor = max(
        math.expm1(-nu * beta2 * epsilon + 1.0 - nu), math.expm1(-(1.0 - nu))
    )
    pg_away = (top - math.expm1(-delta_A)) / (top - floor)
    assert 0.0 < pg_standard <= 1.0 and 0.0 < pg_away <= 1.0

    return AnalysisConstants(
        epsilon=epsilon, eps_g=eps_g, D=D, L=L, mu=mu, M=M, N=N, omega=omega,
        beta1=beta1, beta2=beta2, nu=nu, delta_S=delta_S, delta_A=delta_A,
        pg_standard=pg_standard, pg_away=pg_away,
    )


def lyapunov(kind: str, f_gap: float, active_size: int, consts: AnalysisConstants) -> float:
    """Exponential potential: exp(gap) for the standard algorithm,
    exp(nu * gap + (1 - nu) * active_size) for the away-step algorithm."""
    if f_gap < 0:
        raise ValueError("f_gap must be nonnegative")
    if kind == "standard":
        return math.exp(f_gap)
    if kind == "away":
        if active_size < 1:
            raise ValueError("active_size must be >= 1")
        return math.exp(consts.nu * f_gap + (1.0 - consts.nu) * active_size)
    raise ValueError(f"unknown kind {kind!r}")


@dataclass
class TraceReport:
    """Per-iteration inequality checks on one recorded trace."""

    kind: str
    checked: int = 0
    violations: list = field(default_factory=list)
    worst_margin: float = -math.inf  # most positive violation margin seen
    mean_phi_ratio: float = float("nan")
    phi_ratio_bound: float = float("nan")
    good_iterations: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def verify_trace(trace, consts: AnalysisConstants, kind: str) -> TraceReport:
    """Check the per-iteration decrease/contraction inequalities on every
    good pre-stopping iteration of a trace.

    standard: f(x_{k+1}) - f(x_k) <= -beta1 * eps + tol
    away, non-drop: gap_{k+1} <= (1 - beta2) * gap_k + tol
    away, drop: gap_{k+1} <= gap_k + 1e-12
    with tol = 1e-9 * max(1, |gap_k|). Also reports the empirical mean of
    the Lyapunov ratio over good iterations against exp(-delta).
    """
    if kind not in ("standard", "away"):
        raise ValueError(f"unknown kind {kind!r}")
    records = getattr(trace, "records", None)
    if records is None:
        raise MalformedTrace("trace has no records")
    report = TraceReport(kind=kind)
    delta = consts.delta_S if kind == "standard" else consts.delta_A
    report.phi_ratio_bound = math.exp(-delta)
    ratios = []
    stop = trace.T_eps if trace.T_eps is not None else len(records)
    for rec, nxt in zip(records[:-1], records[1:]):
        for item in (rec, nxt):
            for name in ("good_event", "f_gap", "step_type", "lyapunov"):
                if not hasattr(item, name):
                    raise MalformedTrace(f"record {item!r} lacks field {name}")
        if rec.k >= stop or not rec.good_event:
            continue
        report.good_iterations += 1
        ratios.append(nxt.lyapunov / rec.lyapunov)
        tol = 1e-9 * max(1.0, abs(rec.f_gap))
        report.checked += 1
        if kind == "standard":
            margin = (nxt.f_gap - rec.f_gap) - (-consts.beta1 * consts.epsilon)
        elif rec.step_type == "away_drop":
            margin = nxt.f_gap - rec.f_gap
            tol = 1e-12
        else:
            margin = nxt.f_gap - (1.0 - consts.beta2) * rec.f_gap
        if margin > tol:
            report.violations.append(
                {"k": rec.k, "step_type": rec.step_type, "margin": margin}
            )
        report.worst_margin = max(report.worst_margin, margin)
    if ratios:
        report.mean_phi_ratio = sum(ratios) / len(ratios)
    return report
