"""Standard and away-step Frank-Wolfe loops with active-set bookkeeping and
full per-iteration traces up to the stopping time."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDirection
from .geometry import Polytope, geometry_constants, lmo
from .sampling import NoiseModel, SamplePlan, estimate_gradient, plan_sample_size

DROP_TOL = 1e-12


class ActiveSet:
    """Convex-combination representation of the current iterate: an ordered
    map vertex_id -> weight, all weights positive and summing to one.

    Weights at or below DROP_TOL are purged and the remaining mass
    renormalized, so floating-point dust never accumulates.
    """

    def __init__(self, P: Polytope, weights: dict[int, float]):
        self.P = P
        self.weights = dict(weights)
        self._purge()
        self._point = None

    def copy(self) -> "ActiveSet":
        return ActiveSet(self.P, self.weights)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def point(self) -> np.ndarray:
        if self._point is None:
            V = self.P.vertices
            x = np.zeros(self.P.dim)
            for vid, w in self.weights.items():
                x += w * V[vid]
            self._point = x
        return self._point

    def away_vertex(self, g) -> tuple[int, float]:
        """Active vertex maximizing g^T u; ties break to the smallest id."""
        V = self.P.vertices
        best_id, best_val = -1, -math.inf
        for vid in sorted(self.weights):
            val = float(V[vid] @ g)
            if val > best_val:
                best_id, best_val = vid, val
        return best_id, self.weights[best_id]

    def apply_fw(self, s_id: int, gamma: float) -> None:
        """Frank-Wolfe update: full step collapses to {s}; otherwise scale
        existing weights by (1 - gamma) and add gamma to s."""
        if gamma >= 1.0:
            self.weights = {s_id: 1.0}
        else:
            self.weights = {vid: (1.0 - gamma) * w for vid, w in self.weights.items()}
            self.weights[s_id] = self.weights.get(s_id, 0.0) + gamma
        self._purge()
        self._point = None

    def apply_away(self, v_id: int, gamma: float, at_max: bool) -> None:
        """Away update: scale other weights by (1 + gamma); the away vertex
        gets (1 + gamma) alpha - gamma, which is dropped at the maximal step."""
        new = {vid: (1.0 + gamma) * w for vid, w in self.weights.items()}
        if at_max:
            del new[v_id]
        else:
            new[v_id] = (1.0 + gamma) * self.weights[v_id] - gamma
        self.weights = new
        self._purge()
        self._point = None

    def _purge(self) -> None:
        self.weights = {vid: w for vid, w in self.weights.items() if w > DROP_TOL}
        total = sum(self.weights.values())
        if not self.weights or abs(total - 1.0) > 0.5:
            raise ValueError(f"active-set mass {total} lost; representation corrupt")
        if total != 1.0:
            self.weights = {vid: w / total for vid, w in self.weights.items()}

    def validate(self, tol_sum: float = 1e-10, tol_point: float = 1e-8) -> None:
        """Assert the representation invariants; raises AssertionError."""
        total = sum(self.weights.values())
        assert abs(total - 1.0) <= tol_sum, f"weights sum to {total}"
        assert all(w > 0 for w in self.weights.values()), "nonpositive weight"
        V = self.P.vertices
        recon = sum(w * V[vid] for vid, w in self.weights.items())
        assert np.linalg.norm(recon - self.point) <= tol_point, "cached point drifted"


def initial_active_set(P: Polytope) -> ActiveSet:
    """Singleton active set at the vertex solving min 1^T x."""
    _, vid = lmo(P, np.ones(P.dim))
    return ActiveSet(P, {vid: 1.0})


@dataclass
class IterationRecord:
    k: int
    step_type: str | None  # fw | fw_max | away | away_drop; None on the stop record
    gamma: float
    gamma_max: float
    n_samples: int
    grad_error: float
    good_event: bool
    f_gap: float
    active_size: int
    lyapunov: float


@dataclass
class RunTrace:
    records: list[IterationRecord]
    T_eps: int | None  # None when max_iter was exhausted
    total_samples: int
    final_gap: float
    # (sorted vertex ids, iterate) per visited iteration when requested
    active_ids: list[tuple[tuple[int, ...], np.ndarray]] | None = field(
        default=None, repr=False
    )


def standard_fw_step(
    x: np.ndarray, g: np.ndarray, P: Polytope, epsilon: float, L: float, D: float
) -> tuple[np.ndarray, dict]:
    """One standard Frank-Wolfe step with the fixed rule
    gamma = min(1, epsilon / (2 L D^2)) towards the LMO vertex."""
    s, s_id = lmo(P, g)
    gamma = min(1.0, epsilon / (2.0 * L * D * D))
    x_next = x + gamma * (s - x)
    info = {
        "step_type": "fw_max" if gamma >= 1.0 else "fw",
        "gamma": gamma,
        "gamma_max": 1.0,
        "s_id": s_id,
    }
    return x_next, info


def away_fw_step(
    active: ActiveSet, g: np.ndarray, P: Polytope, L: float
) -> tuple[ActiveSet, dict]:
    """One away-step Frank-Wolfe update.

    Picks the better of the LMO direction and the away direction (FW on
    ties), steps by min(gamma_max, -g.d / (L ||d||^2)) and applies the
    matching weight-update case. The returned info carries the realized
    vertices and g^T(v - s), which the caller needs for the good-event test.
    """
    x = active.point
    s, s_id = lmo(P, g)
    v_id, alpha_v = active.away_vertex(g)
    v = P.vertex(v_id)
    d_fw = s - x
    d_away = x - v
    g_vs = float(g @ (v - s))  # always >= 0 by optimality of s and v

    take_fw = -float(g @ d_fw) >= -float(g @ d_away)
    if take_fw:
        d, gamma_max = d_fw, 1.0
    else:
        # alpha_v = 1 makes d_away = 0 and -g.d_away = 0 <= -g.d_fw, so the
        # FW branch is taken and this division cannot see alpha_v = 1.
        assert alpha_v < 1.0, "away branch reached with a singleton active set"
        d, gamma_max = d_away, alpha_v / (1.0 - alpha_v)

    norm2 = float(d @ d)
    if norm2 <= 1e-28:
        raise DegenerateDirection("search direction is numerically zero")
    descent = -float(g @ d)
    assert descent >= -1e-12, "chosen direction is not a descent direction for g"
    unclamped = max(0.0, descent) / (L * norm2)
    at_max = unclamped >= gamma_max
    gamma = gamma_max if at_max else unclamped

    new = active.copy()
    if take_fw:
        new.apply_fw(s_id, gamma)
        step_type = "fw_max" if at_max else "fw"
    else:
        new.apply_away(v_id, gamma, at_max)
        step_type = "away_drop" if at_max else "away"
    info = {
        "step_type": step_type,
        "gamma": gamma,
        "gamma_max": gamma_max,
        "s_id": s_id,
        "v_id": v_id,
        "g_vs": g_vs,
    }
    return new, info


def _lyapunov(kind: str, f_gap: float, active_size: int, nu: float) -> float:
    if kind == "standard":
        return math.exp(f_gap)
    return math.exp(nu * f_gap + (1.0 - nu) * active_size)


def run(
    algorithm: str,
    obj,
    P: Polytope,
    noise: NoiseModel | None,
    plan: SamplePlan,
    epsilon: float,
    max_iter: int,
    rng: np.random.Generator | None,
    *,
    eps_g: float | None = None,
    ref=None,
    consts=None,
    check_invariants: bool = False,
    collect_active_ids: bool = False,
) -> RunTrace:
    """Run one algorithm ("standard" or "away") to the stopping time.

    Stops at the first k with f(x_k) - f* <= epsilon (recorded as T_eps) or
    after max_iter steps (T_eps = None). Every stepping iteration draws the
    planned number of gradient samples; mode "exact" uses the true gradient.
    The good-event flag compares the realized gradient error against
    epsilon/(4D) for the standard algorithm and eps_g * g^T(v - s) for the
    away-step algorithm.
    """
    if algorithm not in ("standard", "away"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    from .diagnostics import compute_constants
    from .objectives import reference_solution

    geo = geometry_constants(P)
    D, L = geo.D, obj.L
    if eps_g is None:
        eps_g = 1.0 / (8.0 * D)
    if ref is None:
        ref = reference_solution(obj, P)
    if consts is None:
        consts = compute_constants(obj, P, epsilon, eps_g)
    n = plan_sample_size(plan)

    active = initial_active_set(P)
    records: list[IterationRecord] = []
    active_ids: list[tuple[tuple[int, ...], np.ndarray]] = []
    total_samples = 0
    T_eps = None
    f_gap = math.inf

    for k in range(max_iter + 1):
        x = active.point
        if check_invariants:
            active.validate()
            assert np.all(P.A @ x <= P.b + 1e-8), "iterate infeasible"
        if collect_active_ids:
            active_ids.append((tuple(sorted(active.weights)), x.copy()))
        f_gap = obj.value(x) - ref.f_star
        assert f_gap >= -1e-12, f"negative optimality gap {f_gap}"
        n_k = len(active)
        lyap = _lyapunov(algorithm, f_gap, n_k, consts.nu)

        if f_gap <= epsilon or k == max_iter:
            records.append(
                IterationRecord(
                    k=k, step_type=None, gamma=0.0, gamma_max=0.0, n_samples=0,
                    grad_error=0.0, good_event=True, f_gap=f_gap,
                    active_size=n_k, lyapunov=lyap,
                )
            )
            if f_gap <= epsilon:
                T_eps = k
            break

        if n == 0:
            g = obj.gradient(x)
            grad_error = 0.0
        else:
            g = estimate_gradient(obj, x, noise, n, rng)
            grad_error = float(np.linalg.norm(g - obj.gradient(x)))
            total_samples += n

        if algorithm == "standard":
            _, info = standard_fw_step(x, g, P, epsilon, L, D)
            active.apply_fw(info["s_id"], info["gamma"])
            good = grad_error <= epsilon / (4.0 * D)
        else:
            try:
                active, info = away_fw_step(active, g, P, L)
            except DegenerateDirection:
                # Noisy gradient re-selected the current singleton vertex;
                # the iterate is stationary for this estimate, so idle.
                info = {"step_type": "fw", "gamma": 0.0, "gamma_max": 1.0, "g_vs": 0.0}
            good = grad_error <= eps_g * info["g_vs"]

        records.append(
            IterationRecord(
                k=k, step_type=info["step_type"], gamma=info["gamma"],
                gamma_max=info["gamma_max"], n_samples=n, grad_error=grad_error,
                good_event=good, f_gap=f_gap, active_size=n_k, lyapunov=lyap,
            )
        )

    return RunTrace(
        records=records,
        T_eps=T_eps,
        total_samples=total_samples,
        final_gap=f_gap,
        active_ids=active_ids if collect_active_ids else None,
    )
