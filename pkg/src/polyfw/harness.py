"""Batch experiment driver: replicated Frank-Wolfe runs over an epsilon
grid, concentration experiments, and log-log scaling fits, with CSV/JSON
artifacts that are byte-deterministic given the configuration."""

from __future__ import annotations

import dataclasses
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import AnalysisConstants, compute_constants
from .errors import ConfigError, DegenerateFit
from .frank_wolfe import IterationRecord, RunTrace, initial_active_set, run
from .geometry import Polytope, geometry_constants, polytope_from_json
from .objectives import QuadraticObjective, objective_from_json, reference_solution
from .sampling import (
    NoiseModel,
    SamplePlan,
    chebyshev_tail_bound,
    noise_from_json,
    plan_from_json,
    subgaussian_c1,
)

CSV_HEADER = "epsilon,replication,T_eps,total_samples,good_event_rate,final_gap,wall_ms"


@dataclass
class ExperimentConfig:
    problem: dict
    algorithm: str
    noise: dict
    sampling: dict
    epsilon_grid: list[float]
    replications: int
    master_seed: int
    max_iter: int
    output_dir: str
    eps_g: float | None = None
    workers: int = 1
    save_traces: bool = False

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        def need(path, key, parent):
            if key not in parent:
                raise ConfigError(f"{path}.{key}" if path else key, "missing")
            return parent[key]

        problem = need("", "problem", raw)
        need("problem", "polytope", problem)
        need("problem", "objective", problem)
        algorithm = need("", "algorithm", raw)
        if algorithm not in ("standard", "away"):
            raise ConfigError("algorithm", f"must be standard|away, got {algorithm!r}")
        grid = need("", "epsilon_grid", raw)
        if not grid or any(e <= 0 for e in grid):
            raise ConfigError("epsilon_grid", "must be nonempty and strictly positive")
        reps = int(need("", "replications", raw))
        if reps < 1:
            raise ConfigError("replications", "must be >= 1")
        return cls(
            problem=problem,
            algorithm=algorithm,
            noise=need("", "noise", raw),
            sampling=need("", "sampling", raw),
            epsilon_grid=[float(e) for e in grid],
            replications=reps,
            master_seed=int(need("", "master_seed", raw)),
            max_iter=int(need("", "max_iter", raw)),
            output_dir=str(need("", "output_dir", raw)),
            eps_g=raw.get("eps_g"),
            workers=int(raw.get("workers", 1)),
            save_traces=bool(raw.get("save_traces", False)),
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class PerEpsilonStats:
    epsilon: float
    n_planned: int
    mean_T: float
    std_T: float
    q50: float
    q90: float
    q99: float
    mean_total_samples: float
    good_event_rate: float
    bound_mean_T: float
    emp_mgf: float
    failed: int


@dataclass
class SummaryStats:
    per_epsilon: list[PerEpsilonStats]
    slope: float
    r2: float
    bound_violations: int

    def to_json(self) -> dict:
        return {
            "per_epsilon": [dataclasses.asdict(p) for p in self.per_epsilon],
            "slope": self.slope,
            "r2": self.r2,
            "bound_violations": self.bound_violations,
        }


class _Problem:
    """Problem objects built once from a config and shared across cells."""

    def __init__(self, cfg: ExperimentConfig):
        self.P = polytope_from_json(cfg.problem["polytope"])
        self.obj = objective_from_json(cfg.problem["objective"])
        self.geo = geometry_constants(self.P)
        self.ref = reference_solution(self.obj, self.P)
        self.noise = noise_from_json(cfg.noise, self.P.dim)
        self.eps_g = cfg.eps_g if cfg.eps_g is not None else 1.0 / (8.0 * self.geo.D)
        x0 = initial_active_set(self.P).point
        self.gap0 = self.obj.value(x0) - self.ref.f_star

    def constants(self, epsilon: float) -> AnalysisConstants:
        return compute_constants(self.obj, self.P, epsilon, self.eps_g)


def resolve_plan(cfg: ExperimentConfig, prob: _Problem, consts: AnalysisConstants) -> SamplePlan:
    """Materialize the configured sampling mode at one epsilon.

    Problem-derived params (V_g, D, N, omega, M, beta coefficients, the
    theoretical p_g lower bound, c1) are auto-filled; anything given
    explicitly in the config overrides the auto-filled value.
    """
    base = plan_from_json(cfg.sampling)
    if base.mode in ("exact", "fixed"):
        return base
    auto = {
        "V_g": prob.noise.V_g,
        "D": consts.D,
        "epsilon": consts.epsilon,
        "eps_g": consts.eps_g,
        "N": consts.N,
        "omega": consts.omega,
        "M": consts.M,
        "beta1": consts.beta1,
        "beta2": consts.beta2,
        "d": prob.P.dim,
        "p_g": consts.pg_standard if base.mode.endswith("standard") else consts.pg_away,
        "c1": subgaussian_c1(consts.mu, consts.eps_g, consts.D, consts.N, consts.omega),
    }
    auto.update(base.params)
    return SamplePlan(mode=base.mode, params=auto)


def cell_rng(master_seed: int, eps_index: int, replication: int) -> np.random.Generator:
    """Deterministic stream per (epsilon index, replication), independent of
    scheduling."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, eps_index, replication)))


def run_cell(cfg: ExperimentConfig, prob: _Problem, eps_index: int, replication: int):
    """One replication at one epsilon; returns (row fields, trace)."""
    epsilon = cfg.epsilon_grid[eps_index]
    consts = prob.constants(epsilon)
    plan = resolve_plan(cfg, prob, consts)
    rng = cell_rng(cfg.master_seed, eps_index, replication)
    t0 = time.perf_counter()
    trace = run(
        cfg.algorithm, prob.obj, prob.P, prob.noise, plan, epsilon, cfg.max_iter,
        rng, eps_g=prob.eps_g, ref=prob.ref, consts=consts,
    )
    wall_ms = int(round(1000.0 * (time.perf_counter() - t0)))
    steps = [r for r in trace.records if r.step_type is not None]
    good_rate = (sum(r.good_event for r in steps) / len(steps)) if steps else 1.0
    row = {
        "epsilon": epsilon,
        "replication": replication,
        "T_eps": trace.T_eps if trace.T_eps is not None else -1,
        "total_samples": trace.total_samples,
        "good_event_rate": good_rate,
        "final_gap": trace.final_gap,
        "wall_ms": wall_ms,
        "good_steps": sum(r.good_event for r in steps),
        "n_steps": len(steps),
    }
    return row, trace


_WORKER_CACHE: dict[str, tuple[ExperimentConfig, _Problem]] = {}


def _worker(payload: str, eps_index: int, replication: int):
    if payload not in _WORKER_CACHE:
        cfg = ExperimentConfig.from_dict(json.loads(payload))
        _WORKER_CACHE[payload] = (cfg, _Problem(cfg))
    cfg, prob = _WORKER_CACHE[payload]
    row, _ = run_cell(cfg, prob, eps_index, replication)
    return eps_index, replication, row


def _format_row(row: dict) -> str:
    return ",".join(
        [
            repr(float(row["epsilon"])),
            str(int(row["replication"])),
            str(int(row["T_eps"])),
            str(int(row["total_samples"])),
            repr(float(row["good_event_rate"])),
            repr(float(row["final_gap"])),
            str(int(row["wall_ms"])),
        ]
    )


def theorem_bound_mean_T(algorithm: str, gap0: float, consts: AnalysisConstants) -> float:
    """Supermartingale bound on E[T_eps]: 2(f(x0)-f*) max(8LD^2/eps^2, 4/eps)
    for the standard algorithm; log(Phi0) (2 + 4/(beta2 eps)) for away."""
    eps = consts.epsilon
    if algorithm == "standard":
        return 2.0 * gap0 * max(8.0 * consts.L * consts.D**2 / eps**2, 4.0 / eps)
    log_phi0 = consts.nu * gap0 + (1.0 - consts.nu) * 1.0
    return log_phi0 * (2.0 + 4.0 / (consts.beta2 * eps))


def summarize(cfg: ExperimentConfig, prob: _Problem, rows: list[dict]) -> SummaryStats:
    per_eps = []
    bound_violations = 0
    for i, eps in enumerate(cfg.epsilon_grid):
        consts = prob.constants(eps)
        plan = resolve_plan(cfg, prob, consts)
        from .sampling import plan_sample_size

        n_planned = plan_sample_size(plan)
        cell_rows = [r for r in rows if r["replication"] >= 0 and r["epsilon"] == eps]
        done = [r for r in cell_rows if r["T_eps"] >= 0]
        failed = len(cell_rows) - len(done)
        Ts = np.array([r["T_eps"] for r in done], dtype=float)
        delta = consts.delta_S if cfg.algorithm == "standard" else consts.delta_A
        bound = theorem_bound_mean_T(cfg.algorithm, prob.gap0, consts)
        total_good = sum(r["good_steps"] for r in cell_rows)
        total_steps = sum(r["n_steps"] for r in cell_rows)
        mean_T = float(Ts.mean()) if len(Ts) else float("nan")
        if len(Ts) and mean_T > bound:
            bound_violations += 1
        per_eps.append(
            PerEpsilonStats(
                epsilon=eps,
                n_planned=n_planned,
                mean_T=mean_T,
                std_T=float(Ts.std(ddof=1)) if len(Ts) > 1 else 0.0,
                q50=float(np.quantile(Ts, 0.5)) if len(Ts) else float("nan"),
                q90=float(np.quantile(Ts, 0.9)) if len(Ts) else float("nan"),
                q99=float(np.quantile(Ts, 0.99)) if len(Ts) else float("nan"),
                mean_total_samples=(
                    float(np.mean([r["total_samples"] for r in done])) if done else float("nan")
                ),
                good_event_rate=(total_good / total_steps) if total_steps else 1.0,
                bound_mean_T=bound,
                emp_mgf=(
                    float(np.mean(np.exp(np.minimum(0.5 * delta * Ts, 700.0))))
                    if len(Ts)
                    else float("nan")
                ),
                failed=failed,
            )
        )
    points = [
        (1.0 / p.epsilon, p.mean_T)
        for p in per_eps
        if math.isfinite(p.mean_T) and p.mean_T > 0
    ]
    if len(points) >= 3:
        slope, r2 = fit_loglog_slope(points)
    else:
        slope, r2 = float("nan"), float("nan")
    return SummaryStats(
        per_epsilon=per_eps, slope=slope, r2=r2, bound_violations=bound_violations
    )


def run_experiment(cfg: ExperimentConfig) -> SummaryStats:
    """Run the full replication grid, write runs.csv and summary.json into
    the output directory, and return the summary.

    Output is deterministic for a fixed config regardless of worker count
    (rows are sorted by (epsilon index, replication); every cell owns a
    seeded stream derived from (master_seed, epsilon index, replication)).
    """
    os.makedirs(cfg.output_dir, exist_ok=True)
    csv_path = os.path.join(cfg.output_dir, "runs.csv")
    json_path = os.path.join(cfg.output_dir, "summary.json")
    cells = [
        (i, r) for i in range(len(cfg.epsilon_grid)) for r in range(cfg.replications)
    ]
    try:
        results: dict[tuple[int, int], dict] = {}
        if cfg.workers <= 1:
            prob = _Problem(cfg)
            for i, r in cells:
                row, trace = run_cell(cfg, prob, i, r)
                results[(i, r)] = row
                if cfg.save_traces:
                    _save_trace(cfg, prob, i, r, trace)
        else:
            payload = json.dumps(cfg.to_dict(), sort_keys=True)
            prob = _Problem(cfg)
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                for i, r, row in pool.map(
                    _worker, *zip(*[(payload, i, r) for i, r in cells])
                ):
                    results[(i, r)] = row
            if cfg.save_traces:
                for i, r in cells:
                    _, trace = run_cell(cfg, prob, i, r)
                    _save_trace(cfg, prob, i, r, trace)
        rows = [results[cell] for cell in sorted(results)]
        summary = summarize(cfg, prob, rows)
        with open(csv_path, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in rows:
                fh.write(_format_row(row) + "\n")
        with open(json_path, "w") as fh:
            json.dump(summary.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return summary
    except Exception:
        for path in (csv_path, json_path):
            if os.path.exists(path):
                os.remove(path)
        raise


def _save_trace(cfg, prob, eps_index, replication, trace):
    path = os.path.join(cfg.output_dir, f"trace_e{eps_index}_r{replication}.json")
    with open(path, "w") as fh:
        json.dump(trace_to_json(cfg, eps_index, trace), fh)


def trace_to_json(cfg: ExperimentConfig, eps_index: int, trace: RunTrace) -> dict:
    return {
        "algorithm": cfg.algorithm,
        "epsilon": cfg.epsilon_grid[eps_index],
        "eps_g": cfg.eps_g,
        "problem": cfg.problem,
        "T_eps": trace.T_eps,
        "total_samples": trace.total_samples,
        "final_gap": trace.final_gap,
        "records": [dataclasses.asdict(rec) for rec in trace.records],
    }


def trace_from_json(data: dict) -> RunTrace:
    records = [IterationRecord(**rec) for rec in data["records"]]
    return RunTrace(
        records=records,
        T_eps=data.get("T_eps"),
        total_samples=data.get("total_samples", 0),
        final_gap=data.get("final_gap", float("nan")),
    )


def fit_loglog_slope(points) -> tuple[float, float]:
    """Least-squares slope of log y on log x plus r^2.

    A constant y gives slope 0 with r^2 = 1 (zero residual, zero variance);
    identical x values raise DegenerateFit.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise DegenerateFit("need at least 3 points")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("log-log fit needs positive coordinates")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    if np.ptp(lx) == 0.0:
        raise DegenerateFit("all x values identical")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), r2


def concentration_experiment(
    obj,
    P: Polytope,
    noise: NoiseModel,
    n_grid,
    s_grid,
    trials: int,
    rng: np.random.Generator,
) -> tuple[list[dict], list[dict]]:
    """Empirical exceedance frequencies of ||sample mean - grad|| per (n, s)
    cell, flagged against the Chebyshev bound, plus per-s exponential fits
    of log-frequency against n (the sub-Gaussian signature).

    The noise is additive and state-independent, so exceedances are computed
    on centered noise means directly.
    """
    if trials < 10**3:
        raise ValueError("need at least 1000 trials per cell")
    d = noise.dim
    cells = []
    freq_by_s: dict[float, list[tuple[int, float]]] = {float(s): [] for s in s_grid}
    for n in n_grid:
        norms = np.empty(trials)
        if noise.kind == "gaussian":
            means = rng.normal(0.0, noise.sigma / math.sqrt(n), (trials, d))
            norms = np.linalg.norm(means, axis=1)
        else:
            done = 0
            block = max(1, int(2e7 // (n * d)))
            while done < trials:
                take = min(block, trials - done)
                draws = noise.draw(rng, take * n).reshape(take, n, d)
                norms[done : done + take] = np.linalg.norm(draws.mean(axis=1), axis=1)
                done += take
        for s in s_grid:
            s = float(s)
            freq = float((norms > s).mean())
            se = math.sqrt(freq * (1.0 - freq) / trials)
            bound = chebyshev_tail_bound(noise.V_g, n, s)
            cells.append(
                {
                    "n": int(n),
                    "s": s,
                    "freq": freq,
                    "stderr": se,
                    "chebyshev_bound": bound,
                    "violation": freq > bound + 3.0 * se,
                }
            )
            freq_by_s[s].append((int(n), freq))
    fits = []
    for s, pairs in freq_by_s.items():
        pos = [(n, f) for n, f in pairs if f > 0.0]
        if len(pos) < 3:
            continue
        ns = np.array([n for n, _ in pos], dtype=float)
        lf = np.log([f for _, f in pos])
        slope, intercept = np.polyfit(ns, lf, 1)
        resid = lf - (slope * ns + intercept)
        ss_tot = float(((lf - lf.mean()) ** 2).sum())
        r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(resid @ resid) / ss_tot
        fits.append({"s": s, "slope": float(slope), "r2": r2, "c_fit": float(-slope) / s**2})
    return cells, fits
