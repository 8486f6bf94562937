"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 acceptance-check failure
(verify / lmo-check / concentration flag violations).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .diagnostics import compute_constants, verify_trace
from .errors import ConfigError, PolyFWError
from .geometry import lmo, polytope_from_json
from .harness import (
    ExperimentConfig,
    concentration_experiment,
    run_experiment,
    trace_from_json,
)
from .objectives import objective_from_json
from .sampling import noise_from_json
from .simplex_lp import lmo_simplex_method


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_dict(_load_json(args.config))
    summary = run_experiment(cfg)
    print(f"wrote {cfg.output_dir}/runs.csv and summary.json")
    print(json.dumps(summary.to_json(), indent=2, sort_keys=True))
    return 0


def cmd_verify(args) -> int:
    data = _load_json(args.trace)
    trace = trace_from_json(data)
    P = polytope_from_json(data["problem"]["polytope"])
    obj = objective_from_json(data["problem"]["objective"])
    consts = compute_constants(obj, P, data["epsilon"], data.get("eps_g"))
    report = verify_trace(trace, consts, data["algorithm"])
    print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    return 0 if report.passed else 3


def cmd_lmo_check(args) -> int:
    P = polytope_from_json(_load_json(args.polytope))
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.trials):
        g = rng.standard_normal(P.dim)
        s, _ = lmo(P, g)
        x = lmo_simplex_method(P, g)
        worst = max(worst, abs(float(g @ x) - float(g @ s)))
    print(f"{args.trials} directions, worst objective mismatch {worst:.3e}")
    return 0 if worst <= 1e-8 else 3


def cmd_concentration(args) -> int:
    spec = _load_json(args.config)
    P = polytope_from_json(spec["problem"]["polytope"])
    obj = objective_from_json(spec["problem"]["objective"])
    noise = noise_from_json(spec["noise"], P.dim)
    rng = np.random.default_rng(spec.get("seed", 0))
    cells, fits = concentration_experiment(
        obj, P, noise, spec["n_grid"], spec["s_grid"], spec.get("trials", 10**4), rng
    )
    out = {"cells": cells, "fits": fits}
    print(json.dumps(out, indent=2, sort_keys=True))
    violations = sum(c["violation"] for c in cells)
    return 0 if violations == 0 else 3


def cmd_report(args) -> int:
    with open(f"{args.dir}/summary.json") as fh:
        summary = json.load(fh)
    print(f"{'epsilon':>10} {'mean_T':>12} {'q90':>10} {'good_rate':>10} {'bound':>14}")
    for p in summary["per_epsilon"]:
        print(
            f"{p['epsilon']:>10.4g} {p['mean_T']:>12.2f} {p['q90']:>10.1f} "
            f"{p['good_event_rate']:>10.4f} {p['bound_mean_T']:>14.4g}"
        )
    print(f"slope {summary['slope']:.3f} (r2 {summary['r2']:.3f}), "
          f"bound violations {summary['bound_violations']}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="polyfw")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a replicated experiment from a JSON config")
    p.add_argument("config")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("verify", help="check analysis inequalities on a saved trace")
    p.add_argument("trace")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("lmo-check", help="compare simplex LMO against enumeration")
    p.add_argument("polytope")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_lmo_check)

    p = sub.add_parser("concentration", help="empirical tail bounds per (n, s) cell")
    p.add_argument("config")
    p.set_defaults(fn=cmd_concentration)

    p = sub.add_parser("report", help="pretty-print a summary.json")
    p.add_argument("dir")
    p.set_defaults(fn=cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"config error: {exc!r}", file=sys.stderr)
        return 2
    except PolyFWError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
