#!/usr/bin/env python3
"""Export sample episode traces (environment log + monitor columns) as CSV."""

import sys
from pathlib import Path

import numpy as np

from eqsentinel.envs import soccer, trace
from eqsentinel.harness.csvio import write_csv
from eqsentinel.harness.experiments import SoccerSolveConfig, _solve_soccer
from eqsentinel.stochastic import Policy, mixture_policy, smooth_policy

if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("results/traces")
    _, solution = _solve_soccer(SoccerSolveConfig())
    attacker = smooth_policy(solution.row_policy, 0.05)
    defender = smooth_policy(solution.col_policy, 0.05)
    afraid = Policy(
        np.vstack([soccer.afraid_transform(row) for row in attacker.table])
    )

    cols, rows = trace.soccer_episode_trace(
        attacker, defender, null_attacker=attacker, rng=np.random.default_rng(0)
    )
    write_csv(out / "soccer_equilibrium_episode.csv", "soccer-trace", cols, rows)

    cols, rows = trace.soccer_episode_trace(
        mixture_policy(attacker, afraid, 1.0),
        defender,
        null_attacker=attacker,
        rng=np.random.default_rng(4),
        max_steps=12,
    )
    write_csv(out / "soccer_timid_episode.csv", "soccer-trace", cols, rows)

    cols, rows = trace.prey_episode_trace(
        0.6, (0.1, 0.3, 0.5, 0.7, 0.9), np.random.default_rng(1)
    )
    write_csv(out / "prey_suspect_episode.csv", "prey-trace", cols, rows)
    print(f"traces written under {out}")
