"""Vectorized per-run replay of the normal-form monitors.

Monte-Carlo grids need hundreds of thousands of monitor rounds; stepping
the object monitor would dominate the runtime. This module evaluates the
same log-wealth recursions with numpy over a whole run at once. The object
monitor remains the reference: the tests replay identical action streams
through both paths and require matching crossing rounds.

Within one run the per-player action streams are drawn in player order
(all of player 1's rounds, then player 2's, ...), which is part of the
determinism contract for run-level reproducibility.
"""

from __future__ import annotations

import math

import numpy as np

from ..eprocess import BettingMixture
from ..games import JointStrategy, NormalFormGame, StrategyKind
from ..monitors import HypothesisId


def increment_tables(
    game: NormalFormGame, hypotheses: list[HypothesisId], eps_shift: float = 0.0
) -> np.ndarray:
    """Per-hypothesis increment lookup over flattened joint profiles: (m, P)."""
    counts = game.action_counts
    tables = np.empty((len(hypotheses), int(np.prod(counts))))
    for j, h in enumerate(hypotheses):
        u = game.payoffs[h.player]
        u_dev = np.take(u, h.deviation, axis=h.player)
        u_dev = np.expand_dims(u_dev, axis=h.player)
        tables[j] = (u - u_dev + eps_shift).ravel()
    return tables


def _inverse_cdf_draws(
    probs: np.ndarray, size: int, rng: np.random.Generator
) -> np.ndarray:
    # Raw uniforms through the cumulative table: keeps the realized streams
    # tied to the bit generator only, not to Generator.choice internals.
    cdf = np.cumsum(probs)
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return np.minimum(idx, probs.size - 1)


def sample_action_stream(
    strategy: JointStrategy, horizon: int, rng: np.random.Generator
) -> np.ndarray:
    """Flattened joint-profile indices for one run, shape (horizon,)."""
    counts = strategy.action_counts
    if strategy.kind is StrategyKind.PRODUCT:
        per_player = [
            _inverse_cdf_draws(f, horizon, rng) for f in strategy.factors
        ]
        return np.ravel_multi_index(per_player, counts)
    return _inverse_cdf_draws(strategy.joint.ravel(), horizon, rng)


def log_wealth_paths(
    increments: np.ndarray, mixture: BettingMixture
) -> np.ndarray:
    """Log mixture wealth over time for each hypothesis: (m, T).

    Matches EProcessState.value() step by step: cumulative per-fraction log
    wealth, then a max-shifted log-sum-exp across the grid.
    """
    lam = mixture.lambdas
    with np.errstate(divide="ignore"):
        # An exact zero factor is a dead component: log wealth -inf forever.
        if lam.size == 1:
            return np.cumsum(np.log1p(-lam[0] * increments), axis=1)
        logw = np.cumsum(np.log1p(-increments[:, :, None] * lam), axis=1)
        shift = logw.max(axis=2)
        return shift + np.log(
            np.einsum("mtg,g->mt", np.exp(logw - shift[:, :, None]), mixture.weights)
        )


def first_crossing(log_path: np.ndarray, log_level: float) -> int:
    """1-based round of the first crossing, or -1 when it never happens."""
    hits = log_path >= log_level
    if not hits.any():
        return -1
    return int(np.argmax(hits)) + 1


def fwer_crossing_times(log_paths: np.ndarray, b: float) -> np.ndarray:
    """Per-hypothesis first crossing rounds of the threshold b (-1 = never)."""
    level = math.log(b)
    return np.array([first_crossing(row, level) for row in log_paths])


def ebh_alarm(
    log_paths: np.ndarray, alpha: float, weights: np.ndarray
) -> tuple[int, int, tuple[int, ...]]:
    """First e-BH alarm from full wealth paths.

    Returns (alarm round or -1, level k at the alarm, rejected indices at
    the alarm). Mirrors running Algorithm-style recomputation every round,
    using the fact that with running suprema the level-k count first
    reaches k at the k-th order statistic of the level-k crossing times.
    """
    m = log_paths.shape[0]
    crossing = np.full((m, m), np.inf)
    for j in range(m):
        for k in range(1, m + 1):
            level = math.log(1.0 / (k * alpha * weights[j]))
            t = first_crossing(log_paths[j], level)
            if t > 0:
                crossing[j, k - 1] = t
    alarm = np.inf
    for k in range(1, m + 1):
        kth = np.sort(crossing[:, k - 1])[k - 1]
        alarm = min(alarm, kth)
    if not np.isfinite(alarm):
        return -1, 0, ()
    alarm = int(alarm)
    best_k = 0
    for k in range(m, 0, -1):
        if int(np.sum(crossing[:, k - 1] <= alarm)) >= k:
            best_k = k
            break
    rejected = tuple(int(j) for j in np.nonzero(crossing[:, best_k - 1] <= alarm)[0])
    return alarm, best_k, rejected
