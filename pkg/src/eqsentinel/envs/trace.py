"""Episode traces as CSV-ready rows.

Each trace pairs the environment log (positions, commanded and realized
actions, action probabilities) with the monitor's view of the same episode
(the per-round e-value and the running martingale *before* that round's
update, so the martingale column starts at 1).
"""

from __future__ import annotations

import math

import numpy as np

from ..stochastic import Policy
from . import prey, soccer


def soccer_episode_trace(
    attacker: Policy,
    defender: Policy,
    null_attacker: Policy,
    rng: np.random.Generator,
    alternative: Policy | None = None,
    start: soccer.SoccerState = soccer.INITIAL_STATE,
    max_steps: int = 12,
    rules: soccer.SoccerRules = soccer.DEFAULT_RULES,
) -> tuple[list[str], list[list]]:
    """Roll one match while monitoring the attacker's actions.

    The monitor's alternative defaults to the policy the attacker actually
    plays (the known-deviation test).
    """
    alternative = alternative or attacker
    columns = [
        "step", "a_row", "a_col", "b_row", "b_col",
        "act_a", "act_b", "real_b", "slip", "possession",
        *[f"pa_{n}" for n in soccer.ACTION_NAMES],
        *[f"pb_{n}" for n in soccer.ACTION_NAMES],
        "evalue", "martingale",
    ]
    rows: list[list] = []
    state = start
    martingale = 1.0
    for step in range(max_steps):
        if soccer.is_terminal(state, rules):
            break
        s = soccer.state_index(state)
        pa = attacker.table[s]
        pb = defender.table[s]
        act_a = int(rng.choice(soccer.NUM_ACTIONS, p=pa))
        act_b = int(rng.choice(soccer.NUM_ACTIONS, p=pb))
        evalue = float(alternative.table[s, act_a] / null_attacker.table[s, act_a])
        rows.append(
            [
                step, *state.a_pos, *state.b_pos,
                soccer.ACTION_NAMES[act_a], soccer.ACTION_NAMES[act_b],
                None,  # realized defender action, filled after the step
                None,
                "A" if state.possession == 0 else "B",
                *[float(v) for v in pa],
                *[float(v) for v in pb],
                evalue,
                martingale,
            ]
        )
        state, _, _, info = soccer.soccer_step_traced(state, act_a, act_b, rng, rules)
        rows[-1][7] = soccer.ACTION_NAMES[info.effective_b]
        rows[-1][8] = int(info.slipped)
        martingale *= evalue
    return columns, rows


def prey_episode_trace(
    eps_true: float,
    eps_grid,
    rng: np.random.Generator,
    start: prey.PreyState = prey.DEFAULT_START,
    max_steps: int = 12,
    threshold: float = 20.0,
) -> tuple[list[str], list[list]]:
    """Roll one pursuit while the mixture monitor watches the suspect."""
    grid = np.asarray(eps_grid, dtype=float)
    weights = np.full(grid.size, 1.0 / grid.size)
    columns = [
        "step", "row", "col", "action", "martingale",
        *list(prey.ACTION_NAMES),
        "evalue",
    ]
    rows: list[list] = []
    state = start
    log_lr = np.zeros(grid.size)
    uniform = 1.0 / prey.NUM_ACTIONS
    for step in range(max_steps):
        if state.captured or state.exhausted:
            break
        chase = prey.chase_policy(state.suspect, state.prey)
        played = (1.0 - eps_true) * uniform + eps_true * chase
        act = int(rng.choice(prey.NUM_ACTIONS, p=played))
        shift = log_lr.max()
        martingale = float(math.exp(shift) * np.sum(weights * np.exp(log_lr - shift)))
        candidate = (1.0 - grid) * uniform + grid * chase[act]
        log_lr += np.log(candidate) - math.log(uniform)
        shift = log_lr.max()
        updated = float(math.exp(shift) * np.sum(weights * np.exp(log_lr - shift)))
        rows.append(
            [
                step, *state.suspect, prey.ACTION_NAMES[act], martingale,
                *[float(v) for v in played],
                updated / martingale,
            ]
        )
        state, _ = prey.prey_step(state, act, rng)
        if updated >= threshold:
            break
    return columns, rows
