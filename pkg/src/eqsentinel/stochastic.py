"""Stochastic-game machinery: likelihood-ratio monitors, a zero-sum solver,
policy smoothing, and divergence diagnostics.

Compliance monitoring here compares observed actions against a known
candidate policy through per-round likelihood ratios, optionally averaged
over a finite set of hypothesized alternatives. The solver side computes
per-state matrix-game equilibria and runs value iteration on their values.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DomainError,
    ErgodicityError,
    ShapeError,
    SupportViolationError,
    UndefinedActionError,
)

logger = logging.getLogger(__name__)

ROW_TOL = 1e-9
POLICY_TOL = 1e-12
STATIONARY_RESIDUAL = 1e-12
STATIONARY_MAX_ITER = 1_000_000

MODEL_HEADER = "eqsentinel-model v1"
POLICY_HEADER = "eqsentinel-policy v1"


@dataclass(frozen=True)
class StochasticGameModel:
    """Tabular model: rewards in [0, 1], a row-stochastic kernel, a discount.

    Environment-native rewards outside [0, 1] are stored through an affine
    rescaling; the Shapley iteration is affine-invariant, so equilibrium
    policies are unaffected.
    """

    rewards: np.ndarray  # (num_players, S, |A_1|, ..., |A_n|)
    transition: np.ndarray  # (S, |A_1|, ..., |A_n|, S)
    discount: float

    def __post_init__(self) -> None:
        r = np.asarray(self.rewards, dtype=float)
        p = np.asarray(self.transition, dtype=float)
        if r.ndim < 3:
            raise ShapeError("rewards must be (players, states, actions...)")
        n = r.shape[0]
        num_states = r.shape[1]
        if r.ndim != n + 2:
            raise ShapeError(f"reward tensor rank does not match {n} players")
        if p.shape != (num_states, *r.shape[2:], num_states):
            raise ShapeError("transition shape does not match rewards")
        if r.min() < 0.0 or r.max() > 1.0:
            raise DomainError("rewards must lie in [0, 1]")
        if p.min() < 0.0:
            raise DomainError("transition probabilities must be nonnegative")
        sums = p.sum(axis=-1)
        if np.max(np.abs(sums - 1.0)) > ROW_TOL:
            raise DomainError(f"transition rows must sum to 1 within {ROW_TOL}")
        if not 0.0 < self.discount < 1.0:
            raise DomainError("discount must lie strictly inside (0, 1)")
        object.__setattr__(self, "rewards", r)
        object.__setattr__(self, "transition", p)

    @property
    def num_players(self) -> int:
        return self.rewards.shape[0]

    @property
    def num_states(self) -> int:
        return self.rewards.shape[1]

    @property
    def action_counts(self) -> tuple[int, ...]:
        return self.rewards.shape[2:]


@dataclass(frozen=True)
class Policy:
    """Per-state distribution over one player's actions."""

    table: np.ndarray  # (S, A)

    def __post_init__(self) -> None:
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 2:
            raise ShapeError("policy table must be (states, actions)")
        if t.min() < 0.0:
            raise DomainError("policy entries must be nonnegative")
        if np.max(np.abs(t.sum(axis=1) - 1.0)) > POLICY_TOL:
            raise DomainError(f"policy rows must sum to 1 within {POLICY_TOL}")
        object.__setattr__(self, "table", t)

    @property
    def num_states(self) -> int:
        return self.table.shape[0]

    @property
    def num_actions(self) -> int:
        return self.table.shape[1]

    def probs(self, state: int) -> np.ndarray:
        return self.table[state]


@dataclass(frozen=True)
class SolverConfig:
    discount: float = 0.95
    tolerance: float = 1e-3
    max_iterations: int = 100
    smoothing: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 < self.discount < 1.0:
            raise DomainError("discount must lie in (0, 1)")
        if self.tolerance <= 0.0 or self.max_iterations <= 0:
            raise DomainError("tolerance and max_iterations must be positive")
        if not 0.0 <= self.smoothing < 1.0:
            raise DomainError("smoothing must lie in [0, 1)")


# -- likelihood-ratio monitoring -------------------------------------------


def lr_evalue(null_policy: Policy, alt_policy: Policy, state: int, action: int) -> float:
    """Per-round likelihood ratio of the alternative against the null."""
    p0 = float(null_policy.table[state, action])
    p1 = float(alt_policy.table[state, action])
    if p0 == 0.0:
        if p1 > 0.0:
            raise SupportViolationError(
                f"null puts no mass on action {action} in state {state}"
            )
        raise UndefinedActionError(
            f"both policies put no mass on action {action} in state {state}"
        )
    return p1 / p0


@dataclass
class LRMonitorState:
    """Mixture of likelihood-ratio wealth processes over candidate deviations.

    Components are accumulated in log space; a zero-likelihood observation
    (or a support violation) kills its component rather than erroring, so a
    mixture survives one dead alternative.
    """

    alternatives: tuple
    prior_weights: np.ndarray
    log_lr: np.ndarray = field(default=None)  # type: ignore[assignment]
    round: int = 0
    running_max: float = 1.0
    crossing_time: int | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.prior_weights, dtype=float)
        if w.ndim != 1 or w.size != len(self.alternatives):
            raise ShapeError("one prior weight per alternative")
        if w.min() <= 0.0 or abs(w.sum() - 1.0) > POLICY_TOL:
            raise DomainError("prior weights must be positive and sum to 1")
        self.prior_weights = w
        if self.log_lr is None:
            self.log_lr = np.zeros(w.size)

    @classmethod
    def fresh(cls, alternatives, prior_weights=None) -> "LRMonitorState":
        alternatives = tuple(alternatives)
        if prior_weights is None:
            prior_weights = np.full(len(alternatives), 1.0 / len(alternatives))
        return cls(alternatives=alternatives, prior_weights=prior_weights)

    def value(self) -> float:
        finite = np.isfinite(self.log_lr)
        if not finite.any():
            return 0.0
        logs = self.log_lr[finite]
        w = self.prior_weights[finite]
        shift = logs.max()
        return float(math.exp(shift) * np.sum(w * np.exp(logs - shift)))

    def update_probs(self, null_prob: float, alt_probs, threshold: float) -> "LRMonitorState":
        """Advance by one observation given the per-policy action probabilities."""
        alt_probs = np.asarray(alt_probs, dtype=float)
        if alt_probs.shape != self.log_lr.shape:
            raise ShapeError("one alternative probability per component")
        if null_prob > 0.0:
            with np.errstate(divide="ignore"):
                self.log_lr += np.where(
                    alt_probs > 0.0, np.log(alt_probs) - math.log(null_prob), -np.inf
                )
        else:
            # Null-impossible action observed: every alternative explaining it
            # violates the support condition and is killed, the rest get 0/0
            # mass and die as well.
            self.log_lr[:] = -np.inf
        self.round += 1
        v = self.value()
        if v > self.running_max:
            self.running_max = v
        if self.crossing_time is None and v >= threshold:
            self.crossing_time = self.round
        return self


def lr_step(
    state: LRMonitorState,
    observed_state: int,
    observed_action: int,
    null_policy: Policy,
    threshold: float,
) -> LRMonitorState:
    """Advance the mixture monitor on one observed (state, action) pair."""
    null_prob = float(null_policy.table[observed_state, observed_action])
    alt_probs = np.array(
        [alt.table[observed_state, observed_action] for alt in state.alternatives]
    )
    return state.update_probs(null_prob, alt_probs, threshold)


def lr_detection_bound(
    b: float, overshoot: float, kl_bar: float, prior_weight: float = 1.0
) -> float:
    """Expected-detection-time ceiling (log b + log(1/w) + C) / KL.

    ``prior_weight`` is the mixture mass on the true alternative; 1 recovers
    the single-alternative bound.
    """
    if b <= 1.0:
        raise DomainError("threshold must exceed 1")
    if overshoot < 0.0:
        raise DomainError("overshoot constant must be nonnegative")
    if kl_bar <= 0.0:
        raise DomainError("state-averaged KL must be positive")
    if not 0.0 < prior_weight <= 1.0:
        raise DomainError("prior weight must lie in (0, 1]")
    return (math.log(b) + math.log(1.0 / prior_weight) + overshoot) / kl_bar


def overshoot_constant(null_policy: Policy, alt_policy: Policy) -> float:
    """Largest |log ratio| over the alternative's support (inf if violated)."""
    mask = alt_policy.table > 0.0
    if np.any(mask & (null_policy.table == 0.0)):
        return math.inf
    ratios = alt_policy.table[mask] / null_policy.table[mask]
    return float(np.max(np.abs(np.log(ratios))))


# -- divergences ------------------------------------------------------------


def kl_divergence(p, q) -> float:
    """Discrete KL(p || q) with the 0 log 0 = 0 convention."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ShapeError("distributions must have the same length")
    mask = p > 0.0
    if np.any(mask & (q == 0.0)):
        return math.inf
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def state_avg_kl(null_policy: Policy, alt_policy: Policy, mu) -> float:
    """KL between alternative and null play, averaged over a state weight.

    Returns infinity (with a diagnostic log line) when the alternative uses
    an action the null excludes on a state with positive weight.
    """
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (null_policy.num_states,):
        raise ShapeError("mu must weight every state")
    if null_policy.table.shape != alt_policy.table.shape:
        raise ShapeError("policies must share a shape")
    total = 0.0
    for s in np.nonzero(mu > 0.0)[0]:
        kl = kl_divergence(alt_policy.table[s], null_policy.table[s])
        if math.isinf(kl):
            logger.warning(
                "support violation at state %d with weight %g", s, mu[s]
            )
            return math.inf
        total += float(mu[s]) * kl
    return total


def empirical_state_distribution(visits, num_states: int) -> np.ndarray:
    """Visit frequencies from a rollout, as a distribution over states.

    Episodic environments are not single ergodic chains, so detection-rate
    diagnostics average the per-state KL under the visit frequencies of a
    long (>= 1e4 steps) rollout under the alternative instead of a
    stationary distribution.
    """
    visits = np.asarray(visits, dtype=int)
    if visits.size == 0:
        raise DomainError("need at least one visited state")
    if visits.min() < 0 or visits.max() >= num_states:
        raise ShapeError("visited state index out of range")
    counts = np.bincount(visits, minlength=num_states)
    return counts / counts.sum()


def chi_square_div(q, p) -> float:
    """Half the chi-square distance sum (q - p)^2 / p."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if q.shape != p.shape:
        raise ShapeError("distributions must have the same length")
    if p.min() <= 0.0:
        raise DomainError("base distribution must have full support")
    for name, dist in (("q", q), ("p", p)):
        if dist.min() < 0.0 or abs(dist.sum() - 1.0) > 1e-9:
            raise DomainError(f"{name} must be a probability distribution")
    return float(0.5 * np.sum((q - p) ** 2 / p))


def kl_quadratic_check(p, q, epsilons) -> list[tuple[float, float, float]]:
    """Exact KL of each mixture (1-e)p + eq against p, next to e^2 * chi^2."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    chi2 = chi_square_div(q, p)
    rows = []
    for eps in epsilons:
        if not 0.0 <= eps <= 1.0:
            raise DomainError("epsilon must lie in [0, 1]")
        mixed = (1.0 - eps) * p + eps * q
        rows.append((float(eps), kl_divergence(mixed, p), float(eps**2 * chi2)))
    return rows


# -- stationary distributions ------------------------------------------------


def stationary_distribution(chain) -> np.ndarray:
    """Stationary distribution of an ergodic chain by power iteration.

    Requires a single recurrent class (transient states are allowed and get
    weight zero). Periodic chains fail to converge from the asymmetric start
    and raise within the iteration budget.
    """
    P = np.asarray(chain, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ShapeError("chain must be a square matrix")
    if P.min() < 0.0 or np.max(np.abs(P.sum(axis=1) - 1.0)) > ROW_TOL:
        raise DomainError("chain must be row-stochastic")
    n_comp, labels = connected_components(
        csr_matrix(P > 0.0), directed=True, connection="strong"
    )
    # A class is recurrent iff nothing leaves it.
    leaves = np.zeros(n_comp, dtype=bool)
    src, dst = np.nonzero(P > 0.0)
    crossing = labels[src] != labels[dst]
    leaves[labels[src[crossing]]] = True
    if int(np.sum(~leaves)) != 1:
        raise ErgodicityError("chain does not have a single recurrent class")
    n = P.shape[0]
    mu = np.arange(1, n + 1, dtype=float)
    mu /= mu.sum()
    prev = None
    for _ in range(STATIONARY_MAX_ITER):
        nxt = mu @ P
        if np.abs(nxt - mu).sum() <= STATIONARY_RESIDUAL:
            return nxt / nxt.sum()
        if prev is not None and np.abs(nxt - prev).sum() <= STATIONARY_RESIDUAL:
            # Settled into a 2-cycle instead of a fixed point.
            raise ErgodicityError("chain is periodic")
        prev = mu
        mu = nxt
    raise ErgodicityError("power iteration did not converge (periodic chain?)")


# -- zero-sum solving ---------------------------------------------------------


@dataclass(frozen=True)
class MatrixGameSolution:
    value: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray


def matrix_game_solve(payoff) -> MatrixGameSolution:
    """Maximin solution of a zero-sum matrix game for the row player.

    The column strategy is recovered from the LP duals; both strategies are
    valid distributions and the best-response gap against either is within
    1e-6 of the value.
    """
    A = np.asarray(payoff, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise ShapeError("payoff must be a nonempty matrix")
    if not np.all(np.isfinite(A)):
        raise DomainError("payoff entries must be finite")
    rows, cols = A.shape
    if rows == 1 and cols == 1:
        return MatrixGameSolution(float(A[0, 0]), np.array([1.0]), np.array([1.0]))
    if rows == 1:
        c = int(np.argmin(A[0]))
        col = np.zeros(cols)
        col[c] = 1.0
        return MatrixGameSolution(float(A[0, c]), np.array([1.0]), col)
    if cols == 1:
        r = int(np.argmax(A[:, 0]))
        row = np.zeros(rows)
        row[r] = 1.0
        return MatrixGameSolution(float(A[r, 0]), row, np.array([1.0]))

    # A pure saddle point is an exact equilibrium; skip the LP when one exists.
    row_mins = A.min(axis=1)
    col_maxs = A.max(axis=0)
    r = int(np.argmax(row_mins))
    c = int(np.argmin(col_maxs))
    if row_mins[r] == col_maxs[c]:
        row = np.zeros(rows)
        col = np.zeros(cols)
        row[r] = 1.0
        col[c] = 1.0
        return MatrixGameSolution(float(row_mins[r]), row, col)

    # Variables (x_1..x_R, v): maximize v subject to A^T x >= v, sum x = 1.
    c = np.zeros(rows + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-A.T, np.ones((cols, 1))])
    a_eq = np.hstack([np.ones((1, rows)), np.zeros((1, 1))])
    bounds = [(0.0, None)] * rows + [(None, None)]
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(cols),
        A_eq=a_eq,
        b_eq=np.ones(1),
        bounds=bounds,
        method="highs",
    )
    if not res.success:  # pragma: no cover - zero-sum LPs are always feasible
        raise RuntimeError(f"matrix game LP failed: {res.message}")
    row = np.clip(res.x[:rows], 0.0, None)
    row /= row.sum()
    col = np.clip(-np.asarray(res.ineqlin.marginals), 0.0, None)
    total = col.sum()
    if not 0.5 < total < 2.0:  # pragma: no cover - dual degenerate fallback
        alt = matrix_game_solve(-A.T)
        col = alt.row_strategy
    else:
        col /= total
    return MatrixGameSolution(float(res.x[-1]), row, col)


def exploitability(payoff, row_strategy, col_strategy, value: float) -> float:
    """Largest pure best-response gain against the reported solution."""
    A = np.asarray(payoff, dtype=float)
    col_gain = float(np.max(A @ np.asarray(col_strategy)) - value)
    row_gain = float(value - np.min(np.asarray(row_strategy) @ A))
    return max(col_gain, row_gain, 0.0)


@dataclass(frozen=True)
class ShapleySolution:
    values: np.ndarray
    row_policy: Policy
    col_policy: Policy
    converged: bool
    iterations: int
    residual: float


def shapley_solve_arrays(
    rewards: np.ndarray, transition: np.ndarray, config: SolverConfig
) -> ShapleySolution:
    """Value iteration for a two-player zero-sum tabular game.

    ``rewards`` is the row player's (S, A_row, A_col) payoff in any affine
    units; each sweep solves the matrix game of the discounted Q-values per
    state and stops when the value function moves less than the tolerance.
    """
    rewards = np.asarray(rewards, dtype=float)
    transition = np.asarray(transition, dtype=float)
    num_states, a_row, a_col = rewards.shape
    if transition.shape != (num_states, a_row, a_col, num_states):
        raise ShapeError("transition shape does not match rewards")
    values = np.zeros(num_states)
    row_tables = np.full((num_states, a_row), 1.0 / a_row)
    col_tables = np.full((num_states, a_col), 1.0 / a_col)
    converged = False
    residual = math.inf
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        q = rewards + config.discount * np.einsum(
            "sabt,t->sab", transition, values
        )
        new_values = np.empty(num_states)
        for s in range(num_states):
            sol = matrix_game_solve(q[s])
            new_values[s] = sol.value
            row_tables[s] = sol.row_strategy
            col_tables[s] = sol.col_strategy
        residual = float(np.max(np.abs(new_values - values)))
        values = new_values
        if residual < config.tolerance:
            converged = True
            break
    return ShapleySolution(
        values=values,
        row_policy=Policy(row_tables),
        col_policy=Policy(col_tables),
        converged=converged,
        iterations=iterations,
        residual=residual,
    )


def shapley_solve(model: StochasticGameModel, config: SolverConfig) -> ShapleySolution:
    """Solve a two-player zero-sum (possibly affinely rescaled) model.

    The model's own discount governs the iteration; ``config.discount`` only
    applies to the raw-array entry point.
    """
    if model.num_players != 2:
        raise DomainError("the solver handles two-player games")
    total = model.rewards[0] + model.rewards[1]
    if float(np.max(total) - np.min(total)) > 1e-9:
        raise DomainError("rewards must be zero-sum up to an affine rescaling")
    effective = dataclasses.replace(config, discount=model.discount)
    return shapley_solve_arrays(model.rewards[0], model.transition, effective)


def smooth_policy(policy: Policy, beta: float) -> Policy:
    """Blend every row with the uniform distribution; floors each action at
    beta/|A| so likelihood ratios against the result stay bounded."""
    if not 0.0 <= beta < 1.0:
        raise DomainError("beta must lie in [0, 1)")
    a = policy.num_actions
    return Policy((1.0 - beta) * policy.table + beta / a)


def mixture_policy(base: Policy, target: Policy, epsilon: float) -> Policy:
    """Row-wise convex combination (1 - epsilon) * base + epsilon * target."""
    if base.table.shape != target.table.shape:
        raise ShapeError("policies must share a shape")
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError("epsilon must lie in [0, 1]")
    return Policy((1.0 - epsilon) * base.table + epsilon * target.table)


# -- text serialization -------------------------------------------------------


def _format_floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def policy_to_text(policy: Policy) -> str:
    lines = [POLICY_HEADER, f"states {policy.num_states}", f"actions {policy.num_actions}"]
    for s in range(policy.num_states):
        lines.append(_format_floats(policy.table[s]))
    return "\n".join(lines) + "\n"


def policy_from_text(text: str) -> Policy:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != POLICY_HEADER:
        raise DomainError("unrecognized policy header")
    num_states = int(lines[1].split()[1])
    num_actions = int(lines[2].split()[1])
    rows = [
        np.array([float(v) for v in lines[3 + s].split()])
        for s in range(num_states)
    ]
    table = np.vstack(rows)
    if table.shape != (num_states, num_actions):
        raise ShapeError("policy body does not match its header")
    return Policy(table)


def model_to_text(model: StochasticGameModel) -> str:
    lines = [
        MODEL_HEADER,
        f"players {model.num_players}",
        f"states {model.num_states}",
        "actions " + " ".join(str(a) for a in model.action_counts),
        f"discount {model.discount!r}",
    ]
    for i in range(model.num_players):
        lines.append(f"rewards {i} " + _format_floats(model.rewards[i].ravel()))
    lines.append("transition " + _format_floats(model.transition.ravel()))
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> StochasticGameModel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != MODEL_HEADER:
        raise DomainError("unrecognized model header")
    players = int(lines[1].split()[1])
    states = int(lines[2].split()[1])
    actions = tuple(int(v) for v in lines[3].split()[1:])
    discount = float(lines[4].split()[1])
    rewards = np.empty((players, states, *actions))
    for i in range(players):
        parts = lines[5 + i].split()
        if parts[0] != "rewards" or int(parts[1]) != i:
            raise DomainError("malformed rewards block")
        rewards[i] = np.array([float(v) for v in parts[2:]]).reshape(states, *actions)
    parts = lines[5 + players].split()
    transition = np.array([float(v) for v in parts[1:]]).reshape(
        states, *actions, states
    )
    return StochasticGameModel(rewards=rewards, transition=transition, discount=discount)
