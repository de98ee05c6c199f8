"""Independent reference computations used by the tests.

These deliberately avoid the library's numpy paths: expectations are summed
with ``fractions.Fraction`` over explicit profile enumerations, and best
responses are enumerated directly.
"""

from fractions import Fraction
from itertools import product

import numpy as np


def frac_expected_payoff(payoffs, factors, player) -> Fraction:
    """Exact expectation over a product strategy given Fraction payoffs.

    ``payoffs[i]`` is a nested list (indexable by profile tuples) of
    Fractions; ``factors`` are per-player lists of Fractions.
    """
    counts = [len(f) for f in factors]
    total = Fraction(0)
    for profile in product(*(range(c) for c in counts)):
        weight = Fraction(1)
        for a, f in zip(profile, factors):
            weight *= f[a]
        entry = payoffs[player]
        for a in profile:
            entry = entry[a]
        total += weight * entry
    return total


def frac_deviation_gain(payoffs, factors, player, deviation) -> Fraction:
    counts = [len(f) for f in factors]
    base = frac_expected_payoff(payoffs, factors, player)
    dev_total = Fraction(0)
    for profile in product(*(range(c) for c in counts)):
        weight = Fraction(1)
        for a, f in zip(profile, factors):
            weight *= f[a]
        switched = list(profile)
        switched[player] = deviation
        entry = payoffs[player]
        for a in switched:
            entry = entry[a]
        dev_total += weight * entry
    return dev_total - base


def enumerate_deviation_gain(payoffs, law, player, deviation) -> float:
    """Float oracle over an explicit joint law tensor (any strategy kind)."""
    law = np.asarray(law, dtype=float)
    gain = 0.0
    for profile in product(*(range(c) for c in law.shape)):
        switched = list(profile)
        switched[player] = deviation
        gain += law[profile] * (
            payoffs[player][tuple(switched)] - payoffs[player][profile]
        )
    return gain


def best_response_gap(payoff, row_strategy, col_strategy, value) -> float:
    """Pure best-response enumeration for a zero-sum matrix game."""
    payoff = np.asarray(payoff, dtype=float)
    best_row = max(
        float(np.dot(payoff[r], col_strategy)) for r in range(payoff.shape[0])
    )
    worst_col = min(
        float(np.dot(row_strategy, payoff[:, c])) for c in range(payoff.shape[1])
    )
    return max(best_row - value, value - worst_col, 0.0)


TWO_SIGNAL_PAYOFFS = [
    [
        [Fraction(9, 10), Fraction(2, 10)],
        [Fraction(3, 10), Fraction(7, 10)],
    ],
    [
        [Fraction(5, 10), Fraction(3, 10)],
        [Fraction(2, 10), Fraction(7, 10)],
    ],
]

TWO_SIGNAL_NASH = [
    [Fraction(5, 7), Fraction(2, 7)],
    [Fraction(5, 11), Fraction(6, 11)],
]

TWO_SIGNAL_ALTERNATIVE = [
    [Fraction(17, 20), Fraction(3, 20)],
    [Fraction(13, 20), Fraction(7, 20)],
]
