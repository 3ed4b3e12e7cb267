"""Exact minimax oracle and the two leaf evaluators.

The oracle refuses (rather than truncates) when a game would exceed the
node ceiling, so a returned value is always exact.  The noisy oracle
evaluator stands in for a learned value function: exact value plus
clamped Gaussian noise, keyed by (state, seed) so concurrent searches
see identical noise.
"""

from __future__ import annotations

import math

from ..seeds import derive
from .base import GameState, NodeLimitError, PlayerRole
from .synthetic import MAX_ORACLE_NODES, SyntheticTreeState


def minimax_value(state: GameState, node_limit: int = MAX_ORACLE_NODES) -> float:
    """Exact game value of ``state`` in [0, 1] from MAX's perspective.

    Synthetic trees answer from cached bottom-up level arrays; other games
    run a memoized depth-first search.  Exceeding ``node_limit`` raises
    NodeLimitError instead of returning an approximate value.
    """
    if isinstance(state, SyntheticTreeState):
        tree = state.tree
        total = (tree.branching**(tree.depth + 1) - 1) // (tree.branching - 1)
        if total > node_limit:
            raise NodeLimitError(f"{total} nodes exceed the {node_limit} ceiling")
        return tree.node_value(state.depth, state.index)

    memo: dict = {}
    budget = [node_limit]

    def value(s: GameState) -> float:
        key = s.state_key()
        cached = memo.get(key)
        if cached is not None:
            return cached
        budget[0] -= 1
        if budget[0] < 0:
            raise NodeLimitError(f"exact search exceeded {node_limit} nodes")
        if s.terminal:
            v = s.terminal_return
        else:
            children = (value(s.apply(a)) for a in s.actions)
            v = max(children) if s.to_move is PlayerRole.MAX else min(children)
        memo[key] = v
        return v

    return value(state)


def best_actions(state: GameState) -> tuple[list, float]:
    """Actions achieving the mover's optimal value, plus that value."""
    if state.terminal:
        raise ValueError("terminal state has no actions")
    values = [(a, minimax_value(state.apply(a))) for a in state.actions]
    if state.to_move is PlayerRole.MAX:
        best = max(v for _, v in values)
    else:
        best = min(v for _, v in values)
    return [a for a, v in values if v == best], best


class RandomRolloutEvaluator:
    """Uniformly random playouts to the end of the game.

    With samples > 1 the evaluation is the mean of several independent
    playouts, trading simulation count for lower return variance.
    """

    kind = "rollout"

    def __init__(self, samples: int = 1):
        if samples < 1:
            raise ValueError("samples must be positive")
        self.samples = int(samples)

    def evaluate(self, state: GameState, rng) -> float:
        total = 0.0
        for _ in range(self.samples):
            probe = state
            while not probe.terminal:
                actions = probe.actions
                probe = probe.apply(actions[rng.randrange(len(actions))])
            total += probe.terminal_return
        return total / self.samples


class NoisyOracleEvaluator:
    """Exact value plus clamped Gaussian noise, reproducible per state.

    The noise for a given (state, seed) pair never changes, regardless of
    evaluation order or thread count.
    """

    kind = "noisy_oracle"

    def __init__(self, noise_sd: float = 0.0, seed: int = 0):
        if noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")
        self.noise_sd = float(noise_sd)
        self.seed = int(seed)

    def evaluate(self, state: GameState, rng=None) -> float:
        v = minimax_value(state)
        if self.noise_sd == 0.0:
            return v
        key = derive(self.seed, "oracle-noise", *map(str, state.state_key()))
        u1 = (derive(key, 1) + 1) / 18446744073709551617.0
        u2 = (derive(key, 2) + 1) / 18446744073709551617.0
        z = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        return min(1.0, max(0.0, v + self.noise_sd * z))


def evaluate(state: GameState, evaluator, rng=None) -> float:
    """Return an estimate of ``state``'s value using ``evaluator``.

    Terminal states return their exact terminal value under either
    evaluator.
    """
    if state.terminal:
        return state.terminal_return
    return evaluator.evaluate(state, rng)
