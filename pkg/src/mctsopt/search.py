"""Four-phase Monte-Carlo tree search with pluggable backups.

Each iteration selects a path with UCB1 or PUCT, expands the first
unexpanded node it reaches (adding all children at once, their states
materialized lazily), evaluates the state of the child the tree policy
picks there, and hands the return to the backup strategy.  The updated
path ends at the expanded node itself: a node's first visit is its own
expansion pass, so after any search every internal node satisfies
N_parent = 1 + sum of child visits, and the root children's visit counts
sum to simulations - 1.

A search owns its tree exclusively and runs single-threaded; parallelism
happens across searches, which share immutable game states and strategy
objects.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

from .backup import BackupStrategy, StandardBackup
from .games.base import GameState, PlayerRole
from .games.oracle import RandomRolloutEvaluator, evaluate
from .seeds import derive

POLICIES = ("UCB1", "PUCT")


class SearchNode:
    """Per-node search statistics.

    children is None until the node is expanded; terminal nodes are never
    expanded.  acc_value / acc_weight are the backup strategies' scratch
    accumulators (weighted return sum and weight sum).
    """

    __slots__ = ("visits", "q", "prior", "is_max", "child_actions", "children",
                 "acc_value", "acc_weight")

    def __init__(self, is_max: bool, prior: float = 1.0):
        self.visits = 0
        self.q = 0.0
        self.prior = prior
        self.is_max = is_max
        self.child_actions = None
        self.children = None
        self.acc_value = 0.0
        self.acc_weight = 0.0

    @property
    def expanded(self) -> bool:
        return self.children is not None


@dataclass
class SearchConfig:
    """Everything needed to rerun a search bit-for-bit."""

    simulations: int
    policy: str = "PUCT"
    exploration: float = 0.5
    backup: BackupStrategy = field(default_factory=StandardBackup)
    evaluator: object = field(default_factory=RandomRolloutEvaluator)
    seed: int = 0
    root_priors: tuple | None = None

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}")
        if self.exploration < 0:
            raise ValueError("exploration constant must be non-negative")

    def with_seed(self, seed: int) -> "SearchConfig":
        return replace(self, seed=seed)


@dataclass
class SearchResult:
    """Outcome of one search; the tree stays inspectable via ``root``."""

    best_action: object
    root_q: float
    visit_distribution: dict
    principal_variation: list
    root: SearchNode


def ucb1_score(q: float, n_child: float, n_parent: float, c: float) -> float:
    """Q_a + C * sqrt(ln(N_parent) / (N_a + 1))."""
    return q + c * math.sqrt(math.log(n_parent) / (n_child + 1.0))


def puct_score(q: float, prior: float, n_child: float, n_parent: float,
               c: float) -> float:
    """Q_a + C * prior_a * sqrt(N_parent) / (N_a + 1)."""
    return q + c * prior * math.sqrt(n_parent) / (n_child + 1.0)


def _select_index(node: SearchNode, use_ucb1: bool, c: float) -> int:
    """Index of the tree-policy child; ties break to the lowest action index.

    The exploitation term is the child's Q for a maximizing parent and
    1 - Q for a minimizing one, so both players chase their own winning
    chance; unvisited children count as Q = 0.5.
    """
    children = node.children
    n_parent = node.visits if node.visits >= 1 else 1
    is_max = node.is_max
    best_i = 0
    best_s = -math.inf
    if use_ucb1:
        scale = c * math.sqrt(math.log(n_parent))
        for i, child in enumerate(children):
            nv = child.visits
            q = child.q if nv else 0.5
            s = (q if is_max else 1.0 - q) + scale / math.sqrt(nv + 1.0)
            if s > best_s:
                best_s = s
                best_i = i
    else:
        scale = c * math.sqrt(n_parent)
        for i, child in enumerate(children):
            nv = child.visits
            q = child.q if nv else 0.5
            s = (q if is_max else 1.0 - q) + scale * child.prior / (nv + 1.0)
            if s > best_s:
                best_s = s
                best_i = i
    return best_i


def select_child(parent: SearchNode, policy: str = "UCB1", c: float = 1.0):
    """Tree-policy action at an expanded node."""
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}")
    if not parent.children:
        raise ValueError("cannot select at an unexpanded or childless node")
    return parent.child_actions[_select_index(parent, policy == "UCB1", c)]


def backpropagate(path, value: float, strategy: BackupStrategy) -> None:
    """Update every node on a root-to-leaf path with a simulation return."""
    if not path:
        raise ValueError("path must be non-empty")
    if not 0.0 <= value <= 1.0:
        raise ValueError("returns must lie in [0, 1]")
    strategy.backpropagate(path, value)


def _expand(node: SearchNode, state: GameState, root_priors) -> None:
    actions = state.actions
    priors = root_priors if root_priors is not None else state.action_priors
    if priors is not None:
        if len(priors) != len(actions):
            raise ValueError("prior vector length does not match action count")
        total = float(sum(priors))
        if total <= 0 or any(p < 0 for p in priors):
            raise ValueError("priors must be non-negative with positive sum")
        priors = [p / total for p in priors]
    else:
        u = 1.0 / len(actions)
        priors = [u] * len(actions)
    child_max = not node.is_max
    node.child_actions = actions
    node.children = [SearchNode(child_max, p) for p in priors]


def run_search(root: GameState, config: SearchConfig) -> SearchResult:
    """Run ``config.simulations`` search iterations from ``root``."""
    if root.terminal:
        raise ValueError("cannot search a terminal position")
    if config.simulations < 1:
        raise ValueError("simulation budget must be positive")

    strategy = config.backup
    evaluator = config.evaluator
    use_ucb1 = config.policy == "UCB1"
    c = config.exploration
    rollout_rng = random.Random(derive(config.seed, "rollout"))

    root_node = SearchNode(is_max=root.to_move is PlayerRole.MAX)
    for _ in range(config.simulations):
        node = root_node
        state = root
        path = [node]
        while True:
            if state.terminal:
                value = state.terminal_return
                break
            if node.children is None:
                _expand(node, state,
                        config.root_priors if node is root_node else None)
                i = _select_index(node, use_ucb1, c)
                value = evaluate(state.apply(node.child_actions[i]),
                                 evaluator, rollout_rng)
                break
            i = _select_index(node, use_ucb1, c)
            state = state.apply(node.child_actions[i])
            node = node.children[i]
            path.append(node)
        strategy.backpropagate(path, value)

    visit_distribution = {
        a: child.visits
        for a, child in zip(root_node.child_actions, root_node.children)
    }
    best_action = root_node.child_actions[
        max(range(len(root_node.children)),
            key=lambda i: (root_node.children[i].visits, -i))]

    pv = []
    node = root_node
    while node.children:
        i = max(range(len(node.children)),
                key=lambda j: (node.children[j].visits, -j))
        if node.children[i].visits == 0:
            break
        pv.append(node.child_actions[i])
        node = node.children[i]

    return SearchResult(best_action=best_action, root_q=root_node.q,
                        visit_distribution=visit_distribution,
                        principal_variation=pv, root=root_node)
