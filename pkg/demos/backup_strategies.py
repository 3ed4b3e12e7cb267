"""All six backup strategies on the same two decision problems.

First a tic-tac-toe position with a forced win, then a synthetic min-max
tree where the best move is only visible after resolving a min over
noisy leaves.  Run:

    python3 demos/backup_strategies.py
"""

import numpy as np

from mctsopt import (CoulomBackup, ErwaBackup, FeedbackBackup, MonotoneBackup,
                     SearchConfig, SoftmaxBackup, StandardBackup, SyntheticTree,
                     empty_board, minimax_value, run_search)

STRATEGIES = {
    "standard": StandardBackup(),
    "erwa 0.05": ErwaBackup(0.05),
    "coulom (2,16)": CoulomBackup(2.0, 16),
    "feedback GBY": FeedbackBackup("GBY", 64.0, 2000),
    "monotone": MonotoneBackup.from_knots((-4.0, -4.0, -4.0), 2000),
    "softmax": SoftmaxBackup.from_knots((-3.5, -3.0, -2.5), 2000),
}

print("= tic-tac-toe: X must take the winning cell 2 ".ljust(64, "="))
state = empty_board()
for move in (0, 3, 1, 4):
    state = state.apply(move)
print(state)
print(f"exact value: {minimax_value(state)}")
for name, strategy in STRATEGIES.items():
    cfg = SearchConfig(simulations=500, policy="UCB1", exploration=1.0,
                       backup=strategy, seed=1)
    result = run_search(state, cfg)
    print(f"  {name:14s} -> plays {result.best_action} "
          f"(root value {result.root_q:.3f})")

print()
print("= depth-2 tree: action quality is the minimum of its leaves ".ljust(64, "="))
leaves = np.array([0.30, 0.90, 0.50,
                   0.80, 0.70, 0.95,
                   0.10, 0.60, 0.40])
tree = SyntheticTree(branching=3, depth=2, leaf_values=leaves)
root = tree.root
mins = leaves.reshape(3, 3).min(axis=1)
print(f"per-action worst case: {mins} -> best action "
      f"{int(np.argmax(mins))} (value {mins.max()})")
for name, strategy in STRATEGIES.items():
    cfg = SearchConfig(simulations=3000, policy="UCB1", exploration=0.7,
                       backup=strategy, seed=2)
    result = run_search(root, cfg)
    print(f"  {name:14s} -> plays {result.best_action}, "
          f"visits {result.visit_distribution}")
