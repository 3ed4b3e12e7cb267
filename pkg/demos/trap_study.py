"""Miniature search-trap study: averaging versus softmax backups.

Generates seeded trees whose tempting root action hides a forced loss
three plies deep, then counts how often each engine plays it at 1000
simulations.  A small run of the experiment behind the full acceptance
study.  Run:

    python3 demos/trap_study.py [n_trees]
"""

import sys

from mctsopt import (SearchConfig, SoftmaxBackup, StandardBackup, SyntheticPool,
                     run_search)
from mctsopt.seeds import derive

N_TREES = int(sys.argv[1]) if len(sys.argv) > 1 else 30

POOL = SyntheticPool(branching=4, depth=8, leaf_win_prob=0.75,
                     trap_level=3, trap_count=1, trap_prior=0.92,
                     trap_deviation_win_prob=0.95, trap_sealed_win_prob=0.65)

ENGINES = {
    "standard": StandardBackup(),
    "softmax": SoftmaxBackup.from_knots((-3.5, -3.0, -2.5), 1000),
}

print(f"{N_TREES} trees, one tempting level-3 trap each, 1000 sims/move\n")
counts = {name: 0 for name in ENGINES}
for i in range(N_TREES):
    root = POOL.make(derive(7, "demo-tree", i))
    trap = root.tree.trap_actions[0]
    row = [f"tree {i:3d} (trap = action {trap})"]
    for name, backup in ENGINES.items():
        cfg = SearchConfig(simulations=1000, policy="PUCT", exploration=0.1,
                           backup=backup, seed=derive(7, "demo-search", i, name))
        picked = run_search(root, cfg).best_action
        trapped = picked == trap
        counts[name] += trapped
        row.append(f"{name}: {'TRAPPED' if trapped else 'safe':8s}")
    print("  ".join(row))

print()
for name, c in counts.items():
    print(f"{name:9s} fell into the trap {c}/{N_TREES} times "
          f"({c / N_TREES:.0%})")
