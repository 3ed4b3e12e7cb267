"""Tour of the monotone weight-profile family.

Every profile is w(t) = w0 + integral of exp(p), with p piecewise linear
through a handful of knots.  Constant knots give linear growth, a rising
line gives exponential growth, and a recency profile reproduces an
exponential recency-weighted average.  Run:

    python3 demos/weight_profiles.py
"""

import numpy as np

from mctsopt import build_weight_table, erwa_knots

HORIZON = 200

print("= constant knots: linear weights ".ljust(60, "="))
for c in (-2.0, 0.0):
    profile = build_weight_table([c, c, c], HORIZON, w0=1.0)
    print(f"knots all {c:+.1f}: w(t) = 1 + {np.exp(c):.3f} * t; "
          f"w(10) = {profile.table[10]:.4f}, w(200) = {profile.table[200]:.2f}")

print()
print("= rising knots: exponential weights ".ljust(60, "="))
profile = build_weight_table((-5.0, -2.5, 0.0), HORIZON, w0=1.0)
for t in (0, 50, 100, 150, 200):
    print(f"  w({t:3d}) = {profile.table[t]:10.3f}   log-slope p({t}) = "
          f"{profile.log_slope_at(t):+.2f}")

print()
print("= recency-equivalent profile ".ljust(60, "="))
alpha = 0.1
rec = erwa_knots(alpha, m=6, horizon=60)
print(f"alpha = {alpha}: w(t) doubles every "
      f"{np.log(2) / np.log(1 / (1 - alpha)):.1f} visits")
print("  t:      ", "  ".join(f"{t:8d}" for t in (0, 10, 20, 40, 60)))
print("  w(t):   ", "  ".join(f"{rec.table[t]:8.3f}" for t in (0, 10, 20, 40, 60)))
print("  geometric oracle:",
      "  ".join(f"{alpha * (1 - alpha) ** (-t):8.3f}" for t in (0, 10, 20, 40, 60)))

print()
print("= every profile is strictly increasing ".ljust(60, "="))
rng = np.random.default_rng(0)
for _ in range(3):
    knots = rng.uniform(-6, 1, size=4)
    p = build_weight_table(knots, 100, w0=1.0)
    print(f"  knots {np.round(knots, 2)}: min step = "
          f"{np.min(np.diff(p.table)):.3e} > 0")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for knots, label in [((-3.5, -3.0, -2.5), "tuned sharpening"),
                         ((-2.0, -2.0, -2.0), "linear"),
                         ((-6.0, -4.0, -1.0), "late rise")]:
        p = build_weight_table(knots, HORIZON, w0=0.0)
        ax.plot(p.table, label=f"knots {knots}")
    ax.set_xlabel("visit count t")
    ax.set_ylabel("w(t)")
    ax.legend()
    fig.tight_layout()
    out = __file__.replace(".py", ".png")
    fig.savefig(out, dpi=120)
    print(f"\nsaved {out}")
except ImportError:
    pass
