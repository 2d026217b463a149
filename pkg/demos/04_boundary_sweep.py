"""
Where the criterion switches
============================

Sweeping gamma across ``gamma* = (c + 2 beta V) / (1 - alpha)`` shows the
detector's verdict flipping near the analytic root. At finite eps the
detected boundary is shifted by an amount that shrinks with eps.
"""

# %%
import numpy as np

from stickslip.sweep import Axis, SweepSpec, locate_boundary, run_sweep, sweep_csv
from _plot import plt, save

fixed = {"alpha": 0.3, "beta": 0.1, "c": 0.5, "V": 0.5}

# %%
spec = SweepSpec((Axis("gamma", 0.5, 1.5, 21),), fixed, (0.001, 0.01, 0.05))
records = run_sweep(spec)
print(sweep_csv(records[8:12]))

# %%
for eps in (0.05, 0.01, 0.001):
    analytic, detected = locate_boundary("gamma", 0.5, 1.5, fixed, eps)
    print(f"eps={eps:<6} gamma* = {analytic:.6f}, detected {detected:.5f}, "
          f"gap {abs(detected - analytic):.2e}")

# %%
if plt is not None:
    g = np.array([r.point["gamma"] for r in records])
    fig, ax = plt.subplots(figsize=(6, 3))
    for i, eps in enumerate(spec.epsilon_list):
        ax.plot(g, [r.detected[i] + 0.03 * i for r in records], "o-", ms=3, label=f"eps={eps}")
    ax.axvline(0.6 / 0.7, color="k", lw=0.5)
    ax.set_xlabel("gamma")
    ax.set_ylabel("cycle detected")
    ax.legend()
    save(fig, "boundary_sweep.png")
