"""
Two sufficient tests
====================

Instability of the friction equilibrium is a second, independent route to
a limit cycle. Its margin is the closed-form criterion minus a positive
eps-correction, so it can only be more pessimistic. For small eps the two
agree; at larger eps they can split.
"""

# %%
import numpy as np

from stickslip import Params, StribeckConstants, detect_stick_slip, divergence, stribeck_law
from stickslip.criterion import stribeck_report

k = StribeckConstants(0.3, 0.1, 2.0)
p = Params(0.5, 0.5, 0.01)

# %%
r = stribeck_report(k, p)
print(f"closed-form {r.closed_form_margin:.4f}, instability {r.instability_margin:.6f}")
print(f"divergence at rest {divergence(0.0, k, p):.6e} = eps * instability margin")

# %%
# Divergence along the detected slip arc.

rep = detect_stick_slip(p, stribeck_law(k))
div = divergence(rep.ret.trajectory.x2, k, p)
print(f"divergence on the arc ranges over [{div.min():.5f}, {div.max():.5f}]")

# %%
# A point where the tests split: the criterion predicts a cycle, the
# equilibrium is stable.

k2 = StribeckConstants(0.3, 0.1, 0.9)
p2 = Params(0.5, 0.5, 0.1)
r2 = stribeck_report(k2, p2)
rep2 = detect_stick_slip(p2, stribeck_law(k2))
print(f"closed-form {r2.closed_form_margin:+.4f}, instability {r2.instability_margin:+.4f}, "
      f"detected {rep2.exists}")

# %%
# How large can eps get before the implication fails on a given point?

for g in (1.375, 4.0):
    kk = StribeckConstants(0.1, 0.05, g)
    eps = np.array([0.0, 0.01, 0.05, 0.1])
    m = [stribeck_report(kk, Params(1.05, 1.125, e)).instability_margin for e in eps]
    print(f"gamma={g}: instability margins {np.round(m, 3)} for eps {eps}")
