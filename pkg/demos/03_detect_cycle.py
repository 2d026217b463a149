"""
Verifying the cycle numerically
===============================

The detector follows the slip arc from the grazing point and checks where
it lands on the belt-speed line. Landing inside the sliding segment closes
a stick-slip cycle; the return time should approach ``2 pi + sqrt(eps) a_-``.
"""

# %%
import math

import numpy as np

from stickslip import (
    EventKind,
    Mode,
    Params,
    State,
    StribeckConstants,
    convergence_table,
    detect_stick_slip,
    simulate,
    stribeck_law,
)
from _plot import plt, save

law = stribeck_law(StribeckConstants(0.3, 0.1, 2.0))
p = Params(0.5, 0.5, 0.01)

# %%
rep = detect_stick_slip(p, law)
print(f"exists={rep.exists} case={rep.case.value} landing x1={rep.x1_landing:.6f}")
print(f"slip {rep.slip_duration:.6f} + stick {rep.stick_duration:.6f} = period {rep.period:.6f}")

# %%
# Convergence of the return time.

for row in convergence_table(p, law, [1e-2, 1e-3, 1e-4]):
    print(f"eps={row.epsilon:.0e}  T={row.T:.8f}  pred={row.T_pred:.8f}  "
          f"residual/sqrt(eps)={row.residual_over_sqrt_eps:.3e}")

# %%
# A long Filippov run settles on the same cycle every period.

traj = simulate(State(p.exit_point, p.V, Mode.STICK), p, law, 30.0)
landings = [e.state.x1 for e in traj.events if e.kind is EventKind.SLIDING_ENTRY][1:]
print("landings:", np.round(landings, 10))

# %%
if plt is not None:
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(9, 3.5))
    a1.plot(traj.x1, traj.x2, lw=0.8)
    a1.axhline(p.V, color="k", lw=0.5, ls="--")
    a1.set_xlabel("x1")
    a1.set_ylabel("x2")
    a2.plot(traj.t, traj.x2, lw=0.8)
    a2.set_xlabel("t")
    a2.set_ylabel("x2")
    save(fig, "stick_slip_cycle.png")
