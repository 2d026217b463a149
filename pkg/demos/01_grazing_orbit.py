"""
The grazing orbit without friction
===================================

With ``eps = 0`` the slip field is a harmonic oscillator about ``(1, 0)``.
Launched from ``(1, V)`` the orbit is the circle ``x1 = 1 + V sin t``,
``x2 = V cos t`` and touches the belt-speed line again at ``t = 2 pi``.
The integrator should report that touch as a tangential contact.
"""

# %%
import math

import numpy as np

from stickslip import Mode, Params, State, coulomb_law, integrate_slip
from _plot import plt, save

law = coulomb_law()

# %%
# Return to the launch point for a few belt speeds.

for V in (0.25, 0.5, 1.0, 2.0):
    p = Params(c=1.0, V=V, epsilon=0.0)
    traj, ev = integrate_slip(State(1.0, V, Mode.SLIP_BELOW), p, law, "below", 2 * math.pi + 1)
    err = math.hypot(ev.state.x1 - 1.0, ev.state.x2 - V)
    print(f"V={V:4}: {ev.kind.value} at t-2pi={ev.t - 2 * math.pi:+.1e}, "
          f"position error {err:.1e}, grazing={traj.meta['grazing']}")

# %%
# The samples sit on the exact circle.

p = Params(1.0, 0.5, 0.0)
traj, _ = integrate_slip(State(1.0, 0.5, Mode.SLIP_BELOW), p, law, "below", 2 * math.pi + 1)
drift = np.max(np.abs((traj.x1 - 1) ** 2 + traj.x2**2 - 0.25))
print(f"max energy drift over one period: {drift:.1e}")

# %%
if plt is not None:
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.plot(traj.x1, traj.x2, lw=1)
    ax.axhline(p.V, color="k", lw=0.5, ls="--")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_aspect("equal")
    save(fig, "grazing_orbit.png")
