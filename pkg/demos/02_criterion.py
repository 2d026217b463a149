"""
Predicting stick-slip from one integral
=======================================

The first-order criterion compares ``c V pi`` with the integral of the
friction law's eps-derivative along the grazing circle. For the Stribeck
law that integral has a closed form, so the quadrature can be checked
directly, and a second route through the variational equation must give
the same number.
"""

# %%
import math

from stickslip import (
    Params,
    StribeckConstants,
    coulomb_law,
    perturbation_margin,
    stribeck_law,
    stribeck_report,
    variational_y2,
)

k = StribeckConstants(alpha=0.3, beta=0.1, gamma=2.0)
p = Params(c=0.5, V=0.5, epsilon=0.01)

# %%
# Quadrature against the closed form ``pi V (gamma (1 - alpha) - 2 beta V)``.

r = perturbation_margin(stribeck_law(k), p)
closed = math.pi * p.V * (k.gamma * (1 - k.alpha) - 2 * k.beta * p.V)
print(f"I = {r.integral_I:.15f}  closed form {closed:.15f}")
print(f"margin = {r.margin:.6f} (0.4 pi = {0.4 * math.pi:.6f})")
print(f"roots a+- = +-{r.a_plus:.6f}, predicted return {r.predicted_return_time(p.epsilon):.6f}")

# %%
# The variational route.

print(f"y2(2 pi) = {variational_y2(2 * math.pi, stribeck_law(k), p):.15f}")

# %%
# Coulomb friction has no eps-dependence at all, so the margin is ``-c V pi``.

rc = perturbation_margin(coulomb_law(), Params(1.0, 0.5, 0.01))
print(f"Coulomb margin {rc.margin:.6f}, roots {rc.a_plus}")

# %%
# The equilibrium test uses a different margin; at small eps the two agree in sign.

sr = stribeck_report(k, p)
print(f"closed-form margin {sr.closed_form_margin:.4f}, "
      f"instability margin {sr.instability_margin:.6f}, xi = {sr.equilibrium_xi:.6f}")
