"""First-order stick-slip criterion and the Stribeck closed forms.

For small ``eps`` the orbit launched from the grazing point ``(1 - eps*c*V, V)``
returns to the belt-speed line at time ``2*pi + sqrt(eps)*a`` where ``a``
solves ``-V/2 * a**2 + y2(2*pi) = 0`` and

    y2(2*pi) = -c*V*pi + integral_0^{2 pi} dF/deps(V cos t - V, 0) cos t dt.

A positive ``y2(2*pi)`` gives two real roots and a stick-slip cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import FrictionLaw, Params, StribeckConstants, as_float_array, friction_to_dict

__all__ = [
    "DEFAULT_PANELS",
    "GL_NODES",
    "CriterionReport",
    "StribeckReport",
    "composite_gauss_legendre",
    "grazing_curvature",
    "grazing_integral",
    "perturbation_margin",
    "variational_y2",
    "stribeck_report",
    "stribeck_boundary",
    "divergence",
]

DEFAULT_PANELS = 256
GL_NODES = 5
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_NODES)


def composite_gauss_legendre(func, a: float, b: float, n_panels: int = DEFAULT_PANELS):
    """Composite 5-point Gauss-Legendre rule for a vectorized ``func``.

    ``func`` may return an array with trailing components; the integral has
    the same trailing shape.
    """
    if n_panels < 16 or n_panels % 2:
        raise ValueError(f"n_panels must be an even integer >= 16, got {n_panels!r}")
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    values = np.asarray(func(x), dtype=float)
    return np.tensordot(w, values, axes=(0, 0))


def grazing_curvature(p: Params) -> float:
    """Second time derivative of x2 at ``t = 2*pi`` on the unperturbed grazing orbit.

    On the circle ``x2 = V cos t`` this is ``-V``.
    """
    return -p.V


def _deps_on_orbit(f: FrictionLaw, p: Params, tau):
    v = p.V * np.cos(tau) - p.V
    return as_float_array(f.deps_at_zero(v), tau)


def grazing_integral(f: FrictionLaw, p: Params, n_panels: int = DEFAULT_PANELS) -> float:
    """``integral_0^{2 pi} dF/deps(V cos t - V, 0) cos t dt`` by composite Gauss-Legendre."""
    return float(
        composite_gauss_legendre(
            lambda tau: _deps_on_orbit(f, p, tau) * np.cos(tau), 0.0, 2 * math.pi, n_panels
        )
    )


@dataclass(frozen=True)
class CriterionReport:
    """Grazing integral, margin and blow-up roots for one law and parameter set.

    The roots are present only when the margin is positive and outside the
    ``boundary`` band; a positive margin is a prediction, not a detection.
    """

    integral_I: float
    lhs: float
    margin: float
    y2_2pi: float
    a_minus: float | None
    a_plus: float | None
    boundary: bool
    law: str
    params: Params
    n_panels: int
    friction: dict = field(default_factory=dict)

    def predicted_return_time(self, epsilon: float) -> float | None:
        """``2*pi + sqrt(eps)*a_minus``, or None when there is no root."""
        if self.a_minus is None:
            return None
        return 2 * math.pi + math.sqrt(epsilon) * self.a_minus

    def to_dict(self) -> dict:
        eps = self.params.epsilon
        return {
            "input": {
                "params": self.params.to_dict(),
                "law": self.law,
                "friction": self.friction,
                "n_panels": self.n_panels,
            },
            "integral_I": self.integral_I,
            "lhs": self.lhs,
            "margin": self.margin,
            "y2_2pi": self.y2_2pi,
            "curvature": grazing_curvature(self.params),
            "a_minus": self.a_minus,
            "a_plus": self.a_plus,
            "boundary": self.boundary,
            "predicted_return_time": self.predicted_return_time(eps) if eps > 0 else None,
        }


def perturbation_margin(
    f: FrictionLaw,
    p: Params,
    n_panels: int = DEFAULT_PANELS,
    boundary_tol: float = 1e-12,
) -> CriterionReport:
    """Evaluate the stick-slip criterion ``c*V*pi < I`` and its blow-up roots.

    ``boundary_tol`` (relative to ``c*V*pi``) absorbs quadrature rounding: a
    margin inside it is reported as the degenerate boundary, without roots.
    """
    integral = grazing_integral(f, p, n_panels)
    lhs = p.c * p.V * math.pi
    margin = integral - lhs
    y2 = margin
    boundary = abs(margin) <= boundary_tol * max(1.0, lhs)
    a_minus = a_plus = None
    if margin > 0 and not boundary:
        a_plus = math.sqrt(-2.0 * y2 / grazing_curvature(p))
        a_minus = -a_plus
    return CriterionReport(
        integral_I=integral,
        lhs=lhs,
        margin=margin,
        y2_2pi=y2,
        a_minus=a_minus,
        a_plus=a_plus,
        boundary=boundary,
        law=f.name,
        params=p,
        n_panels=n_panels,
        friction=friction_to_dict(f),
    )


def variational_y2(
    t: float, f: FrictionLaw, p: Params, n_panels: int = DEFAULT_PANELS
) -> float:
    """Second component of the eps-derivative of the grazing orbit at time ``t``.

    Variation of constants with the rotation ``Z(t) = [[cos, sin], [-sin, cos]]``:
    ``y(t) = Z(t) * integral_0^t Z(-s) (0, -c V cos s + dF/deps(V cos s - V))^T ds``.
    """
    if not 0.0 <= t <= 2 * math.pi + 1e-12:
        raise ValueError(f"t must lie in [0, 2*pi], got {t!r}")
    if t == 0.0:
        return 0.0

    def integrand(s):
        forcing = -p.c * p.V * np.cos(s) + _deps_on_orbit(f, p, s)
        return np.stack([-np.sin(s) * forcing, np.cos(s) * forcing], axis=-1)

    u1, u2 = composite_gauss_legendre(integrand, 0.0, t, n_panels)
    return float(-math.sin(t) * u1 + math.cos(t) * u2)


@dataclass(frozen=True)
class StribeckReport:
    closed_form_margin: float
    equilibrium_xi: float
    instability_margin: float
    constants: StribeckConstants
    params: Params

    def to_dict(self) -> dict:
        return {
            "input": {"params": self.params.to_dict(), "constants": self.constants.to_dict()},
            "closed_form_margin": self.closed_form_margin,
            "equilibrium_xi": self.equilibrium_xi,
            "instability_margin": self.instability_margin,
        }


def stribeck_report(k: StribeckConstants, p: Params) -> StribeckReport:
    """Closed-form criterion, equilibrium and equilibrium-instability margin."""
    a, b, g = k.alpha, k.beta, k.gamma
    c, V, eps = p.c, p.V, p.epsilon
    return StribeckReport(
        closed_form_margin=-c + g * (1 - a) - 2 * b * V,
        equilibrium_xi=(1 - a) / (1 + eps * g * V) + a + eps * b * V * V,
        instability_margin=-c + g * (1 - a) / (1 + eps * g * V) ** 2 - 2 * b * V,
        constants=k,
        params=p,
    )


def stribeck_boundary(axis: str, values: dict) -> float:
    """Value of ``axis`` at which the closed-form Stribeck margin vanishes.

    The margin ``-c + gamma*(1-alpha) - 2*beta*V`` is linear in each of
    alpha, beta, gamma, c and V, so the root is explicit.
    """
    a, b, g = values["alpha"], values["beta"], values["gamma"]
    c, V = values["c"], values["V"]
    if axis == "gamma":
        return (c + 2 * b * V) / (1 - a)
    if axis == "alpha":
        return 1 - (c + 2 * b * V) / g
    if axis == "beta":
        return (g * (1 - a) - c) / (2 * V)
    if axis == "c":
        return g * (1 - a) - 2 * b * V
    if axis == "V":
        return (g * (1 - a) - c) / (2 * b)
    raise ValueError(f"unknown axis {axis!r}")


def divergence(x2, k: StribeckConstants, p: Params):
    """Divergence of the below-belt Stribeck slip field at velocity ``x2``.

    Uses the smooth continuation ``1 - eps*gamma*(x2 - V)`` of the denominator,
    which matches the friction law only for ``x2 <= V``.
    """
    a, b, g = k.alpha, k.beta, k.gamma
    eps, c, V = p.epsilon, p.c, p.V
    x2 = np.asarray(x2, dtype=float)
    den = 1 - eps * g * (x2 - V)
    if np.any(den == 0):
        raise ValueError("divergence has a pole where 1 - eps*gamma*(x2 - V) = 0")
    out = -eps * c + eps * g * (1 - a) / den**2 + 2 * eps * b * (x2 - V)
    return float(out) if out.ndim == 0 else out
