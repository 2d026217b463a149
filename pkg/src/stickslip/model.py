"""Oscillator on a moving belt: parameters, friction laws and slip fields.

The system is, in dimensionless form,

    x1' = x2
    x2' = -x1 - eps*c*x2 - sign(x2 - V) * (1 + F(x2 - V, eps))

where ``F`` is a small Lipschitz correction to Coulomb friction that vanishes
at zero relative velocity and at ``eps = 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import partial
from typing import Any, Callable, Mapping

import numpy as np

__all__ = [
    "ConfigError",
    "Params",
    "StribeckConstants",
    "FrictionLaw",
    "Mode",
    "State",
    "DEFAULT_EVENT_TOL",
    "slip_field",
    "sliding_interval",
    "stribeck_law",
    "coulomb_law",
    "params_from_dict",
    "friction_from_dict",
]

DEFAULT_EVENT_TOL = 1e-12


class ConfigError(ValueError):
    """Invalid parameter or configuration value.

    ``key`` names the offending configuration entry when there is one.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


@dataclass(frozen=True)
class Params:
    """Physical parameters ``c`` (viscous friction), ``V`` (belt speed), ``epsilon``."""

    c: float
    V: float
    epsilon: float

    def __post_init__(self):
        for name in ("c", "V", "epsilon"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{name} must be a number, got {value!r}", name)
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value!r}", name)
            object.__setattr__(self, name, float(value))
        if self.c <= 0:
            raise ConfigError(f"c must be > 0, got {self.c}", "c")
        if self.V <= 0:
            raise ConfigError(f"V must be > 0, got {self.V}", "V")
        if self.epsilon < 0:
            raise ConfigError(f"epsilon must be >= 0, got {self.epsilon}", "epsilon")

    @property
    def shift(self) -> float:
        """``eps*c*V``, the offset of the sliding segment."""
        return self.epsilon * self.c * self.V

    @property
    def exit_point(self) -> float:
        """Right end ``1 - eps*c*V`` of the sliding segment (grazing point)."""
        return 1.0 - self.shift

    def replace(self, **changes) -> "Params":
        values = {"c": self.c, "V": self.V, "epsilon": self.epsilon}
        values.update(changes)
        return Params(**values)

    def to_dict(self) -> dict:
        return {"c": self.c, "V": self.V, "epsilon": self.epsilon}


@dataclass(frozen=True)
class StribeckConstants:
    """Constants of the Stribeck correction.

    alpha is the asymptotic friction ratio and must lie in (0, 1) so that the
    friction curve actually dips; beta weights the quadratic growth and gamma
    the decay rate.
    """

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{name} must be a number, got {value!r}", name)
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value!r}", name)
            object.__setattr__(self, name, float(value))
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}", "alpha")
        if self.beta <= 0:
            raise ConfigError(f"beta must be > 0, got {self.beta}", "beta")
        if self.gamma <= 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma}", "gamma")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}


@dataclass(frozen=True)
class FrictionLaw:
    """Small friction correction ``F(v, eps)`` and its eps-derivative at 0.

    Both callables take the relative velocity ``v = x2 - V`` and must accept
    floats as well as numpy arrays. They must be pure.

    Attributes
    ----------
    eval : callable
        ``(v, eps) -> F``. Must satisfy ``F(0, eps) = F(v, 0) = 0``.
    deps_at_zero : callable
        ``v -> dF/deps`` evaluated at ``eps = 0``.
    name : str
        Identifier echoed in reports.
    constants : StribeckConstants or None
        Set for the built-in Stribeck law.
    """

    eval: Callable[[Any, float], Any]
    deps_at_zero: Callable[[Any], Any]
    name: str
    constants: StribeckConstants | None = None


class Mode(enum.Enum):
    SLIP_BELOW = "slip_below"
    SLIP_ABOVE = "slip_above"
    STICK = "stick"


@dataclass(frozen=True)
class State:
    x1: float
    x2: float
    mode: Mode


def _branch_sign(mode: Mode) -> float:
    # value of -sign(x2 - V) on the branch
    if mode is Mode.SLIP_BELOW:
        return 1.0
    if mode is Mode.SLIP_ABOVE:
        return -1.0
    raise ValueError("stick states have no slip field; use the sliding flow")


def slip_field(
    s: State, p: Params, f: FrictionLaw, event_tol: float = DEFAULT_EVENT_TOL
) -> tuple[float, float]:
    """Right-hand side of the slip branch named by ``s.mode``.

    A state lying on the manifold within ``event_tol`` is evaluated as the
    one-sided limit from the side given by its mode. A state strictly on the
    other side of the manifold is rejected, as is a stick state.
    """
    sgn = _branch_sign(s.mode)
    gap = s.x2 - p.V
    if sgn * gap > event_tol:
        raise ValueError(
            f"state x2={s.x2!r} lies on the wrong side of x2=V={p.V!r} for mode {s.mode.value}"
        )
    eps = p.epsilon
    dx2 = -s.x1 - eps * p.c * s.x2 + sgn * (1.0 + f.eval(gap, eps))
    return s.x2, float(dx2)


def sliding_interval(p: Params) -> tuple[float, float]:
    """Open interval of ``x1`` on the manifold where solutions stick."""
    return -1.0 - p.shift, 1.0 - p.shift


# Written as -(1-alpha)*eps*gamma*|v|/(1+eps*gamma*|v|) + eps*beta*v**2, which
# equals (1-alpha)/(1+eps*gamma*|v|) + alpha + eps*beta*v**2 - 1 but vanishes
# exactly (no rounding) at v = 0 and at eps = 0.
def _stribeck_eval(k: StribeckConstants, v, eps):
    w = eps * k.gamma * abs(v)
    return -(1.0 - k.alpha) * w / (1.0 + w) + eps * k.beta * v * v


def _stribeck_deps(k: StribeckConstants, v):
    return -k.gamma * (1.0 - k.alpha) * abs(v) + k.beta * v * v


def stribeck_law(k: StribeckConstants) -> FrictionLaw:
    """Stribeck correction with decay ``gamma`` and quadratic term ``beta``.

    The eps-derivative at zero is ``-gamma*(1-alpha)*|v| + beta*v**2``; on the
    grazing orbit ``v <= 0``, where it reads ``gamma*(1-alpha)*v + beta*v**2``.
    """
    return FrictionLaw(
        eval=partial(_stribeck_eval, k),
        deps_at_zero=partial(_stribeck_deps, k),
        name="stribeck",
        constants=k,
    )


def _zero_eval(v, eps):
    return 0.0 * v


def _zero_deps(v):
    return 0.0 * v


def coulomb_law() -> FrictionLaw:
    """Pure Coulomb friction: no correction."""
    return FrictionLaw(eval=_zero_eval, deps_at_zero=_zero_deps, name="coulomb")


_PARAM_KEYS = ("c", "V", "epsilon")
_FRICTION_KEYS = {"coulomb": {"kind"}, "stribeck": {"kind", "alpha", "beta", "gamma"}}


def params_from_dict(doc: Mapping[str, Any]) -> Params:
    """Build :class:`Params` from the ``c``, ``V``, ``epsilon`` keys of ``doc``."""
    for key in _PARAM_KEYS:
        if key not in doc:
            raise ConfigError(f"missing required key {key!r}", key)
    return Params(c=doc["c"], V=doc["V"], epsilon=doc["epsilon"])


def friction_from_dict(doc: Mapping[str, Any] | None) -> FrictionLaw:
    """Build a friction law from a ``friction`` configuration block.

    ``{"kind": "coulomb"}`` or ``{"kind": "stribeck", "alpha": .., "beta": ..,
    "gamma": ..}``. Unknown keys raise :class:`ConfigError`.
    """
    if doc is None:
        raise ConfigError("missing required key 'friction'", "friction")
    if not isinstance(doc, Mapping):
        raise ConfigError("'friction' must be an object", "friction")
    kind = doc.get("kind")
    if kind not in _FRICTION_KEYS:
        raise ConfigError(
            f"friction.kind must be one of {sorted(_FRICTION_KEYS)}, got {kind!r}",
            "friction.kind",
        )
    unknown = set(doc) - _FRICTION_KEYS[kind]
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown key 'friction.{key}' for kind {kind!r}", f"friction.{key}")
    if kind == "coulomb":
        return coulomb_law()
    for key in ("alpha", "beta", "gamma"):
        if key not in doc:
            raise ConfigError(f"missing required key 'friction.{key}'", f"friction.{key}")
    try:
        k = StribeckConstants(doc["alpha"], doc["beta"], doc["gamma"])
    except ConfigError as exc:
        raise ConfigError(str(exc), f"friction.{exc.key}") from None
    return stribeck_law(k)


def friction_to_dict(f: FrictionLaw) -> dict:
    out: dict = {"kind": f.name}
    if f.constants is not None:
        out.update(f.constants.to_dict())
    return out


def as_float_array(values, like) -> np.ndarray:
    """Broadcast a law's output to the shape of its input array."""
    return np.asarray(values, dtype=float) * np.ones_like(like, dtype=float)
