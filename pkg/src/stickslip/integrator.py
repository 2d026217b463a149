"""Event-driven integration of the slip phases and the exact sliding step.

Slip arcs are integrated with a Dormand-Prince 5(4) pair under PI step-size
control. Contact with the switching line ``x2 = V`` is bracketed on each
accepted step and refined by re-taking a single Runge-Kutta step of variable
length from the start of that step, so the located state carries the
stepper's own accuracy. A local maximum of ``x2`` inside a step (sign change
of the field's second component) is located the same way; this catches a
double crossing hidden inside one step and tangential touches.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .model import DEFAULT_EVENT_TOL, FrictionLaw, Mode, Params, State, sliding_interval
from .serialize import dumps, fmt

__all__ = [
    "IntegrationError",
    "IntegratorConfig",
    "EventKind",
    "Event",
    "Trajectory",
    "ManifoldClass",
    "integrate_slip",
    "flow",
    "classify_manifold_point",
    "slide_step",
    "simulate",
    "config_from_dict",
]


class IntegrationError(RuntimeError):
    """Step-size underflow or step budget exhausted; carries the last state."""

    def __init__(self, message: str, t: float, state: tuple[float, float]):
        super().__init__(f"{message} at t={t!r}, state={state!r}")
        self.t = t
        self.state = state


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances for the slip-phase stepper and contact localization.

    ``graze_tol`` is the band within which a local maximum of ``x2`` that
    touches the line without clearly crossing it counts as a tangential
    contact. It must sit above the stepper's global error.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    event_tol: float = DEFAULT_EVENT_TOL
    t_arm: float = 1e-3
    max_step: float = 0.1
    graze_tol: float = 1e-8
    max_steps: int = 1_000_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "event_tol", "t_arm", "max_step", "graze_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive number, got {value!r}")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    def to_dict(self) -> dict:
        return {
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "event_tol": self.event_tol,
            "t_arm": self.t_arm,
            "max_step": self.max_step,
            "graze_tol": self.graze_tol,
            "max_steps": self.max_steps,
        }


class EventKind(enum.Enum):
    MANIFOLD_CONTACT = "ManifoldContact"
    SLIDING_ENTRY = "SlidingEntry"
    SLIDING_EXIT = "SlidingExit"
    CROSSING_UP = "CrossingUp"
    CROSSING_DOWN = "CrossingDown"
    HORIZON_EXPIRED = "HorizonExpired"


@dataclass(frozen=True)
class Event:
    kind: EventKind
    t: float
    state: State

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "t": self.t, "x1": self.state.x1, "x2": self.state.x2}


@dataclass
class Trajectory:
    """Time-ordered samples ``(t, x1, x2, mode)`` and the events met on the way.

    ``meta`` holds per-arc diagnostics: ``max_x2`` and ``t_at_max`` (the
    supremum of ``x2`` on the armed part of a Below arc, or the infimum on an
    Above arc), ``grazing`` (the contact was tangential) and ``near_miss``.
    """

    samples: list[tuple[float, float, float, Mode]] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def t(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def x1(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])

    @property
    def x2(self) -> np.ndarray:
        return np.array([s[2] for s in self.samples])

    @property
    def modes(self) -> list[Mode]:
        return [s[3] for s in self.samples]

    def append(self, t: float, x1: float, x2: float, mode: Mode) -> None:
        if self.samples and t <= self.samples[-1][0]:
            if t == self.samples[-1][0] and mode is self.samples[-1][3]:
                return
            if t < self.samples[-1][0]:
                raise ValueError("trajectory samples must be time ordered")
            # same instant, new mode: the event row already closes the arc
            return
        self.samples.append((t, x1, x2, mode))

    def extend(self, other: "Trajectory") -> None:
        for row in other.samples:
            self.append(*row)
        self.events.extend(other.events)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "x1", "x2", "mode"])
        for t, x1, x2, mode in self.samples:
            writer.writerow([fmt(t), fmt(x1), fmt(x2), mode.value])
        return buf.getvalue()

    def events_json(self) -> str:
        return dumps([e.to_dict() for e in self.events])


# Dormand-Prince 5(4) tableau
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

_SAFETY = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_MIN_SCALE, _MAX_SCALE = 0.2, 10.0


def _make_rhs(p: Params, f: FrictionLaw, mode: Mode, direction: float = 1.0):
    sgn = 1.0 if mode is Mode.SLIP_BELOW else -1.0
    V, eps = p.V, p.epsilon
    ec = eps * p.c
    F = f.eval

    def rhs(x1, x2):
        return direction * x2, direction * (-x1 - ec * x2 + sgn * (1.0 + F(x2 - V, eps)))

    return rhs


def _dp_step(rhs, y1, y2, k1, h):
    """One Dormand-Prince step; returns the new state and the error estimate."""
    a1, a2 = k1
    b1, b2 = rhs(y1 + h * _A21 * a1, y2 + h * _A21 * a2)
    c1, c2 = rhs(y1 + h * (_A31 * a1 + _A32 * b1), y2 + h * (_A31 * a2 + _A32 * b2))
    d1, d2 = rhs(
        y1 + h * (_A41 * a1 + _A42 * b1 + _A43 * c1),
        y2 + h * (_A41 * a2 + _A42 * b2 + _A43 * c2),
    )
    e1, e2 = rhs(
        y1 + h * (_A51 * a1 + _A52 * b1 + _A53 * c1 + _A54 * d1),
        y2 + h * (_A51 * a2 + _A52 * b2 + _A53 * c2 + _A54 * d2),
    )
    g1, g2 = rhs(
        y1 + h * (_A61 * a1 + _A62 * b1 + _A63 * c1 + _A64 * d1 + _A65 * e1),
        y2 + h * (_A61 * a2 + _A62 * b2 + _A63 * c2 + _A64 * d2 + _A65 * e2),
    )
    n1 = y1 + h * (_B1 * a1 + _B3 * c1 + _B4 * d1 + _B5 * e1 + _B6 * g1)
    n2 = y2 + h * (_B1 * a2 + _B3 * c2 + _B4 * d2 + _B5 * e2 + _B6 * g2)
    k7 = rhs(n1, n2)
    err1 = h * (_E1 * a1 + _E3 * c1 + _E4 * d1 + _E5 * e1 + _E6 * g1 + _E7 * k7[0])
    err2 = h * (_E1 * a2 + _E3 * c2 + _E4 * d2 + _E5 * e2 + _E6 * g2 + _E7 * k7[1])
    return n1, n2, k7, err1, err2


def _run_arc(
    s0: State,
    p: Params,
    f: FrictionLaw,
    horizon: float,
    cfg: IntegratorConfig,
    detect: bool = True,
    t0: float = 0.0,
    direction: float = 1.0,
) -> tuple[Trajectory, Event]:
    mode = s0.mode
    if mode is Mode.STICK:
        raise ValueError("slip integration needs a SlipBelow or SlipAbove state")
    if not (horizon > 0 and math.isfinite(horizon)):
        raise ValueError(f"horizon must be a positive finite time, got {horizon!r}")
    V = p.V
    # approach > 0 means the line x2 = V has been passed from this branch
    ts = 1.0 if mode is Mode.SLIP_BELOW else -1.0
    if detect and ts * (s0.x2 - V) > cfg.event_tol:
        raise ValueError(f"initial x2={s0.x2!r} is on the wrong side of x2=V for {mode.value}")

    rhs = _make_rhs(p, f, mode, direction)
    max_key = "max_x2" if mode is Mode.SLIP_BELOW else "min_x2"
    traj = Trajectory()

    def step_to(ya, yb, ka, s):
        if s == 0.0:
            return ya, yb, ka
        n1, n2, k7, _, _ = _dp_step(rhs, ya, yb, ka, s)
        return n1, n2, k7

    def finish(tc, c1, c2, grazing):
        while traj.samples and traj.samples[-1][0] >= t0 + tc:
            traj.samples.pop()
        traj.append(t0 + tc, c1, c2, mode)
        ev = Event(EventKind.MANIFOLD_CONTACT, t0 + tc, State(c1, c2, mode))
        traj.events.append(ev)
        traj.meta.update(
            {max_key: V + ts * best, "t_at_max": t0 + best_t, "grazing": grazing,
             "near_miss": grazing}
        )
        return traj, ev

    def localize(ta, ya, yb, ka, s_hi):
        def g(s):
            return ts * (step_to(ya, yb, ka, s)[1] - V)

        s = brentq(g, 0.0, s_hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
        c1, c2, _ = step_to(ya, yb, ka, s)
        return finish(ta + s, c1, c2, False)

    y1, y2 = float(s0.x1), float(s0.x2)
    k = rhs(y1, y2)
    t = 0.0
    traj.append(t0, y1, y2, mode)
    h = min(cfg.max_step, horizon, cfg.t_arm if detect else cfg.max_step)
    err_old = 1e-4
    armed = not detect
    best, best_t = -math.inf, math.nan
    pending = None
    steps = 0

    while True:
        if steps >= cfg.max_steps:
            raise IntegrationError("step budget exhausted", t0 + t, (y1, y2))
        remaining = horizon - t
        h = min(h, cfg.max_step, remaining)
        if not armed:
            h = min(h, cfg.t_arm - t)
        if h <= 16 * math.ulp(max(1.0, abs(t0 + t))):
            raise IntegrationError("step size underflow", t0 + t, (y1, y2))
        n1, n2, kn, e1, e2 = _dp_step(rhs, y1, y2, k, h)
        steps += 1
        sc1 = cfg.abs_tol + cfg.rel_tol * max(abs(y1), abs(n1))
        sc2 = cfg.abs_tol + cfg.rel_tol * max(abs(y2), abs(n2))
        err = math.sqrt(0.5 * ((e1 / sc1) ** 2 + (e2 / sc2) ** 2))
        if not math.isfinite(err):
            h *= _MIN_SCALE
            continue
        if err > 1.0:
            h *= max(_MIN_SCALE, _SAFETY * err**-_EXPO)
            continue
        h_next = h * min(_MAX_SCALE, max(_MIN_SCALE, _SAFETY * max(err, 1e-10) ** -_EXPO * err_old**_BETA))
        err_old = max(err, 1e-4)
        t_new = t + h if h < remaining else horizon

        if not armed:
            if t_new >= cfg.t_arm:
                armed = True
                if ts * (n2 - V) >= 0.0:
                    raise ValueError(
                        f"{mode.value} launch has not left x2=V by t_arm={cfg.t_arm}; "
                        "the field does not point into this branch"
                    )
                best, best_t = ts * (n2 - V), t_new
        elif detect:
            g1 = ts * (n2 - V)
            dg0, dg1 = ts * k[1], ts * kn[1]
            peak = None
            if dg0 > 0 and dg1 < 0:
                ya, yb, ka = y1, y2, k

                def slope(s):
                    return ts * step_to(ya, yb, ka, s)[2][1]

                s_pk = brentq(slope, 0.0, h, xtol=1e-16, rtol=4 * np.finfo(float).eps)
                p1, p2, _ = step_to(y1, y2, k, s_pk)
                peak = (s_pk, p1, p2, ts * (p2 - V))
            if g1 > best:
                best, best_t = g1, t_new
            if peak is not None and peak[3] > best:
                best, best_t = peak[3], t + peak[0]

            if peak is not None and abs(peak[3]) <= cfg.graze_tol:
                return finish(t + peak[0], peak[1], peak[2], True)
            if pending is not None:
                if peak is not None or dg1 <= 0 or g1 > cfg.graze_tol:
                    return localize(*pending)
            elif peak is not None and peak[3] > cfg.graze_tol:
                return localize(t, y1, y2, k, peak[0])
            elif g1 >= 0.0:
                if g1 <= cfg.graze_tol and dg1 > 0:
                    # barely above the line and still rising: the peak decides
                    pending = (t, y1, y2, k, h)
                else:
                    return localize(t, y1, y2, k, h)

        y1, y2, k, t = n1, n2, kn, t_new
        traj.append(t0 + t, y1, y2, mode)
        if t >= horizon:
            ev = Event(EventKind.HORIZON_EXPIRED, t0 + t, State(y1, y2, mode))
            traj.events.append(ev)
            if detect:
                traj.meta.update(
                    {max_key: V + ts * best, "t_at_max": t0 + best_t, "grazing": False,
                     "near_miss": -best <= 10 * cfg.event_tol}
                )
            return traj, ev
        h = h_next


def _as_mode(branch) -> Mode:
    if isinstance(branch, Mode):
        if branch is Mode.STICK:
            raise ValueError("branch must be below or above")
        return branch
    key = str(branch).lower()
    if key in ("below", "slip_below", "slipbelow"):
        return Mode.SLIP_BELOW
    if key in ("above", "slip_above", "slipabove"):
        return Mode.SLIP_ABOVE
    raise ValueError(f"unknown branch {branch!r}")


def integrate_slip(
    s0: State,
    p: Params,
    f: FrictionLaw,
    branch="below",
    horizon: float = 6 * math.pi,
    cfg: IntegratorConfig | None = None,
    t0: float = 0.0,
) -> tuple[Trajectory, Event]:
    """Integrate one slip arc until it meets ``x2 = V`` or the horizon runs out.

    Contacts are ignored until ``cfg.t_arm`` so that a launch from the line
    itself (the grazing point) is not reported at t = 0. At ``t_arm`` the state
    must have left the line into the requested branch.

    Returns
    -------
    trajectory : Trajectory
        Accepted steps; ``meta`` carries the closest approach to the line.
    event : Event
        ``ManifoldContact`` (with ``|x2 - V| <= event_tol`` for a transversal
        crossing, or at the peak of ``x2`` for a tangential touch within
        ``graze_tol``) or ``HorizonExpired``.
    """
    cfg = cfg or IntegratorConfig()
    mode = _as_mode(branch)
    start = State(float(s0.x1), float(s0.x2), mode)
    return _run_arc(start, p, f, horizon, cfg, detect=True, t0=t0)


def flow(
    xi: tuple[float, float],
    p: Params,
    f: FrictionLaw,
    t: float,
    cfg: IntegratorConfig | None = None,
    branch="below",
) -> tuple[float, float]:
    """State at time ``t`` of the smooth branch field started at ``xi``.

    No contact detection: the branch field is simply continued, which is what
    perturbation arguments about ``X(t, xi, eps)`` need. Negative ``t``
    integrates the time-reversed field.
    """
    cfg = cfg or IntegratorConfig()
    if t == 0:
        return float(xi[0]), float(xi[1])
    direction = 1.0 if t > 0 else -1.0
    start = State(float(xi[0]), float(xi[1]), _as_mode(branch))
    _, ev = _run_arc(start, p, f, abs(t), cfg, detect=False, direction=direction)
    return ev.state.x1, ev.state.x2


class ManifoldClass(enum.Enum):
    SLIDING = "Sliding"
    CROSSING_UP = "CrossingUp"
    CROSSING_DOWN = "CrossingDown"
    TANGENT_LOWER = "TangentLower"
    TANGENT_UPPER = "TangentUpper"


def classify_manifold_point(
    x1: float, p: Params, f: FrictionLaw, event_tol: float = DEFAULT_EVENT_TOL
) -> ManifoldClass:
    """Filippov type of the point ``(x1, V)`` from the two one-sided fields."""
    base = -x1 - p.epsilon * p.c * p.V
    corr = float(f.eval(0.0, p.epsilon))
    below = base + 1.0 + corr
    above = base - 1.0 - corr
    if abs(below) <= event_tol:
        return ManifoldClass.TANGENT_LOWER
    if abs(above) <= event_tol:
        return ManifoldClass.TANGENT_UPPER
    if below > 0 and above < 0:
        return ManifoldClass.SLIDING
    if below > 0 and above > 0:
        return ManifoldClass.CROSSING_UP
    return ManifoldClass.CROSSING_DOWN


def slide_step(
    s0: State, p: Params, event_tol: float = DEFAULT_EVENT_TOL, t0: float = 0.0
) -> tuple[Event, float]:
    """Slide along ``x2 = V`` at speed V to the exit point, in closed form."""
    if s0.mode is not Mode.STICK:
        raise ValueError("slide_step needs a stick state")
    if abs(s0.x2 - p.V) > event_tol:
        raise ValueError(f"stick state must lie on x2=V, got x2={s0.x2!r}")
    lo, hi = sliding_interval(p)
    if not (lo - event_tol <= s0.x1 <= hi + event_tol):
        raise ValueError(f"x1={s0.x1!r} is outside the sliding segment [{lo!r}, {hi!r}]")
    duration = max(0.0, (hi - s0.x1) / p.V)
    ev = Event(EventKind.SLIDING_EXIT, t0 + duration, State(hi, p.V, Mode.STICK))
    return ev, duration


def simulate(
    s0: State,
    p: Params,
    f: FrictionLaw,
    t_end: float,
    cfg: IntegratorConfig | None = None,
    max_events: int = 10_000,
) -> Trajectory:
    """Filippov solution on ``[0, t_end]``: slip arcs joined by stick phases.

    ``s0.mode`` is ignored; the starting branch is read off the state.
    """
    cfg = cfg or IntegratorConfig()
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    tol = cfg.event_tol
    lo, hi = sliding_interval(p)
    out = Trajectory()
    t = 0.0
    x1, x2 = float(s0.x1), float(s0.x2)

    def on_line(x1_):
        nonlocal t
        kind = classify_manifold_point(x1_, p, f, tol)
        if kind in (ManifoldClass.SLIDING, ManifoldClass.TANGENT_UPPER) or (
            kind is ManifoldClass.TANGENT_LOWER
        ):
            x1_ = min(max(x1_, lo), hi)
            out.events.append(Event(EventKind.SLIDING_ENTRY, t, State(x1_, p.V, Mode.STICK)))
            ev, duration = slide_step(State(x1_, p.V, Mode.STICK), p, tol, t0=t)
            if t + duration >= t_end:
                out.append(t_end, x1_ + p.V * (t_end - t), p.V, Mode.STICK)
                out.events.append(
                    Event(EventKind.HORIZON_EXPIRED, t_end,
                          State(x1_ + p.V * (t_end - t), p.V, Mode.STICK))
                )
                return None
            if duration > 0:
                out.append(ev.t, hi, p.V, Mode.STICK)
            out.events.append(ev)
            t = ev.t
            return (hi, p.V, Mode.SLIP_BELOW)
        if kind is ManifoldClass.CROSSING_UP:
            out.events.append(Event(EventKind.CROSSING_UP, t, State(x1_, p.V, Mode.SLIP_ABOVE)))
            return (x1_, p.V, Mode.SLIP_ABOVE)
        out.events.append(Event(EventKind.CROSSING_DOWN, t, State(x1_, p.V, Mode.SLIP_BELOW)))
        return (x1_, p.V, Mode.SLIP_BELOW)

    if x2 < p.V - tol:
        nxt = (x1, x2, Mode.SLIP_BELOW)
    elif x2 > p.V + tol:
        nxt = (x1, x2, Mode.SLIP_ABOVE)
    else:
        out.append(0.0, x1, x2, Mode.STICK)
        nxt = on_line(x1)

    n_events = 0
    while nxt is not None:
        n_events += 1
        if n_events > max_events:
            raise IntegrationError("too many manifold events", t, (x1, x2))
        a1, a2, mode = nxt
        arc, ev = _run_arc(State(a1, a2, mode), p, f, t_end - t, cfg, t0=t)
        out.extend(arc)
        if ev.kind is EventKind.HORIZON_EXPIRED:
            break
        t = ev.t
        c1 = ev.state.x1
        kind = classify_manifold_point(c1, p, f, tol)
        if mode is Mode.SLIP_BELOW and kind is ManifoldClass.CROSSING_DOWN:
            # touched from below where the lower field already points down
            nxt = (c1, ev.state.x2, Mode.SLIP_BELOW)
        elif mode is Mode.SLIP_ABOVE and kind is ManifoldClass.CROSSING_UP:
            nxt = (c1, ev.state.x2, Mode.SLIP_ABOVE)
        else:
            nxt = on_line(c1)
    return out


def config_from_dict(doc) -> IntegratorConfig:
    """Build an :class:`IntegratorConfig` from a mapping; unknown keys are errors."""
    from .model import ConfigError

    if doc is None:
        return IntegratorConfig()
    if not isinstance(doc, dict):
        raise ConfigError("'integrator' must be an object", "integrator")
    known = set(IntegratorConfig().to_dict())
    unknown = set(doc) - known
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown key 'integrator.{key}'", f"integrator.{key}")
    try:
        return IntegratorConfig(**doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"integrator: {exc}", "integrator") from None
