"""Numerical verification of stick-slip cycles through the grazing point."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

from .criterion import perturbation_margin
from .integrator import EventKind, IntegratorConfig, Trajectory, integrate_slip, slide_step
from .model import FrictionLaw, Mode, Params, State, friction_to_dict, sliding_interval
from .serialize import fmt

__all__ = [
    "DEFAULT_HORIZON",
    "DEFAULT_TIE_TOL",
    "Case",
    "ReturnResult",
    "CycleReport",
    "ConvergenceRow",
    "find_return",
    "classify_case",
    "detect_stick_slip",
    "convergence_table",
    "convergence_csv",
]

DEFAULT_HORIZON = 6 * math.pi
DEFAULT_TIE_TOL = 1e-7


class Case(enum.Enum):
    CASE1 = "Case1"  # lands past the grazing point: would cross itself
    CASE2 = "Case2"  # lands on the grazing point: tangency, measure zero
    CASE3 = "Case3"  # lands inside: the stick-slip cycle


@dataclass(frozen=True)
class ReturnResult:
    """First armed return of the grazing orbit to ``x2 = V``, or its absence.

    ``returned`` selects the variant: ``t_return``/``x1_return`` are set when
    it is true, ``max_x2``/``t_at_max`` when it is false.
    """

    returned: bool
    t_return: float | None = None
    x1_return: float | None = None
    max_x2: float | None = None
    t_at_max: float | None = None
    grazing: bool = False
    trajectory: Trajectory | None = None

    def to_dict(self) -> dict:
        if self.returned:
            return {"outcome": "Returned", "t_return": self.t_return,
                    "x1_return": self.x1_return, "grazing": self.grazing}
        return {"outcome": "NoReturn", "max_x2": self.max_x2, "t_at_max": self.t_at_max}


@dataclass(frozen=True)
class CycleReport:
    exists: bool
    case: Case | None
    x1_landing: float | None
    slip_duration: float | None
    stick_duration: float | None
    period: float | None
    landing_in_sliding_interval: bool
    diagnostic: str
    anomaly: bool
    ret: ReturnResult
    params: Params
    friction: dict

    def to_dict(self) -> dict:
        return {
            "input": {"params": self.params.to_dict(), "friction": self.friction},
            "exists": self.exists,
            "case": self.case,
            "x1_landing": self.x1_landing,
            "slip_duration": self.slip_duration,
            "stick_duration": self.stick_duration,
            "period": self.period,
            "landing_in_sliding_interval": self.landing_in_sliding_interval,
            "diagnostic": self.diagnostic,
            "anomaly": self.anomaly,
            "return": self.ret.to_dict(),
        }


def _check_horizon(p: Params, horizon: float) -> None:
    if not p.epsilon > 0:
        raise ValueError("the grazing-orbit analysis needs epsilon > 0")
    if horizon < 2 * math.pi + 1:
        raise ValueError(f"horizon must be at least 2*pi + 1, got {horizon!r}")


def find_return(
    p: Params,
    f: FrictionLaw,
    horizon: float = DEFAULT_HORIZON,
    cfg: IntegratorConfig | None = None,
) -> ReturnResult:
    """Follow the slip arc from ``(1 - eps*c*V, V)`` back to the belt-speed line."""
    _check_horizon(p, horizon)
    cfg = cfg or IntegratorConfig()
    start = State(p.exit_point, p.V, Mode.SLIP_BELOW)
    traj, ev = integrate_slip(start, p, f, "below", horizon, cfg)
    if ev.kind is EventKind.MANIFOLD_CONTACT:
        return ReturnResult(
            returned=True,
            t_return=ev.t,
            x1_return=ev.state.x1,
            grazing=bool(traj.meta.get("grazing")),
            trajectory=traj,
        )
    return ReturnResult(
        returned=False,
        max_x2=traj.meta["max_x2"],
        t_at_max=traj.meta["t_at_max"],
        trajectory=traj,
    )


def classify_case(r: ReturnResult, p: Params, tie_tol: float = DEFAULT_TIE_TOL) -> Case:
    """Place the landing point relative to the grazing point ``1 - eps*c*V``."""
    if not r.returned:
        raise ValueError("only a returned orbit has a landing case")
    gap = r.x1_return - p.exit_point
    if gap > tie_tol:
        return Case.CASE1
    if gap < -tie_tol:
        return Case.CASE3
    return Case.CASE2


def detect_stick_slip(
    p: Params,
    f: FrictionLaw,
    horizon: float = DEFAULT_HORIZON,
    cfg: IntegratorConfig | None = None,
    tie_tol: float = DEFAULT_TIE_TOL,
) -> CycleReport:
    """Decide whether the grazing orbit closes into a stick-slip cycle.

    The cycle exists when the slip arc lands strictly inside the sliding
    segment, left of the grazing point; the stick phase then carries it back
    to the start in closed form.
    """
    cfg = cfg or IntegratorConfig()
    r = find_return(p, f, horizon, cfg)
    common = dict(ret=r, params=p, friction=friction_to_dict(f))
    if not r.returned:
        return CycleReport(
            exists=False, case=None, x1_landing=None, slip_duration=None,
            stick_duration=None, period=None, landing_in_sliding_interval=False,
            diagnostic=f"no return within horizon; max x2 = {fmt(r.max_x2)}, "
                       f"gap V - max x2 = {fmt(p.V - r.max_x2)}",
            anomaly=False, **common,
        )
    case = classify_case(r, p, tie_tol)
    lo, hi = sliding_interval(p)
    inside = lo < r.x1_return < hi
    base = dict(case=case, x1_landing=r.x1_return, slip_duration=r.t_return,
                landing_in_sliding_interval=inside, **common)
    if case is Case.CASE1:
        return CycleReport(
            exists=False, stick_duration=None, period=None,
            diagnostic="landing beyond the grazing point (orbit would cross itself); "
                       "flagged for tolerance review",
            anomaly=True, **base,
        )
    if case is Case.CASE2:
        return CycleReport(
            exists=False, stick_duration=None, period=None,
            diagnostic="landing at the grazing point within tie_tol: degenerate boundary",
            anomaly=False, **base,
        )
    if not inside:
        return CycleReport(
            exists=False, stick_duration=None, period=None,
            diagnostic="landing left of the sliding segment: the orbit crosses into x2 > V",
            anomaly=False, **base,
        )
    _, stick = slide_step(State(r.x1_return, p.V, Mode.STICK), p, cfg.event_tol)
    return CycleReport(
        exists=True, stick_duration=stick, period=r.t_return + stick,
        diagnostic="slip arc lands inside the sliding segment", anomaly=False, **base,
    )


@dataclass(frozen=True)
class ConvergenceRow:
    epsilon: float
    T: float | None
    T_pred: float
    residual_over_sqrt_eps: float | None


def convergence_table(
    p_base: Params,
    f: FrictionLaw,
    eps_list,
    cfg: IntegratorConfig | None = None,
    horizon: float = DEFAULT_HORIZON,
) -> list[ConvergenceRow]:
    """Measured return times against ``2*pi + sqrt(eps)*a_minus``, largest eps first.

    A row whose orbit does not return keeps ``T`` and the residual as None.
    """
    eps_list = sorted((float(e) for e in eps_list), reverse=True)
    if not eps_list:
        raise ValueError("eps_list is empty")
    if eps_list[-1] <= 0:
        raise ValueError("every epsilon must be > 0")
    report = perturbation_margin(f, p_base)
    if report.a_minus is None:
        raise ValueError(f"criterion margin {report.margin!r} is not positive: no predicted return")
    rows = []
    for eps in eps_list:
        p = p_base.replace(epsilon=eps)
        t_pred = 2 * math.pi + math.sqrt(eps) * report.a_minus
        r = find_return(p, f, horizon, cfg)
        if r.returned:
            rows.append(ConvergenceRow(eps, r.t_return, t_pred,
                                       abs(r.t_return - t_pred) / math.sqrt(eps)))
        else:
            rows.append(ConvergenceRow(eps, None, t_pred, None))
    return rows


def convergence_csv(rows: list[ConvergenceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon", "T", "T_pred", "residual_over_sqrt_eps"])
    for r in rows:
        w.writerow([
            fmt(r.epsilon),
            "" if r.T is None else fmt(r.T),
            fmt(r.T_pred),
            "" if r.residual_over_sqrt_eps is None else fmt(r.residual_over_sqrt_eps),
        ])
    return buf.getvalue()
