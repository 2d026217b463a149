"""Parameter sweeps and boundary bisection over the Stribeck family.

Each grid point compares the closed-form criterion with what the detector
actually finds. Points are independent, so sweeps may fan out over a process
pool; records are reassembled in row-major grid order, which keeps the output
byte-identical to a serial run.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .criterion import stribeck_boundary, stribeck_report
from .detector import DEFAULT_HORIZON, detect_stick_slip
from .integrator import IntegratorConfig, config_from_dict
from .model import ConfigError, Params, StribeckConstants, stribeck_law
from .serialize import dumps, fmt

__all__ = [
    "AXES",
    "DEFAULT_BAND",
    "Axis",
    "SweepSpec",
    "SweepRecord",
    "run_sweep",
    "sweep_csv",
    "sweep_sidecar",
    "locate_boundary",
    "spec_from_dict",
]

AXES = ("alpha", "beta", "gamma", "c", "V")
DEFAULT_BAND = 0.2


@dataclass(frozen=True)
class Axis:
    """One swept parameter: ``count`` evenly spaced values, or explicit ``values``."""

    name: str
    min: float | None = None
    max: float | None = None
    count: int | None = None
    values: tuple | None = None

    def grid(self) -> list[float]:
        if self.values is not None:
            return [float(v) for v in self.values]
        return [float(v) for v in np.linspace(self.min, self.max, self.count)]

    def to_dict(self) -> dict:
        if self.values is not None:
            return {"name": self.name, "values": list(self.values)}
        return {"name": self.name, "min": self.min, "max": self.max, "count": self.count}


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...]
    fixed: dict
    epsilon_list: tuple[float, ...]
    horizon: float = DEFAULT_HORIZON
    cfg: IntegratorConfig = field(default_factory=IntegratorConfig)
    band: float = DEFAULT_BAND

    def __post_init__(self):
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ConfigError("axes must name distinct parameters", "axes")
        for a in self.axes:
            if a.name not in AXES:
                raise ConfigError(f"unknown axis {a.name!r}; expected one of {AXES}", "axes")
            grid = a.grid()
            if len(grid) < 2:
                raise ConfigError(f"axis {a.name!r} needs at least 2 values", "axes")
        missing = [n for n in AXES if n not in names and n not in self.fixed]
        if missing:
            raise ConfigError(f"parameter {missing[0]!r} is neither swept nor fixed", "fixed")
        extra = [n for n in self.fixed if n not in AXES]
        if extra:
            raise ConfigError(f"unknown fixed parameter {extra[0]!r}", "fixed")
        if not self.epsilon_list or any(not e > 0 for e in self.epsilon_list):
            raise ConfigError("epsilon_list must hold positive values", "epsilon_list")
        # every grid point must satisfy the type invariants
        for point in self.points():
            _build(point, self.epsilon_list[0])

    def points(self) -> list[dict]:
        grids = [a.grid() for a in self.axes]
        out = []
        for combo in itertools.product(*grids):
            point = {n: float(v) for n, v in self.fixed.items() if n in AXES}
            point.update({a.name: v for a, v in zip(self.axes, combo)})
            out.append({n: point[n] for n in AXES})
        return out

    def to_dict(self) -> dict:
        return {
            "axes": [a.to_dict() for a in self.axes],
            "fixed": dict(self.fixed),
            "epsilon_list": list(self.epsilon_list),
            "horizon": self.horizon,
            "integrator": self.cfg.to_dict(),
            "band": self.band,
        }


@dataclass(frozen=True)
class SweepRecord:
    point: dict
    epsilon_list: tuple[float, ...]
    closed_form_margin: float
    instability_margin: tuple[float, ...]
    detected: tuple[bool, ...] | None
    band: float = DEFAULT_BAND
    error: str | None = None

    @property
    def agreement(self) -> bool | None:
        """Detected existence matches the sign of the margin at every epsilon."""
        if self.detected is None:
            return None
        predicted = self.closed_form_margin > 0
        return all(d == predicted for d in self.detected)

    @property
    def boundary_band(self) -> bool:
        return abs(self.closed_form_margin) < self.band


def _build(point: dict, eps: float):
    k = StribeckConstants(point["alpha"], point["beta"], point["gamma"])
    p = Params(point["c"], point["V"], eps)
    return k, p


def _evaluate(args) -> SweepRecord:
    point, eps_list, horizon, cfg, band = args
    k, p0 = _build(point, eps_list[0])
    cf = stribeck_report(k, p0).closed_form_margin
    instab = tuple(stribeck_report(k, p0.replace(epsilon=e)).instability_margin for e in eps_list)
    law = stribeck_law(k)
    try:
        detected = tuple(
            detect_stick_slip(p0.replace(epsilon=e), law, horizon, cfg).exists for e in eps_list
        )
        error = None
    except Exception as exc:  # recorded per point, the sweep carries on
        detected, error = None, f"{type(exc).__name__}: {exc}"
    return SweepRecord(point, tuple(eps_list), cf, instab, detected, band, error)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRecord]:
    """Evaluate every grid point in row-major order.

    ``workers > 1`` maps the points over a process pool; the result order
    is the grid order either way.
    """
    jobs = [(pt, tuple(spec.epsilon_list), spec.horizon, spec.cfg, spec.band)
            for pt in spec.points()]
    if workers <= 1 or len(jobs) < 2:
        return [_evaluate(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


_HEADER = ["alpha", "beta", "gamma", "c", "V", "epsilon", "cf_margin", "instab_margin",
           "detected", "agreement"]


def _flag(v) -> str:
    return "" if v is None else ("true" if v else "false")


def sweep_csv(records: list[SweepRecord]) -> str:
    """One row per (grid point, epsilon)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_HEADER)
    for r in records:
        for i, eps in enumerate(r.epsilon_list):
            det = None if r.detected is None else r.detected[i]
            w.writerow([fmt(r.point[n]) for n in AXES] + [
                fmt(eps), fmt(r.closed_form_margin), fmt(r.instability_margin[i]),
                _flag(det), _flag(r.agreement),
            ])
    return buf.getvalue()


def sweep_sidecar(spec: SweepSpec, records: list[SweepRecord]) -> str:
    return dumps({
        "version": __version__,
        "spec": spec.to_dict(),
        "n_points": len(records),
        "boundary_band": [i for i, r in enumerate(records) if r.boundary_band],
        "disagreements": [i for i, r in enumerate(records) if r.agreement is False],
        "errors": [{"index": i, "error": r.error} for i, r in enumerate(records) if r.error],
    })


def _verdict(axis, value, fixed, epsilon, horizon, cfg) -> bool:
    point = dict(fixed)
    point[axis] = value
    k, p = _build(point, epsilon)
    return detect_stick_slip(p, stribeck_law(k), horizon, cfg).exists


def locate_boundary(
    axis: str,
    lo: float,
    hi: float,
    fixed: dict,
    epsilon: float,
    tol: float = 1e-3,
    horizon: float = DEFAULT_HORIZON,
    cfg: IntegratorConfig | None = None,
) -> tuple[float, float]:
    """Analytic and detected location of the existence boundary along ``axis``.

    Bisects on the detector's verdict until the bracket is narrower than
    ``tol``. Returns ``(analytic_root, detected_midpoint)``.
    """
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}")
    if not lo < hi:
        raise ValueError(f"need lo < hi, got lo={lo!r}, hi={hi!r}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    cfg = cfg or IntegratorConfig()
    point = {n: v for n, v in fixed.items() if n != axis}

    def margin(v):
        k, p = _build({**point, axis: v}, epsilon)
        return stribeck_report(k, p).closed_form_margin

    m_lo, m_hi = margin(lo), margin(hi)
    if m_lo * m_hi > 0:
        raise ValueError("closed-form margin does not change sign on [lo, hi]")
    analytic = stribeck_boundary(axis, {**point, axis: lo})
    v_lo = _verdict(axis, lo, point, epsilon, horizon, cfg)
    v_hi = _verdict(axis, hi, point, epsilon, horizon, cfg)
    if v_lo == v_hi:
        raise ValueError(f"detector verdict is {v_lo} at both ends of [{lo!r}, {hi!r}]")
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if _verdict(axis, mid, point, epsilon, horizon, cfg) == v_lo:
            a = mid
        else:
            b = mid
    return analytic, 0.5 * (a + b)


def _axis_from_dict(doc) -> Axis:
    if not isinstance(doc, dict):
        raise ConfigError("each axis must be an object", "axes")
    allowed = {"name", "min", "max", "count", "values"}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown axis key {sorted(unknown)[0]!r}", f"axes.{sorted(unknown)[0]}")
    if "name" not in doc:
        raise ConfigError("axis is missing 'name'", "axes.name")
    if "values" in doc:
        return Axis(doc["name"], values=tuple(float(v) for v in doc["values"]))
    for key in ("min", "max", "count"):
        if key not in doc:
            raise ConfigError(f"axis {doc['name']!r} is missing {key!r}", f"axes.{key}")
    count = doc["count"]
    if not isinstance(count, int) or count < 2:
        raise ConfigError("axis count must be an integer >= 2", "axes.count")
    return Axis(doc["name"], float(doc["min"]), float(doc["max"]), count)


def spec_from_dict(doc: dict, cfg: IntegratorConfig | None = None) -> SweepSpec:
    """Parse a sweep specification document; unknown keys are errors."""
    allowed = {"axes", "fixed", "epsilon_list", "horizon", "integrator", "band"}
    unknown = set(doc) - allowed
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown key {key!r}", key)
    for key in ("axes", "fixed", "epsilon_list"):
        if key not in doc:
            raise ConfigError(f"missing required key {key!r}", key)
    if cfg is None:
        cfg = config_from_dict(doc.get("integrator"))
    return SweepSpec(
        axes=tuple(_axis_from_dict(a) for a in doc["axes"]),
        fixed=dict(doc["fixed"]),
        epsilon_list=tuple(float(e) for e in doc["epsilon_list"]),
        horizon=float(doc.get("horizon", DEFAULT_HORIZON)),
        cfg=cfg,
        band=float(doc.get("band", DEFAULT_BAND)),
    )
