"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL verdict; the lines are printed in
the pytest terminal summary, or directly when this file is run as a script.
"""

import itertools
import math

import numpy as np
import pytest

from stickslip.criterion import grazing_integral, perturbation_margin, stribeck_report, variational_y2
from stickslip.detector import Case, convergence_table, detect_stick_slip
from stickslip.integrator import EventKind, flow, integrate_slip
from stickslip.model import Mode, Params, State, StribeckConstants, coulomb_law, stribeck_law
from stickslip.sweep import locate_boundary

RESULTS: list[str] = []

GRID = list(itertools.product(
    np.linspace(0.1, 0.9, 5), np.linspace(0.05, 1.0, 5), np.linspace(0.5, 4.0, 5),
    np.linspace(0.25, 2.0, 3), np.linspace(0.1, 2.0, 3),
))
PSTAR_K = StribeckConstants(0.3, 0.1, 2.0)
A_MINUS = -math.sqrt(1.6 * math.pi)


def record(n: int, ok: bool, detail: str) -> None:
    line = f"acceptance {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_01_grazing_orbit_oracle():
    worst = 0.0
    for V in (0.25, 0.5, 1.0, 2.0):
        p = Params(1.0, V, 0.0)
        _, ev = integrate_slip(State(1.0, V, Mode.SLIP_BELOW), p, coulomb_law(), "below",
                               2 * math.pi + 1)
        ok = ev.kind is EventKind.MANIFOLD_CONTACT and abs(ev.t - 2 * math.pi) <= 1e-8
        err = math.hypot(ev.state.x1 - 1.0, ev.state.x2 - V) if ok else math.inf
        worst = max(worst, err)
    record(1, worst <= 1e-8, f"max position error at t=2pi: {worst:.2e} (tol 1e-8)")


def test_02_quadrature_vs_closed_form():
    worst = 0.0
    for a, b, g, V, c in GRID:
        value = grazing_integral(stribeck_law(StribeckConstants(a, b, g)), Params(c, V, 0.0))
        worst = max(worst, abs(value - math.pi * V * (g * (1 - a) - 2 * b * V)))
    record(2, worst <= 1e-10, f"max |I - pi V (gamma(1-alpha) - 2 beta V)| = {worst:.2e} "
                              f"over {len(GRID)} points (tol 1e-10)")


def test_03_coulomb_no_cycle():
    gaps = []
    ok = True
    for eps in (0.01, 0.05):
        p = Params(1.0, 0.5, eps)
        rep = detect_stick_slip(p, coulomb_law())
        returned = rep.ret.returned
        gap = math.nan if returned else p.V - rep.ret.max_x2
        ok &= (not rep.exists) and (not returned) and gap > 0
        gaps.append(gap)
    record(3, ok, "NoReturn at eps 0.01, 0.05 with V - max x2 = "
                  + ", ".join(f"{g:.3e}" for g in gaps))


def test_04_stribeck_cycle():
    ok, landings = True, []
    for eps in (0.005, 0.01, 0.02):
        p = Params(0.5, 0.5, eps)
        rep = detect_stick_slip(p, stribeck_law(PSTAR_K))
        inside = rep.x1_landing is not None and -1 - p.shift < rep.x1_landing < 1 - p.shift
        ok &= rep.exists and rep.case is Case.CASE3 and inside
        landings.append(rep.x1_landing)
    record(4, ok, "Case3 landings " + ", ".join(f"{x:.6f}" for x in landings))


def test_05_return_time_asymptotics():
    r = perturbation_margin(stribeck_law(PSTAR_K), Params(0.5, 0.5, 0.01))
    rows = convergence_table(Params(0.5, 0.5, 0.01), stribeck_law(PSTAR_K), [1e-2, 1e-3, 1e-4])
    res = [row.residual_over_sqrt_eps for row in rows]
    ok = (
        abs(r.a_minus - A_MINUS) <= 1e-12
        and None not in res
        and res[0] > res[1] > res[2]
        and res[2] <= 0.2
    )
    record(5, ok, f"a_minus={r.a_minus:.6f}; residual/sqrt(eps) = "
                  + ", ".join(f"{x:.3e}" for x in res) + " (tol 0.2 at 1e-4)")


def test_06_sharpness():
    k = StribeckConstants(0.3, 2.0, 2.0)
    margin = stribeck_report(k, Params(0.5, 0.5, 0.01)).closed_form_margin
    flags = [detect_stick_slip(Params(0.5, 0.5, e), stribeck_law(k)).exists
             for e in (0.005, 0.01, 0.02)]
    ok = abs(margin + 1.1) < 1e-12 and not any(flags)
    record(6, ok, f"closed-form margin {margin:.3f}; exists = {flags}")


def test_07_instability_implication():
    failures, checked, worst = [], 0, math.inf
    for a, b, g, V, c in GRID:
        k = StribeckConstants(a, b, g)
        if stribeck_report(k, Params(c, V, 0.0)).closed_form_margin < 0.05:
            continue
        for eps in (0.01, 0.05):
            checked += 1
            m = stribeck_report(k, Params(c, V, eps)).instability_margin
            worst = min(worst, m)
            if not m > 0:
                failures.append((a, b, g, V, c, eps))
    detail = f"{len(failures)}/{checked} (point, eps) pairs violate; min instability margin {worst:.3f}"
    if failures:
        a, b, g, V, c, eps = failures[0]
        detail += f"; first: alpha={a:.2f} beta={b:.4f} gamma={g:.3f} V={V:.3f} c={c:.2f} eps={eps}"
    record(7, not failures, detail)


def test_08_boundary_localization():
    fixed = {"alpha": 0.3, "beta": 0.1, "c": 0.5, "V": 0.5}
    analytic, coarse = locate_boundary("gamma", 0.5, 1.2, fixed, 0.01)
    _, fine = locate_boundary("gamma", 0.5, 1.2, fixed, 0.001)
    gap_coarse, gap_fine = abs(coarse - analytic), abs(fine - analytic)
    ok = abs(analytic - 0.6 / 0.7) < 1e-12 and gap_coarse <= 0.1 and gap_fine < gap_coarse
    record(8, ok, f"gamma*={analytic:.6f}; detected {coarse:.5f} (eps 1e-2), {fine:.5f} (eps 1e-3); "
                  f"gaps {gap_coarse:.2e} -> {gap_fine:.2e}")


def test_09_variational_consistency():
    worst = 0.0
    for a, b, g, V, c in GRID:
        p = Params(c, V, 0.0)
        for law in (stribeck_law(StribeckConstants(a, b, g)), coulomb_law()):
            y = variational_y2(2 * math.pi, law, p)
            worst = max(worst, abs(y - (grazing_integral(law, p) - c * V * math.pi)))
    record(9, worst <= 1e-10, f"max |y2(2pi) - (I - cV pi)| = {worst:.2e} (tol 1e-10)")


def test_10_curvature_by_finite_differences():
    h, worst = 1e-3, 0.0
    for V in (0.25, 0.5, 1.0, 2.0):
        p = Params(1.0, V, 0.0)
        x2 = [flow((1.0, V), p, coulomb_law(), 2 * math.pi + s)[1] for s in (-h, 0.0, h)]
        second = (x2[0] - 2 * x2[1] + x2[2]) / h**2
        worst = max(worst, abs(second + V))
    record(10, worst <= 1e-5, f"max |X2''(2pi) + V| = {worst:.2e} (h={h}, tol 1e-5)")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                fn()
            except AssertionError:
                pass
