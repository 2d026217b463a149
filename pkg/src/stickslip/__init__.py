"""Stick-slip limit cycles of a dry-friction oscillator on a moving belt.

Simulation of the Filippov system, the first-order existence criterion for
small nonlinear friction corrections, and tools that check one against the
other.
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    ConfigError,
    FrictionLaw,
    Mode,
    Params,
    State,
    StribeckConstants,
    coulomb_law,
    sliding_interval,
    slip_field,
    stribeck_law,
)
from .integrator import (  # noqa: E402
    Event,
    EventKind,
    IntegrationError,
    IntegratorConfig,
    ManifoldClass,
    Trajectory,
    classify_manifold_point,
    flow,
    integrate_slip,
    simulate,
    slide_step,
)
from .criterion import (  # noqa: E402
    CriterionReport,
    StribeckReport,
    divergence,
    grazing_integral,
    perturbation_margin,
    stribeck_report,
    variational_y2,
)
from .detector import (  # noqa: E402
    Case,
    CycleReport,
    ReturnResult,
    classify_case,
    convergence_table,
    detect_stick_slip,
    find_return,
)
from .sweep import SweepRecord, SweepSpec, locate_boundary, run_sweep  # noqa: E402
