"""ipmsim: simulation and stability analysis of a crop-pest system under
periodic biopesticide and chemical-pesticide impulses.

The model couples crop biomass, susceptible and infected pests, a virus-based
biopesticide and a decaying chemical pesticide; both controls are applied as
instantaneous periodic pulses.  The package integrates the hybrid dynamics,
computes Floquet multipliers of the pest-free periodic orbit, evaluates the
sufficient stability conditions, and verifies the theoretical boundedness and
extinction guarantees on computed trajectories.
"""

from ._backend import backend_name, compiled_available
from .config import (
    ScenarioConfig,
    SweepSpec,
    load_config,
    load_preset,
    preset_names,
)
from .diagnostics import DiagnosticsReport, theoretical_bound, verify_trajectory
from .errors import ConfigError, DomainError, IntegrationError
from .integrator import (
    EventRecord,
    ImpulseEvent,
    SolverConfig,
    SolverStats,
    Trajectory,
    impulse_calendar,
    integrate,
    integrate_rk4,
    sample_dense,
)
from .model import (
    ImpulseKind,
    ImpulseSchedule,
    ModelParameters,
    SystemState,
    analytic_periodic_bio,
    analytic_periodic_chem,
    apply_impulse,
    default_parameters,
    logistic_solution,
    vector_field,
)
from .stability import (
    StabilityReport,
    analytic_multipliers,
    analyze,
    check_conditions,
    combined_period,
    critical_period,
    growth_exponents,
    monodromy,
    multiplier_moduli,
    schedule_period,
)
from .svgplot import render_trajectory_svg, write_trajectory_svg

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend_name",
    "compiled_available",
    "ScenarioConfig",
    "SweepSpec",
    "load_config",
    "load_preset",
    "preset_names",
    "DiagnosticsReport",
    "theoretical_bound",
    "verify_trajectory",
    "ConfigError",
    "DomainError",
    "IntegrationError",
    "EventRecord",
    "ImpulseEvent",
    "SolverConfig",
    "SolverStats",
    "Trajectory",
    "impulse_calendar",
    "integrate",
    "integrate_rk4",
    "sample_dense",
    "ImpulseKind",
    "ImpulseSchedule",
    "ModelParameters",
    "SystemState",
    "analytic_periodic_bio",
    "analytic_periodic_chem",
    "apply_impulse",
    "default_parameters",
    "logistic_solution",
    "vector_field",
    "StabilityReport",
    "analytic_multipliers",
    "analyze",
    "check_conditions",
    "combined_period",
    "critical_period",
    "monodromy",
    "growth_exponents",
    "multiplier_moduli",
    "schedule_period",
    "render_trajectory_svg",
    "write_trajectory_svg",
]
