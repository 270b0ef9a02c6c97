"""Complex-valued sliding mode control of a three-phase VSI: switching methods and simulation."""

from .engine import Event, Scenario, Trace, benchmark_scenario, reference_at, run, run_sweep
from .errors import ConfigError, DegenerateSigmaError, InvalidDutyError, RangeError
from .smc import ReferenceSpec, VsiParams
from .transform import AMPLITUDE_INVARIANT, POWER_INVARIANT

__all__ = [
    "AMPLITUDE_INVARIANT", "POWER_INVARIANT", "ConfigError", "DegenerateSigmaError", "Event",
    "InvalidDutyError", "RangeError", "ReferenceSpec", "Scenario", "Trace", "VsiParams",
    "benchmark_scenario", "reference_at", "run", "run_sweep",
]

__version__ = "0.1.0"
