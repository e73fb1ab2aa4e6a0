"""Glimm random-choice scheme with an exact damping substep for 2x2 gas-dynamics systems."""

__version__ = "0.1.0"

from .errors import (CFLError, ConfigError, CurveRangeError, DomainError, GlimmDampError,  # noqa: E402
                     SafetyRegionError, UnsolvableRiemannError, UnsupportedOperationError)
from .models import (DampingParams, EquilibriumState, GasModel, InvariantPoint, Kind,  # noqa: E402
                     PrimitiveState, from_invariants, to_invariants)
from .waves import (fan_sample, shock_curve_left, shock_curve_right, shock_slope,  # noqa: E402
                    solve_riemann, wave_strength)
from .glimm import (GridState, SamplingSequence, cfl_timestep, diagnostics,  # noqa: E402
                    fractional_decay, glimm_step, grid_wave_strength, run)
from .config import RunConfig, VerifyConfig, parse_config, serialize_config  # noqa: E402

__all__ = [
    "__version__", "GlimmDampError", "DomainError", "UnsupportedOperationError", "CurveRangeError",
    "UnsolvableRiemannError", "CFLError", "SafetyRegionError", "ConfigError", "Kind", "GasModel",
    "PrimitiveState", "EquilibriumState", "InvariantPoint", "DampingParams", "to_invariants",
    "from_invariants", "shock_curve_right", "shock_curve_left", "shock_slope", "solve_riemann",
    "fan_sample", "wave_strength", "GridState", "SamplingSequence", "cfl_timestep",
    "fractional_decay", "glimm_step", "grid_wave_strength", "diagnostics", "run", "RunConfig",
    "VerifyConfig", "parse_config", "serialize_config",
]
