"""Phase-change heat conduction with distributed power sources.

A fixed-grid enthalpy (effective heat capacity) solver for melting driven
by volumetric heating, a spatially uniform reduction of the same balance,
a cylindrical two-temperature solver for electron/lattice relaxation, and
diagnostics that measure where the classical interface flux balance holds
and where it fails.
"""

__version__ = "0.1.0"

from .core import (
    ConfigError,
    Grid1D,
    MaterialModel,
    ScaleSet,
    SimulationConfig,
    TemperatureField,
    check_config,
    validate_config,
)
from .enthalpy import SmoothedDelta, delta_value, effective_capacity, enthalpy, invert_enthalpy
from .sources import (
    CallbackSource,
    GaussianSpikeSource,
    LogisticBeamSource,
    deposited_energy,
    source_value,
)
from .tridiag import SingularSystemError, TridiagonalSystem, thomas_solve
from .solver1d import SimulationTrace, TimeStepReport, assemble_step, run_simulation
from .lumped import (
    LumpedTrace,
    NoPlateauError,
    TransitionBoundReport,
    check_transition_bound,
    solve_lumped,
)
from .spike import SpikeConfig, SpikeMaterial, SpikeTrace, TwoTempState, assemble_radial_step, run_spike
from .analysis import (
    ConvergenceResult,
    InstabilityTable,
    PhaseFrontTrace,
    StefanResidualTrace,
    TablelandMetrics,
    convergence_study,
    delta_instability_sweep,
    front_trace,
    locate_fronts,
    residual_relaxation_time,
    stefan_residual,
    tableland_metrics,
)

__all__ = [
    "__version__",
    "ConfigError",
    "Grid1D",
    "MaterialModel",
    "ScaleSet",
    "SimulationConfig",
    "TemperatureField",
    "check_config",
    "validate_config",
    "SmoothedDelta",
    "delta_value",
    "effective_capacity",
    "enthalpy",
    "invert_enthalpy",
    "CallbackSource",
    "GaussianSpikeSource",
    "LogisticBeamSource",
    "deposited_energy",
    "source_value",
    "SingularSystemError",
    "TridiagonalSystem",
    "thomas_solve",
    "SimulationTrace",
    "TimeStepReport",
    "assemble_step",
    "run_simulation",
    "LumpedTrace",
    "NoPlateauError",
    "TransitionBoundReport",
    "check_transition_bound",
    "solve_lumped",
    "SpikeConfig",
    "SpikeMaterial",
    "SpikeTrace",
    "TwoTempState",
    "assemble_radial_step",
    "run_spike",
    "ConvergenceResult",
    "InstabilityTable",
    "PhaseFrontTrace",
    "StefanResidualTrace",
    "TablelandMetrics",
    "convergence_study",
    "delta_instability_sweep",
    "front_trace",
    "locate_fronts",
    "residual_relaxation_time",
    "stefan_residual",
    "tableland_metrics",
]
