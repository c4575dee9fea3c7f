"""Domain types shared by every solver.

All solver mathematics is dimensionless: temperature is measured in units of
the reference temperature, position in units of the slab thickness, and time
in units of the drive-pulse duration.  ``ScaleSet`` converts results back to
physical units and is purely an I/O-layer concern; nothing in the solvers
depends on it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

ConductivityLike = Union[float, Callable[[np.ndarray], np.ndarray]]


class ConfigError(ValueError):
    """Raised when a configuration violates a type invariant.

    Carries the full list of violations so callers can report all of them
    at once instead of failing on the first.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1D grid over [0, length] with n_cells intervals.

    Nodes sit at j * spacing for j = 0 .. n_cells, so there are
    n_cells + 1 nodes.
    """

    n_cells: int
    length: float

    @property
    def spacing(self) -> float:
        return self.length / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    def nodes(self) -> np.ndarray:
        # arange * spacing keeps node j exactly at j * spacing
        return np.arange(self.n_cells + 1) * self.spacing

    def check(self) -> list[str]:
        out = []
        if not (isinstance(self.n_cells, (int, np.integer)) and self.n_cells > 0):
            out.append("grid.n_cells: must be a positive integer")
        if not (np.isfinite(self.length) and self.length > 0):
            out.append("grid.length: must be positive and finite")
        return out


@dataclass(frozen=True)
class MaterialModel:
    """Dimensionless thermophysical description of the slab.

    The volumetric heat capacity is ``base_capacity`` plus a latent
    contribution ``latent_heat * delta(T - transition_temp)`` where the
    delta function is a Gaussian of standard deviation ``smoothing_width``
    (see :mod:`phasefront.enthalpy`).  ``conductivity`` may be a constant
    or a function of temperature; the constant case is the default.
    """

    base_capacity: float = 1.0
    conductivity: ConductivityLike = 1.0
    latent_heat: float = 0.0
    transition_temp: float = 2.0
    smoothing_width: float = 0.05

    def conductivity_at(self, temps: np.ndarray) -> np.ndarray:
        """Evaluate k(T) on an array of temperatures."""
        t = np.asarray(temps, dtype=float)
        if callable(self.conductivity):
            return np.broadcast_to(np.asarray(self.conductivity(t), dtype=float), t.shape).copy()
        return np.full_like(t, float(self.conductivity))

    def check(self) -> list[str]:
        out = []
        if not (np.isfinite(self.base_capacity) and self.base_capacity > 0):
            out.append("material.base_capacity: must be positive")
        if self.latent_heat < 0 or not np.isfinite(self.latent_heat):
            out.append("material.latent_heat: must be >= 0")
        if not (np.isfinite(self.smoothing_width) and self.smoothing_width > 0):
            out.append("material.smoothing_width: must be > 0")
        if not np.isfinite(self.transition_temp):
            out.append("material.transition_temp: must be finite")
        if not callable(self.conductivity):
            if not (np.isfinite(self.conductivity) and self.conductivity > 0):
                out.append("material.conductivity: must be > 0")
        return out


@dataclass(frozen=True)
class ScaleSet:
    """Physical scales used to convert dimensionless results back to SI.

    Attributes:
        T0: reference temperature [K]
        l0: slab thickness [m]
        tau: drive-pulse duration [s]
    """

    T0: float
    l0: float
    tau: float

    def check(self) -> list[str]:
        out = []
        for name in ("T0", "l0", "tau"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                out.append(f"scales.{name}: must be positive and finite")
        return out

    def temperature_to_physical(self, t_dl):
        return np.asarray(t_dl) * self.T0

    def temperature_to_dimensionless(self, t_phys):
        return np.asarray(t_phys) / self.T0

    def length_to_physical(self, x_dl):
        return np.asarray(x_dl) * self.l0

    def length_to_dimensionless(self, x_phys):
        return np.asarray(x_phys) / self.l0

    def time_to_physical(self, t_dl):
        return np.asarray(t_dl) * self.tau

    def time_to_dimensionless(self, t_phys):
        return np.asarray(t_phys) / self.tau


@dataclass(frozen=True)
class TemperatureField:
    """Grid-sampled temperature at one time level."""

    grid: Grid1D
    values: np.ndarray
    time: float

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"field length {self.values.shape} does not match grid "
                f"({self.grid.n_nodes} nodes)"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")


# Left-boundary treatments for the Cartesian solver.  The default reflects
# the field through a ghost node (zero flux); "fixed" pins the node to a
# prescribed temperature, which is how the classical boundary-driven
# control runs are produced.
INSULATED = "insulated"


@dataclass(frozen=True)
class SimulationConfig:
    """Everything a Cartesian run needs.

    ``gamma`` is the time-weighting of the difference scheme: 0 is fully
    explicit, 1 fully implicit, 0.5 the second-order choice.  The initial
    field is ``initial_temp`` plus an optional cosine perturbation
    ``cosine_amp * cos(cosine_mode * pi * x)`` used by the analytic
    diffusion benchmarks.

    ``capacity_iterations`` > 0 re-evaluates the effective capacity at the
    midpoint temperature and re-solves, for runs where the smoothing width
    is small compared to the per-step temperature rise.  The default (0)
    lags the capacity at the old time level.
    """

    grid_x: Grid1D
    grid_t: Grid1D
    material: MaterialModel
    source: "object"  # anything with .values(x, t); see phasefront.sources
    gamma: float = 0.5
    initial_temp: float = 1.0
    cosine_amp: float = 0.0
    cosine_mode: int = 1
    left_boundary: Union[str, float] = INSULATED
    capacity_iterations: int = 0
    store_stride: int | None = None

    def initial_field(self) -> np.ndarray:
        x = self.grid_x.nodes()
        return self.initial_temp + self.cosine_amp * np.cos(self.cosine_mode * np.pi * x)

    def check(self) -> list[str]:
        out = []
        out.extend(self.grid_x.check())
        out.extend(self.grid_t.check())
        out.extend(self.material.check())
        if not (0.0 <= self.gamma <= 1.0):
            out.append("gamma: must lie in [0, 1]")
        peak = self.initial_temp + abs(self.cosine_amp)
        if np.isfinite(self.material.transition_temp) and peak >= self.material.transition_temp:
            out.append("initial_temp: initial field must start below material.transition_temp")
        if self.left_boundary != INSULATED:
            try:
                float(self.left_boundary)
            except (TypeError, ValueError):
                out.append("left_boundary: must be 'insulated' or a fixed temperature")
        if self.capacity_iterations < 0:
            out.append("capacity_iterations: must be >= 0")
        if self.store_stride is not None and self.store_stride < 1:
            out.append("store_stride: must be >= 1")
        return out


def check_config(cfg: SimulationConfig) -> list[str]:
    """Collect invariant violations; an empty list means the config is valid."""
    return cfg.check()


def validate_config(cfg: SimulationConfig) -> SimulationConfig:
    """Return ``cfg`` unchanged if valid, else raise ConfigError listing
    every violated rule (field name plus rule)."""
    violations = check_config(cfg)
    if violations:
        raise ConfigError(violations)
    return cfg


def with_refinement(cfg: SimulationConfig, factor: int) -> SimulationConfig:
    """A copy of ``cfg`` with both grids refined by an integer factor."""
    if factor < 1:
        raise ValueError("refinement factor must be >= 1")
    return replace(
        cfg,
        grid_x=Grid1D(cfg.grid_x.n_cells * factor, cfg.grid_x.length),
        grid_t=Grid1D(cfg.grid_t.n_cells * factor, cfg.grid_t.length),
    )
