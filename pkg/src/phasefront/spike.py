"""Cylindrical two-temperature solver: electrons heated by a radial source,
a lattice heated through electron-atom coupling.

Each step splits into (a) one gamma-weighted diffusion solve per field on
the radial grid, with the source feeding the electron equation, and (b) an
exact pointwise relaxation of the temperature gap with capacities frozen
over the step.  The relaxation substep moves a single energy quantity out
of the electrons and into the lattice, so the coupling is antisymmetric to
rounding and cannot oscillate no matter how stiff the coupling constant:
the gap decays by exp(-g (1/(rho Ce) + 1/(rho Ci)) h_t) exactly.

Radial discretization is in flux form on half nodes, with the axis handled
by its finite-volume limit (no flux through r = 0) and the outer radius
pinned to the ambient temperature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .core import Grid1D, MaterialModel, TemperatureField
from .enthalpy import enthalpy as lattice_enthalpy
from .tridiag import TridiagonalSystem, thomas_solve
from . import analysis


def _as_fn(value) -> Callable[[np.ndarray], np.ndarray]:
    if callable(value):
        return value
    const = float(value)
    return lambda t: np.full_like(np.asarray(t, dtype=float), const)


@dataclass(frozen=True)
class SpikeMaterial:
    """Electron and lattice thermophysics plus the coupling constant.

    Capacities and conductivities are functions of the respective
    temperature; ``enthalpy_e``/``enthalpy_i`` are their volumetric
    antiderivatives (zero at the ambient temperature 1.0) used by the
    energy ledger.  Use :meth:`from_constants` unless you need fully
    custom property functions.
    """

    density: float
    coupling: float
    capacity_e: Callable
    conductivity_e: Callable
    capacity_i: Callable
    conductivity_i: Callable
    enthalpy_e: Callable
    enthalpy_i: Callable
    lattice: MaterialModel | None = None

    @staticmethod
    def from_constants(
        density: float,
        coupling: float,
        electron_capacity: float,
        electron_conductivity: float,
        lattice: MaterialModel,
    ) -> "SpikeMaterial":
        """Constant electron properties; lattice capacity carries the
        latent spike of ``lattice`` and its (possibly constant) conductivity."""
        rho = float(density)
        ce = float(electron_capacity)
        from .enthalpy import effective_capacity

        return SpikeMaterial(
            density=rho,
            coupling=float(coupling),
            capacity_e=_as_fn(ce),
            conductivity_e=_as_fn(electron_conductivity),
            capacity_i=lambda t: effective_capacity(lattice, t),
            conductivity_i=lambda t: lattice.conductivity_at(t),
            enthalpy_e=lambda t: rho * ce * (np.asarray(t, dtype=float) - 1.0),
            enthalpy_i=lambda t: rho * lattice_enthalpy(lattice, t),
            lattice=lattice,
        )

    def relaxation_time(self, temp: float = 1.0) -> float:
        """Electron-lattice relaxation time rho * Ce / g."""
        if self.coupling <= 0:
            return math.inf
        ce = float(np.asarray(self.capacity_e(np.asarray(temp, dtype=float))))
        return self.density * ce / self.coupling

    def check(self) -> list[str]:
        out = []
        if not (np.isfinite(self.density) and self.density > 0):
            out.append("spike.density: must be positive")
        if self.coupling < 0 or not np.isfinite(self.coupling):
            out.append("spike.coupling: must be >= 0")
        return out


@dataclass(frozen=True)
class TwoTempState:
    """Paired electron/lattice fields on a radial grid at one time."""

    radial_grid: Grid1D
    temp_e: np.ndarray
    temp_i: np.ndarray
    time: float

    def __post_init__(self):
        object.__setattr__(self, "temp_e", np.asarray(self.temp_e, dtype=float))
        object.__setattr__(self, "temp_i", np.asarray(self.temp_i, dtype=float))
        n = self.radial_grid.n_nodes
        if self.temp_e.shape != (n,) or self.temp_i.shape != (n,):
            raise ValueError("temperature arrays must match the radial grid")
        if not (np.all(np.isfinite(self.temp_e)) and np.all(np.isfinite(self.temp_i))):
            raise ValueError("non-finite temperatures in state")


@dataclass(frozen=True)
class SpikeConfig:
    radial_grid: Grid1D
    grid_t: Grid1D
    material: SpikeMaterial
    source: "object"  # .values(r, t)
    gamma: float = 0.5
    ambient_temp: float = 1.0
    store_stride: int | None = None

    def check(self) -> list[str]:
        out = []
        out.extend(self.radial_grid.check())
        out.extend(self.grid_t.check())
        out.extend(self.material.check())
        if self.radial_grid.n_cells < 3:
            out.append("radial_grid.n_cells: need at least 3 cells")
        if not (0.0 <= self.gamma <= 1.0):
            out.append("gamma: must lie in [0, 1]")
        return out


def _radial_couplings(grid: Grid1D, conductivity: Callable, temps: np.ndarray):
    """Flux-form neighbour couplings a_west, a_east for the radial operator.

    Interior coefficient toward r_{j+1/2} is r_{j+1/2} K_{j+1/2} / (r_j h^2);
    the axis row reduces to 4 K_{1/2} / h^2 acting on (T_1 - T_0).
    """
    h = grid.spacing
    n = grid.n_cells
    r = grid.nodes()
    k_nodes = np.asarray(conductivity(temps), dtype=float)
    k_half = 0.5 * (k_nodes[:-1] + k_nodes[1:])
    r_half = 0.5 * (r[:-1] + r[1:])

    a_west = np.zeros(n + 1)
    a_east = np.zeros(n + 1)
    a_west[1:] = r_half * k_half / (r[1:] * h * h)
    a_east[1:-1] = r_half[1:] * k_half[1:] / (r[1:-1] * h * h)
    a_east[0] = 4.0 * k_half[0] / (h * h)
    return a_west, a_east


def _assemble_field(
    grid: Grid1D,
    temps: np.ndarray,
    capacity_vol: np.ndarray,
    conductivity: Callable,
    gamma: float,
    h_t: float,
    source_mid: np.ndarray,
    ambient: float,
) -> TridiagonalSystem:
    a_west, a_east = _radial_couplings(grid, conductivity, temps)

    lap_prev = np.zeros(grid.n_nodes)
    lap_prev[1:] += a_west[1:] * (temps[:-1] - temps[1:])
    lap_prev[:-1] += a_east[:-1] * (temps[1:] - temps[:-1])

    inv_ht = capacity_vol / h_t
    diag = inv_ht + gamma * (a_west + a_east)
    lower = -gamma * a_west
    upper = -gamma * a_east
    rhs = inv_ht * temps + (1.0 - gamma) * lap_prev + source_mid

    # outer radius pinned to ambient
    diag[-1] = 1.0
    lower[-1] = 0.0
    upper[-1] = 0.0
    rhs[-1] = ambient
    return TridiagonalSystem(lower=lower, diag=diag, upper=upper, rhs=rhs)


def assemble_radial_step(
    state: TwoTempState, cfg: SpikeConfig, k: int
) -> tuple[TridiagonalSystem, TridiagonalSystem]:
    """The two diffusion systems advancing the state to level k + 1.

    The source enters the electron system at the half level; the coupling
    exchange is a separate substep (see module docstring), so neither
    system contains the partner temperature.
    """
    mat = cfg.material
    h_t = cfg.grid_t.spacing
    if h_t <= 0:
        raise ValueError("time step must be positive")
    r = cfg.radial_grid.nodes()
    t_mid = k * h_t + 0.5 * h_t
    q_mid = np.asarray(cfg.source.values(r, t_mid), dtype=float)

    ce = mat.density * np.asarray(mat.capacity_e(state.temp_e), dtype=float)
    ci = mat.density * np.asarray(mat.capacity_i(state.temp_i), dtype=float)
    sys_e = _assemble_field(
        cfg.radial_grid, state.temp_e, ce, mat.conductivity_e, cfg.gamma, h_t, q_mid,
        cfg.ambient_temp,
    )
    sys_i = _assemble_field(
        cfg.radial_grid, state.temp_i, ci, mat.conductivity_i, cfg.gamma, h_t,
        np.zeros_like(q_mid), cfg.ambient_temp,
    )
    return sys_e, sys_i


def _exchange(mat: SpikeMaterial, temp_e: np.ndarray, temp_i: np.ndarray, h_t: float):
    """Exact relaxation of the gap over one step with frozen capacities.

    Returns the updated pair plus the energy per unit volume moved from
    the electrons into the lattice (one shared quantity, so the transfer
    is antisymmetric by construction).
    """
    g = mat.coupling
    if g == 0.0:
        return temp_e, temp_i, np.zeros_like(temp_e)
    ce = mat.density * np.asarray(mat.capacity_e(temp_e), dtype=float)
    ci = mat.density * np.asarray(mat.capacity_i(temp_i), dtype=float)
    gap = temp_e - temp_i
    rate = g * (1.0 / ce + 1.0 / ci)
    decay = np.exp(-np.minimum(rate * h_t, 700.0))
    moved = (1.0 - decay) * gap * (ce * ci / (ce + ci))
    return temp_e - moved / ce, temp_i + moved / ci, moved


@dataclass
class SpikeTrace:
    """Record of a two-temperature run with its per-step energy partition."""

    config: SpikeConfig
    times: np.ndarray
    stored_levels: np.ndarray
    states: list[TwoTempState]
    source_in_step: np.ndarray
    exchange_step: np.ndarray
    outflow_e_step: np.ndarray
    outflow_i_step: np.ndarray
    enthalpy_e: np.ndarray
    enthalpy_i: np.ndarray
    lattice_tableland_width: np.ndarray
    lattice_tableland_cells: np.ndarray
    residual_norms: np.ndarray = dc_field(default_factory=lambda: np.empty(0))

    @property
    def source_total(self) -> float:
        return float(np.sum(self.source_in_step))

    @property
    def outflow_total(self) -> float:
        return float(np.sum(self.outflow_e_step) + np.sum(self.outflow_i_step))

    def ledger(self) -> dict[str, float]:
        change = float(
            self.enthalpy_e[-1] - self.enthalpy_e[0] + self.enthalpy_i[-1] - self.enthalpy_i[0]
        )
        net_in = self.source_total - self.outflow_total
        err = change - net_in
        scale = max(abs(self.source_total), abs(self.outflow_total), abs(change))
        # absolute error when essentially no energy moved at all
        rel = abs(err) / scale if scale > 1e-12 else abs(err)
        return {
            "source": self.source_total,
            "boundary_out": self.outflow_total,
            "exchanged": float(np.sum(self.exchange_step)),
            "enthalpy_change": change,
            "relative_error": rel,
        }

    def lattice_field(self, index: int) -> TemperatureField:
        st = self.states[index]
        return TemperatureField(st.radial_grid, st.temp_i, st.time)


def run_spike(cfg: SpikeConfig) -> SpikeTrace:
    """March the split scheme and account every energy pathway per step."""
    problems = cfg.check()
    if problems:
        from .core import ConfigError

        raise ConfigError(problems)

    grid = cfg.radial_grid
    mat = cfg.material
    n_t = cfg.grid_t.n_cells
    h_t = cfg.grid_t.spacing
    h = grid.spacing
    r = grid.nodes()
    n = grid.n_cells
    stride = cfg.store_stride or (1 if n_t <= 10_000 else math.ceil(n_t / 1000))

    # finite-volume cell volumes per unit axial length (2 pi r dr); the
    # pinned outer node carries no interior volume
    weights = np.zeros(n + 1)
    weights[0] = h * h / 8.0
    weights[1:-1] = r[1:-1] * h
    weights *= 2.0 * math.pi

    temp_e = np.full(n + 1, cfg.ambient_temp)
    temp_i = np.full(n + 1, cfg.ambient_temp)
    times = np.arange(n_t + 1) * h_t

    source_in_step = np.zeros(n_t)
    exchange_step = np.zeros(n_t)
    outflow_e_step = np.zeros(n_t)
    outflow_i_step = np.zeros(n_t)
    residual_norms = np.zeros(n_t)
    enthalpy_e = np.zeros(n_t + 1)
    enthalpy_i = np.zeros(n_t + 1)
    width_series = np.zeros(n_t + 1)
    cells_series = np.zeros(n_t + 1, dtype=int)

    def record(k: int) -> None:
        enthalpy_e[k] = float(np.dot(weights, np.asarray(mat.enthalpy_e(temp_e), dtype=float)))
        enthalpy_i[k] = float(np.dot(weights, np.asarray(mat.enthalpy_i(temp_i), dtype=float)))
        if mat.lattice is not None:
            width_series[k], cells_series[k] = analysis.tableland_band_values(
                temp_i, h, mat.lattice.transition_temp, mat.lattice.smoothing_width
            )

    r_face_out = 0.5 * (r[-2] + r[-1])

    def boundary_outflow(old: np.ndarray, new: np.ndarray, conductivity: Callable) -> float:
        # face conductivity frozen at the old field, matching the assembly
        k_nodes = np.asarray(conductivity(old), dtype=float)
        k_face = 0.5 * (k_nodes[-2] + k_nodes[-1])
        jump = cfg.gamma * (new[-2] - new[-1]) + (1.0 - cfg.gamma) * (old[-2] - old[-1])
        return 2.0 * math.pi * r_face_out * k_face * jump / h

    record(0)
    stored_levels = [0]
    states = [TwoTempState(grid, temp_e.copy(), temp_i.copy(), 0.0)]

    for k in range(n_t):
        state = TwoTempState(grid, temp_e, temp_i, times[k])
        sys_e, sys_i = assemble_radial_step(state, cfg, k)
        new_e = thomas_solve(sys_e, check_dominance=False)
        new_i = thomas_solve(sys_i, check_dominance=False)
        if not (np.all(np.isfinite(new_e)) and np.all(np.isfinite(new_i))):
            raise RuntimeError(f"non-finite spike fields while advancing level {k}")
        residual_norms[k] = max(sys_e.residual_norm(new_e), sys_i.residual_norm(new_i))

        outflow_e_step[k] = h_t * boundary_outflow(temp_e, new_e, mat.conductivity_e)
        outflow_i_step[k] = h_t * boundary_outflow(temp_i, new_i, mat.conductivity_i)

        t_mid = times[k] + 0.5 * h_t
        q_mid = np.asarray(cfg.source.values(r, t_mid), dtype=float)
        source_in_step[k] = h_t * float(np.dot(weights, q_mid))

        temp_e, temp_i, moved = _exchange(mat, new_e, new_i, h_t)
        exchange_step[k] = float(np.dot(weights, moved))

        record(k + 1)
        if (k + 1) % stride == 0 or k + 1 == n_t:
            stored_levels.append(k + 1)
            states.append(TwoTempState(grid, temp_e.copy(), temp_i.copy(), times[k + 1]))

    return SpikeTrace(
        config=cfg,
        times=times,
        stored_levels=np.asarray(stored_levels),
        states=states,
        source_in_step=source_in_step,
        exchange_step=exchange_step,
        outflow_e_step=outflow_e_step,
        outflow_i_step=outflow_i_step,
        enthalpy_e=enthalpy_e,
        enthalpy_i=enthalpy_i,
        lattice_tableland_width=width_series,
        lattice_tableland_cells=cells_series,
        residual_norms=residual_norms,
    )
