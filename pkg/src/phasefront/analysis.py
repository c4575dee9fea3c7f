"""Post-processing diagnostics over temperature fields and run traces.

Everything here is read-only over its inputs: front localization by
transition-temperature crossings, the interface flux-balance residual,
plateau-band (tableland) measurement, sensitivity of the front position to
the assumed transition temperature, and grid-convergence studies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SimulationConfig, TemperatureField, with_refinement


# ---------------------------------------------------------------------------
# front localization


def locate_fronts_values(values: np.ndarray, x_nodes: np.ndarray, t_star: float) -> list[float]:
    """Sorted positions where the piecewise-linear field crosses ``t_star``.

    Strict sign changes are located by linear interpolation; a run of nodes
    sitting exactly at ``t_star`` collapses to the run's endpoints.
    """
    s = np.asarray(values, dtype=float) - t_star
    n = s.size

    if not np.any(s == 0.0):
        # common path: strict sign changes only, fully vectorized
        pos = s > 0.0
        flips = np.flatnonzero(pos[:-1] != pos[1:])
        if flips.size == 0:
            return []
        frac = s[flips] / (s[flips] - s[flips + 1])
        crossings = x_nodes[flips] + frac * (x_nodes[flips + 1] - x_nodes[flips])
        return [float(c) for c in crossings]

    out: list[float] = []
    j = 0
    while j < n:
        if s[j] == 0.0:
            j_end = j
            while j_end + 1 < n and s[j_end + 1] == 0.0:
                j_end += 1
            out.append(float(x_nodes[j]))
            if j_end > j:
                out.append(float(x_nodes[j_end]))
            j = j_end + 1
            continue
        if j + 1 < n and s[j + 1] != 0.0 and (s[j] > 0.0) != (s[j + 1] > 0.0):
            frac = s[j] / (s[j] - s[j + 1])
            out.append(float(x_nodes[j] + frac * (x_nodes[j + 1] - x_nodes[j])))
        j += 1
    return out


def locate_fronts(field: TemperatureField, t_star: float) -> list[float]:
    """Crossing positions of ``t_star`` in a field (empty when none)."""
    return locate_fronts_values(field.values, field.grid.nodes(), t_star)


def melt_thickness_values(values: np.ndarray, x_nodes: np.ndarray, t_star: float) -> float:
    """Total length of {x : T(x) > t_star} under linear interpolation."""
    s = np.asarray(values, dtype=float) - t_star
    a, b = s[:-1], s[1:]
    seg = np.diff(x_nodes)
    above_a = a > 0
    above_b = b > 0
    total = float(np.sum(seg[above_a & above_b]))
    # partial segments: the crossing splits the cell at a/(a-b)
    enter = above_a & ~above_b
    if np.any(enter):
        frac = a[enter] / (a[enter] - b[enter])
        total += float(np.sum(seg[enter] * frac))
    leave = ~above_a & above_b
    if np.any(leave):
        frac = a[leave] / (a[leave] - b[leave])
        total += float(np.sum(seg[leave] * (1.0 - frac)))
    return total


def tableland_band_values(
    values: np.ndarray, spacing: float, t_star: float, delta: float
) -> tuple[float, int]:
    """Widest contiguous band with |T - t_star| <= delta.

    Returns (width, cells) where cells counts grid intervals whose both
    endpoints lie in the band; a single in-band node has zero width.
    """
    in_band = np.abs(np.asarray(values, dtype=float) - t_star) <= delta
    if not np.any(in_band):
        return 0.0, 0
    padded = np.concatenate(([0], in_band.astype(np.int8), [0]))
    edges = np.flatnonzero(np.diff(padded))
    run_lengths = edges[1::2] - edges[0::2]
    cells = int(run_lengths.max()) - 1
    cells = max(cells, 0)
    return cells * spacing, cells


@dataclass(frozen=True)
class TablelandMetrics:
    width: float
    cells: int
    extended: bool


def tableland_metrics(field: TemperatureField, mat) -> TablelandMetrics:
    """Plateau-band measurement; ``extended`` flags a band of >= 3 cells."""
    width, cells = tableland_band_values(
        field.values, field.grid.spacing, mat.transition_temp, mat.smoothing_width
    )
    return TablelandMetrics(width=width, cells=cells, extended=cells >= 3)


# ---------------------------------------------------------------------------
# front tracking over a trace


@dataclass
class PhaseFrontTrace:
    """Crossing positions per stored level plus the exterior-front track.

    ``velocities`` holds d(exterior)/dt by centered differences wherever the
    front persists; levels where it jumps more than the per-step gate or
    disappears are flagged ``unstable`` and get no velocity.
    """

    times: np.ndarray
    fronts: list[list[float]]
    exterior: np.ndarray
    velocities: np.ndarray
    unstable: np.ndarray
    levels: np.ndarray


def front_trace(
    trace,
    t_star: float | None = None,
    max_jump_cells: float = 5.0,
    stride: int = 1,
) -> PhaseFrontTrace:
    """Track transition-temperature crossings across a run's stored fields.

    ``stride`` subsamples the stored levels; velocities differenced over a
    coarser stride trade time resolution for less cell-crossing jitter.
    """
    cfg = trace.config
    use_star = cfg.material.transition_temp if t_star is None else float(t_star)
    h_x = cfg.grid_x.spacing
    pick = np.arange(0, len(trace.stored_levels), max(1, stride))
    if pick[-1] != len(trace.stored_levels) - 1:
        pick = np.append(pick, len(trace.stored_levels) - 1)
    levels = trace.stored_levels[pick]
    times = trace.times[levels]
    x_nodes = cfg.grid_x.nodes()

    fronts = [
        locate_fronts_values(trace.fields[i].values, x_nodes, use_star) for i in pick
    ]
    exterior = np.array([f[-1] if f else np.nan for f in fronts])

    m = len(levels)
    unstable = np.zeros(m, dtype=bool)
    for i in range(1, m):
        if np.isnan(exterior[i]) or np.isnan(exterior[i - 1]):
            continue
        gate = max_jump_cells * h_x * (levels[i] - levels[i - 1])
        if abs(exterior[i] - exterior[i - 1]) > gate:
            unstable[i] = True
            unstable[i - 1] = True
    unstable |= np.isnan(exterior)

    velocities = np.full(m, np.nan)
    for i in range(m):
        lo = i - 1 if i > 0 else i
        hi = i + 1 if i < m - 1 else i
        if lo == hi:
            continue
        if np.any(unstable[lo : hi + 1]):
            continue
        dt = times[hi] - times[lo]
        if dt > 0:
            velocities[i] = (exterior[hi] - exterior[lo]) / dt

    return PhaseFrontTrace(
        times=times,
        fronts=fronts,
        exterior=exterior,
        velocities=velocities,
        unstable=unstable,
        levels=levels,
    )


# ---------------------------------------------------------------------------
# interface flux-balance residual


@dataclass
class StefanResidualTrace:
    """phi(t) and the probe temperatures it was sampled at.

    phi is NaN wherever a probe crossing, stencil, or front velocity is
    unavailable (no front, band at a domain edge, or a flagged jump).
    """

    times: np.ndarray
    phi: np.ndarray
    probe_temps: tuple[float, float]
    levels: np.ndarray


def _parabola_slope(x0: float, h: float, y: np.ndarray, at: float) -> float:
    """Derivative at ``at`` of the parabola through (x0, x0+h, x0+2h)."""
    x1 = x0 + h
    x2 = x0 + 2.0 * h
    two = 2.0 * at
    return (
        y[0] * (two - x1 - x2) / (2.0 * h * h)
        - y[1] * (two - x0 - x2) / (h * h)
        + y[2] * (two - x0 - x1) / (2.0 * h * h)
    )


def _one_sided_gradient_hot(values: np.ndarray, x_nodes: np.ndarray, x_at: float, h: float):
    """Slope at the crossing from a 3-node stencil entirely on the hot side."""
    idx = int(np.floor(x_at / h))
    if idx < 2:
        return None
    return _parabola_slope(x_nodes[idx - 2], h, values[idx - 2 : idx + 1], x_at)


def _one_sided_gradient_cold(values: np.ndarray, x_nodes: np.ndarray, x_at: float, h: float):
    """Slope at the crossing from a 3-node stencil entirely on the cold side."""
    idx = int(np.ceil(x_at / h))
    if idx > values.size - 3:
        return None
    return _parabola_slope(x_nodes[idx], h, values[idx : idx + 3], x_at)


def stefan_residual(
    trace, mat, probe_band: float = 3.0, stride: int = 1
) -> StefanResidualTrace:
    """Flux-jump balance at the melt layer per stored level.

    Probes sit at T* +- probe_band * smoothing_width, outside the latent
    band.  The hot-side gradient is one-sided into the hot region at the
    upper-probe crossing, the cold-side gradient one-sided into the cold
    region at the lower-probe crossing, and the residual is

        phi = k * (grad_cold - grad_hot) - latent_heat * d(exterior)/dt
    """
    cfg = trace.config
    t_star = mat.transition_temp
    t_hot = t_star + probe_band * mat.smoothing_width
    t_cold = t_star - probe_band * mat.smoothing_width
    h_x = cfg.grid_x.spacing
    x_nodes = cfg.grid_x.nodes()
    k_star = float(mat.conductivity_at(np.asarray(t_star)))

    ft = front_trace(trace, t_star=None, stride=stride)
    field_index = np.searchsorted(trace.stored_levels, ft.levels)
    phi = np.full(len(ft.levels), np.nan)

    for i, fi in enumerate(field_index):
        if np.isnan(ft.velocities[i]) or ft.unstable[i]:
            continue
        vals = trace.fields[fi].values
        hot_crossings = locate_fronts_values(vals, x_nodes, t_hot)
        cold_crossings = locate_fronts_values(vals, x_nodes, t_cold)
        if not hot_crossings or not cold_crossings:
            continue
        x_hot = hot_crossings[-1]
        colds = [x for x in cold_crossings if x > x_hot]
        if not colds:
            continue
        x_cold = colds[0]
        g_hot = _one_sided_gradient_hot(vals, x_nodes, x_hot, h_x)
        g_cold = _one_sided_gradient_cold(vals, x_nodes, x_cold, h_x)
        if g_hot is None or g_cold is None:
            continue
        phi[i] = k_star * (g_cold - g_hot) - mat.latent_heat * ft.velocities[i]

    return StefanResidualTrace(
        times=ft.times, phi=phi, probe_temps=(t_hot, t_cold), levels=ft.levels
    )


def residual_relaxation_time(res: StefanResidualTrace, fraction: float = 0.1, sustain: int = 3):
    """First time |phi| stays below ``fraction`` of its defined maximum.

    Returns None when the residual never settles.  ``sustain`` consecutive
    samples below the threshold are required so single grid-crossing blips
    do not count as relaxation.
    """
    defined = np.isfinite(res.phi)
    if not np.any(defined):
        return None
    peak = float(np.nanmax(np.abs(res.phi)))
    if peak == 0.0:
        return float(res.times[np.flatnonzero(defined)[0]])
    i_peak = int(np.nanargmax(np.abs(res.phi)))
    below = np.abs(res.phi) < fraction * peak
    below &= defined
    run = 0
    for i in range(i_peak, len(below)):
        run = run + 1 if below[i] else 0
        if run >= sustain:
            return float(res.times[i - sustain + 1])
    return None


# ---------------------------------------------------------------------------
# sensitivity of the front position to the assumed transition temperature


@dataclass
class InstabilityTable:
    """Per-level front sensitivity |d(exterior)/dT*| and flagged windows."""

    times: np.ndarray
    sensitivity: np.ndarray
    flagged: np.ndarray
    epsilon: float
    threshold: float
    exterior_plus: np.ndarray
    exterior_minus: np.ndarray
    levels: np.ndarray


def delta_instability_sweep(trace, epsilon: float, threshold: float = 10.0) -> InstabilityTable:
    """Re-localize fronts with the transition temperature perturbed by
    +-epsilon (no re-solve) and report |shift| / (2 epsilon) per level."""
    t_star = trace.config.material.transition_temp
    base = front_trace(trace)
    if epsilon == 0.0:
        zeros = np.zeros_like(base.exterior)
        return InstabilityTable(
            times=base.times,
            sensitivity=zeros,
            flagged=np.zeros(len(base.times), dtype=bool),
            epsilon=0.0,
            threshold=threshold,
            exterior_plus=base.exterior.copy(),
            exterior_minus=base.exterior.copy(),
            levels=base.levels,
        )
    plus = front_trace(trace, t_star=t_star + epsilon)
    minus = front_trace(trace, t_star=t_star - epsilon)
    sensitivity = np.abs(plus.exterior - minus.exterior) / (2.0 * epsilon)
    flagged = np.where(np.isfinite(sensitivity), sensitivity > threshold, False)
    return InstabilityTable(
        times=base.times,
        sensitivity=sensitivity,
        flagged=flagged,
        epsilon=epsilon,
        threshold=threshold,
        exterior_plus=plus.exterior,
        exterior_minus=minus.exterior,
        levels=base.levels,
    )


# ---------------------------------------------------------------------------
# grid convergence


@dataclass
class ConvergenceResult:
    n_cells: list[int]
    spacings: np.ndarray
    errors: np.ndarray
    fitted_order: float


def convergence_study(
    cfg: SimulationConfig,
    levels: int = 3,
    refine: int = 2,
    reference=None,
) -> ConvergenceResult:
    """Max-norm error at the final time across successive refinements.

    ``reference`` is a callable T(x) at the final time; without one, an
    extra run one refinement finer than the last level supplies the
    reference (its nodes nest over every coarser grid).
    """
    from .solver1d import run_simulation  # deferred: avoids an import cycle

    if levels < 3:
        raise ValueError("a convergence study needs at least 3 refinement levels")
    if refine < 2:
        raise ValueError("degenerate refinement: successive levels must differ")

    configs = [with_refinement(cfg, refine**i) for i in range(levels)]
    seen = set()
    for c in configs:
        key = (c.grid_x.n_cells, c.grid_t.n_cells)
        if key in seen:
            raise ValueError("degenerate refinement: identical grids across levels")
        seen.add(key)

    if reference is None:
        ref_cfg = with_refinement(cfg, refine**levels)
        ref_values = run_simulation(ref_cfg).fields[-1].values
    else:
        ref_values = None

    errors = []
    for i, sub in enumerate(configs):
        final = run_simulation(sub).fields[-1].values
        if reference is not None:
            exact = np.asarray(reference(sub.grid_x.nodes()), dtype=float)
        else:
            ratio = refine ** (levels - i)
            exact = ref_values[::ratio]
        errors.append(float(np.max(np.abs(final - exact))))

    spacings = np.array([c.grid_x.spacing for c in configs])
    slope = float(np.polyfit(np.log(spacings), np.log(errors), 1)[0])
    return ConvergenceResult(
        n_cells=[c.grid_x.n_cells for c in configs],
        spacings=spacings,
        errors=np.asarray(errors),
        fitted_order=slope,
    )
