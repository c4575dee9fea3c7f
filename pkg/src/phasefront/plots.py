"""Figure rendering for experiment reports.

Each renderer turns a finished trace into a handful of PNGs written next
to the delimited output.  The CSV files remain the data contract; these
are the quick-look views of the same series.

Figures are built through the object-oriented matplotlib API (no pyplot,
no global figure registry), so concurrent sweep runs can render safely.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .analysis import InstabilityTable, front_trace, stefan_residual

_DPI = 150


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    return path


def _figure(figsize):
    fig = Figure(figsize=figsize)
    return fig, fig.add_subplot()


def _profile_indices(n_stored: int, count: int = 6) -> np.ndarray:
    return np.unique(np.linspace(0, n_stored - 1, count).astype(int))


def render_cartesian(trace, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    cfg = trace.config
    mat = cfg.material
    x = cfg.grid_x.nodes()
    paths = []

    fig, ax = _figure((7, 4.5))
    for idx in _profile_indices(len(trace.fields)):
        fld = trace.fields[idx]
        ax.plot(x, fld.values, label=f"t = {fld.time:.3g}")
    ax.axhline(mat.transition_temp, color="k", lw=0.8, ls="--")
    ax.axhspan(
        mat.transition_temp - mat.smoothing_width,
        mat.transition_temp + mat.smoothing_width,
        color="0.85",
        zorder=0,
    )
    ax.set_xlabel("x")
    ax.set_ylabel("T")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out_dir / "profiles.png"))

    fig, ax = _figure((7, 4))
    ax.plot(trace.times, trace.melt_thickness)
    ax.set_xlabel("t")
    ax.set_ylabel("melt thickness")
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out_dir / "thickness.png"))

    res = stefan_residual(trace, mat)
    fig, ax = _figure((7, 4))
    ax.plot(res.times, res.phi, lw=0.9)
    ax.set_xlabel("t")
    ax.set_ylabel("interface residual")
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out_dir / "residual.png"))

    ft = front_trace(trace)
    fig, ax = _figure((7, 4))
    ax.plot(ft.times, ft.exterior, lw=0.9, label="exterior front")
    bad = ft.unstable & np.isfinite(ft.exterior)
    if np.any(bad):
        ax.plot(ft.times[bad], ft.exterior[bad], "r.", ms=3, label="flagged")
    ax.set_xlabel("t")
    ax.set_ylabel("front position")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out_dir / "fronts.png"))
    return paths


def render_lumped(trace, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    fig, ax = _figure((7, 4))
    ax.plot(trace.times, trace.temps)
    if np.isfinite(trace.plateau_start):
        ax.axvline(trace.plateau_start, color="g", lw=0.8, ls=":")
    if np.isfinite(trace.plateau_end):
        ax.axvline(trace.plateau_end, color="r", lw=0.8, ls=":")
    ax.set_xlabel("t")
    ax.set_ylabel("T")
    ax.grid(True, alpha=0.3)
    return [_save(fig, out_dir / "lumped.png")]


def render_spike(trace, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    r = trace.config.radial_grid.nodes()
    paths = []

    fig = Figure(figsize=(10, 4))
    axes = fig.subplots(1, 2, sharex=True)
    for idx in _profile_indices(len(trace.states)):
        st = trace.states[idx]
        axes[0].plot(r, st.temp_e, label=f"t = {st.time:.3g}")
        axes[1].plot(r, st.temp_i, label=f"t = {st.time:.3g}")
    lattice = trace.config.material.lattice
    if lattice is not None:
        axes[1].axhline(lattice.transition_temp, color="k", lw=0.8, ls="--")
    axes[0].set_title("electrons")
    axes[1].set_title("lattice")
    for ax in axes:
        ax.set_xlabel("r")
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel("T")
    axes[1].legend(fontsize=7)
    paths.append(_save(fig, out_dir / "spike_profiles.png"))

    fig, ax = _figure((7, 4))
    source = np.concatenate(([0.0], np.cumsum(trace.source_in_step)))
    out_flow = np.concatenate(
        ([0.0], np.cumsum(trace.outflow_e_step + trace.outflow_i_step))
    )
    ax.plot(trace.times, trace.enthalpy_e - trace.enthalpy_e[0], label="electron enthalpy")
    ax.plot(trace.times, trace.enthalpy_i - trace.enthalpy_i[0], label="lattice enthalpy")
    ax.plot(trace.times, source, ls="--", label="source (cum)")
    ax.plot(trace.times, out_flow, ls=":", label="boundary loss (cum)")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out_dir / "spike_energy.png"))

    fig, ax = _figure((7, 4))
    ax.plot(trace.times, trace.lattice_tableland_width)
    ax.set_xlabel("t")
    ax.set_ylabel("lattice plateau width")
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out_dir / "spike_tableland.png"))
    return paths


def render_convergence(result, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    fig, ax = _figure((5.5, 4.5))
    ax.loglog(result.spacings, result.errors, "o-")
    ax.set_xlabel("h")
    ax.set_ylabel("max error")
    ax.set_title(f"fitted order {result.fitted_order:.2f}")
    ax.grid(True, which="both", alpha=0.3)
    return [_save(fig, out_dir / "convergence.png")]


def render_instability(table: InstabilityTable, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    fig, ax = _figure((7, 4))
    ax.semilogy(table.times, table.sensitivity, lw=0.9)
    ax.axhline(table.threshold, color="r", lw=0.8, ls="--")
    ax.set_xlabel("t")
    ax.set_ylabel("|front shift| / (2 eps)")
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out_dir / "instability.png"))

    fig, ax = _figure((7, 4))
    ax.plot(table.times, table.exterior_plus, lw=0.9, label="T* + eps")
    ax.plot(table.times, table.exterior_minus, lw=0.9, label="T* - eps")
    ax.set_xlabel("t")
    ax.set_ylabel("front position")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    paths.append(_save(fig, out_dir / "instability_fronts.png"))
    return paths


def render_sweep_fronts(times, series: dict[str, np.ndarray], out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    fig, ax = _figure((7, 4.5))
    for label, values in series.items():
        ax.plot(times, values, lw=0.9, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("exterior front")
    ax.legend(fontsize=7)
    ax.grid(True, alpha=0.3)
    return [_save(fig, out_dir / "sweep_fronts.png")]
