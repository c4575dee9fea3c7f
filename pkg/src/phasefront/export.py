"""Result persistence: delimited tables plus a config echo.

All writers are deterministic (full-precision repr floats, fixed row
order) and atomic (write to a temp file, then rename), so re-running the
same experiment produces byte-identical output.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import front_trace, stefan_residual
from .config import ExperimentSpec, emit_config
from .lumped import LumpedTrace, TransitionBoundReport
from .solver1d import SimulationTrace
from .spike import SpikeTrace


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _write_atomic(path, "\n".join(lines) + "\n")
    return path


def write_meta(spec: ExperimentSpec, out_dir: Path) -> Path:
    text = emit_config(spec) + f"\n[provenance]\npackage_version = {__version__}\n"
    path = out_dir / "meta.ini"
    _write_atomic(path, text)
    return path


def _snapshot_indices(count: int, limit: int) -> np.ndarray:
    if count <= limit:
        return np.arange(count)
    return np.unique(np.linspace(0, count - 1, limit).astype(int))


def _export_cartesian(trace: SimulationTrace, out_dir: Path, max_snapshots: int) -> list[Path]:
    cfg = trace.config
    x = cfg.grid_x.nodes()
    paths = []
    snapshots = _snapshot_indices(len(trace.fields), max_snapshots)

    def field_rows():
        for idx in snapshots:
            fld = trace.fields[idx]
            for xj, tj in zip(x, fld.values):
                yield (fld.time, xj, tj)

    paths.append(write_csv(out_dir / "fields.csv", ["time", "x", "T"], field_rows()))

    ft = front_trace(trace)
    res = stefan_residual(trace, cfg.material)

    def front_rows():
        for i, t in enumerate(ft.times):
            yield (
                t,
                len(ft.fronts[i]),
                ";".join(_fmt(p) for p in ft.fronts[i]),
                ft.exterior[i],
                ft.velocities[i],
                bool(ft.unstable[i]),
            )

    paths.append(
        write_csv(
            out_dir / "fronts.csv",
            ["time", "n_fronts", "positions", "exterior", "velocity", "instability_flag"],
            front_rows(),
        )
    )

    phi_by_level = dict(zip(res.levels.tolist(), res.phi))
    deposited = np.concatenate(([0.0], np.cumsum(trace.energy_in_step)))
    boundary = np.concatenate(([0.0], np.cumsum(trace.boundary_in_step)))
    residual = np.concatenate(([0.0], trace.residual_norms))

    def scalar_rows():
        for k, t in enumerate(trace.times):
            yield (
                t,
                phi_by_level.get(k, np.nan),
                trace.tableland_width[k],
                trace.tableland_cells[k],
                trace.melt_thickness[k],
                trace.exterior_front[k],
                trace.enthalpy_total[k],
                deposited[k],
                boundary[k],
                residual[k],
            )

    paths.append(
        write_csv(
            out_dir / "scalars.csv",
            [
                "time",
                "phi",
                "tableland_width",
                "tableland_cells",
                "melt_thickness",
                "exterior_front",
                "enthalpy_total",
                "deposited_cum",
                "boundary_in_cum",
                "solve_residual",
            ],
            scalar_rows(),
        )
    )
    return paths


def _export_spike(trace: SpikeTrace, out_dir: Path, max_snapshots: int) -> list[Path]:
    r = trace.config.radial_grid.nodes()
    paths = []
    snapshots = _snapshot_indices(len(trace.states), max_snapshots)

    def field_rows():
        for idx in snapshots:
            st = trace.states[idx]
            for rj, te, ti in zip(r, st.temp_e, st.temp_i):
                yield (st.time, rj, te, ti)

    paths.append(
        write_csv(out_dir / "fields.csv", ["time", "r", "T_e", "T_i"], field_rows())
    )

    source = np.concatenate(([0.0], np.cumsum(trace.source_in_step)))
    exchanged = np.concatenate(([0.0], np.cumsum(trace.exchange_step)))
    out_e = np.concatenate(([0.0], np.cumsum(trace.outflow_e_step)))
    out_i = np.concatenate(([0.0], np.cumsum(trace.outflow_i_step)))

    def scalar_rows():
        for k, t in enumerate(trace.times):
            yield (
                t,
                trace.enthalpy_e[k],
                trace.enthalpy_i[k],
                source[k],
                exchanged[k],
                out_e[k] + out_i[k],
                trace.lattice_tableland_width[k],
                trace.lattice_tableland_cells[k],
            )

    paths.append(
        write_csv(
            out_dir / "scalars.csv",
            [
                "time",
                "enthalpy_e",
                "enthalpy_i",
                "source_cum",
                "exchanged_cum",
                "boundary_out_cum",
                "tableland_width",
                "tableland_cells",
            ],
            scalar_rows(),
        )
    )
    return paths


def _export_lumped(trace: LumpedTrace, report: TransitionBoundReport | None, out_dir: Path):
    paths = [
        write_csv(
            out_dir / "trace.csv",
            ["time", "T"],
            zip(trace.times, trace.temps),
        )
    ]
    rows = [
        ("plateau_start", trace.plateau_start),
        ("plateau_end", trace.plateau_end),
        ("delta_t", trace.delta_t),
        ("band", trace.band),
    ]
    if report is not None:
        rows += [
            ("q_max", report.q_max),
            ("bound", report.bound),
            ("tolerance", report.tolerance),
            ("satisfied", report.satisfied),
        ]
    paths.append(write_csv(out_dir / "summary.csv", ["quantity", "value"], rows))
    return paths


def export_trace(
    trace, spec: ExperimentSpec, out_dir, bound_report=None, max_snapshots: int = 60
) -> list[Path]:
    """Write an experiment's tables and the resolved-config echo.

    Dispatches on the trace type; returns every path written.  The scalar
    and front series cover every time level; fields.csv is decimated to at
    most ``max_snapshots`` profiles to keep output desk-scale.  I/O errors
    surface with the offending path in the exception.
    """
    out_dir = Path(out_dir)
    try:
        if isinstance(trace, SimulationTrace):
            paths = _export_cartesian(trace, out_dir, max_snapshots)
        elif isinstance(trace, SpikeTrace):
            paths = _export_spike(trace, out_dir, max_snapshots)
        elif isinstance(trace, LumpedTrace):
            paths = _export_lumped(trace, bound_report, out_dir)
        else:
            raise TypeError(f"no exporter for {type(trace).__name__}")
        paths.append(write_meta(spec, out_dir))
    except OSError as exc:
        raise OSError(f"failed writing results under {out_dir}: {exc}") from exc
    return paths
