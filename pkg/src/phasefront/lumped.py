"""Spatially uniform limit: a single ODE in enthalpy.

With no spatial structure the balance reduces to dH/dt = q(t), where H is
the enthalpy including the latent spike.  Integrating in H and inverting
back to temperature sidesteps the capacity singularity entirely, so the
transition plateau is exact up to the quadrature of q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .enthalpy import enthalpy, invert_enthalpy

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(5)


class NoPlateauError(RuntimeError):
    """The source never drove the temperature into the transition band."""


def _evaluate(q_of_t, t: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(q_of_t(t), dtype=float)
        if out.shape == t.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(q_of_t(ti)) for ti in t.ravel()]).reshape(t.shape)


def _step_integrals(q_of_t, times: np.ndarray) -> np.ndarray:
    """Integral of q over each [t_k, t_{k+1}] by 5-point Gauss quadrature."""
    a = times[:-1]
    half = 0.5 * np.diff(times)
    pts = a[:, None] + half[:, None] * (_GAUSS_NODES[None, :] + 1.0)
    vals = _evaluate(q_of_t, pts)
    return half * (vals @ _GAUSS_WEIGHTS)


def _crossing_time(q_of_t, t_lo: float, t_hi: float, h_lo: float, target: float) -> float:
    """Solve H(t) = target inside one step; H(t_lo) = h_lo, H' = q."""

    def gap(t: float) -> float:
        if t == t_lo:
            return h_lo - target
        seg = np.array([t_lo, t])
        return h_lo + float(_step_integrals(q_of_t, seg)[0]) - target

    lo, hi = t_lo, t_hi
    t = t_lo + (t_hi - t_lo) * 0.5
    for _ in range(60):
        g = gap(t)
        if abs(g) < 1e-14 * max(1.0, abs(target)):
            break
        if g > 0:
            hi = t
        else:
            lo = t
        slope = float(_evaluate(q_of_t, np.array([t]))[0])
        t_next = t - g / slope if slope > 0 else 0.5 * (lo + hi)
        if not (lo < t_next < hi):
            t_next = 0.5 * (lo + hi)
        if abs(t_next - t) < 1e-15 * max(1.0, abs(t)):
            t = t_next
            break
        t = t_next
    return float(t)


@dataclass
class LumpedTrace:
    """Temperature history of the uniform model with its plateau bracket.

    ``plateau_start``/``plateau_end`` bracket the interval where the
    temperature sits within ``band`` smoothing widths of the transition
    temperature; both are NaN when the band is never reached, and
    ``plateau_end`` alone is NaN when the run ends inside the band.
    """

    times: np.ndarray
    temps: np.ndarray
    plateau_start: float
    plateau_end: float
    delta_t: float
    band: float


def solve_lumped(
    mat,
    q_of_t,
    t_max: float,
    n_steps: int = 1000,
    initial_temp: float = 1.0,
    band: float = 2.0,
) -> LumpedTrace:
    """Integrate dH/dt = q exactly (to quadrature accuracy) and recover T.

    The plateau is detected as the interval where |T - T*| <= band * width;
    its endpoints are refined to quadrature accuracy, not just to the
    sampling grid.
    """
    if t_max <= 0 or n_steps < 1:
        raise ValueError("t_max must be positive and n_steps >= 1")
    times = np.linspace(0.0, t_max, n_steps + 1)
    h0 = float(enthalpy(mat, initial_temp))
    cum = h0 + np.concatenate(([0.0], np.cumsum(_step_integrals(q_of_t, times))))
    temps = invert_enthalpy(mat, cum)

    t_star = mat.transition_temp
    width = mat.smoothing_width
    h_enter = float(enthalpy(mat, t_star - band * width))
    h_exit = float(enthalpy(mat, t_star + band * width))

    def locate(target: float) -> float:
        if cum[0] >= target:
            return 0.0
        idx = int(np.searchsorted(cum, target))
        if idx >= len(cum):
            return np.nan
        return _crossing_time(q_of_t, times[idx - 1], times[idx], cum[idx - 1], target)

    start = locate(h_enter)
    end = locate(h_exit) if not np.isnan(start) else np.nan
    delta_t = end - start if np.isfinite(start) and np.isfinite(end) else (
        0.0 if np.isnan(start) else np.nan
    )
    return LumpedTrace(
        times=times,
        temps=temps,
        plateau_start=start,
        plateau_end=end,
        delta_t=delta_t,
        band=band,
    )


@dataclass(frozen=True)
class TransitionBoundReport:
    """Measured plateau duration against the latent/peak-power bound."""

    delta_t: float
    q_max: float
    bound: float
    tolerance: float
    satisfied: bool


def check_transition_bound(trace: LumpedTrace, mat, q_of_t) -> TransitionBoundReport:
    """Verify delta_t >= latent_heat / max q over the plateau.

    The smoothing width adds sensible heating to the measured plateau, so
    the bound carries a tolerance of 2 * band * width * base_capacity / Q.
    Raises :class:`NoPlateauError` when the run never reached the band.
    """
    if not np.isfinite(trace.plateau_start):
        raise NoPlateauError("the source never drove the temperature to the transition band")
    if not np.isfinite(trace.plateau_end):
        raise NoPlateauError("the run ended inside the transition band; extend t_max")

    samples = np.linspace(trace.plateau_start, trace.plateau_end, 2001)
    q_max = float(np.max(_evaluate(q_of_t, samples)))
    if q_max <= 0:
        raise NoPlateauError("source power is zero over the plateau")
    bound = mat.latent_heat / q_max
    tolerance = 2.0 * trace.band * mat.smoothing_width * mat.base_capacity / q_max
    return TransitionBoundReport(
        delta_t=trace.delta_t,
        q_max=q_max,
        bound=bound,
        tolerance=tolerance,
        satisfied=bool(trace.delta_t >= bound - tolerance),
    )
