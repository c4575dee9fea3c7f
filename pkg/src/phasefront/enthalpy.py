"""Smoothed delta function, effective heat capacity, and enthalpy.

The latent heat of the phase transition is folded into the volumetric heat
capacity as ``latent_heat * delta(T - transition_temp)``, with the delta
function smoothed by a Gaussian whose standard deviation is the material's
``smoothing_width``.  The enthalpy (the antiderivative of the effective
capacity, zero at the dimensionless initial temperature 1.0) has a closed
form through the standard normal CDF; conservation accounting uses it
rather than numeric integration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr  # standard normal CDF, vectorized

REFERENCE_TEMP = 1.0  # enthalpy zero point

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))


@dataclass(frozen=True)
class SmoothedDelta:
    """Gaussian approximation to delta(T - center) with unit integral."""

    center: float
    width: float

    def __post_init__(self):
        if not (np.isfinite(self.width) and self.width > 0):
            raise ValueError("smoothing width must be > 0")

    def __call__(self, temp):
        return delta_value(self, temp)


def delta_value(d: SmoothedDelta, temp):
    """Gaussian density (1/(w*sqrt(2pi))) * exp(-(T-c)^2 / (2 w^2)).

    Total function: finite for every finite temperature, symmetric about
    the center, and integrates to one.
    """
    t = np.asarray(temp, dtype=float)
    z = (t - d.center) / d.width
    out = np.exp(-0.5 * z * z) / (d.width * _SQRT_2PI)
    return out if out.ndim else float(out)


def effective_capacity(mat, temp):
    """Volumetric heat capacity base + latent * delta(T - T*).

    Strictly positive for any valid material.
    """
    t = np.asarray(temp, dtype=float)
    out = np.full_like(t, float(mat.base_capacity))
    if mat.latent_heat != 0.0:
        d = SmoothedDelta(mat.transition_temp, mat.smoothing_width)
        out = out + mat.latent_heat * delta_value(d, t)
    return out if out.ndim else float(out)


def enthalpy(mat, temp):
    """Enthalpy density relative to the reference temperature 1.0.

    Closed-form antiderivative of :func:`effective_capacity`:

        base*(T - 1) + latent*Phi((T - T*)/w) - latent*Phi((1 - T*)/w)

    with Phi the standard normal CDF.  Strictly increasing in T.
    """
    t = np.asarray(temp, dtype=float)
    out = mat.base_capacity * (t - REFERENCE_TEMP)
    if mat.latent_heat != 0.0:
        w = mat.smoothing_width
        c = mat.transition_temp
        out = out + mat.latent_heat * (ndtr((t - c) / w) - ndtr((REFERENCE_TEMP - c) / w))
    return out if out.ndim else float(out)


def invert_enthalpy(mat, h_values, initial_guess=None):
    """Temperature(s) whose enthalpy equals ``h_values``.

    Vectorized safeguarded Newton iteration on the closed-form enthalpy;
    the derivative is the effective capacity, bounded below by
    ``base_capacity``, so the iteration is well conditioned.  Accurate to
    ~1e-12 in enthalpy.
    """
    h = np.atleast_1d(np.asarray(h_values, dtype=float))
    # Bracket: base*(T-1) - latent <= enthalpy(T) <= base*(T-1) + latent.
    lo = REFERENCE_TEMP + (h - mat.latent_heat) / mat.base_capacity - 1.0
    hi = REFERENCE_TEMP + (h + mat.latent_heat) / mat.base_capacity + 1.0
    if initial_guess is None:
        t = REFERENCE_TEMP + h / mat.base_capacity
    else:
        t = np.broadcast_to(np.asarray(initial_guess, dtype=float), h.shape).astype(float).copy()
    t = np.clip(t, lo, hi)
    for _ in range(200):
        resid = enthalpy(mat, t) - h
        if np.all(np.abs(resid) <= 1e-13 * (1.0 + np.abs(h))):
            break
        # Shrink the bracket around the root, then take a Newton step;
        # fall back to bisection wherever Newton would leave the bracket.
        hi = np.where(resid > 0, np.minimum(hi, t), hi)
        lo = np.where(resid <= 0, np.maximum(lo, t), lo)
        trial = t - resid / effective_capacity(mat, t)
        outside = (trial <= lo) | (trial >= hi)
        t = np.where(outside, 0.5 * (lo + hi), trial)
    return t if np.ndim(h_values) else float(t[0])
