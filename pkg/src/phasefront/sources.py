"""Power-deposition models q(x, t).

The beam model is a product of two logistic edges, flat near the heated
face and decaying steeply past ``x_edge`` in space and past ``t_edge`` in
time.  A callback wrapper lets callers inject arbitrary profiles (the
radial spike solver uses it), and a separable Gaussian pulse is provided
for track-heating runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

# exp overflows past ~709; anything beyond +-700 is 0 or 1 to full precision
_EXP_CLAMP = 700.0


def _logistic_edge(z, z_edge: float, steepness: float):
    """1 / (1 + exp(steepness * (z - z_edge))), overflow-safe."""
    arg = np.clip(steepness * (np.asarray(z, dtype=float) - z_edge), -_EXP_CLAMP, _EXP_CLAMP)
    return 1.0 / (1.0 + np.exp(arg))


def _logistic_edge_integral(a: float, b: float, z_edge: float, steepness: float) -> float:
    """Exact integral of the logistic edge over [a, b] via softplus."""

    def antiderivative(z: float) -> float:
        # z - softplus(mu*(z - z1))/mu, written to avoid overflow
        arg = steepness * (z - z_edge)
        if arg > _EXP_CLAMP:
            sp = arg
        elif arg < -_EXP_CLAMP:
            sp = 0.0
        else:
            sp = math.log1p(math.exp(arg))
        return z - sp / steepness

    return antiderivative(b) - antiderivative(a)


@dataclass(frozen=True)
class LogisticBeamSource:
    """q(x, t) = amplitude * edge_x(x) * edge_t(t) with logistic edges."""

    amplitude: float
    x_edge: float = 0.07
    t_edge: float = 1.0
    steepness_x: float = 100.0
    steepness_t: float = 100.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("source amplitude must be >= 0")
        if self.steepness_x <= 0 or self.steepness_t <= 0:
            raise ValueError("source steepness values must be > 0")

    def values(self, x, t: float):
        """Vectorized in x at a fixed time."""
        return self.amplitude * _logistic_edge(x, self.x_edge, self.steepness_x) * float(
            _logistic_edge(t, self.t_edge, self.steepness_t)
        )

    def __call__(self, x, t):
        return source_value(self, x, t)


def source_value(s: LogisticBeamSource, x, t):
    """Pointwise power density; bounded by (0, amplitude), non-increasing
    in both arguments, and free of overflow for |x|, |t| up to 1e6."""
    out = (
        s.amplitude
        * _logistic_edge(x, s.x_edge, s.steepness_x)
        * _logistic_edge(t, s.t_edge, s.steepness_t)
    )
    return out if np.ndim(out) else float(out)


def deposited_energy(
    s: LogisticBeamSource,
    x_range: tuple[float, float],
    t_range: tuple[float, float],
) -> float:
    """Double quadrature of the source over x_range x t_range.

    Each logistic factor is integrated adaptively with a breakpoint at its
    edge so steep profiles (steepness ~ 1e4) are still resolved.
    """
    if s.amplitude == 0.0:
        return 0.0

    def factor_integral(rng, edge, steepness):
        a, b = rng
        pts = [edge] if a < edge < b else None
        val, _ = integrate.quad(
            lambda z: _logistic_edge(z, edge, steepness),
            a,
            b,
            points=pts,
            limit=200,
        )
        return val

    ix = factor_integral(x_range, s.x_edge, s.steepness_x)
    it = factor_integral(t_range, s.t_edge, s.steepness_t)
    return s.amplitude * ix * it


def deposited_energy_exact(
    s: LogisticBeamSource,
    x_range: tuple[float, float],
    t_range: tuple[float, float],
) -> float:
    """Closed-form deposited energy (softplus antiderivatives).

    Independent of the quadrature path; used by conservation checks.
    """
    ix = _logistic_edge_integral(x_range[0], x_range[1], s.x_edge, s.steepness_x)
    it = _logistic_edge_integral(t_range[0], t_range[1], s.t_edge, s.steepness_t)
    return s.amplitude * ix * it


@dataclass(frozen=True)
class CallbackSource:
    """Wrap an arbitrary q(x, t) so solvers can sample it like a beam model.

    The callback may be scalar-only; evaluation falls back to a python loop
    when it does not broadcast.
    """

    fn: Callable[[float, float], float]

    def values(self, x, t: float):
        x = np.asarray(x, dtype=float)
        try:
            out = np.asarray(self.fn(x, t), dtype=float)
            if out.shape == x.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(self.fn(xi, t)) for xi in np.atleast_1d(x)])

    def __call__(self, x, t):
        return self.fn(x, t)


ZERO_SOURCE = CallbackSource(lambda x, t: np.zeros_like(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class GaussianSpikeSource:
    """Separable Gaussian pulse in radius and time for track-heating runs.

    Normalized so that the energy deposited per unit axial length,
    integral of 2*pi*r*q(r,t) dr dt over r in [0, inf), t in (-inf, inf),
    equals ``total_energy``.
    """

    total_energy: float
    radius: float
    center_time: float
    duration: float

    def __post_init__(self):
        if self.total_energy < 0:
            raise ValueError("total_energy must be >= 0")
        if self.radius <= 0 or self.duration <= 0:
            raise ValueError("radius and duration must be > 0")

    def values(self, r, t: float):
        r = np.asarray(r, dtype=float)
        norm = self.total_energy / (
            math.pi * self.radius**2 * math.sqrt(2.0 * math.pi) * self.duration
        )
        radial = np.exp(-((r / self.radius) ** 2))
        temporal = math.exp(-0.5 * ((t - self.center_time) / self.duration) ** 2)
        return norm * radial * temporal

    def __call__(self, r, t):
        out = self.values(np.asarray(r, dtype=float), float(t))
        return out if np.ndim(r) else float(out)
