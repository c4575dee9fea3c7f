"""Tridiagonal systems and the forward-backward sweep (Thomas) solver."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


class SingularSystemError(np.linalg.LinAlgError):
    """Zero pivot encountered during forward elimination."""


@dataclass
class TridiagonalSystem:
    """A @ x = rhs with A tridiagonal.

    Row i reads lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = rhs[i];
    lower[0] and upper[-1] are unused and kept at zero by convention.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.diag = np.asarray(self.diag, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        n = self.diag.size
        if not (self.lower.size == self.upper.size == self.rhs.size == n):
            raise ValueError("tridiagonal arrays must share one length")

    @property
    def size(self) -> int:
        return self.diag.size

    def is_diagonally_dominant(self) -> bool:
        return bool(np.all(np.abs(self.diag) >= np.abs(self.lower) + np.abs(self.upper)))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = self.diag * x
        out[1:] += self.lower[1:] * x[:-1]
        out[:-1] += self.upper[:-1] * x[1:]
        return out

    def residual_norm(self, x: np.ndarray) -> float:
        """Relative residual ||A x - rhs|| / ||rhs|| (absolute if rhs ~ 0)."""
        r = float(np.linalg.norm(self.matvec(x) - self.rhs))
        scale = float(np.linalg.norm(self.rhs))
        return r / scale if scale > 0 else r

    def dense(self) -> np.ndarray:
        n = self.size
        a = np.zeros((n, n))
        idx = np.arange(n)
        a[idx, idx] = self.diag
        a[idx[1:], idx[:-1]] = self.lower[1:]
        a[idx[:-1], idx[1:]] = self.upper[:-1]
        return a


def thomas_solve(sys: TridiagonalSystem, check_dominance: bool = True) -> np.ndarray:
    """Solve a tridiagonal system by forward elimination and back substitution.

    Exact up to rounding for well-conditioned systems.  Diagonal dominance
    is checked and warned about (the sweep can lose accuracy without it);
    a zero pivot raises :class:`SingularSystemError`.
    """
    n = sys.size
    if n == 0:
        return np.empty(0)
    if check_dominance and not sys.is_diagonally_dominant():
        warnings.warn("tridiagonal system is not diagonally dominant", stacklevel=2)

    # Plain-python lists make the sequential sweep several times faster
    # than element indexing into numpy arrays.
    lo = sys.lower.tolist()
    di = sys.diag.tolist()
    up = sys.upper.tolist()
    rh = sys.rhs.tolist()

    cp = [0.0] * n
    dp = [0.0] * n
    piv = di[0]
    if piv == 0.0:
        raise SingularSystemError("zero pivot at row 0")
    cp[0] = up[0] / piv
    dp[0] = rh[0] / piv
    for i in range(1, n):
        piv = di[i] - lo[i] * cp[i - 1]
        if piv == 0.0:
            raise SingularSystemError(f"zero pivot at row {i}")
        cp[i] = up[i] / piv
        dp[i] = (rh[i] - lo[i] * dp[i - 1]) / piv

    x = dp
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.asarray(x)
