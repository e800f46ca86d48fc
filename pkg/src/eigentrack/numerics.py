"""Dense complex linear algebra and time-ordered propagation primitives.

Every operator in this package is a small dense complex matrix (N <= 4 in
Hilbert space, N^2 <= 16 in Liouville space), so plain numpy/scipy with
deterministic fixed-grid quadrature is the right tool.  All tolerances are
collected in a single :class:`NumericPolicy` record so tests can tighten
them in one place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "NumericPolicy",
    "DEFAULT_POLICY",
    "TimeGrid",
    "GridResolutionError",
    "dagger",
    "herm_eigendecompose",
    "matrix_exp",
    "time_ordered_product",
    "time_ordered_profile",
    "cumulative_trapezoid",
]


@dataclass(frozen=True)
class NumericPolicy:
    """Central record of numerical tolerances used across the package."""

    hermiticity_tol: float = 1e-12
    eig_residual_tol: float = 1e-10
    orthonormality_tol: float = 1e-12
    unitarity_tol: float = 1e-10
    degeneracy_gap: float = 1e-10
    trace_preservation_tol: float = 1e-9
    trace_abort_tol: float = 1e-6
    positivity_tol: float = 1e-9
    derivative_consistency_tol: float = 1e-3
    amplitude_bound_slack: float = 1e-9


DEFAULT_POLICY = NumericPolicy()


class GridResolutionError(RuntimeError):
    """Raised when a grid is too coarse for the requested accuracy."""

    def __init__(self, message: str, suggested_steps: int):
        super().__init__(message)
        self.suggested_steps = suggested_steps


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid with ``steps`` intervals covering [t_start, t_end]."""

    t_start: float
    t_end: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError(f"need at least 2 steps, got {self.steps}")
        if not self.t_end > self.t_start:
            raise ValueError(
                f"empty grid: t_end={self.t_end} must exceed t_start={self.t_start}"
            )

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.steps

    @property
    def points(self) -> np.ndarray:
        """The steps + 1 sample times, endpoints included."""
        return np.linspace(self.t_start, self.t_end, self.steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        pts = self.points
        return 0.5 * (pts[:-1] + pts[1:])

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_start, self.t_end, self.steps * factor)


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose, batched over leading axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def herm_eigendecompose(a: np.ndarray, policy: NumericPolicy = DEFAULT_POLICY):
    """Eigendecompose a Hermitian matrix.

    Returns eigenvalues in ascending order and orthonormal eigenvectors as
    matrix columns.  Rejects inputs whose anti-Hermitian part exceeds the
    policy tolerance, reporting the worst offending entry.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    asym = float(np.max(np.abs(a - dagger(a))))
    if asym > policy.hermiticity_tol:
        raise ValueError(
            f"matrix is not Hermitian: max |A - A^dag| entry = {asym:.3e} "
            f"exceeds tolerance {policy.hermiticity_tol:.1e}"
        )
    vals, vecs = np.linalg.eigh(a)
    return vals, vecs


def matrix_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential e^A (scaling-and-squaring, via scipy)."""
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix exponent has non-finite entries")
    return scipy.linalg.expm(a)


def time_ordered_product(generator, grid: TimeGrid) -> np.ndarray:
    """Forward time-ordered exponential of a matrix-valued generator.

    Approximates T exp[int generator dt] over the grid as an ordered product
    of midpoint-rule step exponentials, later factors applied on the left.
    Second-order accurate in the step size.
    """
    return time_ordered_profile(generator, grid)[-1]


def time_ordered_profile(generator, grid: TimeGrid) -> np.ndarray:
    """Cumulative time-ordered exponentials at every grid point.

    Entry i is the ordered product from t_start up to grid point i; entry 0
    is the identity.  The partial products telescope exactly, so pair
    propagators U(t_i, t_j) = profile[i] @ inv(profile[j]) carry no extra
    discretization error beyond the step rule itself.
    """
    dt = grid.dt
    mids = grid.midpoints
    first = np.asarray(generator(mids[0]), dtype=complex)
    if first.ndim != 2 or first.shape[0] != first.shape[1]:
        raise ValueError(f"generator must return square matrices, got {first.shape}")
    dim = first.shape[0]
    out = np.empty((grid.steps + 1, dim, dim), dtype=complex)
    out[0] = np.eye(dim)
    acc = out[0]
    for i, tm in enumerate(mids):
        g = first if i == 0 else np.asarray(generator(tm), dtype=complex)
        if not np.all(np.isfinite(g)):
            raise ValueError(f"generator is non-finite at t = {tm}")
        acc = matrix_exp(g * dt) @ acc
        out[i + 1] = acc
    return out


def cumulative_trapezoid(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Trapezoidal running integral with a leading zero, along axis 0."""
    values = np.asarray(values)
    dt = np.diff(times)
    shape = (len(times),) + values.shape[1:]
    out = np.zeros(shape, dtype=np.result_type(values, float))
    steps = 0.5 * (values[1:] + values[:-1])
    steps = steps * dt.reshape((-1,) + (1,) * (values.ndim - 1))
    np.cumsum(steps, axis=0, out=out[1:])
    return out
