"""The adiabatic frame: instantaneous eigen-system of H(t) and the frame
representation of the Hamiltonian and decoherence superoperators.

The frame basis consists of the eigenoperators Phi_k = |E_n><E_m| of the
commutator superoperator, indexed k = m + n N, with eigenvalues
Lambda_k = E_n - E_m and accumulated dynamical phases Theta_k.  In this
basis the master equation becomes d|R>/dt = (-i Ha + Da)|R> with

    Ha_kl = -i exp(-i (Theta_l - Theta_k)) <<Phi_k | d/dt Phi_l>>
    Da_kl =    exp(-i (Theta_l - Theta_k)) <<Phi_k | D Phi_l>>

and <<u|v>> = Tr(u^dag v).  Eigenvector gauge is fixed by parallel
transport (successive overlaps real-positive); models may supply analytic
eigenvectors and derivatives instead, which the golden-value tests use.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    DEFAULT_POLICY,
    GridResolutionError,
    NumericPolicy,
    TimeGrid,
    cumulative_trapezoid,
    dagger,
    herm_eigendecompose,
)

__all__ = [
    "SpectralFrame",
    "AdiabaticFrameOps",
    "build_spectral_frame",
    "build_adiabatic_ops",
    "index_pair",
    "population_index",
]


def index_pair(k: int, n_levels: int) -> tuple:
    """The (n, m) pair of Phi_k = |E_n><E_m| under k = m + n N."""
    return k // n_levels, k % n_levels


def population_index(level: int, n_levels: int) -> int:
    """k index of the population operator |E_level><E_level|."""
    return level * (n_levels + 1)


@dataclass
class SpectralFrame:
    """Gauge-fixed instantaneous eigen-system sampled on a time grid.

    ``energies`` has shape (P, N) ascending per sample; ``vectors`` has
    shape (P, N, N) with eigenvectors as columns.  ``lambdas`` and
    ``thetas`` hold the superoperator eigenvalues and their trapezoidal
    running integrals for all k.  ``vector_derivative`` optionally stores
    analytic d/dt eigenvectors (same shape as ``vectors``).
    """

    grid: TimeGrid
    energies: np.ndarray
    vectors: np.ndarray
    degenerate: np.ndarray
    lambdas: np.ndarray = field(init=False)
    thetas: np.ndarray = field(init=False)
    vector_derivative: np.ndarray | None = None

    def __post_init__(self):
        pts, n = self.energies.shape
        lam = np.empty((pts, n * n))
        for k in range(n * n):
            nn, mm = index_pair(k, n)
            lam[:, k] = self.energies[:, nn] - self.energies[:, mm]
        self.lambdas = lam
        self.thetas = cumulative_trapezoid(lam, self.grid.points)

    @property
    def n_levels(self) -> int:
        return self.energies.shape[1]

    def phi_vectors(self, i: int) -> np.ndarray:
        """Matrix whose column k is vec(Phi_k) at grid sample i."""
        v = self.vectors[i]
        n = self.n_levels
        cols = np.empty((n * n, n * n), dtype=complex)
        for k in range(n * n):
            nn, mm = index_pair(k, n)
            cols[:, k] = np.kron(v[:, mm].conj(), v[:, nn])
        return cols

    def target_degenerate_instants(self, level: int) -> np.ndarray:
        """Grid indices where the gap around ``level`` closes."""
        return np.nonzero(self.degenerate)[0]


def build_spectral_frame(
    h_of_t,
    grid: TimeGrid,
    analytic=None,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> SpectralFrame:
    """Diagonalize H(t) on the grid and fix the eigenvector gauge.

    ``analytic``, if given, is a callable t -> (energies, vectors) or
    t -> (energies, vectors, d_vectors) that bypasses numerical
    diagonalization; its gauge is taken as-is.  Otherwise eigh output is
    parallel-transported: each eigenvector is phase-rotated so its overlap
    with the previous sample is real and positive.
    """
    pts = grid.points
    if analytic is not None:
        first = analytic(pts[0])
        with_deriv = len(first) == 3
        n = len(first[0])
        energies = np.empty((len(pts), n))
        vectors = np.empty((len(pts), n, n), dtype=complex)
        derivs = np.empty((len(pts), n, n), dtype=complex) if with_deriv else None
        for i, t in enumerate(pts):
            res = analytic(t)
            energies[i] = res[0]
            vectors[i] = res[1]
            if with_deriv:
                derivs[i] = res[2]
    else:
        h0 = np.asarray(h_of_t(pts[0]), dtype=complex)
        n = h0.shape[0]
        energies = np.empty((len(pts), n))
        vectors = np.empty((len(pts), n, n), dtype=complex)
        derivs = None
        for i, t in enumerate(pts):
            vals, vecs = herm_eigendecompose(h_of_t(t), policy)
            if i > 0:
                prev = vectors[i - 1]
                for col in range(n):
                    z = np.vdot(prev[:, col], vecs[:, col])
                    mag = abs(z)
                    if mag < 0.5:
                        warnings.warn(
                            f"eigenvector overlap dropped to {mag:.3f} at t={t:.6g}; "
                            "grid may straddle a level crossing"
                        )
                    if mag > 0:
                        vecs[:, col] = vecs[:, col] * (z.conjugate() / mag)
            energies[i] = vals
            vectors[i] = vecs

    gaps = np.diff(energies, axis=1)
    degenerate = (
        np.min(np.abs(gaps), axis=1) < policy.degeneracy_gap
        if energies.shape[1] > 1
        else np.zeros(len(pts), dtype=bool)
    )
    return SpectralFrame(grid, energies, vectors, degenerate, vector_derivative=derivs)


@dataclass
class AdiabaticFrameOps:
    """Frame-represented Hamiltonian and decoherence superoperators.

    ``h_ops[i]`` is Hermitian (frequency units); ``d_ops[i]`` is a general
    complex matrix (rate units).  Both live in the unpermuted k basis.
    """

    frame: SpectralFrame
    h_ops: np.ndarray
    d_ops: np.ndarray

    @property
    def grid(self) -> TimeGrid:
        return self.frame.grid

    def max_hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.h_ops - dagger(self.h_ops))))


def _vector_derivatives(frame: SpectralFrame, policy: NumericPolicy) -> np.ndarray:
    if frame.vector_derivative is not None:
        return frame.vector_derivative
    v = frame.vectors
    dt = frame.grid.dt
    dv = np.empty_like(v)
    dv[1:-1] = (v[2:] - v[:-2]) / (2 * dt)
    dv[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * dt)
    dv[-1] = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * dt)

    # Self-consistency: compare against stride-2 central differences; the
    # Richardson gap estimates the truncation error of the derivative.
    if len(v) >= 5:
        coarse = (v[4:] - v[:-4]) / (4 * dt)
        est = float(np.max(np.abs(dv[2:-2] - coarse))) / 3.0
        scale = max(float(np.max(np.abs(dv))), 1e-300)
        if est / scale > policy.derivative_consistency_tol:
            suggested = int(np.ceil(frame.grid.steps * np.sqrt(est / scale / policy.derivative_consistency_tol)))
            raise GridResolutionError(
                f"eigenvector derivative inconsistency {est / scale:.2e} exceeds "
                f"{policy.derivative_consistency_tol:.1e}; refine the grid to about "
                f"{suggested} steps",
                suggested_steps=suggested,
            )
    return dv


def build_adiabatic_ops(
    frame: SpectralFrame,
    dissipator=None,
    policy: NumericPolicy = DEFAULT_POLICY,
) -> AdiabaticFrameOps:
    """Assemble Ha(t) and Da(t) on the frame's grid.

    ``dissipator`` is a callable t -> (N^2 x N^2) superoperator in the lab
    basis (column-stacking convention); omit it for closed systems.  The
    eigenvector derivative matrix A_ab = <E_a | d/dt E_b> is projected onto
    its anti-Hermitian part, which makes the assembled Ha Hermitian by
    construction (the Hermitian defect is pure floating-point noise).
    """
    pts = frame.grid.points
    n = frame.n_levels
    nsq = n * n
    dv = _vector_derivatives(frame, policy)

    a = np.einsum("pia,pib->pab", frame.vectors.conj(), dv)
    a = 0.5 * (a - dagger(a))

    h_ops = np.zeros((len(pts), nsq, nsq), dtype=complex)
    for k in range(nsq):
        kn, km = index_pair(k, n)
        for l in range(nsq):
            ln, lm = index_pair(l, n)
            s = np.zeros(len(pts), dtype=complex)
            if km == lm:
                s = s + a[:, kn, ln]
            if kn == ln:
                s = s - a[:, lm, km]
            if np.any(s):
                phase = np.exp(-1j * (frame.thetas[:, l] - frame.thetas[:, k]))
                h_ops[:, k, l] = -1j * phase * s

    d_ops = np.zeros_like(h_ops)
    if dissipator is not None:
        for i, t in enumerate(pts):
            cols = frame.phi_vectors(i)
            raw = cols.conj().T @ np.asarray(dissipator(t), dtype=complex) @ cols
            phase = np.exp(
                -1j * (frame.thetas[i][None, :] - frame.thetas[i][:, None])
            )
            d_ops[i] = phase * raw

    return AdiabaticFrameOps(frame, h_ops, d_ops)
