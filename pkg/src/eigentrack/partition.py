"""Feshbach P-Q partitioning of the adiabatic-frame generators.

The basis is permuted so the tracked population operator sits first
(a transposition of index 0 with the target index), making the projector
onto the target literally diag(1, 0, ..., 0).  The eight blocks are

    g_H = P Ha P   e_H = Q Ha Q   W_H = Q Ha P   W_H^dag = P Ha Q
    g_D = P Da P   e_D = Q Da Q   W_D = Q Da P   V_D     = P Da Q

with no relation imposed between V_D and W_D.  Block propagators are the
scalar phase G_g for the target block and the time-ordered unitary G_e for
the complement; cumulative step products telescope, so pair values
G_e(t_i, t_j) are assembled exactly from O(M) stored factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frame import AdiabaticFrameOps, index_pair
from .numerics import TimeGrid, cumulative_trapezoid, dagger, matrix_exp

__all__ = ["PartitionBlocks", "BlockPropagators", "partition", "block_propagators", "interaction_picture"]


@dataclass
class PartitionBlocks:
    """Time series of the eight partition blocks in the target-first basis.

    Shapes: g_h, g_d are (P,); w_h, w_d, v_d are (P, Q); e_h, e_d are
    (P, Q, Q) with Q = N^2 - 1.  w_h and v_d store the P-row blocks as
    plain vectors; w_d stores the Q-column block.
    """

    grid: TimeGrid
    target_index: int
    permutation: np.ndarray
    g_h: np.ndarray
    e_h: np.ndarray
    w_h: np.ndarray
    g_d: np.ndarray
    e_d: np.ndarray
    w_d: np.ndarray
    v_d: np.ndarray

    @property
    def q_dim(self) -> int:
        return self.w_h.shape[1]

    def reassemble(self):
        """Rebuild the permuted (Ha, Da) matrices from the blocks; exact."""
        pts, q = self.g_h.shape[0], self.q_dim
        ha = np.zeros((pts, q + 1, q + 1), dtype=complex)
        da = np.zeros_like(ha)
        ha[:, 0, 0] = self.g_h
        ha[:, 1:, 1:] = self.e_h
        ha[:, 1:, 0] = self.w_h
        ha[:, 0, 1:] = self.w_h.conj()
        da[:, 0, 0] = self.g_d
        da[:, 1:, 1:] = self.e_d
        da[:, 1:, 0] = self.w_d
        da[:, 0, 1:] = self.v_d
        return ha, da


def partition(ops: AdiabaticFrameOps, target_index: int) -> PartitionBlocks:
    """Split the frame generators around a population eigenoperator.

    ``target_index`` must name a population operator |E_n><E_n| (the
    theory tracks populations, not coherences).  Refuses frames whose
    target level is degenerate anywhere on the grid.
    """
    n = ops.frame.n_levels
    nn, mm = index_pair(target_index, n)
    if nn != mm:
        raise ValueError(
            f"target index {target_index} names the coherence |E_{nn}><E_{mm}|; "
            "only population operators (n == m) can be tracked"
        )
    bad = np.nonzero(ops.frame.degenerate)[0]
    if len(bad):
        t_bad = ops.grid.points[bad[0]]
        raise ValueError(
            f"target level is degenerate at {len(bad)} grid instants "
            f"(first at t = {t_bad:.6g}); partitioned propagation is undefined there"
        )

    nsq = n * n
    perm = np.arange(nsq)
    perm[0], perm[target_index] = perm[target_index], perm[0]
    ha = ops.h_ops[:, perm][:, :, perm]
    da = ops.d_ops[:, perm][:, :, perm]

    return PartitionBlocks(
        grid=ops.grid,
        target_index=target_index,
        permutation=perm,
        g_h=ha[:, 0, 0],
        e_h=ha[:, 1:, 1:],
        w_h=ha[:, 1:, 0],
        g_d=da[:, 0, 0],
        e_d=da[:, 1:, 1:],
        w_d=da[:, 1:, 0],
        v_d=da[:, 0, 1:],
    )


@dataclass
class BlockPropagators:
    """Cumulative block propagators on the grid.

    ``g_phase[i]`` is int_0^{t_i} g_H; ``e_factors[i]`` is the time-ordered
    unitary for the complement block from t_0 to t_i.  Pair propagators
    come from the exact composition property of the stored factors.
    """

    grid: TimeGrid
    g_phase: np.ndarray
    e_factors: np.ndarray

    def g_g(self, i: int, j: int) -> complex:
        return np.exp(-1j * (self.g_phase[i] - self.g_phase[j]))

    def g_e(self, i: int, j: int) -> np.ndarray:
        return self.e_factors[i] @ dagger(self.e_factors[j])

    def u0(self, i: int) -> np.ndarray:
        q = self.e_factors.shape[1]
        out = np.zeros((q + 1, q + 1), dtype=complex)
        out[0, 0] = np.exp(-1j * self.g_phase[i])
        out[1:, 1:] = self.e_factors[i]
        return out


def block_propagators(blocks: PartitionBlocks, grid: TimeGrid) -> BlockPropagators:
    """Integrate the block-diagonal generators over the grid.

    G_g by trapezoidal phase quadrature of the (real) target diagonal;
    G_e by midpoint-rule step exponentials of -i e_H, using the mean of
    adjacent samples as the midpoint value (second order)."""
    g_real = blocks.g_h.real
    worst = float(np.max(np.abs(blocks.g_h.imag))) if len(blocks.g_h) else 0.0
    if worst > 1e-10:
        raise ValueError(f"target diagonal has imaginary part {worst:.3e}; Ha not Hermitian?")
    g_phase = cumulative_trapezoid(g_real, grid.points)

    pts = len(grid.points)
    q = blocks.q_dim
    e_factors = np.empty((pts, q, q), dtype=complex)
    e_factors[0] = np.eye(q)
    dt = grid.dt
    acc = e_factors[0]
    for i in range(pts - 1):
        mid = 0.5 * (blocks.e_h[i] + blocks.e_h[i + 1])
        acc = matrix_exp(-1j * mid * dt) @ acc
        e_factors[i + 1] = acc
    return BlockPropagators(grid=grid, g_phase=g_phase, e_factors=e_factors)


def interaction_picture(blocks: PartitionBlocks, props: BlockPropagators):
    """Rotate the generators into the picture of the block-diagonal part.

    Returns (H_I, D_I) sampled on the grid.  H_I is exactly block
    off-diagonal because U_0 is block diagonal and the rotated operator is
    purely off-diagonal to begin with.
    """
    pts = len(blocks.grid.points)
    q = blocks.q_dim
    h1 = np.zeros((pts, q + 1, q + 1), dtype=complex)
    h1[:, 1:, 0] = blocks.w_h
    h1[:, 0, 1:] = blocks.w_h.conj()
    _, da = blocks.reassemble()

    u0 = np.zeros((pts, q + 1, q + 1), dtype=complex)
    u0[:, 0, 0] = np.exp(-1j * props.g_phase)
    u0[:, 1:, 1:] = props.e_factors
    u0_dag = dagger(u0)
    h_i = u0_dag @ h1 @ u0
    d_i = u0_dag @ da @ u0
    return h_i, d_i
