"""Liouville-space helpers using column-stacking vectorization.

Conventions: vec stacks matrix columns (Fortran order), so
vec(A X B) = kron(B^T, A) vec(X), and the Hilbert-Schmidt inner product
Tr(u^dag v) equals vec(u)^dag vec(v).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "vec",
    "unvec",
    "left_mult",
    "right_mult",
    "sandwich",
    "hamiltonian_superop",
    "lindblad_dissipator",
    "conjugation_superop",
]


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    n = int(round(np.sqrt(v.size)))
    return v.reshape(n, n, order="F")


def left_mult(a: np.ndarray) -> np.ndarray:
    """Superoperator of X -> A X."""
    a = np.asarray(a, dtype=complex)
    return np.kron(np.eye(a.shape[0]), a)


def right_mult(b: np.ndarray) -> np.ndarray:
    """Superoperator of X -> X B."""
    b = np.asarray(b, dtype=complex)
    return np.kron(b.T, np.eye(b.shape[0]))


def sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of X -> A X B."""
    return np.kron(np.asarray(b, dtype=complex).T, np.asarray(a, dtype=complex))


def hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    """The commutator map X -> [H, X]; eigenoperators |E_n><E_m| have
    eigenvalues E_n - E_m."""
    return left_mult(h) - right_mult(h)


def lindblad_dissipator(op: np.ndarray, rate: float = 1.0) -> np.ndarray:
    """rate * (L X L^dag - {L^dag L, X} / 2) as a superoperator."""
    op = np.asarray(op, dtype=complex)
    opd = op.conj().T
    anti = opd @ op
    return rate * (sandwich(op, opd) - 0.5 * (left_mult(anti) + right_mult(anti)))


def conjugation_superop(u: np.ndarray) -> np.ndarray:
    """Superoperator of X -> U X U^dag (e.g. an impulse kick on a state)."""
    return sandwich(u, np.asarray(u, dtype=complex).conj().T)
