"""Dense complex linear algebra with explicit rank tolerances.

Everything here is a pure function of its inputs. Rank decisions use a
relative singular value cutoff ``rank_tol * sigma_max`` so that subspaces
defined by exact arithmetic survive floating point noise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class InvalidInputError(ValueError):
    """Raised when an argument violates a documented precondition."""


@dataclass(frozen=True)
class Tolerance:
    """Numerical slack used for rank decisions and invariant checks."""

    rank_tol: float = 1e-10
    assert_tol: float = 1e-8

    def __post_init__(self):
        if not 0 < self.rank_tol <= 1e-6:
            raise InvalidInputError(f"rank_tol must lie in (0, 1e-6], got {self.rank_tol}")
        if not 0 < self.assert_tol <= 1e-6:
            raise InvalidInputError(f"assert_tol must lie in (0, 1e-6], got {self.assert_tol}")


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class UnitaryEigensystem:
    """Eigenphases and orthonormal eigenvectors of a unitary.

    ``vectors[:, k]`` is the eigenvector with eigenvalue ``exp(1j * phases[k])``.
    ``queries_per_application`` is the number of oracle calls one application
    of the unitary costs.
    """

    phases: np.ndarray
    vectors: np.ndarray
    queries_per_application: int = 0

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def coefficients(self, state: np.ndarray) -> np.ndarray:
        """Amplitudes of ``state`` in the eigenbasis."""
        state = np.asarray(state, dtype=complex)
        if state.shape != (self.dim,):
            raise InvalidInputError(
                f"state has shape {state.shape}, eigensystem has dimension {self.dim}"
            )
        return self.vectors.conj().T @ state

    def low_phase_projector(self, theta: float) -> np.ndarray:
        """Projector onto eigenvectors with ``|phase| <= theta``."""
        cols = self.vectors[:, np.abs(self.phases) <= theta]
        return cols @ cols.conj().T

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * np.exp(1j * self.phases)) @ self.vectors.conj().T


def as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2:
        raise InvalidInputError(f"expected a matrix, got array with shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("matrix has non-finite entries")
    return M


def _cutoff(s: np.ndarray, tol: Tolerance) -> float:
    smax = s[0] if s.size else 0.0
    # an all-zero matrix has no range at all
    return tol.rank_tol * smax if smax > 0 else np.inf


def matrix_rank(M, tol: Tolerance = DEFAULT_TOL) -> int:
    M = as_matrix(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > _cutoff(s, tol)))


def kernel_basis(M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the null space of ``M``, one vector per column.

    Returns an array of shape ``(M.shape[1], k)``; ``k == 0`` for full column
    rank.
    """
    M = as_matrix(M)
    rows, cols = M.shape
    if cols == 0:
        raise InvalidInputError("kernel of a map with empty domain")
    if rows == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > _cutoff(s, tol)))
    return vh[rank:].conj().T


def range_basis(M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the column space of ``M``."""
    M = as_matrix(M)
    if M.shape[1] == 0 or M.shape[0] == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > _cutoff(s, tol)))
    return u[:, :rank]


def orthonormalize(vectors, dim: int | None = None, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) for the span of the given vectors."""
    V = np.asarray(vectors, dtype=complex)
    if V.ndim == 1:
        V = V.reshape(-1, 1)
    if V.size == 0:
        if dim is None:
            raise InvalidInputError("cannot infer dimension of an empty basis")
        return np.zeros((dim, 0), dtype=complex)
    if dim is not None and V.shape[0] != dim:
        raise InvalidInputError(f"basis vectors have dimension {V.shape[0]}, expected {dim}")
    return range_basis(V, tol)


def projector_onto(basis, dim: int | None = None, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the span of the columns of ``basis``.

    The basis is re-orthonormalized when its Gram matrix is off by more than
    ``tol.assert_tol``.
    """
    B = np.asarray(basis, dtype=complex)
    if B.ndim == 1:
        B = B.reshape(-1, 1)
    if B.size == 0:
        if dim is None:
            if B.ndim == 2 and B.shape[0] > 0:
                dim = B.shape[0]
            else:
                raise InvalidInputError("cannot infer dimension of an empty basis")
        return np.zeros((dim, dim), dtype=complex)
    if dim is not None and B.shape[0] != dim:
        raise InvalidInputError(f"basis vectors have dimension {B.shape[0]}, expected {dim}")
    gram = B.conj().T @ B
    if np.max(np.abs(gram - np.eye(B.shape[1]))) > tol.assert_tol:
        B = orthonormalize(B, tol=tol)
    return B @ B.conj().T


def intersection_basis(P: np.ndarray, Q: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of range(P) ∩ range(Q) for orthogonal projectors P, Q.

    A vector lies in both ranges iff it is fixed by both projectors, i.e. it
    is in the kernel of ``[I - P; I - Q]``.
    """
    eye = np.eye(P.shape[0])
    return kernel_basis(np.vstack([eye - P, eye - Q]), tol)


def min_norm_solution(M, b, tol: Tolerance = DEFAULT_TOL) -> np.ndarray | None:
    """Minimum-norm ``x`` with ``M @ x == b``, or ``None`` when infeasible."""
    M = as_matrix(M)
    b = np.asarray(b, dtype=complex).reshape(-1)
    if b.shape[0] != M.shape[0]:
        raise InvalidInputError(f"rhs has length {b.shape[0]}, matrix has {M.shape[0]} rows")
    if M.shape[1] == 0:
        return np.zeros(0, dtype=complex) if np.linalg.norm(b) == 0 else None
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > _cutoff(s, tol)))
    x = vh[:rank].conj().T @ ((u[:, :rank].conj().T @ b) / s[:rank])
    resid = np.linalg.norm(M @ x - b)
    scale = (s[0] if s.size else 0.0) + np.linalg.norm(b)
    if resid > 10 * tol.rank_tol * scale:
        return None
    return x


def lstsq_min_norm(M, b, tol: Tolerance = DEFAULT_TOL, scale: float = 0.0) -> np.ndarray:
    """Minimum-norm least-squares solution.

    Singular values at or below ``rank_tol * max(sigma_max, scale)`` are
    dropped; pass ``scale`` when ``M`` is a restriction of a larger operator
    whose norm sets the meaningful size.
    """
    M = as_matrix(M)
    b = np.asarray(b, dtype=complex).reshape(-1)
    if M.shape[1] == 0:
        return np.zeros(0, dtype=complex)
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    ref = max(s[0] if s.size else 0.0, scale)
    rank = int(np.sum(s > tol.rank_tol * ref)) if ref > 0 else 0
    return vh[:rank].conj().T @ ((u[:, :rank].conj().T @ b) / s[:rank])


def eig_unitary(U, tol: Tolerance = DEFAULT_TOL, queries_per_application: int = 0) -> UnitaryEigensystem:
    """Eigendecomposition of a unitary via the complex Schur form.

    For a normal matrix the Schur factor is diagonal up to rounding, so the
    Schur vectors are an orthonormal eigenbasis even inside degenerate
    eigenspaces. Phases are canonicalized to (-pi, pi].
    """
    U = as_matrix(U)
    n = U.shape[0]
    if U.shape != (n, n):
        raise InvalidInputError(f"unitary must be square, got {U.shape}")
    if np.linalg.norm(U.conj().T @ U - np.eye(n), 2) > 1e-8:
        raise InvalidInputError("matrix is not unitary within 1e-8")
    T, Z = scipy.linalg.schur(U, output="complex")
    phases = np.angle(np.diag(T))
    phases = np.where(phases <= -np.pi + 1e-15, np.pi, phases)
    es = UnitaryEigensystem(phases=phases, vectors=Z, queries_per_application=queries_per_application)
    if np.linalg.norm(U - es.reconstruct(), 2) > 1e-7:
        raise InvalidInputError("eigendecomposition failed to reconstruct the unitary")
    return es


def reflection(P: np.ndarray) -> np.ndarray:
    """``2P - I`` for a projector ``P``."""
    return 2 * P - np.eye(P.shape[0])
