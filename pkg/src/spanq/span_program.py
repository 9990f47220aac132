"""Span programs, their witnesses, negation and the algorithm unitary.

Coordinates of ``H`` are laid out part by part: ``H_1, ..., H_n, H_true,
H_false``. Each letter subspace ``H_{j,a}`` is stored as an orthonormal basis
in the coordinates of its part ``H_j``. Letters are ``0 .. q-1``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    InvalidInputError,
    Tolerance,
    UnitaryEigensystem,
    eig_unitary,
    intersection_basis,
    kernel_basis,
    lstsq_min_norm,
    min_norm_solution,
    orthonormalize,
    projector_onto,
    reflection,
)


class InfeasibleNegationError(ValueError):
    """The target is outside the range of ``A``, so negation is undefined."""


class InvalidProgramError(ValueError):
    """A span program fails a structural invariant."""


Input = tuple


def as_input(x, n: int | None = None, q: int | None = None) -> tuple:
    """Normalize ``"0110"`` / ``[0, 1, 1, 0]`` to a tuple of ints."""
    if isinstance(x, str):
        x = tuple(int(ch) for ch in x)
    else:
        x = tuple(int(v) for v in x)
    if n is not None and len(x) != n:
        raise InvalidInputError(f"input {x} has length {len(x)}, expected {n}")
    if q is not None and any(not 0 <= v < q for v in x):
        raise InvalidInputError(f"input {x} has a letter outside 0..{q - 1}")
    return x


def input_str(x) -> str:
    return "".join(str(v) for v in x)


@dataclass(frozen=True, eq=False)
class SpanProgram:
    """Tuple ``(H, V, tau, A)`` on ``[q]^n``.

    ``part_dims[j]`` is ``dim H_j``; ``subspaces[j][a]`` is a ``(part_dims[j], k)``
    array whose columns form an orthonormal basis of ``H_{j,a}``.
    """

    n: int
    q: int
    part_dims: tuple
    true_dim: int
    false_dim: int
    subspaces: tuple
    A: np.ndarray
    tau: np.ndarray
    tol: Tolerance = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if len(self.part_dims) != self.n or len(self.subspaces) != self.n:
            raise InvalidProgramError("need one part dimension and one subspace list per index")
        A = np.asarray(self.A, dtype=complex)
        tau = np.asarray(self.tau, dtype=complex).reshape(-1)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "tau", tau)
        if A.shape != (tau.shape[0], self.dim_H):
            raise InvalidProgramError(f"A has shape {A.shape}, expected ({tau.shape[0]}, {self.dim_H})")
        if not np.all(np.isfinite(A)) or not np.all(np.isfinite(tau)):
            raise InvalidProgramError("A and tau must be finite")
        if np.linalg.norm(tau) == 0:
            raise InvalidProgramError("target vector must be nonzero")
        subs = []
        for j, (d, letters) in enumerate(zip(self.part_dims, self.subspaces)):
            if len(letters) != self.q:
                raise InvalidProgramError(f"index {j} has {len(letters)} letter subspaces, expected {self.q}")
            basis_j = []
            for a, B in enumerate(letters):
                B = np.asarray(B, dtype=complex).reshape(d, -1) if np.size(B) else np.zeros((d, 0), complex)
                if B.shape[0] != d:
                    raise InvalidProgramError(f"H_{{{j},{a}}} basis vectors must have dimension {d}")
                basis_j.append(orthonormalize(B, dim=d, tol=self.tol))
            span = np.hstack(basis_j) if basis_j else np.zeros((d, 0))
            if d and orthonormalize(span, dim=d, tol=self.tol).shape[1] != d:
                raise InvalidProgramError(f"letter subspaces of index {j} do not span H_{j}")
            subs.append(tuple(basis_j))
        object.__setattr__(self, "subspaces", tuple(subs))

    @property
    def dim_H(self) -> int:
        return int(sum(self.part_dims)) + self.true_dim + self.false_dim

    @property
    def dim_V(self) -> int:
        return self.tau.shape[0]

    @cached_property
    def offsets(self) -> tuple:
        return tuple(int(v) for v in np.concatenate([[0], np.cumsum(self.part_dims)]))

    def part_slice(self, j: int) -> slice:
        return slice(self.offsets[j], self.offsets[j + 1])

    @property
    def true_slice(self) -> slice:
        start = self.offsets[-1]
        return slice(start, start + self.true_dim)

    @property
    def false_slice(self) -> slice:
        start = self.offsets[-1] + self.true_dim
        return slice(start, start + self.false_dim)

    def inputs(self):
        """All of ``[q]^n`` in lexicographic order."""
        return [tuple(x) for x in itertools.product(range(self.q), repeat=self.n)]

    def hx_basis(self, x) -> np.ndarray:
        """Orthonormal basis (columns, in H coordinates) of H(x)."""
        x = as_input(x, self.n, self.q)
        cols = []
        for j, a in enumerate(x):
            B = self.subspaces[j][a]
            if B.shape[1]:
                E = np.zeros((self.dim_H, B.shape[1]), dtype=complex)
                E[self.part_slice(j)] = B
                cols.append(E)
        if self.true_dim:
            E = np.zeros((self.dim_H, self.true_dim), dtype=complex)
            E[self.true_slice] = np.eye(self.true_dim)
            cols.append(E)
        if not cols:
            return np.zeros((self.dim_H, 0), dtype=complex)
        return np.hstack(cols)

    def with_target(self, tau) -> "SpanProgram":
        return SpanProgram(
            n=self.n, q=self.q, part_dims=self.part_dims, true_dim=self.true_dim,
            false_dim=self.false_dim, subspaces=self.subspaces, A=self.A, tau=tau, tol=self.tol,
        )


def hx_projector(P: SpanProgram, x) -> np.ndarray:
    """Orthogonal projector onto H(x) = H_{1,x_1} ⊕ ... ⊕ H_{n,x_n} ⊕ H_true."""
    return projector_onto(P.hx_basis(x), dim=P.dim_H, tol=P.tol)


@dataclass(frozen=True)
class Witness:
    """Optimal witness for one input.

    For ``kind == "positive"`` the payload is the vector ``w`` in H; for
    ``"negative"`` it is the row ``omega A`` and ``omega`` is kept too.
    """

    kind: str
    size: float
    payload: np.ndarray
    omega: np.ndarray | None = None

    @property
    def positive(self) -> bool:
        return self.kind == "positive"


def positive_witness(P: SpanProgram, x) -> Witness | None:
    """Minimum-norm ``w`` in H(x) with ``A w = tau``, or ``None``."""
    B = P.hx_basis(x)
    if B.shape[1] == 0:
        return None
    coeffs = min_norm_solution(P.A @ B, P.tau, P.tol)
    if coeffs is None:
        return None
    w = B @ coeffs
    return Witness("positive", float(np.vdot(w, w).real), w)


def negative_witness(P: SpanProgram, x) -> Witness | None:
    """Minimize ‖omega A‖^2 over functionals with omega tau = 1 and omega A Π_H(x) = 0.

    With ``z = omega^T`` the constraints read ``C z = d``; the feasible set is a
    particular solution plus the null space of ``C``, over which the objective
    is an unconstrained least-squares problem.
    """
    B = P.hx_basis(x)
    C = np.vstack([P.tau.reshape(1, -1), (P.A @ B).T])
    d = np.zeros(C.shape[0], dtype=complex)
    d[0] = 1.0
    z0 = min_norm_solution(C, d, P.tol)
    if z0 is None:
        return None
    N = kernel_basis(C, P.tol)
    At = P.A.T
    a_norm = np.linalg.norm(P.A, 2)
    z = z0 + N @ lstsq_min_norm(At @ N, -At @ z0, P.tol, scale=a_norm) if N.shape[1] else z0
    row = z @ P.A
    if abs(z @ P.tau - 1) > 1e-8 or np.linalg.norm(row @ B) > 1e-8 * (1.0 + a_norm):
        raise RuntimeError(f"negative witness for {input_str(x)} violates its constraints")
    return Witness("negative", float(np.vdot(row, row).real), row, z)


def witness(P: SpanProgram, x) -> Witness:
    """The positive witness if one exists, else the negative one."""
    w = positive_witness(P, x)
    if w is None:
        w = negative_witness(P, x)
    if w is None:
        raise InvalidProgramError(f"input {input_str(x)} has neither witness")
    return w


def witness_table(P: SpanProgram, X=None) -> dict:
    return {tuple(x): witness(P, x) for x in (X if X is not None else P.inputs())}


def max_witness_sizes(table: dict) -> tuple:
    """(W_plus, W_minus); 0 for a side with no inputs."""
    pos = [w.size for w in table.values() if w.positive]
    neg = [w.size for w in table.values() if not w.positive]
    return (max(pos) if pos else 0.0, max(neg) if neg else 0.0)


def max_witness_size(P: SpanProgram, X=None) -> float:
    return max(max_witness_sizes(witness_table(P, X)))


def scale_normalize(P: SpanProgram, X=None) -> SpanProgram:
    """Rescale the target so the largest positive and negative witnesses agree.

    Scaling ``tau`` by ``s`` multiplies positive witness sizes by ``s**2`` and
    negative ones by ``s**-2``; ``s**2 = sqrt(W_minus / W_plus)`` balances them
    at ``sqrt(W_plus * W_minus)``. Programs with only one witness kind on ``X``
    are returned unchanged.
    """
    try:
        table = witness_table(P, X)
    except InvalidProgramError as exc:
        raise InvalidProgramError(f"cannot normalize: {exc}") from exc
    wp, wm = max_witness_sizes(table)
    if wp == 0 or wm == 0:
        return P
    s = (wm / wp) ** 0.25
    return P.with_target(P.tau * s)


def negate(P: SpanProgram) -> SpanProgram:
    """Span program deciding the negated function with no larger witnesses.

    H'_{j,a} = H_j ∩ H_{j,a}^⊥, H'_true = H_false, H'_false = H_true,
    V' = H ⊕ span{|0~>}, tau' = |0~> and A' = |0~><w_0| + Π_H Λ_A with
    w_0 the minimum-norm solution of A w = tau and Λ_A the kernel projector
    of A. Each new part H'_j = Σ_a H'_{j,a} gets its own coordinates.
    """
    tol = P.tol
    w0 = min_norm_solution(P.A, P.tau, tol)
    if w0 is None:
        raise InfeasibleNegationError("target is not in the range of A")
    K = kernel_basis(P.A, tol)
    lam = K @ K.conj().T if K.shape[1] else np.zeros((P.dim_H, P.dim_H), dtype=complex)
    A_full = np.vstack([lam, w0.conj().reshape(1, -1)])  # rows: H coordinates, then |0~>

    embeds, new_dims, new_subs = [], [], []
    for j, d in enumerate(P.part_dims):
        comps = []
        for B in P.subspaces[j]:
            perp = np.eye(d) - (B @ B.conj().T if B.shape[1] else 0)
            comps.append(orthonormalize(perp, dim=d, tol=tol) if d else np.zeros((0, 0)))
        Bj = orthonormalize(np.hstack(comps), dim=d, tol=tol) if d else np.zeros((0, 0), complex)
        r = Bj.shape[1]
        new_dims.append(r)
        # express each H'_{j,a} in the coordinates of the new part
        new_subs.append(tuple(orthonormalize(Bj.conj().T @ C, dim=r, tol=tol) if r else np.zeros((0, 0)) for C in comps))
        E = np.zeros((P.dim_H, r), dtype=complex)
        E[P.part_slice(j)] = Bj
        embeds.append(E)
    for sl, dd in ((P.false_slice, P.false_dim), (P.true_slice, P.true_dim)):
        E = np.zeros((P.dim_H, dd), dtype=complex)
        E[sl] = np.eye(dd)
        embeds.append(E)
    embed = np.hstack(embeds)
    tau_new = np.zeros(P.dim_H + 1, dtype=complex)
    tau_new[-1] = 1.0
    return SpanProgram(
        n=P.n, q=P.q, part_dims=tuple(new_dims), true_dim=P.false_dim, false_dim=P.true_dim,
        subspaces=tuple(new_subs), A=A_full @ embed, tau=tau_new, tol=tol,
    )


@dataclass(frozen=True)
class AlgorithmUnitary:
    """``U = (2Π_x - I)(2Λ - I)`` with its eigensystem.

    ``start_index`` is the coordinate of the start state (``|0^>`` for span
    programs).
    """

    alpha: float
    eigensystem: UnitaryEigensystem
    start_index: int
    matrix: np.ndarray
    pi_x: np.ndarray
    lam: np.ndarray


def product_of_reflections(pi_x: np.ndarray, lam: np.ndarray) -> np.ndarray:
    return reflection(pi_x) @ reflection(lam)


def algorithm_unitary(P: SpanProgram, x, alpha: float) -> AlgorithmUnitary:
    """U(P, x, alpha) on H~ = H ⊕ span{|0^>} with |0^> as the last coordinate."""
    if alpha <= 0:
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    dim = P.dim_H + 1
    A_alpha = np.hstack([P.A, P.tau.reshape(-1, 1) / alpha])
    K = kernel_basis(A_alpha, P.tol)
    lam = K @ K.conj().T if K.shape[1] else np.zeros((dim, dim), dtype=complex)
    B = P.hx_basis(x)
    Bt = np.zeros((dim, B.shape[1] + 1), dtype=complex)
    Bt[: P.dim_H, : B.shape[1]] = B
    Bt[-1, -1] = 1.0
    pi_x = Bt @ Bt.conj().T
    U = product_of_reflections(pi_x, lam)
    if np.linalg.norm(U.conj().T @ U - np.eye(dim), 2) > 1e-8:
        raise RuntimeError("product of reflections is not unitary; projectors are inaccurate")
    es = eig_unitary(U, P.tol, queries_per_application=2)
    return AlgorithmUnitary(alpha=alpha, eigensystem=es, start_index=dim - 1, matrix=U, pi_x=pi_x, lam=lam)


def hat_zero(dim: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[-1] = 1.0
    return e


def decided_function(P: SpanProgram, X=None) -> dict:
    """f(x) = 1 iff x has a positive witness."""
    return {x: int(w.positive) for x, w in witness_table(P, X).items()}
