"""Exact statistics of parallel phase estimation.

The phase register is never materialized. For an eigenvector with phase
``theta`` one copy of phase estimation with ``T = 2**t`` outcomes leaves the
copy register in ``h(theta)`` with ``h_y = (1/T) sum_k exp(i k (theta - 2 pi y/T))``.
``c`` parallel copies give ``h(theta)^{⊗c}``, so every statistic reduces to
per-eigenvalue scalars raised to the ``c``-th power.

Query accounting: one copy applies powers of ``U`` summing to ``T - 1``, so a
Phase Checking call costs ``c * (T - 1)`` applications of ``U`` and a Phase
Reflection call (``D`` then ``D^dagger``) twice that.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .linalg import InvalidInputError, UnitaryEigensystem


@dataclass
class QueryLedger:
    """Running count of oracle calls, keyed by subroutine label."""

    breakdown: Counter = field(default_factory=Counter)

    @property
    def total_queries(self) -> int:
        return int(sum(self.breakdown.values()))

    def add(self, label: str, count: int) -> None:
        if count < 0:
            raise InvalidInputError(f"negative query count {count} for {label!r}")
        self.breakdown[label] += int(count)

    def merge(self, other: "QueryLedger") -> "QueryLedger":
        self.breakdown.update(other.breakdown)
        return self

    def as_string(self) -> str:
        """Stable ``label=count;...`` rendering for CSV output."""
        return ";".join(f"{k}={v}" for k, v in sorted(self.breakdown.items()))


@dataclass(frozen=True)
class QpeConfig:
    """Parallel phase estimation parameters.

    ``theta`` is the precision, ``eps`` the accuracy, ``T = 2**t`` outcomes per
    copy and ``c`` parallel copies. ``leak`` is the worst per-copy probability
    of reading zero for a phase of magnitude at least ``theta``.
    """

    theta: float
    eps: float
    t: int
    T: int
    c: int
    leak: float

    @property
    def ancilla_qubits(self) -> int:
        return self.c * self.t

    def checking_cost(self, queries_per_application: int) -> int:
        return self.c * (self.T - 1) * queries_per_application

    def reflection_cost(self, queries_per_application: int) -> int:
        return 2 * self.checking_cost(queries_per_application)


def leak_bound(T: int, theta: float) -> float:
    """max over |phi| in [theta, pi] of |h_0(phi)|^2, on a grid of 10*T points
    refined locally around the best grid point."""
    return float(kernels.leak_bound(int(T), float(theta), max(10 * int(T), 64) + 1))


@lru_cache(maxsize=4096)
def plan_qpe(theta: float, eps: float, reflection: bool = False) -> QpeConfig:
    """Choose ``t`` and ``c`` for precision ``theta`` and accuracy ``eps``.

    ``t = ceil(log2(2/theta))`` (at least 1) and ``c`` is the smallest copy
    count with ``leak**c <= eps``. With ``reflection=True`` the copy count is
    chosen so that Phase Reflection errs by less than ``eps`` in norm on
    high-phase inputs, i.e. ``2 * leak**(c/2) <= eps``.
    """
    if not 0 < theta < math.pi:
        raise InvalidInputError(f"precision must lie in (0, pi), got {theta}")
    if not 0 < eps < 1:
        raise InvalidInputError(f"accuracy must lie in (0, 1), got {eps}")
    t = max(1, math.ceil(math.log2(2.0 / theta)))
    T = 2**t
    beta = leak_bound(T, theta)
    target = (eps / 2.0) ** 2 if reflection else eps
    if beta <= 0.0:
        c = 1
    else:
        c = max(1, math.ceil(math.log(target) / math.log(beta)))
        while c > 1 and beta ** (c - 1) <= target:
            c -= 1
        while beta**c > target:
            c += 1
    return QpeConfig(theta=theta, eps=eps, t=t, T=T, c=c, leak=beta)


def one_copy_amplitudes(theta: float, T: int) -> np.ndarray:
    """Copy-register state after one phase estimation copy on phase ``theta``."""
    if T < 1 or T & (T - 1):
        raise InvalidInputError(f"T must be a power of two, got {T}")
    return kernels.one_copy_amplitudes(float(theta), int(T))


def _hadamard_signs(T: int) -> np.ndarray:
    k = np.arange(T)
    parity = np.array([bin(v).count("1") & 1 for v in range(T)])
    return np.where(parity[(k[:, None] & k[None, :])] == 1, -1.0, 1.0)


def walsh_hadamard(vec: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform, O(T log T)."""
    out = np.array(vec, dtype=complex)
    T = out.shape[0]
    h = 1
    while h < T:
        out = out.reshape(-1, 2, h)
        out = np.stack([out[:, 0] + out[:, 1], out[:, 0] - out[:, 1]], axis=1).reshape(T)
        h *= 2
    return out


def copy_circuit(theta: float, T: int) -> np.ndarray:
    """Dense T x T map of one copy on an eigenvector with phase ``theta``:
    inverse Fourier transform · diag(exp(i k theta)) · Hadamard transform.

    Only used to cross-check the closed forms at small ``T``.
    """
    k = np.arange(T)
    finv = np.exp(-2j * np.pi * np.outer(k, k) / T) / np.sqrt(T)
    had = _hadamard_signs(T) / np.sqrt(T)
    return finv @ np.diag(np.exp(1j * k * theta)) @ had


def return_amplitudes(theta: float, T: int) -> np.ndarray:
    """h~(theta): one copy's state after ``D_copy^dagger`` acts on ``|0>``."""
    # components conj(<0|D_copy|k>) with <0|F^{-1}|m> = 1/sqrt(T)
    row = walsh_hadamard(np.exp(1j * np.arange(T) * theta)) / T
    return row.conj()


def zero_probabilities(es: UnitaryEigensystem, cfg: QpeConfig) -> np.ndarray:
    """Per-eigenvector probability that all ``c`` copies read zero."""
    return kernels.fejer_power(es.phases, cfg.T, cfg.c)


def _unit_input(es: UnitaryEigensystem, state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.shape != (es.dim,):
        raise InvalidInputError(f"state has shape {state.shape}, unitary acts on dimension {es.dim}")
    if abs(np.linalg.norm(state) - 1.0) > 1e-8:
        raise InvalidInputError("input state must have unit norm")
    return state


def checking_probability(
    es: UnitaryEigensystem,
    state,
    cfg: QpeConfig,
    ledger: QueryLedger | None = None,
    label: str = "phase_check",
) -> float:
    """Probability that Phase Checking on ``state`` finds the phase register at zero.

    Equals ``sum_l |<u_l|state>|^2 |h_0(theta_l)|^{2c}``. Charges one Phase
    Checking call to ``ledger`` when given.
    """
    state = _unit_input(es, state)
    weights = np.abs(es.coefficients(state)) ** 2
    prob = float(np.dot(weights, zero_probabilities(es, cfg)))
    if ledger is not None:
        ledger.add(label, cfg.checking_cost(es.queries_per_application))
    return min(max(prob, 0.0), 1.0)


@dataclass(frozen=True)
class ReflectionOutput:
    """``R(U)(input ⊗ |0>_B)`` written in the eigenbasis.

    The output is ``sum_l a_l |u_l> ⊗ (2 h0_l^c h~_l^{⊗c} - |0>_B)``; the
    ancilla vectors stay implicit as per-copy ``T``-dimensional factors.
    """

    coefficients: np.ndarray
    h0: np.ndarray
    forward: list
    returned: list
    c: int

    def _gram(self):
        """Per-eigenvector <0|h~^{⊗c}> and <h~|h~>^c from T-dimensional overlaps."""
        zero_overlap = np.array([r[0] for r in self.returned]) ** self.c
        self_overlap = np.array([np.vdot(r, r).real for r in self.returned]) ** self.c
        return zero_overlap, self_overlap

    def norm(self) -> float:
        """Norm of the output; equals the input norm since R(U) is unitary."""
        zero_overlap, self_overlap = self._gram()
        g = 2 * self.h0**self.c
        per = np.abs(g) ** 2 * self_overlap - 2 * np.real(g * zero_overlap) + 1.0
        return float(np.sqrt(max(np.dot(np.abs(self.coefficients) ** 2, per), 0.0)))

    def distance_to(self, target_coefficients: np.ndarray) -> float:
        """‖output - target ⊗ |0>_B‖ with the target given in the eigenbasis."""
        zero_overlap, self_overlap = self._gram()
        a = self.coefficients
        g = 2 * a * self.h0**self.c  # coefficient of |u_l> ⊗ h~_l^{⊗c}
        b = a + target_coefficients  # coefficient of |u_l> ⊗ |0>_B to subtract
        per = np.abs(g) ** 2 * self_overlap - 2 * np.real(np.conj(b) * g * zero_overlap) + np.abs(b) ** 2
        return float(np.sqrt(max(per.sum(), 0.0)))


def reflect(es: UnitaryEigensystem, state, cfg: QpeConfig) -> ReflectionOutput:
    """Apply Phase Reflection to ``state ⊗ |0>_B``, symbolically."""
    state = _unit_input(es, state)
    a = es.coefficients(state)
    forward = [one_copy_amplitudes(th, cfg.T) for th in es.phases]
    returned = [return_amplitudes(th, cfg.T) for th in es.phases]
    h0 = np.array([f[0] for f in forward])
    return ReflectionOutput(coefficients=a, h0=h0, forward=forward, returned=returned, c=cfg.c)


def reflection_distance(
    es: UnitaryEigensystem,
    state,
    target,
    cfg: QpeConfig,
    ledger: QueryLedger | None = None,
    label: str = "phase_reflect",
) -> float:
    """‖R(U)(state ⊗ |0>_B) - target ⊗ |0>_B‖, exactly."""
    target = _unit_input(es, target)
    out = reflect(es, state, cfg)
    if ledger is not None:
        ledger.add(label, cfg.reflection_cost(es.queries_per_application))
    return out.distance_to(es.coefficients(target))


def amplitude_estimation_sim(
    true_prob: float,
    delta: float,
    fail_prob: float,
    inner_cost: int,
    rng: np.random.Generator,
    ledger: QueryLedger | None = None,
    label: str = "amplitude_estimation",
) -> float:
    """Statistical model of amplitude estimation.

    With probability ``1 - fail_prob`` returns ``true_prob`` plus uniform noise
    in ``[-delta, delta]``; otherwise a uniform draw from ``[0, 1]``. Result is
    clamped to ``[0, 1]``. Costs ``ceil(1/(delta*fail_prob))`` inner circuits.
    """
    if not 0 <= true_prob <= 1 + 1e-12:
        raise InvalidInputError(f"probability out of range: {true_prob}")
    if delta <= 0 or not 0 < fail_prob < 1:
        raise InvalidInputError("delta must be positive and fail_prob in (0, 1)")
    if ledger is not None:
        ledger.add(label, math.ceil(1.0 / (delta * fail_prob)) * int(inner_cost))
    if rng.random() < fail_prob:
        return float(rng.random())
    est = true_prob + rng.uniform(-delta, delta)
    return float(min(max(est, 0.0), 1.0))
