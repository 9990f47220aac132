"""Promise-free span program evaluation by doubling alpha.

Round ``i`` sets ``alpha = 2**i`` and runs ``N`` Phase Checking repetitions of
``U(P, x, alpha)`` on ``|0^>``; a majority of zero outcomes returns 1. If not,
the same is done with the negated program and a majority returns 0. After the
last round the answer defaults to 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import InvalidInputError
from .qpe import QpeConfig, QueryLedger, checking_probability, plan_qpe
from .span_program import SpanProgram, algorithm_unitary, as_input, hat_zero, negate, witness


@dataclass(frozen=True)
class EvalConfig:
    delta: float
    eps: float = 1.0 / 9.0
    rng_seed: int | None = None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise InvalidInputError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 < self.eps < 1:
            raise InvalidInputError(f"eps must lie in (0, 1), got {self.eps}")


@dataclass
class EvalResult:
    output_bit: int
    rounds_used: int
    alpha_final: float
    ledger: QueryLedger
    per_round_counts: list = field(default_factory=list)
    fallback: bool = False


def round_limit(W: float) -> int:
    """Last round index, ceil(log2 sqrt(3W)), never below 0."""
    return max(0, math.ceil(math.log2(math.sqrt(3.0 * W))))


def repetitions(W: float, delta: float) -> int:
    """N = ceil(4.5 * log2(ceil(log2 sqrt(3W)) / delta)), at least 1."""
    rounds = max(1, round_limit(W))
    return max(1, math.ceil(4.5 * math.log2(rounds / delta)))


def round_precision(alpha: float, W: float, eps: float) -> float:
    return math.sqrt(eps / (alpha**2 * W))


class PhaseCheckTable:
    """Cache of exact Phase Checking probabilities for one program pair.

    Eigendecompositions depend only on (program, x, alpha), so trials of the
    same input share them.
    """

    def __init__(self, P: SpanProgram, Pdag: SpanProgram, W: float, eps: float = 1.0 / 9.0):
        if W <= 0:
            raise InvalidInputError(f"W must be positive, got {W}")
        self.P, self.Pdag, self.W, self.eps = P, Pdag, W, eps
        self._probs = {}

    def config(self, alpha: float) -> QpeConfig:
        return plan_qpe(round_precision(alpha, self.W, self.eps), self.eps)

    def probability(self, which: str, x, alpha: float) -> float:
        key = (which, tuple(x), alpha)
        if key not in self._probs:
            prog = self.P if which == "P" else self.Pdag
            U = algorithm_unitary(prog, x, alpha)
            self._probs[key] = checking_probability(U.eigensystem, hat_zero(U.eigensystem.dim), self.config(alpha))
        return self._probs[key]

    def cost(self, alpha: float) -> int:
        """Queries for one Phase Checking call; the unitary uses 2 per application."""
        return self.config(alpha).checking_cost(2)


def evaluate(
    P: SpanProgram,
    Pdag: SpanProgram | None,
    W: float,
    x,
    cfg: EvalConfig,
    rng: np.random.Generator | None = None,
    table: PhaseCheckTable | None = None,
) -> EvalResult:
    """Run the doubling algorithm once on input ``x``.

    ``W`` is the maximum witness size of the (scaled) program ``P``. Each of
    the ``N`` repetitions is an independent Bernoulli draw at the exact
    Phase Checking probability and is charged to the ledger.
    """
    if W <= 0:
        raise InvalidInputError(f"W must be positive, got {W}")
    x = as_input(x, P.n, P.q)
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    if table is None:
        table = PhaseCheckTable(P, Pdag if Pdag is not None else negate(P), W, cfg.eps)
    N = repetitions(W, cfg.delta)
    need = math.ceil(N / 2)
    ledger = QueryLedger()
    trace = []
    last = round_limit(W)
    for i in range(last + 1):
        alpha = float(2**i)
        cost = table.cost(alpha)
        zeros_p = int(np.count_nonzero(rng.random(N) < table.probability("P", x, alpha)))
        ledger.add("check_P", N * cost)
        if zeros_p >= need:
            trace.append((alpha, zeros_p, None))
            return EvalResult(1, i + 1, alpha, ledger, trace)
        zeros_n = int(np.count_nonzero(rng.random(N) < table.probability("Pdag", x, alpha)))
        ledger.add("check_Pdag", N * cost)
        trace.append((alpha, zeros_p, zeros_n))
        if zeros_n >= need:
            return EvalResult(0, i + 1, alpha, ledger, trace)
    return EvalResult(1, last + 1, float(2**last), ledger, trace, fallback=True)


def exact_error_probability(table: PhaseCheckTable, x, f_x: int, delta: float) -> float:
    """Probability that ``evaluate`` returns the wrong bit, from the exact
    per-round probabilities and binomial tails."""
    from scipy.stats import binom

    N = repetitions(table.W, delta)
    need = math.ceil(N / 2)
    alive, wrong = 1.0, 0.0
    for i in range(round_limit(table.W) + 1):
        alpha = float(2**i)
        hit_p = binom.sf(need - 1, N, table.probability("P", x, alpha))
        hit_n = binom.sf(need - 1, N, table.probability("Pdag", x, alpha))
        if f_x == 0:
            wrong += alive * hit_p
        else:
            wrong += alive * (1 - hit_p) * hit_n
        alive *= (1 - hit_p) * (1 - hit_n)
    if f_x == 0:
        wrong += alive
    return float(wrong)


@dataclass(frozen=True)
class PhaseBoundCheck:
    probability: float
    bound: float
    applies: bool
    satisfied: bool


def check_phase_bound(P: SpanProgram, x, alpha: float, W: float, eps: float = 1.0 / 9.0, C: float = 3.0) -> PhaseBoundCheck:
    """Phase Checking probability of ``U(P, x, alpha)`` on ``|0^>`` at the doubling
    algorithm's precision, against its guarantee.

    Positive inputs with ``alpha**2 >= C w(P, x)`` must reach ``1 - 1/C``;
    negative inputs must stay at or below ``3 eps``. Positive inputs below the
    ``alpha`` threshold carry no guarantee (``applies`` is False).
    """
    w = witness(P, x)
    U = algorithm_unitary(P, x, alpha)
    cfg = plan_qpe(round_precision(alpha, W, eps), eps)
    prob = checking_probability(U.eigensystem, hat_zero(U.eigensystem.dim), cfg)
    if w.positive:
        applies = alpha**2 >= C * w.size * (1 - 1e-12)
        bound = 1 - 1 / C
        return PhaseBoundCheck(prob, bound, applies, (prob >= bound) if applies else True)
    bound = 3 * eps
    return PhaseBoundCheck(prob, bound, True, prob <= bound)

