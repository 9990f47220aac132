"""Converting vector sets and coherent state conversion with a probing stage.

A converting vector set over inputs ``X`` holds vectors ``u[x][j]`` and
``v[x][j]`` in ``C^m`` with

    <rho_x|rho_y> - <sigma_x|sigma_y> = sum_{j: x_j != y_j} <u_xj|v_yj>.

The conversion walk acts on ``(C^2 ⊗ H_state) ⊕ (C^n ⊗ C^q ⊗ C^m)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_TOL, InvalidInputError, eig_unitary, projector_onto, range_basis
from .qpe import (
    QpeConfig,
    QueryLedger,
    amplitude_estimation_sim,
    checking_probability,
    plan_qpe,
    reflection_distance,
)
from .span_program import (
    AlgorithmUnitary,
    SpanProgram,
    as_input,
    input_str,
    product_of_reflections,
    witness_table,
)


class UnsupportedProgramError(ValueError):
    """The span program lacks structure a construction depends on."""


def mu_nu(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectors ``mu_i`` and ``nu_i`` (rows) with ``<mu_i|nu_j> = q/(2(q-1))`` for
    ``i != j`` and 0 on the diagonal, all of unit norm."""
    if q < 2:
        raise InvalidInputError(f"alphabet size must be at least 2, got {q}")
    a = math.sqrt(max(0.5 - math.sqrt(q - 1) / q, 0.0))
    off = 1.0 - np.eye(q)
    mu = -a * np.eye(q) + math.sqrt((1 - a * a) / (q - 1)) * off
    nu = math.sqrt(1 - a * a) * np.eye(q) + (a / math.sqrt(q - 1)) * off
    return mu.astype(complex), nu.astype(complex)


@dataclass(frozen=True, eq=False)
class GramPair:
    """Initial states ``rho[x]`` and targets ``sigma[x]`` in a common space."""

    rho: dict
    sigma: dict

    def __post_init__(self):
        if set(self.rho) != set(self.sigma):
            raise InvalidInputError("rho and sigma must be given for the same inputs")
        dims = {np.asarray(s).shape for s in list(self.rho.values()) + list(self.sigma.values())}
        if len(dims) != 1:
            raise InvalidInputError(f"states have inconsistent shapes {sorted(dims)}")
        for name, fam in (("rho", self.rho), ("sigma", self.sigma)):
            for x, s in fam.items():
                if abs(np.linalg.norm(s) - 1) > 1e-8:
                    raise InvalidInputError(f"{name}[{input_str(x)}] is not a unit vector")

    @property
    def dim(self) -> int:
        return len(next(iter(self.rho.values())))

    def gram(self, X) -> tuple[np.ndarray, np.ndarray]:
        R = np.array([self.rho[x] for x in X], dtype=complex)
        S = np.array([self.sigma[x] for x in X], dtype=complex)
        return R.conj() @ R.T, S.conj() @ S.T


@dataclass(frozen=True, eq=False)
class ConvertingVectorSet:
    """``u[x]`` and ``v[x]`` are ``(n, m)`` arrays whose row ``j`` is the vector for index ``j``."""

    n: int
    q: int
    m: int
    X: tuple
    u: dict
    v: dict

    def __post_init__(self):
        X = tuple(as_input(x, self.n, self.q) for x in self.X)
        if len(set(X)) != len(X) or not X:
            raise InvalidInputError("input set must be non-empty without repeats")
        object.__setattr__(self, "X", X)
        for name in ("u", "v"):
            fam = {as_input(x, self.n, self.q): np.asarray(a, dtype=complex) for x, a in getattr(self, name).items()}
            if set(fam) != set(X):
                raise InvalidInputError(f"{name} vectors must be given for exactly the inputs in X")
            for x, a in fam.items():
                if a.shape != (self.n, self.m):
                    raise InvalidInputError(f"{name}[{input_str(x)}] has shape {a.shape}, expected {(self.n, self.m)}")
            object.__setattr__(self, name, fam)

    def w_plus(self, x) -> float:
        return float(np.sum(np.abs(self.u[as_input(x)]) ** 2))

    def w_minus(self, x) -> float:
        return float(np.sum(np.abs(self.v[as_input(x)]) ** 2))

    def max_sizes(self) -> tuple[float, float]:
        return max(self.w_plus(x) for x in self.X), max(self.w_minus(x) for x in self.X)

    @property
    def W(self) -> float:
        return max(self.max_sizes())


def validate_cvs(cvs: ConvertingVectorSet, gp: GramPair, tol: float = 1e-8) -> tuple[bool, float]:
    """Check the defining identity on every ordered pair; return (ok, max residual)."""
    missing = [x for x in cvs.X if x not in gp.rho]
    if missing:
        raise InvalidInputError(f"no states for input {input_str(missing[0])}")
    rho, sigma = gp.gram(cvs.X)
    worst = 0.0
    for a, x in enumerate(cvs.X):
        for b, y in enumerate(cvs.X):
            diff = np.array(x) != np.array(y)
            rhs = np.sum(np.conj(cvs.u[x][diff]) * cvs.v[y][diff])
            worst = max(worst, abs(rho[a, b] - sigma[a, b] - rhs))
    return worst <= tol, float(worst)


def complement(cvs: ConvertingVectorSet) -> ConvertingVectorSet:
    """Swap the roles of ``u`` and ``v``; positive and negative sizes trade places."""
    return ConvertingVectorSet(cvs.n, cvs.q, cvs.m, cvs.X, dict(cvs.v), dict(cvs.u))


def normalize_cvs(cvs: ConvertingVectorSet) -> ConvertingVectorSet:
    """Rescale so the largest positive and negative sizes both become their geometric mean."""
    wp, wm = cvs.max_sizes()
    if wp <= 0 or wm <= 0:
        raise InvalidInputError("normalization needs nonzero positive and negative witness families")
    s = (wm / wp) ** 0.25
    return ConvertingVectorSet(
        cvs.n, cvs.q, cvs.m, cvs.X,
        {x: a * s for x, a in cvs.u.items()},
        {x: a / s for x, a in cvs.v.items()},
    )


def _check_orthogonal_letters(P: SpanProgram) -> None:
    for j in range(P.n):
        bases = P.subspaces[j]
        for a in range(P.q):
            for b in range(a + 1, P.q):
                if bases[a].shape[1] and bases[b].shape[1]:
                    if np.linalg.norm(bases[a].conj().T @ bases[b]) > 1e-8:
                        raise UnsupportedProgramError(
                            f"letter subspaces {a} and {b} of index {j} are not orthogonal"
                        )


def cvs_from_span_program(P: SpanProgram, X=None) -> tuple[ConvertingVectorSet, GramPair]:
    """Function evaluation as state conversion: ``|0> -> |f(x)>`` in ``C^2``.

    Positive inputs put their witness ``w`` into the first block of ``u`` and
    the second block of ``v``; negative inputs put ``(omega A)^dagger`` into
    the second block of ``u`` and the first block of ``v``. Only the parts
    ``H_j`` are used, so sizes equal the span program's when ``H_true`` and
    ``H_false`` are trivial.
    """
    _check_orthogonal_letters(P)
    table = witness_table(P, X)
    d = max(P.part_dims)
    m = 2 * d
    u, v, rho, sigma = {}, {}, {}, {}
    for x, w in table.items():
        vec = w.payload if w.positive else w.payload.conj()
        U = np.zeros((P.n, m), dtype=complex)
        V = np.zeros((P.n, m), dtype=complex)
        for j in range(P.n):
            block = vec[P.part_slice(j)]
            if w.positive:
                U[j, : len(block)] = block
                V[j, d : d + len(block)] = block
            else:
                U[j, d : d + len(block)] = block
                V[j, : len(block)] = block
        u[x], v[x] = U, V
        rho[x] = np.array([1.0, 0.0], dtype=complex)
        sigma[x] = np.eye(2, dtype=complex)[int(w.positive)]
    return ConvertingVectorSet(P.n, P.q, m, tuple(table), u, v), GramPair(rho, sigma)


@dataclass(frozen=True)
class ConversionSpace:
    """Index layout of ``(C^2 ⊗ H_state) ⊕ (C^n ⊗ C^q ⊗ C^m)``."""

    state_dim: int
    n: int
    q: int
    m: int

    @property
    def first_dim(self) -> int:
        return 2 * self.state_dim

    @property
    def dim(self) -> int:
        return self.first_dim + self.n * self.q * self.m

    def first(self, bit: int, state) -> np.ndarray:
        """``|bit>|state>`` in the first summand."""
        out = np.zeros(self.dim, dtype=complex)
        out[bit * self.state_dim : (bit + 1) * self.state_dim] = state
        return out

    def second_index(self, j: int, a: int, k: int = 0) -> int:
        return self.first_dim + (j * self.q + a) * self.m + k

    def t_vector(self, gp: GramPair, x, sign: int) -> np.ndarray:
        return (self.first(0, gp.rho[x]) + sign * self.first(1, gp.sigma[x])) / math.sqrt(2)


def conversion_space(cvs: ConvertingVectorSet, gp: GramPair) -> ConversionSpace:
    return ConversionSpace(gp.dim, cvs.n, cvs.q, cvs.m)


def psi_vector(cvs, gp, space: ConversionSpace, y, alpha: float, eps_hat: float, mu=None) -> np.ndarray:
    if mu is None:
        mu = mu_nu(cvs.q)[0]
    out = math.sqrt(eps_hat / alpha) * space.t_vector(gp, y, -1)
    tail = np.einsum("ja,jk->jak", mu[list(y)], cvs.u[y]).reshape(-1)
    out[space.first_dim :] -= tail
    return out


def conversion_unitary(
    cvs: ConvertingVectorSet, gp: GramPair, x, alpha: float, eps_hat: float
) -> AlgorithmUnitary:
    """``(2 Pi_x - I)(2 Lambda - I)`` with ``Lambda`` the projector onto the
    orthogonal complement of ``span{psi_y}``. Start state is ``|0>|rho_x>``."""
    if alpha <= 0:
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    if not 0 < eps_hat < 1:
        raise InvalidInputError(f"eps_hat must lie in (0, 1), got {eps_hat}")
    x = as_input(x, cvs.n, cvs.q)
    space = conversion_space(cvs, gp)
    mu = mu_nu(cvs.q)[0]
    Psi = np.column_stack([psi_vector(cvs, gp, space, y, alpha, eps_hat, mu) for y in cvs.X])
    eye = np.eye(space.dim, dtype=complex)
    lam = eye - projector_onto(range_basis(Psi), space.dim)
    pi_x = eye.copy()
    width = cvs.q * cvs.m
    for j, a in enumerate(x):
        sl = slice(space.second_index(j, 0), space.second_index(j, 0) + width)
        pi_x[sl, sl] -= np.kron(np.outer(mu[a], mu[a].conj()), np.eye(cvs.m))
    U = product_of_reflections(pi_x, lam)
    if np.linalg.norm(U.conj().T @ U - eye, 2) > 1e-8:
        raise RuntimeError("conversion walk is not unitary; projectors are inaccurate")
    es = eig_unitary(U, DEFAULT_TOL, queries_per_application=2)
    return AlgorithmUnitary(alpha=alpha, eigensystem=es, start_index=-1, matrix=U, pi_x=pi_x, lam=lam)


def start_state(cvs, gp, x) -> np.ndarray:
    return conversion_space(cvs, gp).first(0, gp.rho[as_input(x)])


def target_state(cvs, gp, x) -> np.ndarray:
    return conversion_space(cvs, gp).first(1, gp.sigma[as_input(x)])


def conversion_precision(eps_hat: float, alpha: float, W: float) -> float:
    return eps_hat**1.5 / math.sqrt(alpha * W)


@dataclass
class ConvertResult:
    distance: float
    alpha_stop: float
    used_complement: bool
    ledger: QueryLedger
    probe_trace: list = field(default_factory=list)
    exhausted: bool = False


def probe_rounds(W: float) -> int:
    """Number of probing rounds, ``ceil(log2 W) + 1`` with at least one round."""
    return max(0, math.ceil(math.log2(W))) + 1 if W > 0 else 1


def convert(
    cvs: ConvertingVectorSet,
    gp: GramPair,
    x,
    eps: float,
    p: float,
    rng: np.random.Generator,
    cache: dict | None = None,
) -> ConvertResult:
    """Coherently convert ``|rho_x>`` towards ``|sigma_x>`` without knowing the
    witness size of ``x``.

    The probing stage doubles ``alpha`` and, for the set and its complement,
    estimates the Phase Checking probability of ``|0>|rho_x>``; the first
    estimate above ``1/2 - 11 eps_hat/4`` triggers Phase Reflection with the
    same walk. ``cache`` may be shared across trials of one instance.
    """
    if not 0 < eps < 1 or not 0 < p < 1:
        raise InvalidInputError("eps and p must lie in (0, 1)")
    x = as_input(x, cvs.n, cvs.q)
    cache = {} if cache is None else cache
    eps_hat = eps**2 / 9
    W = cvs.W
    rounds = probe_rounds(W)
    ae_fail = p / max(1, math.ceil(math.log2(W))) if W > 1 else p
    comp = cache.setdefault("complement", complement(cvs))
    start = start_state(cvs, gp, x)
    target = target_state(cvs, gp, x)
    ledger = QueryLedger()
    trace = []

    def walk(which, alpha):
        key = (which, x, alpha)
        if key not in cache:
            cache[key] = conversion_unitary(cvs if which == "P" else comp, gp, x, alpha, eps_hat)
        return cache[key]

    choice = None
    for i in range(rounds):
        alpha = float(2**i)
        Theta = conversion_precision(eps_hat, alpha, W)
        cfg = plan_qpe(Theta, eps_hat**2)
        for which in ("P", "PC"):
            U = walk(which, alpha)
            a = checking_probability(U.eigensystem, start, cfg)
            est = amplitude_estimation_sim(
                a, eps_hat / 4, ae_fail, cfg.checking_cost(2), rng, ledger, label=f"probe_{which}"
            )
            trace.append((i, which, est))
            if est - 0.5 > -2.75 * eps_hat:
                choice = (which, alpha)
                break
        if choice is not None:
            break
    exhausted = choice is None
    if exhausted:
        choice = ("PC", float(2 ** (rounds - 1)))
    which, alpha = choice
    U = walk(which, alpha)
    rcfg = plan_qpe(conversion_precision(eps_hat, alpha, W), eps_hat**2, reflection=True)
    dist = reflection_distance(U.eigensystem, start, target, rcfg, ledger, label="reflect")
    return ConvertResult(dist, alpha, which == "PC", ledger, trace, exhausted)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    value: float
    bound: float
    status: str  # "pass", "fail" or "skipped"


def conversion_bounds(cvs: ConvertingVectorSet, gp: GramPair, x, alpha: float, eps_hat: float) -> list:
    """Compare exact simulation against the four conversion-stage guarantees.

    (a) ``‖P_Theta t_x-‖^2 <= eps_hat^2/2``
    (b) if ``alpha >= w+(x)``: zero-outcome probability of ``|0>|rho_x>`` at least ``(1 - 5 eps_hat)/2``
    (c) if that probability is at least ``1/2 - 3 eps_hat``: ``‖Pi0-bar t_x+ |0>‖^2 <= 10 eps_hat``
    (d) under the same condition: reflection distance at most ``6 sqrt(eps_hat)``
    """
    x = as_input(x, cvs.n, cvs.q)
    W = cvs.W
    U = conversion_unitary(cvs, gp, x, alpha, eps_hat)
    es = U.eigensystem
    space = conversion_space(cvs, gp)
    Theta = conversion_precision(eps_hat, alpha, W)
    cfg: QpeConfig = plan_qpe(Theta, eps_hat**2)
    out = []

    t_minus = space.t_vector(gp, x, -1)
    low = es.coefficients(t_minus)[np.abs(es.phases) <= Theta]
    a_val = float(np.sum(np.abs(low) ** 2))
    out.append(_bound("a", a_val, eps_hat**2 / 2, True, upper=True))

    start = start_state(cvs, gp, x)
    p0 = checking_probability(es, start, cfg)
    out.append(_bound("b", p0, 0.5 * (1 - 5 * eps_hat), alpha >= cvs.w_plus(x), upper=False))

    hyp = p0 >= 0.5 - 3 * eps_hat
    leak = 1 - checking_probability(es, space.t_vector(gp, x, +1), cfg)
    out.append(_bound("c", leak, 10 * eps_hat, hyp, upper=True))

    rcfg = plan_qpe(Theta, eps_hat**2, reflection=True)
    dist = reflection_distance(es, start, target_state(cvs, gp, x), rcfg)
    out.append(_bound("d", dist, 6 * math.sqrt(eps_hat), hyp, upper=True))
    return out


def _bound(name, value, bound, applies, upper) -> BoundCheck:
    if not applies:
        return BoundCheck(name, float(value), float(bound), "skipped")
    ok = value <= bound + 1e-12 if upper else value >= bound - 1e-12
    return BoundCheck(name, float(value), float(bound), "pass" if ok else "fail")
