import math
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spanq import kernels
from spanq.linalg import UnitaryEigensystem, eig_unitary
from spanq.qpe import (
    QpeConfig,
    QueryLedger,
    amplitude_estimation_sim,
    checking_probability,
    copy_circuit,
    leak_bound,
    one_copy_amplitudes,
    plan_qpe,
    reflect,
    reflection_distance,
    return_amplitudes,
    walsh_hadamard,
    _hadamard_signs,
)


def fixed_config(T, c, eps=0.5):
    return QpeConfig(theta=math.pi / 2, eps=eps, t=int(math.log2(T)), T=T, c=c, leak=leak_bound(T, math.pi / 2))


def diag_system(phases, qpa=1):
    return UnitaryEigensystem(np.asarray(phases, float), np.eye(len(phases), dtype=complex), qpa)


# independent oracle: the full circuit on system ⊗ c copy registers
def dense_D(U, T, c):
    n = U.shape[0]
    H = _hadamard_signs(T) / math.sqrt(T)
    k = np.arange(T)
    finv = np.exp(-2j * np.pi * np.outer(k, k) / T) / math.sqrt(T)
    powers = [np.linalg.matrix_power(U, j) for j in range(T)]
    ctrl = np.zeros((n * T, n * T), dtype=complex)
    for j in range(T):
        proj = np.zeros((T, T))
        proj[j, j] = 1
        ctrl += np.kron(powers[j], proj)
    one = np.kron(np.eye(n), finv) @ ctrl @ np.kron(np.eye(n), H)
    D = np.eye(n * T**c, dtype=complex)
    for i in range(c):
        # act on copy register i; registers ordered system, copy0, copy1, ...
        left, right = T**i, T ** (c - 1 - i)
        perm = np.arange(n * T**c).reshape(n, left, T, right).transpose(1, 3, 0, 2).reshape(-1)
        big = np.kron(np.eye(left * right), one)
        P = np.eye(n * T**c)[perm]
        D = P.T @ big @ P @ D
    return D


def random_unitary(n, rng):
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return Q


def zero_ancilla(n, T, c):
    return np.kron(np.eye(n), np.eye(T**c)[:, [0]])


def test_plan_examples():
    cfg = plan_qpe(math.pi / 2, 0.9)
    assert (cfg.t, cfg.T) == (1, 2)
    cfg = plan_qpe(1 / 8, 0.01)
    beta = leak_bound(16, 1 / 8)
    assert cfg.T == 16
    assert beta**cfg.c <= 0.01 < beta ** (cfg.c - 1)


def test_plan_rejects_bad_precision():
    with pytest.raises(ValueError):
        plan_qpe(math.pi, 0.1)
    with pytest.raises(ValueError):
        plan_qpe(0.1, 1.0)


def test_leak_bound_matches_dense_grid():
    for T, th in [(4, 0.5), (16, 1 / 8), (64, 0.05)]:
        grid = np.linspace(th, math.pi, 200_001)
        dense = np.max(np.abs(np.exp(1j * np.outer(grid, np.arange(T))).mean(axis=1)) ** 2)
        assert leak_bound(T, th) >= dense - 1e-9
        assert leak_bound(T, th) <= dense + 1e-6


def test_one_copy_examples():
    assert np.allclose(one_copy_amplitudes(0.0, 8), np.eye(8)[0])
    assert np.allclose(one_copy_amplitudes(2 * np.pi / 8, 8), np.eye(8)[1])
    assert np.allclose(one_copy_amplitudes(np.pi, 2), [0, 1])
    with pytest.raises(ValueError):
        one_copy_amplitudes(0.1, 6)


@settings(max_examples=50, deadline=None)
@given(st.floats(-math.pi, math.pi), st.sampled_from([2, 4, 8, 32, 256]))
def test_one_copy_matches_circuit(theta, T):
    h = one_copy_amplitudes(theta, T)
    assert abs(np.linalg.norm(h) - 1) <= 1e-10
    if T <= 32:
        assert np.allclose(h, copy_circuit(theta, T)[:, 0], atol=1e-12)
        assert np.allclose(return_amplitudes(theta, T), copy_circuit(theta, T)[0].conj(), atol=1e-12)
    assert np.isclose(return_amplitudes(theta, T)[0], np.conj(h[0]))


def test_walsh_hadamard_matches_dense():
    v = np.random.default_rng(1).normal(size=16)
    assert np.allclose(walsh_hadamard(v), _hadamard_signs(16) @ v)


def test_checking_examples():
    es = diag_system([0.0, np.pi])
    cfg = fixed_config(2, 1)
    assert checking_probability(es, np.array([1, 0]), cfg) == pytest.approx(1.0)
    assert checking_probability(es, np.array([0, 1]), cfg) == pytest.approx(0.0)
    assert checking_probability(es, np.array([1, 1]) / math.sqrt(2), cfg) == pytest.approx(0.5)


def test_checking_charges_ledger():
    es = diag_system([0.0, 1.0], qpa=2)
    cfg = fixed_config(8, 3)
    led = QueryLedger()
    checking_probability(es, np.array([1, 0]), cfg, led, label="x")
    assert led.breakdown["x"] == 3 * 7 * 2 == led.total_queries
    reflection_distance(es, np.array([1, 0]), np.array([1, 0]), cfg, led, label="r")
    assert led.breakdown["r"] == 2 * 3 * 7 * 2
    assert led.as_string() == "r=84;x=42"


def test_checking_rejects_bad_input():
    es = diag_system([0.0, 1.0])
    with pytest.raises(ValueError):
        checking_probability(es, np.array([1, 0, 0]), fixed_config(2, 1))
    with pytest.raises(ValueError):
        checking_probability(es, np.array([1, 1]), fixed_config(2, 1))


@pytest.mark.parametrize("T,c", [(2, 1), (4, 1), (2, 2), (4, 2)])
def test_checking_and_reflection_match_dense_circuit(T, c):
    rng = np.random.default_rng(T * 10 + c)
    n = 3
    U = random_unitary(n, rng)
    es = eig_unitary(U)
    cfg = fixed_config(T, c)
    D = dense_D(U, T, c)
    Z = zero_ancilla(n, T, c)
    pi0 = Z @ Z.conj().T
    R = D.conj().T @ (2 * pi0 - np.eye(n * T**c)) @ D
    for _ in range(3):
        psi = rng.normal(size=n) + 1j * rng.normal(size=n)
        psi /= np.linalg.norm(psi)
        tgt = rng.normal(size=n) + 1j * rng.normal(size=n)
        tgt /= np.linalg.norm(tgt)
        full = D @ Z @ psi
        assert checking_probability(es, psi, cfg) == pytest.approx(np.linalg.norm(pi0 @ full) ** 2, abs=1e-10)
        out = R @ Z @ psi
        assert reflection_distance(es, psi, tgt, cfg) == pytest.approx(np.linalg.norm(out - Z @ tgt), abs=1e-9)
        assert reflect(es, psi, cfg).norm() == pytest.approx(1.0, abs=1e-8)


def test_reflection_examples():
    es = diag_system([0.0, np.pi])
    cfg = plan_qpe(math.pi / 2, 0.1, reflection=True)
    e0, e1 = np.eye(2)
    assert reflection_distance(es, e0, e0, cfg) <= 1e-8
    assert reflection_distance(es, e1, -e1, cfg) <= cfg.eps
    mix = (e0 + e1) / math.sqrt(2)
    assert reflection_distance(es, mix, (e0 - e1) / math.sqrt(2), cfg) <= cfg.eps / math.sqrt(2) + 1e-8


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**31 - 1), st.floats(0.05, 1.0), st.floats(0.01, 0.5))
def test_sandwich_and_leak(n, seed, theta, eps):
    rng = np.random.default_rng(seed)
    ph = rng.uniform(-np.pi, np.pi, n)
    ph[0] = 0.0
    es = diag_system(ph)
    cfg = plan_qpe(theta, eps)
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    psi /= np.linalg.norm(psi)
    w = np.abs(psi) ** 2
    p = checking_probability(es, psi, cfg)
    assert 0 <= p <= 1
    assert w[ph == 0].sum() - 1e-12 <= p <= w[np.abs(ph) <= theta].sum() + eps + 1e-12
    high = np.abs(ph) > theta
    if high.any():
        v = np.where(high, psi, 0)
        v /= np.linalg.norm(v)
        assert checking_probability(es, v, cfg) <= eps + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1), st.floats(0.05, 1.0), st.floats(0.01, 0.5))
def test_reflection_on_high_phases_is_near_minus_identity(n, seed, theta, eps):
    rng = np.random.default_rng(seed)
    ph = rng.uniform(theta, np.pi, n) * rng.choice([-1, 1], n)
    es = diag_system(ph)
    cfg = plan_qpe(theta, eps, reflection=True)
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    psi /= np.linalg.norm(psi)
    assert reflection_distance(es, psi, -psi, cfg) <= eps + 1e-12


def test_zero_phase_reflection_is_exact():
    es = diag_system([0.0, 0.0, 1.0])
    cfg = plan_qpe(0.3, 0.01)
    v = np.array([0.6, 0.8, 0])
    assert reflection_distance(es, v, v, cfg) <= 1e-8


def test_amplitude_estimation_contract():
    rng = np.random.default_rng(0)
    led = QueryLedger()
    vals = [amplitude_estimation_sim(0.5, 0.01, 1e-9, 3, rng, led) for _ in range(200)]
    assert all(0.49 <= v <= 0.51 for v in vals)
    led = QueryLedger()
    amplitude_estimation_sim(0.3, 0.1, 0.1, 7, rng, led)
    assert led.total_queries == 100 * 7
    assert all(0 <= amplitude_estimation_sim(0.0, 0.05, 1e-9, 1, rng) <= 0.05 for _ in range(100))


def test_amplitude_estimation_failure_rate():
    rng = np.random.default_rng(5)
    far = sum(abs(amplitude_estimation_sim(0.5, 0.01, 0.3, 1, rng) - 0.5) > 0.01 for _ in range(4000))
    # failures are uniform on [0, 1], so 98% of them land outside the band
    assert 0.3 * 0.98 * 4000 * 0.85 < far < 0.3 * 0.98 * 4000 * 1.15


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-math.pi, math.pi), min_size=1, max_size=50), st.sampled_from([2, 8, 64, 1024]), st.integers(1, 9))
def test_backends_agree(phases, T, c):
    from spanq import _fejer_py

    ph = np.array(phases)
    assert np.allclose(kernels.fejer_power(ph, T, c), _fejer_py.fejer_power(ph, T, c), atol=1e-14)
    assert np.allclose(kernels.one_copy_amplitudes(ph[0], T), _fejer_py.one_copy_amplitudes(ph[0], T), atol=1e-13)
    th = min(abs(ph[0]) + 1e-3, 3.0)
    assert kernels.leak_bound(T, th, 10 * T + 1) == pytest.approx(_fejer_py.leak_bound(T, th, 10 * T + 1), abs=1e-13)


@pytest.mark.skipif(os.environ.get("SPANQ_PURE_PYTHON", "") in ("1", "true", "yes"), reason="fallback forced")
def test_compiled_backend_is_active():
    pytest.importorskip("spanq._fejer")
    assert kernels.BACKEND == "cython"
