import numpy as np
import pytest
import scipy.linalg

from lindbladsim import (
    ArgumentError,
    Lindbladian,
    ModelError,
    amplitude_damping,
    be_norm,
    choi,
    dag,
    drift_generator_matrix,
    drift_semigroup,
    effective_generator,
    exact_channel,
    jump_superoperator,
    kraus_superop,
    liouvillian_matrix,
    random_lindbladian,
    spectral_norm,
    unvec,
    vec,
)

SZ = np.diag([1.0, -1.0]).astype(complex)


def random_density(rng, d):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = A @ dag(A)
    return rho / np.trace(rho)


def apply_lindblad_direct(lind, rho):
    H = lind.hamiltonian
    out = -1j * (H @ rho - rho @ H)
    for L in lind.jumps:
        LdL = dag(L) @ L
        out += L @ rho @ dag(L) - 0.5 * (LdL @ rho + rho @ LdL)
    return out


def test_effective_generator_amplitude_damping():
    lind = amplitude_damping(gamma=1.0)
    expected = -0.5 * np.diag([0.0, 1.0]).astype(complex)
    np.testing.assert_allclose(effective_generator(lind), expected, atol=1e-14)


def test_effective_generator_no_jumps():
    lind = Lindbladian(SZ)
    np.testing.assert_allclose(effective_generator(lind), -1j * SZ, atol=1e-15)


def test_effective_generator_matches_formula():
    lind = random_lindbladian(2, num_jumps=3, seed=5)
    H = lind.hamiltonian
    acc = -1j * H
    for L in lind.jumps:
        acc = acc - 0.5 * (dag(L) @ L)
    np.testing.assert_allclose(effective_generator(lind), acc, atol=1e-13)


def test_effective_generator_dissipative():
    for seed in range(6):
        lind = random_lindbladian(1, num_jumps=2, seed=seed)
        eigs = np.linalg.eigvals(effective_generator(lind))
        assert np.max(eigs.real) <= 1e-12


def test_rejects_non_hermitian_hamiltonian():
    H = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ModelError):
        Lindbladian(H)


def test_symmetrizes_near_hermitian_hamiltonian():
    H = SZ + 1e-14 * np.array([[0, 1j], [0, 0]])
    lind = Lindbladian(H)
    np.testing.assert_allclose(lind.hamiltonian, dag(lind.hamiltonian), atol=0)


def test_rejects_undersized_declared_bounds():
    with pytest.raises(ModelError):
        Lindbladian(SZ, alpha0=0.5)
    with pytest.raises(ModelError):
        Lindbladian(np.zeros((2, 2)), jumps=[SZ], alphas=[0.1])


def test_be_norm_plug_ins():
    Z4 = np.zeros((4, 4))
    I4 = np.eye(4)
    assert be_norm(Lindbladian(Z4, jumps=[2 * I4], alpha0=1.0)) == pytest.approx(3.0)
    assert be_norm(Lindbladian(Z4, alpha0=0.0)) == pytest.approx(0.0)
    lind = Lindbladian(Z4, jumps=[I4, I4], alpha0=0.5)
    assert be_norm(lind) == pytest.approx(1.5)


def test_liouvillian_trivial_model_is_zero():
    lind = Lindbladian(np.zeros((2, 2)))
    np.testing.assert_allclose(liouvillian_matrix(lind), np.zeros((4, 4)), atol=0)


def test_liouvillian_amplitude_damping_action():
    lind = amplitude_damping(gamma=1.0)
    Lhat = liouvillian_matrix(lind)
    rho1 = np.diag([0.0, 1.0]).astype(complex)
    out = unvec(Lhat @ vec(rho1))
    np.testing.assert_allclose(out, np.diag([1.0, -1.0]), atol=1e-14)


def test_liouvillian_matches_direct_application():
    rng = np.random.default_rng(3)
    lind = random_lindbladian(2, num_jumps=2, seed=3)
    Lhat = liouvillian_matrix(lind)
    for _ in range(20):
        rho = random_density(rng, 4)
        direct = apply_lindblad_direct(lind, rho)
        np.testing.assert_allclose(unvec(Lhat @ vec(rho)), direct, atol=1e-12)


def test_exact_channel_identity_at_zero():
    lind = random_lindbladian(1, num_jumps=1, seed=0)
    np.testing.assert_allclose(exact_channel(lind, 0.0), np.eye(4), atol=1e-14)


def test_exact_channel_amplitude_damping_population():
    lind = amplitude_damping(gamma=1.0)
    rho0 = np.array([[0.3, 0.2], [0.2, 0.7]], dtype=complex)
    rho1 = unvec(exact_channel(lind, 1.0) @ vec(rho0))
    assert abs(rho1[1, 1] - np.exp(-1.0) * rho0[1, 1]) <= 1e-12


def test_exact_channel_rejects_negative_time():
    with pytest.raises(ArgumentError):
        exact_channel(amplitude_damping(), -0.1)


def test_exact_channel_matches_rk4():
    lind = random_lindbladian(2, num_jumps=1, seed=9)
    Lhat = liouvillian_matrix(lind)
    t, h = 0.3, 1e-4
    V = np.eye(Lhat.shape[0], dtype=complex)
    steps = round(t / h)
    for _ in range(steps):
        k1 = Lhat @ V
        k2 = Lhat @ (V + 0.5 * h * k1)
        k3 = Lhat @ (V + 0.5 * h * k2)
        k4 = Lhat @ (V + h * k3)
        V = V + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    np.testing.assert_allclose(exact_channel(lind, t), V, atol=1e-8)


def test_drift_semigroup_identity_at_zero():
    lind = amplitude_damping()
    np.testing.assert_allclose(drift_semigroup(lind, 0.0), np.eye(4), atol=1e-14)


def test_drift_semigroup_two_construction_paths():
    for seed in range(5):
        lind = random_lindbladian(2, num_jumps=2, seed=seed)
        direct = drift_semigroup(lind, 0.8)
        via_generator = scipy.linalg.expm(0.8 * drift_generator_matrix(lind))
        np.testing.assert_allclose(direct, via_generator, atol=1e-11)


def test_drift_semigroup_closed_dynamics_full_period():
    lind = Lindbladian(SZ)
    S = drift_semigroup(lind, np.pi)
    # e^{-i pi sz} = -I, and the global phase cancels in the channel
    np.testing.assert_allclose(S, np.eye(4), atol=1e-12)


def test_jump_superoperator_empty_and_identity():
    lind = Lindbladian(np.zeros((2, 2)))
    np.testing.assert_allclose(jump_superoperator(lind), np.zeros((4, 4)), atol=0)
    lind_id = Lindbladian(np.zeros((2, 2)), jumps=[np.eye(2)])
    np.testing.assert_allclose(jump_superoperator(lind_id), np.eye(4), atol=1e-15)


def test_generator_recombination():
    for seed in range(8):
        lind = random_lindbladian(2, num_jumps=2, seed=seed)
        total = drift_generator_matrix(lind) + jump_superoperator(lind)
        np.testing.assert_allclose(total, liouvillian_matrix(lind), atol=1e-12)


def test_exact_channel_is_trace_preserving():
    for seed in range(4):
        lind = random_lindbladian(1, num_jumps=2, seed=seed)
        for t in (0.2, 1.0):
            C = choi(exact_channel(lind, t))
            d = lind.dim
            tp = np.einsum("kikj->ij", C.reshape(d, d, d, d))
            np.testing.assert_allclose(tp, np.eye(d), atol=1e-10)


def test_exact_channel_is_completely_positive():
    for seed in range(4):
        lind = random_lindbladian(2, num_jumps=1, seed=seed)
        C = choi(exact_channel(lind, 0.7))
        eigs = np.linalg.eigvalsh((C + dag(C)) / 2)
        assert eigs.min() >= -1e-10


def test_semigroup_property():
    lind = random_lindbladian(2, num_jumps=2, seed=21)
    for s, t in ((0.1, 0.4), (0.5, 0.5), (0.3, 1.1)):
        lhs = exact_channel(lind, s) @ exact_channel(lind, t)
        np.testing.assert_allclose(lhs, exact_channel(lind, s + t), atol=1e-9)


def test_generator_norm_below_be_norm():
    for seed in range(10):
        lind = random_lindbladian(2, num_jumps=3, seed=seed)
        assert spectral_norm(effective_generator(lind)) <= be_norm(lind) + 1e-12


def test_second_power_eight_term_expansion():
    # H = 0, single jump: L^2 applied to rho expands into eight terms
    rng = np.random.default_rng(17)
    lind = random_lindbladian(1, num_jumps=1, seed=17, h_norm=0.0)
    L = lind.jumps[0]
    Ld = dag(L)
    Lhat2 = np.linalg.matrix_power(liouvillian_matrix(lind), 2)
    for _ in range(20):
        rho = random_density(rng, 2)
        expansion = (
            L @ L @ rho @ Ld @ Ld
            - 0.5 * L @ Ld @ L @ rho @ Ld
            - 0.5 * L @ rho @ Ld @ L @ Ld
            - 0.5 * Ld @ L @ L @ rho @ Ld
            + 0.25 * Ld @ L @ Ld @ L @ rho
            - 0.5 * L @ rho @ Ld @ Ld @ L
            + 0.5 * Ld @ L @ rho @ Ld @ L
            + 0.25 * rho @ Ld @ L @ Ld @ L
        )
        np.testing.assert_allclose(unvec(Lhat2 @ vec(rho)), expansion, atol=1e-12)


def test_kraus_superop_convention():
    # column-stacking vec sends K[A] to conj(A) kron A
    rng = np.random.default_rng(2)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    np.testing.assert_allclose(kraus_superop(A), np.kron(A.conj(), A), atol=1e-14)
    rho = random_density(rng, 3)
    np.testing.assert_allclose(unvec(kraus_superop(A) @ vec(rho)),
                               A @ rho @ dag(A), atol=1e-13)
