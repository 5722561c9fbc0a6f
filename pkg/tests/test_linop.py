import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyqubit.errors import ContractError, SizingError, StructureError
from polyqubit.linop import (
    SIGMA_X,
    SIGMA_Z,
    StateVector,
    expm,
    fidelity,
    kron,
    partial_trace,
    reduced_states,
    trace_distance,
    unitarity_error,
)


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_ket(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_x_identity_block_structure(self):
        out = kron(SIGMA_X, np.eye(2))
        assert np.array_equal(out[:2, :2], np.zeros((2, 2)))
        assert np.array_equal(out[:2, 2:], np.eye(2))
        assert np.array_equal(out[2:, :2], np.eye(2))

    def test_zz_diagonal(self):
        assert np.array_equal(kron(SIGMA_Z, SIGMA_Z), np.diag([1, -1, -1, 1]))

    def test_size_cap(self):
        with pytest.raises(SizingError):
            kron(np.eye(256), np.eye(257))

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_associative_on_integer_matrices(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (rng.integers(-3, 4, size=(n, n)) for n in (2, 3, 2))
        assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))


class TestExpm:
    def test_zero_time(self):
        assert np.allclose(expm(SIGMA_Z, 0.0), np.eye(2), atol=0)

    def test_pauli_pi(self):
        assert np.abs(expm(SIGMA_X, np.pi) + np.eye(2)).max() < 1e-15

    def test_pauli_half_pi(self):
        assert np.abs(expm(SIGMA_X, np.pi / 2) + 1j * SIGMA_X).max() < 1e-15

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractError):
            expm(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)

    def test_rejects_non_square(self):
        with pytest.raises(StructureError):
            expm(np.zeros((2, 3)), 1.0)

    @given(st.integers(0, 10_000), st.integers(1, 16), st.floats(-5, 5), st.floats(-5, 5))
    @settings(max_examples=40, deadline=None)
    def test_group_property_and_unitarity(self, seed, d, t1, t2):
        h = random_hermitian(np.random.default_rng(seed), d)
        u1, u2 = expm(h, t1), expm(h, t2)
        assert np.abs(u1 @ u2 - expm(h, t1 + t2)).max() < 1e-10
        assert unitarity_error(u1) < 1e-12

    def test_matches_taylor_series(self):
        # independent check: truncated series for a small generator
        h = random_hermitian(np.random.default_rng(3), 5) * 0.1
        series = np.eye(5, dtype=complex)
        term = np.eye(5, dtype=complex)
        for k in range(1, 30):
            term = term @ (-1j * h) / k
            series = series + term
        assert np.abs(expm(h, 1.0) - series).max() < 1e-13


class TestPartialTrace:
    def test_product_state(self):
        psi = StateVector(np.array([1, 0, 0, 0]), (2, 2))
        assert np.allclose(partial_trace(psi, [0]), np.diag([1, 0]))

    def test_bell_state(self):
        bell = StateVector(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2))
        assert np.abs(partial_trace(bell, [0]) - np.eye(2) / 2).max() < 1e-15

    def test_factorised_keeps_second(self):
        rng = np.random.default_rng(0)
        a, b = random_ket(rng, 2), random_ket(rng, 3)
        out = partial_trace(StateVector(np.kron(a, b), (2, 3)), [1])
        assert np.abs(out - np.outer(b, b.conj())).max() < 1e-15

    def test_missing_dims(self):
        with pytest.raises(StructureError):
            partial_trace(np.ones(4) / 2, [0])

    def test_bad_keep(self):
        with pytest.raises(StructureError):
            partial_trace(StateVector(np.ones(4) / 2, (2, 2)), [2])

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_stages_and_full_trace(self, seed):
        rng = np.random.default_rng(seed)
        dims = (2, 3, 2)
        psi = random_ket(rng, 12) * 0.7
        full = partial_trace(psi, [], dims)
        assert full.shape == (1, 1)
        assert abs(full[0, 0] - 0.49) < 1e-12
        once = partial_trace(psi, [0], dims)
        rho02 = partial_trace(psi, [0, 2], dims)
        twice = partial_trace(rho02, [0], (2, 2))
        assert np.abs(once - twice).max() < 1e-12
        assert abs(np.trace(rho02) - 0.49) < 1e-12

    def test_density_input_matches_ket_input(self):
        rng = np.random.default_rng(5)
        psi = random_ket(rng, 12)
        dims = (3, 2, 2)
        for keep in ([0], [1], [2], [0, 2], [1, 2]):
            a = partial_trace(psi, keep, dims)
            b = partial_trace(np.outer(psi, psi.conj()), keep, dims)
            assert np.abs(a - b).max() < 1e-14

    def test_batched_matches_single(self):
        rng = np.random.default_rng(9)
        kets = np.array([random_ket(rng, 16) for _ in range(5)]).T
        batch = reduced_states(kets, (2, 2, 2, 2), [1, 3])
        for j in range(5):
            single = partial_trace(kets[:, j], [1, 3], (2, 2, 2, 2))
            assert np.abs(batch[j] - single).max() < 1e-14


class TestFidelity:
    def test_pure_self(self):
        psi = random_ket(np.random.default_rng(1), 4)
        assert fidelity(np.outer(psi, psi.conj()), psi) == pytest.approx(1, abs=1e-12)

    def test_orthogonal(self):
        assert fidelity(np.diag([1, 0]).astype(complex), np.array([0, 1])) == 0

    def test_maximally_mixed(self):
        psi = random_ket(np.random.default_rng(2), 2)
        assert fidelity(np.eye(2) / 2, psi) == pytest.approx(0.5, abs=1e-12)

    def test_global_phase_invariance(self):
        rng = np.random.default_rng(4)
        psi, phi = random_ket(rng, 4), random_ket(rng, 4)
        rho = 0.3 * np.outer(psi, psi.conj()) + 0.7 * np.outer(phi, phi.conj())
        assert fidelity(rho, psi) == pytest.approx(fidelity(rho, np.exp(1.3j) * psi), abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(StructureError):
            fidelity(np.eye(2) / 2, np.ones(4) / 2)

    def test_rejects_non_density(self):
        with pytest.raises(ContractError):
            fidelity(np.eye(2), np.array([1, 0]))
        with pytest.raises(ContractError):
            fidelity(np.diag([1.5, -0.5]), np.array([1, 0]))


def test_trace_distance_orthogonal_states():
    assert trace_distance(np.diag([1, 0]), np.diag([0, 1])) == pytest.approx(1)


def test_statevector_checks_dims():
    with pytest.raises(StructureError):
        StateVector(np.ones(4), (2, 3))
