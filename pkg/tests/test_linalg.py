import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from realshadows.linalg import (
    ResourceLimitError,
    adjoint,
    antisym_part,
    hs_inner,
    identity,
    kron,
    norm2,
    norm_inf,
    operators_close,
    partial_trace_first,
    sym_part,
    trace,
    traceless_part,
    transpose,
)
from realshadows.pauli import I2, X, Y, Z

ATOL = 1e-12


def _random_matrix(seed: int, d: int) -> np.ndarray:
    g = np.random.default_rng(seed)
    return g.standard_normal((d, d)) + 1j * g.standard_normal((d, d))


def _kron_oracle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Naive quadruple-loop Kronecker product."""
    da, db = a.shape[0], b.shape[0]
    out = np.zeros((da * db, da * db), dtype=complex)
    for i in range(da):
        for j in range(da):
            for k in range(db):
                for l in range(db):
                    out[i * db + k, j * db + l] = a[i, j] * b[k, l]
    return out


def _ptrace_oracle(a: np.ndarray, d1: int) -> np.ndarray:
    """Brute-force index-sum partial trace over the first factor."""
    d2 = a.shape[0] // d1
    out = np.zeros((d2, d2), dtype=complex)
    for i in range(d1):
        for j in range(d2):
            for k in range(d2):
                out[j, k] += a[i * d2 + j, i * d2 + k]
    return out


class TestKron:
    def test_identity_case(self):
        assert operators_close(kron(I2, I2), identity(4))

    def test_diagonal_product(self):
        assert operators_close(kron(Z, Z), np.diag([1, -1, -1, 1]))

    def test_index_formula_against_naive_loop(self):
        a, b = _random_matrix(0, 2), _random_matrix(1, 3)
        assert operators_close(kron(a, b), _kron_oracle(a, b), atol=ATOL)
        # frozen entry from the oracle: kron(X, Z)[0, 2] = X[0,1] * Z[0,0]
        assert kron(X, Z)[0, 2] == 1.0

    def test_dimension_limit(self):
        with pytest.raises(ResourceLimitError):
            kron(identity(128), identity(128))
        assert kron(identity(100), identity(2), max_dim=200).shape == (200, 200)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_associative(self, seed):
        a = _random_matrix(seed, 2)
        b = _random_matrix(seed + 1, 2)
        c = _random_matrix(seed + 2, 3)
        assert operators_close(kron(kron(a, b), c), kron(a, kron(b, c)), atol=ATOL)


class TestPartialTrace:
    def test_factorized_input(self):
        rho = _random_matrix(3, 2)
        b = _random_matrix(4, 3)
        assert operators_close(
            partial_trace_first(kron(rho, b), 2), np.trace(rho) * b, atol=ATOL
        )

    def test_identity(self):
        assert operators_close(partial_trace_first(identity(4), 2), 2 * identity(2))

    def test_swap_against_brute_force(self):
        swap = np.zeros((4, 4), dtype=complex)
        for i in range(2):
            for j in range(2):
                swap[j * 2 + i, i * 2 + j] = 1.0
        assert operators_close(partial_trace_first(swap, 2), _ptrace_oracle(swap, 2))
        assert operators_close(partial_trace_first(swap, 2), identity(2))

    def test_non_divisible_dimension(self):
        with pytest.raises(ValueError):
            partial_trace_first(identity(6), 4)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6), st.sampled_from([2, 3, 4]))
    def test_preserves_trace(self, seed, d1):
        m = _random_matrix(seed, d1 * 3)
        assert abs(np.trace(partial_trace_first(m, d1)) - np.trace(m)) < ATOL


class TestBasicOps:
    def test_transpose_paulis(self):
        assert operators_close(transpose(Y), -Y)
        assert operators_close(transpose(X), X)

    def test_adjoint_of_unitary(self):
        theta = 0.7
        u = np.array(
            [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]],
            dtype=complex,
        )
        assert operators_close(adjoint(u) @ u, identity(2))

    def test_norms_and_inner(self):
        assert norm2(kron(Z, Z)) == pytest.approx(2.0, abs=ATOL)
        assert norm_inf(Z) == pytest.approx(1.0, abs=ATOL)
        assert abs(hs_inner(X, Y)) < ATOL
        assert trace(identity(3)) == pytest.approx(3.0)

    def test_norm_inf_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            norm_inf(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_norm2_matches_entry_sum_for_hermitian(self):
        m = _random_matrix(11, 4)
        h = m + m.conj().T
        assert norm2(h) ** 2 == pytest.approx(float(np.sum(np.abs(h) ** 2)), rel=1e-12)


class TestSymmetrySplits:
    def test_pauli_examples(self):
        assert operators_close(sym_part(Y), np.zeros((2, 2)))
        assert operators_close(antisym_part(X), np.zeros((2, 2)))
        proj0 = np.diag([1.0, 0.0]).astype(complex)
        assert operators_close(traceless_part(proj0), Z / 2)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_split_properties(self, seed):
        a = _random_matrix(seed, 4)
        b = _random_matrix(seed + 7, 4)
        assert operators_close(sym_part(a) + antisym_part(a), a, atol=ATOL)
        assert operators_close(sym_part(sym_part(a)), sym_part(a), atol=ATOL)
        assert abs(hs_inner(sym_part(a), antisym_part(b))) < 1e-10
