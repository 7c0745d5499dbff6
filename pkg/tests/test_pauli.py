import numpy as np
import pytest

from realshadows.linalg import kron, operators_close
from realshadows.pauli import PAULIS, PauliString, X, Z


def test_from_string_round_trip():
    p = PauliString.from_string("xzi")
    assert p.letters == ("X", "Z", "I")
    assert p.n == 3
    assert str(p) == "XZI"


def test_weight_support_locality():
    p = PauliString.from_string("IXZY")
    assert p.weight == 3
    assert p.support == (1, 2, 3)
    assert not p.locally_real
    assert p.y_count() == 1
    assert PauliString.from_string("IXZ").locally_real


def test_to_matrix_matches_kron():
    p = PauliString.from_string("XZ", coefficient=2.0)
    assert operators_close(p.to_matrix(), 2.0 * kron(X, Z))


def test_rejects_bad_letters():
    with pytest.raises(ValueError):
        PauliString.from_string("XA")
    with pytest.raises(ValueError):
        PauliString(())


def test_pauli_matrices_square_to_identity():
    for letter, mat in PAULIS.items():
        assert operators_close(mat @ mat, np.eye(2)), letter
