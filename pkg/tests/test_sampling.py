import numpy as np
import pytest

from realshadows.channels import global_ensemble, local_ensemble
from realshadows.bases import computational_basis
from realshadows.commutant import closed_form_twirl, twirl_project
from realshadows.linalg import identity, kron, operators_close
from realshadows.sampling import (
    REAL_CLIFFORD_1Q,
    RngStream,
    haar_orthogonal,
    haar_orthogonals,
    haar_unitaries,
    haar_unitary,
    real_clifford_1q,
    sample_transform,
    sample_transforms,
)


class TestRngStream:
    def test_identical_streams_replay(self):
        a = haar_unitaries(RngStream(7, 3), 4, 5)
        b = haar_unitaries(RngStream(7, 3), 4, 5)
        assert a.tobytes() == b.tobytes()

    def test_distinct_streams_differ(self):
        a = haar_unitaries(RngStream(7, 3), 4, 1)
        b = haar_unitaries(RngStream(7, 4), 4, 1)
        assert not np.allclose(a, b)

    def test_children_are_deterministic(self):
        a = RngStream(1).child(2).generator.random(4)
        b = RngStream(1).child(2).generator.random(4)
        assert np.array_equal(a, b)


class TestHaarUnitary:
    def test_columns_are_normalized(self):
        u = haar_unitary(RngStream(0), 5)
        assert np.allclose(np.linalg.norm(u, axis=0), 1.0, atol=1e-10)
        assert operators_close(u.conj().T @ u, identity(5))

    def test_fourth_moment_of_entry(self):
        # E|U_11|^4 = 2/(d^2 + d) = 1/3 at d = 2
        us = haar_unitaries(RngStream(1), 2, 100000)
        vals = np.abs(us[:, 0, 0]) ** 4
        se = vals.std(ddof=1) / np.sqrt(len(vals))
        assert abs(vals.mean() - 1.0 / 3.0) < 3 * se

    def test_entrywise_mean_vanishes(self):
        us = haar_unitaries(RngStream(2), 2, 100000)
        mean = us.mean(axis=0)
        se = us.std(axis=0, ddof=1) / np.sqrt(us.shape[0])
        assert np.all(np.abs(mean) < 3 * se)


class TestHaarOrthogonal:
    def test_orthogonality_and_realness(self):
        o = haar_orthogonal(RngStream(3), 6)
        assert operators_close(o.T @ o, identity(6))
        assert not np.iscomplexobj(o)  # imaginary part is exactly zero

    def test_first_moment_twirl(self):
        # The twirl of any rank-1 projector is 1/d by irreducibility.
        os = haar_orthogonals(RngStream(4), 2, 100000)
        pi = np.diag([1.0, 0.0])
        conj = np.einsum("sji,jk,skl->sil", os, pi, os)
        mean = conj.mean(axis=0)
        se = conj.std(axis=0, ddof=1) / np.sqrt(conj.shape[0])
        assert np.all(np.abs(mean - identity(2).real / 2) < 3 * se + 1e-12)


@pytest.mark.parametrize("group", ["O", "U"])
@pytest.mark.parametrize("d", [2, 4])
def test_second_moment_matches_commutant_projection(group, d):
    from realshadows.commutant import mc_twirl

    rng = RngStream(5, (d, ord(group)))
    pi = np.zeros((d, d), dtype=complex)
    pi[0, 0] = 1.0
    pik = kron(pi, pi)
    mc = mc_twirl(rng, pik, group, 2, samples=100000)
    exact = twirl_project(pik, group, 2)
    assert np.all(np.abs(mc.mean - exact) <= 3 * mc.stderr + 1e-12)


class TestRealClifford1q:
    def test_all_elements_real_orthogonal(self):
        assert len(REAL_CLIFFORD_1Q) == 8
        for m in REAL_CLIFFORD_1Q:
            assert operators_close(m.T @ m, identity(2))
            assert not np.iscomplexobj(m)

    def test_group_closure_against_brute_force(self):
        # Oracle: close {H, X, Z} under products inside O(2), then reduce
        # modulo overall sign; the result must be the library's 8 elements.
        h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
        x = np.array([[0.0, 1.0], [1.0, 0.0]])
        z = np.array([[1.0, 0.0], [0.0, -1.0]])

        def canon(m):
            flat = m.reshape(-1)
            idx = int(np.argmax(np.abs(flat) > 1e-9))
            m = -m if flat[idx] < 0 else m
            return tuple(np.round(m, 10).reshape(-1))

        found = {canon(m): m for m in (np.eye(2), h, x, z)}
        changed = True
        while changed:
            changed = False
            for a in list(found.values()):
                for b in list(found.values()):
                    key = canon(a @ b)
                    if key not in found:
                        found[key] = a @ b
                        changed = True
        assert len(found) == 8
        lib = {canon(m) for m in REAL_CLIFFORD_1Q}
        assert set(found) == lib
        # products of any two canonical draws land back in the set (mod sign)
        for a in REAL_CLIFFORD_1Q:
            for b in REAL_CLIFFORD_1Q:
                assert canon(a @ b) in lib

    def test_uniform_sampling(self):
        rng = RngStream(6)
        counts = np.zeros(8)
        draws = 10000
        keys = [tuple(np.round(m, 10).reshape(-1)) for m in REAL_CLIFFORD_1Q]
        for _ in range(draws):
            m = real_clifford_1q(rng)
            counts[keys.index(tuple(np.round(m, 10).reshape(-1)))] += 1
        p = 1.0 / 8.0
        se = np.sqrt(p * (1 - p) / draws)
        assert np.all(np.abs(counts / draws - p) < 3 * se)

    @pytest.mark.parametrize("k", [2, 3])
    @pytest.mark.parametrize("b", [0, 1])
    def test_three_design_twirl_is_exact(self, k, b):
        # Averaging O^dag Pi_b O over the 8 elements reproduces the Haar O(2)
        # moments exactly for k <= 3.
        pi = np.zeros((2, 2), dtype=complex)
        pi[b, b] = 1.0
        pik = kron(*([pi] * k))
        avg = np.zeros((2**k, 2**k), dtype=complex)
        for o in REAL_CLIFFORD_1Q:
            ok = o
            for _ in range(k - 1):
                ok = np.kron(ok, o)
            avg += ok.T @ pik @ ok
        avg /= len(REAL_CLIFFORD_1Q)
        assert np.max(np.abs(avg - closed_form_twirl(1.0, 2, k))) < 1e-12


class TestSampleTransform:
    def test_local_orthogonal_shapes(self):
        spec = local_ensemble("orthogonal", 3)
        t = sample_transform(RngStream(8), spec)
        assert t.kind == "local"
        assert len(t.factors) == 3
        for f in t.factors:
            assert f.shape == (2, 2)
            assert np.max(np.abs(f.imag)) < 1e-12
            assert operators_close(f.conj().T @ f, identity(2))

    def test_global_unitary_shape(self):
        spec = global_ensemble("unitary", computational_basis(2))
        t = sample_transform(RngStream(9), spec)
        assert t.kind == "global"
        assert t.factors[0].shape == (4, 4)
        assert operators_close(t.factors[0].conj().T @ t.factors[0], identity(4))

    def test_per_qubit_mixing(self):
        spec = local_ensemble(("unitary", "orthogonal"), 2)
        ts = sample_transforms(RngStream(10), spec, 50)
        complex_seen = False
        for t in ts:
            assert np.max(np.abs(t.factors[1].imag)) < 1e-12
            complex_seen = complex_seen or np.max(np.abs(t.factors[0].imag)) > 1e-6
        assert complex_seen  # the unitary factor actually explores U(2)

    def test_reproducible_byte_for_byte(self):
        spec = local_ensemble("orthogonal", 2)
        a = sample_transforms(RngStream(11), spec, 3)
        b = sample_transforms(RngStream(11), spec, 3)
        for ta, tb in zip(a, b):
            for fa, fb in zip(ta.factors, tb.factors):
                assert fa.tobytes() == fb.tobytes()
