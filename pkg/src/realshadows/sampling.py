"""Seeded sampling of Haar-random unitary / orthogonal matrices and local products.

All randomness flows through RngStream, a thin reproducible wrapper over
numpy's PCG64 keyed by (seed, stream path).  Haar sampling uses the QR
decomposition of a Ginibre matrix with the diagonal phase (sign) correction;
without that correction QR output is not Haar distributed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # import only for annotations; avoids a module cycle
    from .channels import EnsembleSpec

#: Recorded in experiment metadata for reproducibility.
RNG_ALGORITHM = "numpy PCG64 seeded by SeedSequence((seed, *stream_id))"

_MASK64 = (1 << 64) - 1


class RngStream:
    """Reproducible random stream keyed by (seed, stream_id).

    Identical (seed, stream_id) pairs replay bit-identical draws; distinct
    stream ids are statistically independent.  ``child(i)`` derives a fresh
    independent stream deterministically by extending the stream path.
    """

    def __init__(self, seed: int, stream_id: int | tuple = 0):
        self.seed = int(seed)
        if isinstance(stream_id, (tuple, list)):
            self.stream_id: tuple[int, ...] = tuple(int(s) for s in stream_id)
        else:
            self.stream_id = (int(stream_id),)
        self._gen: np.random.Generator | None = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            key = (self.seed & _MASK64,) + tuple(s & _MASK64 for s in self.stream_id)
            self._gen = np.random.default_rng(np.random.SeedSequence(key))
        return self._gen

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + (int(index),))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def _complex_ginibre(gen: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    # Last-axis pairing keeps the draw order identical for any batch shape.
    z = gen.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def haar_unitaries(rng: RngStream, d: int, count: int) -> np.ndarray:
    """Stack of `count` Haar-random U(d) matrices, shape (count, d, d)."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    z = _complex_ginibre(rng.generator, (count, d, d))
    q, r = np.linalg.qr(z)
    diag = np.einsum("sii->si", r)
    phase = diag / np.where(np.abs(diag) == 0.0, 1.0, np.abs(diag))
    phase = np.where(phase == 0.0, 1.0, phase)
    return q * phase[:, None, :]


def haar_unitary(rng: RngStream, d: int) -> np.ndarray:
    return haar_unitaries(rng, d, 1)[0]


def haar_orthogonals(rng: RngStream, d: int, count: int) -> np.ndarray:
    """Stack of `count` Haar-random O(d) matrices (real dtype)."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    z = rng.generator.standard_normal((count, d, d))
    q, r = np.linalg.qr(z)
    diag = np.einsum("sii->si", r)
    sign = np.where(diag < 0.0, -1.0, 1.0)
    return q * sign[:, None, :]


def haar_orthogonal(rng: RngStream, d: int) -> np.ndarray:
    return haar_orthogonals(rng, d, 1)[0]


def haar_state_vector(rng: RngStream, d: int) -> np.ndarray:
    v = _complex_ginibre(rng.generator, (d,))
    return v / np.linalg.norm(v)


def random_pure_state(rng: RngStream, d: int) -> np.ndarray:
    """Density matrix of a Haar-random pure state."""
    v = haar_state_vector(rng, d)
    return np.outer(v, v.conj())


def _canonical_sign(m: np.ndarray) -> np.ndarray:
    flat = m.reshape(-1)
    idx = int(np.argmax(np.abs(flat) > 1e-9))
    return -m if flat[idx] < 0 else m


def _build_real_cliffords() -> tuple[np.ndarray, ...]:
    # Single-qubit real Cliffords modulo overall sign: 4 rotations by k*pi/4
    # (signed permutations of the plane) and 4 Hadamard-type reflections.
    c = np.sqrt(0.5)
    cos = [1.0, c, 0.0, -c]
    sin = [0.0, c, 1.0, c]
    flip = np.array([[1.0, 0.0], [0.0, -1.0]])
    mats = []
    for k in range(4):
        rot = np.array([[cos[k], -sin[k]], [sin[k], cos[k]]])
        mats.append(_canonical_sign(rot))
        mats.append(_canonical_sign(rot @ flip))
    keys = {tuple(np.round(m, 12).reshape(-1)) for m in mats}
    assert len(keys) == 8, "single-qubit real Clifford enumeration is broken"
    for m in mats:
        m.setflags(write=False)
    return tuple(mats)


#: The 8 single-qubit real Cliffords (canonical representatives modulo sign).
REAL_CLIFFORD_1Q = _build_real_cliffords()


def real_clifford_1q(rng: RngStream) -> np.ndarray:
    """Uniform draw from the 8-element single-qubit real Clifford group."""
    idx = int(rng.generator.integers(0, len(REAL_CLIFFORD_1Q)))
    return REAL_CLIFFORD_1Q[idx]


@dataclass
class SampledTransform:
    """One sampled evolution: a global d x d matrix or n local 2 x 2 factors."""

    kind: str  # "global" | "local"
    factors: list = field(default_factory=list)
    ensemble: "EnsembleSpec | None" = None

    @property
    def matrix(self) -> np.ndarray:
        """The full-dimension matrix (kron of factors for local transforms)."""
        if self.kind == "global":
            return self.factors[0]
        out = np.asarray(self.factors[0], dtype=complex)
        for f in self.factors[1:]:
            out = np.kron(out, np.asarray(f, dtype=complex))
        return out


def sample_transform_arrays(rng: RngStream, spec: "EnsembleSpec", count: int):
    """Batched raw sampling.

    Returns a (count, d, d) array for global ensembles or a (count, n, 2, 2)
    complex array for local ones.  Local draws go qubit by qubit in ascending
    order so the stream consumption is well defined.
    """
    if spec.scope == "global":
        group = spec.groups[0]
        if group == "unitary":
            return haar_unitaries(rng, spec.d, count)
        return haar_orthogonals(rng, spec.d, count).astype(complex)
    factors = np.empty((count, spec.n, 2, 2), dtype=complex)
    for j in range(spec.n):
        if spec.groups[j] == "unitary":
            factors[:, j] = haar_unitaries(rng, 2, count)
        else:
            factors[:, j] = haar_orthogonals(rng, 2, count)
    return factors


def sample_transforms(rng: RngStream, spec: "EnsembleSpec", count: int) -> list[SampledTransform]:
    arrays = sample_transform_arrays(rng, spec, count)
    if spec.scope == "global":
        return [SampledTransform("global", [arrays[s]], spec) for s in range(count)]
    return [
        SampledTransform("local", [arrays[s, j] for j in range(spec.n)], spec)
        for s in range(count)
    ]


def sample_transform(rng: RngStream, spec: "EnsembleSpec") -> SampledTransform:
    return sample_transforms(rng, spec, 1)[0]
