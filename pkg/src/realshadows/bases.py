"""Measurement-basis construction and reality (alpha) bookkeeping.

The reality of a basis vector |w> is alpha_w = |<w|w*>|^2; a basis is "real"
when every alpha_w = 1 (total alpha = d) and maximally complex when alpha = 0.
Bases are stored explicitly as matrices whose columns are the basis vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import kron
from .sampling import RngStream, haar_unitary

ORTHONORMAL_ATOL = 1e-10

#: Gate conventions used by the SH basis.
S_GATE = np.diag([1.0, 1.0j]).astype(complex)
H_GATE = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


@dataclass(eq=False)
class MeasurementBasis:
    d: int
    vectors: np.ndarray  # (d, d); columns are the basis vectors
    alpha_per_vector: np.ndarray
    alpha_total: float
    tag: str

    def vector(self, w: int) -> np.ndarray:
        return self.vectors[:, w]


def reality(vectors, validate: bool = True) -> tuple[np.ndarray, float]:
    """Per-vector alpha_w = |<w|w*>|^2 and the basis total alpha = sum_w alpha_w.

    Accepts a MeasurementBasis or a matrix whose columns are the vectors.
    """
    if isinstance(vectors, MeasurementBasis):
        vectors = vectors.vectors
    v = np.asarray(vectors, dtype=complex)
    if validate:
        gram = v.conj().T @ v
        if not np.allclose(gram, np.eye(v.shape[1]), rtol=0.0, atol=ORTHONORMAL_ATOL):
            raise ValueError("basis vectors are not orthonormal")
    # <w|w*> = conj(sum_j w_j^2), so alpha_w = |sum_j w_j^2|^2.
    overlaps = np.einsum("jw,jw->w", v, v)
    alpha = np.abs(overlaps) ** 2
    return alpha, float(np.sum(alpha))


def make_basis(vectors: np.ndarray, tag: str, alpha_per_vector=None) -> MeasurementBasis:
    v = np.asarray(vectors, dtype=complex)
    computed, _ = reality(v)
    if alpha_per_vector is None:
        alpha = computed
    else:
        alpha = np.asarray(alpha_per_vector, dtype=float)
        if np.max(np.abs(alpha - computed)) > 1e-9:
            raise ValueError("supplied per-vector alphas disagree with the vectors")
    return MeasurementBasis(
        d=v.shape[0],
        vectors=v,
        alpha_per_vector=alpha,
        alpha_total=float(np.sum(alpha)),
        tag=tag,
    )


def computational_basis(n: int) -> MeasurementBasis:
    if n < 1:
        raise ValueError("need at least one qubit")
    d = 2**n
    return make_basis(np.eye(d, dtype=complex), "computational", np.ones(d))


def sh_basis(n: int) -> MeasurementBasis:
    """Columns of (SH)^{x n}; every vector has alpha_w = 0.

    The per-vector alphas are pinned to exact zeros via tensor
    multiplicativity of alpha (the single-qubit factor is exactly zero).
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    sh = S_GATE @ H_GATE
    vectors = kron(*([sh] * n)) if n > 1 else sh
    return make_basis(vectors, "sh", np.zeros(2**n))


def random_basis(rng: RngStream, d: int, tag: str = "random") -> MeasurementBasis:
    """A protocol-defining random basis: the columns of a Haar unitary."""
    if d < 2:
        raise ValueError("need dimension >= 2")
    return make_basis(haar_unitary(rng, d), tag)


def basis_from_tag(tag: str, n: int) -> MeasurementBasis:
    """Resolve a CLI/config basis tag: computational | sh | random:SEED."""
    if tag == "computational":
        return computational_basis(n)
    if tag == "sh":
        return sh_basis(n)
    if tag.startswith("random:"):
        seed = int(tag.split(":", 1)[1])
        return random_basis(RngStream(seed), 2**n, tag)
    raise ValueError(f"unknown basis tag {tag!r}")
