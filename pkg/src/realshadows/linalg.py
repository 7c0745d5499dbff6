"""Dense complex linear-algebra primitives shared by the whole package.

Operators are plain square ``numpy`` arrays; the dimension is carried by the
shape.  Qubit 0 is always the leftmost tensor factor, i.e. the
most-significant bit of a computational-basis index.  Transposes are always
taken with respect to the computational basis.
"""

from __future__ import annotations

import numpy as np

#: Tolerance for structural (closed-form) equality checks.
ATOL = 1e-10

#: Largest dimension ``kron`` will produce unless overridden.
MAX_KRON_DIM = 8192


class ResourceLimitError(ValueError):
    """A dense operation would exceed the configured size limits."""


def as_operator(a) -> np.ndarray:
    """Validate ``a`` as a finite square matrix and return it as complex."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {np.shape(a)}")
    if not np.all(np.isfinite(m)):
        raise ValueError("operator entries must be finite")
    return m


def identity(d: int) -> np.ndarray:
    return np.eye(int(d), dtype=complex)


def kron(*ops, max_dim: int = MAX_KRON_DIM) -> np.ndarray:
    """Kronecker product of one or more operators, first factor leftmost.

    Raises ResourceLimitError if the output dimension would exceed `max_dim`.
    """
    if not ops:
        raise ValueError("kron needs at least one operator")
    dim = 1
    for op in ops:
        dim *= np.shape(op)[0]
    if dim > max_dim:
        raise ResourceLimitError(
            f"kron output dimension {dim} exceeds the limit {max_dim}"
        )
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace_first(a, d1: int) -> np.ndarray:
    """Trace out the first tensor factor of dimension ``d1``."""
    m = np.asarray(a)
    d = m.shape[0]
    d1 = int(d1)
    if d1 < 1 or d % d1 != 0:
        raise ValueError(f"dimension {d} is not divisible by first factor {d1}")
    d2 = d // d1
    return np.einsum("ijik->jk", m.reshape(d1, d2, d1, d2))


def transpose(a) -> np.ndarray:
    return np.asarray(a).T.copy()


def conjugate(a) -> np.ndarray:
    return np.asarray(a).conj()


def adjoint(a) -> np.ndarray:
    return np.asarray(a).conj().T.copy()


def trace(a) -> complex:
    return complex(np.trace(np.asarray(a)))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr[a^dagger b]."""
    return complex(np.vdot(np.asarray(a), np.asarray(b)))


def norm2(a) -> float:
    """Schatten 2-norm (Frobenius norm), sqrt(Tr[a^dagger a])."""
    return float(np.linalg.norm(np.asarray(a)))


def is_hermitian(a, atol: float = ATOL) -> bool:
    m = np.asarray(a)
    return bool(np.allclose(m, m.conj().T, rtol=0.0, atol=atol))


def norm_inf(a) -> float:
    """Spectral norm of a Hermitian matrix (largest |eigenvalue|)."""
    m = np.asarray(a)
    if not is_hermitian(m):
        raise ValueError("norm_inf requires a Hermitian input")
    return float(np.max(np.abs(np.linalg.eigvalsh(m))))


def sym_part(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    return 0.5 * (m + m.T)


def antisym_part(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    return 0.5 * (m - m.T)


def traceless_part(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    d = m.shape[0]
    return m - (np.trace(m) / d) * np.eye(d)


def operators_close(a, b, atol: float = ATOL) -> bool:
    return bool(np.allclose(np.asarray(a), np.asarray(b), rtol=0.0, atol=atol))
