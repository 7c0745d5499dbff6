"""Measurement channels for every ensemble: block spectra, pseudo-inverses,
visible-space projectors.

A global channel acts blockwise on the trace part (eigenvalue 1), the
symmetric-traceless part and the antisymmetric part of its input:

    lambda_sym  = (d + alpha - 2) / ((d - 1)(d + 2))      (orthogonal)
    lambda_anti = (d - alpha)     / (d (d - 1))           (orthogonal)
    lambda_sym  = lambda_anti = 1 / (d + 1)               (unitary)

with alpha the total reality of the measurement basis.  Local channels act
qubit by qubit with the d = 2 blocks (orthogonal qubit: Y killed, X/Z scaled
by 1/2; unitary qubit: X/Y/Z scaled by 1/3).  Channels are kept in this
spectral form; dense superoperator matrices appear only in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bases import MeasurementBasis, computational_basis
from .linalg import antisym_part, as_operator, operators_close, sym_part
from . import sampling

GROUPS = ("unitary", "orthogonal")

#: Eigenvalues smaller than this are treated as exact zeros of the channel.
_ZERO_EIGENVALUE_ATOL = 1e-12


class InvisibleObservableError(ValueError):
    """The observable has no visible component under the requested ensemble."""


@dataclass(eq=False)
class EnsembleSpec:
    """Which group is sampled, over what scope, with which measurement basis."""

    scope: str  # "global" | "local"
    groups: tuple[str, ...]  # length 1 (global) or n (local)
    basis: MeasurementBasis
    n: int

    def __post_init__(self):
        if self.scope not in ("global", "local"):
            raise ValueError(f"unknown scope {self.scope!r}")
        self.groups = tuple(self.groups)
        for g in self.groups:
            if g not in GROUPS:
                raise ValueError(f"unknown group {g!r}")
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if self.basis.d != 2**self.n:
            raise ValueError("basis dimension does not match the qubit count")
        if self.scope == "global":
            if len(self.groups) != 1:
                raise ValueError("a global ensemble samples a single group")
        else:
            if len(self.groups) != self.n:
                raise ValueError("local ensembles need one group per qubit")
            if not operators_close(self.basis.vectors, np.eye(self.basis.d)):
                raise ValueError("local ensembles measure in the computational basis")

    @property
    def d(self) -> int:
        return 2**self.n

    def group_for(self, j: int) -> str:
        return self.groups[0] if self.scope == "global" else self.groups[j]

    def label(self) -> str:
        groups = self.groups[0] if len(set(self.groups)) == 1 else ",".join(self.groups)
        return f"{self.scope}-{groups}({self.basis.tag})"


def global_ensemble(group: str, basis: MeasurementBasis) -> EnsembleSpec:
    n = int(round(np.log2(basis.d)))
    if 2**n != basis.d:
        raise ValueError("basis dimension must be a power of two")
    return EnsembleSpec("global", (group,), basis, n)


def local_ensemble(groups, n: int) -> EnsembleSpec:
    if isinstance(groups, str):
        groups = (groups,) * n
    return EnsembleSpec("local", tuple(groups), computational_basis(n), n)


@dataclass(frozen=True)
class ChannelSpectrum:
    """Blockwise action of a measurement channel on one tensor factor."""

    lambda_sym: float
    lambda_anti: float
    p_alpha: float
    alpha: float
    lambda_trace: float = 1.0


def orthogonal_spectrum(d: int, alpha: float) -> ChannelSpectrum:
    return ChannelSpectrum(
        lambda_sym=(d + alpha - 2.0) / ((d - 1.0) * (d + 2.0)),
        lambda_anti=(d - alpha) / (d * (d - 1.0)),
        p_alpha=(d * d - alpha) / ((d - 1.0) * (d + 2.0)),
        alpha=float(alpha),
    )


def unitary_spectrum(d: int, alpha: float = float("nan")) -> ChannelSpectrum:
    lam = 1.0 / (d + 1.0)
    return ChannelSpectrum(lambda_sym=lam, lambda_anti=lam, p_alpha=d / (d + 1.0), alpha=alpha)


@dataclass(eq=False)
class ChannelDescriptor:
    spec: EnsembleSpec
    spectra: tuple[ChannelSpectrum, ...]  # one entry (global) or n entries (local)

    @property
    def spectrum(self) -> ChannelSpectrum:
        if self.spec.scope != "global":
            raise ValueError("per-qubit channels have no single global spectrum")
        return self.spectra[0]


def channel_for(spec: EnsembleSpec) -> ChannelDescriptor:
    if spec.scope == "global":
        if spec.groups[0] == "orthogonal":
            spectrum = orthogonal_spectrum(spec.d, spec.basis.alpha_total)
        else:
            spectrum = unitary_spectrum(spec.d, spec.basis.alpha_total)
        return ChannelDescriptor(spec, (spectrum,))
    spectra = tuple(
        orthogonal_spectrum(2, 2.0) if g == "orthogonal" else unitary_spectrum(2, 2.0)
        for g in spec.groups
    )
    return ChannelDescriptor(spec, spectra)


def depolarize(a, p: float, d: int | None = None) -> np.ndarray:
    """D_p(A) = p Tr[A]/d 1 + (1-p) A.  p may lie outside [0, 1] (inverses)."""
    m = as_operator(a)
    dim = m.shape[0]
    if d is not None and d != dim:
        raise ValueError(f"stated dimension {d} does not match matrix dimension {dim}")
    return (p * np.trace(m) / dim) * np.eye(dim) + (1.0 - p) * m


# ---------------------------------------------------------------------------
# Per-qubit tensor helpers (qubit 0 is the leftmost factor).


def _six_axes(a: np.ndarray, n: int, j: int):
    left = 2**j
    right = 2 ** (n - 1 - j)
    return a.reshape(left, 2, right, left, 2, right)


def qubit_partial_transpose(a: np.ndarray, n: int, j: int) -> np.ndarray:
    d = a.shape[0]
    return _six_axes(a, n, j).swapaxes(1, 4).reshape(d, d)


def _qubit_trace_part(a: np.ndarray, n: int, j: int) -> np.ndarray:
    """Tr_j[a] (x) 1/2 re-inserted at qubit j."""
    a6 = _six_axes(a, n, j)
    t = np.einsum("lirLiR->lrLR", a6)
    out = np.zeros_like(a6)
    out[:, 0, :, :, 0, :] = 0.5 * t
    out[:, 1, :, :, 1, :] = 0.5 * t
    return out.reshape(a.shape)


def _qubit_blocks(a: np.ndarray, n: int, j: int):
    pt = qubit_partial_transpose(a, n, j)
    tr = _qubit_trace_part(a, n, j)
    sym0 = 0.5 * (a + pt) - tr
    anti = 0.5 * (a - pt)
    return tr, sym0, anti


def _inverse_eigenvalue(lam: float) -> float:
    return 0.0 if abs(lam) <= _ZERO_EIGENVALUE_ATOL else 1.0 / lam


def _indicator(lam: float) -> float:
    return 0.0 if abs(lam) <= _ZERO_EIGENVALUE_ATOL else 1.0


def _apply_global_blocks(a: np.ndarray, lam_sym: float, lam_anti: float) -> np.ndarray:
    d = a.shape[0]
    tr = (np.trace(a) / d) * np.eye(d)
    sym0 = sym_part(a) - tr
    return tr + lam_sym * sym0 + lam_anti * antisym_part(a)


def _apply_local_blocks(a: np.ndarray, n: int, eigenvalues) -> np.ndarray:
    out = np.asarray(a, dtype=complex)
    for j, (lam_sym, lam_anti) in enumerate(eigenvalues):
        tr, sym0, anti = _qubit_blocks(out, n, j)
        out = tr + lam_sym * sym0 + lam_anti * anti
    return out


def _dispatch(desc: ChannelDescriptor, a, eig_map) -> np.ndarray:
    m = as_operator(a)
    if m.shape[0] != desc.spec.d:
        raise ValueError(
            f"operator dimension {m.shape[0]} does not match ensemble dimension {desc.spec.d}"
        )
    if desc.spec.scope == "global":
        sp = desc.spectrum
        return _apply_global_blocks(m, eig_map(sp.lambda_sym), eig_map(sp.lambda_anti))
    eigenvalues = [(eig_map(sp.lambda_sym), eig_map(sp.lambda_anti)) for sp in desc.spectra]
    return _apply_local_blocks(m, desc.spec.n, eigenvalues)


def apply_channel(desc: ChannelDescriptor, a) -> np.ndarray:
    """The measurement channel M applied to an operator."""
    return _dispatch(desc, a, lambda lam: lam)


def pseudo_inverse(desc: ChannelDescriptor, a) -> np.ndarray:
    """Blockwise reciprocal of M; blocks with zero eigenvalue map to zero."""
    return _dispatch(desc, a, _inverse_eigenvalue)


def visible_projector(desc: ChannelDescriptor, a) -> np.ndarray:
    """Orthogonal projection onto the visible space (image of M)."""
    return _dispatch(desc, a, _indicator)


def visible_dimension(desc: ChannelDescriptor) -> int:
    """Dimension of the visible operator subspace."""
    if desc.spec.scope == "global":
        d = desc.spec.d
        sp = desc.spectrum
        dim = 1
        if _indicator(sp.lambda_sym):
            dim += d * (d + 1) // 2 - 1
        if _indicator(sp.lambda_anti):
            dim += d * (d - 1) // 2
        return dim
    dim = 1
    for sp in desc.spectra:
        per_qubit = 1
        if _indicator(sp.lambda_sym):
            per_qubit += 2
        if _indicator(sp.lambda_anti):
            per_qubit += 1
        dim *= per_qubit
    return dim


def mixture_decomposition(desc: ChannelDescriptor):
    """Weights (q - q', 2q', p_alpha) expressing a global orthogonal channel as
    (q - q') D_p(A) + 2q' D_p(A_sym), a tunable mix of unitary-like and
    real-like shadow channels."""
    spec = desc.spec
    if spec.scope != "global" or spec.groups[0] != "orthogonal":
        raise ValueError("mixture decomposition applies to global orthogonal ensembles")
    d = spec.d
    alpha = desc.spectrum.alpha
    denom = d - 2.0 + alpha
    if abs(denom) < 1e-12:
        raise ValueError(
            "degenerate decomposition at d - 2 + alpha = 0; use the spectral form"
        )
    q = (d * d - alpha) / (d * denom)
    q_prime = 1.0 - q
    return q - q_prime, 2.0 * q_prime, desc.spectrum.p_alpha


def pauli_parity_decompose(a, n: int):
    """Split an operator into (trace part, even-Y part, odd-Y part).

    In the Pauli basis the non-identity strings with an even number of Y
    letters span the symmetric-traceless operators and the odd-Y strings the
    antisymmetric ones, so the split is computed from transposes.
    """
    m = as_operator(a)
    if m.shape[0] != 2**n:
        raise ValueError("dimension is not 2**n")
    d = m.shape[0]
    tr = (np.trace(m) / d) * np.eye(d)
    even_y = sym_part(m) - tr
    odd_y = antisym_part(m)
    return tr, even_y, odd_y


def mc_channel(rng: "sampling.RngStream", spec: EnsembleSpec, a, samples: int, batch_size: int = 4096):
    """Definition-level Monte Carlo channel: the empirical mean of
    sum_w Tr[a U^dag Pi_w U] U^dag Pi_w U over sampled transforms.

    Returns (mean, stderr) with a per-entry standard error of the mean.
    """
    m = as_operator(a)
    d = spec.d
    if m.shape[0] != d:
        raise ValueError("operator dimension does not match the ensemble")
    basis = spec.basis.vectors
    total = np.zeros((d, d), dtype=complex)
    total_sq = np.zeros((d, d), dtype=float)
    done = 0
    while done < samples:
        b = min(batch_size, samples - done)
        arrays = sampling.sample_transform_arrays(rng, spec, b)
        if spec.scope == "global":
            u = arrays
        else:
            u = arrays[:, 0]
            for j in range(1, spec.n):
                u = np.einsum("sab,scd->sacbd", u, arrays[:, j]).reshape(
                    b, u.shape[1] * 2, u.shape[2] * 2
                )
        # rows[s, w, i] = <w| U_s |i>
        rows = np.einsum("iw,sij->swj", basis.conj(), u)
        weights = np.einsum("swi,ij,swj->sw", rows, m, rows.conj())
        contrib = np.einsum("sw,swi,swj->sij", weights, rows.conj(), rows)
        total += contrib.sum(axis=0)
        total_sq += (np.abs(contrib) ** 2).sum(axis=0)
        done += b
    mean = total / samples
    var = np.maximum(total_sq / samples - np.abs(mean) ** 2, 0.0)
    stderr = np.sqrt(var / samples)
    return mean, stderr
