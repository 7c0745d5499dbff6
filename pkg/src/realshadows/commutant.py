"""Exact moment integrals (twirls) over O(d) and U(d) via commutant projection.

The k-th order twirl orthogonally projects onto the commutant of the group's
k-fold tensor action.  For O(d) the commutant is spanned by the Brauer-algebra
pairing realizations (permutations plus cup/cap contractions); for U(d) by the
k! permutation operators alone.  Closed-form coefficients for the twirl of a
rank-1 projector are provided for k = 2, 3 as fast paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .linalg import as_operator
from .sampling import RngStream, haar_orthogonals, haar_unitaries

#: Relative singular-value cutoff for the Gram pseudo-inverse.  The Brauer
#: realizations are linearly dependent for small d (e.g. k = 3, d = 2); the
#: projection onto their span is still well defined.
GRAM_RCOND = 1e-8

_SUPPORTED_K = (2, 3)


@dataclass(frozen=True)
class BrauerPairing:
    """A perfect matching of the 2k wire endpoints {1, ..., 2k}.

    Labels 1..k are inputs (bra side), k+1..2k outputs (ket side).  A pairing
    that matches every input to an output realizes a permutation operator; a
    pairing with an input-input pair (cap) and output-output pair (cup)
    realizes a contraction Omega.
    """

    k: int
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        labels = sorted(l for pair in self.pairs for l in pair)
        if labels != list(range(1, 2 * self.k + 1)):
            raise ValueError("pairs must cover the labels 1..2k exactly once")

    @property
    def is_permutation(self) -> bool:
        return all(a <= self.k < b for a, b in self.pairs)

    def permutation(self) -> tuple[int, ...]:
        """pi mapping input slot a to output slot pi(a), 1-based, or raise."""
        if not self.is_permutation:
            raise ValueError("pairing is not a permutation")
        pi = {a: b - self.k for a, b in self.pairs}
        return tuple(pi[a] for a in range(1, self.k + 1))

    def label(self) -> str:
        if self.is_permutation:
            return "S" + "".join(str(p) for p in self.permutation())
        caps = [p for p in self.pairs if p[1] <= self.k]
        cups = [(a - self.k, b - self.k) for a, b in self.pairs if a > self.k]
        cup = "".join(str(x) for x in sorted(cups[0]))
        cap = "".join(str(x) for x in sorted(caps[0]))
        return f"Omega({cup};{cap})"


def enumerate_pairings(k: int) -> list[BrauerPairing]:
    """All (2k-1)!! pairings of 2k labels: 3 for k = 2, 15 for k = 3."""
    if k not in _SUPPORTED_K:
        raise ValueError(f"only k in {_SUPPORTED_K} is supported, got {k}")

    def matchings(labels: tuple[int, ...]):
        if not labels:
            yield ()
            return
        first, rest = labels[0], labels[1:]
        for i, partner in enumerate(rest):
            remaining = rest[:i] + rest[i + 1 :]
            for tail in matchings(remaining):
                yield ((first, partner),) + tail

    return [BrauerPairing(k, pairs) for pairs in matchings(tuple(range(1, 2 * k + 1)))]


def realize(pairing: BrauerPairing, d: int) -> np.ndarray:
    """The d^k x d^k matrix of a pairing: entries are products of deltas.

    Row indices come from labels k+1..2k (first output factor most
    significant), column indices from labels 1..k.
    """
    if d < 2:
        raise ValueError("need dimension >= 2")
    k = pairing.k
    dim = d**k
    out = np.zeros((dim, dim), dtype=complex)
    for values in product(range(d), repeat=k):
        value_of = {}
        for pair, v in zip(pairing.pairs, values):
            value_of[pair[0]] = v
            value_of[pair[1]] = v
        row = 0
        for m in range(k):
            row = row * d + value_of[k + 1 + m]
        col = 0
        for m in range(k):
            col = col * d + value_of[1 + m]
        out[row, col] += 1.0
    return out


_BASIS_CACHE: dict[tuple[str, int, int], list[tuple[BrauerPairing, np.ndarray]]] = {}


def commutant_basis(group: str, k: int, d: int) -> list[tuple[BrauerPairing, np.ndarray]]:
    """Spanning set of comm(G, k): Brauer realizations for O, permutations for U."""
    group = group.upper()
    if group not in ("O", "U"):
        raise ValueError(f"unknown group {group!r}")
    key = (group, k, d)
    if key not in _BASIS_CACHE:
        pairings = enumerate_pairings(k)
        if group == "U":
            pairings = [p for p in pairings if p.is_permutation]
        elements = []
        for p in pairings:
            m = realize(p, d)
            m.setflags(write=False)
            elements.append((p, m))
        _BASIS_CACHE[key] = elements
    return _BASIS_CACHE[key]


def _infer_local_dim(dim: int, k: int) -> int:
    d = int(round(dim ** (1.0 / k)))
    for candidate in (d - 1, d, d + 1):
        if candidate >= 2 and candidate**k == dim:
            return candidate
    raise ValueError(f"operator dimension {dim} is not a k={k} tensor power")


def twirl_project(a, group: str = "O", k: int = 2) -> np.ndarray:
    """Orthogonal projection of `a` onto comm(G, k), i.e. the exact twirl.

    The coefficients c solve the Gram system G c = t with G_ij = Tr[E_i^dag E_j]
    and t_i = Tr[E_i^dag a]; the Gram matrix is pseudo-inverted because the
    spanning set may be linearly dependent at small d.
    """
    m = as_operator(a)
    d = _infer_local_dim(m.shape[0], k)
    elements = commutant_basis(group, k, d)
    mats = [e for _, e in elements]
    size = len(mats)
    gram = np.empty((size, size), dtype=float)
    for i in range(size):
        for j in range(i, size):
            g = np.vdot(mats[i], mats[j]).real
            gram[i, j] = g
            gram[j, i] = g
    t = np.array([np.vdot(e, m) for e in mats])
    coeffs = np.linalg.pinv(gram, rcond=GRAM_RCOND) @ t
    out = np.zeros_like(m)
    for c, e in zip(coeffs, mats):
        out += c * e
    return out


def _coefficients(numerators, denominator, alpha_w, d):
    exact = isinstance(d, (int, np.integer)) and isinstance(
        alpha_w, (int, np.integer, Fraction)
    )
    if exact:
        alpha = Fraction(alpha_w)
        den = Fraction(denominator(int(d)))
        return tuple(Fraction(num(alpha, int(d))) / den for num in numerators)
    alpha = float(alpha_w)
    den = float(denominator(float(d)))
    return tuple(float(num(alpha, float(d))) / den for num in numerators)


def pair_twirl_coefficients(alpha_w, d):
    """Coefficients (c_1, c_S, c_Omega) of the O(d) twirl of Pi_w^{(x)2}.

    Exact rational arithmetic is used when both inputs are exact (integer d,
    integer or Fraction alpha_w).
    """
    if d < 2:
        raise ValueError("need dimension >= 2")
    return _coefficients(
        (
            lambda a, dd: dd - a,
            lambda a, dd: dd - a,
            lambda a, dd: a * dd + a - 2,
        ),
        lambda dd: dd * (dd - 1) * (dd + 2),
        alpha_w,
        d,
    )


def triple_twirl_coefficients(alpha_w, d):
    """Coefficients (a, b) of the O(d) twirl of Pi_w^{(x)3}: `a` multiplies each
    of the 6 permutation operators and `b` each of the 9 contractions."""
    if d < 2:
        raise ValueError("need dimension >= 2")
    return _coefficients(
        (
            lambda a, dd: dd - 3 * a + 2,
            lambda a, dd: a * dd + a - 2,
        ),
        lambda dd: dd * (dd - 1) * (dd + 2) * (dd + 4),
        alpha_w,
        d,
    )


def closed_form_twirl(alpha_w, d: int, k: int) -> np.ndarray:
    """Materialize the closed-form O(d) twirl of Pi_w^{(x)k} for k = 2, 3."""
    elements = commutant_basis("O", k, d)
    if k == 2:
        c_id, c_swap, c_omega = (float(c) for c in pair_twirl_coefficients(alpha_w, d))

        def coeff(p: BrauerPairing) -> float:
            if not p.is_permutation:
                return c_omega
            return c_id if p.permutation() == (1, 2) else c_swap

    elif k == 3:
        c_perm, c_omega = (float(c) for c in triple_twirl_coefficients(alpha_w, d))

        def coeff(p: BrauerPairing) -> float:
            return c_perm if p.is_permutation else c_omega

    else:
        raise ValueError(f"only k in {_SUPPORTED_K} is supported, got {k}")
    out = np.zeros((d**k, d**k), dtype=complex)
    for p, e in elements:
        out += coeff(p) * e
    return out


@dataclass
class MonteCarloTwirl:
    mean: np.ndarray
    stderr: np.ndarray
    samples: int


def _kron_power_batch(u: np.ndarray, k: int) -> np.ndarray:
    out = u
    for _ in range(k - 1):
        s, da, _ = out.shape
        db = u.shape[1]
        out = np.einsum("sab,scd->sacbd", out, u).reshape(s, da * db, da * db)
    return out


def mc_twirl(
    rng: RngStream, a, group: str = "O", k: int = 2, samples: int = 10000, batch_size: int = 2048
) -> MonteCarloTwirl:
    """Monte Carlo twirl: empirical mean of U^{(x)k} a U^{dag (x)k}.

    Sharded in fixed-size batches accumulated in order, so a given stream
    yields bit-reproducible results.  Standard error is tracked per entry.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    m = as_operator(a)
    d = _infer_local_dim(m.shape[0], k) if k > 1 else m.shape[0]
    group = group.upper()
    total = np.zeros_like(m)
    total_sq = np.zeros(m.shape, dtype=float)
    done = 0
    while done < samples:
        b = min(batch_size, samples - done)
        if group == "O":
            u = haar_orthogonals(rng, d, b).astype(complex)
        elif group == "U":
            u = haar_unitaries(rng, d, b)
        else:
            raise ValueError(f"unknown group {group!r}")
        w = _kron_power_batch(u, k)
        x = w @ m @ w.conj().transpose(0, 2, 1)
        total += x.sum(axis=0)
        total_sq += (np.abs(x) ** 2).sum(axis=0)
        done += b
    mean = total / samples
    var = np.maximum(total_sq / samples - np.abs(mean) ** 2, 0.0)
    return MonteCarloTwirl(mean, np.sqrt(var / samples), samples)
