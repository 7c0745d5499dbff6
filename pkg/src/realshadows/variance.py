"""Closed-form variance predictors and bounds for shadow estimators.

All predictors consume the true simulated state: they are validation oracles,
not estimators of unknown states.  Global formulas are exact; the local
results are exact for single Pauli strings (their second moment is state
independent) and upper bounds for general local operators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import EnsembleSpec, InvisibleObservableError
from .engine import per_shot_estimates
from .linalg import as_operator, norm_inf, sym_part, traceless_part
from .pauli import PAULIS, PauliString
from .sampling import RngStream


@dataclass
class VariancePrediction:
    kind: str  # "exact" | "upper_bound"
    value: float
    ensemble: EnsembleSpec | None = None
    assumptions: str = ""


def _as_matrix(observable) -> np.ndarray:
    if isinstance(observable, PauliString):
        return observable.to_matrix()
    return as_operator(observable)


def var_global_real(a, rho, d: int | None = None) -> VariancePrediction:
    """Exact estimator variance for global orthogonal shadows, real basis."""
    m = _as_matrix(a)
    state = as_operator(rho)
    dim = m.shape[0]
    if d is not None and d != dim:
        raise ValueError("stated dimension does not match the observable")
    s0 = traceless_part(sym_part(m))
    s0_sq = s0 @ s0
    value = (dim + 2.0) / (2.0 * dim + 8.0) * (
        np.trace(s0_sq).real + 4.0 * np.trace(state @ s0_sq).real
    ) - np.trace(s0 @ state).real ** 2
    return VariancePrediction("exact", float(value), assumptions="global orthogonal, alpha = d")


def var_global_unitary(a, rho) -> VariancePrediction:
    """Exact estimator variance for global unitary shadows."""
    m = _as_matrix(a)
    state = as_operator(rho)
    dim = m.shape[0]
    a0 = traceless_part(m)
    a0_sq = a0 @ a0
    value = (dim + 1.0) / (dim + 2.0) * (
        np.trace(a0_sq).real + 2.0 * np.trace(state @ a0_sq).real
    ) - np.trace(state @ a0).real ** 2
    return VariancePrediction("exact", float(value), assumptions="global unitary")


def reality_interpolation(a, d: int, alpha: float) -> np.ndarray:
    """The effective observable A_tilde seen through a reality-alpha channel."""
    m = as_operator(a)
    denom = d * (d - 2.0 + alpha)
    if abs(d - 2.0 + alpha) < 1e-12:
        raise ValueError("degenerate at d - 2 + alpha = 0; use the spectral treatment")
    return ((d * d - alpha) * m + (alpha * d + alpha - 2.0 * d) * m.T) / denom


def var_global_alpha(a, rho, d: int, alpha: float) -> VariancePrediction:
    """Exact estimator variance for global orthogonal shadows with a basis of
    total reality alpha."""
    m = _as_matrix(a)
    state = as_operator(rho)
    if m.shape[0] != d:
        raise ValueError("stated dimension does not match the observable")
    tilde = reality_interpolation(m, d, alpha)
    t0 = tilde - (np.trace(m) / d) * np.eye(d)
    p_alpha = (d * d - alpha) / ((d - 1.0) * (d + 2.0))
    prefactor = 1.0 / ((1.0 - p_alpha) ** 2 * d * (d - 1.0) * (d + 2.0) * (d + 4.0))
    t0_t = t0.T
    term_plain = (d * d - 3.0 * alpha + 2.0 * d) * (
        np.trace(t0 @ t0) + 2.0 * np.trace(state @ t0 @ t0)
    )
    term_transposed = (alpha * d + alpha - 2.0 * d) * (
        np.trace(t0 @ t0_t)
        + 2.0 * np.trace(state @ t0 @ t0_t)
        + 2.0 * np.trace(state @ t0_t @ t0)
        + 2.0 * np.trace(state @ t0_t @ t0_t)
    )
    value = prefactor * (term_plain + term_transposed).real - np.trace(t0 @ state).real ** 2
    return VariancePrediction(
        "exact", float(value), assumptions=f"global orthogonal, alpha = {alpha}"
    )


def overlap_f(p: PauliString, q: PauliString) -> float:
    """Overlap factor for two locally real Pauli strings: 0 on a non-identity
    mismatch, else 2**s with s the number of matching non-identity sites."""
    if p.n != q.n:
        raise ValueError("Pauli strings act on different qubit counts")
    if not (p.locally_real and q.locally_real):
        raise ValueError("overlap_f is defined for locally real (Y-free) strings")
    s = 0
    for a, b in zip(p.letters, q.letters):
        if a == "I" or b == "I":
            continue
        if a != b:
            return 0.0
        s += 1
    return float(2**s)


def second_moment_local_pauli(p: PauliString, rho=None) -> float:
    """E[o^2] = 2^k under local orthogonal shadows, exactly and for any state."""
    if not p.locally_real:
        raise InvisibleObservableError(
            "the Pauli string contains Y and is invisible to local orthogonal shadows"
        )
    return float(abs(p.coefficient) ** 2 * 2**p.weight)


def _local_second_moment(p: PauliString, groups) -> float | None:
    """Exact, state-independent E[o^2] per-site product; None when invisible."""
    value = float(abs(p.coefficient) ** 2)
    for j, letter in enumerate(p.letters):
        if letter == "I":
            continue
        if groups[j] == "orthogonal":
            if letter == "Y":
                return None
            value *= 2.0
        else:
            value *= 3.0
    return value


def var_local_pauli_exact(p: PauliString, rho, groups) -> VariancePrediction:
    """Exact variance of a Pauli-string estimator under a (possibly mixed)
    local ensemble: per-site second-moment factors minus the squared mean."""
    second = _local_second_moment(p, groups)
    if second is None:
        return VariancePrediction(
            "exact", 0.0, assumptions="invisible observable; the estimator is identically zero"
        )
    state = as_operator(rho)
    mean = np.trace(p.to_matrix() @ state).real
    return VariancePrediction("exact", float(second - mean**2), assumptions="local Pauli")


def _resolve_groups(ensemble) -> tuple[str, ...]:
    if isinstance(ensemble, EnsembleSpec):
        if ensemble.scope != "local":
            raise ValueError("local bounds need a local ensemble")
        return ensemble.groups
    return tuple(ensemble)


def _qubit_component_norms(a: np.ndarray, n: int, j: int) -> dict[str, float]:
    left = 2**j
    right = 2 ** (n - 1 - j)
    a6 = a.reshape(left, 2, right, left, 2, right)
    out = {}
    for letter in ("X", "Y", "Z"):
        comp = np.einsum("im,lmrLiR->lrLR", PAULIS[letter], a6) / 2.0
        out[letter] = float(np.linalg.norm(comp))
    return out


def bound_local(observable, ensemble) -> VariancePrediction:
    """Variance upper bound for local shadows.

    A single locally real Pauli string gets the per-site product of 2
    (orthogonal site) or 3 (unitary site).  A general k-local operator gets
    3^k (orthogonal) / 4^k (unitary) per-site factors times ||A||_inf^2.
    A Y component on an orthogonal site is rejected: the observable is
    invisible there.
    """
    groups = _resolve_groups(ensemble)
    if isinstance(observable, PauliString):
        if observable.n != len(groups):
            raise ValueError("observable and ensemble qubit counts differ")
        value = float(abs(observable.coefficient) ** 2)
        for j, letter in enumerate(observable.letters):
            if letter == "I":
                continue
            if groups[j] == "orthogonal":
                if letter == "Y":
                    raise InvisibleObservableError(
                        f"qubit {j}: Y under an orthogonal site is outside the visible space"
                    )
                value *= 2.0
            else:
                value *= 3.0
        return VariancePrediction("upper_bound", value, assumptions="single Pauli string")
    if isinstance(observable, (list, tuple)):
        matrices = [p.to_matrix() for p in observable]
        n = observable[0].n
        m = np.sum(matrices, axis=0)
        supports = [set(p.support) for p in observable]
        support = sorted(set().union(*supports))
        for p in observable:
            for j in p.support:
                if p.letters[j] == "Y" and groups[j] == "orthogonal":
                    raise InvisibleObservableError(
                        f"qubit {j}: Y under an orthogonal site is outside the visible space"
                    )
    else:
        m = as_operator(observable)
        n = len(groups)
        if m.shape[0] != 2**n:
            raise ValueError("observable dimension does not match the ensemble")
        support = []
        for j in range(n):
            norms = _qubit_component_norms(m, n, j)
            if norms["Y"] > 1e-12 * max(1.0, float(np.linalg.norm(m))):
                if groups[j] == "orthogonal":
                    raise InvisibleObservableError(
                        f"qubit {j}: Y under an orthogonal site is outside the visible space"
                    )
            if max(norms.values()) > 1e-12 * max(1.0, float(np.linalg.norm(m))):
                support.append(j)
    value = float(norm_inf(m)) ** 2
    for j in support:
        value *= 3.0 if groups[j] == "orthogonal" else 4.0
    return VariancePrediction(
        "upper_bound", value, assumptions="k-local operator, spectral-norm bound"
    )


def empirical_variance(records, observable) -> float:
    """Unbiased sample variance of the per-shot estimates."""
    values = per_shot_estimates(records, observable)
    if values.shape[0] < 2:
        raise ValueError("need at least two records for a sample variance")
    return float(np.var(values, ddof=1))


def predict_variance(spec: EnsembleSpec, observable, rho=None) -> VariancePrediction | None:
    """Best available variance prediction for an observable under an ensemble."""
    if spec.scope == "local" and isinstance(observable, PauliString):
        second = _local_second_moment(observable, spec.groups)
        if second is None:
            return VariancePrediction(
                "exact", 0.0, spec, "invisible observable; the estimator is identically zero"
            )
        if rho is None:
            return VariancePrediction(
                "upper_bound", second, spec, "state-independent second moment"
            )
        pred = var_local_pauli_exact(observable, rho, spec.groups)
        pred.ensemble = spec
        return pred
    if spec.scope == "local":
        try:
            pred = bound_local(observable, spec)
        except InvisibleObservableError:
            return None
        pred.ensemble = spec
        return pred
    if rho is None:
        return None
    d = spec.d
    if spec.groups[0] == "unitary":
        pred = var_global_unitary(_as_matrix(observable), rho)
    else:
        alpha = spec.basis.alpha_total
        if abs(alpha - d) <= 1e-12:
            pred = var_global_real(_as_matrix(observable), rho)
        elif abs(d - 2.0 + alpha) < 1e-12:
            return None  # degenerate spectrum; no closed form at this point
        else:
            pred = var_global_alpha(_as_matrix(observable), rho, d, alpha)
    pred.ensemble = spec
    return pred


# ---------------------------------------------------------------------------
# Random instances for the variance-ratio experiment.


def random_symmetric_observable(rng: RngStream, d: int) -> np.ndarray:
    """A random symmetric observable: complex entries uniform in [-1, 1]^2,
    adjoint added, Schatten-2-normalized, restricted to the symmetric
    component (the part both protocols estimate without bias)."""
    gen = rng.generator
    m = gen.uniform(-1.0, 1.0, (d, d)) + 1j * gen.uniform(-1.0, 1.0, (d, d))
    a = m + m.conj().T
    a = a / np.linalg.norm(a)
    return sym_part(a)


def ratio_instance(rng: RngStream, d: int) -> tuple[float, float, float]:
    """(var_real, var_unitary, ratio) for one random state/observable pair."""
    from .sampling import random_pure_state

    rho = random_pure_state(rng.child(0), d)
    a = random_symmetric_observable(rng.child(1), d)
    var_real = var_global_real(a, rho).value
    var_unitary = var_global_unitary(a, rho).value
    return var_real, var_unitary, var_real / var_unitary


def ratio_sweep(n_values, instances: int, seed: int):
    """Exact-predictor variance-ratio sweep over system sizes.

    Returns (rows, summary): one row per instance with the CSV schema
    (n, instance_id, var_real_exact, var_unitary_exact, ratio) and one summary
    entry per n with the mean ratio and its standard error.
    """
    rows = []
    summary = []
    for n in n_values:
        d = 2**n
        base = RngStream(seed, (int(n),))
        ratios = np.empty(instances)
        for i in range(instances):
            var_real, var_unitary, ratio = ratio_instance(base.child(i), d)
            ratios[i] = ratio
            rows.append(
                {
                    "n": int(n),
                    "instance_id": i,
                    "var_real_exact": var_real,
                    "var_unitary_exact": var_unitary,
                    "ratio": ratio,
                }
            )
        summary.append(
            {
                "n": int(n),
                "mean_ratio": float(ratios.mean()),
                "stderr": float(ratios.std(ddof=1) / np.sqrt(instances)),
            }
        )
    return rows, summary


def write_ratio_csv(path: str, rows) -> None:
    lines = ["n,instance_id,var_real_exact,var_unitary_exact,ratio"]
    for r in rows:
        lines.append(
            f"{r['n']},{r['instance_id']},{r['var_real_exact']!r},"
            f"{r['var_unitary_exact']!r},{r['ratio']!r}"
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
