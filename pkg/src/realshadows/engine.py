"""The sample -> measure -> invert -> estimate pipeline with median-of-means.

Shots are stored compactly: a record is (sampled transform, outcome), which is
sufficient to reconstruct the classical shadow deterministically.  Batched
array storage (ShadowRecords) keeps 1e5-shot runs cheap; individual
ShadowRecord views are materialized on demand.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .bases import basis_from_tag
from .channels import (
    ChannelDescriptor,
    EnsembleSpec,
    channel_for,
    pseudo_inverse,
    visible_projector,
)
from .linalg import as_operator, identity, kron, norm2, sym_part
from .pauli import PAULIS, PauliString
from .sampling import (
    RNG_ALGORITHM,
    RngStream,
    SampledTransform,
    sample_transform_arrays,
)

#: Born probabilities may undershoot zero by at most this much before being
#: clipped; larger violations signal upstream corruption.
_PROB_CLIP = -1e-12
_PROB_SUM_TOL = 1e-6

#: Element budget per chunk when materializing full product unitaries.
_CHUNK_ELEMENTS = 1 << 22


class ConfigError(ValueError):
    """An experiment configuration failed schema validation."""


@dataclass
class ShadowRecord:
    """One (sampled transform, outcome) pair."""

    transform: SampledTransform
    outcome: int | tuple[int, ...]
    ensemble: EnsembleSpec


class ShadowRecords(Sequence):
    """A batch of shadow records stored as stacked arrays."""

    def __init__(self, spec: EnsembleSpec, transforms: np.ndarray, outcomes: np.ndarray):
        self.spec = spec
        self.transforms = transforms  # (S, d, d) global | (S, n, 2, 2) local
        self.outcomes = outcomes  # (S,) global | (S, n) local bits
        self._desc: ChannelDescriptor | None = None

    @property
    def descriptor(self) -> ChannelDescriptor:
        if self._desc is None:
            self._desc = channel_for(self.spec)
        return self._desc

    def __len__(self) -> int:
        return self.transforms.shape[0]

    def __getitem__(self, s):
        if isinstance(s, slice):
            return [self[i] for i in range(*s.indices(len(self)))]
        if self.spec.scope == "global":
            transform = SampledTransform("global", [self.transforms[s]], self.spec)
            outcome: int | tuple[int, ...] = int(self.outcomes[s])
        else:
            transform = SampledTransform(
                "local", [self.transforms[s, j] for j in range(self.spec.n)], self.spec
            )
            outcome = tuple(int(b) for b in self.outcomes[s])
        return ShadowRecord(transform, outcome, self.spec)


def validate_state(rho, d: int | None = None) -> np.ndarray:
    m = as_operator(rho)
    if d is not None and m.shape[0] != d:
        raise ValueError(f"state dimension {m.shape[0]} does not match ensemble dimension {d}")
    if abs(np.trace(m) - 1.0) > 1e-8:
        raise ValueError("state must have unit trace (within 1e-8)")
    if np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))) < -1e-8:
        raise ValueError("state must be positive semidefinite (within 1e-8)")
    return m


def _product_unitaries(factors: np.ndarray) -> np.ndarray:
    """(S, n, 2, 2) local factors -> (S, 2^n, 2^n) product matrices."""
    u = factors[:, 0]
    for j in range(1, factors.shape[1]):
        s, da, _ = u.shape
        u = np.einsum("sab,scd->sacbd", u, factors[:, j]).reshape(s, da * 2, da * 2)
    return u


def _born_probabilities(rho: np.ndarray, u: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """p[s, w] = Tr[rho U_s^dag Pi_w U_s] for a chunk of global matrices."""
    rows = np.einsum("iw,sij->swj", basis.conj(), u)
    p = np.einsum("swi,ij,swj->sw", rows, rho, rows.conj()).real
    sums = p.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > _PROB_SUM_TOL):
        raise ValueError("Born probabilities do not sum to one; upstream corruption")
    if np.min(p) < _PROB_CLIP:
        raise ValueError("Born probabilities are negative beyond tolerance")
    p = np.maximum(p, 0.0)
    return p / p.sum(axis=1, keepdims=True)


def _sample_outcomes(rng: RngStream, p: np.ndarray) -> np.ndarray:
    cum = np.cumsum(p, axis=1)
    r = rng.generator.random(p.shape[0])[:, None] * cum[:, -1:]
    return np.minimum((cum < r).sum(axis=1), p.shape[1] - 1)


def collect_records(rng: RngStream, rho, spec: EnsembleSpec, shots: int) -> ShadowRecords:
    """Sample `shots` transforms and measurement outcomes for the state `rho`.

    Transform draws come from rng.child(0), outcome draws from rng.child(1),
    so the two sub-streams are independent and the whole run is reproducible.
    """
    if shots < 1:
        raise ValueError("need at least one shot")
    m = validate_state(rho, spec.d)
    transforms = sample_transform_arrays(rng.child(0), spec, shots)
    outcome_rng = rng.child(1)
    d = spec.d
    basis = spec.basis.vectors
    chunk = max(1, _CHUNK_ELEMENTS // (d * d))
    outcome_idx = np.empty(shots, dtype=np.int64)
    for start in range(0, shots, chunk):
        stop = min(shots, start + chunk)
        if spec.scope == "global":
            u = transforms[start:stop]
        else:
            u = _product_unitaries(transforms[start:stop])
        p = _born_probabilities(m, u, basis)
        outcome_idx[start:stop] = _sample_outcomes(outcome_rng, p)
    if spec.scope == "global":
        outcomes = outcome_idx
    else:
        shifts = np.arange(spec.n - 1, -1, -1)
        outcomes = ((outcome_idx[:, None] >> shifts) & 1).astype(np.int64)
    return ShadowRecords(spec, transforms, outcomes)


def simulate_measurement(rng: RngStream, rho, t: SampledTransform, basis) -> int | tuple:
    """Draw one outcome with Born probability Tr[rho U^dag Pi_w U]."""
    m = validate_state(rho)
    u = t.matrix[None, :, :]
    p = _born_probabilities(m, u, np.asarray(basis.vectors, dtype=complex))
    w = int(_sample_outcomes(rng, p)[0])
    if t.kind == "local":
        n = len(t.factors)
        return tuple((w >> (n - 1 - j)) & 1 for j in range(n))
    return w


def _single_qubit_inverse(group: str, b: np.ndarray) -> np.ndarray:
    """Pseudo-inverse of the single-qubit channel applied to a 2x2 operator."""
    sym = sym_part(b)
    if group == "orthogonal":
        return 2.0 * sym - (np.trace(sym) / 2.0) * np.eye(2)
    return 3.0 * b - np.trace(b) * np.eye(2)


def shadow_factors(rec: ShadowRecord) -> list[np.ndarray]:
    """Per-qubit factors of a local classical shadow (no d x d intermediates)."""
    if rec.transform.kind != "local":
        raise ValueError("shadow_factors applies to local records")
    spec = rec.ensemble
    out = []
    for j, (u, b) in enumerate(zip(rec.transform.factors, rec.outcome)):
        proj = np.outer(u.conj()[b], u[b])  # U^dag |b><b| U
        out.append(_single_qubit_inverse(spec.group_for(j), proj))
    return out


def shadow_from_record(rec: ShadowRecord) -> np.ndarray:
    """The classical shadow: the channel pseudo-inverse of U^dag Pi_w U."""
    spec = rec.ensemble
    if rec.transform.kind == "local":
        return kron(*shadow_factors(rec))
    u = rec.transform.factors[0]
    w = spec.basis.vector(rec.outcome)
    v = u.conj().T @ w
    return pseudo_inverse(channel_for(spec), np.outer(v, v.conj()))


def _as_record_batch(records) -> ShadowRecords:
    if isinstance(records, ShadowRecords):
        return records
    records = list(records)
    if not records:
        raise ValueError("no records supplied")
    spec = records[0].ensemble
    if spec.scope == "global":
        transforms = np.stack([r.transform.factors[0] for r in records])
        outcomes = np.array([r.outcome for r in records], dtype=np.int64)
    else:
        transforms = np.stack([np.stack(r.transform.factors) for r in records])
        outcomes = np.array([r.outcome for r in records], dtype=np.int64)
    return ShadowRecords(spec, transforms, outcomes)


def _pauli_inverse_factor(group: str, letter: str) -> np.ndarray | None:
    """M^-1 applied to a single-qubit Pauli, or None when it is annihilated."""
    if letter == "I":
        return PAULIS["I"]
    if group == "orthogonal":
        if letter == "Y":
            return None
        return 2.0 * PAULIS[letter]
    return 3.0 * PAULIS[letter]


def per_shot_estimates(records, observable) -> np.ndarray:
    """o_s = Tr[O rho_s] for every record, without materializing shadows.

    Pauli strings under local ensembles use the factorized per-qubit fast
    path; everything else contracts the pseudo-inverted observable against
    the measured projector.
    """
    batch = _as_record_batch(records)
    spec = batch.spec
    s_count = len(batch)
    if isinstance(observable, PauliString) and spec.scope == "local":
        if observable.n != spec.n:
            raise ValueError("observable qubit count does not match the ensemble")
        values = np.full(s_count, complex(observable.coefficient))
        for j, letter in enumerate(observable.letters):
            if letter == "I":
                continue
            tilde = _pauli_inverse_factor(spec.group_for(j), letter)
            if tilde is None:
                return np.zeros(s_count)
            rows = np.take_along_axis(
                batch.transforms[:, j], batch.outcomes[:, j][:, None, None], axis=1
            )[:, 0, :]
            values *= np.einsum("sp,pq,sq->s", rows, tilde, rows.conj())
        return values.real
    obs = observable.to_matrix() if isinstance(observable, PauliString) else as_operator(observable)
    if obs.shape[0] != spec.d:
        raise ValueError("observable dimension does not match the ensemble")
    tilde = pseudo_inverse(batch.descriptor, obs)
    values = np.empty(s_count)
    d = spec.d
    chunk = max(1, _CHUNK_ELEMENTS // (d * d))
    basis = spec.basis.vectors
    for start in range(0, s_count, chunk):
        stop = min(s_count, start + chunk)
        if spec.scope == "global":
            u = batch.transforms[start:stop]
            sel = basis[:, batch.outcomes[start:stop]].T  # (chunk, d)
            rows = np.einsum("sm,smi->si", sel.conj(), u)
        else:
            rows = np.take_along_axis(
                batch.transforms[start:stop, 0],
                batch.outcomes[start:stop, 0][:, None, None],
                axis=1,
            )[:, 0, :]
            for j in range(1, spec.n):
                nxt = np.take_along_axis(
                    batch.transforms[start:stop, j],
                    batch.outcomes[start:stop, j][:, None, None],
                    axis=1,
                )[:, 0, :]
                rows = np.einsum("sa,sb->sab", rows, nxt).reshape(stop - start, -1)
        # o = v^dag Otilde v with v = U^dag|w>, i.e. v_i = conj(rows_i)
        values[start:stop] = np.einsum("si,ij,sj->s", rows, tilde, rows.conj()).real
    return values


def median_of_means(values: np.ndarray, batches: int) -> float:
    """Median of `batches` batch means; the remainder folds into the last batch."""
    values = np.asarray(values)
    count = values.shape[0]
    if batches < 1:
        raise ValueError("need at least one batch")
    if batches > count:
        raise ValueError(f"cannot split {count} records into {batches} batches")
    size = count // batches
    means = [values[i * size : (i + 1) * size].mean() for i in range(batches - 1)]
    means.append(values[(batches - 1) * size :].mean())
    return float(np.median(means))


@dataclass
class EstimateReport:
    observable_id: str
    mean: float
    median_of_means: float
    empirical_variance: float
    predicted_variance: float | None
    predicted_kind: str | None
    shots: int
    bias_warning: bool
    target: float | None = None


def _has_invisible_component(desc: ChannelDescriptor, observable) -> bool:
    spec = desc.spec
    if isinstance(observable, PauliString) and spec.scope == "local":
        return any(
            letter == "Y" and spec.group_for(j) == "orthogonal"
            for j, letter in enumerate(observable.letters)
        )
    obs = observable.to_matrix() if isinstance(observable, PauliString) else as_operator(observable)
    invisible = obs - visible_projector(desc, obs)
    return norm2(invisible) > 1e-10 * max(1.0, norm2(obs))


def estimate(
    records,
    observable,
    batches: int = 1,
    rho=None,
    observable_id: str | None = None,
) -> EstimateReport:
    """Aggregate per-shot estimates into a report.

    `rho` is the simulation-only true state; when given, the report carries
    the exact predicted variance and the target expectation value.
    """
    batch = _as_record_batch(records)
    values = per_shot_estimates(batch, observable)
    count = values.shape[0]
    if batches > count:
        raise ValueError(f"cannot split {count} records into {batches} batches")
    mean = float(values.mean())
    mom = median_of_means(values, batches)
    emp_var = float(np.var(values, ddof=1)) if count >= 2 else 0.0
    predicted = None
    predicted_kind = None
    from . import variance  # local import; variance depends on this module

    prediction = variance.predict_variance(batch.spec, observable, rho)
    if prediction is not None:
        predicted = prediction.value
        predicted_kind = prediction.kind
    target = None
    if rho is not None:
        obs = observable.to_matrix() if isinstance(observable, PauliString) else as_operator(observable)
        target = float(np.trace(obs @ rho).real)
    if observable_id is None:
        observable_id = str(observable) if isinstance(observable, PauliString) else "operator"
    return EstimateReport(
        observable_id=observable_id,
        mean=mean,
        median_of_means=mom,
        empirical_variance=emp_var,
        predicted_variance=predicted,
        predicted_kind=predicted_kind,
        shots=count,
        bias_warning=_has_invisible_component(batch.descriptor, observable),
        target=target,
    )


# ---------------------------------------------------------------------------
# Experiment configuration and the runnable front end.

_STATE_LABELS = {
    "0": np.array([1.0, 0.0], dtype=complex),
    "1": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
    "-": np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0),
    "+i": np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0),
    "-i": np.array([1.0, -1.0j], dtype=complex) / np.sqrt(2.0),
}


def build_state(state: dict, n: int) -> np.ndarray:
    d = 2**n
    kind = state.get("kind")
    if kind == "maximally_mixed":
        return identity(d) / d
    if kind == "computational":
        if "bits" in state:
            idx = int(str(state["bits"]), 2)
        else:
            idx = int(state.get("index", 0))
        if not 0 <= idx < d:
            raise ConfigError(f"computational index {idx} out of range for n={n}")
        rho = np.zeros((d, d), dtype=complex)
        rho[idx, idx] = 1.0
        return rho
    if kind == "random_pure":
        from .sampling import random_pure_state

        return random_pure_state(RngStream(int(state.get("seed", 0))), d)
    if kind == "product":
        factors = state.get("factors")
        if not isinstance(factors, list) or len(factors) != n:
            raise ConfigError("product state needs one factor label per qubit")
        try:
            vecs = [_STATE_LABELS[str(f)] for f in factors]
        except KeyError as exc:
            raise ConfigError(f"unknown single-qubit state label {exc}") from exc
        v = vecs[0]
        for w in vecs[1:]:
            v = np.kron(v, w)
        return np.outer(v, v.conj())
    raise ConfigError(f"unknown state kind {kind!r}")


def build_observable(obs: dict, n: int) -> tuple[str, PauliString | np.ndarray]:
    kind = obs.get("kind", "pauli")
    if kind == "pauli":
        string = obs.get("string")
        if not isinstance(string, str) or len(string) != n:
            raise ConfigError(f"pauli observable needs a length-{n} string")
        p = PauliString.from_string(string, complex(obs.get("coefficient", 1.0)))
        return str(obs.get("id", string)), p
    if kind == "random_symmetric":
        from .variance import random_symmetric_observable

        seed = int(obs.get("seed", 0))
        a = random_symmetric_observable(RngStream(seed), 2**n)
        return str(obs.get("id", f"random_symmetric:{seed}")), a
    if kind == "basis_projector":
        idx = int(obs.get("index", 0))
        d = 2**n
        if not 0 <= idx < d:
            raise ConfigError(f"projector index {idx} out of range")
        m = np.zeros((d, d), dtype=complex)
        m[idx, idx] = 1.0
        return str(obs.get("id", f"projector:{idx}")), m
    if kind == "matrix":
        real = np.asarray(obs.get("real"), dtype=float)
        imag = np.asarray(obs.get("imag", np.zeros_like(real)), dtype=float)
        m = real + 1j * imag
        if m.shape != (2**n, 2**n):
            raise ConfigError("matrix observable has the wrong shape")
        return str(obs.get("id", "matrix")), m
    raise ConfigError(f"unknown observable kind {kind!r}")


@dataclass
class ExperimentConfig:
    seed: int
    n: int
    scope: str
    groups: tuple[str, ...]
    basis_tag: str
    state: dict
    shots: int
    observables: list[dict]
    batches: int = 1
    out_csv: str | None = None
    records_out: str | None = None
    allow_bias: bool = False
    epsilon: float | None = None
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, cfg: dict) -> "ExperimentConfig":
        if not isinstance(cfg, dict):
            raise ConfigError("configuration must be a JSON object")
        required = ("seed", "n", "ensemble", "state", "shots", "observables")
        missing = [k for k in required if k not in cfg]
        if missing:
            raise ConfigError(f"missing configuration keys: {missing}")
        ens = cfg["ensemble"]
        if not isinstance(ens, dict) or "scope" not in ens:
            raise ConfigError("ensemble must be an object with a scope")
        scope = ens["scope"]
        groups = ens.get("groups", ["orthogonal"])
        if isinstance(groups, str):
            groups = [groups]
        n = int(cfg["n"])
        if scope == "local" and len(groups) == 1:
            groups = groups * n
        shots = int(cfg["shots"])
        if shots < 1:
            raise ConfigError("shots must be positive")
        batches = int(cfg.get("batches", 1))
        if batches < 1 or batches > shots:
            raise ConfigError("batches must lie in [1, shots]")
        observables = cfg["observables"]
        if not isinstance(observables, list) or not observables:
            raise ConfigError("observables must be a non-empty list")
        emit = cfg.get("emit", {}) or {}
        epsilon = cfg.get("epsilon")
        return cls(
            seed=int(cfg["seed"]),
            n=n,
            scope=str(scope),
            groups=tuple(str(g) for g in groups),
            basis_tag=str(ens.get("basis", "computational")),
            state=dict(cfg["state"]),
            shots=shots,
            observables=[dict(o) for o in observables],
            batches=batches,
            out_csv=emit.get("csv"),
            records_out=emit.get("records"),
            allow_bias=bool(cfg.get("allow_bias", False)),
            epsilon=None if epsilon is None else float(epsilon),
            raw=dict(cfg),
        )

    def ensemble_spec(self) -> EnsembleSpec:
        basis = basis_from_tag(self.basis_tag, self.n)
        try:
            return EnsembleSpec(self.scope, self.groups, basis, self.n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _format_float(x: float) -> str:
    return repr(float(x))


def write_reports_csv(path: str, reports: list[EstimateReport]) -> None:
    lines = ["observable_id,mean,mom,emp_var,pred_var,shots,bias_warning"]
    for r in reports:
        pred = "" if r.predicted_variance is None else _format_float(r.predicted_variance)
        lines.append(
            ",".join(
                [
                    r.observable_id,
                    _format_float(r.mean),
                    _format_float(r.median_of_means),
                    _format_float(r.empirical_variance),
                    pred,
                    str(r.shots),
                    "true" if r.bias_warning else "false",
                ]
            )
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def run_experiment(config: ExperimentConfig, keep_records: bool = False):
    """Run the full pipeline; deterministic given (seed, config).

    All observables are estimated from one shared record set.  Returns
    (reports, records) where records is None unless requested or persisted.
    """
    t0 = time.perf_counter()
    spec = config.ensemble_spec()
    rho = build_state(config.state, config.n)
    observables = [build_observable(o, config.n) for o in config.observables]
    records = collect_records(RngStream(config.seed), rho, spec, config.shots)
    reports = [
        estimate(records, obs, config.batches, rho=rho, observable_id=oid)
        for oid, obs in observables
    ]
    if config.out_csv:
        write_reports_csv(config.out_csv, reports)
        meta = {
            "seed": config.seed,
            "rng_algorithm": RNG_ALGORITHM,
            "package_version": __version__,
            "numpy_version": np.__version__,
            "ensemble": spec.label(),
            "config": config.raw,
            "wall_time_s": time.perf_counter() - t0,
        }
        if config.epsilon is not None:
            max_var = max(
                (r.predicted_variance for r in reports if r.predicted_variance is not None),
                default=None,
            )
            meta["sample_complexity"] = {
                "form": "S = O(log(M) / epsilon^2 * max_i Var[o_i])",
                "m_observables": len(reports),
                "log_m": float(np.log(len(reports))),
                "epsilon": config.epsilon,
                "max_predicted_variance": max_var,
                "order_argument": None
                if max_var is None
                else float(np.log(len(reports)) / config.epsilon**2 * max_var),
                "note": "order bound only; the constant is unspecified",
            }
        with open(config.out_csv + ".meta.json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if config.records_out:
        np.savez_compressed(
            config.records_out,
            scope=spec.scope,
            transforms=records.transforms,
            outcomes=records.outcomes,
        )
    return reports, (records if (keep_records or config.records_out) else None)
