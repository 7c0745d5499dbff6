"""Classical shadow tomography with orthogonal-group (real) randomized
measurements: channels, estimators, and variance validation at desk scale."""

__version__ = "0.1.0"

from .bases import (
    MeasurementBasis,
    basis_from_tag,
    computational_basis,
    random_basis,
    reality,
    sh_basis,
)
from .channels import (
    ChannelDescriptor,
    ChannelSpectrum,
    EnsembleSpec,
    InvisibleObservableError,
    apply_channel,
    channel_for,
    depolarize,
    global_ensemble,
    local_ensemble,
    mixture_decomposition,
    pauli_parity_decompose,
    pseudo_inverse,
    visible_projector,
)
from .commutant import (
    BrauerPairing,
    enumerate_pairings,
    pair_twirl_coefficients,
    triple_twirl_coefficients,
    mc_twirl,
    realize,
    twirl_project,
)
from .engine import (
    EstimateReport,
    ExperimentConfig,
    ShadowRecord,
    ShadowRecords,
    collect_records,
    estimate,
    per_shot_estimates,
    run_experiment,
    shadow_from_record,
    simulate_measurement,
)
from .linalg import ResourceLimitError, kron, partial_trace_first
from .pauli import PauliString
from .sampling import (
    RngStream,
    SampledTransform,
    haar_orthogonal,
    haar_unitary,
    real_clifford_1q,
    sample_transform,
)
from .variance import (
    VariancePrediction,
    bound_local,
    empirical_variance,
    overlap_f,
    random_symmetric_observable,
    ratio_sweep,
    second_moment_local_pauli,
    var_global_alpha,
    var_global_real,
    var_global_unitary,
)

__all__ = [
    "__version__",
    "MeasurementBasis",
    "basis_from_tag",
    "computational_basis",
    "random_basis",
    "reality",
    "sh_basis",
    "ChannelDescriptor",
    "ChannelSpectrum",
    "EnsembleSpec",
    "InvisibleObservableError",
    "apply_channel",
    "channel_for",
    "depolarize",
    "global_ensemble",
    "local_ensemble",
    "mixture_decomposition",
    "pauli_parity_decompose",
    "pseudo_inverse",
    "visible_projector",
    "BrauerPairing",
    "enumerate_pairings",
    "pair_twirl_coefficients",
    "triple_twirl_coefficients",
    "mc_twirl",
    "realize",
    "twirl_project",
    "EstimateReport",
    "ExperimentConfig",
    "ShadowRecord",
    "ShadowRecords",
    "collect_records",
    "estimate",
    "per_shot_estimates",
    "run_experiment",
    "shadow_from_record",
    "simulate_measurement",
    "ResourceLimitError",
    "kron",
    "partial_trace_first",
    "PauliString",
    "RngStream",
    "SampledTransform",
    "haar_orthogonal",
    "haar_unitary",
    "real_clifford_1q",
    "sample_transform",
    "VariancePrediction",
    "bound_local",
    "empirical_variance",
    "overlap_f",
    "random_symmetric_observable",
    "ratio_sweep",
    "second_moment_local_pauli",
    "var_global_alpha",
    "var_global_real",
    "var_global_unitary",
]
