"""Interferometric geometry of mixed quantum states and its thermal pullbacks."""

from .bandmodels import BlochPoint, TwoBandModel, bloch_field, bloch_point, dirac_model, get_model
from .errors import (
    AmbiguousClustering,
    ConfigError,
    GaplessParameter,
    GaplessPoint,
    InterfGeomError,
    InvalidSetup,
    InvalidState,
    MetricDiagnosticsError,
    NotHermitian,
    NotTangent,
    StepTooLarge,
    TypeChanged,
    TypeMismatch,
)
from .geometry import (
    BundlePoint,
    MetricValue,
    bures_metric_fd,
    bures_metric_parts_fd,
    dist_base,
    dist_base_bruteforce,
    dist_base_sq,
    dist_total,
    hermitian_form,
    horizontal_project,
    interferometric_metric_fd,
    purification,
    purification_inner,
    vertical_project,
)
from .interferometer import (
    InterferometerSetup,
    max_port_probability,
    port_probability,
    simulate_chain,
)
from .pullback import (
    MetricSample,
    bures_integrand,
    bz_integrate,
    chern_number,
    fubini_study_integrand,
    interf_integrand,
    metric_scan,
    per_momentum_oracle,
)
from .states import Block, MixedState, TypedDecomposition, compose, decompose, gibbs

__version__ = "0.1.0"

__all__ = [
    "AmbiguousClustering",
    "BlochPoint",
    "Block",
    "BundlePoint",
    "ConfigError",
    "GaplessParameter",
    "GaplessPoint",
    "InterfGeomError",
    "InterferometerSetup",
    "InvalidSetup",
    "InvalidState",
    "MetricDiagnosticsError",
    "MetricSample",
    "MetricValue",
    "MixedState",
    "NotHermitian",
    "NotTangent",
    "StepTooLarge",
    "TwoBandModel",
    "TypeChanged",
    "TypeMismatch",
    "TypedDecomposition",
    "bloch_field",
    "bloch_point",
    "bures_integrand",
    "bures_metric_fd",
    "bures_metric_parts_fd",
    "bz_integrate",
    "chern_number",
    "compose",
    "decompose",
    "dirac_model",
    "dist_base",
    "dist_base_bruteforce",
    "dist_base_sq",
    "dist_total",
    "fubini_study_integrand",
    "get_model",
    "gibbs",
    "hermitian_form",
    "horizontal_project",
    "interf_integrand",
    "interferometric_metric_fd",
    "max_port_probability",
    "metric_scan",
    "per_momentum_oracle",
    "port_probability",
    "purification",
    "purification_inner",
    "simulate_chain",
    "vertical_project",
]
