"""Disagreement distance between classifier networks and its quotient metric."""

from .measure import InputDomain, InputMeasure, ball, box, density, kappa, sample
from .metric import (
    DistanceEstimate,
    d_mu_disagreement,
    d_mu_symdiff,
    generalization_error,
    omega0_mass,
    region_index,
    region_indices,
)
from .net import (
    Activation,
    LabelPrediction,
    NetworkParams,
    euclidean_distance,
    flatten,
    forward,
    predict,
    toy_network,
    unflatten,
)
from .oracle import HalfPlane, exact_disagreement, halfplane_of, quad_disagreement
from .quotient import ClassPartition, cluster_classes, continuity_probe, metric_axiom_suite, same_class

__version__ = "0.1.0"

__all__ = [
    "InputDomain",
    "InputMeasure",
    "ball",
    "box",
    "density",
    "kappa",
    "sample",
    "DistanceEstimate",
    "d_mu_disagreement",
    "d_mu_symdiff",
    "generalization_error",
    "omega0_mass",
    "region_index",
    "region_indices",
    "Activation",
    "LabelPrediction",
    "NetworkParams",
    "euclidean_distance",
    "flatten",
    "forward",
    "predict",
    "toy_network",
    "unflatten",
    "HalfPlane",
    "exact_disagreement",
    "halfplane_of",
    "quad_disagreement",
    "ClassPartition",
    "cluster_classes",
    "continuity_probe",
    "metric_axiom_suite",
    "same_class",
]
