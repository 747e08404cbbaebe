"""Equivalence classes of networks at sample resolution, metric-axiom checks,
and continuity probes of the projection onto classes.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measure import chunk_rng
from .metric import d_mu_disagreement, omega0_mass, region_indices
from .net import NetworkParams, flatten, unflatten

__all__ = [
    "ClassPartition",
    "AxiomReport",
    "ContinuityProbeResult",
    "same_class",
    "cluster_classes",
    "distance_counts",
    "metric_axiom_suite",
    "ball_perturbations",
    "continuity_probe",
]


@dataclass
class ClassPartition:
    representatives: list
    assignment: list
    threshold: float

    @property
    def n_classes(self) -> int:
        return len(self.representatives)

    def members(self, k: int) -> list:
        return [i for i, c in enumerate(self.assignment) if c == k]

    def to_dict(self) -> dict:
        return {
            "representatives": [np.asarray(r).tolist() for r in self.representatives],
            "assignment": list(self.assignment),
            "threshold": self.threshold,
        }


def same_class(w: NetworkParams, w_other: NetworkParams, samples, threshold: float = 0.0, tie_tol: float = 0.0) -> bool:
    """Equivalence test: estimated distance at most ``threshold``.

    With ``threshold=0`` and ``N`` samples, a positive answer bounds the true
    distance below ``3/N`` at 95% confidence.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    return d_mu_disagreement(w, w_other, samples, tie_tol).value <= threshold


def cluster_classes(params_list: Sequence[NetworkParams], samples, threshold: float = 0.0, tie_tol: float = 0.0) -> ClassPartition:
    """Greedy leader clustering in input order."""
    if len(params_list) == 0:
        raise ValueError("params_list must be nonempty")
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("samples must be a nonempty (N, n_0) array")
    n = x.shape[0]
    leaders: list[np.ndarray] = []
    reps: list[np.ndarray] = []
    assignment = []
    for params in params_list:
        r = region_indices(params, x, tie_tol)
        for k, lead in enumerate(leaders):
            if np.count_nonzero(r != lead) / n <= threshold:
                assignment.append(k)
                break
        else:
            leaders.append(r)
            reps.append(flatten(params))
            assignment.append(len(leaders) - 1)
    return ClassPartition(reps, assignment, threshold)


def distance_counts(params_list: Sequence[NetworkParams], samples, tie_tol: float = 0.0) -> np.ndarray:
    """Integer disagreement counts for every ordered pair, each computed directly."""
    x = np.asarray(samples, dtype=float)
    regions = [region_indices(p, x, tie_tol) for p in params_list]
    k = len(regions)
    counts = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            counts[i, j] = np.count_nonzero(regions[i] != regions[j])
    return counts


@dataclass
class AxiomReport:
    distances: np.ndarray
    n_samples: int
    negative: int = 0
    nonzero_diagonal: int = 0
    asymmetric: int = 0
    triangle_violations: int = 0
    triangle_checks: int = 0
    unordered_triples: int = 0

    @property
    def total_violations(self) -> int:
        return self.negative + self.nonzero_diagonal + self.asymmetric + self.triangle_violations

    def to_dict(self) -> dict:
        return {
            "distances": self.distances.tolist(),
            "n_samples": self.n_samples,
            "negative": self.negative,
            "nonzero_diagonal": self.nonzero_diagonal,
            "asymmetric": self.asymmetric,
            "triangle_violations": self.triangle_violations,
            "triangle_checks": self.triangle_checks,
            "unordered_triples": self.unordered_triples,
        }


def metric_axiom_suite(params_list: Sequence[NetworkParams], samples, tie_tol: float = 0.0) -> AxiomReport:
    """Check the metric axioms on one shared sample set.

    Comparisons run on integer counts, so no float rounding can manufacture a
    violation.  The triangle inequality is checked for every ordered triple of
    distinct indices.
    """
    k = len(params_list)
    if k < 3:
        raise ValueError("need at least 3 networks")
    x = np.asarray(samples, dtype=float)
    counts = distance_counts(params_list, x, tie_tol)
    rep = AxiomReport(distances=counts / x.shape[0], n_samples=x.shape[0])
    rep.negative = int(np.count_nonzero(counts < 0))
    rep.nonzero_diagonal = int(np.count_nonzero(np.diag(counts)))
    rep.asymmetric = int(np.count_nonzero(np.triu(counts != counts.T)))
    for i, j, m in itertools.permutations(range(k), 3):
        rep.triangle_checks += 1
        if counts[i, j] > counts[i, m] + counts[m, j]:
            rep.triangle_violations += 1
    rep.unordered_triples = len(list(itertools.combinations(range(k), 3)))
    return rep


@dataclass
class ContinuityProbeResult:
    center: np.ndarray
    radius: float
    max_quotient_distance: float
    argmax_neighbor: np.ndarray
    omega0_mass_center: float
    n_neighbors: int
    n_neighbor_classes: int
    distances: list = field(default_factory=list, repr=False)

    @property
    def discontinuity_bound(self) -> float:
        """Lower bound on the sup distance implied by the center's tie mass."""
        return self.omega0_mass_center / 2

    def to_dict(self) -> dict:
        return {
            "center": self.center.tolist(),
            "radius": self.radius,
            "max_quotient_distance": self.max_quotient_distance,
            "argmax_neighbor": self.argmax_neighbor.tolist(),
            "omega0_mass_center": self.omega0_mass_center,
            "discontinuity_bound": self.discontinuity_bound,
            "n_neighbors": self.n_neighbors,
            "n_neighbor_classes": self.n_neighbor_classes,
        }


def ball_perturbations(center: np.ndarray, radius: float, n: int, seed: int) -> np.ndarray:
    """``n`` points uniform in the Euclidean ball around ``center``."""
    rng = chunk_rng(seed, 0)
    dim = center.size
    direction = rng.standard_normal((n, dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / dim)
    return center + direction * r[:, None]


def continuity_probe(
    center: NetworkParams,
    radius: float,
    n_neighbors: int,
    samples,
    seed: int,
    tie_tol: float = 0.0,
    workers: int = 1,
) -> ContinuityProbeResult:
    """Empirical sup of the quotient distance over a Euclidean neighbourhood."""
    if not radius > 0:
        raise ValueError("radius must be positive")
    if n_neighbors < 1:
        raise ValueError("n_neighbors must be >= 1")
    x = np.asarray(samples, dtype=float)
    flat = flatten(center)
    neighbors = ball_perturbations(flat, radius, n_neighbors, seed)
    nets = [unflatten(center.layer_dims, center.activation, v) for v in neighbors]

    def dist(net):
        return d_mu_disagreement(center, net, x, tie_tol).value

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            dists = list(pool.map(dist, nets))
    else:
        dists = [dist(net) for net in nets]
    best = int(np.argmax(dists))
    partition = cluster_classes(nets, x, 0.0, tie_tol)
    return ContinuityProbeResult(
        center=flat,
        radius=float(radius),
        max_quotient_distance=float(dists[best]),
        argmax_neighbor=neighbors[best],
        omega0_mass_center=omega0_mass(center, x, tie_tol).value,
        n_neighbors=n_neighbors,
        n_neighbor_classes=partition.n_classes,
        distances=dists,
    )
