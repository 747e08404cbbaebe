"""Sample-based estimators of the disagreement distance between two networks.

Every estimator works on a caller-supplied sample set.  Evaluating many pairs
on one shared set turns symmetry and the triangle inequality into exact
consequences of pointwise indicator inequalities.  Empirical measures are
kept as integer counts until the final division so that algebraically equal
estimators produce identical floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .net import NetworkParams, argmax_sets, forward

__all__ = [
    "DistanceEstimate",
    "region_indices",
    "region_index",
    "disagreement_count",
    "d_mu_disagreement",
    "d_mu_symdiff",
    "d_mu_labelset",
    "generalization_error",
    "omega0_mass",
    "ci95",
]

Z95 = 1.96


def ci95(p: float, n: int) -> float:
    """Normal-approximation 95% half-width for a proportion."""
    return Z95 * math.sqrt(max(p * (1.0 - p), 0.0) / n)


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    n_samples: int
    ci_half_width: float
    estimator: str

    @classmethod
    def from_count(cls, count: int, n: int, estimator: str) -> "DistanceEstimate":
        p = count / n
        return cls(p, n, ci95(p, n), estimator)

    def to_dict(self) -> dict:
        return {"value": self.value, "n": self.n_samples, "ci95": self.ci_half_width, "estimator": self.estimator}


def _as_samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[0] == 0:
        raise ValueError("samples must be nonempty")
    return x


def region_indices(params: NetworkParams, samples, tie_tol: float = 0.0) -> np.ndarray:
    """Region index per sample: the unique top class in 1..K, or 0 on a tie."""
    if tie_tol < 0:
        raise ValueError("tie_tol must be nonnegative")
    x = _as_samples(samples)
    out = forward(params, x)
    if out.shape[1] == 2:
        # same comparisons as argmax_sets, without the mask
        f1, f2 = out[:, 0], out[:, 1]
        return np.where(f2 < f1 - tie_tol, 1, np.where(f1 < f2 - tie_tol, 2, 0))
    mask = argmax_sets(out, tie_tol)
    unique = mask.sum(axis=1) == 1
    return np.where(unique, np.argmax(mask, axis=1) + 1, 0)


def region_index(params: NetworkParams, x, tie_tol: float = 0.0) -> int:
    return int(region_indices(params, np.asarray(x, dtype=float)[None, :], tie_tol)[0])


def disagreement_count(r1: np.ndarray, r2: np.ndarray) -> int:
    return int(np.count_nonzero(r1 != r2))


def d_mu_disagreement(w: NetworkParams, w_other: NetworkParams, samples, tie_tol: float = 0.0) -> DistanceEstimate:
    """Fraction of samples on which the two region indices differ."""
    x = _as_samples(samples)
    count = disagreement_count(region_indices(w, x, tie_tol), region_indices(w_other, x, tie_tol))
    return DistanceEstimate.from_count(count, x.shape[0], "disagreement")


def d_mu_symdiff(w: NetworkParams, w_other: NetworkParams, samples, tie_tol: float = 0.0) -> DistanceEstimate:
    """Half the summed empirical mass of the region-wise symmetric differences."""
    x = _as_samples(samples)
    if w.n_classes != w_other.n_classes:
        raise ValueError("networks must share the number of classes")
    r1 = region_indices(w, x, tie_tol)
    r2 = region_indices(w_other, x, tie_tol)
    total = 0
    for k in range(w.n_classes + 1):
        total += int(np.count_nonzero((r1 == k) != (r2 == k)))
    # each differing sample lies in exactly two symmetric differences
    assert total % 2 == 0
    return DistanceEstimate.from_count(total // 2, x.shape[0], "symmetric-difference")


def d_mu_labelset(w: NetworkParams, w_other: NetworkParams, samples, tie_tol: float = 0.0) -> DistanceEstimate:
    """Diagnostic variant: disagreement as inequality of the full argmax sets.

    Differs from :func:`d_mu_disagreement` only where both networks tie with
    different tie sets, which needs ``K >= 3``.
    """
    x = _as_samples(samples)
    m1 = argmax_sets(forward(w, x), tie_tol)
    m2 = argmax_sets(forward(w_other, x), tie_tol)
    count = int(np.count_nonzero(np.any(m1 != m2, axis=1)))
    return DistanceEstimate.from_count(count, x.shape[0], "label-set")


def generalization_error(w: NetworkParams, truth: Callable, samples, tie_tol: float = 0.0) -> DistanceEstimate:
    """Fraction of samples where the predicted label set is not ``{truth(x)}``.

    ``truth`` is vectorized: it maps an ``(N, n_0)`` array to ``N`` class labels.
    """
    x = _as_samples(samples)
    labels = np.asarray(truth(x)).reshape(-1)
    if labels.shape[0] != x.shape[0]:
        raise ValueError("truth must return one label per sample")
    count = int(np.count_nonzero(region_indices(w, x, tie_tol) != labels))
    return DistanceEstimate.from_count(count, x.shape[0], "disagreement")


def omega0_mass(w: NetworkParams, samples, tie_tol: float = 0.0) -> DistanceEstimate:
    """Empirical mass of the tie region."""
    x = _as_samples(samples)
    count = int(np.count_nonzero(region_indices(w, x, tie_tol) == 0))
    return DistanceEstimate.from_count(count, x.shape[0], "disagreement")
