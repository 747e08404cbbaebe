"""Feedforward classifier networks and their set-valued label predictions.

A network with ``L`` hidden layers maps ``x`` through ``L + 1`` affine layers,
each followed by the same elementwise activation.  The predicted label is the
argmax *set* of the ``K`` outputs; ties are reported, never resolved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

__all__ = [
    "Activation",
    "NetworkParams",
    "LabelPrediction",
    "ShapeError",
    "DomainError",
    "param_count",
    "forward",
    "predict",
    "flatten",
    "unflatten",
    "euclidean_distance",
    "toy_network",
]

ACTIVATION_KINDS = ("identity", "tanh", "logistic", "leaky_relu", "softplus")


class ShapeError(ValueError):
    """Array dimensions do not match the network layout."""


class DomainError(ValueError):
    """Non-finite values where finite ones are required."""


@dataclass(frozen=True)
class Activation:
    """Continuous, strictly increasing elementwise nonlinearity.

    ``slope`` is only used by ``leaky_relu`` and must be positive; the plain
    rectifier is flat on the negative axis and therefore not allowed.
    """

    kind: str = "identity"
    slope: float = 0.01

    def __post_init__(self):
        if self.kind not in ACTIVATION_KINDS:
            raise ValueError(f"unknown activation kind {self.kind!r}; expected one of {ACTIVATION_KINDS}")
        if self.kind == "leaky_relu" and not self.slope > 0:
            raise ValueError("leaky_relu slope must be > 0")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "identity":
            return z
        if self.kind == "tanh":
            return np.tanh(z)
        if self.kind == "logistic":
            return expit(z)
        if self.kind == "leaky_relu":
            return np.where(z >= 0, z, self.slope * z)
        return np.logaddexp(0.0, z)

    def to_dict(self) -> dict:
        if self.kind == "leaky_relu":
            return {"kind": self.kind, "slope": self.slope}
        return {"kind": self.kind}

    @classmethod
    def from_dict(cls, d: dict) -> "Activation":
        if "slope" in d:
            return cls(d["kind"], float(d["slope"]))
        return cls(d["kind"])


def param_count(layer_dims: Sequence[int]) -> int:
    """Length of the flat parameter vector, ``sum n_l * (n_{l-1} + 1)``."""
    dims = list(layer_dims)
    return sum(dims[l] * (dims[l - 1] + 1) for l in range(1, len(dims)))


@dataclass(frozen=True)
class NetworkParams:
    layer_dims: tuple
    weights: tuple
    biases: tuple
    activation: Activation = field(default_factory=Activation)

    def __post_init__(self):
        dims = tuple(int(n) for n in self.layer_dims)
        if len(dims) < 2 or any(n < 1 for n in dims):
            raise ShapeError(f"layer_dims must hold at least two positive sizes, got {self.layer_dims}")
        n_layers = len(dims) - 1
        if len(self.weights) != n_layers or len(self.biases) != n_layers:
            raise ShapeError(f"expected {n_layers} weight matrices and bias vectors")
        weights, biases = [], []
        for l, (W, b) in enumerate(zip(self.weights, self.biases), start=1):
            W = np.array(W, dtype=float)
            b = np.array(b, dtype=float)
            if W.shape != (dims[l], dims[l - 1]):
                raise ShapeError(f"layer {l}: weight shape {W.shape}, expected {(dims[l], dims[l - 1])}")
            if b.shape != (dims[l],):
                raise ShapeError(f"layer {l}: bias shape {b.shape}, expected {(dims[l],)}")
            W.flags.writeable = False
            b.flags.writeable = False
            weights.append(W)
            biases.append(b)
        object.__setattr__(self, "layer_dims", dims)
        object.__setattr__(self, "weights", tuple(weights))
        object.__setattr__(self, "biases", tuple(biases))

    @property
    def n_inputs(self) -> int:
        return self.layer_dims[0]

    @property
    def n_classes(self) -> int:
        return self.layer_dims[-1]

    @property
    def n_hidden(self) -> int:
        return len(self.layer_dims) - 2

    @property
    def n_params(self) -> int:
        return param_count(self.layer_dims)

    def __eq__(self, other):
        if not isinstance(other, NetworkParams):
            return NotImplemented
        return (
            self.layer_dims == other.layer_dims
            and self.activation == other.activation
            and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
            and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases))
        )

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "layer_dims": list(self.layer_dims),
            "activation": self.activation.to_dict(),
            "weights": [W.tolist() for W in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkParams":
        return cls(
            layer_dims=tuple(d["layer_dims"]),
            weights=tuple(d["weights"]),
            biases=tuple(d["biases"]),
            activation=Activation.from_dict(d.get("activation", {"kind": "identity"})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "NetworkParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class LabelPrediction:
    labels: frozenset
    is_tie: bool


def _check_inputs(params: NetworkParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim not in (1, 2) or x.shape[-1] != params.n_inputs:
        raise ShapeError(f"input of shape {x.shape} does not match n_0={params.n_inputs}")
    if not np.all(np.isfinite(x)):
        raise DomainError("inputs must be finite")
    return x


def forward(params: NetworkParams, x) -> np.ndarray:
    """Evaluate the network on one point ``(n_0,)`` or a batch ``(N, n_0)``."""
    y = _check_inputs(params, x)
    act = params.activation
    for W, b in zip(params.weights, params.biases):
        y = act(y @ W.T + b)
    return y


def argmax_sets(outputs: np.ndarray, tie_tol: float = 0.0) -> np.ndarray:
    """Boolean mask of the components within ``tie_tol`` of the row maximum."""
    if tie_tol < 0:
        raise ValueError("tie_tol must be nonnegative")
    outputs = np.asarray(outputs, dtype=float)
    top = outputs.max(axis=-1, keepdims=True)
    return outputs >= top - tie_tol


def predict(params: NetworkParams, x, tie_tol: float = 0.0) -> LabelPrediction:
    """Argmax label set of a single point (classes numbered from 1)."""
    if tie_tol < 0:
        raise ValueError("tie_tol must be nonnegative")
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ShapeError("predict takes a single point; use metric.region_indices for batches")
    mask = argmax_sets(forward(params, x), tie_tol)
    labels = frozenset(int(j) + 1 for j in np.flatnonzero(mask))
    return LabelPrediction(labels=labels, is_tie=len(labels) > 1)


def flatten(params: NetworkParams) -> np.ndarray:
    """Per layer: column-stacked weights then bias; layers in order."""
    parts = []
    for W, b in zip(params.weights, params.biases):
        parts.append(W.ravel(order="F"))
        parts.append(b)
    return np.concatenate(parts)


def unflatten(layer_dims: Sequence[int], activation: Activation, v) -> NetworkParams:
    dims = tuple(int(n) for n in layer_dims)
    v = np.asarray(v, dtype=float)
    m = param_count(dims)
    if v.ndim != 1 or v.size != m:
        raise ShapeError(f"flat vector has shape {v.shape}, expected ({m},) for layer_dims {dims}")
    weights, biases = [], []
    pos = 0
    for l in range(1, len(dims)):
        rows, cols = dims[l], dims[l - 1]
        weights.append(v[pos : pos + rows * cols].reshape((rows, cols), order="F"))
        pos += rows * cols
        biases.append(v[pos : pos + rows])
        pos += rows
    return NetworkParams(dims, tuple(weights), tuple(biases), activation)


def euclidean_distance(w, w_other) -> float:
    w = np.asarray(w, dtype=float)
    w_other = np.asarray(w_other, dtype=float)
    if w.shape != w_other.shape:
        raise ShapeError(f"length mismatch: {w.shape} vs {w_other.shape}")
    return float(np.linalg.norm(w - w_other))


def toy_network(w1, w2, w3, w4, b1, b2, activation: Activation | None = None) -> NetworkParams:
    """Two-input, two-class network without hidden layer.

    Weights are named row-wise: class 1 scores ``w1*x1 + w2*x2 + b1`` and
    class 2 scores ``w3*x1 + w4*x2 + b2`` before the activation.
    """
    return NetworkParams(
        (2, 2),
        (np.array([[w1, w2], [w3, w4]], dtype=float),),
        (np.array([b1, b2], dtype=float),),
        activation or Activation(),
    )
