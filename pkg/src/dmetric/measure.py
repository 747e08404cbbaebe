"""Bounded input domains, probability laws on them, and the density bound kappa.

Random streams
--------------
Samples are produced in fixed-size chunks of ``CHUNK_SIZE`` points.  Chunk
``j`` draws from ``PCG64(SeedSequence(seed, spawn_key=(j,)))``, so sample ``i``
depends only on ``(seed, i // CHUNK_SIZE)`` and the result is bit-identical
whatever the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats
from scipy.special import gammaln

__all__ = [
    "InputDomain",
    "InputMeasure",
    "CHUNK_SIZE",
    "chunk_rng",
    "sample",
    "density",
    "kappa",
    "box",
    "ball",
    "measure_from_config",
]

CHUNK_SIZE = 1 << 15
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class InputDomain:
    """Either a closed ball of ``radius`` around the origin or an axis-aligned box."""

    kind: str
    dim: int
    radius: float | None = None
    bounds: tuple | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("domain dimension must be positive")
        if self.kind == "ball":
            if self.radius is None or not (0 < self.radius < math.inf):
                raise ValueError("ball radius must be finite and positive")
        elif self.kind == "box":
            b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
            if len(b) != self.dim:
                raise ValueError(f"box needs {self.dim} (lower, upper) pairs, got {len(b)}")
            for lo, hi in b:
                if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                    raise ValueError(f"invalid box bounds ({lo}, {hi})")
            object.__setattr__(self, "bounds", b)
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @property
    def volume(self) -> float:
        if self.kind == "box":
            return float(np.prod([hi - lo for lo, hi in self.bounds]))
        n = self.dim
        return math.exp((n / 2) * math.log(math.pi) + n * math.log(self.radius) - gammaln(n / 2 + 1))

    def bounding_box(self) -> tuple:
        if self.kind == "box":
            return self.bounds
        return tuple((-self.radius, self.radius) for _ in range(self.dim))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "ball":
            return np.sum(x * x, axis=-1) <= self.radius**2
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return np.all((x >= lo) & (x <= hi), axis=-1)

    def distance_to(self, point) -> float:
        """Euclidean distance from ``point`` to the domain (0 inside)."""
        p = np.asarray(point, dtype=float)
        if self.kind == "ball":
            return max(0.0, float(np.linalg.norm(p)) - self.radius)
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return float(np.linalg.norm(p - np.clip(p, lo, hi)))

    def to_dict(self) -> dict:
        if self.kind == "ball":
            return {"kind": "ball", "radius": self.radius, "dim": self.dim}
        return {"kind": "box", "bounds": [list(b) for b in self.bounds]}


def box(bounds: Sequence[Sequence[float]]) -> InputDomain:
    return InputDomain("box", len(bounds), bounds=tuple(tuple(b) for b in bounds))


def ball(radius: float, dim: int) -> InputDomain:
    return InputDomain("ball", dim, radius=float(radius))


@dataclass(frozen=True)
class InputMeasure:
    """Uniform or unit-covariance truncated Gaussian law on a bounded domain."""

    domain: InputDomain
    law: str = "uniform"
    mean: tuple | None = None

    def __post_init__(self):
        if self.law not in ("uniform", "truncated_gaussian"):
            raise ValueError(f"unknown law {self.law!r}")
        if self.law == "truncated_gaussian":
            mean = tuple(float(m) for m in (self.mean if self.mean is not None else [0.0] * self.domain.dim))
            if len(mean) != self.domain.dim:
                raise ValueError("gaussian mean must match the domain dimension")
            object.__setattr__(self, "mean", mean)
        elif self.mean is not None:
            raise ValueError("uniform law takes no mean")

    @property
    def dim(self) -> int:
        return self.domain.dim

    def normalizer(self) -> float:
        """Mass of the domain under the domain-restricted law, before normalization.

        Uniform: the volume.  Gaussian: integral of ``exp(-|x - mean|^2 / 2)``
        over the domain.
        """
        d = self.domain
        if self.law == "uniform":
            return d.volume
        n = d.dim
        mean = np.array(self.mean)
        if d.kind == "box":
            mass = 1.0
            for (lo, hi), m in zip(d.bounds, mean):
                mass *= stats.norm.cdf(hi - m) - stats.norm.cdf(lo - m)
        else:
            nc = float(mean @ mean)
            r2 = d.radius**2
            mass = stats.chi2.cdf(r2, n) if nc == 0 else stats.ncx2.cdf(r2, n, nc)
        return float(mass) * (2 * math.pi) ** (n / 2)

    def to_dict(self) -> dict:
        out = {"domain": self.domain.to_dict(), "law": self.law}
        if self.law == "truncated_gaussian":
            out["mean"] = list(self.mean)
        return out


def measure_from_config(cfg: dict) -> InputMeasure:
    dom = cfg["domain"]
    if dom["kind"] == "box":
        domain = box(dom["bounds"])
    else:
        domain = ball(dom["radius"], dom.get("dim", 2))
    return InputMeasure(domain, cfg.get("law", "uniform"), cfg.get("mean"))


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & _SEED_MASK, spawn_key=(int(chunk),))
    return np.random.Generator(np.random.PCG64(ss))


def _draw_chunk(measure: InputMeasure, n: int, rng: np.random.Generator) -> np.ndarray:
    d = measure.domain
    dim = d.dim
    if measure.law == "uniform":
        if d.kind == "box":
            lo = np.array([b[0] for b in d.bounds])
            hi = np.array([b[1] for b in d.bounds])
            return lo + (hi - lo) * rng.random((n, dim))
        direction = rng.standard_normal((n, dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        r = d.radius * rng.random(n) ** (1.0 / dim)
        return direction * r[:, None]
    # rejection from the unrestricted Gaussian
    mean = np.array(measure.mean)
    out = np.empty((0, dim))
    while out.shape[0] < n:
        need = n - out.shape[0]
        batch = mean + rng.standard_normal((need + need // 8 + 16, dim))
        out = np.concatenate([out, batch[d.contains(batch)]])
    return out[:n]


def sample(measure: InputMeasure, n: int, seed: int, workers: int = 1) -> np.ndarray:
    """Draw ``n`` i.i.d. points as an ``(n, dim)`` array."""
    if n < 1:
        raise ValueError("n must be >= 1")
    n_chunks = -(-n // CHUNK_SIZE)
    sizes = [min(CHUNK_SIZE, n - j * CHUNK_SIZE) for j in range(n_chunks)]

    def job(j):
        return _draw_chunk(measure, sizes[j], chunk_rng(seed, j))

    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(job, range(n_chunks)))
    else:
        chunks = [job(j) for j in range(n_chunks)]
    return np.concatenate(chunks)


def density(measure: InputMeasure, x) -> np.ndarray | float:
    """Normalized density; zero outside the domain.  Accepts one point or a batch."""
    x = np.asarray(x, dtype=float)
    inside = measure.domain.contains(x)
    z = measure.normalizer()
    if measure.law == "uniform":
        val = np.where(inside, 1.0 / z, 0.0)
    else:
        diff = x - np.array(measure.mean)
        val = np.where(inside, np.exp(-0.5 * np.sum(diff * diff, axis=-1)) / z, 0.0)
    return float(val) if val.ndim == 0 else val


def kappa(measure: InputMeasure) -> float:
    """Supremum of the density, so that ``mu(U) <= kappa * |U|`` for every event."""
    z = measure.normalizer()
    if measure.law == "uniform":
        return 1.0 / z
    gap = measure.domain.distance_to(measure.mean)
    return math.exp(-0.5 * gap * gap) / z
