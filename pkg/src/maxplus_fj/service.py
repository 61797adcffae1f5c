"""Service-time distributions and seeded per-epoch samplers.

Every node owns an independent ``numpy`` generator derived from the master
seed through ``SeedSequence`` spawn keys ``(purpose, stream, node)``, so
adding a node leaves the other nodes' streams untouched and each replication
(stream) is reproducible on its own.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import diag

# spawn-key purposes
TRAJECTORY = 0
BOUNDS = 1

_BLOCK = 1024


@dataclass(frozen=True)
class Deterministic:
    value: float

    kind = "deterministic"

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0:
            raise ValueError(f"deterministic value must be finite and >= 0, got {self.value}")

    def mean(self) -> float:
        return float(self.value)

    def variance(self) -> float:
        return 0.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, float(self.value))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class Exponential:
    mean_: float

    kind = "exponential"

    def __post_init__(self):
        if not np.isfinite(self.mean_) or self.mean_ <= 0:
            raise ValueError(f"exponential mean must be > 0, got {self.mean_}")

    def mean(self) -> float:
        return float(self.mean_)

    def variance(self) -> float:
        return float(self.mean_) ** 2

    def sample(self, rng, size):
        return rng.exponential(self.mean_, size)

    def to_dict(self):
        return {"kind": self.kind, "mean": self.mean_}


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    kind = "uniform"

    def __post_init__(self):
        if not (np.isfinite(self.low) and np.isfinite(self.high)) or not 0 <= self.low <= self.high:
            raise ValueError(f"uniform needs 0 <= low <= high, got ({self.low}, {self.high})")

    def mean(self):
        return (self.low + self.high) / 2.0

    def variance(self):
        return (self.high - self.low) ** 2 / 12.0

    def sample(self, rng, size):
        return rng.uniform(self.low, self.high, size)

    def to_dict(self):
        return {"kind": self.kind, "low": self.low, "high": self.high}


@dataclass(frozen=True)
class Erlang:
    shape: int
    mean_: float

    kind = "erlang"

    def __post_init__(self):
        if int(self.shape) != self.shape or self.shape < 1:
            raise ValueError(f"erlang shape must be an integer >= 1, got {self.shape}")
        if not np.isfinite(self.mean_) or self.mean_ <= 0:
            raise ValueError(f"erlang mean must be > 0, got {self.mean_}")

    def mean(self):
        return float(self.mean_)

    def variance(self):
        return float(self.mean_) ** 2 / self.shape

    def sample(self, rng, size):
        return rng.gamma(self.shape, self.mean_ / self.shape, size)

    def to_dict(self):
        return {"kind": self.kind, "shape": int(self.shape), "mean": self.mean_}


Distribution = Deterministic | Exponential | Uniform | Erlang

_PARAMS = {
    "deterministic": (Deterministic, ("value",)),
    "exponential": (Exponential, ("mean",)),
    "uniform": (Uniform, ("low", "high")),
    "erlang": (Erlang, ("shape", "mean")),
}


def distribution_from_dict(d: dict) -> Distribution:
    """Parse ``{"kind": ..., <params>}``; raises ``ValueError`` naming the bad field."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError("service descriptor must be an object with a 'kind' field")
    kind = d["kind"]
    if kind not in _PARAMS:
        raise ValueError(f"unknown service kind {kind!r}; expected one of {sorted(_PARAMS)}")
    cls, names = _PARAMS[kind]
    extra = set(d) - {"kind", *names}
    if extra:
        raise ValueError(f"{kind}: unexpected field(s) {sorted(extra)}")
    missing = [n for n in names if n not in d]
    if missing:
        raise ValueError(f"{kind}: missing field(s) {missing}")
    args = []
    for n in names:
        v = d[n]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValueError(f"{kind}.{n} must be a number, got {v!r}")
        args.append(v)
    return cls(*args)


def mean_vector(services: Sequence[Distribution]) -> np.ndarray:
    return np.array([s.mean() for s in services])


def variance_vector(services: Sequence[Distribution]) -> np.ndarray:
    return np.array([s.variance() for s in services])


def mean_T(services: Sequence[Distribution]) -> np.ndarray:
    """diag(E[τ_1], ..., E[τ_n])."""
    return diag(mean_vector(services))


def all_deterministic(services: Sequence[Distribution]) -> bool:
    return all(isinstance(s, Deterministic) for s in services)


class ServiceSampler:
    """Seeded source of service-time vectors, one epoch at a time.

    Draws are buffered in fixed-size blocks per node, so the stream depends
    only on ``(seed, stream, purpose)`` and not on how it is consumed.
    """

    def __init__(self, services: Sequence[Distribution], seed: int, stream: int = 0,
                 purpose: int = TRAJECTORY):
        self.services = tuple(services)
        self.seed = int(seed)
        self.stream = int(stream)
        self.purpose = int(purpose)
        self.n = len(self.services)
        self._rngs = [
            np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(self.purpose, self.stream, i)))
            for i in range(self.n)
        ]
        self._buf = np.empty((0, self.n))
        self._pos = 0
        self.epoch = 0

    def replay(self) -> "ServiceSampler":
        """A fresh sampler positioned at epoch 0 of the same stream."""
        return ServiceSampler(self.services, self.seed, self.stream, self.purpose)

    def _refill(self):
        self._buf = np.column_stack(
            [s.sample(r, _BLOCK) for s, r in zip(self.services, self._rngs)]
        ) if self.n else np.empty((_BLOCK, 0))
        self._pos = 0

    def draw(self, size: int) -> np.ndarray:
        """The next *size* epochs of service times, shape ``(size, n)``."""
        out = np.empty((size, self.n))
        filled = 0
        while filled < size:
            if self._pos >= len(self._buf):
                self._refill()
            take = min(size - filled, len(self._buf) - self._pos)
            out[filled:filled + take] = self._buf[self._pos:self._pos + take]
            self._pos += take
            filled += take
        self.epoch += size
        return out

    def next_taus(self) -> np.ndarray:
        return self.draw(1)[0]

    def next_T(self) -> np.ndarray:
        """𝒯_k = diag(τ_1k, ..., τ_nk)."""
        return diag(self.next_taus())
