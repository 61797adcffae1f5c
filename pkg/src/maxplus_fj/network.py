"""Acyclic fork-join networks and their support matrices.

Nodes are 0-indexed in this module.  The JSON interchange format
(``to_dict`` / ``from_dict``) is 1-indexed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import Sequence

import numpy as np

from .algebra import EPS, mp_power
from .service import Distribution, Exponential, distribution_from_dict


class NetworkError(ValueError):
    """Structurally invalid network description."""


class AcyclicityError(NetworkError):
    def __init__(self, cycle: Sequence[int]):
        self.cycle = list(cycle)
        shown = " -> ".join(str(i + 1) for i in self.cycle)
        super().__init__(f"network graph is not acyclic; cycle: {shown}")


@dataclass(frozen=True)
class NetworkSpec:
    n: int
    arcs: tuple[tuple[int, int], ...]
    services: tuple[Distribution, ...]

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple((int(i), int(j)) for i, j in self.arcs))
        object.__setattr__(self, "services", tuple(self.services))
        if self.n < 1:
            raise NetworkError("network needs at least one node")
        if len(self.services) != self.n:
            raise NetworkError(f"{self.n} nodes but {len(self.services)} service descriptors")
        seen = set()
        for i, j in self.arcs:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise NetworkError(f"arc ({i + 1}, {j + 1}) references a node outside 1..{self.n}")
            if i == j:
                raise NetworkError(f"self-loop at node {i + 1}")
            if (i, j) in seen:
                raise NetworkError(f"duplicate arc ({i + 1}, {j + 1})")
            seen.add((i, j))
        topological_order(self)  # raises AcyclicityError

    def predecessors(self) -> list[list[int]]:
        pred = [[] for _ in range(self.n)]
        for i, j in self.arcs:
            pred[j].append(i)
        return pred

    def degrees(self) -> tuple[list[int], list[int]]:
        indeg, outdeg = [0] * self.n, [0] * self.n
        for i, j in self.arcs:
            outdeg[i] += 1
            indeg[j] += 1
        return indeg, outdeg

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": i + 1, "service": s.to_dict()} for i, s in enumerate(self.services)],
            "arcs": [[i + 1, j + 1] for i, j in self.arcs],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "NetworkSpec":
        if not isinstance(doc, dict):
            raise NetworkError("network spec must be a JSON object")
        nodes = doc.get("nodes")
        if not isinstance(nodes, list) or not nodes:
            raise NetworkError("'nodes' must be a non-empty list")
        by_id = {}
        for k, node in enumerate(nodes):
            where = f"nodes[{k}]"
            if not isinstance(node, dict) or "id" not in node or "service" not in node:
                raise NetworkError(f"{where}: expected an object with 'id' and 'service'")
            nid = node["id"]
            if isinstance(nid, bool) or not isinstance(nid, int):
                raise NetworkError(f"{where}.id must be an integer")
            if nid in by_id:
                raise NetworkError(f"{where}.id: duplicate id {nid}")
            try:
                by_id[nid] = distribution_from_dict(node["service"])
            except ValueError as exc:
                raise NetworkError(f"{where}.service: {exc}") from None
        n = len(by_id)
        if sorted(by_id) != list(range(1, n + 1)):
            raise NetworkError(f"node ids must be contiguous 1..{n}, got {sorted(by_id)}")
        arcs = []
        for k, arc in enumerate(doc.get("arcs", [])):
            if (not isinstance(arc, (list, tuple)) or len(arc) != 2
                    or not all(isinstance(v, int) and not isinstance(v, bool) for v in arc)):
                raise NetworkError(f"arcs[{k}]: expected a pair of integer node ids")
            arcs.append((arc[0] - 1, arc[1] - 1))
        return cls(n, tuple(arcs), tuple(by_id[i] for i in range(1, n + 1)))


def load_spec(path: str | Path) -> NetworkSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NetworkError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return NetworkSpec.from_dict(doc)


def topological_order(spec: NetworkSpec) -> list[int]:
    ts = TopologicalSorter({j: [] for j in range(spec.n)})
    for i, j in spec.arcs:
        ts.add(j, i)
    try:
        return list(ts.static_order())
    except CycleError as exc:
        # graphlib reports [v, ..., v] with each node a predecessor of the next
        raise AcyclicityError(exc.args[1][:-1]) from None


@dataclass(frozen=True)
class CompiledNetwork:
    spec: NetworkSpec
    support: np.ndarray = field(repr=False)
    p: int
    order: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def services(self) -> tuple[Distribution, ...]:
        return self.spec.services


def support_matrix(spec: NetworkSpec) -> np.ndarray:
    G = np.full((spec.n, spec.n), EPS)
    for i, j in spec.arcs:
        G[i, j] = 0.0
    return G


def longest_path_length(spec: NetworkSpec, order: Sequence[int] | None = None) -> int:
    """Arc count of the longest directed path (0 for an arc-free graph)."""
    order = topological_order(spec) if order is None else order
    depth = [0] * spec.n
    pred = spec.predecessors()
    for v in order:
        for u in pred[v]:
            depth[v] = max(depth[v], depth[u] + 1)
    return max(depth)


def compile_network(spec: NetworkSpec) -> CompiledNetwork:
    order = topological_order(spec)
    G = support_matrix(spec)
    G.setflags(write=False)
    return CompiledNetwork(spec, G, longest_path_length(spec, order), tuple(order))


def validate_nilpotency(net: CompiledNetwork) -> bool:
    """G^(p+1) is null and, when p > 0, G^p is not."""
    G = net.support
    if np.any(mp_power(G, net.p + 1) != EPS):
        return False
    return net.p == 0 or bool(np.any(mp_power(G, net.p) != EPS))


def random_dag(n: int, arc_density: float, seed, services: Distribution | Sequence[Distribution] | None = None
               ) -> NetworkSpec:
    """Random acyclic network: a random topological order plus independent forward arcs.

    Each forward pair of the order becomes an arc with probability
    *arc_density*.  Services default to exponential with mean 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= arc_density <= 1.0:
        raise ValueError("arc_density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    arcs = [
        (int(perm[a]), int(perm[b]))
        for a in range(n) for b in range(a + 1, n)
        if rng.random() < arc_density
    ]
    if services is None:
        services = Exponential(1.0)
    if not isinstance(services, (list, tuple)):
        services = [services] * n
    return NetworkSpec(n, tuple(arcs), tuple(services))


def tandem(services: Sequence[Distribution]) -> NetworkSpec:
    """Series of nodes 1 -> 2 -> ... -> n."""
    n = len(services)
    return NetworkSpec(n, tuple((i, i + 1) for i in range(n - 1)), tuple(services))


def diamond(services: Sequence[Distribution]) -> NetworkSpec:
    """Fork at node 1 into nodes 2 and 3, join at node 4."""
    return NetworkSpec(4, ((0, 1), (0, 2), (1, 3), (2, 3)), tuple(services))
