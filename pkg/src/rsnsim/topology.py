"""Seed-post lattices and random device multigraphs.

A network lives on a square lattice of seed posts.  Interface posts (the
coarse sub-lattice) are where signals are applied and read; supporting
posts sit between them at a finer pitch and let multi-device paths form.
Wires are added one at a time: pick a start post, draw a normalized wire
length from a beta distribution, and land on the post whose normalized
distance from the start is closest to the draw.  Each wire is one
resistive switch with independently sampled parameters.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .device import DeviceParams, DeviceState, ParamRanges, sample_device_params
from .errors import GenerationError, ParameterError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BetaShape:
    """Shape parameters of the wire-length distribution on [0, 1]."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0.0):
            raise ParameterError(f"alpha must be > 0, got {self.alpha!r}")
        if not (np.isfinite(self.beta) and self.beta > 0.0):
            raise ParameterError(f"beta must be > 0, got {self.beta!r}")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def skewness(self) -> float:
        a, b = self.alpha, self.beta
        return 2.0 * (b - a) * np.sqrt(a + b + 1.0) / ((a + b + 2.0) * np.sqrt(a * b))


def beta_sample(shape: BetaShape, rng: np.random.Generator, size=None):
    """Draw normalized wire lengths in [0, 1]."""
    return rng.beta(shape.alpha, shape.beta, size=size)


@dataclass(frozen=True)
class Grid:
    """Square seed-post lattice with interface/supporting roles.

    ``subdivision`` supporting posts sit between adjacent interface posts,
    so the full lattice has side interface_dim + (interface_dim-1)*subdivision
    with unit spacing.
    """

    interface_dim: int
    subdivision: int
    positions: np.ndarray        # (n_nodes, 2) float lattice coordinates
    interface_flags: np.ndarray  # (n_nodes,) bool

    @property
    def side(self) -> int:
        return self.interface_dim + (self.interface_dim - 1) * self.subdivision

    @property
    def n_nodes(self) -> int:
        return self.positions.shape[0]

    @property
    def n_interface(self) -> int:
        return int(self.interface_flags.sum())

    @property
    def interface_indices(self) -> np.ndarray:
        """Grid-node indices of interface posts, row-major order."""
        return np.flatnonzero(self.interface_flags)

    def to_dict(self) -> dict:
        return {"interface_dim": int(self.interface_dim),
                "subdivision": int(self.subdivision)}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return build_grid(int(d["interface_dim"]), int(d["subdivision"]))


def build_grid(interface_dim: int, s: int) -> Grid:
    """Build the lattice with ``s`` supporting posts between interface posts."""
    if interface_dim < 2:
        raise ParameterError(f"interface_dim must be >= 2, got {interface_dim!r}")
    if s < 0:
        raise ParameterError(f"subdivision must be >= 0, got {s!r}")
    side = interface_dim + (interface_dim - 1) * s
    ys, xs = np.divmod(np.arange(side * side), side)
    positions = np.column_stack([xs, ys]).astype(float)
    pitch = s + 1
    flags = (xs % pitch == 0) & (ys % pitch == 0)
    return Grid(interface_dim=interface_dim, subdivision=s,
                positions=positions, interface_flags=flags)


def distance_map(grid: Grid) -> np.ndarray:
    """Pairwise Euclidean distances normalized by the lattice diagonal."""
    pos = grid.positions
    diff = pos[:, None, :] - pos[None, :, :]
    d = np.sqrt((diff ** 2).sum(axis=2))
    return d / d.max()


@dataclass
class Edge:
    """One device between two grid nodes."""

    a: int
    b: int
    params: DeviceParams
    state: DeviceState

    def to_dict(self) -> dict:
        return {"a": int(self.a), "b": int(self.b),
                "params": self.params.to_dict(), "state": self.state.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Edge":
        return cls(a=int(d["a"]), b=int(d["b"]),
                   params=DeviceParams.from_dict(d["params"]),
                   state=DeviceState.from_dict(d["state"]))


@dataclass
class NetworkTopology:
    """Random multigraph of devices over a grid, with input/ground roles.

    ``n_augmented`` counts edges appended by the connectivity pass; the
    first ``len(edges) - n_augmented`` edges are the generated population.
    """

    grid: Grid
    edges: List[Edge]
    input_node: int
    ground_node: int
    seed: int
    n_augmented: int = 0

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def generated_edge_count(self) -> int:
        return len(self.edges) - self.n_augmented

    def endpoints(self) -> Tuple[np.ndarray, np.ndarray]:
        a = np.fromiter((e.a for e in self.edges), dtype=int, count=len(self.edges))
        b = np.fromiter((e.b for e in self.edges), dtype=int, count=len(self.edges))
        return a, b

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "input_node": int(self.input_node),
            "ground_node": int(self.ground_node),
            "seed": int(self.seed),
            "n_augmented": int(self.n_augmented),
            "edges": [e.to_dict() for e in self.edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkTopology":
        return cls(grid=Grid.from_dict(d["grid"]),
                   edges=[Edge.from_dict(e) for e in d["edges"]],
                   input_node=int(d["input_node"]),
                   ground_node=int(d["ground_node"]),
                   seed=int(d["seed"]),
                   n_augmented=int(d.get("n_augmented", 0)))

    @classmethod
    def from_json(cls, text: str) -> "NetworkTopology":
        return cls.from_dict(json.loads(text))


def _components(n_nodes: int, edges: List[Edge]) -> np.ndarray:
    """Connected-component label per node (union-find)."""
    parent = np.arange(n_nodes)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for e in edges:
        ra, rb = find(e.a), find(e.b)
        if ra != rb:
            parent[rb] = ra
    return np.fromiter((find(i) for i in range(n_nodes)), dtype=int, count=n_nodes)


def has_path(t: NetworkTopology) -> bool:
    """True if some chain of devices joins the input node to ground."""
    labels = _components(t.grid.n_nodes, t.edges)
    return labels[t.input_node] == labels[t.ground_node]


def _lattice_chain(grid: Grid, u: int, v: int) -> List[Tuple[int, int]]:
    """Unit steps of an L-shaped lattice path from node u to node v."""
    side = grid.side
    xu, yu = int(grid.positions[u, 0]), int(grid.positions[u, 1])
    xv, yv = int(grid.positions[v, 0]), int(grid.positions[v, 1])
    hops = []
    x, y = xu, yu
    while x != xv:
        nx = x + (1 if xv > x else -1)
        hops.append((y * side + x, y * side + nx))
        x = nx
    while y != yv:
        ny = y + (1 if yv > y else -1)
        hops.append((y * side + x, ny * side + x))
        y = ny
    return hops


def ensure_connected(t: NetworkTopology, rng: np.random.Generator,
                     ranges: Optional[ParamRanges] = None) -> NetworkTopology:
    """Guarantee an input->ground path, appending lattice chains if needed.

    While input and ground are in different components, the closest pair
    of nodes bridging the input component to the rest of the graph is
    joined with a chain of unit-length lattice edges (fresh devices).
    Already-connected topologies are returned unchanged.
    """
    if has_path(t):
        return t
    if ranges is None:
        from .device import default_ranges
        ranges = default_ranges()

    pos = t.grid.positions
    edges = list(t.edges)
    added = 0
    while True:
        labels = _components(t.grid.n_nodes, edges)
        if labels[t.input_node] == labels[t.ground_node]:
            break
        inside = labels == labels[t.input_node]
        src = np.flatnonzero(inside)
        dst = np.flatnonzero(~inside)
        d = np.sqrt(((pos[src][:, None, :] - pos[dst][None, :, :]) ** 2).sum(axis=2))
        i, j = np.unravel_index(int(np.argmin(d)), d.shape)
        for a, b in _lattice_chain(t.grid, int(src[i]), int(dst[j])):
            edges.append(Edge(a=a, b=b,
                              params=sample_device_params(ranges, rng),
                              state=DeviceState()))
            added += 1
    log.info("connectivity augmentation added %d edge(s)", added)
    return NetworkTopology(grid=t.grid, edges=edges, input_node=t.input_node,
                           ground_node=t.ground_node, seed=t.seed,
                           n_augmented=t.n_augmented + added)


def generate_network(grid: Grid, shape: BetaShape, xi: int,
                     input_node: int, ground_node: int,
                     ranges: ParamRanges, rng: np.random.Generator,
                     seed: int = 0,
                     edge_count: Optional[int] = None) -> NetworkTopology:
    """Generate ``grid.n_nodes * xi`` devices (or ``edge_count`` if given).

    Per edge: uniform start node, beta-distributed target length, endpoint
    snapped to the node whose normalized distance from the start is nearest
    the draw (uniform tie-break, self excluded), parameters sampled per
    device.  The result is passed through the connectivity pass.
    """
    if xi < 1:
        raise ParameterError(f"indegree xi must be >= 1, got {xi!r}")
    if input_node == ground_node:
        raise ParameterError("input and ground nodes must differ")
    for name, node in (("input", input_node), ("ground", ground_node)):
        if not (0 <= node < grid.n_nodes):
            raise ParameterError(f"{name} node {node} outside grid")
        if not grid.interface_flags[node]:
            raise ParameterError(f"{name} node {node} is not an interface node")

    n_edges = grid.n_nodes * xi if edge_count is None else int(edge_count)
    if n_edges < 1:
        raise GenerationError(f"requested edge count {n_edges} < 1")

    dmap = distance_map(grid)
    n = grid.n_nodes
    edges: List[Edge] = []
    for _ in range(n_edges):
        start = int(rng.integers(n))
        target = float(beta_sample(shape, rng))
        diffs = np.abs(dmap[start] - target)
        diffs[start] = np.inf
        ties = np.flatnonzero(diffs == diffs.min())
        other = int(ties[rng.integers(ties.size)])
        edges.append(Edge(a=start, b=other,
                          params=sample_device_params(ranges, rng),
                          state=DeviceState()))

    t = NetworkTopology(grid=grid, edges=edges, input_node=input_node,
                        ground_node=ground_node, seed=int(seed), n_augmented=0)
    return ensure_connected(t, rng, ranges)
