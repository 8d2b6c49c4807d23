"""Graphs, Ising Hamiltonians and the exact classical oracle.

Conventions used throughout the package:

* vertices are ``0 .. n-1``; an undirected edge is stored once as ``(i, j)``
  with ``i < j``;
* a bitstring ``b`` maps to spins through ``z_q = 1 - 2 b[q]``, so bit 0 is
  spin up;
* in integer encodings of bitstrings qubit 0 is the least significant bit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "ENUMERATION_CAP",
    "CapacityExceeded",
    "Graph",
    "IsingHamiltonian",
    "Matching",
    "BlockPartition",
    "make_cycle",
    "make_random_regular",
    "make_erdos_renyi",
    "maxcut_to_ising",
    "cut_value",
    "energy_of",
    "energy_table",
    "brute_force_ground",
    "max_cut",
    "maximal_matching",
    "default_min_weight",
    "partition_from_matching",
    "index_to_bits",
    "bits_to_index",
    "dumps",
    "loads",
]

ENUMERATION_CAP = 26
# couplings below this magnitude are numerical zeros
ZERO_TOL = 1e-12
_ER_MAX_ATTEMPTS = 10_000
_REGULAR_MAX_ATTEMPTS = 10_000


class CapacityExceeded(ValueError):
    """Raised when an exact enumeration or dense simulation would be too large."""


def _edge_key(i: int, j: int) -> tuple[int, int]:
    i, j = int(i), int(j)
    if i == j:
        raise ValueError(f"self-loop on vertex {i}")
    return (i, j) if i < j else (j, i)


def _merge_edges(n: int, items: Iterable[tuple[int, int, float]]) -> dict[tuple[int, int], float]:
    out: dict[tuple[int, int], float] = {}
    for i, j, w in items:
        key = _edge_key(i, j)
        if not (0 <= key[0] and key[1] < n):
            raise ValueError(f"edge {key} outside [0, {n})")
        out[key] = out.get(key, 0.0) + float(w)
    return {k: out[k] for k in sorted(out) if abs(out[k]) >= ZERO_TOL}


@dataclass(frozen=True)
class Graph:
    """Undirected weighted simple graph."""

    n: int
    edges: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        object.__setattr__(self, "edges", _merge_edges(self.n, ((i, j, w) for (i, j), w in self.edges.items())))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable, weight: float = 1.0) -> "Graph":
        """Build from ``(i, j)`` or ``(i, j, w)`` tuples; repeated pairs are summed."""
        items = []
        for e in edges:
            if len(e) == 2:
                items.append((e[0], e[1], weight))
            else:
                items.append((e[0], e[1], e[2]))
        return cls(n, _merge_edges(n, items))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> float:
        return float(sum(self.edges.values()))

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def mean_degree(self) -> float:
        return 2.0 * self.num_edges / self.n

    def is_connected(self) -> bool:
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = {0}
        stack = [0]
        while stack:
            for v in adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n


@dataclass(frozen=True)
class IsingHamiltonian:
    r"""Diagonal cost operator :math:`\sum_{i<j} J_{ij} Z_i Z_j + \sum_i h_i Z_i + c`.

    Parameters
    ----------
    num_vertices : int
        Number of spins ``N``.
    couplings : mapping
        ``(i, j) -> J_ij``. Keys are normalised to ``i < j``, duplicates summed
        and entries with ``|J| < 1e-12`` dropped.
    fields : array_like, optional
        Length-``N`` longitudinal fields, zero by default.
    offset : float
        Constant energy shift. Coarse-graining accumulates identity terms here.
    """

    num_vertices: int
    couplings: Mapping[tuple[int, int], float] = field(default_factory=dict)
    fields: np.ndarray | None = None
    offset: float = 0.0

    def __post_init__(self):
        n = int(self.num_vertices)
        if n < 1:
            raise ValueError("Hamiltonian needs at least one spin")
        object.__setattr__(self, "num_vertices", n)
        object.__setattr__(
            self, "couplings", _merge_edges(n, ((i, j, w) for (i, j), w in self.couplings.items()))
        )
        h = np.zeros(n) if self.fields is None else np.array(self.fields, dtype=float)
        if h.shape != (n,):
            raise ValueError(f"fields must have shape ({n},), got {h.shape}")
        h.setflags(write=False)
        object.__setattr__(self, "fields", h)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n(self) -> int:
        return self.num_vertices

    def coupling_graph(self) -> Graph:
        """The interaction graph, weighted by ``J_ij``."""
        return Graph(self.num_vertices, self.couplings)

    def diagonal(self, include_offset: bool = True) -> np.ndarray:
        """Energies of all ``2**N`` basis states (qubit 0 = least significant bit)."""
        n = self.num_vertices
        if n > ENUMERATION_CAP:
            raise CapacityExceeded(f"N={n} exceeds enumeration cap {ENUMERATION_CAP}")
        return _diagonal(self, 0, 1 << n, include_offset)

    def __eq__(self, other):
        if not isinstance(other, IsingHamiltonian):
            return NotImplemented
        return (
            self.num_vertices == other.num_vertices
            and self.couplings == other.couplings
            and np.array_equal(self.fields, other.fields)
            and self.offset == other.offset
        )

    __hash__ = None


def _diagonal(H: IsingHamiltonian, start: int, stop: int, include_offset: bool) -> np.ndarray:
    # parity trick: z_i z_j = 1 - 2 * ((k >> i ^ k >> j) & 1)
    k = np.arange(start, stop, dtype=np.int64)
    out = np.full(stop - start, H.offset if include_offset else 0.0)
    for (i, j), w in H.couplings.items():
        out += w * (1 - 2 * (((k >> i) ^ (k >> j)) & 1))
    for i, h in enumerate(H.fields):
        if h != 0.0:
            out += h * (1 - 2 * ((k >> i) & 1))
    return out


def index_to_bits(k: int, n: int) -> np.ndarray:
    return ((int(k) >> np.arange(n)) & 1).astype(np.int8)


def bits_to_index(bits) -> int:
    return int(sum(int(b) << q for q, b in enumerate(bits)))


def _check_even_cycle(n: int) -> None:
    if n < 4 or n % 2:
        raise ValueError(f"ring of disagrees needs an even n >= 4, got {n}")


def make_cycle(n: int) -> Graph:
    """Unit-weight cycle ``0-1-...-(n-1)-0`` (the ring of disagrees)."""
    _check_even_cycle(n)
    return Graph.from_edges(n, [(q, (q + 1) % n) for q in range(n)])


def make_random_regular(n: int, d: int, seed: int) -> Graph:
    """Random simple ``d``-regular graph via the pairing model.

    Stubs are paired uniformly at random; pairings that produce a self-loop or
    a repeated edge are rejected and redrawn from the next stream of the same
    seed, so the result is a deterministic function of ``(n, d, seed)``.
    """
    if d < 0 or d >= n or (n * d) % 2:
        raise ValueError(f"no simple {d}-regular graph on {n} vertices")
    if d == 0:
        return Graph(n)
    stubs = np.repeat(np.arange(n), d)
    for attempt in range(_REGULAR_MAX_ATTEMPTS):
        rng = np.random.default_rng([seed, attempt])
        pairs = rng.permutation(stubs).reshape(-1, 2)
        keys = {_edge_key(a, b) for a, b in pairs if a != b}
        if len(keys) == len(pairs):
            return Graph.from_edges(n, sorted(keys))
    raise RuntimeError(f"pairing model failed after {_REGULAR_MAX_ATTEMPTS} attempts")


def make_erdos_renyi(n: int, rho: float, seed: int) -> Graph:
    """Connected G(n, rho) sample; disconnected draws are resampled."""
    if n < 2:
        raise ValueError("need n >= 2")
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"edge density must lie in (0, 1], got {rho}")
    pairs = list(combinations(range(n), 2))
    for attempt in range(_ER_MAX_ATTEMPTS):
        rng = np.random.default_rng([seed, attempt])
        keep = rng.random(len(pairs)) < rho
        g = Graph.from_edges(n, [p for p, k in zip(pairs, keep) if k])
        if g.is_connected():
            return g
    raise RuntimeError(f"no connected G({n}, {rho}) sample in {_ER_MAX_ATTEMPTS} attempts")


def maxcut_to_ising(graph: Graph) -> IsingHamiltonian:
    """``J_ij = w_ij / 2``; then ``cut(b) = W/2 - energy_of(H, b)`` with ``W`` the total weight."""
    return IsingHamiltonian(graph.n, {e: 0.5 * w for e, w in graph.edges.items()})


def cut_value(graph: Graph, bits) -> float:
    bits = np.asarray(bits)
    return float(sum(w for (i, j), w in graph.edges.items() if bits[i] != bits[j]))


def energy_of(H: IsingHamiltonian, bits) -> float:
    bits = np.asarray(bits)
    if bits.shape != (H.num_vertices,):
        raise ValueError(f"bitstring of length {bits.size} for N={H.num_vertices}")
    z = 1 - 2 * bits.astype(float)
    e = H.offset + float(H.fields @ z)
    for (i, j), w in H.couplings.items():
        e += w * z[i] * z[j]
    return e


def energy_table(H: IsingHamiltonian, chunk: int = 1 << 20):
    """Yield ``(start, energies)`` chunks covering all ``2**N`` basis states."""
    n = H.num_vertices
    if n > ENUMERATION_CAP:
        raise CapacityExceeded(f"N={n} exceeds enumeration cap {ENUMERATION_CAP}")
    total = 1 << n
    for start in range(0, total, chunk):
        yield start, _diagonal(H, start, min(total, start + chunk), True)


def brute_force_ground(H: IsingHamiltonian, cap: int = ENUMERATION_CAP, atol: float = 1e-12):
    """Exact ground energy and every minimiser, by enumeration.

    Returns
    -------
    energy : float
    minimizers : list of ndarray
        All bitstrings within ``atol`` of the minimum, in ascending
        lexicographic order of ``(b[0], b[1], ...)``.
    """
    if H.num_vertices > cap:
        raise CapacityExceeded(f"N={H.num_vertices} exceeds enumeration cap {cap}")
    best = min(float(e.min()) for _, e in energy_table(H))
    idx = np.concatenate([start + np.flatnonzero(e <= best + atol) for start, e in energy_table(H)])
    n = H.num_vertices
    bits = [index_to_bits(k, n) for k in idx]
    bits.sort(key=tuple)
    return best, bits


def max_cut(graph: Graph, cap: int = ENUMERATION_CAP) -> tuple[float, np.ndarray]:
    """Exact maximum cut and its lexicographically smallest witness."""
    e, bits = brute_force_ground(maxcut_to_ising(graph), cap=cap)
    return 0.5 * graph.total_weight - e, bits[0]


@dataclass(frozen=True)
class Matching:
    edges: frozenset

    def __post_init__(self):
        edges = frozenset(_edge_key(i, j) for i, j in self.edges)
        seen: set[int] = set()
        for i, j in edges:
            if i in seen or j in seen:
                raise ValueError(f"vertex shared between matched edges at {(i, j)}")
            seen.update((i, j))
        object.__setattr__(self, "edges", edges)

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(sorted(self.edges))


def default_min_weight(graph: Graph) -> float:
    if not graph.edges:
        return 0.0
    return 1e-6 * float(np.mean(np.abs(list(graph.edges.values()))))


def maximal_matching(graph: Graph, seed: int = 0, min_weight: float | None = None) -> Matching:
    """Greedy maximal matching after a seeded shuffle of the vertex labels.

    Edges with ``|w| < min_weight`` are ignored (``min_weight`` defaults to
    ``1e-6`` times the mean absolute weight). The remaining edges are scanned in
    order of their shuffled labels and taken whenever both endpoints are free,
    so the result is maximal on the filtered edge set.
    """
    if min_weight is None:
        min_weight = default_min_weight(graph)
    if min_weight < 0:
        raise ValueError("min_weight must be non-negative")
    perm = np.random.default_rng(seed).permutation(graph.n)
    order = []
    for (i, j), w in graph.edges.items():
        if abs(w) >= min_weight:
            a, b = perm[i], perm[j]
            order.append((min(a, b), max(a, b), i, j))
    order.sort()
    free = np.ones(graph.n, dtype=bool)
    chosen = []
    for _, _, i, j in order:
        if free[i] and free[j]:
            free[i] = free[j] = False
            chosen.append((i, j))
    return Matching(frozenset(chosen))


@dataclass(frozen=True)
class BlockPartition:
    """Blocks of matched pairs plus leftover vertices, with coarse labels.

    Coarse vertex ``k`` is ``blocks[k]`` for ``k < len(blocks)`` and
    ``unmatched[k - len(blocks)]`` otherwise.
    """

    n: int
    blocks: tuple[tuple[int, int], ...]
    unmatched: tuple[int, ...]

    @property
    def n_coarse(self) -> int:
        return len(self.blocks) + len(self.unmatched)

    @property
    def relabel(self) -> np.ndarray:
        """Fine vertex -> coarse vertex index."""
        out = np.empty(self.n, dtype=int)
        for k, (i, j) in enumerate(self.blocks):
            out[i] = out[j] = k
        for k, u in enumerate(self.unmatched, start=len(self.blocks)):
            out[u] = k
        return out


def partition_from_matching(n: int, matching: Matching) -> BlockPartition:
    blocks = tuple(sorted(matching.edges))
    covered = {v for e in blocks for v in e}
    if covered and (min(covered) < 0 or max(covered) >= n):
        raise ValueError(f"matching vertices outside [0, {n})")
    unmatched = tuple(v for v in range(n) if v not in covered)
    return BlockPartition(n, blocks, unmatched)


def _fmt(x: float) -> float:
    # 17 significant digits round-trip a double exactly
    return float(f"{x:.17g}")


def to_dict(obj: Graph | IsingHamiltonian) -> dict:
    if isinstance(obj, Graph):
        return {"n": obj.n, "edges": [[i, j, _fmt(w)] for (i, j), w in obj.edges.items()], "fields": [], "offset": 0.0}
    return {
        "n": obj.num_vertices,
        "edges": [[i, j, _fmt(w)] for (i, j), w in obj.couplings.items()],
        "fields": [[i, _fmt(h)] for i, h in enumerate(obj.fields) if h != 0.0],
        "offset": _fmt(obj.offset),
    }


def dumps(obj: Graph | IsingHamiltonian) -> str:
    """Serialise to JSON with fields ``n``, ``edges``, ``fields``, ``offset``."""
    return json.dumps(to_dict(obj))


def loads(text: str, kind: str = "ising") -> Graph | IsingHamiltonian:
    d = json.loads(text)
    n = int(d["n"])
    edges = {(int(i), int(j)): float(w) for i, j, w in d.get("edges", [])}
    if kind == "graph":
        return Graph(n, edges)
    h = np.zeros(n)
    for i, v in d.get("fields", []):
        h[int(i)] += float(v)
    return IsingHamiltonian(n, edges, h, float(d.get("offset", 0.0)))
