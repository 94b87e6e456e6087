"""Core value types: problem dimensions, graphs, samples, configuration keys.

Vertices are 0-indexed everywhere inside the package; the I/O layer converts
to the 1-indexed labels people expect. Symbols are the integers
``0..alphabet_size-1``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EnumerationTooLarge, InvalidMargin, InvalidSymbol

MAX_VERTICES = 64
DEFAULT_ENUMERATION_CAP = 30


@dataclass(frozen=True)
class ProblemDims:
    d: int
    alphabet_size: int

    def __post_init__(self):
        if self.d < 1 or self.d > MAX_VERTICES:
            raise ValueError(f"d must be in 1..{MAX_VERTICES}, got {self.d}")
        if self.alphabet_size < 2:
            raise ValueError(f"alphabet_size must be >= 2, got {self.alphabet_size}")

    @property
    def n_slots(self) -> int:
        """Number of possible edges, d(d-1)/2."""
        return self.d * (self.d - 1) // 2


@functools.lru_cache(maxsize=None)
def edge_slots(d: int) -> tuple[tuple[int, int], ...]:
    """Edges (u, v), u < v, in lexicographic order; position = bit index."""
    return tuple((u, v) for u in range(d) for v in range(u + 1, d))


@functools.lru_cache(maxsize=None)
def _slot_index(d: int) -> dict[tuple[int, int], int]:
    return {e: k for k, e in enumerate(edge_slots(d))}


def slot_of(d: int, u: int, v: int) -> int:
    if u == v:
        raise ValueError("self-loops are not allowed")
    if u > v:
        u, v = v, u
    try:
        return _slot_index(d)[(u, v)]
    except KeyError:
        raise ValueError(f"edge ({u}, {v}) out of range for d={d}") from None


def mask_to_set(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def set_to_mask(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph stored as an edge bitmask.

    Per-vertex neighbour bitmasks are derived once at construction, so the two
    representations cannot drift apart. All "mutations" return new graphs.
    """

    dims: ProblemDims
    edge_mask: int = 0
    nbr_masks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.edge_mask < 0 or self.edge_mask >> self.dims.n_slots:
            raise ValueError("edge_mask has bits outside the edge slots")
        masks = [0] * self.dims.d
        m = self.edge_mask
        for k, (u, v) in enumerate(edge_slots(self.dims.d)):
            if (m >> k) & 1:
                masks[u] |= 1 << v
                masks[v] |= 1 << u
        object.__setattr__(self, "nbr_masks", tuple(masks))

    @classmethod
    def empty(cls, dims: ProblemDims) -> Graph:
        return cls(dims, 0)

    @classmethod
    def from_edges(cls, dims: ProblemDims, edges: Iterable[tuple[int, int]]) -> Graph:
        mask = 0
        for u, v in edges:
            mask |= 1 << slot_of(dims.d, u, v)
        return cls(dims, mask)

    @classmethod
    def from_neighbors(cls, dims: ProblemDims, neighbors: Sequence[Iterable[int]]) -> Graph:
        """Build from per-vertex neighbour sets; they must be symmetric and loop-free."""
        if len(neighbors) != dims.d:
            raise ValueError("need one neighbour set per vertex")
        sets = [frozenset(nb) for nb in neighbors]
        edges = []
        for v, nb in enumerate(sets):
            if v in nb:
                raise ValueError(f"self-loop at vertex {v}")
            for w in nb:
                if v not in sets[w]:
                    raise ValueError(f"asymmetric neighbourhoods: {w} in G({v}) but not vice versa")
                if v < w:
                    edges.append((v, w))
        return cls.from_edges(dims, edges)

    def neighbors(self, v: int) -> frozenset[int]:
        return mask_to_set(self.nbr_masks[v])

    def degree(self, v: int) -> int:
        return bin(self.nbr_masks[v]).count("1")

    @property
    def n_edges(self) -> int:
        return bin(self.edge_mask).count("1")

    def edges(self) -> list[tuple[int, int]]:
        return [e for k, e in enumerate(edge_slots(self.dims.d)) if (self.edge_mask >> k) & 1]

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.edge_mask >> slot_of(self.dims.d, u, v)) & 1)

    def flip(self, u: int, v: int) -> Graph:
        return Graph(self.dims, self.edge_mask ^ (1 << slot_of(self.dims.d, u, v)))

    def add(self, u: int, v: int) -> Graph:
        return Graph(self.dims, self.edge_mask | (1 << slot_of(self.dims.d, u, v)))

    def remove(self, u: int, v: int) -> Graph:
        return Graph(self.dims, self.edge_mask & ~(1 << slot_of(self.dims.d, u, v)))

    def issubgraph(self, other: Graph) -> bool:
        return self.edge_mask & ~other.edge_mask == 0

    def permute(self, perm: Sequence[int]) -> Graph:
        """Relabel vertex ``v`` as ``perm[v]``."""
        return Graph.from_edges(self.dims, [(perm[u], perm[v]) for u, v in self.edges()])

    def __str__(self) -> str:
        inner = ", ".join(f"{u + 1}-{v + 1}" for u, v in self.edges())
        return f"Graph(d={self.dims.d}, {{{inner}}})"


def complete_graph(dims: ProblemDims) -> Graph:
    return Graph(dims, (1 << dims.n_slots) - 1)


def enumerate_graphs(dims: ProblemDims, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[Graph]:
    """All 2^(d(d-1)/2) graphs in increasing edge-bitmask order."""
    if dims.n_slots > cap:
        raise EnumerationTooLarge(f"{dims.n_slots} edge slots exceeds the cap of {cap}")
    for mask in range(1 << dims.n_slots):
        yield Graph(dims, mask)


@dataclass(frozen=True, eq=False)
class Sample:
    """An n x d matrix of symbols, one row per time point."""

    dims: ProblemDims
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.int64, copy=True)
        if data.ndim != 2 or data.shape[1] != self.dims.d:
            raise ValueError(f"data must have shape (n, {self.dims.d}), got {data.shape}")
        if data.shape[0] < 1:
            raise ValueError("sample must contain at least one row")
        if data.size and (data.min() < 0 or data.max() >= self.dims.alphabet_size):
            bad = np.argwhere((data < 0) | (data >= self.dims.alphabet_size))[0]
            raise InvalidSymbol(
                f"symbol {data[bad[0], bad[1]]} at row {bad[0]}, column {bad[1]} "
                f"outside 0..{self.dims.alphabet_size - 1}"
            )
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @classmethod
    def from_rows(cls, rows, alphabet_size: int | None = None) -> Sample:
        data = np.asarray(rows, dtype=np.int64)
        if data.ndim != 2:
            raise ValueError("rows must form a 2-d table")
        if alphabet_size is None:
            alphabet_size = max(2, int(data.max()) + 1)
        return cls(ProblemDims(data.shape[1], alphabet_size), data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def slice(self, vertices: Iterable[int] | None = None, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Rows ``start:stop`` restricted to ``vertices`` (all vertices if None)."""
        cols = list(range(self.dims.d)) if vertices is None else sorted(vertices)
        return self.data[start:stop, cols]

    def permute_vertices(self, perm: Sequence[int]) -> Sample:
        """Column ``v`` of the result is column ``perm.index(v)`` here, i.e. vertex v moves to perm[v]."""
        inv = np.argsort(np.asarray(perm))
        return Sample(self.dims, self.data[:, inv])

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True)
class ConfigKey:
    """A configuration a_W as (sorted margin, mixed-radix code).

    The smallest vertex of the margin is the least-significant digit.
    """

    margin: tuple[int, ...]
    code: int


def _check_margin(W: Sequence[int], dims: ProblemDims) -> None:
    if len(set(W)) != len(W):
        raise InvalidMargin(f"duplicate vertex in margin {tuple(W)}")
    for w in W:
        if not 0 <= w < dims.d:
            raise InvalidMargin(f"vertex {w} out of range for d={dims.d}")


def encode_config(a_W: Sequence[int], W: Sequence[int], dims: ProblemDims) -> ConfigKey:
    if len(a_W) != len(W):
        raise InvalidMargin("configuration and margin lengths differ")
    _check_margin(W, dims)
    A = dims.alphabet_size
    pairs = sorted(zip(W, a_W))
    code = 0
    for w, a in reversed(pairs):
        if not 0 <= a < A:
            raise InvalidSymbol(f"symbol {a} at vertex {w} outside 0..{A - 1}")
        code = code * A + int(a)
    return ConfigKey(tuple(w for w, _ in pairs), code)


def decode_config(key: ConfigKey, dims: ProblemDims) -> tuple[int, ...]:
    """Symbols of ``key`` in ascending vertex order."""
    A = dims.alphabet_size
    if not 0 <= key.code < A ** len(key.margin):
        raise InvalidSymbol(f"code {key.code} out of range for margin {key.margin}")
    out = []
    c = key.code
    for _ in key.margin:
        c, r = divmod(c, A)
        out.append(r)
    return tuple(out)


def encode_rows(data: np.ndarray, W: Sequence[int], alphabet_size: int) -> np.ndarray:
    """Vectorised encode of every row of ``data`` restricted to sorted ``W``."""
    W = sorted(W)
    codes = np.zeros(data.shape[0], dtype=np.int64)
    for w in reversed(W):
        codes *= alphabet_size
        codes += data[:, w]
    return codes


def decode_codes(codes: np.ndarray, width: int, alphabet_size: int) -> np.ndarray:
    """Inverse of :func:`encode_rows`: codes -> (len(codes), width) symbol array."""
    codes = np.asarray(codes, dtype=np.int64).copy()
    out = np.empty((codes.shape[0], width), dtype=np.int64)
    for j in range(width):
        out[:, j] = codes % alphabet_size
        codes //= alphabet_size
    return out


@dataclass(frozen=True)
class DiscreteDistribution:
    probs: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.probs)
        if not p:
            raise ValueError("empty distribution")
        if min(p) < 0:
            raise ValueError("negative probability")
        if abs(sum(p) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {sum(p)!r}, not 1")
        object.__setattr__(self, "probs", p)

    @property
    def support_size(self) -> int:
        return len(self.probs)

    def __getitem__(self, i: int) -> float:
        return self.probs[i]

    def __len__(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)
