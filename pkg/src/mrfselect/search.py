"""Optimisers over the space of simple graphs.

``exhaustive_argmax`` scores every graph; ``greedy_flip_search`` and
``simulated_annealing`` walk the space by single edge flips.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationTooLarge
from .model import Graph, Sample, complete_graph, edge_slots
from .score import PenaltyConfig, Scorer

DEFAULT_EXHAUSTIVE_SLOTS = 28  # d <= 8
GREEDY_THRESHOLD = 1e-12
TIE_RTOL = 1e-9
_CHUNK = 1 << 16


def worker_count(workers: int | None = None) -> int:
    """Explicit ``workers`` wins; otherwise MRF_SELECT_THREADS, else the CPU count."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("MRF_SELECT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class SearchResult:
    best_graph: Graph
    best_score: float
    evaluations: int
    trace: list[tuple[int, float]] | None = None


@dataclass(frozen=True)
class AnnealConfig:
    initial_temperature: float
    cooling_factor: float = 0.95
    steps_per_temperature: int = 20
    min_temperature: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if not self.initial_temperature > 0 or not self.min_temperature > 0:
            raise ValueError("temperatures must be positive")
        if not 0 < self.cooling_factor < 1:
            raise ValueError("cooling_factor must lie in (0, 1)")
        if self.steps_per_temperature < 1:
            raise ValueError("steps_per_temperature must be positive")

    def temperatures(self) -> list[float]:
        out = []
        t = self.initial_temperature
        while t > self.min_temperature:
            out.append(t)
            t *= self.cooling_factor
        return out


def default_anneal_config(scorer: Scorer, seed: int = 0) -> AnnealConfig:
    dims = scorer.dims
    spread = abs(scorer.score(Graph.empty(dims)) - scorer.score(complete_graph(dims)))
    return AnnealConfig(
        initial_temperature=max(1.0, spread) / 10,
        cooling_factor=0.95,
        steps_per_temperature=20 * max(1, dims.n_slots),
        min_temperature=1e-4,
        seed=seed,
    )


def _scorer(sample: Sample, pen: PenaltyConfig, scorer: Scorer | None) -> Scorer:
    if scorer is None:
        return Scorer(sample, pen)
    if scorer.sample is not sample or scorer.pen != pen:
        raise ValueError("scorer was built for a different sample or penalty")
    return scorer


def _neighbor_codes(graphs: np.ndarray, d: int) -> list[np.ndarray]:
    masks = [np.zeros_like(graphs) for _ in range(d)]
    for k, (u, v) in enumerate(edge_slots(d)):
        bit = (graphs >> k) & 1
        masks[u] |= bit << v
        masks[v] |= bit << u
    return masks


def _chunk_scores(table: np.ndarray, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
    graphs = np.arange(start, stop, dtype=np.int64)
    masks = _neighbor_codes(graphs, table.shape[0])
    scores = table[0, masks[0]]
    for v in range(1, table.shape[0]):
        scores = scores + table[v, masks[v]]
    return graphs, scores


def _chunk_max(table, start, stop) -> float:
    return float(_chunk_scores(table, start, stop)[1].max())


def _chunk_best(table, start, stop, threshold) -> tuple[int, int] | None:
    graphs, scores = _chunk_scores(table, start, stop)
    cand = graphs[scores >= threshold]
    if cand.size == 0:
        return None
    edges = np.bitwise_count(cand)
    fewest = edges.min()
    return int(fewest), int(cand[edges == fewest].min())


def exhaustive_argmax(
    sample: Sample,
    pen: PenaltyConfig,
    *,
    workers: int | None = None,
    max_slots: int = DEFAULT_EXHAUSTIVE_SLOTS,
    scorer: Scorer | None = None,
) -> SearchResult:
    """Exact maximiser of the score over all graphs.

    Scores within ``TIE_RTOL * max(1, |best|)`` of the maximum count as ties; among
    ties the graph with fewest edges, then smallest edge bitmask, wins. The
    bitmask range is split into fixed chunks and reduced with that same total
    order, so the answer does not depend on the number of workers.
    """
    dims = sample.dims
    if dims.n_slots > max_slots:
        raise EnumerationTooLarge(f"{dims.n_slots} edge slots exceeds the exhaustive cap of {max_slots}")
    scorer = _scorer(sample, pen, scorer)
    table = scorer.vertex_table()
    total = 1 << dims.n_slots
    bounds = [(s, min(s + _CHUNK, total)) for s in range(0, total, _CHUNK)]
    nw = min(worker_count(workers), len(bounds))

    if nw == 1:
        top = max(_chunk_max(table, a, b) for a, b in bounds)
    else:
        with ThreadPoolExecutor(nw) as pool:
            top = max(pool.map(lambda ab: _chunk_max(table, *ab), bounds))
    threshold = top - TIE_RTOL * max(1.0, abs(top))
    if nw == 1:
        found = [_chunk_best(table, a, b, threshold) for a, b in bounds]
    else:
        with ThreadPoolExecutor(nw) as pool:
            found = list(pool.map(lambda ab: _chunk_best(table, *ab, threshold), bounds))
    _, mask = min(f for f in found if f is not None)
    best = Graph(dims, mask)
    return SearchResult(best, scorer.score(best), total)


def greedy_flip_search(
    sample: Sample,
    pen: PenaltyConfig,
    start: Graph | None = None,
    *,
    scorer: Scorer | None = None,
    record_trace: bool = False,
) -> SearchResult:
    """Steepest-ascent over single edge flips until no flip gains more than 1e-12."""
    scorer = _scorer(sample, pen, scorer)
    G = Graph.empty(sample.dims) if start is None else start
    score = scorer.score(G)
    evaluations = 1
    slots = edge_slots(sample.dims.d)
    trace = [(0, score)] if record_trace else None
    step = 0
    while True:
        best_delta, best_slot = GREEDY_THRESHOLD, -1
        for k, (u, v) in enumerate(slots):
            delta = scorer.flip_delta(G, u, v)
            evaluations += 1
            if delta > best_delta:
                best_delta, best_slot = delta, k
        if best_slot < 0:
            break
        G = Graph(G.dims, G.edge_mask ^ (1 << best_slot))
        score = scorer.score(G)
        step += 1
        if trace is not None:
            trace.append((step, score))
    return SearchResult(G, score, evaluations, trace)


def simulated_annealing(
    sample: Sample,
    pen: PenaltyConfig,
    cfg: AnnealConfig | None = None,
    start: Graph | None = None,
    *,
    scorer: Scorer | None = None,
    record_trace: bool = False,
) -> SearchResult:
    """Metropolis walk over uniform single-edge flips on a geometric cooling schedule.

    Returns the best graph ever visited, not the final state.
    """
    scorer = _scorer(sample, pen, scorer)
    dims = sample.dims
    if cfg is None:
        cfg = default_anneal_config(scorer)
    G = Graph.empty(dims) if start is None else start
    current = scorer.score(G)
    best_mask, best = G.edge_mask, current
    trace = [(0, current)] if record_trace else None
    slots = edge_slots(dims.d)
    if not slots:
        return SearchResult(G, current, 1, trace)

    rng = np.random.default_rng(cfg.seed)
    vvalue = scorer.vertex_value
    nbm = list(G.nbr_masks)
    val = [vvalue(v, nbm[v]) for v in range(dims.d)]
    mask = G.edge_mask
    evaluations = 1
    step = 0
    for temp in cfg.temperatures():
        picks = rng.integers(len(slots), size=cfg.steps_per_temperature).tolist()
        unif = rng.random(cfg.steps_per_temperature).tolist()
        for k, r in zip(picks, unif):
            u, v = slots[k]
            nu, nv = nbm[u] ^ (1 << v), nbm[v] ^ (1 << u)
            vu, vv = vvalue(u, nu), vvalue(v, nv)
            delta = (vu - val[u]) + (vv - val[v])
            evaluations += 1
            step += 1
            if delta >= 0 or r < math.exp(delta / temp):
                nbm[u], nbm[v], val[u], val[v] = nu, nv, vu, vv
                mask ^= 1 << k
                current += delta
                if current > best:
                    # re-anchor to avoid drift from accumulated deltas
                    current = scorer.score(Graph(dims, mask))
                    if current > best:
                        best_mask, best = mask, current
        if trace is not None:
            trace.append((step, current))
    best_graph = Graph(dims, best_mask)
    return SearchResult(best_graph, scorer.score(best_graph), evaluations, trace)
