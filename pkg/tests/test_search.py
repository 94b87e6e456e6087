import math

import numpy as np
import pytest

from mrfselect import (
    AnnealConfig,
    Graph,
    PenaltyConfig,
    ProblemDims,
    Sample,
    complete_graph,
    exhaustive_argmax,
    graph_score,
    greedy_flip_search,
    simulated_annealing,
)
from mrfselect import search as search_mod
from mrfselect.errors import EnumerationTooLarge
from mrfselect.model import edge_slots
from mrfselect.score import Scorer
from conftest import model_sample, random_sample
from oracles import all_edge_sets, naive_graph_score


def brute_best(sample, c):
    """Exhaustive argmax by the naive scorer, with the same tie rule."""
    rows = sample.data.tolist()
    scored = []
    for es in all_edge_sets(sample.dims.d):
        G = Graph.from_edges(sample.dims, es)
        scored.append((naive_graph_score(rows, sample.dims.d, sample.dims.alphabet_size, es, c), G))
    top = max(s for s, _ in scored)
    ties = [G for s, G in scored if s >= top - 1e-9 * max(1, abs(top))]
    return top, min(ties, key=lambda G: (G.n_edges, G.edge_mask))


def test_independent_columns_give_empty_graph():
    rng = np.random.default_rng(0)
    s = random_sample(rng, 5000, 2, 2)
    res = exhaustive_argmax(s, PenaltyConfig(1.0, s.n))
    top, best = brute_best(s, 1.0)
    assert res.best_graph == best == Graph.empty(s.dims)
    assert res.evaluations == 2


def test_copied_column_gives_edge():
    rng = np.random.default_rng(1)
    col = rng.integers(0, 2, 1000)
    s = Sample(ProblemDims(2, 2), np.stack([col, col], axis=1))
    rows = s.data.tolist()
    empty = naive_graph_score(rows, 2, 2, [], 1.0)
    edge = naive_graph_score(rows, 2, 2, [(0, 1)], 1.0)
    assert edge > empty
    res = exhaustive_argmax(s, PenaltyConfig(1.0, s.n))
    assert res.best_graph.edges() == [(0, 1)]
    assert res.best_score == pytest.approx(edge, abs=1e-9)


def test_identical_rows_tie_break_to_empty():
    s = Sample.from_rows([[0, 1, 1, 0]] * 20)
    res = exhaustive_argmax(s, PenaltyConfig(1.0, 20))
    assert res.best_graph.n_edges == 0
    # with no penalty every graph ties at 0; fewest edges still wins
    res0 = exhaustive_argmax(s, PenaltyConfig(0.0, 20))
    assert res0.best_graph.n_edges == 0 and res0.best_score == 0.0


def test_exhaustive_matches_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(15):
        d = int(rng.integers(2, 5))
        s = model_sample(rng, d, int(rng.integers(2, 4)), int(rng.integers(30, 300)))
        c = float(rng.choice([0.25, 1.0, 2.0]))
        res = exhaustive_argmax(s, PenaltyConfig(c, s.n))
        top, best = brute_best(s, c)
        assert res.best_score == pytest.approx(top, abs=1e-9)
        assert res.best_graph == best
        assert res.evaluations == 2 ** s.dims.n_slots


def test_exhaustive_beats_random_graphs():
    rng = np.random.default_rng(3)
    s = model_sample(rng, 5, 2, 400)
    pen = PenaltyConfig(1.0, s.n)
    res = exhaustive_argmax(s, pen)
    assert abs(graph_score(s, res.best_graph, pen) - res.best_score) <= 1e-9
    for mask in rng.integers(0, 1 << 10, 100):
        assert res.best_score >= graph_score(s, Graph(s.dims, int(mask)), pen)


def test_exhaustive_cap():
    s = Sample(ProblemDims(9, 2), np.zeros((3, 9), dtype=int))
    with pytest.raises(EnumerationTooLarge):
        exhaustive_argmax(s, PenaltyConfig(1.0, 3))


def test_exhaustive_chunking_is_worker_independent(monkeypatch):
    monkeypatch.setattr(search_mod, "_CHUNK", 64)
    rng = np.random.default_rng(4)
    s = model_sample(rng, 5, 2, 300)
    pen = PenaltyConfig(0.5, s.n)
    results = [exhaustive_argmax(s, pen, workers=w) for w in (1, 3, 8)]
    assert len({(r.best_graph.edge_mask, r.best_score) for r in results}) == 1


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("MRF_SELECT_THREADS", "3")
    assert search_mod.worker_count() == 3
    assert search_mod.worker_count(5) == 5


def test_greedy_from_optimum_is_fixed_point():
    rng = np.random.default_rng(5)
    s = model_sample(rng, 4, 2, 300)
    pen = PenaltyConfig(1.0, s.n)
    opt = exhaustive_argmax(s, pen)
    res = greedy_flip_search(s, pen, opt.best_graph)
    assert res.best_graph == opt.best_graph


def test_greedy_strips_edges_on_degenerate_sample():
    s = Sample.from_rows([[1, 0, 1, 1]] * 10)
    res = greedy_flip_search(s, PenaltyConfig(1.0, 10), complete_graph(s.dims), record_trace=True)
    assert res.best_graph.n_edges == 0
    scores = [sc for _, sc in res.trace]
    assert all(b > a for a, b in zip(scores, scores[1:]))


def test_greedy_result_is_local_optimum():
    rng = np.random.default_rng(6)
    for _ in range(10):
        s = model_sample(rng, 5, 2, 200)
        pen = PenaltyConfig(1.0, s.n)
        res = greedy_flip_search(s, pen)
        sc = Scorer(s, pen)
        for u, v in edge_slots(5):
            assert sc.flip_delta(res.best_graph, u, v) <= 1e-12


def test_anneal_zero_iterations_returns_start():
    rng = np.random.default_rng(7)
    s = model_sample(rng, 4, 2, 100)
    pen = PenaltyConfig(1.0, s.n)
    start = Graph.from_edges(s.dims, [(0, 3)])
    cfg = AnnealConfig(initial_temperature=1e-5, min_temperature=1e-4, seed=1)
    assert cfg.temperatures() == []
    res = simulated_annealing(s, pen, cfg, start=start)
    assert res.best_graph == start
    assert res.best_score == graph_score(s, start, pen)


def test_anneal_from_greedy_never_worse_and_reproducible():
    rng = np.random.default_rng(8)
    for _ in range(5):
        s = model_sample(rng, 5, 2, 150)
        pen = PenaltyConfig(1.0, s.n)
        sc = Scorer(s, pen)
        g = greedy_flip_search(s, pen, scorer=sc)
        cfg = search_mod.default_anneal_config(sc, seed=42)
        a = simulated_annealing(s, pen, cfg, start=g.best_graph, scorer=sc)
        b = simulated_annealing(s, pen, cfg, start=g.best_graph)
        assert a.best_score >= g.best_score
        assert (a.best_graph, a.best_score, a.evaluations) == (b.best_graph, b.best_score, b.evaluations)
        assert abs(a.best_score - graph_score(s, a.best_graph, pen)) <= 1e-9


def test_anneal_config_validation():
    with pytest.raises(ValueError):
        AnnealConfig(initial_temperature=1.0, cooling_factor=1.0)
    with pytest.raises(ValueError):
        AnnealConfig(initial_temperature=0.0)
    temps = AnnealConfig(initial_temperature=1.0, cooling_factor=0.5, min_temperature=0.1).temperatures()
    assert temps == [1.0, 0.5, 0.25, 0.125]


def test_default_schedule_is_scale_aware():
    rng = np.random.default_rng(9)
    s = model_sample(rng, 4, 2, 200)
    sc = Scorer(s, PenaltyConfig(1.0, s.n))
    cfg = search_mod.default_anneal_config(sc)
    spread = abs(sc.score(Graph.empty(s.dims)) - sc.score(complete_graph(s.dims)))
    assert cfg.initial_temperature == pytest.approx(max(1.0, spread) / 10)
    assert cfg.steps_per_temperature == 20 * 6
    assert (cfg.cooling_factor, cfg.min_temperature) == (0.95, 1e-4)


def test_searches_on_single_vertex():
    s = Sample.from_rows([[0], [1], [1]])
    pen = PenaltyConfig(1.0, 3)
    for res in (exhaustive_argmax(s, pen), greedy_flip_search(s, pen), simulated_annealing(s, pen)):
        assert res.best_graph.n_edges == 0
        assert res.best_score == pytest.approx(2 * math.log(2 / 3) + math.log(1 / 3) - math.log(3))
