import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mrfselect import (
    Graph,
    PenaltyConfig,
    ProblemDims,
    Sample,
    complete_graph,
    graph_score,
    score_delta_for_edge_flip,
    vertex_loglik,
)
from mrfselect.errors import InvalidMargin, PenaltyOverflow
from mrfselect.model import edge_slots
from mrfselect.score import Scorer, penalty_units
from conftest import random_sample, samples
from oracles import naive_graph_score, naive_vertex_loglik


def test_loglik_identical_rows_is_zero():
    s = Sample.from_rows([[1, 0, 2]] * 9)
    for v in range(3):
        for nb in ([], [w for w in range(3) if w != v]):
            assert vertex_loglik(s, v, nb) == 0.0


def test_loglik_saturated_conditioning():
    # columns 1..3 are distinct in every row
    rows = [[r % 2, (r >> 0) & 1, (r >> 1) & 1, (r >> 2) & 1] for r in range(8)]
    assert vertex_loglik(Sample.from_rows(rows), 0, [1, 2, 3]) == 0.0


def test_loglik_two_fair_coins():
    rows = [[0, 0], [0, 1], [1, 0], [1, 1], [0, 0], [1, 1], [0, 1], [1, 1]]
    s = Sample.from_rows(rows)
    expected = naive_vertex_loglik(rows, 0, [1])
    assert vertex_loglik(s, 0, [1]) == pytest.approx(expected, abs=1e-12)
    # hand check: N(a2=0)=3 with a1 split 2/1; N(a2=1)=5 split 2/3
    hand = 2 * math.log(2 / 3) + math.log(1 / 3) + 2 * math.log(2 / 5) + 3 * math.log(3 / 5)
    assert expected == pytest.approx(hand, abs=1e-12)


def test_loglik_errors():
    s = Sample.from_rows([[0, 1]])
    with pytest.raises(InvalidMargin):
        vertex_loglik(s, 0, [0])


@settings(max_examples=60)
@given(samples(max_d=4), st.data())
def test_loglik_matches_naive(sample, data):
    d = sample.dims.d
    v = data.draw(st.integers(0, d - 1))
    nb = data.draw(st.sets(st.sampled_from([w for w in range(d) if w != v]) if d > 1 else st.nothing()))
    got = vertex_loglik(sample, v, nb)
    assert got <= 0
    assert got == pytest.approx(naive_vertex_loglik(sample.data.tolist(), v, nb), rel=1e-12, abs=1e-12)


def test_empty_graph_penalty():
    rng = np.random.default_rng(1)
    s = random_sample(rng, 100, 3, 2)
    pen = PenaltyConfig(1.0, 100)
    marg = sum(vertex_loglik(s, v, []) for v in range(3))
    assert graph_score(s, Graph.empty(s.dims), pen) == pytest.approx(marg - 3 * math.log(100), abs=1e-9)


def test_complete_graph_penalty():
    rng = np.random.default_rng(2)
    s = random_sample(rng, 100, 3, 2)
    sc = Scorer(s, PenaltyConfig(1.0, 100))
    loglik, units = sc.parts(complete_graph(s.dims))
    assert units == 12
    assert sc.score(complete_graph(s.dims)) == pytest.approx(loglik - 12 * math.log(100), abs=1e-9)


@settings(max_examples=40)
@given(samples(max_d=4), st.data(), st.floats(0.0, 3.0))
def test_graph_score_matches_naive(sample, data, c):
    if sample.n < 2:
        return
    slots = edge_slots(sample.dims.d)
    mask = data.draw(st.integers(0, (1 << len(slots)) - 1))
    G = Graph(sample.dims, mask)
    got = graph_score(sample, G, PenaltyConfig(c, sample.n))
    want = naive_graph_score(sample.data.tolist(), sample.dims.d, sample.dims.alphabet_size, G.edges(), c)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_flip_involution_and_recompute():
    rng = np.random.default_rng(3)
    s = random_sample(rng, 300, 4, 3)
    pen = PenaltyConfig(0.7, s.n)
    G = Graph.from_edges(s.dims, [(0, 1), (2, 3)])
    for u, v in edge_slots(4):
        d1 = score_delta_for_edge_flip(s, G, (u, v), pen)
        d2 = score_delta_for_edge_flip(s, G.flip(u, v), (u, v), pen)
        assert abs(d1 + d2) < 1e-9
        full = graph_score(s, G.flip(u, v), pen) - graph_score(s, G, pen)
        assert abs(d1 - full) < 1e-9


def test_add_edge_to_empty_matches_recompute():
    rng = np.random.default_rng(4)
    s = random_sample(rng, 200, 3, 2)
    pen = PenaltyConfig(1.0, s.n)
    E = Graph.empty(s.dims)
    for u, v in edge_slots(3):
        want = naive_graph_score(s.data.tolist(), 3, 2, [(u, v)], 1.0) - naive_graph_score(s.data.tolist(), 3, 2, [], 1.0)
        assert score_delta_for_edge_flip(s, E, (u, v), pen) == pytest.approx(want, abs=1e-9)


def test_zero_penalty_additions_never_hurt():
    rng = np.random.default_rng(5)
    for _ in range(30):
        d = int(rng.integers(2, 5))
        s = random_sample(rng, int(rng.integers(5, 80)), d, int(rng.integers(2, 4)))
        sc = Scorer(s, PenaltyConfig(0.0, s.n))
        G = Graph(s.dims, int(rng.integers(0, 1 << s.dims.n_slots)))
        for u, v in edge_slots(d):
            if not G.has_edge(u, v):
                assert sc.flip_delta(G, u, v) >= -1e-9


@settings(max_examples=60)
@given(samples(max_d=5), st.data())
def test_loglik_monotone_in_neighbourhood(sample, data):
    d = sample.dims.d
    if d < 2:
        return
    v = data.draw(st.integers(0, d - 1))
    others = [w for w in range(d) if w != v]
    big = data.draw(st.sets(st.sampled_from(others)))
    small = data.draw(st.sets(st.sampled_from(sorted(big)))) if big else set()
    assert vertex_loglik(sample, v, big) >= vertex_loglik(sample, v, small) - 1e-9


def test_penalty_strictly_increases_with_edges():
    dims = ProblemDims(4, 3)
    s = Sample(dims, np.zeros((5, 4), dtype=int))
    sc = Scorer(s, PenaltyConfig(1.0, 5))
    G = Graph.from_edges(dims, [(0, 1)])
    H = G.add(2, 3)
    assert sc.parts(H)[1] > sc.parts(G)[1]


def test_penalty_overflow():
    assert penalty_units(2, 62) == 2**62
    with pytest.raises(PenaltyOverflow):
        penalty_units(2, 63)
    with pytest.raises(PenaltyOverflow):
        penalty_units(3, 40)


def test_penalty_config_validation():
    assert PenaltyConfig(2.0, 100).lam == pytest.approx(2 * math.log(100))
    with pytest.raises(ValueError):
        PenaltyConfig(-1.0, 10)
    with pytest.raises(ValueError):
        PenaltyConfig(1.0, 1)


@settings(max_examples=40)
@given(samples(max_d=4, max_A=3), st.data())
def test_score_symbol_relabel_and_vertex_permutation(sample, data):
    d, A = sample.dims.d, sample.dims.alphabet_size
    if sample.n < 2:
        return
    G = Graph(sample.dims, data.draw(st.integers(0, (1 << sample.dims.n_slots) - 1)))
    pen = PenaltyConfig(1.0, sample.n)
    base = graph_score(sample, G, pen)
    # independent symbol permutation per column
    relabelled = sample.data.copy()
    for v in range(d):
        perm = np.array(data.draw(st.permutations(range(A))))
        relabelled[:, v] = perm[relabelled[:, v]]
    assert graph_score(Sample(sample.dims, relabelled), G, pen) == base
    perm = data.draw(st.permutations(range(d)))
    assert graph_score(sample.permute_vertices(perm), G.permute(perm), pen) == base
