"""Penalized pseudo-likelihood score of a graph.

    score(G) = sum_v sum_{a_v, a_G(v)} N(a_v, a_G(v)) ln(N(a_v, a_G(v)) / N(a_G(v)))
               - c ln(n) sum_v |A|^|G(v)|

Only configurations with N(a_v, a_G(v)) > 0 contribute, so the score is finite.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .counts import CountCache, joint_and_margin_counts
from .errors import InvalidMargin, PenaltyOverflow
from .model import Graph, Sample, mask_to_set, set_to_mask, slot_of

INT64_MAX = (1 << 63) - 1


@dataclass(frozen=True)
class PenaltyConfig:
    c: float
    n: int

    def __post_init__(self):
        if not self.c >= 0:
            raise ValueError(f"penalty constant must be >= 0, got {self.c}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2 so that ln(n) > 0, got {self.n}")

    @property
    def lam(self) -> float:
        return self.c * math.log(self.n)


@dataclass(frozen=True)
class VertexScore:
    v: int
    nb: frozenset[int]
    loglik: float
    penalty_units: int

    def value(self, lam: float) -> float:
        return self.loglik - lam * self.penalty_units


def penalty_units(alphabet_size: int, degree: int) -> int:
    units = alphabet_size**degree
    if units > INT64_MAX:
        raise PenaltyOverflow(f"|A|^{degree} = {alphabet_size}^{degree} exceeds the 64-bit integer range")
    return units


def _loglik_from_counts(joint: np.ndarray, margin: np.ndarray) -> float:
    joint = joint.astype(np.float64)
    terms = joint * np.log(joint / margin)
    # fsum is correctly rounded, hence independent of term order
    return math.fsum(terms.tolist())


class Scorer:
    """Score graphs against one sample, memoising counts and vertex scores.

    The vertex-score memo is keyed by (v, neighbour bitmask); both memos live as
    long as the scorer, i.e. one estimation run.
    """

    def __init__(self, sample: Sample, pen: PenaltyConfig):
        self.sample = sample
        self.pen = pen
        self.lam = pen.lam
        self.counts = CountCache(sample)
        self._vertex: dict[tuple[int, int], VertexScore] = {}
        self._lock = threading.Lock()

    @property
    def dims(self):
        return self.sample.dims

    def vertex_score(self, v: int, nb_mask: int) -> VertexScore:
        key = (v, nb_mask)
        vs = self._vertex.get(key)
        if vs is None:
            if (nb_mask >> v) & 1:
                raise InvalidMargin(f"vertex {v} is in its own neighbourhood")
            joint, margin = joint_and_margin_counts(self.counts, v, nb_mask)
            nb = mask_to_set(nb_mask)
            vs = VertexScore(v, nb, _loglik_from_counts(joint, margin), penalty_units(self.dims.alphabet_size, len(nb)))
            with self._lock:
                self._vertex[key] = vs
        return vs

    def vertex_value(self, v: int, nb_mask: int) -> float:
        return self.vertex_score(v, nb_mask).value(self.lam)

    def parts(self, G: Graph) -> tuple[float, int]:
        """(log pseudo-likelihood, total penalty units) of G."""
        self._check(G)
        scores = [self.vertex_score(v, G.nbr_masks[v]) for v in range(self.dims.d)]
        units = sum(s.penalty_units for s in scores)
        if units > INT64_MAX:
            raise PenaltyOverflow("total penalty units exceed the 64-bit integer range")
        return math.fsum(s.loglik for s in scores), units

    def score(self, G: Graph) -> float:
        loglik, units = self.parts(G)
        return loglik - self.lam * units

    def flip_delta(self, G: Graph, u: int, v: int) -> float:
        """score(G with (u, v) flipped) - score(G), touching only vertices u and v."""
        self._check(G)
        if u == v:
            raise ValueError("self-loops are not allowed")
        mu, mv = G.nbr_masks[u], G.nbr_masks[v]
        old_u, old_v = self.vertex_score(u, mu), self.vertex_score(v, mv)
        new_u, new_v = self.vertex_score(u, mu ^ (1 << v)), self.vertex_score(v, mv ^ (1 << u))
        dll = (new_u.loglik - old_u.loglik) + (new_v.loglik - old_v.loglik)
        dunits = (new_u.penalty_units - old_u.penalty_units) + (new_v.penalty_units - old_v.penalty_units)
        return dll - self.lam * dunits

    def vertex_table(self) -> np.ndarray:
        """Array T[v, mask] of vertex values for every neighbourhood mask (NaN where v in mask)."""
        d = self.dims.d
        table = np.full((d, 1 << d), np.nan)
        for v in range(d):
            for mask in range(1 << d):
                if not (mask >> v) & 1:
                    table[v, mask] = self.vertex_value(v, mask)
        return table

    def _check(self, G: Graph) -> None:
        if G.dims != self.dims:
            raise ValueError(f"graph dims {G.dims} do not match sample dims {self.dims}")


def vertex_loglik(sample: Sample, v: int, nb: Iterable[int]) -> float:
    nb = list(nb)
    if v in nb:
        raise InvalidMargin(f"vertex {v} is in its own neighbourhood")
    if len(set(nb)) != len(nb):
        raise InvalidMargin("duplicate vertex in neighbourhood")
    joint, margin = joint_and_margin_counts(CountCache(sample), v, set_to_mask(nb))
    return _loglik_from_counts(joint, margin)


def graph_score(sample: Sample, G: Graph, pen: PenaltyConfig) -> float:
    return Scorer(sample, pen).score(G)


def score_delta_for_edge_flip(sample: Sample, G: Graph, edge: tuple[int, int], pen: PenaltyConfig) -> float:
    u, v = edge
    slot_of(G.dims.d, u, v)
    return Scorer(sample, pen).flip_delta(G, u, v)
