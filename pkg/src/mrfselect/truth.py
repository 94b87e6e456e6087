"""Exact-model oracle.

A :class:`TrueModel` holds the full joint table over A^d, indexed by the same
mixed-radix codes as the counting code (vertex 0 is the least-significant
digit). Everything here is exact up to float rounding: conditionals come from
marginalising the table, not from sampling.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EnumerationTooLarge,
    InvalidMargin,
    MarkovIntersectionViolation,
    ModelTooLarge,
    SupportMismatch,
    ZeroProbabilityCondition,
)
from .model import (
    ConfigKey,
    DiscreteDistribution,
    Graph,
    ProblemDims,
    Sample,
    decode_codes,
    encode_config,
)

MAX_JOINT_SIZE = 10**7
DEFAULT_CI_TOL = 1e-9


class _Unbounded:
    """+infinity for minima over empty sets. Compares above every real; refuses arithmetic."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("UNBOUNDED")

    def __bool__(self):
        return True


UNBOUNDED = _Unbounded()


@dataclass(frozen=True)
class PairwisePotentialSpec:
    """pi(a) proportional to exp(sum_v h_v(a_v) + sum_{u<v} J_uv(a_u, a_v)).

    ``edge_potentials[(u, v)]`` (u < v) is an |A| x |A| matrix indexed [a_u][a_v].
    Missing vertices/edges mean zero potentials.
    """

    dims: ProblemDims
    vertex_potentials: Mapping[int, tuple[float, ...]] = field(default_factory=dict)
    edge_potentials: Mapping[tuple[int, int], tuple[tuple[float, ...], ...]] = field(default_factory=dict)

    def __post_init__(self):
        A, d = self.dims.alphabet_size, self.dims.d
        vp = {}
        for v, h in sorted(self.vertex_potentials.items()):
            if not 0 <= v < d:
                raise ValueError(f"vertex {v} out of range")
            h = tuple(float(x) for x in h)
            if len(h) != A:
                raise ValueError(f"vertex {v}: need {A} potentials, got {len(h)}")
            vp[v] = h
        ep = {}
        for (u, v), J in sorted(self.edge_potentials.items()):
            J = np.asarray(J, dtype=float)
            if u == v or not (0 <= u < d and 0 <= v < d):
                raise ValueError(f"bad edge ({u}, {v})")
            if J.shape != (A, A):
                raise ValueError(f"edge ({u}, {v}): need a {A}x{A} matrix")
            if u > v:
                u, v, J = v, u, J.T
            if (u, v) in ep:
                raise ValueError(f"edge ({u}, {v}) given twice")
            ep[(u, v)] = tuple(tuple(float(x) for x in row) for row in J)
        object.__setattr__(self, "vertex_potentials", vp)
        object.__setattr__(self, "edge_potentials", ep)

    def interaction_graph(self) -> Graph:
        """Edges whose potential is not additively separable (i.e. a genuine interaction)."""
        edges = []
        for (u, v), J in self.edge_potentials.items():
            J = np.asarray(J)
            resid = J - J.mean(axis=0, keepdims=True) - J.mean(axis=1, keepdims=True) + J.mean()
            if np.abs(resid).max() > 0:
                edges.append((u, v))
        return Graph.from_edges(self.dims, edges)


@dataclass(frozen=True, eq=False)
class TrueModel:
    dims: ProblemDims
    joint: np.ndarray
    pi_min: float = field(init=False)

    def __post_init__(self):
        joint = np.array(self.joint, dtype=float)
        size = self.dims.alphabet_size**self.dims.d
        if joint.shape != (size,):
            raise ValueError(f"joint must have {size} entries")
        if joint.min() < 0:
            raise ValueError("negative probability in joint")
        if abs(joint.sum() - 1.0) > 1e-12:
            raise ValueError(f"joint sums to {joint.sum()!r}")
        joint.flags.writeable = False
        object.__setattr__(self, "joint", joint)
        object.__setattr__(self, "pi_min", self._pi_min())

    @property
    def tensor(self) -> np.ndarray:
        """Joint as a d-way array indexed [a_0, ..., a_{d-1}]."""
        return self.joint.reshape((self.dims.alphabet_size,) * self.dims.d, order="F")

    def marginal(self, W: Iterable[int]) -> np.ndarray:
        """pi(a_W) as a flat array indexed by the mixed-radix code over sorted W."""
        W = sorted(W)
        other = tuple(i for i in range(self.dims.d) if i not in W)
        m = self.tensor.sum(axis=other) if other else self.tensor
        return np.asarray(m).reshape(-1, order="F")

    def _cond_given(self, v: int, W: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
        """(pi(a_v | a_W), pi(a_W)) broadcastable against the full tensor; NaN where pi(a_W)=0."""
        keep = set(W) | {v}
        other = tuple(i for i in range(self.dims.d) if i not in keep)
        m = self.tensor.sum(axis=other, keepdims=True) if other else self.tensor
        denom = m.sum(axis=v, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(denom > 0, m / np.where(denom > 0, denom, 1), np.nan)
        return cond, denom

    def _pi_min(self) -> float:
        best = 1.0
        for v in range(self.dims.d):
            cond, _ = self._cond_given(v, [w for w in range(self.dims.d) if w != v])
            pos = cond[np.isfinite(cond) & (cond > 0)]
            if pos.size:
                best = min(best, float(pos.min()))
        return best


def _check_size(dims: ProblemDims) -> None:
    if dims.alphabet_size**dims.d > MAX_JOINT_SIZE:
        raise ModelTooLarge(f"|A|^d = {dims.alphabet_size}^{dims.d} exceeds {MAX_JOINT_SIZE}")


def joint_from_potentials(spec: PairwisePotentialSpec) -> TrueModel:
    dims = spec.dims
    _check_size(dims)
    A, d = dims.alphabet_size, dims.d
    energy = np.zeros((A,) * d)
    for v, h in spec.vertex_potentials.items():
        shape = [1] * d
        shape[v] = A
        energy = energy + np.asarray(h).reshape(shape)
    for (u, v), J in spec.edge_potentials.items():
        shape = [1] * d
        shape[u] = A
        shape[v] = A
        energy = energy + np.asarray(J).reshape(shape)
    w = np.exp(energy - energy.max())
    joint = (w / w.sum()).reshape(-1, order="F")
    return TrueModel(dims, joint / joint.sum())


def model_from_joint(dims: ProblemDims, joint: Sequence[float]) -> TrueModel:
    _check_size(dims)
    return TrueModel(dims, np.asarray(joint, dtype=float))


def true_conditional(
    model: TrueModel, target: Iterable[int], given: Iterable[int], a_given: Sequence[int] | ConfigKey = ()
) -> DiscreteDistribution:
    """pi(. | a_W') over A^|W|, indexed by codes over sorted W.

    ``a_given`` is aligned with ``given`` as passed (or a ConfigKey over sorted W').
    """
    W, Wp = list(target), list(given)
    if set(W) & set(Wp):
        raise InvalidMargin(f"target {W} and conditioning set {Wp} overlap")
    key = a_given if isinstance(a_given, ConfigKey) else encode_config(a_given, Wp, model.dims)
    A = model.dims.alphabet_size
    union = sorted(W + Wp)
    joint = model.marginal(union)
    cond_codes = decode_codes(np.arange(len(joint)), len(union), A)
    sorted_Wp = sorted(Wp)
    given_cols = [union.index(w) for w in sorted_Wp]
    target_cols = [union.index(w) for w in sorted(W)]
    weights = A ** np.arange(len(sorted_Wp))
    match = (cond_codes[:, given_cols] @ weights if given_cols else np.zeros(len(joint), int)) == key.code
    mass = joint[match].sum()
    if mass <= 0:
        raise ZeroProbabilityCondition(f"pi(a_W') = 0 for W'={tuple(sorted_Wp)}, code {key.code}")
    tw = A ** np.arange(len(W))
    tcodes = cond_codes[match][:, target_cols] @ tw
    probs = np.zeros(A ** len(W))
    np.add.at(probs, tcodes, joint[match])
    probs = probs / mass
    return DiscreteDistribution(tuple(probs / probs.sum()))


def _is_markov(model: TrueModel, v: int, W: Sequence[int], full: np.ndarray, support: np.ndarray, tol: float) -> bool:
    cond, _ = model._cond_given(v, W)
    diff = np.abs(full - cond)
    diff = np.broadcast_to(diff, full.shape)[np.broadcast_to(support, full.shape)]
    return bool(diff.size == 0 or diff.max() <= tol)


def markov_neighborhoods(model: TrueModel, v: int, tol: float = DEFAULT_CI_TOL) -> list[frozenset[int]]:
    """Every W subset of V minus v with pi(a_v | a_{V-v}) = pi(a_v | a_W) on the support."""
    d = model.dims.d
    rest = [w for w in range(d) if w != v]
    full, denom = model._cond_given(v, rest)
    support = denom > 0
    out = []
    for r in range(len(rest) + 1):
        for W in itertools.combinations(rest, r):
            if _is_markov(model, v, W, full, support, tol):
                out.append(frozenset(W))
    return out


def basic_neighborhoods(model: TrueModel, tol: float = DEFAULT_CI_TOL) -> tuple[list[frozenset[int]], Graph]:
    """ne(v) for every v (intersection of all Markov neighbourhoods) and the graph they define."""
    d = model.dims.d
    ne = []
    for v in range(d):
        family = markov_neighborhoods(model, v, tol)
        inter = frozenset(range(d)) - {v}
        for W in family:
            inter &= W
        if inter not in family:
            minimal = [W for W in family if not any(U < W for U in family)]
            raise MarkovIntersectionViolation(
                f"vertex {v}: intersection {sorted(inter)} of Markov neighbourhoods is not Markov",
                vertex=v,
                witness=minimal,
            )
        ne.append(inter)
    for v in range(d):
        for w in ne[v]:
            if v not in ne[w]:
                raise MarkovIntersectionViolation(
                    f"basic neighbourhoods not symmetric: {w} in ne({v}) but {v} not in ne({w})",
                    vertex=v,
                    witness=(v, w),
                )
    return ne, Graph.from_neighbors(model.dims, ne)


def _as_probs(p) -> np.ndarray:
    if isinstance(p, DiscreteDistribution):
        return p.as_array()
    return np.asarray(p, dtype=float)


def kl_divergence(p, q) -> float:
    """D(p; q) in nats, with 0 ln(0/q) = 0 and p ln(p/0) = +inf for p > 0."""
    p, q = _as_probs(p), _as_probs(q)
    if p.shape != q.shape:
        raise SupportMismatch(f"support sizes differ: {p.size} vs {q.size}")
    pos = p > 0
    if np.any(q[pos] == 0):
        return math.inf
    return max(0.0, math.fsum((p[pos] * np.log(p[pos] / q[pos])).tolist()))


def kl_chi2_bound(p, q) -> float:
    """sum over q(a) > 0 of (p(a) - q(a))^2 / q(a)."""
    p, q = _as_probs(p), _as_probs(q)
    if p.shape != q.shape:
        raise SupportMismatch(f"support sizes differ: {p.size} vs {q.size}")
    pos = q > 0
    return math.fsum(((p[pos] - q[pos]) ** 2 / q[pos]).tolist())


def expected_kl(model: TrueModel, v: int, reference: Iterable[int], nb: Iterable[int]) -> float:
    """sum_{a_{V-v}} pi(a_{V-v}) D(pi(. | a_reference); pi(. | a_nb)) for vertex v."""
    cs, _ = model._cond_given(v, list(reference))
    cn, _ = model._cond_given(v, list(nb))
    t = model.tensor
    shape = t.shape
    cs = np.broadcast_to(cs, shape)
    cn = np.broadcast_to(cn, shape)
    weight = np.broadcast_to(t.sum(axis=v, keepdims=True), shape)
    live = (weight > 0) & (cs > 0)
    if np.any(cn[live] == 0):
        return math.inf
    contrib = cs[live] * np.log(cs[live] / cn[live]) * weight[live]
    return max(0.0, math.fsum(contrib.tolist()))


def alpha(model: TrueModel, v: int, Gstar: Graph):
    """Smallest expected KL gap at v over graphs whose neighbourhood of v misses part of G*(v).

    Depends on G only through G(v), so the minimum runs over neighbourhoods of v.
    Returns ``UNBOUNDED`` when G*(v) is empty.
    """
    d = model.dims.d
    star = Gstar.neighbors(v)
    if not star:
        return UNBOUNDED
    if d * (d - 1) // 2 > 30:
        raise EnumerationTooLarge("alpha enumeration exceeds the cap")
    rest = [w for w in range(d) if w != v]
    best = math.inf
    for r in range(len(rest) + 1):
        for nb in itertools.combinations(rest, r):
            if star <= set(nb):
                continue
            best = min(best, expected_kl(model, v, star, nb))
    return best


def draw_codes(model: TrueModel, rng: np.random.Generator, n: int) -> np.ndarray:
    cdf = np.cumsum(model.joint)
    u = rng.random(n) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


def codes_to_sample(model: TrueModel, codes: np.ndarray) -> Sample:
    return Sample(model.dims, decode_codes(codes, model.dims.d, model.dims.alphabet_size))


def exact_sample(model: TrueModel, n: int, seed) -> Sample:
    """n i.i.d. draws by inverse CDF over the joint table."""
    rng = np.random.default_rng(seed)
    return codes_to_sample(model, draw_codes(model, rng, n))


def chain_spec(
    d: int = 3, alphabet_size: int = 2, coupling: float = 1.0, fields: Sequence[float] | None = None
) -> PairwisePotentialSpec:
    """Path 0-1-...-(d-1) with ferromagnetic coupling ``coupling`` on the diagonal."""
    A = alphabet_size
    J = tuple(tuple(coupling if i == j else 0.0 for j in range(A)) for i in range(A))
    vp = {}
    if fields is not None:
        for v, h in enumerate(fields):
            vp[v] = (float(h),) + (0.0,) * (A - 1)
    return PairwisePotentialSpec(
        ProblemDims(d, A), vertex_potentials=vp, edge_potentials={(v, v + 1): J for v in range(d - 1)}
    )


def random_pairwise_spec(
    dims: ProblemDims, rng: np.random.Generator, edge_prob: float = 0.5, scale: float = 1.0
) -> PairwisePotentialSpec:
    """Random model: each edge present with ``edge_prob``, Gaussian potentials of sd ``scale``."""
    A = dims.alphabet_size
    vp = {v: tuple(rng.normal(0, scale / 2, A).tolist()) for v in range(dims.d)}
    ep = {}
    for u in range(dims.d):
        for v in range(u + 1, dims.d):
            if rng.random() < edge_prob:
                ep[(u, v)] = tuple(tuple(row) for row in rng.normal(0, scale, (A, A)).tolist())
    return PairwisePotentialSpec(dims, vp, ep)
