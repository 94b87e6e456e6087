"""Configuration counts N(a_W) and the empirical probabilities built from them."""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidMargin, MarginMismatch
from .model import ConfigKey, DiscreteDistribution, Sample, encode_rows, set_to_mask

# bincount is used while the code space stays below this size; np.unique beyond.
_DENSE_LIMIT = 1 << 22


@dataclass(frozen=True, eq=False)
class CountTable:
    """Nonzero counts of a margin, as parallel sorted arrays of codes and counts."""

    margin: tuple[int, ...]
    n: int
    codes: np.ndarray
    values: np.ndarray

    @property
    def counts(self) -> dict[ConfigKey, int]:
        return {ConfigKey(self.margin, int(c)): int(k) for c, k in zip(self.codes, self.values)}

    def count(self, key: ConfigKey | int) -> int:
        code = self._code(key)
        i = np.searchsorted(self.codes, code)
        if i < len(self.codes) and self.codes[i] == code:
            return int(self.values[i])
        return 0

    def lookup(self, codes: np.ndarray) -> np.ndarray:
        """Counts for an array of codes (0 where absent)."""
        idx = np.searchsorted(self.codes, codes)
        idx = np.minimum(idx, len(self.codes) - 1)
        found = self.codes[idx] == codes
        return np.where(found, self.values[idx], 0)

    def _code(self, key: ConfigKey | int) -> int:
        if isinstance(key, ConfigKey):
            if key.margin != self.margin:
                raise MarginMismatch(f"key margin {key.margin} does not match table margin {self.margin}")
            return key.code
        return int(key)

    def __len__(self) -> int:
        return len(self.codes)


def _tally(codes: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    if size <= _DENSE_LIMIT:
        full = np.bincount(codes, minlength=size)
        nz = np.flatnonzero(full)
        return nz.astype(np.int64), full[nz].astype(np.int64)
    uniq, cnt = np.unique(codes, return_counts=True)
    return uniq.astype(np.int64), cnt.astype(np.int64)


def _normalize_margin(sample: Sample, W: Iterable[int]) -> tuple[int, ...]:
    W = list(W)
    if len(set(W)) != len(W):
        raise InvalidMargin(f"duplicate vertex in margin {tuple(W)}")
    for w in W:
        if not 0 <= w < sample.dims.d:
            raise InvalidMargin(f"vertex {w} out of range for d={sample.dims.d}")
    return tuple(sorted(W))


def _count(sample: Sample, margin: tuple[int, ...]) -> CountTable:
    if not margin:
        return CountTable((), sample.n, np.array([0], dtype=np.int64), np.array([sample.n], dtype=np.int64))
    A = sample.dims.alphabet_size
    size = A ** len(margin)
    if size >= 1 << 62:
        raise InvalidMargin(f"margin {margin} too wide to encode in 64 bits")
    codes = encode_rows(sample.data, margin, A)
    c, k = _tally(codes, size)
    return CountTable(margin, sample.n, c, k)


def count_margin(sample: Sample, W: Iterable[int]) -> CountTable:
    margin = _normalize_margin(sample, W)
    if not margin:
        raise InvalidMargin("margin must be nonempty")
    return _count(sample, margin)


def empirical_marginal(table: CountTable, key: ConfigKey) -> float:
    return table.count(key) / table.n


class CountCache:
    """Memo of CountTables keyed by margin bitmask, for one sample.

    Concurrent callers may compute the same margin twice; the results are
    identical, so last write wins.
    """

    def __init__(self, sample: Sample):
        self.sample = sample
        self._tables: dict[int, CountTable] = {}
        self._lock = threading.Lock()

    def get(self, W: Iterable[int]) -> CountTable:
        margin = tuple(sorted(W))
        key = set_to_mask(margin)
        table = self._tables.get(key)
        if table is None:
            table = _count(self.sample, margin)
            with self._lock:
                self._tables[key] = table
        return table

    def __len__(self) -> int:
        return len(self._tables)


def _drop_digit(codes: np.ndarray, pos: int, A: int) -> np.ndarray:
    """Remove base-A digit ``pos`` from every code."""
    low = A**pos
    return (codes // (low * A)) * low + codes % low


def _project(codes: np.ndarray, union: tuple[int, ...], keep: tuple[int, ...], A: int) -> np.ndarray:
    """Codes over ``union`` -> codes over the sub-margin ``keep``."""
    out = codes
    for pos in reversed(range(len(union))):
        if union[pos] not in keep:
            out = _drop_digit(out, pos, A)
    return out


def empirical_conditional(
    sample: Sample, target: Iterable[int], given: Iterable[int], cache: CountCache | None = None
) -> dict[ConfigKey, DiscreteDistribution]:
    """pi_hat(a_W | a_W') for every observed a_W'; each value is a distribution over A^|W| codes."""
    W = _normalize_margin(sample, target)
    Wp = _normalize_margin(sample, given)
    if not W:
        raise InvalidMargin("target margin must be nonempty")
    if set(W) & set(Wp):
        raise InvalidMargin(f"target {W} and conditioning set {Wp} overlap")
    cache = cache or CountCache(sample)
    A = sample.dims.alphabet_size
    union = tuple(sorted(W + Wp))
    joint = cache.get(union)
    cond = cache.get(Wp)
    given_codes = _project(joint.codes, union, Wp, A)
    target_codes = _project(joint.codes, union, W, A)
    size = A ** len(W)
    rows: dict[int, np.ndarray] = {}
    for gc, tc, k in zip(given_codes.tolist(), target_codes.tolist(), joint.values.tolist()):
        rows.setdefault(gc, np.zeros(size))[tc] = k
    out = {}
    for gc in sorted(rows):
        denom = cond.count(gc)
        probs = rows[gc] / denom
        out[ConfigKey(Wp, gc)] = DiscreteDistribution(tuple(probs / probs.sum()))
    return out


def node_statistics(
    sample: Sample, v: int, nb: Iterable[int], cache: CountCache | None = None
) -> tuple[dict[ConfigKey, int], dict[ConfigKey, int]]:
    """Joint counts N(a_v, a_nb) keyed over sorted(nb + v), and margin counts N(a_nb)."""
    nb = _normalize_margin(sample, nb)
    if v in nb:
        raise InvalidMargin(f"vertex {v} is in its own neighbourhood")
    cache = cache or CountCache(sample)
    joint = cache.get(nb + (v,))
    margin = cache.get(nb)
    return joint.counts, margin.counts


def joint_and_margin_counts(cache: CountCache, v: int, nb_mask: int) -> tuple[np.ndarray, np.ndarray]:
    """Fast path for scoring: parallel arrays (N(a_v, a_nb), N(a_nb)) over observed (a_v, a_nb)."""
    A = cache.sample.dims.alphabet_size
    nb = tuple(i for i in range(cache.sample.dims.d) if (nb_mask >> i) & 1)
    union = tuple(sorted(nb + (v,)))
    joint = cache.get(union)
    if not nb:
        return joint.values, np.full(len(joint.values), cache.sample.n, dtype=np.int64)
    margin = cache.get(nb)
    nb_codes = _drop_digit(joint.codes, union.index(v), A)
    return joint.values, margin.lookup(nb_codes)
