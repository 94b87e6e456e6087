"""Stationary, temporally dependent samples and diagnostics for them.

``lazy_refresh`` keeps the previous vector with probability rho and otherwise
draws a fresh one from pi, so it is stationary with invariant pi and its
dependence decays like rho**lag. ``gibbs_scan`` runs one systematic Glauber
sweep per time step; its mixing rate depends on the model and is not certified.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .counts import CountCache
from .model import Sample, decode_codes, encode_rows
from .truth import TrueModel, codes_to_sample, draw_codes

KINDS = ("iid", "lazy_refresh", "gibbs_scan")


@dataclass(frozen=True)
class MixingChainConfig:
    kind: str = "iid"
    rho: float = 0.0
    seed: int = 0
    burn_in: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 0 <= self.rho < 1:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")


def _lazy_codes(model: TrueModel, rng: np.random.Generator, n: int, rho: float) -> np.ndarray:
    # fresh draws first, so rho=0 reproduces exact_sample for the same seed
    codes = draw_codes(model, rng, n)
    if rho > 0 and n > 1:
        hold = rng.random(n - 1) < rho
        # a held step copies the most recent refresh
        idx = np.arange(n)
        idx[1:][hold] = 0
        idx = np.maximum.accumulate(idx)
        codes = codes[idx]
    return codes


def _gibbs_codes(model: TrueModel, rng: np.random.Generator, n: int, burn_in: int) -> np.ndarray:
    A, d = model.dims.alphabet_size, model.dims.d
    joint = model.joint
    powers = [A**v for v in range(d)]
    # cond[v][c] = distribution of a_v given the rest of code c (with a_v zeroed)
    cdfs = []
    for v in range(d):
        base = np.arange(len(joint))
        base = base - ((base // powers[v]) % A) * powers[v]
        rows = joint[base[:, None] + np.arange(A)[None, :] * powers[v]]
        tot = rows.sum(axis=1, keepdims=True)
        cdfs.append(np.cumsum(rows / np.where(tot > 0, tot, 1), axis=1).tolist())
    state = int(draw_codes(model, rng, 1)[0])
    out = np.empty(n, dtype=np.int64)
    sweeps = burn_in + n
    unif = rng.random((sweeps, d)).tolist()
    for t in range(sweeps):
        u_t = unif[t]
        for v in range(d):
            digit = (state // powers[v]) % A
            base = state - digit * powers[v]
            cdf = cdfs[v][base]
            r = u_t[v] * cdf[-1]
            a = 0
            while a < A - 1 and cdf[a] <= r:
                a += 1
            state = base + a * powers[v]
        if t >= burn_in:
            out[t - burn_in] = state
    return out


def generate_chain(model: TrueModel, cfg: MixingChainConfig, n: int) -> Sample:
    rng = np.random.default_rng(cfg.seed)
    if cfg.kind == "iid":
        codes = _lazy_codes(model, rng, n, 0.0)
    elif cfg.kind == "lazy_refresh":
        codes = _lazy_codes(model, rng, n, cfg.rho)
    else:
        codes = _gibbs_codes(model, rng, n, cfg.burn_in)
    return codes_to_sample(model, codes)


def repeat_probability(model: TrueModel) -> float:
    """P(two independent pi-draws coincide) = sum_a pi(a)^2."""
    return float(np.sum(model.joint**2))


def _all_margins(d: int) -> list[tuple[int, ...]]:
    return [W for r in range(1, d + 1) for W in itertools.combinations(range(d), r)]


def _all_conditionals(d: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    out = []
    for W in _all_margins(d):
        rest = [v for v in range(d) if v not in W]
        for r in range(1, len(rest) + 1):
            for Wp in itertools.combinations(rest, r):
                out.append((W, Wp))
    return out


@dataclass
class EnvelopeReport:
    delta: float
    n_grid: list[int]
    seeds: list[int]
    margins: list[tuple[int, ...]]
    conditionals: list[tuple[tuple[int, ...], tuple[int, ...]]]
    # fraction of seeds for which every tested configuration is inside the bound
    marginal_pass: list[float] = field(default_factory=list)
    conditional_pass: list[float] = field(default_factory=list)
    # fraction of (configuration, seed) pairs inside the bound
    marginal_pair_pass: list[float] = field(default_factory=list)
    conditional_pair_pass: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "n_grid": list(self.n_grid),
            "seeds": list(self.seeds),
            "margins": [[v + 1 for v in W] for W in self.margins],
            "conditionals": [[[v + 1 for v in W], [v + 1 for v in Wp]] for W, Wp in self.conditionals],
            "marginal_pass": self.marginal_pass,
            "conditional_pass": self.conditional_pass,
            "marginal_pair_pass": self.marginal_pair_pass,
            "conditional_pair_pass": self.conditional_pair_pass,
        }


def _marginal_checks(model: TrueModel, cache: CountCache, W, bound: float) -> np.ndarray:
    table = cache.get(W)
    pi = model.marginal(W)
    est = np.zeros_like(pi)
    est[table.codes] = table.values / table.n
    return np.abs(est - pi) < bound


def _conditional_checks(model: TrueModel, cache: CountCache, W, Wp, delta: float, log_n: float) -> np.ndarray:
    A = model.dims.alphabet_size
    union = tuple(sorted(W + Wp))
    pj = model.marginal(union)
    pg = model.marginal(Wp)
    joint_t = cache.get(union)
    given_t = cache.get(Wp)
    symbols = decode_codes(np.arange(len(pj)), len(union), A)
    gcodes = encode_rows(symbols, [union.index(w) for w in Wp], A)
    n_given = given_t.lookup(gcodes)
    observed = n_given > 0
    n_joint = joint_t.lookup(np.arange(len(pj)))
    with np.errstate(invalid="ignore", divide="ignore"):
        est = n_joint / np.where(observed, n_given, 1)
        true = pj / np.where(pg[gcodes] > 0, pg[gcodes], 1)
        bound = np.sqrt(delta * log_n / np.where(observed, n_given, 1))
    return (np.abs(est - true) < bound)[observed & (pg[gcodes] > 0)]


def chain_seed(seed: int, n: int) -> int:
    return int(np.random.SeedSequence([seed, n]).generate_state(1, dtype=np.uint64)[0])


def envelope_check(
    model: TrueModel,
    cfg: MixingChainConfig,
    delta: float,
    n_grid: Sequence[int],
    seeds: Sequence[int],
    margins: Sequence[Sequence[int]] | None = None,
    conditionals: Sequence[tuple[Sequence[int], Sequence[int]]] | None = None,
) -> EnvelopeReport:
    """Check |pi_hat(a_W) - pi(a_W)| < sqrt(delta ln n / n) and the conditional analogue
    |pi_hat(a_W | a_W') - pi(a_W | a_W')| < sqrt(delta ln n / N(a_W')) on simulated chains.

    Defaults test every nonempty margin and every disjoint (W, W') pair with W'
    nonempty. Conditioning configurations that were never observed are skipped.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    grid = sorted(set(int(n) for n in n_grid))
    d = model.dims.d
    margins = [tuple(sorted(W)) for W in margins] if margins is not None else _all_margins(d)
    conditionals = (
        [(tuple(sorted(W)), tuple(sorted(Wp))) for W, Wp in conditionals]
        if conditionals is not None
        else _all_conditionals(d)
    )
    report = EnvelopeReport(delta, grid, list(seeds), margins, conditionals)
    for n in grid:
        log_n = math.log(n)
        bound = math.sqrt(delta * log_n / n)
        m_all = m_pairs = m_total = 0
        c_all = c_pairs = c_total = 0
        for seed in seeds:
            run_cfg = MixingChainConfig(cfg.kind, cfg.rho, chain_seed(seed, n), cfg.burn_in)
            sample = generate_chain(model, run_cfg, n)
            cache = CountCache(sample)
            m_ok = np.concatenate([_marginal_checks(model, cache, W, bound) for W in margins]) if margins else np.array([], bool)
            c_ok = (
                np.concatenate([_conditional_checks(model, cache, W, Wp, delta, log_n) for W, Wp in conditionals])
                if conditionals
                else np.array([], bool)
            )
            m_all += bool(m_ok.all())
            m_pairs += int(m_ok.sum())
            m_total += m_ok.size
            c_all += bool(c_ok.all())
            c_pairs += int(c_ok.sum())
            c_total += c_ok.size
        k = max(1, len(seeds))
        report.marginal_pass.append(m_all / k)
        report.conditional_pass.append(c_all / k)
        report.marginal_pair_pass.append(m_pairs / m_total if m_total else 1.0)
        report.conditional_pair_pass.append(c_pairs / c_total if c_total else 1.0)
    return report


@dataclass
class MixingDiagnostic:
    """coefficients[l - 1, v] = max_{a,b} |P(X_v^(i+l)=b | X_v^(i)=a) / P(X_v=b) - 1|.

    An empirical surrogate for the mixing rate at lag l, restricted to
    single-vertex margins; it is not the supremum over all cylinder events.
    """

    lags: list[int]
    coefficients: np.ndarray

    @property
    def per_lag(self) -> np.ndarray:
        return self.coefficients.max(axis=1)

    def to_dict(self) -> dict:
        return {
            "lags": self.lags,
            "per_lag": self.per_lag.tolist(),
            "per_vertex": {str(v + 1): self.coefficients[:, v].tolist() for v in range(self.coefficients.shape[1])},
        }


def mixing_diagnostic(sample: Sample, max_lag: int) -> MixingDiagnostic:
    n, d = sample.n, sample.dims.d
    A = sample.dims.alphabet_size
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    if max_lag >= n / 10:
        raise ValueError(f"max_lag must be < n/10 = {n / 10}")
    coef = np.zeros((max_lag, d))
    for v in range(d):
        col = sample.data[:, v]
        marg = np.bincount(col, minlength=A) / n
        for lag in range(1, max_lag + 1):
            pairs = np.bincount(col[:-lag] * A + col[lag:], minlength=A * A).reshape(A, A)
            row_tot = pairs.sum(axis=1)
            ok_a = row_tot > 0
            ok_b = marg > 0
            if not ok_a.any():
                continue
            cond = pairs[ok_a] / row_tot[ok_a, None]
            ratio = cond[:, ok_b] / marg[ok_b]
            coef[lag - 1, v] = float(np.abs(ratio - 1).max()) if ratio.size else 0.0
    return MixingDiagnostic(list(range(1, max_lag + 1)), coef)
