"""Compare greedy and annealing against the exhaustive optimum on random pairwise models.

    python3 scripts/search_quality.py --instances 200 --max-d 5
"""
import argparse
import sys
import time

import numpy as np

from mrfselect import (
    PenaltyConfig,
    ProblemDims,
    exact_sample,
    exhaustive_argmax,
    greedy_flip_search,
    joint_from_potentials,
    simulated_annealing,
)
from mrfselect.score import Scorer
from mrfselect.search import default_anneal_config
from mrfselect.truth import random_pairwise_spec


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=200)
    ap.add_argument("--max-d", type=int, default=5)
    ap.add_argument("--max-n", type=int, default=500)
    ap.add_argument("--c", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    hits = {"greedy": 0, "anneal": 0}
    gaps = {"greedy": [], "anneal": []}
    times = {"exhaustive": 0.0, "greedy": 0.0, "anneal": 0.0}
    for _ in range(args.instances):
        d = int(rng.integers(2, args.max_d + 1))
        A = int(rng.choice([2, 3]))
        n = int(rng.integers(20, args.max_n + 1))
        spec = random_pairwise_spec(ProblemDims(d, A), rng)
        s = exact_sample(joint_from_potentials(spec), n, int(rng.integers(2**32)))
        pen = PenaltyConfig(args.c, n)
        scorer = Scorer(s, pen)
        t = time.perf_counter()
        best = exhaustive_argmax(s, pen, scorer=scorer).best_score
        times["exhaustive"] += time.perf_counter() - t
        t = time.perf_counter()
        g = greedy_flip_search(s, pen, scorer=scorer)
        times["greedy"] += time.perf_counter() - t
        t = time.perf_counter()
        a = simulated_annealing(s, pen, default_anneal_config(scorer, seed=0), start=g.best_graph, scorer=scorer)
        times["anneal"] += time.perf_counter() - t
        tol = 1e-9 * max(1.0, abs(best))
        for name, res in (("greedy", g), ("anneal", a)):
            hits[name] += res.best_score >= best - tol
            gaps[name].append(best - res.best_score)
    for name in ("greedy", "anneal"):
        print(f"{name}: optimal on {hits[name]}/{args.instances}, worst gap {max(gaps[name]):.3g}, time {times[name]:.2f} s")
    print(f"exhaustive time {times['exhaustive']:.2f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
