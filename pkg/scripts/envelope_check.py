"""Fraction of simulated chains whose empirical marginals and conditionals stay
inside sqrt(delta ln n / n) (resp. sqrt(delta ln n / N)) of the truth.

    python3 scripts/envelope_check.py models/chain3.txt --kind lazy_refresh --rho 0.5
"""
import argparse
import sys
from pathlib import Path

from mrfselect import MixingChainConfig, envelope_check, joint_from_potentials
from mrfselect.io import import_model


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="Empirical convergence envelope over an n grid.")
    ap.add_argument("model", type=Path)
    ap.add_argument("--n-grid", default="256,1024,4096,16384,65536")
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--delta", type=float, default=1.0)
    ap.add_argument("--kind", default="lazy_refresh")
    ap.add_argument("--rho", type=float, default=0.5)
    args = ap.parse_args(argv)

    model = joint_from_potentials(import_model(args.model))
    cfg = MixingChainConfig(args.kind, args.rho if args.kind == "lazy_refresh" else 0.0)
    rep = envelope_check(model, cfg, args.delta, [int(x) for x in args.n_grid.split(",")], range(args.seeds))
    print("n,marginal_seed_pass,conditional_seed_pass,marginal_pair_pass,conditional_pair_pass")
    for i, n in enumerate(rep.n_grid):
        print(
            f"{n},{rep.marginal_pass[i]:.3f},{rep.conditional_pass[i]:.3f},"
            f"{rep.marginal_pair_pass[i]:.4f},{rep.conditional_pair_pass[i]:.4f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
