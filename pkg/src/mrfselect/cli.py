"""Command-line interface: ``mrf-select <command> [options]``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 computation error.
Failures print a one-line JSON error object on stderr (and write
``error.json`` into ``--out-dir`` when one was given).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import ComputationError, DataError
from .experiments import MODES, consistency_sweep, estimate_report, run_search
from .io import export_csv, graph_to_dot, import_model, ingest_csv, write_json
from .simulate import KINDS, MixingChainConfig, envelope_check, generate_chain, mixing_diagnostic
from .truth import joint_from_potentials

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_COMPUTE = 0, 2, 3, 4


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mrf-select", description="Graph selection for discrete Markov random fields.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out-dir", type=Path, default=Path("."))
        sp.add_argument("--seed", type=int, default=0)

    est = sub.add_parser("estimate", help="estimate the graph from a CSV sample")
    common(est)
    est.add_argument("--input", type=Path, required=True)
    est.add_argument("--has-header", action="store_true")
    est.add_argument("--alphabet-size", type=int)
    est.add_argument("--c", type=float, default=1.0)
    est.add_argument("--mode", choices=MODES, default="exhaustive")

    sim = sub.add_parser("simulate", help="simulate a sample from a model file")
    common(sim)
    sim.add_argument("--model", type=Path, required=True)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--kind", choices=KINDS, default="iid")
    sim.add_argument("--rho", type=float, default=0.0)
    sim.add_argument("--burn-in", type=int, default=0)
    sim.add_argument("--has-header", action="store_true")

    sw = sub.add_parser("consistency-sweep", help="recovery rates of the estimator over an n grid")
    common(sw)
    sw.add_argument("--model", type=Path, required=True)
    sw.add_argument("--n-grid", type=_int_list, default=[1024, 4096, 16384])
    sw.add_argument("--replications", type=int, default=100)
    sw.add_argument("--c", type=float, default=1.0)
    sw.add_argument("--mode", choices=MODES, default="exhaustive")
    sw.add_argument("--rho", type=float, default=0.5)

    env = sub.add_parser("envelope", help="check the empirical-probability convergence envelope")
    common(env)
    env.add_argument("--model", type=Path, required=True)
    env.add_argument("--n-grid", type=_int_list, default=[1024, 4096, 16384, 65536])
    env.add_argument("--replications", type=int, default=100)
    env.add_argument("--delta", type=float, default=1.0)
    env.add_argument("--kind", choices=KINDS, default="lazy_refresh")
    env.add_argument("--rho", type=float, default=0.5)

    dg = sub.add_parser("diagnose", help="per-lag dependence diagnostic of a CSV sample")
    common(dg)
    dg.add_argument("--input", type=Path, required=True)
    dg.add_argument("--has-header", action="store_true")
    dg.add_argument("--alphabet-size", type=int)
    dg.add_argument("--max-lag", type=int, default=20)
    return p


def _validate(args, parser) -> None:
    def positive(name):
        val = getattr(args, name, None)
        if val is not None and not val > 0:
            parser.error(f"--{name.replace('_', '-')} must be positive")

    for name in ("n", "replications", "delta", "max_lag", "alphabet_size"):
        positive(name)
    if getattr(args, "c", None) is not None and not args.c > 0:
        parser.error("--c must be positive")
    if getattr(args, "n_grid", None) is not None and min(args.n_grid) < 2:
        parser.error("--n-grid values must be >= 2")
    if getattr(args, "rho", None) is not None and not 0 <= args.rho < 1:
        parser.error("--rho must lie in [0, 1)")
    if getattr(args, "alphabet_size", None) is not None and args.alphabet_size < 2:
        parser.error("--alphabet-size must be >= 2")
    if getattr(args, "burn_in", None) is not None and args.burn_in < 0:
        parser.error("--burn-in must be nonnegative")


def _echo(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def cmd_estimate(args) -> None:
    sample = ingest_csv(args.input, has_header=args.has_header, alphabet_size=args.alphabet_size)
    res, scorer, meta = run_search(sample, args.c, args.mode, seed=args.seed, workers=None)
    report = estimate_report(sample, res, scorer, meta, _echo(args))
    write_json(report, args.out_dir / "report.json")
    (args.out_dir / "graph.dot").write_text(graph_to_dot(res.best_graph))


def cmd_simulate(args) -> None:
    model = joint_from_potentials(import_model(args.model))
    cfg = MixingChainConfig(args.kind, args.rho, args.seed, args.burn_in)
    sample = generate_chain(model, cfg, args.n)
    export_csv(sample, args.out_dir / "sample.csv", header=args.has_header)
    write_json({"config": _echo(args), "n": sample.n, "d": sample.dims.d}, args.out_dir / "simulate.json")


def cmd_sweep(args) -> None:
    spec = import_model(args.model)
    report = consistency_sweep(
        spec, args.n_grid, args.replications, seed=args.seed, c=args.c, mode=args.mode, rho=args.rho
    )
    payload = report.to_dict()
    payload["config"]["model"] = str(args.model)
    write_json(payload, args.out_dir / "sweep.json")
    (args.out_dir / "sweep.csv").write_text(report.to_csv())


def cmd_envelope(args) -> None:
    model = joint_from_potentials(import_model(args.model))
    cfg = MixingChainConfig(args.kind, args.rho if args.kind == "lazy_refresh" else 0.0, args.seed)
    seeds = [args.seed + r for r in range(args.replications)]
    report = envelope_check(model, cfg, args.delta, args.n_grid, seeds)
    payload = report.to_dict()
    payload["config"] = _echo(args)
    write_json(payload, args.out_dir / "envelope.json")


def cmd_diagnose(args) -> None:
    sample = ingest_csv(args.input, has_header=args.has_header, alphabet_size=args.alphabet_size)
    diag = mixing_diagnostic(sample, args.max_lag)
    payload = diag.to_dict()
    payload["config"] = _echo(args)
    write_json(payload, args.out_dir / "diagnose.json")


COMMANDS = {
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "consistency-sweep": cmd_sweep,
    "envelope": cmd_envelope,
    "diagnose": cmd_diagnose,
}


def _fail(exc: BaseException, code: int, out_dir: Path | None) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    if out_dir is not None and out_dir.is_dir():
        write_json(err, out_dir / "error.json")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(args, parser)
    out_dir = args.out_dir
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args)
    except (DataError, FileNotFoundError, IsADirectoryError) as exc:
        return _fail(exc, EXIT_DATA, out_dir)
    except ComputationError as exc:
        return _fail(exc, EXIT_COMPUTE, out_dir)
    except ValueError as exc:
        return _fail(exc, EXIT_USAGE, out_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
