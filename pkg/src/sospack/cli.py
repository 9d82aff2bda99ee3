"""Command-line entry point: ``sospack <subcommand> ...``.

Exit status is 0 on success, 2 for configuration errors and 3 when an oracle
exceeds its search budget.
"""

from __future__ import annotations

import argparse
import json
import sys

from .distribution import DistributionError, load_distribution, load_family
from .harness import ConfigError, ExperimentConfig, InsufficientData, emit, fit_records, parse_checkpoints, run_experiment
from .oracle import SizeLimitExceeded, cone_membership, exact_opt, perfect_configs
from .packers import PolicyError
from .wastelp import build_waste_lp, classification_json, classify, ideal_packing_template, solve_lp

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _experiment_args(p: argparse.ArgumentParser, alg_default: str | None = "ss") -> None:
    p.add_argument("--alg", default=alg_default, help="packer id, e.g. ss, ss_prime, srs:3, ssf")
    p.add_argument("-n", type=int, required=True, help="number of items per trial")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--checkpoints", default=None, help="geom, geom:K or a comma list (default geom)")
    p.add_argument("--jobs", type=int, default=1, help="trials run concurrently")
    p.add_argument("--timing", action="store_true", help="fill the elapsed_ms column")
    p.add_argument("--backend", choices=("cython", "python"), default=None)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _config(args, alg: str, dist=None, family=None, adversary=None) -> ExperimentConfig:
    if args.n < 1:
        raise ConfigError("n must be at least 1")
    return ExperimentConfig(
        alg=alg,
        n=args.n,
        dist=dist,
        family=family,
        adversary=adversary,
        checkpoints=parse_checkpoints(args.checkpoints, args.n),
        trials=args.trials,
        seed=args.seed,
        jobs=args.jobs,
        timing=args.timing,
        backend=args.backend,
    )


def cmd_classify(args) -> int:
    F = load_distribution(args.dist)
    cls = classify(F, all_interior=args.interior)
    if args.emit_template:
        tpl = ideal_packing_template(solve_lp(build_waste_lp(F.restricted_to_support())))
        with open(args.emit_template, "w") as fh:
            fh.write(_dump(tpl.to_json()))
    _write(_dump(classification_json(F, cls)), args.out)
    return EXIT_OK


def cmd_pack(args) -> int:
    cfg = _config(args, args.alg, dist=load_distribution(args.dist))
    _write(emit(run_experiment(cfg), args.format), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    """Every (alg, dist) pair; one table, plus a growth-fit summary on stderr."""
    algs = [a for a in args.alg.split(",") if a]
    dists = [load_distribution(p) for p in args.dist]
    records = []
    for d in dists:
        for a in algs:
            recs = run_experiment(_config(args, a, dist=d))
            records.extend(recs)
            try:
                fit = fit_records(recs)
                print(f"{a}\t{d.label}\t{fit.cls}\talpha={fit.alpha:.3f}", file=sys.stderr)
            except InsufficientData as exc:
                print(f"{a}\t{d.label}\tno fit: {exc}", file=sys.stderr)
    _write(emit(records, args.format), args.out)
    return EXIT_OK


def cmd_adversary(args) -> int:
    fam = load_family(args.family)
    cfg = _config(args, args.alg, family=fam, adversary=args.policy)
    _write(emit(run_experiment(cfg), args.format), args.out)
    return EXIT_OK


def cmd_opt(args) -> int:
    try:
        items = [int(x) for x in args.items.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad item list {args.items!r}") from None
    if args.bin < 1:
        raise ConfigError("bin size must be positive")
    print(exact_opt(items, args.bin, node_budget=args.budget))
    return EXIT_OK


def cmd_configs(args) -> int:
    F = load_distribution(args.dist)
    configs = perfect_configs(F.bin_size, F.sizes, limit=args.limit)
    out = {
        "bin_size": F.bin_size,
        "sizes": list(F.sizes),
        "configs": [list(b) for b in configs],
        "in_cone": cone_membership(F.probs, configs),
    }
    _write(_dump(out), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sospack", description="Sum-of-squares bin packing experiments.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("classify", help="solve the waste LP and classify a distribution")
    p.add_argument("--dist", required=True)
    p.add_argument("--interior", action="store_true", help="compute c_i for every size")
    p.add_argument("--emit-template", default=None, metavar="FILE", help="write an ideal packing template")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("pack", help="run one packer on one distribution")
    p.add_argument("--dist", required=True)
    _experiment_args(p)
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("sweep", help="run several packers over several distributions")
    p.add_argument("--dist", required=True, nargs="+")
    _experiment_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("adversary", help="pack a stream chosen adversarially from a family")
    p.add_argument("--family", required=True)
    p.add_argument("--policy", default="greedy_ss_increase")
    _experiment_args(p)
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("opt", help="exact optimum for a small list")
    p.add_argument("--items", required=True, help="comma-separated sizes")
    p.add_argument("--bin", type=int, required=True)
    p.add_argument("--budget", type=int, default=2_000_000, help="search-node budget")
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("configs", help="perfect packing configurations and cone membership")
    p.add_argument("--dist", required=True)
    p.add_argument("--limit", type=int, default=1_000_000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_configs)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except SizeLimitExceeded as exc:
        print(f"sospack: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, DistributionError, PolicyError, InsufficientData, OSError, ValueError) as exc:
        print(f"sospack: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
