"""Command-line driver.

Subcommands::

    generate    write a synthetic topology as an edge list
    seeds       select seeds for one population and write them as CSV
    simulate    one seeded diffusion run, printing its metrics
    experiment  a Monte Carlo experiment from a config file and/or flags
    compare     several heuristics on shared random streams, with Welch tests
    sweep       one experiment per seed fraction alpha and heuristic

Every command that writes results also writes ``effective.cfg`` describing
the exact configuration used; passing it back via ``--config`` reproduces
the outputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import diffusion, experiment, graph, metrics, seeding
from .experiment import ExperimentConfig, dump_config, load_config
from .model import init_population

log = logging.getLogger("rcdiffusion")


def _preset_path(name: str) -> Path:
    """Resolve ``--config`` values; bare preset names map to shipped files."""
    p = Path(name)
    if p.exists():
        return p
    shipped = resources.files("rcdiffusion") / "presets" / (name if name.endswith(".cfg") else name + ".cfg")
    if shipped.is_file():
        return Path(str(shipped))
    raise FileNotFoundError(f"config {name!r} not found")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file or shipped preset name")
    p.add_argument("--topology", help="pa, sw, sc, coll, or an edge-list path")
    p.add_argument("--n", type=int)
    p.add_argument("--costs", help="comma-separated behavior costs")
    p.add_argument("--utilities", help="comma-separated behavior utilities")
    p.add_argument("--w", type=float, help="weight of intrinsic utility in the payoff")
    p.add_argument("--alpha", type=float)
    p.add_argument("--b", type=int)
    p.add_argument("--heuristic")
    p.add_argument("--distribution", choices=seeding.DISTRIBUTIONS)
    p.add_argument("--target", help="target ratio such as 3:2:1")
    p.add_argument("--regime", choices=experiment.REGIMES)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int, dest="master_seed")
    p.add_argument("--max-epochs", type=int, dest="max_epochs")
    p.add_argument("--drop-allowed", action="store_const", const="true", dest="drop_allowed")
    p.add_argument("--fix-resources", action="store_const", const="true", dest="fix_resources")
    p.add_argument("--keep-isolated", action="store_const", const="true", dest="keep_isolated")
    p.add_argument("--workers", type=int)


_CONFIG_KEYS = ("topology", "n", "costs", "utilities", "w", "alpha", "b", "heuristic",
                "distribution", "target", "regime", "runs", "master_seed", "max_epochs",
                "drop_allowed", "fix_resources", "keep_isolated", "workers")


def _config(args: argparse.Namespace) -> ExperimentConfig:
    base = load_config(_preset_path(args.config)) if args.config else ExperimentConfig()
    overrides = {k: str(getattr(args, k)) for k in _CONFIG_KEYS
                 if getattr(args, k, None) is not None}
    if "b" in overrides and "alpha" not in overrides:
        overrides["alpha"] = "none"
    if "target" in overrides and "distribution" not in overrides:
        overrides["distribution"] = "target"
    return experiment.config_from_mapping(overrides, base)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcdiffusion",
        description="Multi-behavior diffusion on resource-constrained networks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("generate", help="write a synthetic topology")
    p.add_argument("--topology", required=True, choices=experiment.GENERATED_TOPOLOGIES)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-rewire", type=float, default=0.2)
    p.add_argument("--avg-degree", type=float, default=10.0)
    p.add_argument("-o", "--out", required=True, help="edge-list file to write")

    for name, text in (("seeds", "select seeds and write them as CSV"),
                       ("simulate", "run one seeded diffusion"),
                       ("experiment", "run a Monte Carlo experiment")):
        p = sub.add_parser(name, help=text)
        _add_config_flags(p)
        p.add_argument("-o", "--out", required=True, help="output directory")
        if name == "simulate":
            p.add_argument("--trace", action="store_true", help="also write trace.csv")

    p = sub.add_parser("compare", help="compare heuristics with Welch tests")
    _add_config_flags(p)
    p.add_argument("--heuristics", default="H1,H2,H3,H4,H5,H6,H7")
    p.add_argument("--metric", default="utilization",
                   choices=("utilization", "participation", "adoption"))
    p.add_argument("-o", "--out", required=True)

    p = sub.add_parser("sweep", help="one experiment per alpha and heuristic")
    _add_config_flags(p)
    p.add_argument("--alphas", default="0.02,0.04,0.06,0.08,0.1,0.12,0.14,0.16,0.18,0.2")
    p.add_argument("--heuristics", default="H1,H4,H5,H7")
    p.add_argument("-o", "--out", required=True)
    return parser


def _single_run_inputs(cfg: ExperimentConfig):
    # Same streams as run 0 of a threshold-average experiment.
    cfg = dataclasses.replace(cfg, regime="threshold_average")
    g = experiment.build_topology(cfg, experiment._rng(cfg, experiment._TOPOLOGY))
    rng = experiment._rng(cfg, experiment._RUN, 0)
    pop = init_population(g, cfg.behaviors, cfg.w, rng)
    return cfg, g, pop, rng


def _cmd_generate(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.topology == "pa":
        g = graph.generate_preferential_attachment(args.n, rng)
    elif args.topology == "sw":
        g = graph.generate_small_world(args.n, args.p_rewire, rng)
    else:
        g = graph.generate_spatially_clustered(args.n, args.avg_degree, rng)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    comment = f"topology={args.topology} n={args.n} seed={args.seed}"
    graph.write_edge_list(g, out, comment=comment)
    with open(out.with_name(out.name + ".cfg"), "w") as fh:
        fh.write(f"topology = {args.topology}\nn = {args.n}\nseed = {args.seed}\n"
                 f"p_rewire = {args.p_rewire}\navg_degree = {args.avg_degree}\n")
    print(f"wrote {g.node_count} nodes, {g.edge_count} edges to {out}")
    return 0


def _cmd_seeds(args) -> int:
    cfg, g, pop, rng = _single_run_inputs(_config(args))
    budget = seeding.allocate_counts(experiment.seed_count(cfg, g.node_count),
                                     pop.behaviors, cfg.distribution, cfg.target)
    assignment = seeding.HEURISTICS[cfg.heuristic](g, pop, budget, rng)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seeding.write_assignment(assignment, out / "seeds.csv")
    dump_config(cfg, out / "effective.cfg")
    print(f"{len(assignment.seed_nodes)} seed nodes, per behavior {assignment.counts()}")
    return 0


def _cmd_simulate(args) -> int:
    cfg, g, pop, rng = _single_run_inputs(_config(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.heuristic == experiment.FULL_SEEDING:
        pop = pop.copy()
        pop.adopted = metrics.knapsack_choice(pop)
        seeded, drop = pop, True
    else:
        budget = seeding.allocate_counts(experiment.seed_count(cfg, g.node_count),
                                         pop.behaviors, cfg.distribution, cfg.target)
        assignment = seeding.HEURISTICS[cfg.heuristic](g, pop, budget, rng)
        seeding.write_assignment(assignment, out / "seeds.csv")
        seeded, drop = seeding.apply_seeds(pop, assignment), cfg.drop_allowed
    outcome = diffusion.run(g, seeded, max_epochs=cfg.max_epochs,
                            drop_allowed=drop, trace=args.trace)
    report = metrics.compute_metrics(seeded, outcome)
    result = {**report.as_dict(), "epochs": outcome.epochs_run,
              "converged": outcome.converged}
    if cfg.target is not None:
        result["kl"] = metrics.kl_divergence(cfg.target, report.behavior_distribution) \
            if report.adoption else None
    if args.trace:
        diffusion.write_trace(outcome, out / "trace.csv")
    with open(out / "metrics.json", "w") as fh:
        json.dump(result, fh, indent=2)
    dump_config(cfg, out / "effective.cfg")
    print(json.dumps(result))
    return 0


def _cmd_experiment(args) -> int:
    cfg = _config(args)
    res = experiment.run_experiment(cfg)
    res.write(args.out)
    print(json.dumps({"fingerprint": res.fingerprint, "mean": res.mean,
                      "stderr": res.stderr}))
    return 0


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _cmd_compare(args) -> int:
    cfg = _config(args)
    comp = experiment.compare_heuristics(cfg, [h.upper() for h in _split(args.heuristics)],
                                         metric=args.metric)
    comp.write(args.out)
    for row in comp.rows:
        print(f"{row['a']} vs {row['b']}: diff={row['difference']:+.4f} p={row['p']:.3g}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config(args)
    alphas = [float(a) for a in _split(args.alphas)]
    res = experiment.sweep_alpha(cfg, alphas, [h.upper() for h in _split(args.heuristics)])
    experiment.write_sweep(res, args.out)
    for (a, h), r in res.items():
        print(f"alpha={a:<5} {h}: utilization={r.mean['utilization']:.4f}")
    return 0


_COMMANDS = {"generate": _cmd_generate, "seeds": _cmd_seeds, "simulate": _cmd_simulate,
             "experiment": _cmd_experiment, "compare": _cmd_compare, "sweep": _cmd_sweep}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"rcdiffusion: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
