"""Monte Carlo harness: averaging regimes, heuristic comparisons and sweeps.

Two regimes separate the two sources of randomness.  Under *threshold
average* the topology is drawn once and node resources and thresholds are
redrawn every run.  Under *network average* node randomness is drawn once
and a fresh topology is generated every run.

Every random stream is derived from ``(master_seed, regime, run index,
purpose)`` with :class:`numpy.random.SeedSequence`, so a config plus its
master seed fixes every reported number, independent of worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .diffusion import run as run_diffusion
from .graph import (Graph, generate_preferential_attachment, generate_small_world,
                    generate_spatially_clustered, read_edge_list)
from .metrics import compute_metrics, full_seed_utilization, kl_divergence
from .model import Population, init_population, make_behaviors
from .seeding import HEURISTICS, allocate_counts, apply_seeds

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "AggregateResult",
    "Comparison",
    "GENERATED_TOPOLOGIES",
    "load_config",
    "dump_config",
    "build_topology",
    "seed_count",
    "run_experiment",
    "run_threshold_average",
    "run_network_average",
    "compare_heuristics",
    "target_distribution_experiment",
    "sweep_alpha",
    "write_sweep",
    "welch_test",
]

log = logging.getLogger(__name__)

GENERATED_TOPOLOGIES = ("pa", "sw", "sc")
REGIMES = ("threshold_average", "network_average")
# Pseudo-heuristic: every node starts on its own knapsack optimum.
FULL_SEEDING = "FULL"
GRQC_ENV = "RCDIFFUSION_GRQC"

_REGIME_TAG = {"threshold_average": 1, "network_average": 2}
_TOPOLOGY, _POPULATION, _RUN = 0, 1, 2


@dataclass(frozen=True)
class ExperimentConfig:
    topology: str = "pa"
    n: int = 500
    costs: tuple[float, ...] = (0.2, 0.5, 0.7)
    utilities: tuple[float, ...] | None = None
    w: float = 0.5
    alpha: float | None = 0.1
    b: int | None = None
    heuristic: str = "H7"
    distribution: str = "unif"
    target: tuple[float, ...] | None = None
    regime: str = "threshold_average"
    runs: int = 500
    master_seed: int = 0
    max_epochs: int = 1000
    drop_allowed: bool = False
    fix_resources: bool = False
    keep_isolated: bool = False
    p_rewire: float = 0.2
    avg_degree: float = 10.0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}")
        h = self.heuristic.upper()
        if h not in HEURISTICS and h != FULL_SEEDING:
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        object.__setattr__(self, "heuristic", h)
        object.__setattr__(self, "distribution", self.distribution.lower())
        if self.target is not None:
            t = np.asarray(self.target, dtype=np.float64)
            if t.size != len(self.costs) or np.any(t < 0) or t.sum() <= 0:
                raise ValueError("target must be a non-negative vector with one entry per behavior")
            object.__setattr__(self, "target", tuple(float(x) for x in t / t.sum()))
        if self.distribution == "target" and self.target is None:
            raise ValueError("distribution=target needs a target vector")
        if self.alpha is None and self.b is None:
            raise ValueError("set either alpha or b")
        if self.alpha is not None and not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")

    @property
    def behaviors(self):
        return make_behaviors(self.costs, self.utilities)

    def fingerprint(self) -> str:
        payload = {k: v for k, v in dataclasses.asdict(self).items() if k != "workers"}
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# --------------------------------------------------------------------------
# config files
# --------------------------------------------------------------------------

_ALIASES = {"seed": "master_seed", "drop-allowed": "drop_allowed",
            "fix-resources": "fix_resources", "keep-isolated": "keep_isolated",
            "max-epochs": "max_epochs"}


def _parse_value(name: str, raw: str):
    raw = raw.strip()
    ftype = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}[name]
    if raw.lower() in ("", "none") and "None" in ftype:
        return None
    if ftype.startswith("bool"):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: not a boolean: {raw!r}")
    if ftype.startswith("tuple"):
        parts = raw.replace(":", ",").split(",")
        return tuple(float(p) for p in parts if p.strip())
    if ftype.startswith("int"):
        return int(raw)
    if ftype.startswith("float"):
        return float(raw)
    return raw


def config_from_mapping(values: dict[str, str], base: ExperimentConfig | None = None) -> ExperimentConfig:
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    parsed = {}
    for key, raw in values.items():
        name = _ALIASES.get(key, key).replace("-", "_")
        if name not in known:
            raise ValueError(f"unknown config key {key!r}")
        parsed[name] = _parse_value(name, raw)
    return dataclasses.replace(base or ExperimentConfig(), **parsed)


def load_config(path: str | os.PathLike, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    values: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = line.split("=", 1)
            values[key.strip()] = val
    return config_from_mapping(values, base)


def dump_config(cfg: ExperimentConfig, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(f"# fingerprint {cfg.fingerprint()}\n")
        for f in dataclasses.fields(cfg):
            val = getattr(cfg, f.name)
            if val is None:
                text = "none"
            elif isinstance(val, tuple):
                text = ", ".join(repr(x) for x in val)
            else:
                text = str(val)
            fh.write(f"{f.name} = {text}\n")


# --------------------------------------------------------------------------
# random streams and topology
# --------------------------------------------------------------------------


def _rng(cfg: ExperimentConfig, purpose: int, run_index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence([cfg.master_seed, _REGIME_TAG[cfg.regime], purpose, run_index])
    return np.random.default_rng(ss)


@lru_cache(maxsize=8)
def _load_file_graph(path: str, keep_isolated: bool) -> Graph:
    return read_edge_list(path, keep_isolated=keep_isolated)


def resolve_topology_path(topology: str) -> str:
    """Map ``coll`` to the ca-GrQc file; other non-generator names are paths."""
    if topology.lower() == "coll":
        path = os.environ.get(GRQC_ENV, "data/ca-GrQc.txt")
        if not os.path.exists(path):
            raise FileNotFoundError(
                f"ca-GrQc edge list not found at {path!r}; set {GRQC_ENV} to its location")
        return path
    if not os.path.exists(topology):
        raise FileNotFoundError(f"topology file {topology!r} not found")
    return topology


def build_topology(cfg: ExperimentConfig, rng: np.random.Generator) -> Graph:
    kind = cfg.topology.lower()
    if kind == "pa":
        return generate_preferential_attachment(cfg.n, rng)
    if kind == "sw":
        return generate_small_world(cfg.n, cfg.p_rewire, rng)
    if kind == "sc":
        return generate_spatially_clustered(cfg.n, cfg.avg_degree, rng)
    return _load_file_graph(resolve_topology_path(cfg.topology), cfg.keep_isolated)


def seed_count(cfg: ExperimentConfig, n: int) -> int:
    """Seed budget: ``b`` if given, else ``round(alpha * n)``.

    For the uniform split the count moves to the nearest multiple of the
    behavior count (ties upward), so every behavior gets the same share.
    """
    if cfg.b is not None:
        return cfg.b
    k = len(cfg.costs)
    b = int(round(cfg.alpha * n))
    if cfg.distribution == "unif":
        b = int(np.floor(b / k + 0.5)) * k
    return max(b, 1)


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    run_id: int
    participation: int
    adoption: int
    utilization: float
    counts: tuple[int, ...]
    epochs: int
    converged: bool
    kl: float | None = None
    partial_seeds: bool = False
    seeds: int = 0


_METRICS = ("participation", "adoption", "utilization")


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if x.size == 0:
        return float("nan"), float("nan")
    se = float(x.std(ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0
    return float(x.mean()), se


@dataclass
class AggregateResult:
    config: ExperimentConfig
    runs: list[RunRecord]
    mean: dict[str, float] = field(init=False)
    stderr: dict[str, float] = field(init=False)
    distribution_mean: tuple[float, ...] = field(init=False)

    def __post_init__(self) -> None:
        self.mean, self.stderr = {}, {}
        for m in _METRICS:
            self.mean[m], self.stderr[m] = _mean_se(self.samples(m))
        kl = [r.kl for r in self.runs if r.kl is not None]
        if kl:
            self.mean["kl"], self.stderr["kl"] = _mean_se(np.array(kl))
        counts = np.array([r.counts for r in self.runs], dtype=np.float64)
        totals = counts.sum(axis=1, keepdims=True)
        dist = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
        self.distribution_mean = tuple(float(x) for x in dist.mean(axis=0))

    @property
    def run_count(self) -> int:
        return len(self.runs)

    @property
    def fingerprint(self) -> str:
        return self.config.fingerprint()

    @property
    def converged_fraction(self) -> float:
        return float(np.mean([r.converged for r in self.runs]))

    def kl_of_mean_distribution(self) -> float | None:
        """KL from the target to the run-averaged behavior distribution."""
        if self.config.target is None or sum(self.distribution_mean) == 0:
            return None
        return kl_divergence(self.config.target, self.distribution_mean)

    def samples(self, metric: str) -> np.ndarray:
        return np.array([getattr(r, metric) for r in self.runs], dtype=np.float64)

    def summary(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "run_count": self.run_count,
            "mean": self.mean,
            "stderr": self.stderr,
            "distribution_mean": list(self.distribution_mean),
            "converged_fraction": self.converged_fraction,
            "partial_seed_runs": int(sum(r.partial_seeds for r in self.runs)),
            "kl_of_mean_distribution": self.kl_of_mean_distribution(),
            "config": dataclasses.asdict(self.config),
        }

    def write(self, out_dir: str | os.PathLike) -> Path:
        """Write ``runs.csv``, ``aggregate.json`` and ``effective.cfg``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        k = len(self.config.costs)
        with open(out / "runs.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["run_id", "participation", "adoption", "utilization",
                        *[f"count_{i}" for i in range(k)], "epochs", "converged",
                        "seeds", "kl"])
            for r in self.runs:
                w.writerow([r.run_id, r.participation, r.adoption, repr(r.utilization),
                            *r.counts, r.epochs, int(r.converged), r.seeds,
                            "" if r.kl is None else repr(r.kl)])
        with open(out / "aggregate.json", "w") as fh:
            json.dump(self.summary(), fh, indent=2)
        dump_config(self.config, out / "effective.cfg")
        return out


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------


def simulate_once(g: Graph, pop: Population, cfg: ExperimentConfig,
                  rng: np.random.Generator, run_id: int = 0) -> RunRecord:
    """Select seeds, apply them, diffuse, and measure a single run."""
    if cfg.heuristic == FULL_SEEDING:
        # everyone starts on its knapsack optimum; swaps let nodes align
        _, outcome = full_seed_utilization(g, pop, cfg.max_epochs, drop_allowed=True)
        seeded, partial, seeds = pop, False, g.node_count
    else:
        budget = allocate_counts(seed_count(cfg, g.node_count), pop.behaviors,
                                 cfg.distribution, cfg.target)
        assignment = HEURISTICS[cfg.heuristic](g, pop, budget, rng)
        seeded = apply_seeds(pop, assignment)
        partial = assignment.partial
        seeds = len(assignment.seed_nodes)
        outcome = run_diffusion(g, seeded, max_epochs=cfg.max_epochs,
                                drop_allowed=cfg.drop_allowed)
    m = compute_metrics(seeded, outcome)
    kl = None
    if cfg.target is not None and m.adoption > 0:
        kl = kl_divergence(cfg.target, m.behavior_distribution)
    elif cfg.target is not None:
        # nothing adopted: smoothing turns the empty distribution into a uniform one
        kl = kl_divergence(cfg.target, np.full(len(cfg.target), 1.0 / len(cfg.target)))
    return RunRecord(run_id, m.participation, m.adoption, m.utilization,
                     m.per_behavior_counts, outcome.epochs_run, outcome.converged,
                     kl, partial, seeds)


def _run_index(cfg: ExperimentConfig, i: int, fixed_graph: Graph | None,
               fixed_pop: Population | None, fixed_resource: np.ndarray | None) -> RunRecord:
    rng = _rng(cfg, _RUN, i)
    g = fixed_graph if fixed_graph is not None else build_topology(cfg, rng)
    if fixed_pop is not None:
        pop = fixed_pop.copy()
    else:
        pop = init_population(g, cfg.behaviors, cfg.w, rng)
        if fixed_resource is not None:
            pop.resource = fixed_resource.copy()
    return simulate_once(g, pop, cfg, rng, run_id=i)


def _run_chunk(args) -> list[RunRecord]:
    cfg, indices, graph, pop, resource = args
    return [_run_index(cfg, i, graph, pop, resource) for i in indices]


def _execute(cfg: ExperimentConfig, graph: Graph | None, pop: Population | None,
             resource: np.ndarray | None) -> list[RunRecord]:
    if cfg.workers <= 1:
        return _run_chunk((cfg, range(cfg.runs), graph, pop, resource))
    chunks = np.array_split(np.arange(cfg.runs), cfg.workers * 4)
    jobs = [(cfg, c.tolist(), graph, pop, resource) for c in chunks if c.size]
    with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
        parts = list(ex.map(_run_chunk, jobs))
    # map preserves job order, so the fold is ordered by run index
    return [r for part in parts for r in part]


def run_threshold_average(cfg: ExperimentConfig) -> AggregateResult:
    """Fixed topology; resources and thresholds redrawn every run."""
    cfg = dataclasses.replace(cfg, regime="threshold_average")
    graph = build_topology(cfg, _rng(cfg, _TOPOLOGY))
    resource = None
    if cfg.fix_resources:
        resource = _rng(cfg, _POPULATION).random(graph.node_count)
    return AggregateResult(cfg, _execute(cfg, graph, None, resource))


def run_network_average(cfg: ExperimentConfig) -> AggregateResult:
    """Node resources and thresholds fixed; topology regenerated every run."""
    if cfg.topology.lower() not in GENERATED_TOPOLOGIES:
        raise ValueError("network average needs a generated topology; "
                         f"{cfg.topology!r} is fixed")
    cfg = dataclasses.replace(cfg, regime="network_average")
    # all generated graphs share n, so node randomness maps by node index
    shell = Graph.from_edges(cfg.n, [])
    pop = init_population(shell, cfg.behaviors, cfg.w, _rng(cfg, _POPULATION))
    return AggregateResult(cfg, _execute(cfg, None, pop, None))


def run_experiment(cfg: ExperimentConfig) -> AggregateResult:
    if cfg.regime == "network_average":
        return run_network_average(cfg)
    return run_threshold_average(cfg)


# --------------------------------------------------------------------------
# comparisons and sweeps
# --------------------------------------------------------------------------


def welch_test(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Unequal-variance two-sample t statistic and two-sided p-value."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 runs")
    if np.array_equal(np.sort(a), np.sort(b)) or (a.var() == 0 and b.var() == 0
                                                  and a.mean() == b.mean()):
        return 0.0, 1.0
    res = stats.ttest_ind(a, b, equal_var=False)
    return float(res.statistic), float(res.pvalue)


@dataclass
class Comparison:
    results: dict[str, AggregateResult]
    rows: list[dict]

    def write(self, out_dir: str | os.PathLike) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "comparison.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(self.rows[0]))
            w.writeheader()
            w.writerows(self.rows)
        with open(out / "comparison.json", "w") as fh:
            json.dump({"pairs": self.rows,
                       "heuristics": {h: r.summary() for h, r in self.results.items()}},
                      fh, indent=2)
        first = next(iter(self.results.values()))
        dump_config(first.config, out / "effective.cfg")
        return out


def compare_heuristics(cfg: ExperimentConfig, heuristics: Sequence[str],
                       metric: str = "utilization") -> Comparison:
    """Run each heuristic on the same random streams and test every pair.

    Runs share ``master_seed``, so run ``i`` of every heuristic sees the same
    topology and node draws.
    """
    if len(heuristics) < 2:
        raise ValueError("need at least two heuristics to compare")
    if cfg.runs < 2:
        raise ValueError("comparison needs runs >= 2")
    results = {h: run_experiment(dataclasses.replace(cfg, heuristic=h)) for h in heuristics}
    rows = []
    names = list(results)
    for x in range(len(names)):
        for y in range(x + 1, len(names)):
            a, b = results[names[x]].samples(metric), results[names[y]].samples(metric)
            t, p = welch_test(a, b)
            rows.append({"a": names[x], "b": names[y], "metric": metric,
                         "mean_a": float(a.mean()), "mean_b": float(b.mean()),
                         "difference": float(a.mean() - b.mean()), "t": t, "p": p})
    return Comparison(results, rows)


def target_distribution_experiment(cfg: ExperimentConfig,
                                   q: Sequence[float]) -> AggregateResult:
    """Seed behaviors in the target ratio with H7 and measure KL to target."""
    cfg = dataclasses.replace(cfg, heuristic="H7", distribution="target",
                              target=tuple(float(x) for x in q))
    return run_experiment(cfg)


def sweep_alpha(cfg: ExperimentConfig, alphas: Iterable[float],
                heuristics: Sequence[str] | None = None
                ) -> dict[tuple[float, str], AggregateResult]:
    heuristics = list(heuristics) if heuristics else [cfg.heuristic]
    out = {}
    for a in alphas:
        if not 0 < a <= 1:
            raise ValueError(f"alpha {a} outside (0, 1]")
        for h in heuristics:
            out[(a, h)] = run_experiment(dataclasses.replace(cfg, alpha=a, b=None, heuristic=h))
    return out


def write_sweep(results: dict[tuple[float, str], AggregateResult],
                out_dir: str | os.PathLike) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "heuristic", "seeds", "runs",
                    "utilization", "utilization_se", "participation",
                    "participation_se", "adoption", "adoption_se"])
        for (a, h), res in results.items():
            seeds = int(np.median([r.seeds for r in res.runs]))
            w.writerow([a, h, seeds, res.run_count,
                        res.mean["utilization"], res.stderr["utilization"],
                        res.mean["participation"], res.stderr["participation"],
                        res.mean["adoption"], res.stderr["adoption"]])
    first = next(iter(results.values()))
    dump_config(first.config, out / "effective.cfg")
    return out
