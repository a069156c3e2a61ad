"""Generational multi-tree GP loop for one source feature."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .dataset import ConditioningConfig, condition_source, validate_source
from .fitness import FitnessConfig, FitnessEvaluator, FitnessRecord, fitness_key
from .gp import GpTree, Individual, parse_sexpr, random_tree, to_sexpr
from .mi import baseline_psi

__all__ = [
    "EvolutionConfig",
    "RunResult",
    "initialize",
    "crossover",
    "mutate",
    "tournament",
    "rank_population",
    "run",
]


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 1024
    generations: int = 50
    crossover_rate: float = 0.6
    mutation_rate: float = 0.4
    elitism_count: int = 10
    max_depth: int = 15
    tournament_size: int = 7
    init_depths: tuple = (2, 6)
    mutation_depth: int = 4
    seed: int = 0
    # Fitness on a uniform subsample of this many instances (None: all).
    mi_subsample: int | None = None
    fitness: FitnessConfig = field(default_factory=FitnessConfig)
    conditioning: ConditioningConfig = field(default_factory=ConditioningConfig)

    def __post_init__(self):
        if not math.isclose(self.crossover_rate + self.mutation_rate, 1.0, abs_tol=1e-9):
            raise ValueError("crossover_rate + mutation_rate must equal 1")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be in [0, population_size)")
        if self.tournament_size < 1 or self.max_depth < 1:
            raise ValueError("tournament_size and max_depth must be >= 1")
        lo, hi = self.init_depths
        if not 1 <= lo <= hi <= self.max_depth:
            raise ValueError("init_depths must satisfy 1 <= lo <= hi <= max_depth")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["init_depths"] = list(self.init_depths)
        return d


@dataclass
class RunResult:
    best: Individual
    fitness_history: list
    config: EvolutionConfig
    psi: float
    elapsed: float = 0.0
    source: str | None = None

    def to_dict(self, with_timing: bool = True) -> dict:
        best = self.best.fitness
        d = {
            "source": self.source,
            "trees": [to_sexpr(t) for t in self.best.trees],
            "fitness": best.to_dict() if best is not None else None,
            "fitness_history": [None if math.isinf(v) else v for v in self.fitness_history],
            "psi": self.psi,
            "config": self.config.to_dict(),
        }
        if with_timing:
            d["elapsed"] = self.elapsed
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunResult":
        from .mi import EstimatorConfig

        cfg = dict(d["config"])
        fit = dict(cfg.pop("fitness"))
        fit["estimator"] = EstimatorConfig(**fit["estimator"])
        cfg["fitness"] = FitnessConfig(**fit)
        cfg["conditioning"] = ConditioningConfig(**cfg["conditioning"])
        cfg["init_depths"] = tuple(cfg["init_depths"])
        ind = Individual(tuple(parse_sexpr(s) for s in d["trees"]))
        ind.fitness = FitnessRecord.from_dict(d["fitness"]) if d["fitness"] else None
        ind.evaluated = True
        history = [-math.inf if v is None else v for v in d["fitness_history"]]
        return cls(ind, history, EvolutionConfig(**cfg), d["psi"], d.get("elapsed", 0.0),
                   d.get("source"))


def initialize(cfg: EvolutionConfig, rng: np.random.Generator) -> list:
    """Ramped half-and-half: depths cycle over ``init_depths``, methods alternate."""
    lo, hi = cfg.init_depths
    depths = list(range(lo, hi + 1))
    n = cfg.fitness.n_trees
    pop = []
    for i in range(cfg.population_size):
        trees = []
        for t in range(n):
            slot = i * n + t
            depth = depths[slot % len(depths)]
            method = "full" if (slot // len(depths)) % 2 == 0 else "grow"
            trees.append(random_tree(depth, method, rng))
        pop.append(Individual(tuple(trees)))
    return pop


def crossover(a: Individual, b: Individual, rng: np.random.Generator,
              max_depth: int = 15, index: int | None = None,
              points: tuple | None = None) -> tuple:
    """Subtree crossover at one tree index shared by both parents.

    ``index`` and ``points`` (node positions in the two trees) are drawn
    uniformly unless given.  An offspring tree deeper than ``max_depth`` is
    replaced by the parent tree it came from.
    """
    if len(a.trees) != len(b.trees):
        raise ValueError("parents have different numbers of trees")
    idx = int(rng.integers(len(a.trees))) if index is None else index
    ta, tb = a.trees[idx], b.trees[idx]
    if points is None:
        i = int(rng.integers(ta.size))
        j = int(rng.integers(tb.size))
    else:
        i, j = points
    ia, ja = ta.subtree_end(i), tb.subtree_end(j)
    ca = GpTree._unchecked(ta.program[:i] + tb.program[j:ja] + ta.program[ia:])
    cb = GpTree._unchecked(tb.program[:j] + ta.program[i:ia] + tb.program[ja:])
    if ca.depth > max_depth:
        ca = ta
    if cb.depth > max_depth:
        cb = tb
    return a.with_tree(idx, ca), b.with_tree(idx, cb)


def mutate(a: Individual, rng: np.random.Generator, max_depth: int = 15,
           subtree_depth: int = 4, attempts: int = 8, index: int | None = None,
           point: int | None = None) -> Individual:
    """Replace a random subtree of one random tree by a fresh grow tree.

    Draws are repeated (up to ``attempts``) while the result equals the
    parent tree or exceeds ``max_depth``; if all fail the parent tree is
    kept.  ``index`` and ``point`` pin the tree and node instead of drawing
    them.
    """
    idx = int(rng.integers(len(a.trees))) if index is None else index
    tree = a.trees[idx]
    for _ in range(attempts):
        at = int(rng.integers(tree.size)) if point is None else point
        child = tree.replace(at, random_tree(subtree_depth, "grow", rng))
        if child.depth <= max_depth and child != tree:
            return a.with_tree(idx, child)
    return a.with_tree(idx, tree)


def rank_population(pop: list) -> list:
    """Indices of ``pop`` from best to worst (stable for exact ties)."""
    keys = [fitness_key(ind.fitness, ind.size) for ind in pop]
    return sorted(range(len(pop)), key=keys.__getitem__, reverse=True)


def tournament(positions: np.ndarray, size: int, rng: np.random.Generator) -> int:
    """Index of the best of ``size`` uniformly drawn contenders.

    ``positions[i]`` is individual i's place in the ranking (0 = best).
    """
    contenders = rng.integers(0, positions.shape[0], size=size)
    return int(contenders[np.argmin(positions[contenders])])


def _better(a: Individual, b: Individual | None) -> bool:
    if b is None:
        return True
    return fitness_key(a.fitness, a.size) > fitness_key(b.fitness, b.size)


def _copy(ind: Individual) -> Individual:
    return Individual(ind.trees, ind.fitness, ind.evaluated)


def run(source_original, cfg: EvolutionConfig | None = None, source: str | None = None,
        callback=None) -> RunResult:
    """Evolve ``cfg.fitness.n_trees`` redundant features for one source feature.

    ``callback(generation, population, best)`` is called after each
    generation is evaluated.
    """
    cfg = cfg or EvolutionConfig()
    started = time.perf_counter()
    x = validate_source(source_original)
    rng = np.random.default_rng(cfg.seed & 0xFFFFFFFFFFFFFFFF)
    conditioned = condition_source(x, cfg.conditioning)

    fit_x, fit_c = x, conditioned
    if cfg.mi_subsample and x.shape[0] > cfg.mi_subsample:
        sub_rng = np.random.default_rng([cfg.seed & 0xFFFFFFFFFFFFFFFF, 1])
        rows = np.sort(sub_rng.choice(x.shape[0], cfg.mi_subsample, replace=False))
        fit_x, fit_c = x[rows], conditioned[rows]

    psi = baseline_psi(fit_x, cfg.fitness.estimator)
    evaluator = FitnessEvaluator(fit_x, fit_c, psi, cfg.fitness, cfg.conditioning)

    pop = initialize(cfg, rng)
    best = None
    history = []
    generation = 0
    while True:
        for ind in pop:
            if not ind.evaluated:
                evaluator(ind)
        order = rank_population(pop)
        if _better(pop[order[0]], best):
            best = _copy(pop[order[0]])
        history.append(best.fitness.fitness if best.fitness is not None else -math.inf)
        if callback is not None:
            callback(generation, pop, best)
        if generation == cfg.generations:
            break

        positions = np.empty(len(pop), dtype=np.int64)
        positions[order] = np.arange(len(pop))
        nxt = [_copy(pop[i]) for i in order[:cfg.elitism_count]]
        while len(nxt) < cfg.population_size:
            if rng.random() < cfg.crossover_rate:
                p1 = pop[tournament(positions, cfg.tournament_size, rng)]
                p2 = pop[tournament(positions, cfg.tournament_size, rng)]
                c1, c2 = crossover(p1, p2, rng, cfg.max_depth)
                nxt.append(c1)
                if len(nxt) < cfg.population_size:
                    nxt.append(c2)
            else:
                p = pop[tournament(positions, cfg.tournament_size, rng)]
                nxt.append(mutate(p, rng, cfg.max_depth, cfg.mutation_depth))
        pop = nxt
        generation += 1

    return RunResult(best, history, cfg, psi, time.perf_counter() - started, source)
