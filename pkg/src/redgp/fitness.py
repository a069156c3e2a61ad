"""Mutual-information fitness of a multi-tree individual.

Feasible individuals (every tree keeps at least ``theta`` of the source
information) score ``min_source_mi - max_shared_mi``; infeasible ones are
penalised by ``-1 / mean_source_mi``.  All MI values are divided by the
source's self-MI baseline.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .dataset import ConditioningConfig, postprocess_rf
from .gp import Individual, evaluate_tree
from .mi import DegenerateFeatureError, EstimatorConfig, mi_from_prepared, prepare

__all__ = [
    "FitnessConfig",
    "FitnessRecord",
    "penalty",
    "assemble",
    "evaluate_individual",
    "FitnessEvaluator",
    "fitness_key",
    "compare_fitness",
]

# Below this mean source MI the penalty -1/mean is replaced by FLOOR_FITNESS.
MEAN_SOURCE_GUARD = 0.01
FLOOR_FITNESS = -100.0


@dataclass(frozen=True)
class FitnessConfig:
    theta: float = 0.7
    n_trees: int = 5
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if self.n_trees < 2:
            raise ValueError("n_trees must be >= 2")


@dataclass(frozen=True)
class FitnessRecord:
    min_source_mi: float
    max_shared_mi: float
    mean_source_mi: float
    feasible: bool
    fitness: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FitnessRecord":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})


def penalty(mean_source_mi: float) -> float:
    if mean_source_mi <= MEAN_SOURCE_GUARD:
        return FLOOR_FITNESS
    return -1.0 / mean_source_mi


def assemble(min_source_mi: float, max_shared_mi: float, mean_source_mi: float,
             theta: float) -> FitnessRecord:
    """Combine the three statistics into the piecewise fitness."""
    feasible = bool(min_source_mi >= theta)
    value = min_source_mi - max_shared_mi if feasible else penalty(mean_source_mi)
    return FitnessRecord(
        float(min_source_mi), float(max_shared_mi), float(mean_source_mi), feasible, float(value)
    )


def _stats(source_mi, shared):
    """(min source MI, max over trees of mean shared MI, mean source MI)."""
    n = len(source_mi)
    rows = [sum(shared[i][j] for j in range(n) if j != i) / (n - 1) for i in range(n)]
    return min(source_mi), max(rows), sum(source_mi) / n


class FitnessEvaluator:
    """Evaluates individuals for one source feature, memoising MI work.

    Tree outputs are cached per tree, and MI values per distinct
    post-processed vector (and per unordered pair of vectors).  Because the
    estimator is a deterministic function of its inputs, caching never
    changes a result.
    """

    def __init__(self, source_original, source_conditioned, psi: float,
                 cfg: FitnessConfig | None = None,
                 conditioning: ConditioningConfig | None = None,
                 max_cache: int = 200_000):
        self.cfg = cfg or FitnessConfig()
        self.conditioning = conditioning or ConditioningConfig()
        self.source = np.asarray(source_original, dtype=float)
        self.conditioned = np.asarray(source_conditioned, dtype=float)
        if self.source.shape != self.conditioned.shape:
            raise ValueError("original and conditioned source differ in length")
        if not psi > 0:
            raise ValueError("psi must be > 0")
        self.psi = float(psi)
        self.max_cache = max_cache
        self._source_prepared = prepare(self.source, self.cfg.estimator)
        self._source_key = self.source.tobytes()
        self.clear()

    def clear(self):
        self._outputs = {}
        self._prepared = {}
        self._source_mi = {}
        self._pair_mi = {}

    def _trim(self):
        if len(self._outputs) + len(self._pair_mi) > self.max_cache:
            self.clear()

    def tree_output(self, tree):
        """(post-processed values, cache key) of one tree, or None if invalid."""
        hit = self._outputs.get(tree, False)
        if hit is not False:
            return hit
        raw = evaluate_tree(tree, self.conditioned)
        out = None
        if raw is not None:
            try:
                values = postprocess_rf(raw, self.conditioning)
            except DegenerateFeatureError:
                values = None
            if values is not None:
                out = (values, values.tobytes())
        self._outputs[tree] = out
        return out

    def _prep(self, key, values, twin=False):
        slot = (key, twin)
        p = self._prepared.get(slot)
        if p is None:
            p = prepare(values, self.cfg.estimator, twin=twin)
            self._prepared[slot] = p
        return p

    def source_mi(self, key, values) -> float:
        v = self._source_mi.get(key)
        if v is None:
            twin = key == self._source_key
            v = mi_from_prepared(
                self._source_prepared, self._prep(key, values, twin), self.cfg.estimator
            ) / self.psi
            self._source_mi[key] = v
        return v

    def pair_mi(self, ka, va, kb, vb) -> float:
        if kb < ka:
            ka, va, kb, vb = kb, vb, ka, va
        v = self._pair_mi.get((ka, kb))
        if v is None:
            twin = ka == kb
            v = mi_from_prepared(
                self._prep(ka, va), self._prep(kb, vb, twin), self.cfg.estimator
            ) / self.psi
            self._pair_mi[(ka, kb)] = v
        return v

    def rf_values(self, ind: Individual):
        """Post-processed outputs of every tree, or None if any is invalid."""
        outs = []
        for tree in ind.trees:
            o = self.tree_output(tree)
            if o is None:
                return None
            outs.append(o)
        return outs

    def evaluate(self, ind: Individual) -> FitnessRecord | None:
        if len(ind.trees) != self.cfg.n_trees:
            raise ValueError(f"expected {self.cfg.n_trees} trees, got {len(ind.trees)}")
        self._trim()
        outs = self.rf_values(ind)
        if outs is None:
            return None
        n = len(outs)
        source_mi = [self.source_mi(k, v) for v, k in outs]
        shared = [[0.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                shared[i][j] = shared[j][i] = self.pair_mi(
                    outs[i][1], outs[i][0], outs[j][1], outs[j][0]
                )
        return assemble(*_stats(source_mi, shared), self.cfg.theta)

    def __call__(self, ind: Individual) -> Individual:
        ind.fitness = self.evaluate(ind)
        ind.evaluated = True
        return ind


def evaluate_individual(ind: Individual, source_original, source_conditioned, psi: float,
                        cfg: FitnessConfig | None = None,
                        conditioning: ConditioningConfig | None = None) -> FitnessRecord | None:
    """Fitness of ``ind``; None if any tree gives an invalid or constant output.

    MI with the source uses ``source_original`` (unscaled); the trees are
    applied to ``source_conditioned``.
    """
    evaluator = FitnessEvaluator(source_original, source_conditioned, psi, cfg, conditioning)
    return evaluator.evaluate(ind)


def fitness_key(record: FitnessRecord | None, node_count: int = 0) -> tuple:
    """Sort key: larger is better.  Invalid sorts below every valid record."""
    if record is None:
        return (0, -math.inf, -node_count)
    return (1, record.fitness, -node_count)


def compare_fitness(a: FitnessRecord | None, b: FitnessRecord | None,
                    size_a: int = 0, size_b: int = 0) -> int:
    """1 if ``a`` ranks above ``b``, -1 if below, 0 if tied.

    Invalid (None) is the bottom element; equal fitness prefers the
    smaller total node count.
    """
    ka, kb = fitness_key(a, size_a), fitness_key(b, size_b)
    return (ka > kb) - (ka < kb)
