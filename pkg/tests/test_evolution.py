import json
import math

import numpy as np
import pytest

from redgp.dataset import load_iris
from redgp.fitness import FitnessConfig, compare_fitness
from redgp.gp import GpTree, Individual, parse_sexpr, random_tree
from redgp.mi import DegenerateFeatureError
from redgp.evolution import (
    EvolutionConfig,
    RunResult,
    crossover,
    initialize,
    mutate,
    rank_population,
    run,
    tournament,
)

SMALL = EvolutionConfig(population_size=40, generations=4, elitism_count=4, seed=3)


@pytest.fixture(scope="module")
def f2():
    return load_iris().column("F2")


def _deep_individual(rng, depth=12, n=5):
    return Individual(tuple(random_tree(depth, "full", rng) for _ in range(n)))


# -- initialisation --------------------------------------------------------------

def test_initialize_defaults():
    cfg = EvolutionConfig()
    pop = initialize(cfg, np.random.default_rng(0))
    assert len(pop) == 1024
    assert all(len(ind.trees) == 5 for ind in pop)
    depths = {t.depth for ind in pop for t in ind.trees}
    assert max(depths) <= 6 and min(depths) >= 1
    # ramped: every initial depth bound is represented by a full tree
    assert {2, 3, 4, 5, 6} <= depths


def test_initialize_is_deterministic():
    a = initialize(SMALL, np.random.default_rng(9))
    b = initialize(SMALL, np.random.default_rng(9))
    assert [i.trees for i in a] == [i.trees for i in b]


# -- crossover -------------------------------------------------------------------

def test_crossover_of_identical_parents():
    rng = np.random.default_rng(1)
    p = _deep_individual(rng, depth=4)
    for idx in range(5):
        for point in range(p.trees[idx].size):
            c1, c2 = crossover(p, Individual(p.trees), rng, index=idx, points=(point, point))
            assert c1.same_structure(p) and c2.same_structure(p)
    leaves = Individual((GpTree(["X"]),) * 5)
    for _ in range(20):
        c1, c2 = crossover(leaves, Individual(leaves.trees), rng)
        assert c1.same_structure(leaves) and c2.same_structure(leaves)


def test_crossover_at_roots_swaps_whole_trees():
    rng = np.random.default_rng(2)
    a, b = _deep_individual(rng, 3), _deep_individual(rng, 4)
    c1, c2 = crossover(a, b, rng, index=2, points=(0, 0))
    assert c1.trees[2] == b.trees[2] and c2.trees[2] == a.trees[2]
    for i in (0, 1, 3, 4):
        assert c1.trees[i] == a.trees[i] and c2.trees[i] == b.trees[i]


def test_crossover_changes_one_index_only():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b = _deep_individual(rng, 4), _deep_individual(rng, 4)
        c1, _ = crossover(a, b, rng)
        assert sum(x != y for x, y in zip(c1.trees, a.trees)) <= 1


def test_crossover_depth_guard():
    rng = np.random.default_rng(4)
    reverted = 0
    for _ in range(1000):
        a, b = _deep_individual(rng, 12), _deep_individual(rng, 12)
        c1, c2 = crossover(a, b, rng, max_depth=15)
        assert c1.depth <= 15 and c2.depth <= 15
        reverted += c1.same_structure(a)
    assert reverted > 0  # the guard was exercised


def test_crossover_needs_equal_tree_counts():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        crossover(_deep_individual(rng, 2, 5), _deep_individual(rng, 2, 3), rng)


# -- mutation --------------------------------------------------------------------

def test_mutation_at_root_replaces_tree():
    rng = np.random.default_rng(5)
    a = _deep_individual(rng, 6)
    m = mutate(a, rng, index=1, point=0)
    assert m.trees[1] != a.trees[1] and m.trees[1].depth <= 4
    assert m.trees[:1] == a.trees[:1] and m.trees[2:] == a.trees[2:]


def test_mutation_changes_exactly_one_tree():
    rng = np.random.default_rng(6)
    for _ in range(500):
        a = _deep_individual(rng, 5)
        m = mutate(a, rng)
        assert sum(x != y for x, y in zip(m.trees, a.trees)) == 1


def test_mutation_depth_guard():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        a = _deep_individual(rng, 14)
        assert mutate(a, rng, max_depth=15).depth <= 15


def test_mutation_keeps_parent_when_every_attempt_fails():
    rng = np.random.default_rng(8)
    a = Individual(tuple(random_tree(15, "full", rng) for _ in range(5)))
    # max_depth below the parent's depth: no child can pass the guard
    m = mutate(a, rng, max_depth=3, index=0, point=a.trees[0].size - 1)
    assert m.same_structure(a)


# -- selection -------------------------------------------------------------------

def test_tournament_picks_best_contender():
    positions = np.array([3, 0, 2, 1])
    rng = np.random.default_rng(0)
    assert tournament(positions, 50, rng) == 1  # 50 draws from 4 always include index 1
    picks = [tournament(positions, 1, rng) for _ in range(400)]
    assert set(picks) == {0, 1, 2, 3}


def test_rank_population_order(f2):
    from redgp.fitness import assemble
    pop = [Individual((GpTree(["X"]),) * 2) for _ in range(4)]
    pop[0].fitness = assemble(0.8, 0.5, 0.8, 0.7)
    pop[1].fitness = None
    pop[2].fitness = assemble(0.9, 0.5, 0.9, 0.7)
    pop[3].fitness = assemble(0.6, 0.5, 0.6, 0.7)
    assert rank_population(pop) == [2, 0, 3, 1]


# -- run -------------------------------------------------------------------------

def test_zero_generations_returns_best_initial(f2):
    cfg = EvolutionConfig(population_size=30, generations=0, elitism_count=2, seed=1)
    seen = []
    res = run(f2, cfg, callback=lambda g, pop, best: seen.extend(pop))
    assert len(res.fitness_history) == 1
    for ind in seen:
        assert compare_fitness(ind.fitness, res.best.fitness, ind.size, res.best.size) <= 0


def test_runs_are_reproducible(f2):
    a = run(f2, SMALL, source="F2").to_dict(with_timing=False)
    b = run(f2, SMALL, source="F2").to_dict(with_timing=False)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    other = run(f2, EvolutionConfig(population_size=40, generations=4, elitism_count=4, seed=4))
    assert other.to_dict(False)["trees"] != a["trees"]


def test_elitism_and_invariants(f2):
    gen_best = []
    sizes = []

    def watch(gen, pop, best):
        sizes.append(len(pop))
        for ind in pop:
            assert ind.evaluated and len(ind.trees) == 5 and ind.depth <= 15
        order = rank_population(pop)
        gen_best.append(pop[order[0]])

    cfg = EvolutionConfig(population_size=60, generations=8, elitism_count=5, seed=11)
    res = run(f2, cfg, callback=watch)
    assert sizes == [60] * 9
    for prev, cur in zip(gen_best, gen_best[1:]):
        assert compare_fitness(cur.fitness, prev.fitness, cur.size, prev.size) >= 0
    hist = res.fitness_history
    assert all(b >= a for a, b in zip(hist, hist[1:]))
    assert hist[-1] == res.best.fitness.fitness


def test_best_is_reevaluable(f2):
    from redgp.dataset import condition_source
    from redgp.fitness import evaluate_individual
    from redgp.mi import baseline_psi
    res = run(f2, SMALL)
    fresh = Individual(res.best.trees)
    rec = evaluate_individual(fresh, f2, condition_source(f2, SMALL.conditioning),
                              baseline_psi(f2), SMALL.fitness, SMALL.conditioning)
    assert rec == res.best.fitness


def test_run_result_round_trip(f2):
    res = run(f2, SMALL, source="F2")
    d = json.loads(json.dumps(res.to_dict()))
    back = RunResult.from_dict(d)
    assert back.best.trees == res.best.trees
    assert back.best.fitness == res.best.fitness
    assert back.config == res.config
    assert back.fitness_history == res.fitness_history


def test_invalid_history_serialises_as_null():
    res = RunResult(Individual((GpTree(["X"]),) * 2), [-math.inf, 0.1], SMALL, 1.0)
    d = res.to_dict(with_timing=False)
    assert d["fitness_history"] == [None, 0.1] and "elapsed" not in d
    assert RunResult.from_dict({**d, "fitness": None}).fitness_history[0] == -math.inf


def test_subsample(f2):
    cfg = EvolutionConfig(population_size=30, generations=2, elitism_count=2, mi_subsample=60)
    res = run(f2, cfg)
    assert res.best.fitness is not None


def test_constant_source_fails():
    with pytest.raises(DegenerateFeatureError):
        run(np.full(40, 2.0), SMALL)


def test_three_trees():
    cfg = EvolutionConfig(population_size=30, generations=2, elitism_count=2,
                          fitness=FitnessConfig(n_trees=3))
    res = run(load_iris().column("F3"), cfg)
    assert len(res.best.trees) == 3


@pytest.mark.parametrize("kwargs", [
    {"crossover_rate": 0.5, "mutation_rate": 0.4},
    {"elitism_count": 40, "population_size": 40},
    {"tournament_size": 0},
    {"init_depths": (3, 20)},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        EvolutionConfig(**kwargs)


def test_parse_of_reported_trees(f2):
    res = run(f2, SMALL)
    for text in res.to_dict(False)["trees"]:
        assert parse_sexpr(text) in res.best.trees
