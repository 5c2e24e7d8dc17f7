import itertools

import numpy as np
import pytest

from opinion_shift.dynamics import (OpinionObjective, equivalent_to_original,
                                    hoeffding_radius, hoeffding_violation_rate,
                                    integrate_transient, sample_participation,
                                    sample_participation_many, slowest_rate, steady_state,
                                    steady_state_absolute, steady_state_influenced,
                                    steady_state_via_walks)
from opinion_shift.errors import NumericalError, ValidationError
from opinion_shift.graph import (LeaderConfig, WeightedDigraph, build_equivalent, directed_cycle,
                                 gadget_graph, is_vertex_cover, path_graph, petersen_graph)
from opinion_shift.walks import AbsorbingChain

from conftest import random_digraph, random_undirected


def _random_config(r, n, model, sizes=(2, 2)):
    nodes = r.permutation(n)
    s0 = set(nodes[:sizes[0]].tolist())
    s1 = set(nodes[sizes[0]:sizes[0] + sizes[1]].tolist())
    kappa = r.uniform(0.5, 3.0, n) if model == "influenced" else None
    return LeaderConfig(s0, s1, model, kappa)


def test_path3_absolute():
    ss = steady_state_absolute(path_graph(3), {0}, {2})
    np.testing.assert_allclose(ss.x_hat, [0.0, 0.5, 1.0])
    assert ss.mu == pytest.approx(0.5)
    assert ss.f(0.25) == pytest.approx(0.25)


def test_gadget_cover_and_non_cover():
    g, center = gadget_graph(petersen_graph())
    pet = petersen_graph()
    cover = next(c for c in itertools.combinations(range(10), 6) if is_vertex_cover(pet, c))
    ss = steady_state_absolute(g, {center}, set(cover))
    followers = [v for v in range(10) if v not in cover]
    np.testing.assert_allclose(ss.x_hat[followers], 0.5, atol=1e-12)
    assert ss.mu == pytest.approx(8 / 11, abs=1e-12)
    non_cover = next(c for c in itertools.combinations(range(10), 6) if not is_vertex_cover(pet, c))
    assert steady_state_absolute(g, {center}, set(non_cover)).mu < 8 / 11


def test_empty_s1_is_all_zero():
    ss = steady_state_absolute(path_graph(4), {0}, set())
    assert ss.mu == 0.0
    cfg = LeaderConfig.for_graph(path_graph(4), {0}, set(), "influenced", 1.0)
    assert steady_state_influenced(path_graph(4), cfg).mu == 0.0


def test_influenced_two_cycle():
    g = WeightedDigraph.from_undirected(2, [(0, 1)])
    ss = steady_state(g, LeaderConfig.for_graph(g, {0}, {1}, "influenced", 1.0))
    np.testing.assert_allclose(ss.x_hat, [1 / 3, 2 / 3], atol=1e-15)
    assert ss.mu == pytest.approx(0.5)


def test_influenced_rejects_absolute_config():
    g = path_graph(3)
    with pytest.raises(ValidationError):
        steady_state_influenced(g, LeaderConfig.for_graph(g, {0}, {2}))


def test_requires_strong_connectivity():
    g = WeightedDigraph(3, [(0, 1, 1), (1, 0, 1), (1, 2, 1)])
    with pytest.raises(ValidationError):
        steady_state_absolute(g, {0}, {2})


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("model", ["absolute", "influenced"])
def test_residual_and_convex_hull(seed, model):
    r = np.random.default_rng(seed)
    g = random_digraph(r, 10)
    cfg = _random_config(r, 10, model)
    x = steady_state(g, cfg).x_hat
    assert np.all(x >= -1e-12) and np.all(x <= 1 + 1e-12)
    lap = g.laplacian()
    if model == "absolute":
        np.testing.assert_array_equal(x[sorted(cfg.s0)], 0.0)
        np.testing.assert_array_equal(x[sorted(cfg.s1)], 1.0)
        f = cfg.followers(10)
        assert np.max(np.abs((lap @ x)[f])) <= 1e-8
    else:
        k = np.zeros(10)
        k[sorted(cfg.leaders)] = cfg.kappa[sorted(cfg.leaders)]
        drive = np.zeros(10)
        drive[sorted(cfg.s1)] = cfg.kappa[sorted(cfg.s1)]
        assert np.max(np.abs(lap @ x + k * x - drive)) <= 1e-8


@pytest.mark.parametrize("seed", range(8))
def test_influenced_matches_escape_on_augmented_graph(seed):
    r = np.random.default_rng(seed)
    g = random_digraph(r, 8)
    cfg = _random_config(r, 8, "influenced", sizes=(2, 1))
    eq = build_equivalent(g, cfg)
    chain = AbsorbingChain(eq.graph, {eq.s0_id}, {eq.s1_id})
    np.testing.assert_allclose(steady_state(g, cfg).x_hat, chain.escape_probability()[:8],
                               atol=1e-10)


@pytest.mark.parametrize("n", [6, 10, 20])
def test_influenced_approaches_absolute_for_stiff_leaders(n):
    r = np.random.default_rng(n)
    g = random_digraph(r, n)
    cfg = _random_config(r, n, "absolute")
    stiff = LeaderConfig(cfg.s0, cfg.s1, "influenced", np.full(n, 1e6))
    diff = steady_state(g, stiff).x_hat - steady_state(g, cfg).x_hat
    assert np.max(np.abs(diff)) <= 1e-4


# -- random-walk formula for the steady state -----------------------------------


def test_walk_formula_path3():
    g = path_graph(3)
    eq = build_equivalent(g, LeaderConfig.for_graph(g, {0}, {2}))
    x = equivalent_to_original(eq, steady_state_via_walks(eq), 3)
    np.testing.assert_allclose(x, [0.0, 0.5, 1.0], atol=1e-12)


def test_walk_formula_directed_three_cycle():
    g = directed_cycle(3)
    cfg = LeaderConfig.for_graph(g, {0}, {1})
    eq = build_equivalent(g, cfg)
    x = equivalent_to_original(eq, steady_state_via_walks(eq), 3)
    np.testing.assert_allclose(x, steady_state(g, cfg).x_hat, atol=1e-10)
    np.testing.assert_allclose(x, [0.0, 1.0, 0.0], atol=1e-10)


@pytest.mark.parametrize("seed", range(6))
def test_laplacian_form_on_undirected_graphs(seed):
    r = np.random.default_rng(seed)
    g = random_undirected(r, 8)
    eq = build_equivalent(g, _random_config(r, 8, "absolute"))
    np.testing.assert_allclose(steady_state_via_walks(eq, "laplacian"),
                               steady_state_via_walks(eq, "scriptR"), atol=1e-8)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("model", ["absolute", "influenced"])
@pytest.mark.parametrize("formula", ["scriptR", "scriptL"])
def test_walk_formula_matches_solve(seed, model, formula):
    r = np.random.default_rng(seed)
    g = random_digraph(r, 9)
    cfg = _random_config(r, 9, model)
    eq = build_equivalent(g, cfg)
    x = equivalent_to_original(eq, steady_state_via_walks(eq, formula), 9)
    np.testing.assert_allclose(x, steady_state(g, cfg).x_hat, atol=1e-8)


def test_walk_formula_rejects_unknown_and_directed():
    g = directed_cycle(4)
    eq = build_equivalent(g, LeaderConfig.for_graph(g, {0}, {2}))
    with pytest.raises(ValidationError):
        steady_state_via_walks(eq, "laplacian")
    with pytest.raises(ValidationError):
        steady_state_via_walks(eq, "other")


# -- transient integration -----------------------------------------------------


def test_transient_path3_absolute():
    g = path_graph(3)
    cfg = LeaderConfig.for_graph(g, {0}, {2})
    traj = integrate_transient(g, cfg, [0.0, 0.0, 1.0], horizon=40.0, step=0.05)
    np.testing.assert_allclose(traj.terminal, [0.0, 0.5, 1.0], atol=1e-6)
    assert np.all(traj.states[:, 0] == 0.0) and np.all(traj.states[:, 2] == 1.0)
    assert traj.times[-1] == pytest.approx(40.0)


def test_transient_influenced_two_cycle():
    g = WeightedDigraph.from_undirected(2, [(0, 1)])
    cfg = LeaderConfig.for_graph(g, {0}, {1}, "influenced", 1.0)
    traj = integrate_transient(g, cfg, np.zeros(2), horizon=30.0, step=0.05)
    np.testing.assert_allclose(traj.terminal, [1 / 3, 2 / 3], atol=1e-6)


@pytest.mark.parametrize("model", ["absolute", "influenced"])
def test_transient_reaches_steady_state(model):
    r = np.random.default_rng(4)
    g = random_digraph(r, 8)
    cfg = _random_config(r, 8, model)
    horizon = 50.0 / slowest_rate(g, cfg)
    traj = integrate_transient(g, cfg, r.random(8), horizon=horizon, step=0.02)
    assert np.max(np.abs(traj.terminal - steady_state(g, cfg).x_hat)) <= 1e-4


def test_transient_divergence_detected():
    g = path_graph(3)
    cfg = LeaderConfig.for_graph(g, {0}, {2})
    with pytest.raises(NumericalError):
        integrate_transient(g, cfg, [0.0, 0.3, 1.0], horizon=2000.0, step=5.0)


def test_transient_validation():
    g = path_graph(3)
    cfg = LeaderConfig.for_graph(g, {0}, {2})
    with pytest.raises(ValidationError):
        integrate_transient(g, cfg, [0.0, 0.0, 1.0], horizon=1.0, step=0.0)
    with pytest.raises(ValidationError):
        integrate_transient(g, cfg, [0.0, 1.0], horizon=1.0, step=0.1)


# -- participation sampling ------------------------------------------------------


def test_participation_deterministic_when_binary():
    ss = steady_state_absolute(path_graph(2), {0}, {1})
    assert sample_participation(ss, seed=3) == ss.mu


def test_participation_mean_on_path3():
    ss = steady_state_absolute(path_graph(3), {0}, {2})
    draws = sample_participation_many(ss, 10_000, seed=11)
    se = draws.std(ddof=1) / np.sqrt(draws.size)
    assert abs(draws.mean() - 0.5) <= 3 * se


def test_participation_reproducible():
    ss = steady_state_absolute(path_graph(5), {0}, {4})
    assert sample_participation(ss, seed=5) == sample_participation(ss, seed=5)


def test_hoeffding_rate_small(rng):
    g = random_undirected(rng, 100, density=0.05)
    ss = steady_state_absolute(g, {0, 1}, {2, 3, 4})
    rate, bound = hoeffding_violation_rate(ss, 2000, seed=2)
    assert bound == pytest.approx(2 / 100 ** 2)
    assert rate <= bound + 0.01
    assert hoeffding_radius(100) == pytest.approx(np.sqrt(np.log(100) / 100))


# -- batched objective -----------------------------------------------------------


@pytest.mark.parametrize("model", ["absolute", "influenced"])
def test_objective_batch_matches_single(model):
    r = np.random.default_rng(7)
    g = random_digraph(r, 10)
    obj = OpinionObjective(g, {0, 1}, model, r.uniform(0.5, 2, 10))
    subsets = np.array(list(itertools.combinations(range(2, 10), 3)))
    batch = obj.mu_batch(subsets, chunk=7)
    single = [obj.mu(s) for s in subsets]
    np.testing.assert_allclose(batch, single, atol=1e-12)
    cfg = obj.config(set(subsets[0].tolist()))
    assert obj(subsets[0]) == pytest.approx(steady_state(g, cfg).mu)


def test_objective_batch_all_leaders():
    obj = OpinionObjective(path_graph(3), {0})
    np.testing.assert_allclose(obj.mu_batch([[1, 2]]), [2 / 3])
    np.testing.assert_allclose(obj.mu_batch(np.empty((2, 0), dtype=int)), [0.0, 0.0])


def test_objective_rejects_overlap():
    obj = OpinionObjective(path_graph(3), {0})
    with pytest.raises(ValidationError):
        obj.mu({0, 1})
