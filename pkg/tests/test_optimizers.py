import numpy as np
import pytest

from fixtures import *  # noqa: F401,F403
from pbvqo.optimizers import (
    BfgsOptions, GaConfig, NonFiniteCostError, bfgs_minimize,
    finite_difference_gradient, ga_minimize,
)


def rosenbrock(x):
    return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2


def sphere(x):
    return float(np.sum(np.asarray(x) ** 2))


def test_finite_difference_gradient():
    def cost(x):
        return np.sin(x[0]) * np.exp(x[1])

    x = np.array([0.3, 0.2])
    exact = np.array([np.cos(0.3) * np.exp(0.2), np.sin(0.3) * np.exp(0.2)])
    coarse = np.linalg.norm(finite_difference_gradient(cost, x, 1e-2) - exact)
    fine = np.linalg.norm(finite_difference_gradient(cost, x, 1e-3) - exact)
    # Central differences are second order
    assert 1.8 <= np.log10(coarse / fine) <= 2.2

    # and exact on quadratics, up to round-off
    weights = np.array([1.0, 3.0, 0.5])
    gradient = finite_difference_gradient(
        lambda y: float(np.sum(weights * y ** 2)), np.ones(3), 1e-3)
    assert np.allclose(gradient, 2 * weights, atol=1e-8)

    with pytest.raises(ValueError):
        finite_difference_gradient(cost, x, 0)
    with pytest.raises(NonFiniteCostError):
        finite_difference_gradient(lambda y: np.nan, x, 1e-3)


@pytest.mark.parametrize("dim", [2, 3, 4, 6])
def test_bfgs_quadratic(dim):
    rng = np.random.default_rng(dim)
    weights = rng.uniform(1, 5, dim)
    center = rng.uniform(-2, 2, dim)

    def cost(x):
        return float(np.sum(weights * (np.asarray(x) - center) ** 2))

    report = bfgs_minimize(cost, np.zeros(dim))
    assert report.converged
    assert np.allclose(report.best_params, center, atol=1e-4)
    assert report.best_cost < 1e-8
    assert report.iterations <= 50
    assert report.best_cost == min(report.cost_history)


@pytest.mark.parametrize("dim", [2, 3, 4, 6])
def test_bfgs_quadratic_near_exact_line_search(dim):
    """A near exact line search on a quadratic ends within dim iterations."""
    rng = np.random.default_rng(dim)
    weights = rng.uniform(1, 5, dim)
    center = rng.uniform(-2, 2, dim)

    def cost(x):
        return float(np.sum(weights * (np.asarray(x) - center) ** 2))

    report = bfgs_minimize(cost, np.zeros(dim), BfgsOptions(c2=1e-3))
    assert report.converged
    assert report.iterations <= dim
    assert np.allclose(report.best_params, center, atol=1e-4)


def test_bfgs_rosenbrock():
    report = bfgs_minimize(rosenbrock, [-1.2, 1.0], BfgsOptions(ftol=0))
    assert np.allclose(report.best_params, [1, 1], atol=1e-4)
    history = report.cost_history
    assert history[0] == pytest.approx(24.2)
    assert all(later <= earlier for earlier, later in zip(history,
                                                          history[1:]))


def test_bfgs_is_deterministic():
    first = bfgs_minimize(rosenbrock, [-1.2, 1.0], BfgsOptions(max_iter=10),
                          seed=7)
    second = bfgs_minimize(rosenbrock, [-1.2, 1.0], BfgsOptions(max_iter=10),
                           seed=7)
    assert first == second
    assert first.seed == 7
    assert first.iterations <= 10
    if not first.converged:
        assert first.message == "maximum number of iterations reached"


def test_bfgs_starting_at_the_minimum():
    report = bfgs_minimize(sphere, [0.0, 0.0])
    assert report.converged
    assert report.iterations == 0
    assert report.message.startswith("gradient")
    # One cost and two per coordinate for the gradient
    assert report.evaluations == 5
    assert report.cost_history == (0.0,)


def test_bfgs_non_finite_cost():
    """The cost is undefined beyond x = 1, the run stops with what it had."""
    def cost(x):
        return (x[0] - 2) ** 2 if x[0] < 1 else np.nan

    report = bfgs_minimize(cost, [0.0])
    assert not report.converged
    assert report.message.startswith("non-finite")
    assert report.best_params[0] < 1
    assert report.best_cost <= 4

    with pytest.raises(ValueError, match="starting point"):
        bfgs_minimize(cost, [1.5])
    with pytest.raises(ValueError, match="finite vector"):
        bfgs_minimize(sphere, [np.nan, 0.0])


def test_bfgs_options_validation():
    with pytest.raises(ValueError, match="Wolfe"):
        BfgsOptions(c1=0.9, c2=0.1)
    with pytest.raises(ValueError, match="iteration"):
        BfgsOptions(max_iter=0)
    with pytest.raises(ValueError, match="step"):
        BfgsOptions(fd_step=0)
    with pytest.raises(ValueError):
        BfgsOptions(gtol=0)


def test_ga_sphere():
    config = GaConfig(((-5.0, 5.0),) * 3, population_size=40,
                      generations=80, seed=3)
    report = ga_minimize(sphere, config)
    assert report.best_cost < 0.1
    assert report.converged
    assert report.iterations == 80
    assert len(report.cost_history) == 81
    assert report.best_cost == report.cost_history[-1]


@pytest.mark.parametrize("seed", range(5))
def test_ga_sphere_six_dimensions(seed):
    config = GaConfig(((-5.0, 5.0),) * 6, population_size=50,
                      generations=100, seed=seed)
    assert ga_minimize(sphere, config).best_cost < 1e-3


def test_ga_elitism_keeps_the_best():
    config = GaConfig(((-2.0, 2.0),) * 2, population_size=12, generations=25,
                      elitism_count=1, seed=5)
    history = ga_minimize(rosenbrock, config).cost_history
    assert all(later <= earlier for earlier, later in zip(history,
                                                          history[1:]))


def test_ga_seeds():
    config = GaConfig(((-5.0, 5.0),) * 4, population_size=10, generations=5,
                      seed=1)
    assert ga_minimize(sphere, config) == ga_minimize(sphere, config)
    other = GaConfig(config.bounds, population_size=10, generations=5, seed=2)
    assert ga_minimize(sphere, other).best_params \
        != ga_minimize(sphere, config).best_params


def test_ga_evaluations_and_bounds():
    seen = []

    def cost(x):
        seen.append(np.array(x))
        return sphere(x)

    bounds = ((-1.0, 2.0), (0.5, 0.75), (10.0, 20.0))
    config = GaConfig(bounds, population_size=9, generations=7,
                      elitism_count=3, mutation_rate=1.0, mutation_scale=5.0)
    report = ga_minimize(cost, config)
    assert report.evaluations == 9 + 7 * (9 - 3) == len(seen)
    low, high = np.array(bounds).T
    for individual in seen:
        assert np.all(low <= individual) and np.all(individual <= high)


def test_ga_constant_cost():
    config = GaConfig(((0.0, 1.0),) * 2, population_size=6, generations=4)
    report = ga_minimize(lambda x: 2.5, config)
    assert report.best_cost == 2.5
    assert report.cost_history == (2.5,) * 5


def test_ga_non_finite_costs():
    def cost(x):
        return np.nan if x[0] > 0 else sphere(x)

    config = GaConfig(((-1.0, 1.0),) * 2, population_size=20, generations=10,
                      seed=4)
    report = ga_minimize(cost, config)
    assert np.isfinite(report.best_cost)
    assert report.best_params[0] <= 0


def test_ga_config():
    config = GaConfig.for_ansatz(3)
    assert config.bounds[:3] == ((-5.0, 5.0),) * 3
    assert config.bounds[3:] == ((0.0, 2 * np.pi),) * 3
    assert GaConfig.for_ansatz(2, amplitude_bound=1.0).bounds[0] == (-1.0, 1.0)

    with pytest.raises(ValueError, match="Elitism"):
        GaConfig(((0, 1),), population_size=4, elitism_count=4)
    with pytest.raises(ValueError, match="low < high"):
        GaConfig(((1, 0),))
    with pytest.raises(ValueError, match="crossover_rate"):
        GaConfig(((0, 1),), crossover_rate=1.5)
    with pytest.raises(ValueError):
        GaConfig(((0, 1),), population_size=1, elitism_count=0)
