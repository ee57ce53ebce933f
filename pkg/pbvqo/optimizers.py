import logging
import numpy as np
import warnings

from dataclasses import dataclass
from scipy.optimize import line_search


class NonFiniteCostError(ValueError):
    """The cost callable returned NaN or an infinity."""


@dataclass(frozen=True)
class OptimizerReport:
    """The outcome of one optimization run.

    For BFGS the cost history holds the cost at every accepted iterate, for
    the genetic algorithm the best cost of every generation.
    """
    best_params: tuple
    best_cost: float
    cost_history: tuple
    evaluations: int
    converged: bool
    seed: int = None
    iterations: int = 0
    message: str = ""


@dataclass(frozen=True)
class BfgsOptions:
    gtol: float = 1e-6
    ftol: float = 1e-10
    max_iter: int = 500
    fd_step: float = 1e-5
    # Strong Wolfe constants
    c1: float = 1e-4
    c2: float = 0.9

    def __post_init__(self):
        if not self.gtol > 0 or self.ftol < 0:
            raise ValueError("Need gtol > 0 and ftol >= 0, got {} and {}"
                             .format(self.gtol, self.ftol))
        if self.max_iter < 1:
            raise ValueError("Need at least one iteration, got {}"
                             .format(self.max_iter))
        if not self.fd_step > 0:
            raise ValueError("The finite difference step must be positive,"
                             " got {}".format(self.fd_step))
        if not 0 < self.c1 < self.c2 < 1:
            raise ValueError("Wolfe constants need 0 < c1 < c2 < 1, got {}"
                             " and {}".format(self.c1, self.c2))


@dataclass(frozen=True)
class GaConfig:
    """Real-valued generational genetic algorithm settings.

    :param bounds: One (low, high) interval per coordinate.
    """
    bounds: tuple
    population_size: int = 50
    generations: int = 200
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_scale: float = 0.3
    elitism_count: int = 2
    seed: int = 0
    tournament_size: int = 3
    blend_alpha: float = 0.5

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        if not bounds or any(not lo < hi for lo, hi in bounds):
            raise ValueError("Every bound needs low < high: {}"
                             .format(bounds))
        if self.population_size < 2 or self.generations < 0:
            raise ValueError("Need a population of at least 2 and a"
                             " non-negative number of generations")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("Elitism count {} must be below the population"
                             " size {}".format(self.elitism_count,
                                               self.population_size))
        for name in ("crossover_rate", "mutation_rate"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError("{} must lie in [0, 1], got {}"
                                 .format(name, getattr(self, name)))
        if not self.mutation_scale > 0:
            raise ValueError("Mutation scale must be positive, got {}"
                             .format(self.mutation_scale))
        if self.tournament_size < 1:
            raise ValueError("Tournament size must be positive")

    @classmethod
    def for_ansatz(cls, n_terms, amplitude_bound=5.0, **kwargs):
        """Amplitudes in [-bound, bound], phases in [0, 2pi)."""
        bounds = (((-amplitude_bound, amplitude_bound),) * n_terms
                  + ((0.0, 2 * np.pi),) * n_terms)
        return cls(bounds, **kwargs)


class _CountingCost:
    """Counts evaluations and refuses non-finite costs."""
    def __init__(self, cost):
        self.cost = cost
        self.evaluations = 0

    def __call__(self, x):
        self.evaluations += 1
        value = float(self.cost(x))
        if not np.isfinite(value):
            raise NonFiniteCostError("Non-finite cost {} at {}"
                                     .format(value, list(x)))
        return value


class _GradientCache:
    """Central-difference gradient, remembering the last few points.

    The line search already evaluates the gradient at the accepted point,
    we don't want to pay for it twice.
    """
    def __init__(self, cost, step, size=4):
        self.cost = cost
        self.step = step
        self.size = size
        self.cache = {}

    def __call__(self, x):
        key = np.asarray(x, dtype=float).tobytes()
        if key not in self.cache:
            if len(self.cache) >= self.size:
                del self.cache[next(iter(self.cache))]
            self.cache[key] = finite_difference_gradient(self.cost, x,
                                                         self.step)
        return self.cache[key]


def finite_difference_gradient(cost, x, h):
    """Central differences (f(x + h e_k) - f(x - h e_k)) / 2h.

    :param cost: The callable to differentiate.
    :param x: The point, a sequence of floats.
    :param h: The step, positive.

    :return: The gradient as a numpy array.
    """
    if not h > 0:
        raise ValueError("The step must be positive, got {}".format(h))
    x = np.asarray(x, dtype=float)
    gradient = np.empty_like(x)
    for k in range(len(x)):
        shift = np.zeros_like(x)
        shift[k] = h
        forward, backward = cost(x + shift), cost(x - shift)
        if not (np.isfinite(forward) and np.isfinite(backward)):
            raise NonFiniteCostError("Non-finite cost around {} along"
                                     " coordinate {}".format(list(x), k))
        gradient[k] = (forward - backward) / (2 * h)
    return gradient


def _search(cost, gradient, x, direction, g, f, old_f, options):
    # Failed searches are reported through alpha = None, no need to warn
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        alpha, _, _, new_f, _, _ = line_search(
            cost, gradient, x, direction, gfk=g, old_fval=f,
            old_old_fval=old_f, c1=options.c1, c2=options.c2
        )
    return alpha, new_f


def bfgs_minimize(cost, x0, options=None, seed=None):
    """Quasi-Newton minimization with an inverse-Hessian BFGS update.

    Gradients are central finite differences, steps come from a line search
    satisfying the strong Wolfe conditions. We stop on a gradient norm below
    gtol, a cost decrease below ftol, or after max_iter iterations.
    A non-finite cost ends the run with the best iterate so far and
    converged = False.

    :param cost: A callable from a parameter vector to a float.
    :param x0: The starting parameters.
    :param options: The BfgsOptions.
    :param seed: Only recorded in the report, BFGS is deterministic.

    :return: An OptimizerReport.
    """
    options = BfgsOptions() if options is None else options
    counted = _CountingCost(cost)
    gradient = _GradientCache(counted, options.fd_step)
    x = np.array(x0, dtype=float)
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise ValueError("Starting point must be a finite vector: {}"
                         .format(x0))
    try:
        f = counted(x)
    except NonFiniteCostError:
        raise ValueError("Cost is not finite at the starting point {}"
                         .format(list(x)))

    history = [f]
    best_x, best_f = x, f
    identity = np.eye(len(x))
    hess_inv = identity
    old_f = None
    iterations = 0
    converged = False
    message = "maximum number of iterations reached"
    try:
        g = gradient(x)
        old_f = f + np.linalg.norm(g) / 2
        while iterations < options.max_iter:
            if np.linalg.norm(g) < options.gtol:
                converged = True
                message = "gradient norm below gtol"
                break
            direction = -hess_inv @ g
            if g @ direction >= 0:
                logging.debug("Not a descent direction, resetting the"
                              " inverse Hessian")
                hess_inv = identity
                direction = -g
            alpha, new_f = _search(counted, gradient, x, direction, g, f,
                                   old_f, options)
            if alpha is None and hess_inv is not identity:
                logging.debug("Line search failed, retrying along the"
                              " steepest descent")
                hess_inv = identity
                direction = -g
                alpha, new_f = _search(counted, gradient, x, direction, g, f,
                                       None, options)
            if alpha is None:
                message = "line search failed"
                break

            step = alpha * direction
            x_new = x + step
            if new_f is None:
                new_f = counted(x_new)
            g_new = gradient(x_new)
            iterations += 1
            old_f, f = f, float(new_f)
            history.append(f)
            if f < best_f:
                best_x, best_f = x_new, f

            change = g_new - g
            curvature = step @ change
            x, g = x_new, g_new
            if old_f - f < options.ftol:
                converged = True
                message = "cost decrease below ftol"
                break
            # Wolfe steps have positive curvature, barring round-off
            if curvature > 0:
                rho = 1 / curvature
                left = identity - rho * np.outer(step, change)
                hess_inv = left @ hess_inv @ left.T \
                    + rho * np.outer(step, step)
    except NonFiniteCostError as e:
        logging.warning("BFGS aborted after {} iterations: {}"
                        .format(iterations, str(e)))
        converged = False
        message = "non-finite cost: {}".format(str(e))

    logging.debug("BFGS (seed {}) finished: cost {} after {} iterations and"
                  " {} evaluations, {}".format(seed, best_f, iterations,
                                               counted.evaluations, message))
    return OptimizerReport(
        best_params=tuple(float(v) for v in best_x),
        best_cost=best_f,
        cost_history=tuple(history),
        evaluations=counted.evaluations,
        converged=converged,
        seed=seed,
        iterations=iterations,
        message=message,
    )


def _tournament(rng, costs, size):
    """Index of the fittest (lowest cost) of `size` random contenders."""
    contenders = rng.integers(0, len(costs), size=size)
    return contenders[np.argmin(costs[contenders])]


def _blend(rng, first, second, alpha):
    """BLX-alpha: both children uniform in the parents' box widened by
    alpha times its width on each side."""
    low = np.minimum(first, second)
    high = np.maximum(first, second)
    spread = alpha * (high - low)
    return (rng.uniform(low - spread, high + spread),
            rng.uniform(low - spread, high + spread))


def _evaluate(cost, population):
    # A non-finite cost is simply the worst possible fitness
    costs = np.array([float(cost(individual)) for individual in population])
    costs[~np.isfinite(costs)] = np.inf
    return costs


def ga_minimize(cost, config):
    """Minimize with a generational real-valued genetic algorithm.

    Fitness is -cost. The population starts uniform inside the bounds,
    parents come from tournaments, children from BLX-alpha crossover and
    additive Gaussian mutation (clipped back into the bounds). The
    elitism_count best individuals survive unchanged, so with elitism the
    best cost per generation never increases.

    :param cost: A callable from a parameter vector to a float.
    :param config: The GaConfig, which holds the seed.

    :return: An OptimizerReport with the best individual ever seen.
    """
    rng = np.random.default_rng(config.seed)
    low, high = np.array(config.bounds).T
    dim = len(low)
    size = config.population_size

    population = rng.uniform(low, high, size=(size, dim))
    costs = _evaluate(cost, population)
    evaluations = size
    best = np.argmin(costs)
    best_x, best_f = population[best].copy(), costs[best]
    history = [float(costs[best])]

    for generation in range(config.generations):
        order = np.argsort(costs, kind="stable")
        elites = population[order[:config.elitism_count]]
        elite_costs = costs[order[:config.elitism_count]]

        children = []
        while len(children) < size - config.elitism_count:
            first = population[_tournament(rng, costs,
                                           config.tournament_size)]
            second = population[_tournament(rng, costs,
                                            config.tournament_size)]
            if rng.random() < config.crossover_rate:
                offspring = _blend(rng, first, second, config.blend_alpha)
            else:
                offspring = (first.copy(), second.copy())
            for child in offspring:
                mutated = rng.random(dim) < config.mutation_rate
                child = child + mutated * rng.normal(0, config.mutation_scale,
                                                     dim)
                children.append(np.clip(child, low, high))
        children = np.array(children[:size - config.elitism_count])
        child_costs = _evaluate(cost, children)
        evaluations += len(children)

        population = np.concatenate([elites, children])
        costs = np.concatenate([elite_costs, child_costs])
        best = np.argmin(costs)
        if costs[best] < best_f:
            best_x, best_f = population[best].copy(), costs[best]
        history.append(float(costs[best]))
        logging.debug("GA (seed {}) generation {}: best cost {}"
                      .format(config.seed, generation + 1, costs[best]))

    return OptimizerReport(
        best_params=tuple(float(v) for v in best_x),
        best_cost=float(best_f),
        cost_history=tuple(history),
        evaluations=evaluations,
        converged=True,
        seed=config.seed,
        iterations=config.generations,
        message="completed {} generations".format(config.generations),
    )
