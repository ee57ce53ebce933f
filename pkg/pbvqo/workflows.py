"""End-to-end studies: PBVQO ensembles, duration sweeps, meta-learning
transfers, the three-arm histogram study and the QAOA baseline."""
import dataclasses
import functools
import logging
import numpy as np
import time

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime

from .hamiltonians import (
    HardwareModel, ProblemGraph, ground_energy, mixer_hamiltonian,
    problem_hamiltonian, qaoa_problem_hamiltonian, ring_graph,
)
from .optimizers import GaConfig, bfgs_minimize, ga_minimize
from .pulses import PulseAnsatz
from .records import RunRecord, StudyResult
from .simulator import (
    EvolutionConfig, apply_propagator, energetic_cost, error_rate, evolve,
    expectation, initial_state, pbvqo_schedule, piecewise_energetic_cost,
    plus_state,
)
from .utils import derive_seed, random_pulse_params, wrap_angle


# Meta-learning transfers from an easy problem above this error rate are
# flagged, the transfer is still attempted.
EASY_ERROR_RATE_FLAG = 0.05
MIN_HISTOGRAM_RUNS = 10
HISTOGRAM_ARMS = ("baseline", "meta-bfgs", "meta-ga")


@dataclass(frozen=True)
class PbvqoProblem:
    model: HardwareModel
    graph: ProblemGraph
    ansatz_size: int = 3
    duration: float = 5.0
    evolution: EvolutionConfig = EvolutionConfig()

    def __post_init__(self):
        if self.graph.n_nodes != self.model.n_qubits:
            raise ValueError("Graph of {} nodes on {} qubits"
                             .format(self.graph.n_nodes, self.model.n_qubits))
        if self.ansatz_size < 1:
            raise ValueError("Need at least one pulse term, got {}"
                             .format(self.ansatz_size))
        if not self.duration > 0:
            raise ValueError("Duration must be positive, got {}"
                             .format(self.duration))

    @classmethod
    def ring(cls, n_qubits, duration=5.0, ansatz_size=3, frequency=6.0,
             coupling_bound=1.0, evolution=None):
        """MAX-CUT on the qubit ring itself, with uniform frequencies."""
        return cls(HardwareModel.uniform(n_qubits, frequency, coupling_bound),
                   ring_graph(n_qubits), ansatz_size, duration,
                   EvolutionConfig() if evolution is None else evolution)

    def with_duration(self, duration):
        return dataclasses.replace(self, duration=duration)

    @property
    def hamiltonian(self):
        return problem_hamiltonian(self.graph)

    @property
    def ground_energy(self):
        return ground_energy(self.hamiltonian)

    def ansatz(self, params):
        params = np.asarray(params, dtype=float)
        if params.shape != (2 * self.ansatz_size,):
            raise ValueError("Expected {} pulse parameters, got {}"
                             .format(2 * self.ansatz_size, params.shape))
        return PulseAnsatz.from_vector(params, self.duration)


@dataclass(frozen=True)
class QaoaParams:
    """The QAOA angles, applied as exp(-i beta_j H_mix) exp(-i gamma_j H_p)
    layer after layer."""
    betas: tuple
    gammas: tuple

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "gammas",
                           tuple(float(g) for g in self.gammas))
        if len(self.betas) != len(self.gammas):
            raise ValueError("Got {} betas but {} gammas"
                             .format(len(self.betas), len(self.gammas)))

    @property
    def depth(self):
        return len(self.betas)

    @classmethod
    def from_vector(cls, params):
        """(beta_1..beta_p, gamma_1..gamma_p)"""
        params = np.asarray(params, dtype=float)
        if params.ndim != 1 or len(params) % 2:
            raise ValueError("Expected 2p QAOA parameters, got {}"
                             .format(params.shape))
        depth = len(params) // 2
        return cls(tuple(params[:depth]), tuple(params[depth:]))

    def to_vector(self):
        return np.array(self.betas + self.gammas)


def pbvqo_cost(problem, params):
    """The energy <Psi_f|H_p|Psi_f> reached by the pulse `params` from the
    all-zeros state."""
    state = evolve(initial_state(problem.model.n_qubits), problem.model,
                   problem.ansatz(params), problem.evolution)
    return expectation(state, problem.hamiltonian)


def pbvqo_energetic_cost(problem, params):
    ansatz = problem.ansatz(params)
    return energetic_cost(pbvqo_schedule(problem.model, ansatz),
                          problem.duration, problem.evolution)


def _map_runs(task, arguments, workers=1):
    """Run task(*args) for every tuple of arguments, results in the same
    order as the arguments whatever the completion order."""
    if workers <= 1 or len(arguments) <= 1:
        return [task(*args) for args in arguments]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task, *args) for args in arguments]
        return [future.result() for future in futures]


def _failed_record(run_id, seed, x0, label, duration, start, exc):
    logging.warning("Run {} (seed {}) failed: {}".format(run_id, seed,
                                                        str(exc)))
    return RunRecord(run_id=run_id, seed=seed, initial_params=tuple(x0),
                     label=label, duration=duration, error=str(exc),
                     wall_time=time.time() - start)


def _pbvqo_record(problem, run_id, seed, x0, report, label, start,
                  with_cost=True, provenance=None):
    final = problem.ansatz(report.best_params).wrapped().to_vector()
    e_g = problem.ground_energy
    return RunRecord(
        run_id=run_id,
        seed=seed,
        initial_params=tuple(x0),
        final_params=tuple(final),
        cost_history=report.cost_history,
        final_energy=report.best_cost,
        ground_energy=e_g,
        final_error_rate=error_rate(report.best_cost, e_g),
        energetic_cost=(pbvqo_energetic_cost(problem, final) if with_cost
                        else None),
        converged=report.converged,
        evaluations=report.evaluations,
        label=label,
        duration=problem.duration,
        provenance={} if provenance is None else provenance,
        wall_time=time.time() - start,
    )


def _pbvqo_restart(problem, run_id, seed, options, label, with_cost):
    start = time.time()
    x0 = random_pulse_params(np.random.default_rng(seed), problem.ansatz_size)
    try:
        report = bfgs_minimize(functools.partial(pbvqo_cost, problem), x0,
                               options, seed=seed)
        return _pbvqo_record(problem, run_id, seed, x0, report, label, start,
                             with_cost)
    except Exception as e:
        return _failed_record(run_id, seed, x0, label, problem.duration,
                              start, e)


def _metadata(kind, seed, n_runs, **kwargs):
    metadata = {"kind": kind, "seed": seed, "n_runs": n_runs,
                "started_at": datetime.now().isoformat()}
    metadata.update(kwargs)
    return metadata


def _finish(study):
    study.metadata["finished_at"] = datetime.now().isoformat()
    logging.info("Study '{}' done: {} runs, {} failed, best error rate {}"
                 .format(study.label, len(study.runs), len(study.failures),
                         study.summary.get("best")))
    return study


def run_pbvqo(problem, n_restarts, seed, options=None, workers=1, label=None,
              with_energetic_cost=True):
    """BFGS from `n_restarts` random pulses drawn in the sampling box.

    Restart k is seeded by derive_seed(seed, k). A failing restart is
    recorded with its error and does not stop the study.

    :return: A StudyResult.
    """
    if n_restarts < 1:
        raise ValueError("Need at least one restart, got {}"
                         .format(n_restarts))
    label = "T={:g}".format(problem.duration) if label is None else label
    metadata = _metadata("pbvqo", seed, n_restarts, optimizer="bfgs",
                         duration=problem.duration,
                         n_qubits=problem.model.n_qubits)
    arguments = [(problem, "{}-{:03d}".format(label, k), derive_seed(seed, k),
                  options, label, with_energetic_cost)
                 for k in range(n_restarts)]
    runs = _map_runs(_pbvqo_restart, arguments, workers)
    return _finish(StudyResult(label, tuple(runs), metadata))


def sweep_duration(problem, durations, n_restarts, seed, options=None,
                   workers=1, with_energetic_cost=True):
    """One run_pbvqo ensemble per operation time T.

    Every duration uses the same master seed, hence the same starting
    pulses, so that the ensembles only differ by T.
    """
    durations = list(durations)
    if not durations:
        raise ValueError("Need at least one duration")
    if n_restarts < 1:
        raise ValueError("Need at least one restart, got {}"
                         .format(n_restarts))
    # All the runs of all the durations share the pool
    arguments = []
    for duration in durations:
        timed = problem.with_duration(duration)
        label = "T={:g}".format(duration)
        arguments += [(timed, "{}-{:03d}".format(label, k),
                       derive_seed(seed, k), options, label,
                       with_energetic_cost)
                      for k in range(n_restarts)]
    runs = _map_runs(_pbvqo_restart, arguments, workers)

    studies = []
    for i, duration in enumerate(durations):
        metadata = _metadata("pbvqo", seed, n_restarts, optimizer="bfgs",
                             duration=duration,
                             n_qubits=problem.model.n_qubits)
        chunk = runs[i * n_restarts:(i + 1) * n_restarts]
        studies.append(_finish(StudyResult("T={:g}".format(duration),
                                           tuple(chunk), metadata)))
    return studies


def meta_learn(easy, hard, ga_config, seed, options=None, easy_optimizer="ga",
               allow_other_easy=False, run_id="meta-ga-000", label="meta-ga",
               with_energetic_cost=True):
    """Solve the easy problem globally, then start BFGS on the hard problem
    from the easy optimum.

    :param easy: The easy PbvqoProblem, 2 qubits unless allow_other_easy.
    :param hard: The hard PbvqoProblem, same ansatz size.
    :param ga_config: The GaConfig of the easy search, its seed is replaced
        by `seed`.
    :param seed: Seeds the easy search.
    :param easy_optimizer: "ga", or "bfgs" from a random pulse.

    :return: The hard-problem RunRecord, its provenance holding the easy
        optimizer, parameters and error rate, the hard error rate at the
        transferred point and whether the easy search was flagged.
    """
    if easy.ansatz_size != hard.ansatz_size:
        raise ValueError("Cannot transfer {} pulse terms to an ansatz of {}"
                         .format(easy.ansatz_size, hard.ansatz_size))
    if easy.model.n_qubits != 2 and not allow_other_easy:
        raise ValueError("The easy problem has {} qubits, only the 2-qubit"
                         " problem is allowed".format(easy.model.n_qubits))
    start = time.time()
    easy_cost = functools.partial(pbvqo_cost, easy)
    if easy_optimizer == "ga":
        easy_report = ga_minimize(easy_cost,
                                  dataclasses.replace(ga_config, seed=seed))
    elif easy_optimizer == "bfgs":
        x0 = random_pulse_params(np.random.default_rng(seed),
                                 easy.ansatz_size)
        easy_report = bfgs_minimize(easy_cost, x0, options, seed=seed)
    else:
        raise ValueError("Unknown easy optimizer '{}'".format(easy_optimizer))

    easy_rate = error_rate(easy_report.best_cost, easy.ground_energy)
    flagged = easy_rate >= EASY_ERROR_RATE_FLAG
    if flagged:
        logging.warning("Easy problem only reached R = {} with seed {}, "
                        "transferring anyway".format(easy_rate, seed))

    x0 = np.array(easy_report.best_params)
    report = bfgs_minimize(functools.partial(pbvqo_cost, hard), x0, options,
                           seed=seed)
    provenance = {
        "easy_optimizer": easy_optimizer,
        "easy_n_qubits": easy.model.n_qubits,
        "easy_params": list(easy_report.best_params),
        "easy_error_rate": easy_rate,
        "easy_evaluations": easy_report.evaluations,
        "initial_error_rate": error_rate(report.cost_history[0],
                                         hard.ground_energy),
        "flagged": flagged,
    }
    logging.info("Transfer {} (seed {}): R {} -> {}"
                 .format(run_id, seed, provenance["initial_error_rate"],
                         error_rate(report.best_cost, hard.ground_energy)))
    return _pbvqo_record(hard, run_id, seed, x0, report, label, start,
                         with_energetic_cost, provenance)


def _meta_restart(easy, hard, ga_config, seed, options, easy_optimizer,
                  allow_other_easy, run_id, label, with_cost):
    start = time.time()
    try:
        return meta_learn(easy, hard, ga_config, seed, options,
                          easy_optimizer, allow_other_easy, run_id, label,
                          with_cost)
    except Exception as e:
        return _failed_record(run_id, seed, (), label, hard.duration, start,
                              e)


def run_meta(easy, hard, ga_config, n_transfers, seed, options=None,
             easy_optimizer="ga", allow_other_easy=False, workers=1,
             label=None, with_energetic_cost=True):
    """An ensemble of meta_learn transfers, transfer k seeded by
    derive_seed(seed, k)."""
    if n_transfers < 1:
        raise ValueError("Need at least one transfer, got {}"
                         .format(n_transfers))
    label = "meta-{}".format(easy_optimizer) if label is None else label
    metadata = _metadata("meta", seed, n_transfers, optimizer=easy_optimizer,
                         duration=hard.duration,
                         n_qubits=hard.model.n_qubits,
                         easy_n_qubits=easy.model.n_qubits)
    arguments = [(easy, hard, ga_config, derive_seed(seed, k), options,
                  easy_optimizer, allow_other_easy,
                  "{}-{:03d}".format(label, k), label, with_energetic_cost)
                 for k in range(n_transfers)]
    runs = _map_runs(_meta_restart, arguments, workers)
    return _finish(StudyResult(label, tuple(runs), metadata))


def histogram_study(hard, n_runs, seed, easy=None, ga_config=None,
                    options=None, workers=1, with_energetic_cost=False):
    """The baseline, Meta-BFGS and Meta-GA ensembles on the same problem.

    Run k of every arm uses derive_seed(seed, k). The easy problem defaults
    to the 2-qubit problem on the same hardware parameters.

    :return: (baseline, meta_bfgs, meta_ga) StudyResults.
    """
    if n_runs < MIN_HISTOGRAM_RUNS:
        raise ValueError("The histogram study needs at least {} runs per arm,"
                         " got {}".format(MIN_HISTOGRAM_RUNS, n_runs))
    if easy is None:
        easy = PbvqoProblem.ring(2, hard.duration, hard.ansatz_size,
                                 hard.model.frequencies[0],
                                 hard.model.coupling_bound, hard.evolution)
    if ga_config is None:
        ga_config = GaConfig.for_ansatz(hard.ansatz_size)

    baseline = run_pbvqo(hard, n_runs, seed, options, workers, "baseline",
                         with_energetic_cost)
    meta_bfgs = run_meta(easy, hard, ga_config, n_runs, seed, options, "bfgs",
                         workers=workers, label="meta-bfgs",
                         with_energetic_cost=with_energetic_cost)
    meta_ga = run_meta(easy, hard, ga_config, n_runs, seed, options, "ga",
                       workers=workers, label="meta-ga",
                       with_energetic_cost=with_energetic_cost)
    return baseline, meta_bfgs, meta_ga


def qaoa_state(graph, params):
    """prod_j exp(-i beta_j H_mix) exp(-i gamma_j H_p) |+>^N, with
    H_p = sum Z_i Z_j."""
    state = plus_state(graph.n_nodes)
    problem = qaoa_problem_hamiltonian(graph)
    mixer = mixer_hamiltonian(graph.n_nodes)
    for beta, gamma in zip(params.betas, params.gammas):
        state = apply_propagator(state, problem, gamma)
        state = apply_propagator(state, mixer, beta)
    return state


def qaoa_energy(graph, params):
    """QAOA cost of a parameter vector (betas then gammas)."""
    return expectation(qaoa_state(graph, QaoaParams.from_vector(params)),
                       qaoa_problem_hamiltonian(graph))


def qaoa_params_from_schedule(b_schedule, gamma_schedule, depth, total_time):
    """Digitize an annealing schedule: beta_i = B(i dt) dt and
    gamma_i = Gamma(i dt) dt for i = 1..p, with dt = total_time / p."""
    if depth < 1 or not total_time > 0:
        raise ValueError("Need p >= 1 and a positive total time, got {} and {}"
                         .format(depth, total_time))
    step = total_time / depth
    times = step * np.arange(1, depth + 1)
    return QaoaParams(tuple(b_schedule(t) * step for t in times),
                      tuple(gamma_schedule(t) * step for t in times))


def linear_annealing_params(depth, total_time=None):
    """The digitized linear ramp B(t) = 1 - t/T, Gamma(t) = t/T.

    The total time defaults to p, one unit per layer.
    """
    total_time = float(depth) if total_time is None else total_time
    return qaoa_params_from_schedule(lambda t: 1 - t / total_time,
                                     lambda t: t / total_time, depth,
                                     total_time)


def qaoa_energetic_cost(graph, params, gate_time=1.0):
    """Time-averaged Frobenius norm of the gate Hamiltonians.

    Every layer exp(-i theta H) runs as theta H / tau during tau, with
    theta wrapped to (-pi, pi]. The problem gate comes first, then the
    mixer gate.
    """
    if not gate_time > 0:
        raise ValueError("Gate time must be positive, got {}"
                         .format(gate_time))
    problem = qaoa_problem_hamiltonian(graph).matrix
    mixer = mixer_hamiltonian(graph.n_nodes).matrix
    segments = []
    for beta, gamma in zip(params.betas, params.gammas):
        segments.append((wrap_angle(gamma) / gate_time * problem, gate_time))
        segments.append((wrap_angle(beta) / gate_time * mixer, gate_time))
    return piecewise_energetic_cost(segments)


def _qaoa_restart(graph, depth, run_id, seed, options, x0, gate_time, label,
                  with_cost):
    start = time.time()
    if x0 is None:
        x0 = np.random.default_rng(seed).uniform(0, np.pi, 2 * depth)
    try:
        report = bfgs_minimize(functools.partial(qaoa_energy, graph), x0,
                               options, seed=seed)
        e_g = ground_energy(qaoa_problem_hamiltonian(graph))
        final = QaoaParams.from_vector(report.best_params)
        return RunRecord(
            run_id=run_id,
            seed=seed,
            initial_params=tuple(x0),
            final_params=report.best_params,
            cost_history=report.cost_history,
            final_energy=report.best_cost,
            ground_energy=e_g,
            final_error_rate=error_rate(report.best_cost, e_g),
            energetic_cost=(qaoa_energetic_cost(graph, final, gate_time)
                            if with_cost else None),
            converged=report.converged,
            evaluations=report.evaluations,
            label=label,
            wall_time=time.time() - start,
        )
    except Exception as e:
        return _failed_record(run_id, seed, x0, label, None, start, e)


def run_qaoa(graph, depth, n_restarts, seed, options=None, workers=1,
             init="random", gate_time=1.0, label="qaoa",
             with_energetic_cost=True):
    """BFGS on the QAOA energy from `n_restarts` starting angles.

    Starting angles are uniform in [0, pi). With init="annealing" the first
    restart starts from the digitized linear annealing schedule instead.
    """
    if depth < 1:
        raise ValueError("QAOA needs p >= 1, got {}".format(depth))
    if n_restarts < 1:
        raise ValueError("Need at least one restart, got {}"
                         .format(n_restarts))
    if init not in ("random", "annealing"):
        raise ValueError("Unknown QAOA initialization '{}'".format(init))
    metadata = _metadata("qaoa", seed, n_restarts, optimizer="bfgs",
                         depth=depth, init=init, gate_time=gate_time,
                         n_qubits=graph.n_nodes)
    arguments = []
    for k in range(n_restarts):
        x0 = None
        if init == "annealing" and k == 0:
            x0 = linear_annealing_params(depth).to_vector()
        arguments.append((graph, depth, "{}-{:03d}".format(label, k),
                          derive_seed(seed, k), options, x0, gate_time, label,
                          with_energetic_cost))
    runs = _map_runs(_qaoa_restart, arguments, workers)
    return _finish(StudyResult(label, tuple(runs), metadata))


def compare_energetic_cost(pbvqo_result, qaoa_result):
    """Ensemble averages (C_pbvqo, C_qaoa) over the successful runs."""
    averages = []
    for study in (pbvqo_result, qaoa_result):
        costs = [run.energetic_cost for run in study.runs if not run.failed]
        if not costs:
            raise ValueError("Study '{}' has no successful run"
                             .format(study.label))
        if any(cost is None for cost in costs):
            raise ValueError("Study '{}' was run without energetic costs"
                             .format(study.label))
        averages.append(float(np.mean(costs)))
    return tuple(averages)


__all__ = [
    "PbvqoProblem",
    "QaoaParams",
    "pbvqo_cost",
    "pbvqo_energetic_cost",
    "run_pbvqo",
    "sweep_duration",
    "meta_learn",
    "run_meta",
    "histogram_study",
    "qaoa_state",
    "qaoa_energy",
    "run_qaoa",
    "qaoa_params_from_schedule",
    "linear_annealing_params",
    "qaoa_energetic_cost",
    "compare_energetic_cost",
]
