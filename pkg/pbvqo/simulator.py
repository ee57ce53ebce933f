import functools
import logging
import numpy as np

from dataclasses import dataclass
from scipy.integrate import trapezoid
from scipy.sparse.linalg import expm_multiply

from .hamiltonians import (
    HermitianOperator, coupling_operator, drift_hamiltonian, HADAMARD,
)
from .pulses import filter_pulse, pulse_values


NORM_TOL = 1e-9
IMAG_TOL = 1e-10
# Up to this dimension all step propagators are diagonalized at once.
BATCHED_MAX_DIM = 32
DEFAULT_STEPS = 1000


class StateVector:
    """A normalized pure state of N qubits, qubit 0 being the MSB."""
    def __init__(self, n_qubits, amplitudes):
        """
        :param n_qubits: The number of qubits (N).
        :param amplitudes: 2^N complex amplitudes of unit norm.
        """
        amplitudes = np.array(amplitudes, dtype=complex)
        if amplitudes.shape != (2 ** n_qubits,):
            raise ValueError("Expected {} amplitudes for {} qubits, got shape"
                             " {}".format(2 ** n_qubits, n_qubits,
                                          amplitudes.shape))
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1) > NORM_TOL:
            raise ValueError("State is not normalized (norm {})".format(norm))
        amplitudes.setflags(write=False)
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    @classmethod
    def from_amplitudes(cls, amplitudes):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        return cls(len(amplitudes).bit_length() - 1, amplitudes)

    @property
    def dim(self):
        return len(self.amplitudes)

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class EvolutionConfig:
    """Time stepping of the evolution.

    With no time_step the duration is split in DEFAULT_STEPS equal steps.
    Otherwise T / dt is rounded up and the last step is shortened.
    """
    time_step: float = None
    tolerance: float = 1e-4

    def __post_init__(self):
        if self.time_step is not None and not self.time_step > 0:
            raise ValueError("Time step must be positive, got {}"
                             .format(self.time_step))
        if not self.tolerance > 0:
            raise ValueError("Tolerance must be positive, got {}"
                             .format(self.tolerance))

    def grid(self, duration):
        """The step boundaries 0 = t_0 < ... < t_n = T."""
        if not duration > 0:
            raise ValueError("Duration must be positive, got {}"
                             .format(duration))
        if self.time_step is None:
            return np.linspace(0, duration, DEFAULT_STEPS + 1)
        n_steps = max(1, int(np.ceil(duration / self.time_step - 1e-9)))
        return np.append(np.arange(n_steps) * self.time_step, duration)

    def refined(self, duration):
        """The same stepping with half the step size."""
        return EvolutionConfig(np.diff(self.grid(duration))[0] / 2,
                               self.tolerance)


def initial_state(n_qubits):
    """|0>^N, an eigenstate of the drift."""
    amplitudes = np.zeros(2 ** n_qubits, dtype=complex)
    amplitudes[0] = 1
    return StateVector(n_qubits, amplitudes)


def plus_state(n_qubits):
    """|+>^N, the top eigenstate of the transverse mixer."""
    dim = 2 ** n_qubits
    return StateVector(n_qubits, np.full(dim, 1 / np.sqrt(dim), dtype=complex))


def apply_hadamards(state):
    """Rotate every qubit by a Hadamard gate, axis by axis."""
    psi = state.amplitudes.reshape((2,) * state.n_qubits)
    for axis in range(state.n_qubits):
        psi = np.moveaxis(np.tensordot(HADAMARD, psi, axes=([1], [axis])),
                          0, axis)
    return StateVector(state.n_qubits, psi.reshape(-1))


def apply_propagator(state, op, angle):
    """exp(-i * angle * op) |state>, exact through the cached spectrum."""
    _check_dims(state, op)
    if op.is_diagonal:
        psi = np.exp(-1j * angle * np.real(np.diag(op.matrix))) \
            * state.amplitudes
    else:
        values, vectors = op.spectrum
        psi = vectors @ (np.exp(-1j * angle * values)
                         * (vectors.conj().T @ state.amplitudes))
    return StateVector(state.n_qubits, psi)


def step_couplings(model, ansatz, grid):
    """Filtered pulse frozen at the midpoint of every step."""
    midpoints = (grid[1:] + grid[:-1]) / 2
    couplings = filter_pulse(pulse_values(ansatz, midpoints),
                             model.coupling_bound)
    if not np.all(np.isfinite(couplings)):
        raise ValueError("Non-finite pulse values for {}".format(ansatz))
    return np.atleast_1d(couplings)


def evolve(state, model, ansatz, config=None):
    """Propagate a state from t = 0 to T under

        H(t) = sum_j (w_j / 2) Z_j + F[P(t)] sum_j Y_j Y_{j+1}.

    Each step [t, t + dt] freezes the Hamiltonian at F[P(t + dt / 2)] and
    applies the exact step exponential exp(-i H dt).

    :param state: The StateVector at t = 0.
    :param model: The HardwareModel (frequencies, ring, bound G).
    :param ansatz: The PulseAnsatz, its duration is T.
    :param config: The EvolutionConfig, default dt = T / 1000.

    :return: The StateVector at t = T.
    """
    config = EvolutionConfig() if config is None else config
    if state.n_qubits != model.n_qubits:
        raise ValueError("State has {} qubits but the model has {}"
                         .format(state.n_qubits, model.n_qubits))
    grid = config.grid(ansatz.duration)
    steps = np.diff(grid)
    couplings = step_couplings(model, ansatz, grid)

    drift = drift_hamiltonian(model).matrix
    coupling = coupling_operator(model).matrix
    if model.dim <= BATCHED_MAX_DIM:
        psi = _total_propagator(drift, coupling, couplings, steps) \
            @ state.amplitudes
    else:
        psi = np.array(state.amplitudes)
        regular = np.isclose(steps, steps[0], rtol=1e-12, atol=0)
        for f, dt, is_regular in zip(couplings, steps, regular):
            if f == model.coupling_bound and is_regular:
                # Clamped at the floor: the same step propagator every time
                psi = _floor_propagator(model, steps[0]) @ psi
            else:
                psi = expm_multiply(-1j * dt * (drift + f * coupling), psi)
    return StateVector(state.n_qubits, psi)


def _total_propagator(drift, coupling, couplings, steps):
    """Ordered product of all step exponentials, diagonalized in one batch
    and multiplied pairwise."""
    hamiltonians = drift[None, :, :] + couplings[:, None, None] * coupling
    values, vectors = np.linalg.eigh(hamiltonians)
    phases = np.exp(-1j * values * steps[:, None])
    unitaries = np.einsum("kij,kj,klj->kil", vectors, phases, vectors.conj())
    while len(unitaries) > 1:
        if len(unitaries) % 2:
            unitaries = np.concatenate([unitaries,
                                        np.eye(len(drift))[None, :, :]])
        # Later steps act from the left
        unitaries = unitaries[1::2] @ unitaries[0::2]
    return unitaries[0]


@functools.lru_cache(maxsize=8)
def _floor_propagator(model, dt):
    op = drift_hamiltonian(model) + coupling_operator(model) \
        * model.coupling_bound
    return op.propagator(dt)


def expectation(state, op):
    """The real energy <psi|O|psi>."""
    _check_dims(state, op)
    value = np.vdot(state.amplitudes, op.matrix @ state.amplitudes)
    if abs(value.imag) > IMAG_TOL:
        raise ValueError("Expectation has an imaginary part {}"
                         .format(value.imag))
    return float(value.real)


def error_rate(energy, ground_energy):
    """R = |(E - E_g) / E_g|, the relative energy error."""
    if ground_energy == 0:
        raise ValueError("The error rate is undefined for a zero ground"
                         " energy")
    return abs((energy - ground_energy) / ground_energy)


def sample_x_basis(state, shots, seed):
    """Measure every qubit along x.

    Bit 0 means the +1 eigenstate of X. The random stream only depends on
    the seed.

    :return: A list of bitstrings, qubit 0 first.
    """
    if shots < 1:
        raise ValueError("Need at least one shot, got {}".format(shots))
    probabilities = apply_hadamards(state).probabilities()
    probabilities /= probabilities.sum()
    rng = np.random.default_rng(seed)
    outcomes = rng.choice(len(probabilities), size=shots, p=probabilities)
    return [format(int(k), "0{}b".format(state.n_qubits)) for k in outcomes]


def cut_value(bitstring, graph):
    """Number of edges whose endpoints fall on different sides."""
    bits = [int(b) for b in bitstring]
    if len(bits) != graph.n_nodes:
        raise ValueError("Bitstring of length {} for a graph of {} nodes"
                         .format(len(bits), graph.n_nodes))
    return sum(bits[i] != bits[j] for i, j in graph.edges)


def pbvqo_schedule(model, ansatz):
    """The total Hamiltonian t -> drift + F[P(t)] * coupling, as a dense
    matrix."""
    drift = drift_hamiltonian(model).matrix
    coupling = coupling_operator(model).matrix

    def hamiltonian(t):
        return drift + filter_pulse(pulse_values(ansatz, t),
                                    model.coupling_bound) * coupling

    return hamiltonian


def energetic_cost(schedule, duration, config=None, max_refinements=6):
    """The time-averaged Frobenius norm (1/T) int_0^T ||H(t)|| dt.

    Composite trapezoidal rule on the evolution grid, halving the step until
    two successive estimates agree within the config tolerance.

    :param schedule: A callable t -> HermitianOperator (or matrix).
    :param duration: T.
    :param config: The EvolutionConfig giving the grid and tolerance.
    """
    config = EvolutionConfig() if config is None else config

    def estimate(grid):
        norms = [np.linalg.norm(_as_matrix(schedule(t))) for t in grid]
        return trapezoid(norms, grid) / duration

    cost = estimate(config.grid(duration))
    for _ in range(max_refinements):
        config = config.refined(duration)
        refined = estimate(config.grid(duration))
        converged = abs(refined - cost) <= config.tolerance
        cost = refined
        if converged:
            return float(cost)
    logging.warning("Energetic cost not converged within {} after {}"
                    " refinements".format(config.tolerance, max_refinements))
    return float(cost)


def piecewise_energetic_cost(segments):
    """Exact time-average of ||H_k|| over piecewise-constant windows.

    :param segments: A list of (Hamiltonian, window duration).
    """
    total = sum(duration for _, duration in segments)
    if not total > 0:
        raise ValueError("Segments must span a positive time")
    return float(sum(np.linalg.norm(_as_matrix(h)) * duration
                     for h, duration in segments) / total)


def _as_matrix(op):
    return op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)


def _check_dims(state, op):
    if state.dim != op.dim:
        raise ValueError("State of dimension {} against an operator of"
                         " dimension {}".format(state.dim, op.dim))
