"""
Oracles and reference values shared by the tests. Oracles are computed the
slow and obvious way, independently of the package code they check.
"""
import itertools
import json
import numpy as np
import os

from scipy.linalg import expm


TIMEOUT = int(os.getenv("TIMEOUT", 600))
REPRODUCE = os.getenv("PBVQO_REPRODUCE", "0") == "1"
WORKERS = int(os.getenv("PBVQO_TEST_WORKERS", 1))

# Published optimal pulses, amplitudes then phases, T = 5, omega = 6, G = 1.
# The 8-qubit baseline optimum
RING8_BASELINE_PARAMS = (2.017, 0.644, 1.384, -0.141, -0.596, -0.408)
# The 2-qubit genetic algorithm optimum, used as the transferred start
RING2_GA_PARAMS = (0.307, 0.491, 4.202, 3.798, 3.253, 3.441)
# The 8-qubit optimum reached from the transferred start
RING8_META_PARAMS = (-1.668, 4.560, 6.861, 3.456, 3.919, 5.113)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def brute_force_ground_energy(graph):
    """min over +-1 spins of sum_edges s_i s_j, which is the ground energy of
    both the XX and the ZZ problem Hamiltonians."""
    return min(
        sum(spins[i] * spins[j] for i, j in graph.edges)
        for spins in itertools.product((1, -1), repeat=graph.n_nodes)
    )


def embed(n_qubits, qubit, op):
    """op on `qubit` (qubit 0 is the leftmost factor), identity elsewhere."""
    result = np.eye(1, dtype=complex)
    for q in range(n_qubits):
        result = np.kron(result, op if q == qubit else np.eye(2))
    return result


def exact_constant_evolution(hamiltonian, duration, amplitudes):
    return expm(-1j * duration * hamiltonian) @ amplitudes


def random_state(n_qubits, seed):
    rng = np.random.default_rng(seed)
    amplitudes = rng.normal(size=2 ** n_qubits) \
        + 1j * rng.normal(size=2 ** n_qubits)
    return amplitudes / np.linalg.norm(amplitudes)


def write_config(filename, document):
    with open(filename, "w") as f:
        json.dump(document, f, indent=2)
    return filename


def read_lines(filename):
    with open(filename) as f:
        return f.read().splitlines()
