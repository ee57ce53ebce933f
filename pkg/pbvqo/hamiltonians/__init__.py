import functools
import numpy as np
import os

from dataclasses import dataclass


# Dense 2^N matrices: beyond this the memory cost is no longer reasonable.
MAX_QUBITS = int(os.getenv("PBVQO_MAX_QUBITS", 14))
HERMITICITY_TOL = 1e-12

PAULIS = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def check_dimension(n_qubits):
    """Refuse to build operators whose dense form would not fit.

    :param n_qubits: The number of qubits (N).

    :return: The Hilbert space dimension 2^N.
    """
    if n_qubits < 1:
        raise ValueError("Need at least one qubit, got {}".format(n_qubits))
    if n_qubits > MAX_QUBITS:
        raise ValueError("{} qubits exceed the dense dimension cap of {}"
                         " qubits (PBVQO_MAX_QUBITS)"
                         .format(n_qubits, MAX_QUBITS))
    return 2 ** n_qubits


def ring_edges(n_qubits):
    """The nearest-neighbour edges of an N-cycle.

    For N = 2 the cycle degenerates to the single edge (0, 1), and a single
    qubit has no edge at all.
    """
    if n_qubits < 2:
        return ()
    if n_qubits == 2:
        return ((0, 1),)
    return tuple(tuple(sorted((j, (j + 1) % n_qubits)))
                 for j in range(n_qubits))


class HermitianOperator:
    """A dense Hermitian matrix acting on N qubits.

    The matrix is copied and made read-only, so operators can be shared
    freely (and cached) between workers.
    """
    def __init__(self, matrix, tol=HERMITICITY_TOL):
        """
        :param matrix: A square complex array of side 2^N.
        :param tol: Absolute tolerance of the Hermiticity check.
        """
        matrix = np.array(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("Operator must be a square matrix, got shape {}"
                             .format(matrix.shape))
        dim = matrix.shape[0]
        n_qubits = dim.bit_length() - 1
        if dim < 2 or 2 ** n_qubits != dim:
            raise ValueError("Operator dimension {} is not a power of two"
                             .format(dim))
        deviation = np.max(np.abs(matrix - matrix.conj().T))
        if deviation > tol:
            raise ValueError("Operator is not Hermitian (max deviation {})"
                             .format(deviation))
        matrix.setflags(write=False)
        self.matrix = matrix
        self.dim = dim
        self.n_qubits = n_qubits
        self._spectrum = None

    def __add__(self, other):
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("Cannot add operators of dimension {} and {}"
                             .format(self.dim, other.dim))
        return HermitianOperator(self.matrix + other.matrix)

    def __mul__(self, scalar):
        if not np.isreal(scalar):
            raise ValueError("Only real scalars keep an operator Hermitian")
        return HermitianOperator(float(np.real(scalar)) * self.matrix)

    __rmul__ = __mul__

    def __repr__(self):
        return "HermitianOperator(n_qubits={})".format(self.n_qubits)

    @property
    def is_diagonal(self):
        return not np.any(self.matrix - np.diag(np.diag(self.matrix)))

    @property
    def trace(self):
        return float(np.real(np.trace(self.matrix)))

    def frobenius_norm(self):
        return float(np.linalg.norm(self.matrix))

    @property
    def spectrum(self):
        """The eigenvalues (ascending) and eigenvectors, computed once."""
        if self._spectrum is None:
            if self.is_diagonal:
                values = np.real(np.diag(self.matrix)).copy()
                order = np.argsort(values, kind="stable")
                vectors = np.eye(self.dim, dtype=complex)[:, order]
                values = values[order]
            else:
                values, vectors = np.linalg.eigh(self.matrix)
            values.setflags(write=False)
            vectors.setflags(write=False)
            self._spectrum = (values, vectors)
        return self._spectrum

    def eigenvalues(self):
        return self.spectrum[0]

    def propagator(self, angle):
        """The unitary exp(-i * angle * H), exact up to round-off."""
        values, vectors = self.spectrum
        return (vectors * np.exp(-1j * angle * values)) @ vectors.conj().T


@dataclass(frozen=True)
class ProblemGraph:
    """A MAX-CUT instance which embeds into the qubit ring.

    Edges are stored as sorted pairs. Every node has degree 2 from three
    nodes on, the two-node problem is a single edge.
    """
    n_nodes: int
    edges: tuple

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("A graph needs at least one node, got {}"
                             .format(self.n_nodes))
        edges = tuple(tuple(sorted((int(i), int(j)))) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        for i, j in edges:
            if i == j:
                raise ValueError("Self-loop on node {}".format(i))
            if not 0 <= i < self.n_nodes or not 0 <= j < self.n_nodes:
                raise ValueError("Edge ({}, {}) references a node outside"
                                 " [0, {})".format(i, j, self.n_nodes))
        if len(set(edges)) != len(edges):
            raise ValueError("Duplicate edges in {}".format(edges))
        if self.n_nodes == 2 and len(edges) != 1:
            raise ValueError("The two-node problem is a single edge, got {}"
                             .format(edges))
        if self.n_nodes >= 3:
            degrees = np.zeros(self.n_nodes, dtype=int)
            for i, j in edges:
                degrees[i] += 1
                degrees[j] += 1
            if np.any(degrees != 2):
                raise ValueError("Graph is not 2-regular, degrees are {}"
                                 .format(degrees.tolist()))


def ring_graph(n_nodes):
    return ProblemGraph(n_nodes, ring_edges(n_nodes))


@dataclass(frozen=True)
class HardwareModel:
    """The driven spin ring: qubit frequencies and the coupling floor G."""
    n_qubits: int
    frequencies: tuple
    coupling_bound: float = 1.0

    def __post_init__(self):
        check_dimension(self.n_qubits)
        frequencies = tuple(float(w) for w in self.frequencies)
        object.__setattr__(self, "frequencies", frequencies)
        object.__setattr__(self, "coupling_bound", float(self.coupling_bound))
        if len(frequencies) != self.n_qubits:
            raise ValueError("Expected {} frequencies, got {}"
                             .format(self.n_qubits, len(frequencies)))
        if not np.all(np.isfinite(frequencies)):
            raise ValueError("Frequencies must be finite: {}"
                             .format(frequencies))
        if not self.coupling_bound > 0:
            raise ValueError("The coupling bound G must be positive, got {}"
                             .format(self.coupling_bound))

    @classmethod
    def uniform(cls, n_qubits, frequency=6.0, coupling_bound=1.0):
        return cls(n_qubits, (frequency,) * n_qubits, coupling_bound)

    @property
    def topology(self):
        return ring_edges(self.n_qubits)

    @property
    def dim(self):
        return 2 ** self.n_qubits


def pauli_string(n_qubits, factors):
    """Kronecker product of single-qubit Paulis, identity elsewhere.

    Qubit 0 is the most significant bit of the basis index.

    :param n_qubits: The number of qubits.
    :param factors: A dict {qubit: "x" | "y" | "z"}.

    :return: The dense 2^N x 2^N matrix.
    """
    check_dimension(n_qubits)
    for qubit, name in factors.items():
        if not 0 <= qubit < n_qubits:
            raise ValueError("No qubit {} among {}".format(qubit, n_qubits))
        if name not in PAULIS:
            raise ValueError("Unknown Pauli '{}'".format(name))
    return functools.reduce(np.kron, [PAULIS[factors.get(q, "i")]
                                      for q in range(n_qubits)])


def two_body_sum(n_qubits, edges, first, second):
    """Sum of first_i second_j over the edges."""
    matrix = np.zeros((2 ** n_qubits, 2 ** n_qubits), dtype=complex)
    for i, j in edges:
        matrix += pauli_string(n_qubits, {i: first, j: second})
    return matrix


@functools.lru_cache(maxsize=32)
def drift_hamiltonian(model):
    """The always-on local term sum_j (w_j / 2) Z_j.

    It is diagonal in the computational basis, so we build the diagonal
    directly.
    """
    bits = _basis_bits(model.n_qubits)
    # Z eigenvalue is +1 on |0> and -1 on |1>
    diagonal = (1 - 2 * bits) @ (np.array(model.frequencies) / 2)
    return HermitianOperator(np.diag(diagonal.astype(complex)))


@functools.lru_cache(maxsize=32)
def coupling_operator(model):
    """Sum of Y_j Y_{j+1} over the hardware ring."""
    return HermitianOperator(two_body_sum(model.n_qubits, model.topology,
                                          "y", "y"))


@functools.lru_cache(maxsize=32)
def problem_hamiltonian(graph):
    """The MAX-CUT Hamiltonian in the x basis, sum over edges of X_i X_j."""
    check_dimension(graph.n_nodes)
    return HermitianOperator(two_body_sum(graph.n_nodes, graph.edges,
                                          "x", "x"))


@functools.lru_cache(maxsize=32)
def qaoa_problem_hamiltonian(graph):
    """The MAX-CUT Hamiltonian in the z basis, sum over edges of Z_i Z_j.

    Diagonal: +1 per edge whose endpoints carry equal bits, -1 otherwise.
    """
    check_dimension(graph.n_nodes)
    bits = _basis_bits(graph.n_nodes)
    diagonal = np.zeros(2 ** graph.n_nodes)
    for i, j in graph.edges:
        diagonal += 1 - 2 * (bits[:, i] ^ bits[:, j])
    return HermitianOperator(np.diag(diagonal.astype(complex)))


@functools.lru_cache(maxsize=32)
def mixer_hamiltonian(n_qubits):
    """The transverse mixer sum_j X_j, with |+>^N as top eigenstate."""
    check_dimension(n_qubits)
    matrix = sum(pauli_string(n_qubits, {j: "x"}) for j in range(n_qubits))
    return HermitianOperator(matrix)


def rwa_hamiltonian(g1, m_plus, m_minus, n_plus, n_minus):
    """The effective two-qubit interaction left by the rotating wave
    approximation of a two-tone AC flux.

    :return: (g1 / 4)(M- XX + M+ YY - N+ XY + N- YX).
    """
    matrix = (m_minus * pauli_string(2, {0: "x", 1: "x"})
              + m_plus * pauli_string(2, {0: "y", 1: "y"})
              - n_plus * pauli_string(2, {0: "x", 1: "y"})
              + n_minus * pauli_string(2, {0: "y", 1: "x"}))
    return HermitianOperator(g1 / 4 * matrix)


def hadamard_transform(n_qubits):
    check_dimension(n_qubits)
    return functools.reduce(np.kron, [HADAMARD] * n_qubits)


def ground_energy(op):
    """The smallest eigenvalue E_g of a Hermitian operator.

    :param op: A HermitianOperator, or a raw matrix which is then checked.
    """
    if not isinstance(op, HermitianOperator):
        op = HermitianOperator(op)
    return float(op.eigenvalues()[0])


def _basis_bits(n_qubits):
    """Row k holds the bits of basis index k, qubit 0 first (MSB)."""
    indices = np.arange(2 ** n_qubits)
    shifts = np.arange(n_qubits - 1, -1, -1)
    return (indices[:, None] >> shifts[None, :]) & 1


__all__ = [
    "HermitianOperator",
    "HardwareModel",
    "ProblemGraph",
    "ring_graph",
    "ring_edges",
    "pauli_string",
    "drift_hamiltonian",
    "coupling_operator",
    "problem_hamiltonian",
    "qaoa_problem_hamiltonian",
    "mixer_hamiltonian",
    "rwa_hamiltonian",
    "hadamard_transform",
    "ground_energy",
]
