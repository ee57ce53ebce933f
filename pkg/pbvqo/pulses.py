import numpy as np

from dataclasses import dataclass


# Below this |cos(flux)| the SQUID coupling diverges.
COS_FLUX_TOL = 1e-9
BOUND_RTOL = 1e-12


@dataclass(frozen=True)
class PulseAnsatz:
    """The trigonometric pulse series

        P(t) = sum_i A_i sin[(2i - 1) pi t + phi_i],  i = 1..n

    over the operation time [0, T].
    """
    amplitudes: tuple
    phases: tuple
    duration: float

    def __post_init__(self):
        amplitudes = tuple(float(a) for a in self.amplitudes)
        phases = tuple(float(p) for p in self.phases)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "duration", float(self.duration))
        if len(amplitudes) == 0 or len(amplitudes) != len(phases):
            raise ValueError("Need as many amplitudes as phases (and at least"
                             " one), got {} and {}"
                             .format(len(amplitudes), len(phases)))
        if not self.duration > 0:
            raise ValueError("Pulse duration must be positive, got {}"
                             .format(self.duration))

    @property
    def n_terms(self):
        return len(self.amplitudes)

    @property
    def angular_frequencies(self):
        return (2 * np.arange(1, self.n_terms + 1) - 1) * np.pi

    @classmethod
    def from_vector(cls, params, duration):
        """Build the ansatz from (A_1..A_n, phi_1..phi_n)."""
        params = np.asarray(params, dtype=float)
        if params.ndim != 1 or len(params) % 2 or len(params) == 0:
            raise ValueError("Expected 2n pulse parameters, got {}"
                             .format(params.shape))
        n = len(params) // 2
        return cls(tuple(params[:n]), tuple(params[n:]), duration)

    def to_vector(self):
        return np.array(self.amplitudes + self.phases)

    def wrapped(self):
        """The same pulse, with the phases reported in [0, 2pi)."""
        return PulseAnsatz(self.amplitudes,
                           tuple(np.mod(self.phases, 2 * np.pi)),
                           self.duration)


def pulse_values(ansatz, times):
    """Vectorized raw pulse P(t) on an array of times within [0, T]."""
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(times > ansatz.duration):
        raise ValueError("Pulse evaluated outside [0, {}]"
                         .format(ansatz.duration))
    args = (np.multiply.outer(times, ansatz.angular_frequencies)
            + np.array(ansatz.phases))
    return np.sin(args) @ np.array(ansatz.amplitudes)


def evaluate_pulse(ansatz, t):
    """The raw (unfiltered) pulse value P(t)."""
    return float(pulse_values(ansatz, t))


def filter_pulse(p_value, bound):
    """The hardware filter F[P]: G when -G <= P < G, |P| otherwise.

    Both branches agree at P = G, so this is max(G, |P|). Works on arrays.
    """
    if not bound > 0:
        raise ValueError("The filter bound must be positive, got {}"
                         .format(bound))
    result = np.maximum(bound, np.abs(p_value))
    return float(result) if np.ndim(result) == 0 else result


@dataclass(frozen=True)
class CircuitParams:
    """Two charge qubits coupled through a grounded SQUID.

    All quantities are in dimensionless consistent units.
    """
    coupler_capacitance: float
    qubit_josephson_energies: tuple
    squid_josephson_energy: float
    qubit_total_capacitances: tuple
    dc_flux: float = 0.0

    def __post_init__(self):
        energies = tuple(float(e) for e in self.qubit_josephson_energies)
        capacitances = tuple(float(c) for c in self.qubit_total_capacitances)
        object.__setattr__(self, "qubit_josephson_energies", energies)
        object.__setattr__(self, "qubit_total_capacitances", capacitances)
        if len(energies) != 2 or len(capacitances) != 2:
            raise ValueError("The coupler joins exactly two qubits")
        positives = (self.coupler_capacitance, self.squid_josephson_energy)
        if min(positives + energies + capacitances) <= 0:
            raise ValueError("Energies and capacitances must be strictly"
                             " positive: {}".format(self))

    @classmethod
    def with_coupling_bound(cls, bound, coupler_capacitance=1.0,
                            qubit_josephson_energies=(8.0, 8.0),
                            qubit_total_capacitances=(1.0, 1.0),
                            dc_flux=0.0):
        """Solve for the SQUID Josephson energy giving coupling bound G."""
        if not bound > 0:
            raise ValueError("The coupling bound must be positive, got {}"
                             .format(bound))
        c_c = coupler_capacitance
        e_j1, e_j2 = qubit_josephson_energies
        c_1, c_2 = qubit_total_capacitances
        e_js = c_c ** 2 * e_j1 * e_j2 / (8 * bound * (c_1 + c_c) * (c_2 + c_c))
        return cls(coupler_capacitance, qubit_josephson_energies, e_js,
                   qubit_total_capacitances, dc_flux)

    def _numerator(self):
        """C_c^2 E_J1 E_J2 / [(C_1 + C_c)(C_2 + C_c)]"""
        c_c = self.coupler_capacitance
        e_j1, e_j2 = self.qubit_josephson_energies
        c_1, c_2 = self.qubit_total_capacitances
        return c_c ** 2 * e_j1 * e_j2 / ((c_1 + c_c) * (c_2 + c_c))


@dataclass(frozen=True)
class RwaDrive:
    """Two-tone AC flux A_1 cos(v_1 t + phi_1) + A_2 cos(v_2 t + phi_2).

    Keeping |A_1|, |A_2| small against the DC flux is up to the caller.
    """
    amplitudes: tuple
    phases: tuple
    frequencies: tuple = (0.0, 0.0)


def _checked_cos(flux):
    cos = np.cos(flux)
    if abs(cos) <= COS_FLUX_TOL:
        raise ValueError("Flux {} is too close to +-pi/2, the coupling"
                         " diverges".format(flux))
    return cos


def coupling_bound(params):
    """G = C_c^2 E_J1 E_J2 / [8 E_Js (C_1 + C_c)(C_2 + C_c)]"""
    return params._numerator() / (8 * params.squid_josephson_energy)


def coupling_strength(params, phi_ext):
    """The SQUID-mediated coupling g[phi_ext].

    Uses the tunable Josephson energy E_Js^eff = 2 E_Js |cos(phi_ext)|, so
    that g / 4 = G / |cos(phi_ext)|.
    """
    effective = 2 * params.squid_josephson_energy * abs(_checked_cos(phi_ext))
    return params._numerator() / effective


def flux_for_coupling(params, filtered_value):
    """The external flux realizing a filtered pulse value, g / 4 = F.

    :return: arccos(G / F) on the principal branch [0, pi/2).
    """
    return float(flux_trace(params, filtered_value))


def flux_trace(params, filtered_values):
    """Vectorized flux_for_coupling over an array of filtered values.

    Values within round-off of G map to zero flux.
    """
    filtered_values = np.asarray(filtered_values, dtype=float)
    bound = coupling_bound(params)
    if np.any(filtered_values < bound * (1 - BOUND_RTOL)):
        raise ValueError("Coupling {} is below the reachable bound G = {}"
                         .format(np.min(filtered_values), bound))
    ratio = np.minimum(1.0, bound / filtered_values)
    return np.where(ratio >= 1 - BOUND_RTOL, 0.0, np.arccos(ratio))


def coupling_split(params):
    """The always-on and tunable parts (g_0, g_1) around the DC flux.

    g_0 uses the DC Josephson energy 2 E_Js |cos(phi_DC)| and
    g_1 = g_0 tan(phi_DC).
    """
    cos = _checked_cos(params.dc_flux)
    dc_energy = 2 * params.squid_josephson_energy * abs(cos)
    g0 = params._numerator() / (4 * dc_energy)
    return g0, g0 * np.sin(params.dc_flux) / cos


def rwa_coefficients(drive):
    """(M+, M-, N+, N-) of the effective interaction after the RWA.

    M+- = A_1 cos(phi_1) +- A_2 cos(phi_2),
    N+- = A_1 sin(phi_1) +- A_2 sin(phi_2).
    """
    a_1, a_2 = drive.amplitudes
    phi_1, phi_2 = drive.phases
    m = (a_1 * np.cos(phi_1), a_2 * np.cos(phi_2))
    n = (a_1 * np.sin(phi_1), a_2 * np.sin(phi_2))
    return m[0] + m[1], m[0] - m[1], n[0] + n[1], n[0] - n[1]


def xx_gate_strength(params, amplitude):
    """The XX coefficient g_1 A_1 / 2 left when phi_1 = phi_2 = 0 and
    A_1 = -A_2."""
    _, g1 = coupling_split(params)
    return g1 * amplitude / 2
