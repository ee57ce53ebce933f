import json
import math
import numbers
import os

from dataclasses import dataclass, field

from .hamiltonians import MAX_QUBITS, HardwareModel, ring_graph
from .optimizers import BfgsOptions, GaConfig
from .pulses import CircuitParams
from .simulator import EvolutionConfig
from .workflows import MIN_HISTOGRAM_RUNS, PbvqoProblem


KINDS = ("pbvqo-sweep", "meta", "histogram", "qaoa", "cost-compare")
QAOA_INITS = ("random", "annealing")
TOP_LEVEL_KEYS = {
    "kind", "N", "T", "n", "omega", "G", "p", "n_restarts", "seed",
    "output_dir", "workers", "bfgs", "ga", "evolution", "easy_N",
    "allow_other_easy", "bins", "trace_samples", "gate_time", "qaoa_init",
    "circuit",
}
BFGS_KEYS = {"gtol", "ftol", "max_iter", "fd_step", "c1", "c2"}
GA_KEYS = {
    "population_size", "generations", "crossover_rate", "mutation_rate",
    "mutation_scale", "elitism_count", "tournament_size", "blend_alpha",
    "amplitude_bound",
}
EVOLUTION_KEYS = {"time_step", "tolerance"}
CIRCUIT_KEYS = {
    "coupler_capacitance", "qubit_josephson_energies",
    "qubit_total_capacitances", "dc_flux",
}


def default_output_root():
    return os.getenv("PBVQO_OUTPUT_ROOT", "results")


class ConfigError(ValueError):
    """Every problem found in a configuration, one per line."""
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.diagnostics))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n_qubits: int
    durations: tuple
    ansatz_size: int
    frequencies: tuple
    coupling_bound: float
    depth: int
    n_restarts: int
    seed: int
    output_dir: str
    workers: int
    evolution: EvolutionConfig
    bfgs: BfgsOptions
    ga: GaConfig
    circuit: CircuitParams
    easy_qubits: int = 2
    allow_other_easy: bool = False
    bins: int = 20
    trace_samples: int = 201
    gate_time: float = 1.0
    qaoa_init: str = "random"
    # The normalized document, defaults filled, as recorded in the manifest
    document: dict = field(default_factory=dict, compare=False)

    @property
    def duration(self):
        return self.durations[0]

    def model(self):
        return HardwareModel(self.n_qubits, self.frequencies,
                             self.coupling_bound)

    def graph(self):
        return ring_graph(self.n_qubits)

    def problem(self, duration=None):
        return PbvqoProblem(self.model(), self.graph(), self.ansatz_size,
                            self.duration if duration is None else duration,
                            self.evolution)

    def easy_problem(self):
        """The easy meta-learning problem, on the hardware parameters of the
        first qubits."""
        model = HardwareModel(self.easy_qubits,
                              self.frequencies[:self.easy_qubits],
                              self.coupling_bound)
        return PbvqoProblem(model, ring_graph(self.easy_qubits),
                            self.ansatz_size, self.duration, self.evolution)


class _Checker:
    """Collects field diagnostics instead of stopping at the first one."""
    def __init__(self):
        self.errors = []

    def fail(self, key, message, value):
        self.errors.append("field '{}': {}, got {}"
                           .format(key, message, json.dumps(value)))

    def integer(self, doc, key, default, minimum=1, name=None):
        value = doc.get(key, default)
        if (isinstance(value, bool) or not isinstance(value, int)
                or value < minimum):
            self.fail(name or key, "must be an integer >= {}".format(minimum),
                      value)
            return default
        return value

    def number(self, doc, key, default, positive=True, name=None):
        value = doc.get(key, default)
        if value is None and default is None:
            return None
        if (isinstance(value, bool) or not isinstance(value, numbers.Real)
                or not math.isfinite(value) or (positive and not value > 0)):
            self.fail(name or key, "must be a {}number".format(
                "positive " if positive else ""), value)
            return default
        return float(value)

    def section(self, doc, key, allowed):
        section = doc.get(key, {})
        if not isinstance(section, dict):
            self.fail(key, "must be an object", section)
            return {}
        for unknown in sorted(set(section) - allowed):
            self.errors.append("field '{}.{}': unknown key"
                               .format(key, unknown))
        return {k: v for k, v in section.items() if k in allowed}

    def build(self, key, constructor, *args, **kwargs):
        """Run a validating constructor, turning its ValueError into a
        diagnostic."""
        try:
            return constructor(*args, **kwargs)
        except (TypeError, ValueError) as e:
            self.errors.append("field '{}': {}".format(key, str(e)))
            return None


def _load(source):
    """A JSON object from a path or from the JSON text itself."""
    if isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        try:
            with open(source, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise ConfigError(["cannot read configuration {}: {}"
                               .format(source, e.strerror)])
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(["line {} column {}: {}"
                           .format(e.lineno, e.colno, e.msg)])
    if not isinstance(document, dict):
        raise ConfigError(["the configuration must be a JSON object"])
    return document


def _apply_overrides(document, overrides):
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "time_step":
            evolution = dict(document.get("evolution", {}))
            evolution["time_step"] = value
            document["evolution"] = evolution
        else:
            document[key] = value
    return document


def parse_config(source, overrides=None):
    """Parse and validate an experiment configuration.

    Defaults follow the dimensionless simulation parameters: omega = 6,
    G = 1, n = 3 pulse terms, 50 restarts, QAOA depth 3 and a 2-qubit easy
    problem.

    :param source: A path to a JSON file, or the JSON text itself.
    :param overrides: Optional {key: value} applied over the document before
        validation (None values are ignored). "time_step" goes to the
        evolution section.

    :return: An ExperimentConfig.
    :raise ConfigError: With a diagnostic for every problem found.
    """
    doc = _apply_overrides(_load(source), overrides)
    check = _Checker()
    for unknown in sorted(set(doc) - TOP_LEVEL_KEYS):
        check.errors.append("field '{}': unknown key".format(unknown))

    kind = doc.get("kind")
    if kind not in KINDS:
        check.fail("kind", "must be one of {}".format(", ".join(KINDS)), kind)
    n_qubits = None
    if "N" not in doc:
        check.errors.append("field 'N': missing")
    else:
        n_qubits = check.integer(doc, "N", None, minimum=2)
    if n_qubits is not None and n_qubits > MAX_QUBITS:
        check.fail("N", "exceeds the dense dimension cap of {} qubits"
                   .format(MAX_QUBITS), n_qubits)
        n_qubits = None

    raw_durations = doc.get("T", 5.0)
    if not isinstance(raw_durations, list):
        raw_durations = [raw_durations]
    durations = tuple(check.number({"T": t}, "T", None)
                      for t in raw_durations if t is not None)
    if not durations or len(durations) != len(raw_durations):
        check.fail("T", "must be a positive number or a non-empty list of"
                   " them", doc.get("T"))
    elif kind != "pbvqo-sweep" and len(durations) > 1:
        check.fail("T", "a single duration is expected for '{}'".format(kind),
                   raw_durations)

    ansatz_size = check.integer(doc, "n", 3)
    coupling_bound = check.number(doc, "G", 1.0)
    depth = check.integer(doc, "p", 3)
    n_restarts = check.integer(doc, "n_restarts", 50)
    seed = check.integer(doc, "seed", 0, minimum=0)
    workers = check.integer(doc, "workers", 1)
    easy_qubits = check.integer(doc, "easy_N", 2, minimum=2)
    bins = check.integer(doc, "bins", 20)
    trace_samples = check.integer(doc, "trace_samples", 201, minimum=2)
    gate_time = check.number(doc, "gate_time", 1.0)

    allow_other_easy = doc.get("allow_other_easy", False)
    if not isinstance(allow_other_easy, bool):
        check.fail("allow_other_easy", "must be a boolean", allow_other_easy)
        allow_other_easy = False
    qaoa_init = doc.get("qaoa_init", "random")
    if qaoa_init not in QAOA_INITS:
        check.fail("qaoa_init", "must be one of {}"
                   .format(", ".join(QAOA_INITS)), qaoa_init)

    output_dir = doc.get("output_dir",
                         os.path.join(default_output_root(), str(kind)))
    if not isinstance(output_dir, str) or not output_dir:
        check.fail("output_dir", "must be a non-empty path", output_dir)

    omega = doc.get("omega", 6.0)
    frequencies = None
    if n_qubits is not None:
        values = omega if isinstance(omega, list) else [omega] * n_qubits
        if (len(values) != n_qubits
                or any(isinstance(w, bool) or not isinstance(w, numbers.Real)
                       or not math.isfinite(w) for w in values)):
            check.fail("omega", "must be a finite number or a list of N"
                       " finite numbers", omega)
        else:
            frequencies = tuple(float(w) for w in values)

    if kind == "histogram" and n_restarts < MIN_HISTOGRAM_RUNS:
        check.fail("n_restarts", "the histogram study needs at least {} runs"
                   .format(MIN_HISTOGRAM_RUNS), n_restarts)
    if kind == "meta" and easy_qubits != 2 and not allow_other_easy:
        check.fail("easy_N", "only the 2-qubit easy problem is allowed"
                   " unless allow_other_easy is set", easy_qubits)
    if n_qubits is not None and easy_qubits > n_qubits:
        check.fail("easy_N", "the easy problem cannot be larger than N",
                   easy_qubits)

    evolution_doc = check.section(doc, "evolution", EVOLUTION_KEYS)
    evolution = check.build(
        "evolution", EvolutionConfig,
        check.number(evolution_doc, "time_step", None,
                     name="evolution.time_step"),
        check.number(evolution_doc, "tolerance", 1e-4,
                     name="evolution.tolerance"),
    )
    bfgs_doc = check.section(doc, "bfgs", BFGS_KEYS)
    bfgs = check.build("bfgs", BfgsOptions, **bfgs_doc)
    ga_doc = dict(check.section(doc, "ga", GA_KEYS))
    amplitude_bound = check.number(ga_doc, "amplitude_bound", 5.0,
                                   name="ga.amplitude_bound")
    ga_doc.pop("amplitude_bound", None)
    ga = check.build("ga", GaConfig.for_ansatz, ansatz_size, amplitude_bound,
                     seed=seed, **ga_doc)
    circuit_doc = check.section(doc, "circuit", CIRCUIT_KEYS)
    circuit = check.build("circuit", CircuitParams.with_coupling_bound,
                          coupling_bound, **circuit_doc)

    if check.errors:
        raise ConfigError(check.errors)

    document = dict(doc, kind=kind, N=n_qubits, T=list(durations),
                    n=ansatz_size, omega=list(frequencies), G=coupling_bound,
                    p=depth, n_restarts=n_restarts, seed=seed,
                    output_dir=output_dir, workers=workers)
    return ExperimentConfig(
        kind=kind,
        n_qubits=n_qubits,
        durations=durations,
        ansatz_size=ansatz_size,
        frequencies=frequencies,
        coupling_bound=coupling_bound,
        depth=depth,
        n_restarts=n_restarts,
        seed=seed,
        output_dir=output_dir,
        workers=workers,
        evolution=evolution,
        bfgs=bfgs,
        ga=ga,
        circuit=circuit,
        easy_qubits=easy_qubits,
        allow_other_easy=allow_other_easy,
        bins=bins,
        trace_samples=trace_samples,
        gate_time=gate_time,
        qaoa_init=qaoa_init,
        document=document,
    )
