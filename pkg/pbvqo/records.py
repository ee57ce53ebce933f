import json

from dataclasses import asdict, dataclass, field, fields

from .simulator import error_rate
from .utils import summarize


@dataclass(frozen=True)
class RunRecord:
    """One optimization trajectory, as persisted in runs.jsonl.

    A failed run keeps its seed and initial parameters, carries the error
    text and no final values. The wall time is only reported in the
    manifest, so that two runs from the same seed serialize identically.
    """
    run_id: str
    seed: int
    initial_params: tuple
    final_params: tuple = ()
    cost_history: tuple = ()
    final_energy: float = None
    ground_energy: float = None
    final_error_rate: float = None
    energetic_cost: float = None
    converged: bool = False
    evaluations: int = 0
    label: str = ""
    duration: float = None
    error: str = None
    provenance: dict = field(default_factory=dict)
    wall_time: float = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("initial_params", "final_params", "cost_history"):
            object.__setattr__(self, name,
                               tuple(float(v) for v in getattr(self, name)))

    @property
    def failed(self):
        return self.error is not None

    def recomputed_error_rate(self):
        return error_rate(self.final_energy, self.ground_energy)

    def to_dict(self):
        record = asdict(self)
        del record["wall_time"]
        for name in ("initial_params", "final_params", "cost_history"):
            record[name] = list(record[name])
        return record

    def to_json(self):
        """One line, stable key order."""
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, record):
        known = {f.name for f in fields(cls)}
        unknown = set(record) - known
        if unknown:
            raise ValueError("Unknown run record fields: {}"
                             .format(sorted(unknown)))
        return cls(**record)

    @classmethod
    def from_json(cls, line):
        return cls.from_dict(json.loads(line))


@dataclass
class StudyResult:
    """An ensemble of runs sharing a label (a duration, a histogram arm..).

    The summary is always recomputed from the runs.
    """
    label: str
    runs: tuple
    metadata: dict = field(default_factory=dict)

    @property
    def error_rates(self):
        return [run.final_error_rate for run in self.runs if not run.failed]

    @property
    def failures(self):
        return [run for run in self.runs if run.failed]

    @property
    def summary(self):
        return summarize(self.error_rates)

    def best_run(self):
        """The successful run of lowest error rate, None if all failed."""
        successful = [run for run in self.runs if not run.failed]
        if not successful:
            return None
        return min(successful, key=lambda run: run.final_error_rate)


def read_records(path):
    """Parse a runs.jsonl file, skipping blank lines."""
    with open(path, "r", encoding="utf-8") as f:
        return [RunRecord.from_json(line) for line in f if line.strip()]


def group_by_label(records):
    """StudyResults in order of first appearance of each label."""
    groups = {}
    for record in records:
        groups.setdefault(record.label, []).append(record)
    return [StudyResult(label, tuple(runs)) for label, runs in groups.items()]
