import argparse
import csv
import json
import logging
import numpy as np
import os
import sys

from datetime import datetime

from . import __version__
from .config import ConfigError, parse_config
from .hamiltonians import ground_energy
from .pulses import CircuitParams, filter_pulse, flux_trace, pulse_values
from .records import group_by_label, read_records
from .simulator import EvolutionConfig, error_rate
from .utils import histogram_counts
from .workflows import (
    PbvqoProblem, compare_energetic_cost, histogram_study, pbvqo_cost,
    run_meta, run_pbvqo, run_qaoa, sweep_duration,
)


EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILURE = 2

RUNS_FILE = "runs.jsonl"
MANIFEST_FILE = "manifest.json"
TRACE_HEADER = ("t", "P", "F", "phi_ext")
SUMMARY_COLUMNS = ("count", "min", "q1", "median", "q3", "max", "mean",
                   "best")
BOXPLOT_COLUMNS = ("min", "q1", "median", "q3", "max", "whisker_low",
                   "whisker_high", "best")


class ResultWriter:
    """The single owner of an output directory.

    Run records are appended to runs.jsonl as studies complete, tables are
    written whole. The manifest is written at start (incomplete) and
    rewritten at the end, so an interrupted experiment leaves its partial
    results marked as such.
    """
    def __init__(self, directory):
        self.directory = directory
        self.files = []
        self.wall_times = {}
        self.document = {}
        self.started_at = None

    def path(self, name):
        return os.path.join(self.directory, name)

    def _track(self, name):
        if name not in self.files:
            self.files.append(name)

    def start(self, config):
        os.makedirs(self.directory, exist_ok=True)
        self.document = config.document
        self.started_at = datetime.now().isoformat()
        # Start from an empty run log, it is only ever appended to
        with open(self.path(RUNS_FILE), "w", encoding="utf-8"):
            pass
        self._track(RUNS_FILE)
        self._write_manifest(complete=False)

    def append_runs(self, runs):
        with open(self.path(RUNS_FILE), "a", encoding="utf-8") as f:
            for run in runs:
                f.write(run.to_json() + "\n")
                self.wall_times[run.run_id] = run.wall_time

    def write_table(self, name, header, rows):
        with open(self.path(name), "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            writer.writerows(rows)
        self._track(name)
        logging.info("Wrote {}".format(self.path(name)))

    def finish(self, error=None):
        self._write_manifest(complete=error is None, error=error)

    def _write_manifest(self, complete, error=None):
        manifest = {
            "version": __version__,
            "complete": complete,
            "error": error,
            "config": self.document,
            "files": self.files,
            "wall_times": self.wall_times,
            "started_at": self.started_at,
            "updated_at": datetime.now().isoformat(),
        }
        with open(self.path(MANIFEST_FILE), "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)


def export_pulse_trace(params, problem, samples, circuit=None):
    """Sample the pulse of `params` on a uniform grid over [0, T].

    :param params: The pulse parameters (amplitudes then phases).
    :param problem: The PbvqoProblem giving T and the bound G.
    :param samples: The number of grid points, at least 2.
    :param circuit: The CircuitParams rendering F as an external flux,
        by default a coupler whose bound is G.

    :return: A list of rows (t, P(t), F[P(t)], phi_ext(t)).
    """
    if samples < 2:
        raise ValueError("Need at least two samples, got {}".format(samples))
    bound = problem.model.coupling_bound
    if circuit is None:
        circuit = CircuitParams.with_coupling_bound(bound)
    ansatz = problem.ansatz(params)
    times = np.linspace(0.0, ansatz.duration, samples)
    raw = pulse_values(ansatz, times)
    filtered = filter_pulse(raw, bound)
    flux = flux_trace(circuit, filtered)
    return [tuple(float(v) for v in row)
            for row in zip(times, raw, filtered, flux)]


def write_summaries(writer, studies):
    """summary.csv and boxplot.csv, one row per study."""
    summary_rows, boxplot_rows = [], []
    for study in studies:
        stats = study.summary
        failed = len(study.failures)
        summary_rows.append([study.label, failed]
                            + [stats.get(c, "") for c in SUMMARY_COLUMNS])
        durations = {run.duration for run in study.runs}
        duration = durations.pop() if len(durations) == 1 else ""
        boxplot_rows.append(
            [study.label, "" if duration is None else duration]
            + [stats.get(c, "") for c in BOXPLOT_COLUMNS]
            + [" ".join(repr(v) for v in stats.get("outliers", []))]
        )
    writer.write_table("summary.csv", ("label", "failed") + SUMMARY_COLUMNS,
                       summary_rows)
    writer.write_table("boxplot.csv",
                       ("label", "duration") + BOXPLOT_COLUMNS + ("outliers",),
                       boxplot_rows)


def _write_trace(writer, config, name, params, problem):
    rows = export_pulse_trace(params, problem, config.trace_samples,
                              config.circuit)
    writer.write_table(name, TRACE_HEADER, rows)


def _sweep(config, writer):
    studies = sweep_duration(config.problem(), config.durations,
                             config.n_restarts, config.seed, config.bfgs,
                             config.workers)
    for study in studies:
        writer.append_runs(study.runs)
    for study in studies:
        best = study.best_run()
        if best is not None:
            _write_trace(writer, config, "trace_T{:g}.csv".format(
                best.duration), best.final_params,
                config.problem(best.duration))
    return studies


def _meta(config, writer):
    easy, hard = config.easy_problem(), config.problem()
    study = run_meta(easy, hard, config.ga, config.n_restarts, config.seed,
                     config.bfgs, "ga", config.allow_other_easy,
                     config.workers)
    writer.append_runs(study.runs)
    best = study.best_run()
    if best is not None:
        _write_trace(writer, config, "trace_easy.csv",
                     best.provenance["easy_params"], easy)
        _write_trace(writer, config, "trace_hard.csv", best.final_params,
                     hard)
    return [study]


def _histogram(config, writer):
    studies = histogram_study(config.problem(), config.n_restarts,
                              config.seed, config.easy_problem(), config.ga,
                              config.bfgs, config.workers)
    for study in studies:
        writer.append_runs(study.runs)
    edges, counts = histogram_counts(
        {study.label: study.error_rates for study in studies}, config.bins
    )
    rows = [[edges[i], edges[i + 1]]
            + [int(counts[study.label][i]) for study in studies]
            for i in range(len(edges) - 1)]
    writer.write_table("histogram.csv", ["bin_low", "bin_high"]
                       + [study.label for study in studies], rows)
    return list(studies)


def _qaoa(config, writer):
    study = run_qaoa(config.graph(), config.depth, config.n_restarts,
                     config.seed, config.bfgs, config.workers,
                     config.qaoa_init, config.gate_time)
    writer.append_runs(study.runs)
    return [study]


def _cost_compare(config, writer):
    pbvqo = run_pbvqo(config.problem(), config.n_restarts, config.seed,
                      config.bfgs, config.workers, label="pbvqo")
    writer.append_runs(pbvqo.runs)
    qaoa = run_qaoa(config.graph(), config.depth, config.n_restarts,
                    config.seed, config.bfgs, config.workers,
                    config.qaoa_init, config.gate_time)
    writer.append_runs(qaoa.runs)
    cost_pbvqo, cost_qaoa = compare_energetic_cost(pbvqo, qaoa)
    logging.info("Energetic cost: PBVQO {} against QAOA {} (ratio {})"
                 .format(cost_pbvqo, cost_qaoa, cost_pbvqo / cost_qaoa))
    writer.write_table("energetic_cost.csv", ("method", "mean_cost", "runs"), [
        ("pbvqo", cost_pbvqo, len(pbvqo.runs) - len(pbvqo.failures)),
        ("qaoa", cost_qaoa, len(qaoa.runs) - len(qaoa.failures)),
        ("ratio", cost_pbvqo / cost_qaoa, ""),
    ])
    best = pbvqo.best_run()
    if best is not None:
        _write_trace(writer, config, "trace_pbvqo.csv", best.final_params,
                     config.problem())
    return [pbvqo, qaoa]


EXPERIMENTS = {
    "pbvqo-sweep": _sweep,
    "meta": _meta,
    "histogram": _histogram,
    "qaoa": _qaoa,
    "cost-compare": _cost_compare,
}


def run_experiment(config):
    """Dispatch a validated configuration and persist its results.

    :return: The exit status, 0 on success and 2 on a runtime or I/O failure.
    """
    writer = ResultWriter(config.output_dir)
    try:
        writer.start(config)
    except OSError as e:
        logging.error("Cannot prepare output directory {}: {}"
                      .format(config.output_dir, str(e)))
        return EXIT_FAILURE
    logging.info("Running '{}' experiment into {}"
                 .format(config.kind, config.output_dir))
    try:
        studies = EXPERIMENTS[config.kind](config, writer)
        write_summaries(writer, studies)
    except Exception as e:
        logging.error("Experiment failed: {}".format(str(e)))
        try:
            writer.finish(error=str(e))
        except OSError:
            pass
        return EXIT_FAILURE
    writer.finish()
    return EXIT_OK


def _overrides(args):
    return {"seed": args.seed, "output_dir": args.out,
            "workers": args.workers, "time_step": args.dt_override}


def _load_config(args):
    try:
        return parse_config(args.config, _overrides(args))
    except ConfigError as e:
        for diagnostic in e.diagnostics:
            logging.error("{}: {}".format(args.config, diagnostic))
        return None


def cmd_run(args):
    config = _load_config(args)
    if config is None:
        return EXIT_INVALID
    return run_experiment(config)


def cmd_validate(args):
    config = _load_config(args)
    if config is None:
        return EXIT_INVALID
    print("{}: valid '{}' experiment, {} qubits, output to {}"
          .format(args.config, config.kind, config.n_qubits,
                  config.output_dir))
    return EXIT_OK


def cmd_export_pulse(args):
    try:
        params = [float(v) for v in args.params.split(",")]
        problem = PbvqoProblem.ring(
            args.n_qubits, args.duration, len(params) // 2, args.omega,
            args.G, EvolutionConfig(time_step=args.dt_override))
        rows = export_pulse_trace(params, problem, args.samples)
    except ValueError as e:
        logging.error("Invalid pulse: {}".format(str(e)))
        return EXIT_INVALID
    if args.evaluate:
        energy = pbvqo_cost(problem, params)
        logging.info("Energy {} and error rate {}".format(
            energy, error_rate(energy, ground_energy(problem.hamiltonian))))
    try:
        if args.out is None:
            writer = csv.writer(sys.stdout)
            writer.writerow(TRACE_HEADER)
            writer.writerows(rows)
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(TRACE_HEADER)
                writer.writerows(rows)
    except OSError as e:
        logging.error("Cannot write {}: {}".format(args.out, str(e)))
        return EXIT_FAILURE
    return EXIT_OK


def cmd_report(args):
    writer = ResultWriter(args.directory)
    try:
        studies = group_by_label(read_records(writer.path(RUNS_FILE)))
        write_summaries(writer, studies)
    except (OSError, ValueError) as e:
        logging.error("Cannot report on {}: {}".format(args.directory,
                                                      str(e)))
        return EXIT_FAILURE
    for study in studies:
        stats = study.summary
        print("{}: {} runs, {} failed, median R {}, best R {}".format(
            study.label, len(study.runs), len(study.failures),
            stats.get("median"), stats.get("best")))
    return EXIT_OK


def build_parser():
    verbosity = argparse.ArgumentParser(add_help=False)
    verbosity.add_argument("--verbose", action="store_true",
                           help="Log at DEBUG level.")
    common = argparse.ArgumentParser(add_help=False, parents=[verbosity])
    common.add_argument("--seed", type=int, help="Override the master seed.")
    common.add_argument("--out", help="Output directory.")
    common.add_argument("--workers", type=int,
                        help="Number of worker processes.")
    common.add_argument("--dt-override", type=float,
                        help="Override the evolution time step.")

    parser = argparse.ArgumentParser(
        prog="pbvqo",
        description="Pulse-based variational quantum optimization studies."
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", parents=[common],
                              help="Run the experiment of a configuration.")
    run.add_argument("config", help="Path to the JSON configuration.")
    run.set_defaults(func=cmd_run)

    validate = commands.add_parser("validate", parents=[common],
                                   help="Only validate a configuration.")
    validate.add_argument("config", help="Path to the JSON configuration.")
    validate.set_defaults(func=cmd_validate)

    export = commands.add_parser("export-pulse", parents=[verbosity],
                                 help="Sample a pulse and its flux as CSV.")
    export.add_argument("--params", required=True,
                        help="Comma-separated A_1..A_n,phi_1..phi_n.")
    export.add_argument("--n-qubits", type=int, default=8)
    export.add_argument("--duration", type=float, default=5.0)
    export.add_argument("--omega", type=float, default=6.0)
    export.add_argument("--G", type=float, default=1.0)
    export.add_argument("--samples", type=int, default=201)
    export.add_argument("--evaluate", action="store_true",
                        help="Also log the energy reached by the pulse.")
    export.add_argument("--dt-override", type=float,
                        help="Time step of the --evaluate evolution.")
    export.add_argument("--out", help="Output CSV file, stdout by default.")
    export.set_defaults(func=cmd_export_pulse)

    report = commands.add_parser("report", parents=[verbosity],
                                 help="Recompute the summaries of a results"
                                 " directory.")
    report.add_argument("directory")
    report.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(message)s"
    )
    return args.func(args)
