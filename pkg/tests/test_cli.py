import json
import numpy as np
import os
import pytest

from fixtures import *  # noqa: F401,F403
from pbvqo.cli import (
    EXIT_FAILURE, EXIT_INVALID, EXIT_OK, MANIFEST_FILE, RUNS_FILE,
    export_pulse_trace, main, run_experiment,
)
from pbvqo.config import ConfigError, parse_config
from pbvqo.hamiltonians import MAX_QUBITS
from pbvqo.optimizers import BfgsOptions, GaConfig
from pbvqo.pulses import CircuitParams, coupling_strength
from pbvqo.records import read_records
from pbvqo.simulator import EvolutionConfig
from pbvqo.workflows import PbvqoProblem
from utils import RING8_BASELINE_PARAMS, read_lines, write_config


def diagnostics_of(document, overrides=None):
    with pytest.raises(ConfigError) as e:
        parse_config(json.dumps(document), overrides)
    return e.value.diagnostics


def quick_config(directory, **kwargs):
    document = {
        "kind": "pbvqo-sweep",
        "N": 2,
        "T": [0.5, 1.0],
        "n_restarts": 2,
        "seed": 3,
        "output_dir": os.path.join(directory, "out"),
        "trace_samples": 11,
        "bfgs": {"max_iter": 5},
        "evolution": {"time_step": 0.05},
    }
    document.update(kwargs)
    return document


def test_config_defaults(monkeypatch):
    monkeypatch.delenv("PBVQO_OUTPUT_ROOT", raising=False)
    config = parse_config('{"kind": "qaoa", "N": 8}')
    assert config.kind == "qaoa"
    assert config.n_qubits == 8
    assert config.durations == (5.0,) and config.duration == 5.0
    assert config.ansatz_size == 3
    assert config.frequencies == (6.0,) * 8
    assert config.coupling_bound == 1.0
    assert config.depth == 3
    assert config.n_restarts == 50
    assert config.seed == 0
    assert config.workers == 1
    assert config.output_dir == os.path.join("results", "qaoa")
    assert config.evolution == EvolutionConfig()
    assert config.bfgs == BfgsOptions()
    assert config.ga == GaConfig.for_ansatz(3, seed=0)
    assert config.circuit == CircuitParams.with_coupling_bound(1.0)
    assert config.easy_qubits == 2
    assert config.document["omega"] == [6.0] * 8

    problem = config.problem()
    assert problem.model.n_qubits == 8 and problem.duration == 5.0
    assert config.easy_problem().model.n_qubits == 2


def test_config_output_root(monkeypatch):
    monkeypatch.setenv("PBVQO_OUTPUT_ROOT", "/somewhere")
    config = parse_config('{"kind": "meta", "N": 4}')
    assert config.output_dir == os.path.join("/somewhere", "meta")


def test_config_errors():
    assert any("field 'N'" in d
               for d in diagnostics_of({"kind": "qaoa", "N": 0}))
    assert any("field 'N'" in d for d in diagnostics_of({"kind": "qaoa"}))
    assert any("dimension cap" in d for d in
               diagnostics_of({"kind": "qaoa", "N": MAX_QUBITS + 1}))
    assert diagnostics_of({"kind": "qaoa", "N": 2, "foo": 1}) \
        == ["field 'foo': unknown key"]
    assert any("ga.foo" in d for d in
               diagnostics_of({"kind": "meta", "N": 2, "ga": {"foo": 1}}))
    assert any("Wolfe" in d for d in
               diagnostics_of({"kind": "qaoa", "N": 2,
                               "bfgs": {"c1": 0.95}}))
    assert any("omega" in d for d in
               diagnostics_of({"kind": "qaoa", "N": 3, "omega": [6, 6]}))
    for omega in ([float("nan"), 6, 6], float("inf")):
        assert any("field 'omega'" in d for d in
                   diagnostics_of({"kind": "qaoa", "N": 3, "omega": omega}))
    assert any("single duration" in d for d in
               diagnostics_of({"kind": "qaoa", "N": 2, "T": [1, 2]}))
    assert any("field 'seed'" in d for d in
               diagnostics_of({"kind": "qaoa", "N": 2, "seed": True}))


def test_config_reports_every_problem():
    diagnostics = diagnostics_of({"kind": "nope", "N": 2, "T": -1,
                                  "seed": -3})
    assert len(diagnostics) == 3
    assert [d.split(":")[0] for d in diagnostics] \
        == ["field 'kind'", "field 'T'", "field 'seed'"]


def test_config_syntax_error():
    with pytest.raises(ConfigError) as e:
        parse_config('{\n  "kind": "qaoa",,\n}')
    assert e.value.diagnostics[0].startswith("line 2")


def test_config_not_an_object(directory):
    path = os.path.join(directory, "list.json")
    with open(path, "w") as f:
        f.write("[1, 2]")
    with pytest.raises(ConfigError, match="JSON object"):
        parse_config(path)


def test_config_study_constraints():
    assert any("n_restarts" in d for d in
               diagnostics_of({"kind": "histogram", "N": 4,
                               "n_restarts": 5}))
    assert any("easy_N" in d for d in
               diagnostics_of({"kind": "meta", "N": 4, "easy_N": 3}))
    assert any("easy_N" in d for d in
               diagnostics_of({"kind": "meta", "N": 2, "easy_N": 3,
                               "allow_other_easy": True}))
    config = parse_config('{"kind": "meta", "N": 4, "easy_N": 3,'
                          ' "allow_other_easy": true, "omega": [5, 6, 7, 8]}')
    assert config.easy_problem().model.frequencies == (5.0, 6.0, 7.0)


def test_config_overrides():
    overrides = {"seed": 7, "output_dir": "elsewhere", "workers": None,
                 "time_step": 0.01}
    config = parse_config('{"kind": "qaoa", "N": 2}', overrides)
    assert config.seed == 7 and config.ga.seed == 7
    assert config.output_dir == "elsewhere"
    assert config.workers == 1
    assert config.evolution.time_step == 0.01
    assert any("time_step" in d for d in
               diagnostics_of({"kind": "qaoa", "N": 2}, {"time_step": -1}))


def test_config_from_file(directory):
    path = write_config(os.path.join(directory, "config.json"),
                        {"kind": "cost-compare", "N": 2, "p": 1})
    assert parse_config(path).depth == 1
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(os.path.join(directory, "missing.json"))


@pytest.mark.parametrize("name", ["sweep", "meta", "histogram", "qaoa",
                                  "cost-compare"])
def test_documented_configs(name):
    path = os.path.join(os.path.dirname(__file__), os.pardir, "doc",
                        "examples", "{}.json".format(name))
    config = parse_config(path)
    assert config.kind == ("pbvqo-sweep" if name == "sweep" else name)
    assert config.n_qubits == 8


def test_export_pulse_trace():
    problem = PbvqoProblem.ring(2, duration=2.0)
    rows = export_pulse_trace(np.zeros(6), problem, 9)
    assert len(rows) == 9
    assert rows[0][0] == 0 and rows[-1][0] == 2.0
    for t, p, f, phi in rows:
        assert p == 0 and f == 1.0 and phi == 0.0
    with pytest.raises(ValueError, match="two samples"):
        export_pulse_trace(np.zeros(6), problem, 1)


def test_export_published_pulse():
    problem = PbvqoProblem.ring(8, duration=5.0)
    circuit = CircuitParams.with_coupling_bound(1.0)
    rows = export_pulse_trace(RING8_BASELINE_PARAMS, problem, 101, circuit)
    for t, p, f, phi in rows:
        assert f >= 1.0 and f == max(1.0, abs(p))
        assert 0 <= phi < np.pi / 2
        assert coupling_strength(circuit, phi) / 4 \
            == pytest.approx(f, rel=1e-9)


def test_sweep_end_to_end(directory):
    first = parse_config(json.dumps(quick_config(directory)))
    assert run_experiment(first) == EXIT_OK
    out = first.output_dir
    for name in (RUNS_FILE, MANIFEST_FILE, "summary.csv", "boxplot.csv",
                 "trace_T0.5.csv", "trace_T1.csv"):
        assert os.path.exists(os.path.join(out, name))

    with open(os.path.join(out, MANIFEST_FILE)) as f:
        manifest = json.load(f)
    assert manifest["complete"] and manifest["error"] is None
    assert manifest["config"]["T"] == [0.5, 1.0]
    assert len(manifest["wall_times"]) == 4

    records = read_records(os.path.join(out, RUNS_FILE))
    assert [r.label for r in records] == ["T=0.5"] * 2 + ["T=1"] * 2
    assert all(r.energetic_cost is not None for r in records)
    summary = read_lines(os.path.join(out, "summary.csv"))
    assert summary[0].startswith("label,failed,count")
    assert len(summary) == 3
    trace = read_lines(os.path.join(out, "trace_T1.csv"))
    assert trace[0] == "t,P,F,phi_ext" and len(trace) == 12

    # The same seed gives the same bytes
    second = parse_config(json.dumps(quick_config(directory)),
                          {"output_dir": os.path.join(directory, "again")})
    assert run_experiment(second) == EXIT_OK
    for name in (RUNS_FILE, "summary.csv", "boxplot.csv"):
        assert read_lines(os.path.join(out, name)) \
            == read_lines(os.path.join(second.output_dir, name))

    # and the summaries are rebuilt identically from the run log
    assert main(["report", out]) == EXIT_OK
    assert read_lines(os.path.join(out, "summary.csv")) == summary


def test_histogram_end_to_end(directory):
    document = quick_config(directory, kind="histogram", T=1.0,
                            n_restarts=10, bins=4,
                            ga={"population_size": 6, "generations": 2},
                            bfgs={"max_iter": 3})
    config = parse_config(json.dumps(document))
    assert run_experiment(config) == EXIT_OK
    histogram = read_lines(os.path.join(config.output_dir, "histogram.csv"))
    assert histogram[0] == "bin_low,bin_high,baseline,meta-bfgs,meta-ga"
    assert len(histogram) == 5
    totals = np.sum([[int(v) for v in line.split(",")[2:]]
                     for line in histogram[1:]], axis=0)
    assert list(totals) == [10, 10, 10]
    summary = read_lines(os.path.join(config.output_dir, "summary.csv"))
    assert [line.split(",")[0] for line in summary[1:]] \
        == ["baseline", "meta-bfgs", "meta-ga"]


def test_meta_end_to_end(directory):
    document = quick_config(directory, kind="meta", N=3, T=1.0,
                            ga={"population_size": 6, "generations": 2})
    config = parse_config(json.dumps(document))
    assert run_experiment(config) == EXIT_OK
    out = config.output_dir
    assert os.path.exists(os.path.join(out, "trace_easy.csv"))
    assert os.path.exists(os.path.join(out, "trace_hard.csv"))
    for record in read_records(os.path.join(out, RUNS_FILE)):
        assert record.label == "meta-ga"
        assert len(record.provenance["easy_params"]) == 6
        assert record.provenance["easy_n_qubits"] == 2


def test_cost_compare_end_to_end(directory):
    document = quick_config(directory, kind="cost-compare", T=1.0, p=1)
    config = parse_config(json.dumps(document))
    assert run_experiment(config) == EXIT_OK
    table = read_lines(os.path.join(config.output_dir, "energetic_cost.csv"))
    assert table[0] == "method,mean_cost,runs"
    assert [line.split(",")[0] for line in table[1:]] \
        == ["pbvqo", "qaoa", "ratio"]
    pbvqo, qaoa, ratio = (float(line.split(",")[1]) for line in table[1:])
    assert ratio == pytest.approx(pbvqo / qaoa)
    assert os.path.exists(os.path.join(config.output_dir,
                                       "trace_pbvqo.csv"))


def test_main_validate(directory, capsys):
    good = write_config(os.path.join(directory, "good.json"),
                        {"kind": "qaoa", "N": 2})
    assert main(["validate", good]) == EXIT_OK
    assert "valid 'qaoa' experiment" in capsys.readouterr().out

    bad = write_config(os.path.join(directory, "bad.json"),
                       {"kind": "qaoa", "N": 0})
    assert main(["validate", bad]) == EXIT_INVALID
    assert main(["run", bad]) == EXIT_INVALID

    nan = write_config(os.path.join(directory, "nan.json"),
                       {"kind": "qaoa", "N": 3, "omega": [float("nan"), 6, 6]})
    assert main(["run", nan]) == EXIT_INVALID


def test_main_run_failure(directory):
    """An output directory which is a file is a runtime failure."""
    blocker = os.path.join(directory, "blocker")
    with open(blocker, "w") as f:
        f.write("")
    config = write_config(os.path.join(directory, "config.json"),
                          quick_config(directory))
    assert main(["run", config, "--out", blocker]) == EXIT_FAILURE


def test_main_export_pulse(directory):
    out = os.path.join(directory, "pulse.csv")
    assert main(["export-pulse", "--params", "0,0,0,0,0,0", "--n-qubits", "2",
                 "--duration", "1", "--samples", "5", "--out", out]) \
        == EXIT_OK
    lines = read_lines(out)
    assert lines[0] == "t,P,F,phi_ext"
    assert lines[1] == "0.0,0.0,1.0,0.0"
    assert len(lines) == 6

    assert main(["export-pulse", "--params", "1,2,3"]) == EXIT_INVALID
    assert main(["export-pulse", "--params", "a,b"]) == EXIT_INVALID
    assert main(["export-pulse", "--params", "1,0", "--n-qubits", "2",
                 "--duration", "1", "--samples", "3", "--evaluate",
                 "--out", out]) == EXIT_OK


def test_main_export_pulse_time_step(directory, monkeypatch):
    seen = []

    def cost(problem, params):
        seen.append(problem.evolution.time_step)
        return -1.0

    monkeypatch.setattr("pbvqo.cli.pbvqo_cost", cost)
    out = os.path.join(directory, "pulse.csv")
    arguments = ["export-pulse", "--params", "1,0", "--n-qubits", "2",
                 "--duration", "1", "--samples", "3", "--evaluate",
                 "--out", out]
    assert main(arguments + ["--dt-override", "0.25"]) == EXIT_OK
    assert main(arguments) == EXIT_OK
    assert seen == [0.25, None]
    assert main(arguments + ["--dt-override", "0"]) == EXIT_INVALID

    # Experiment overrides mean nothing for a single pulse
    for flag in ("--seed", "--workers"):
        with pytest.raises(SystemExit):
            main(arguments + [flag, "1"])
