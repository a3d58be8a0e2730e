"""Command-line interface: outputs, determinism and exit codes."""

import json
import pathlib

import numpy as np
import pytest

from pilotwave.cli import main
from pilotwave.csvio import read_csv

SCENARIOS = pathlib.Path(__file__).resolve().parent.parent / "scenarios"
REFERENCE = str(SCENARIOS / "prediction_reference.json")


@pytest.fixture()
def single_mode_scenario(tmp_path):
    doc = {"schema_version": 1, "kind": "window",
           "physics": {"mass": 1.0, "box_length": 2.0 * np.pi,
                       "modes": [{"amplitude": [1.0, 0.0], "momentum": 1.0}],
                       "t0": 0.0, "t1": 2.0}}
    path = tmp_path / "single_mode.json"
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture()
def noded_scenario(tmp_path):
    # standing wave ~ sin(x): exact nodes at x = 0 and x = pi
    doc = {"schema_version": 1, "kind": "rel_field",
           "physics": {"mass": 1.0, "box_length": 2.0 * np.pi, "normalize": False,
                       "modes": [{"amplitude": [1.0, 0.0], "momentum": 1.0},
                                 {"amplitude": [-1.0, 0.0], "momentum": -1.0}]}}
    path = tmp_path / "noded.json"
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture()
def backflow_everywhere_scenario(tmp_path):
    # the rigidly translating two-mode pattern is negative somewhere at
    # every time, so the preparation-time positivity precondition fails
    p2 = np.sqrt(99.0)
    doc = {"schema_version": 1, "kind": "window",
           "physics": {"mass": 1.0, "box_length": 2.0 * np.pi / p2,
                       "modes": [{"amplitude": [1.0, 0.0], "momentum": 0.0},
                                 {"amplitude": [0.5, 0.0], "momentum": p2}],
                       "t0": 0.0, "t1": 1.0}}
    path = tmp_path / "neg.json"
    path.write_text(json.dumps(doc))
    return str(path)


class TestField:
    def test_single_mode_uniform_j0(self, single_mode_scenario, tmp_path):
        out = tmp_path / "out"
        assert main(["field", "--scenario", single_mode_scenario,
                     "--out", str(out), "--grid", "64", "--quiet"]) == 0
        _, cols = read_csv(out / "field.csv")
        assert np.max(np.abs(cols["j0"] - 1.0 / (2.0 * np.pi))) < 1e-9

    def test_node_cells_emit_empty_sentinels(self, noded_scenario, tmp_path):
        out = tmp_path / "out"
        # odd grid puts a cell center exactly on the node at x = pi
        assert main(["field", "--scenario", noded_scenario, "--out", str(out),
                     "--grid", "301", "--t", "0.25", "--quiet"]) == 0
        meta, cols = read_csv(out / "field.csv")
        node_rows = np.isnan(cols["Q"])
        assert np.any(node_rows)
        assert np.all(np.isnan(cols["meff2"][node_rows]))
        # the wave function itself is still reported there
        assert np.all(np.isfinite(cols["re_psi"]))
        assert meta["scenario_digest"]

    def test_byte_identical_reruns(self, single_mode_scenario, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            main(["field", "--scenario", single_mode_scenario,
                  "--out", str(out), "--grid", "64", "--quiet"])
            outs.append((out / "field.csv").read_bytes())
        assert outs[0] == outs[1]


class TestTrace:
    def test_single_mode_straight_line(self, single_mode_scenario, tmp_path):
        out = tmp_path / "out"
        assert main(["trace", "--scenario", single_mode_scenario,
                     "--out", str(out), "--start", "0,0",
                     "--span", "0:5", "--quiet"]) == 0
        _, cols = read_csv(out / "trajectory_000.csv")
        pts = ~np.isnan(cols["x"])
        slope = 1.0 / np.sqrt(2.0)
        dev = cols["x"][pts] - slope * cols["t"][pts]
        assert np.max(np.abs(dev)) < 1e-7

    def test_empty_starts_warns_and_succeeds(self, single_mode_scenario,
                                             tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["trace", "--scenario", single_mode_scenario,
                     "--out", str(out), "--quiet"]) == 0
        assert "warning" in capsys.readouterr().err
        assert not list(out.glob("*.csv"))

    def test_event_rows_in_param_order(self, tmp_path):
        out = tmp_path / "out"
        assert main(["trace", "--scenario", REFERENCE, "--out", str(out),
                     "--start", "3.3375,4.2", "--span", "0:40",
                     "--quiet"]) == 0
        with open(out / "trajectory_000.csv", encoding="utf-8") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")][1:]
        params = [float(ln.split(",")[0]) for ln in lines]
        assert params == sorted(params)
        events = [ln.strip().split(",")[-1] for ln in lines if ln.strip().split(",")[-1]]
        assert any(e.startswith("hyperplane_crossing") for e in events)


class TestClassify:
    def test_single_mode_all_prime(self, single_mode_scenario, tmp_path):
        out = tmp_path / "out"
        assert main(["classify", "--scenario", single_mode_scenario,
                     "--out", str(out), "--grid", "64", "--quiet"]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["cell_counts"]["sigma_prime"] == 64
        assert summary["cell_counts"]["sigma_plus"] == 0

    def test_reference_flux_and_key_order(self, tmp_path):
        out = tmp_path / "out"
        assert main(["classify", "--scenario", REFERENCE, "--out", str(out),
                     "--grid", "400", "--quiet"]) == 0
        text = (out / "summary.json").read_text()
        summary = json.loads(text)
        assert 0.99 <= summary["flux"] <= 1.01
        assert text == json.dumps(summary, sort_keys=True, indent=2) + "\n"


class TestEnsemble:
    def test_equivariance_report(self, tmp_path):
        out = tmp_path / "out"
        assert main(["ensemble", "--scenario",
                     str(SCENARIOS / "interference_equivariance.json"),
                     "--out", str(out), "--n", "2000", "--quiet"]) == 0
        report = json.loads((out / "comparison.json").read_text())
        assert report["l1"] <= 0.25  # loose band at this small n
        assert report["n"] == 2000

    def test_seed_changes_histogram(self, tmp_path):
        masses = []
        for seed in ("1", "2"):
            out = tmp_path / seed
            main(["ensemble", "--scenario",
                  str(SCENARIOS / "interference_equivariance.json"),
                  "--out", str(out), "--n", "1000", "--seed", seed, "--quiet"])
            _, cols = read_csv(out / "histogram.csv")
            masses.append(cols["mass_mc"])
        assert not np.array_equal(masses[0], masses[1])


class TestMeasure:
    def test_outcome_structure(self, tmp_path):
        out = tmp_path / "out"
        assert main(["measure", "--scenario",
                     str(SCENARIOS / "channel_measurement.json"),
                     "--out", str(out), "--n", "500", "--quiet"]) == 0
        doc = json.loads((out / "outcome.json").read_text())
        assert sum(doc["counts"]) + doc["unresolved"] == 500
        assert doc["born_probabilities"][0] == pytest.approx(0.7)
        assert abs(doc["frequencies"][0] - 0.7) < 0.1


class TestPlot:
    def test_worldline_renders_dashed_backward_segments(self, tmp_path):
        out = tmp_path / "out"
        main(["trace", "--scenario", REFERENCE, "--out", str(out),
              "--start", "3.3375,4.2", "--span", "0:40", "--quiet"])
        svg = tmp_path / "w.svg"
        assert main(["plot", str(out / "trajectory_000.csv"),
                     "--out", str(svg), "--quiet"]) == 0
        text = svg.read_text()
        assert "<svg" in text and "stroke-dasharray" in text

    def test_classification_plot_has_zero_bands(self, tmp_path):
        out = tmp_path / "out"
        main(["classify", "--scenario", REFERENCE, "--out", str(out),
              "--grid", "200", "--quiet"])
        svg = tmp_path / "c.svg"
        assert main(["plot", str(out / "classification.csv"),
                     "--out", str(svg), "--quiet"]) == 0
        assert "<rect" in svg.read_text()

    def test_empty_input_is_a_usage_error(self, tmp_path):
        assert main(["plot", "--out", str(tmp_path / "x.svg"),
                     "--quiet"]) == 2
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        assert main(["plot", str(empty), "--out", str(tmp_path / "y.svg"),
                     "--quiet"]) == 2


class TestExitCodes:
    def test_parse_error_is_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        assert main(["classify", "--scenario", str(bad),
                     "--out", str(tmp_path / "o"), "--quiet"]) == 2

    def test_missing_scenario_is_2(self, tmp_path):
        assert main(["classify", "--scenario", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "o"), "--quiet"]) == 2

    def test_precondition_violation_is_4(self, backflow_everywhere_scenario,
                                         tmp_path):
        assert main(["classify", "--scenario", backflow_everywhere_scenario,
                     "--out", str(tmp_path / "o"), "--grid", "64",
                     "--quiet"]) == 4

    def test_run_record_goes_to_stderr_only(self, single_mode_scenario,
                                            tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["field", "--scenario", single_mode_scenario,
                     "--out", str(out), "--grid", "32"]) == 0
        captured = capsys.readouterr()
        assert "elapsed" in captured.err
        assert captured.out == ""
