from pathlib import Path

import pandas as pd
import pytest
import yaml
from click.testing import CliRunner

from rrgraph.cli import main
from rrgraph.outputs import load_subgraph


@pytest.fixture
def config_path(tmp_path):
    """Settings that keep every artifact under the test's tmp dir"""
    artifacts = tmp_path / "artifacts"
    data = {
        "paths": {
            "output_dir": str(artifacts / "runs"),
            "logs_dir": str(artifacts / "logs"),
            "manifests_dir": str(artifacts / "manifests"),
            "traces_dir": str(artifacts / "traces"),
            "metrics_file": str(artifacts / "metrics.prom"),
        },
        "runtime": {"threads": 1},
    }
    path = tmp_path / "settings.yaml"
    path.write_text(yaml.safe_dump(data))
    return str(path)


@pytest.fixture
def rrg(config_path):
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, ["--config", config_path, *args])

    return invoke


def manifests(config_path):
    return sorted((Path(config_path).parent / "artifacts" / "manifests").glob("*.json"))


class TestOutputs:
    def test_survival(self, rrg, tmp_path):
        out = tmp_path / "survival.csv"
        result = rrg("survival", "--epsilon", "1.0", "--out", str(out))
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(out)
        assert frame.loc[0, "root"] == pytest.approx(0.796812, abs=1e-6)
        assert frame.loc[0, "lam"] == 2.0

    def test_critical_rates(self, rrg, tmp_path):
        out = tmp_path / "rates.csv"
        result = rrg("critical-rates", "--lengths", "2.5,8.8", "--out", str(out))
        assert result.exit_code == 0, result.output
        assert pd.read_csv(out)["rounded"].tolist() == [0.23, 0.02]

    def test_sweep_writes_all_tables(self, rrg, tmp_path):
        result = rrg("sweep", "--n", "3-4", "--c", "0.5,1.5", "--trials", "2", "--seed", "5",
                     "--out", str(tmp_path / "summary.csv"),
                     "--per-trial", str(tmp_path / "trials.csv"),
                     "--plot", str(tmp_path / "plot.csv"))
        assert result.exit_code == 0, result.output
        summary = pd.read_csv(tmp_path / "summary.csv")
        assert len(summary) == 4
        assert "lambda" in summary.columns
        trials = pd.read_csv(tmp_path / "trials.csv")
        assert len(trials) == 8
        assert list(pd.read_csv(tmp_path / "plot.csv").columns) == [
            "n", "c", "mean_largest_fraction", "predicted_wp",
        ]

    def test_transposition_sweep(self, rrg, tmp_path):
        out = tmp_path / "tau.csv"
        result = rrg("transposition-sweep", "--n", "3", "--c", "1.5", "--trials", "2",
                     "--seed", "1", "--out", str(out))
        assert result.exit_code == 0, result.output
        assert pd.read_csv(out)["gens"].tolist() == ["transpositions", "transpositions_no_flips"]

    def test_components_and_edge_stream(self, rrg, tmp_path):
        out, edges = tmp_path / "components.csv", tmp_path / "edges.bin"
        result = rrg("components", "--n", "4", "--lambda", "1.0", "--seed", "2",
                     "--save-edges", str(edges), "--out", str(out))
        assert result.exit_code == 0, result.output
        assert pd.read_csv(out).loc[0, "largest"] == 384
        assert load_subgraph(str(edges)).edge_count == 384 * 10 // 2

    def test_explore(self, rrg, tmp_path):
        out = tmp_path / "explore.csv"
        result = rrg("explore", "--n", "5", "--c", "1.5", "--trials", "4", "--seed", "3",
                     "--cutoff", "50", "--out", str(out))
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(out)
        assert len(frame) == 4
        assert (frame["component_size"] <= 50).all()

    def test_tree(self, rrg, tmp_path):
        out, dump = tmp_path / "tree.csv", tmp_path / "tree.txt"
        result = rrg("tree", "--n", "32", "--lambda", "1.0", "--runs", "3", "--seed", "1",
                     "--dump", str(dump), "--out", str(out))
        assert result.exit_code == 0, result.output
        assert pd.read_csv(out).loc[0, "frequency"] == 1.0
        assert len(dump.read_text().splitlines()) == 3

    def test_branching(self, rrg, tmp_path):
        out = tmp_path / "branching.csv"
        result = rrg("branching", "--law", "binomial", "--m", "10,100", "--mean", "2",
                     "--trials", "2000", "--seed", "4", "--out", str(out))
        assert result.exit_code == 0, result.output
        assert pd.read_csv(out)["m"].tolist() == [10, 100]

    def test_graph(self, rrg, tmp_path):
        out = tmp_path / "graph.csv"
        result = rrg("graph", "--n", "4", "--out", str(out))
        assert result.exit_code == 0, result.output
        row = pd.read_csv(out).loc[0]
        assert (row["degree"], row["diameter"], row["vertex_count"]) == (10, 5, 384)

    def test_distance(self, rrg, tmp_path):
        out = tmp_path / "distance.csv"
        result = rrg("distance", "--n", "3", "--to", "(-3,-2,-1)", "--out", str(out))
        assert result.exit_code == 0, result.output
        assert pd.read_csv(out).loc[0, "distance"] == 1

    def test_distance_ball(self, rrg, tmp_path):
        members, out = tmp_path / "set.txt", tmp_path / "ball.txt"
        members.write_text("(+1,+2,+3)\n")
        result = rrg("distance", "--n", "3", "--set", str(members), "--radius", "1",
                     "--out", str(out))
        assert result.exit_code == 0, result.output
        assert len(out.read_text().splitlines()) == 7

    def test_density_random_subsets(self, rrg, tmp_path):
        out = tmp_path / "density.csv"
        result = rrg("density", "--n", "3", "--random-subsets", "20", "--seed", "1",
                     "--out", str(out))
        assert result.exit_code == 0, result.output
        assert pd.read_csv(out)["holds"].all()

    def test_sweep_window(self, rrg, tmp_path):
        out = tmp_path / "window.csv"
        result = rrg("sweep", "--window", "--n", "4,5", "--trials", "2", "--seed", "1",
                     "--out", str(out))
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(out)
        assert frame["c"].tolist() == pytest.approx([1 + 4**-0.125, 1 + 5**-0.125])
        assert frame["small_epsilon_branch"].tolist() == pytest.approx(
            [2 * 4**-0.125, 2 * 5**-0.125]
        )

    def test_sweep_reports_tripped_guard_per_row(self, rrg, tmp_path):
        out = tmp_path / "guarded.csv"
        result = rrg("--set", "limits.max_edges_examined=200", "sweep", "--n", "4",
                     "--c", "0.0,3.0", "--method", "lazy", "--cutoff", "300", "--trials", "4",
                     "--seed", "1", "--out", str(out))
        assert result.exit_code == 0, result.output
        status = pd.read_csv(out)["status"].tolist()
        assert status[0] == "ok"
        assert status[1].startswith("resource limit")

    def test_each_run_has_its_own_log(self, rrg, config_path):
        assert rrg("survival", "--epsilon", "0.5").exit_code == 0
        (manifest,) = manifests(config_path)
        logs = Path(config_path).parent / "artifacts" / "logs"
        log_file = logs / f"rrg_{manifest.stem}.log"
        assert "survival started" in log_file.read_text()


class TestDeterminism:
    def test_sweep_rerun_is_byte_identical(self, rrg, tmp_path):
        args = ["sweep", "--n", "4", "--c", "0.5,1.5", "--trials", "3", "--seed", "42"]
        assert rrg(*args, "--out", str(tmp_path / "a.csv")).exit_code == 0
        assert rrg(*args, "--out", str(tmp_path / "b.csv")).exit_code == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_threads_do_not_change_output(self, config_path, tmp_path):
        runner = CliRunner()
        args = ["sweep", "--n", "4", "--c", "1.5", "--trials", "6", "--seed", "7",
                "--method", "both", "--cutoff", "100"]
        for threads in ("1", "4", "8"):
            result = runner.invoke(main, ["--config", config_path, "--threads", threads, *args,
                                          "--out", str(tmp_path / f"t{threads}.csv")])
            assert result.exit_code == 0, result.output
        reference = (tmp_path / "t1.csv").read_bytes()
        assert (tmp_path / "t4.csv").read_bytes() == reference
        assert (tmp_path / "t8.csv").read_bytes() == reference

    def test_replay_reproduces_output(self, rrg, config_path, tmp_path):
        first = tmp_path / "first.csv"
        assert rrg("sweep", "--n", "3", "--c", "1.5", "--trials", "2", "--out", str(first)).exit_code == 0
        (manifest,) = manifests(config_path)
        replayed = tmp_path / "replayed.csv"
        result = rrg("replay", str(manifest), "--out", str(replayed))
        assert result.exit_code == 0, result.output
        assert first.read_bytes() == replayed.read_bytes()

    def test_replay_restores_recorded_settings(self, rrg, config_path, tmp_path):
        first = tmp_path / "first.csv"
        result = rrg("--set", "sampling.cutoff_exponent=1", "sweep", "--n", "5", "--c", "0.8",
                     "--method", "lazy", "--trials", "20", "--seed", "3", "--out", str(first))
        assert result.exit_code == 0, result.output
        assert pd.read_csv(first).loc[0, "mean_largest_fraction"] > 0
        (manifest,) = manifests(config_path)
        replayed = tmp_path / "replayed.csv"
        result = rrg("replay", str(manifest), "--out", str(replayed))
        assert result.exit_code == 0, result.output
        assert first.read_bytes() == replayed.read_bytes()


class TestExitCodes:
    def test_infeasible_n(self, rrg):
        assert rrg("components", "--n", "9", "--c", "1.0", "--seed", "1").exit_code == 3

    def test_c_and_lambda_are_exclusive(self, rrg):
        assert rrg("components", "--n", "3", "--c", "1.0", "--lambda", "0.1").exit_code == 2

    def test_invalid_value(self, rrg):
        assert rrg("critical-rates", "--lengths", "0.5").exit_code == 2

    def test_unknown_flag(self, rrg):
        assert rrg("survival", "--bogus", "1").exit_code == 2

    def test_missing_config(self, tmp_path):
        result = CliRunner().invoke(main, ["--config", str(tmp_path / "nope.yaml"), "survival",
                                           "--epsilon", "1"])
        assert result.exit_code == 4

    def test_missing_manifest(self, rrg, tmp_path):
        assert rrg("replay", str(tmp_path / "nope.json")).exit_code == 4

    def test_failed_runs_still_leave_a_manifest(self, rrg, config_path):
        rrg("components", "--n", "9", "--c", "1.0", "--seed", "1")
        assert len(manifests(config_path)) == 1

    def test_window_excludes_explicit_rates(self, rrg):
        assert rrg("sweep", "--window", "--n", "4", "--c", "1.5").exit_code == 2
