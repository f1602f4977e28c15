import csv
import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from plselect.cli import main
from plselect.harness import (
    HarnessError,
    cmd_generate,
    cmd_report,
    cmd_run,
    cmd_run_baselines,
    default_config,
    load_config,
)
from plselect.search import SearchConfig


def small_config(tmp_path, seed=0, route_points=60, generations=8):
    cfg = default_config(master_seed=seed, out_dir=str(tmp_path / "out"))
    cfg.scenarios = {
        name: replace(sc, route_points=route_points)
        for name, sc in cfg.scenarios.items()
    }
    cfg.search = SearchConfig(
        population_size=10, generations=generations, elite_count=3,
        master_seed=seed,
    )
    cfg.random_baseline_seeds = 3
    return cfg


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def tree_bytes(root):
    root = Path(root)
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


class TestGenerate:
    def test_file_counts(self, tmp_path):
        cfg = small_config(tmp_path)
        written = cmd_generate(cfg)
        csvs = [p for p in written if p.suffix == ".csv"]
        scenes = [p for p in written if p.suffix == ".json"]
        assert len(csvs) == 3  # two scenarios plus pooled
        assert len(scenes) == 2

    def test_pooled_row_count(self, tmp_path):
        cfg = small_config(tmp_path)
        cmd_generate(cfg)
        data = Path(cfg.out_dir) / "data"
        parts = sum(
            len(read_rows(data / f"{name}.csv")) for name in cfg.scenarios
        )
        assert len(read_rows(data / "pooled.csv")) == parts == 120

    def test_rerun_byte_identical(self, tmp_path):
        cfg = small_config(tmp_path)
        cmd_generate(cfg)
        first = tree_bytes(cfg.out_dir)
        cmd_generate(cfg)
        assert tree_bytes(cfg.out_dir) == first


@pytest.fixture(scope="module")
def run_outputs(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("run")
    cfg = small_config(tmp)
    cmd_generate(cfg)
    results = cmd_run(cfg)
    return cfg, results


class TestRun:

    def test_task1_method_rows(self, run_outputs):
        cfg, _ = run_outputs
        rows = read_rows(Path(cfg.out_dir) / "results" / "task1_results.csv")
        methods = {r["method"] for r in rows}
        assert {"agent", "full", "random", "mi_ge_struct",
                "mi_ge_em"} <= methods

    def test_task3_sub_scenario_rows(self, run_outputs):
        cfg, _ = run_outputs
        rows = read_rows(Path(cfg.out_dir) / "results" / "task3_results.csv")
        tasks = [r["task"] for r in rows]
        assert "task3--intersection" in tasks
        assert "task3--square" in tasks
        plain = [r for r in rows if r["task"] == "task3"
                 and not r["method"].startswith("random_seed")]
        assert len(plain) == 5

    def test_generation_traces(self, run_outputs):
        cfg, _ = run_outputs
        results_dir = Path(cfg.out_dir) / "results"
        gens = read_rows(results_dir / "task1_generations.csv")
        assert len(gens) == cfg.search.generations
        for row in gens:
            assert 0.0 <= float(row["entropy"]) <= 1.0
            assert 0.0 <= float(row["diversity"]) <= 1.0
            assert len(row["best_mask"]) == 10
        policy = read_rows(results_dir / "task1_policy.csv")
        assert len(policy) == cfg.search.generations
        assert float(policy[0]["p1"]) == 0.5

    def test_rerun_identical(self, tmp_path):
        cfg = small_config(tmp_path, seed=5)
        cmd_generate(cfg)
        cmd_run(cfg, tasks=["task1"])
        first = tree_bytes(Path(cfg.out_dir) / "results")
        cmd_run(cfg, tasks=["task1"])
        assert tree_bytes(Path(cfg.out_dir) / "results") == first

    def test_unknown_task(self, tmp_path):
        cfg = small_config(tmp_path)
        cmd_generate(cfg)
        with pytest.raises(HarnessError):
            cmd_run(cfg, tasks=["task9"])

    def test_missing_dataset_names_task(self, tmp_path):
        cfg = small_config(tmp_path)
        with pytest.raises(HarnessError, match="task1"):
            cmd_run(cfg, tasks=["task1"])


class TestBaselinesCommand:
    def test_writes_baseline_rows(self, tmp_path):
        cfg = small_config(tmp_path)
        cmd_generate(cfg)
        cmd_run_baselines(cfg, tasks=["task1"])
        rows = read_rows(
            Path(cfg.out_dir) / "results" / "task1_baselines.csv"
        )
        methods = {r["method"] for r in rows}
        assert {"full", "mi_ge_struct", "mi_ge_em"} <= methods
        assert sum(m.startswith("random_seed") for m in methods) == 3


class TestReport:
    def test_summary_and_figures(self, tmp_path):
        cfg = small_config(tmp_path)
        cmd_generate(cfg)
        cmd_run(cfg, tasks=["task1", "task2"])
        summary = cmd_report(cfg.out_dir)
        for method in ("agent", "full", "random", "mi_ge_struct",
                       "mi_ge_em"):
            assert method in summary
        report = Path(cfg.out_dir) / "report"
        assert (report / "summary.txt").exists()
        fig = read_rows(report / "fig_entropy_diversity_task1.csv")
        assert all(0.0 <= float(r["entropy"]) <= 1.0 for r in fig)

    def test_empty_dir_lists_missing(self, tmp_path):
        with pytest.raises(HarnessError, match="missing"):
            cmd_report(str(tmp_path))


class TestConfigLoading:
    def test_json_and_env_overrides(self, tmp_path, monkeypatch):
        doc = {
            "master_seed": 7,
            "search": {"generations": 12, "population_size": 8,
                       "elite_count": 2},
            "weights": {"lambda_c": 0.2, "lambda_n": 0.4},
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc))
        monkeypatch.setenv("PLSELECT_SEARCH__GENERATIONS", "4")
        monkeypatch.setenv("PLSELECT_SHADOWING_SIGMA", "1.5")
        cfg = load_config(str(path))
        assert cfg.master_seed == 7
        assert cfg.search.generations == 4  # env beats file
        assert cfg.search.population_size == 8
        assert cfg.weights.lambda_c == 0.2
        assert cfg.shadowing_sigma == 1.5
        assert cfg.search.master_seed == 7

    def test_defaults_follow_published_settings(self):
        cfg = default_config()
        assert cfg.search.population_size == 25
        assert cfg.search.generations == 50
        assert cfg.search.eta == 0.1
        assert cfg.weights.lambda_c == 0.3
        assert cfg.weights.lambda_n == 0.3


class TestCli:
    def test_usage_error_exit_code(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1

    def test_report_missing_dir_exit_code(self, tmp_path):
        assert main(["report", "--out", str(tmp_path / "nope")]) == 2

    def test_end_to_end(self, tmp_path, capsys):
        out = str(tmp_path / "out")
        cfg_doc = {
            "search": {"population_size": 8, "generations": 4,
                       "elite_count": 2},
            "scenarios": {
                "intersection": {"route_points": 40},
                "square": {"route_points": 40},
            },
            "random_baseline_seeds": 2,
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg_doc))
        args = ["--config", str(cfg_path), "--seed", "1", "--out", out]
        assert main(["generate"] + args) == 0
        assert main(["run"] + args + ["--task", "task1"]) == 0
        assert main(["report", "--out", out]) == 0
        captured = capsys.readouterr()
        assert "agent" in captured.out
