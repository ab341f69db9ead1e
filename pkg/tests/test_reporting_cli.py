import json
from pathlib import Path

import numpy as np
import pytest

from pfev import cli, reporting
from pfev.direct import DirectConfig
from pfev.errors import NumericalError
from pfev.harness import ProblemSpec, ReferenceSpec, RunConfig, run_bo
from pfev.moo import Nsga2Config


def tiny_cfg_dict(**overrides):
    payload = {
        "problem": {
            "kind": "synthetic",
            "dim": 2,
            "n_objectives": 2,
            "length_scale": 0.2,
            "seed": 3,
        },
        "strategy": "pfev-map",
        "iterations": 2,
        "k_samples": 2,
        "nsga2": {"population": 8, "generations": 10},
        "direct": {"max_evaluations": 40},
        "n_features": 32,
        "reference": {"generations": 60, "population": 12},
        "seed": 0,
    }
    payload.update(overrides)
    return payload


@pytest.fixture(scope="module")
def run_history(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    from pfev.harness import config_from_dict

    cfg = config_from_dict(tiny_cfg_dict())
    history = run_bo(cfg, out_dir=out)
    return history, out


class TestEmitParse:
    def test_round_trip_equality(self, run_history):
        history, out = run_history
        parsed = reporting.parse_history(out)
        assert parsed == history

    def test_history_header_schema(self, run_history):
        _, out = run_history
        first = json.loads((out / "history.jsonl").read_text().splitlines()[0])
        assert first["schema_version"] == reporting.SCHEMA_VERSION
        assert first["kind"] == "history"

    def test_history_excludes_wall_clock(self, run_history):
        _, out = run_history
        text = (out / "history.jsonl").read_text()
        assert "timings" not in text
        assert "timings" in (out / "timings.jsonl").read_text()

    def test_figure_and_summary_written(self, run_history):
        _, out = run_history
        assert (out / "rhv.png").stat().st_size > 0
        summary = (out / "summary.csv").read_text().splitlines()
        assert summary[0].startswith("# pfev-schema")
        assert summary[1].split(",")[0] == "iteration"
        assert len(summary) == 2 + 2  # header comment + column row + 2 iterations


class TestTables:
    def test_table_round_trip(self, tmp_path):
        rows = [
            {"name": "a", "k": 10, "value": 0.5},
            {"name": "b", "k": 100, "value": 1.25},
        ]
        path = reporting.emit_table(rows, tmp_path / "t.csv", kind="unit-test")
        back = reporting.read_table(path)
        assert back == rows

    def test_missing_schema_header_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            reporting.read_table(bad)

    def test_rhv_series_aggregation(self, run_history):
        history, _ = run_history
        rows = reporting.rhv_series([history, history])
        assert len(rows) == len(history.records)
        for row, rec in zip(rows, history.records):
            assert row["rhv_mean"] == pytest.approx(rec.rhv)
            assert row["rhv_sd"] == pytest.approx(0.0, abs=1e-15)
            assert row["n_seeds"] == 2

    def test_plots_render(self, run_history, tmp_path):
        history, _ = run_history
        series = reporting.rhv_series([history])
        p1 = reporting.plot_rhv_bands({"pfev-map": series}, tmp_path / "bands.png")
        assert p1.stat().st_size > 0
        gap_rows = [
            {"n_objectives": 2, "frontier_size": s, "seed": 0, "true_volume": 0.5,
             "over_volume": 0.4, "under_volume": 0.6, "over_ratio": 0.8, "under_ratio": 1.2}
            for s in (10, 100)
        ]
        p2 = reporting.plot_gap_study(gap_rows, tmp_path / "gap.png")
        assert p2.stat().st_size > 0
        est_rows = [
            {"estimator": "naive-mc", "k": k, "mse_mean": 1.0 / k, "mse_se": 0.1 / k,
             "n_seeds": 2, "gt_samples": 100}
            for k in (10, 100)
        ]
        p3 = reporting.plot_estimator_study(est_rows, tmp_path / "est.png")
        assert p3.stat().st_size > 0


class TestCli:
    def write_config(self, tmp_path, payload):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(payload))
        return str(path)

    def test_run_success(self, tmp_path):
        cfg = self.write_config(tmp_path, tiny_cfg_dict())
        code = cli.main(["run", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 0
        run_dir = tmp_path / "out" / "run-pfev-map-seed0"
        for name in ("history.jsonl", "timings.jsonl", "summary.csv", "rhv.png"):
            assert (run_dir / name).exists()

    def test_cli_overrides(self, tmp_path):
        cfg = self.write_config(tmp_path, tiny_cfg_dict())
        code = cli.main(
            [
                "run", "--config", cfg, "--out", str(tmp_path / "out"),
                "--strategy", "random", "--seed", "5", "--iterations", "3",
            ]
        )
        assert code == 0
        run_dir = tmp_path / "out" / "run-random-seed5"
        lines = (run_dir / "history.jsonl").read_text().splitlines()
        assert len(lines) == 1 + 3

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert cli.main(["run", "--config", str(bad)]) == 2
        cfg = self.write_config(tmp_path, {"strategy": "nope"})
        assert cli.main(["run", "--config", cfg]) == 2
        assert cli.main(["run", "--config", str(tmp_path / "missing.json")]) == 2

    def test_numerical_error_exit_code(self, tmp_path, monkeypatch):
        cfg = self.write_config(tmp_path, tiny_cfg_dict())

        def boom(*args, **kwargs):
            raise NumericalError("synthetic failure", (1e-10,))

        monkeypatch.setattr(cli, "run_bo", boom)
        code = cli.main(["run", "--config", cfg, "--out", str(tmp_path / "out")])
        assert code == 3

    def test_output_root_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
        monkeypatch.chdir(tmp_path)
        cfg = self.write_config(tmp_path, tiny_cfg_dict(strategy="random"))
        assert cli.main(["run", "--config", cfg]) == 0
        assert (tmp_path / "root" / "run-random-seed0" / "history.jsonl").exists()

    def test_gap_study_command(self, tmp_path):
        code = cli.main(
            [
                "gap-study", "--out", str(tmp_path), "--objectives", "2",
                "--sizes", "10", "50", "--gap-seeds", "2",
            ]
        )
        assert code == 0
        assert (tmp_path / "gap-study" / "gap_study.csv").exists()
        assert (tmp_path / "gap-study" / "gap_study.png").stat().st_size > 0

    def test_estimator_study_command(self, tmp_path):
        code = cli.main(
            [
                "estimator-study", "--out", str(tmp_path),
                "--study-seeds", "2", "--gt-samples", "200", "--k-values", "10",
            ]
        )
        assert code == 0
        assert (tmp_path / "estimator-study" / "estimator_study.csv").exists()

    def test_ref_frontier_command(self, tmp_path):
        cfg = self.write_config(
            tmp_path,
            {"problem": {"kind": "named", "name": "fonseca"}},
        )
        code = cli.main(
            [
                "ref-frontier", "--config", cfg, "--out", str(tmp_path),
                "--generations", "50", "--population", "12",
            ]
        )
        assert code == 0
        assert list((tmp_path / "ref-cache").glob("ref_fonseca*"))

    def test_bench_command(self, tmp_path):
        payload = {
            "base": tiny_cfg_dict(),
            "problems": [
                {"kind": "synthetic", "dim": 2, "n_objectives": 2,
                 "length_scale": 0.2, "seed": 3}
            ],
            "strategies": ["random", "pfev-map"],
            "seeds": [0, 1],
        }
        payload["base"].pop("problem")
        cfg = self.write_config(tmp_path, payload)
        code = cli.main(
            ["bench", "--config", cfg, "--out", str(tmp_path), "--threads", "2"]
        )
        assert code == 0
        bench = tmp_path / "bench"
        problem_dir = bench / "syn-d2-L2-ls0.2-s3"
        assert (problem_dir / "rhv_compare.png").stat().st_size > 0
        assert (problem_dir / "series_random.csv").exists()
        assert (problem_dir / "series_pfev-map.csv").exists()
        assert (bench / "final_rhv.csv").exists()
        rows = reporting.read_table(bench / "final_rhv.csv")
        assert len(rows) == 4

    def test_bench_requires_matrix(self, tmp_path):
        cfg = self.write_config(tmp_path, {"base": {}})
        assert cli.main(["bench", "--config", cfg]) == 2
