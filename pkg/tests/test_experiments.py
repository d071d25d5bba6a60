"""Benchmark protocol, summaries, row files, plots and the command line."""

from __future__ import annotations

import math

import numpy as np
import pytest

from icet import cli
from icet import experiments as ex
from icet.experiments import ExperimentConfig, ExperimentError, ResultRow

from conftest import dataset_available

needs_hepatitis = pytest.mark.skipif(not dataset_available("hepatitis"), reason="hepatitis data file not present")


def row(dataset="d", algorithm="EG2", k=10.0, split=0, norm=50.0, spend=10.0, err=20.0):
    return ResultRow(dataset, algorithm, float(k), split, norm / 2, norm, spend, err)


class TestSummarize:
    def test_identical_rows_zero_width(self):
        rows = [row(split=s) for s in range(4)]
        (cell,) = ex.summarize(rows, (10, 10))
        assert cell.mean == 50 and cell.half_width == 0 and cell.n_splits == 4

    def test_two_splits(self):
        (cell,) = ex.summarize([row(split=0, norm=40), row(split=1, norm=60)], (10, 10))
        assert cell.mean == pytest.approx(50)
        assert cell.half_width == pytest.approx(1.96 * np.std([40, 60], ddof=1) / math.sqrt(2))

    def test_datasets_weigh_equally(self):
        # dataset "a" has two costs in the window, "b" one; each counts once
        rows = [row("a", k=10, norm=10), row("a", k=100, norm=30), row("b", k=10, norm=80)]
        (cell,) = ex.summarize(rows, (10, 100))
        assert cell.mean == pytest.approx((20 + 80) / 2)

    def test_window(self):
        rows = [row(k=10, norm=10), row(k=100, norm=20), row(k=1000, norm=90)]
        assert ex.summarize(rows, ex.LOW_WINDOW)[0].mean == pytest.approx(15)
        assert ex.summarize(rows, ex.FULL_WINDOW)[0].mean == pytest.approx(40)

    def test_empty(self):
        with pytest.raises(ExperimentError):
            ex.summarize([])

    def test_markdown_shape(self):
        rows = [row(algorithm=a, k=k, split=s) for a in ("ICET", "EG2") for k in (10, 100, 1000) for s in (0, 1)]
        text = ex.summary_markdown(rows)
        assert "$10 to $10,000" in text and "$10 to $100" in text
        assert "| ICET |" in text and "| EG2 |" in text


class TestRowFiles:
    def test_round_trip(self, tmp_path):
        rows = [row(k=k, split=s, norm=10 * s + k / 7) for k in (10, 50) for s in range(3)]
        path = tmp_path / "rows.csv"
        path.write_text(ex.rows_to_csv(rows))
        back = ex.read_rows(path)
        # values are written to 10 decimals; re-writing is idempotent
        assert ex.rows_to_csv(back) == path.read_text()
        for a, b in zip(back, rows):
            assert (a.dataset, a.algorithm, a.error_cost, a.split) == (b.dataset, b.algorithm, b.error_cost, b.split)
            assert a.normalized_cost_pct == pytest.approx(b.normalized_cost_pct, abs=1e-9)
        assert ex.summary_markdown(back) == ex.summary_markdown(rows)
        assert path.read_text().splitlines()[0] == ",".join(ex.ROW_COLUMNS)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "rows.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(ExperimentError):
            ex.read_rows(p)

    def test_empty_rows_write_nothing(self, tmp_path):
        with pytest.raises(ExperimentError):
            ex.emit_outputs([], tmp_path / "out")
        assert not (tmp_path / "out").exists()


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.n_splits == 10 and cfg.error_costs == (10, 50, 100, 500, 1000, 5000, 10000)
        assert cfg.datasets == ex.DATASETS and cfg.algorithms == ex.ALGORITHMS
        ga = cfg.ga_config(1)
        assert (ga.population_size, ga.total_trials, ga.crossover_rate, ga.mutation_rate) == (50, 1000, 0.6, 0.001)

    def test_desk_scale(self):
        cfg = ExperimentConfig(scale="desk")
        ga = cfg.ga_config(1)
        assert cfg.n_splits == 3 and (ga.population_size, ga.total_trials) == (20, 200)

    def test_variants(self):
        assert ExperimentConfig(variant="seeded").ga_config(1).seed_with_true_costs
        assert ExperimentConfig(variant="binary").ga_config(1).mode == "binary"
        ga = ExperimentConfig(variant="mutation-only", mutation_rate=0.05).ga_config(1)
        assert ga.crossover_rate == 0 and ga.mutation_rate == 0.05

    def test_ratio_settings(self):
        settings = ExperimentConfig(variant="ratios").cost_settings()
        # (positive, negative) with negative / positive = ratio
        assert [s.label for s in settings] == [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
        assert all(s.test[1] / s.test[0] == pytest.approx(s.label) for s in settings)
        assert all(min(s.test) == 50 for s in settings)

    def test_mismatch_settings(self):
        settings = ExperimentConfig(variant="mismatch").cost_settings()
        assert [s.train for s in settings] == [(100, 100)] * 3
        assert [s.test for s in settings] == [(50, 50), (100, 100), (500, 500)]

    def test_no_delay_and_no_discount_schemas(self):
        from icet.schema import load_cost_config

        schema = load_cost_config("heart").schema
        assert not any(e.delayed for e in ExperimentConfig(variant="no-delay").schema_for(schema))
        assert not any(e.group for e in ExperimentConfig(variant="no-discount").schema_for(schema))

    def test_unknown_names(self):
        with pytest.raises(ExperimentError):
            ExperimentConfig(datasets=("iris",))
        with pytest.raises(ExperimentError):
            ExperimentConfig(algorithms=("ID3",))
        with pytest.raises(ExperimentError):
            ExperimentConfig(variant="fancy")

    def test_missing_data_fails_fast(self, tmp_path):
        cfg = ExperimentConfig(datasets=("bupa",), data_dir=str(tmp_path))
        with pytest.raises(ExperimentError, match=str(tmp_path)):
            ex.run_experiment(cfg)

    def test_seeds_are_distinct(self):
        assert ex.split_seed(1, 0) != ex.split_seed(1, 1)
        assert ex.icet_seed(1, "bupa", 0, 0) != ex.icet_seed(1, "pima", 0, 0)


TINY = dict(datasets=("hepatitis",), error_costs=(10.0, 100.0, 1000.0), splits=2, scale="desk")


@needs_hepatitis
class TestRuns:
    def test_canonical_splits_shared(self):
        a = ex._load_context("hepatitis", ExperimentConfig(**TINY))
        b = ex._load_context("hepatitis", ExperimentConfig(**TINY, algorithms=("EG2",), variant="seeded"))
        for p, q in zip(a.splits, b.splits):
            assert np.array_equal(p.train.X, q.train.X) and np.array_equal(p.test.y, q.test.y)
        assert (len(a.splits[0].train), len(a.splits[0].test)) == (103, 52)

    def test_fixed_bias_trees_constant_across_costs(self):
        rows = ex.run_experiment(ExperimentConfig(**{**TINY, "algorithms": ("EG2", "CSID3", "IDX", "C45")}))
        for alg in ("EG2", "CSID3", "IDX", "C45"):
            for s in range(2):
                sel = [r for r in rows if r.algorithm == alg and r.split == s]
                assert len(sel) == 3
                assert len({r.test_expenditure_pct for r in sel}) == 1
                assert len({r.error_rate_pct for r in sel}) == 1

    def test_byte_identical_and_worker_independent(self, tmp_path):
        cfg = ExperimentConfig(**TINY, algorithms=("ICET", "EG2"))
        a = ex.emit_outputs(ex.run_experiment(cfg), tmp_path / "a", plots=False)
        b = ex.emit_outputs(ex.run_experiment(ExperimentConfig(**TINY, algorithms=("ICET", "EG2"), workers=2)), tmp_path / "b", plots=False)
        assert (tmp_path / "a" / "rows.csv").read_bytes() == (tmp_path / "b" / "rows.csv").read_bytes()
        assert (tmp_path / "a" / "summary.md").read_bytes() == (tmp_path / "b" / "summary.md").read_bytes()
        assert [p.name for p in a] == [p.name for p in b]

    def test_rows_complete(self):
        rows = ex.run_experiment(ExperimentConfig(**TINY))
        assert len(rows) == 5 * 3 * 2
        assert rows == ex.sort_rows(rows)
        for r in rows:
            assert 0 <= r.error_rate_pct <= 100 and r.average_cost >= 0
            assert r.normalized_cost_pct > 0

    def test_mismatch_rescoring(self):
        rows = ex.run_experiment(ExperimentConfig(datasets=("hepatitis",), algorithms=("ICET",), splits=1, scale="desk", variant="mismatch"))
        # one tree trained at $100, re-costed three times
        assert [r.error_cost for r in rows] == [50.0, 100.0, 500.0]
        assert len({r.test_expenditure_pct for r in rows}) == 1


@needs_hepatitis
class TestCli:
    def test_run_summarize_plot(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = cli.main(["run", "--datasets", "hepatitis", "--algorithms", "ICET,EG2,C45", "--error-costs", "10,100",
                         "--splits", "1", "--scale", "desk", "--out", str(out)])
        assert code == 0
        assert "| ICET |" in capsys.readouterr().out
        assert (out / "rows.csv").exists() and (out / "summary.md").exists()
        plots = sorted(p.name for p in (out / "plots").iterdir())
        assert plots == ["cost_average.png", "cost_hepatitis.png", "icet_expenditure_average.png", "icet_expenditure_hepatitis.png"]
        (out / "summary.md").unlink()
        assert cli.main(["summarize", "--out", str(out)]) == 0
        assert (out / "summary.md").exists()
        assert cli.main(["plot", "--out", str(out / "rows.csv")]) == 0

    def test_errors_exit_2(self, tmp_path):
        assert cli.main(["run", "--datasets", "iris", "--out", str(tmp_path)]) == 2
        assert cli.main(["run", "--datasets", "bupa", "--data-dir", str(tmp_path), "--out", str(tmp_path / "x")]) == 2
        assert cli.main(["summarize", "--out", str(tmp_path / "nothing")]) == 2

    def test_flags(self):
        p = cli.build_parser()
        args = p.parse_args(["run", "--variant", "mutation-only", "--mutation-rate", "0.15", "--out", "x"])
        assert args.variant == "mutation-only" and args.mutation_rate == 0.15
        for v in ex.VARIANTS:
            assert p.parse_args(["run", "--variant", v, "--out", "x"]).variant == v
