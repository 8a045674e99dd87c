import csv
import json

import numpy as np
import pytest

from exstab.harness import (
    RECORD_COLUMNS,
    SUMMARY_COLUMNS,
    ExperimentConfig,
    ResultsTable,
    emit_results,
    run_comparison,
)
from exstab.metrics import DiscrepancyRecord


@pytest.fixture(scope="module")
def small_config(toy_dataset):
    return ExperimentConfig(
        dataset=str(toy_dataset),
        max_length=50,
        train_docs=200,
        eval_docs=2,
        model_epochs=60,
        model_dim=16,
        m=40,
        permutations=24,
        levels=(0, 1, 2, 3, 4),
        seeds=(0,),
        k=5,
    )


@pytest.fixture(scope="module")
def small_table(small_config):
    return run_comparison(small_config)


class TestRunComparison:
    def test_cardinality(self, small_table):
        # 2 docs x 3 explainers x 2 sources x 5 levels x 1 seed
        assert len(small_table.records) + small_table.skipped_undefined_tau == 60

    def test_level_zero_rows_are_exact(self, small_table):
        zero_rows = [r for r in small_table.records if r.level == 0]
        assert zero_rows
        for rec in zero_rows:
            assert rec.kendall_tau == 1.0
            assert rec.topk_overlap == 1.0
            assert not rec.argmax_flipped

    def test_no_duplicate_keys(self, small_table):
        keys = [(r.doc_id, r.explainer, r.source, r.level, r.seed) for r in small_table.records]
        assert len(keys) == len(set(keys))

    def test_records_sorted(self, small_table):
        keys = [(r.doc_id, r.explainer, r.source, r.level, r.seed) for r in small_table.records]
        assert keys == sorted(keys)

    def test_paired_masks_make_replay_identical(self, small_config):
        # identical config -> identical table, including scores-level effects
        a = run_comparison(small_config)
        b = run_comparison(small_config)
        assert a.records == b.records

    def test_levels_only_zero(self, toy_dataset):
        config = ExperimentConfig(
            dataset=str(toy_dataset),
            train_docs=150,
            eval_docs=2,
            model_epochs=30,
            model_dim=8,
            m=24,
            permutations=12,
            levels=(0,),
            seeds=(0,),
        )
        table = run_comparison(config)
        assert table.records
        for rec in table.records:
            assert rec.kendall_tau == 1.0
            assert rec.topk_overlap == 1.0

    def test_parallel_matches_sequential(self, small_config, toy_dataset):
        sequential = run_comparison(small_config)
        parallel_config = ExperimentConfig(
            **{**_as_dict(small_config), "workers": 4}
        )
        parallel = run_comparison(parallel_config)
        assert sequential.records == parallel.records

    def test_summaries_match_recomputation(self, small_table):
        for row in small_table.summaries:
            values = [
                getattr(r, row.metric)
                for r in small_table.records
                if (r.explainer, r.source, r.level) == (row.explainer, row.source, row.level)
            ]
            assert row.mean == pytest.approx(float(np.mean(values)), abs=1e-12)
            assert row.n == len(values)


def _as_dict(config):
    from dataclasses import asdict

    return asdict(config)


class TestConfig:
    def test_json_round_trip(self, tmp_path, small_config):
        path = tmp_path / "config.json"
        path.write_text(small_config.to_json())
        loaded = ExperimentConfig.from_json(path)
        assert loaded == small_config

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"dataset": "x.tsv", "bogus": 1}))
        with pytest.raises(ValueError, match="bogus"):
            ExperimentConfig.from_json(path)

    def test_invalid_values(self):
        with pytest.raises(ValueError):
            ExperimentConfig(dataset="x", explainers=())
        with pytest.raises(ValueError):
            ExperimentConfig(dataset="x", levels=(7,))
        with pytest.raises(ValueError):
            ExperimentConfig(dataset="x", explainers=("gradient",))
        with pytest.raises(ValueError):
            ExperimentConfig(dataset="x", m=1)

    def test_digest_changes_with_config(self, small_config):
        other = ExperimentConfig(**{**_as_dict(small_config), "m": small_config.m + 1})
        assert other.digest() != small_config.digest()


class TestEmitResults:
    def test_empty_table_writes_headers_only(self, tmp_path):
        table = ResultsTable()
        emit_results(table, tmp_path)
        assert (tmp_path / "records.csv").read_text() == ",".join(RECORD_COLUMNS) + "\n"
        assert (tmp_path / "summary.csv").read_text() == ",".join(SUMMARY_COLUMNS) + "\n"

    def test_single_record_round_trips(self, tmp_path):
        rec = DiscrepancyRecord(
            doc_id=3,
            explainer="lime",
            source="output",
            level=2,
            sigma2=0.5,
            seed=1,
            kendall_tau=0.8125,
            topk_overlap=0.6,
            k=5,
            argmax_flipped=True,
        )
        table = ResultsTable(records=[rec])
        emit_results(table, tmp_path)
        with (tmp_path / "records.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        row = rows[0]
        assert int(row["doc_id"]) == 3
        assert row["explainer"] == "lime"
        assert float(row["sigma2"]) == 0.5
        assert float(row["kendall_tau"]) == 0.8125
        assert row["argmax_flipped"] == "true"

    def test_emitted_files_are_byte_deterministic(self, small_table, small_config, tmp_path):
        dir_a = tmp_path / "a"
        dir_b = tmp_path / "b"
        emit_results(small_table, dir_a, small_config)
        emit_results(small_table, dir_b, small_config)
        assert (dir_a / "records.csv").read_bytes() == (dir_b / "records.csv").read_bytes()
        assert (dir_a / "summary.csv").read_bytes() == (dir_b / "summary.csv").read_bytes()
        assert (dir_a / "config.json").read_bytes() == (dir_b / "config.json").read_bytes()

    def test_summary_recomputable_from_records_csv(self, small_table, tmp_path):
        emit_results(small_table, tmp_path)
        with (tmp_path / "records.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        groups = {}
        for row in rows:
            key = (row["explainer"], row["source"], int(row["level"]))
            groups.setdefault(key, []).append(float(row["kendall_tau"]))
        with (tmp_path / "summary.csv").open() as fh:
            for srow in csv.DictReader(fh):
                if srow["metric"] != "kendall_tau":
                    continue
                key = (srow["explainer"], srow["source"], int(srow["level"]))
                assert float(srow["mean"]) == pytest.approx(
                    float(np.mean(groups[key])), abs=1e-9
                )

    def test_lf_line_endings(self, small_table, tmp_path):
        emit_results(small_table, tmp_path)
        raw = (tmp_path / "records.csv").read_bytes()
        assert b"\r" not in raw
