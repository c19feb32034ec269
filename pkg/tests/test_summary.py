import csv
import math
import os

import pytest

from src.harness.experiment import ResultRecord
from src.harness.summary import SUMMARY_HEADER, format_table, summarize, write_summary_csv


def record(method, trial, accuracy, alpha=0.5, depth="1"):
    return ResultRecord("mnist", "hetero_dir", alpha, 5, depth, method, trial, 1000 * trial, accuracy, 12.0)


def test_mean_and_sample_std():
    (row,) = summarize([record("ams_top1", 0, 0.8), record("ams_top1", 1, 0.9)])
    assert row.n == 2
    assert row.mean == pytest.approx(0.85)
    assert row.std == pytest.approx(math.sqrt(0.005))
    assert not row.single_trial


def test_single_trial_flagged():
    (row,) = summarize([record("fedavg", 0, 0.6)])
    assert row.std == 0.0 and row.single_trial
    assert "single trial" in format_table([row])


def test_groups_sorted_by_setting_then_method():
    rows = summarize([
        record("fedavg", 0, 0.5, alpha=1.0),
        record("ams_top1", 0, 0.7, alpha=1.0),
        record("fedavg", 0, 0.4, alpha=0.1),
    ])
    assert [(r.alpha, r.method) for r in rows] == [(0.1, "fedavg"), (1.0, "ams_top1"), (1.0, "fedavg")]


def test_accepts_csv_rows():
    rows = summarize([
        {"dataset": "mnist", "partition": "hetero_label", "alpha": "", "clients": "10", "depth": "1",
         "method": "ams_top1", "accuracy": "0.82"},
    ])
    assert rows[0].alpha is None and rows[0].clients == 10


def test_table_shows_percentages():
    table = format_table(summarize([record("ams_top1", 0, 0.8), record("ams_top1", 1, 0.9)]))
    assert "85.00%" in table and "ams_top1" in table


def test_write_summary_csv(tmp_path):
    rows = summarize([record("ams_top1", 0, 0.8), record("ams_top1", 1, 0.9)])
    path = write_summary_csv(rows, os.path.join(tmp_path, "summary.csv"))
    with open(path) as f:
        reader = csv.DictReader(f)
        assert reader.fieldnames == SUMMARY_HEADER
        (row,) = list(reader)
    assert float(row["mean"]) == pytest.approx(0.85)
