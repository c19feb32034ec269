from datetime import datetime

import pytest

from src.db import sql_templates
from src.db.db_manager import DBManager
from src.error_handling.error_handling import ErrorCode, ErrorManager, ErrorSeverity, FuseLabException
from src.harness.demo2d import DemoRecord
from src.harness.experiment import ResultRecord


def make_record(method="ams_top1", accuracy=0.9):
    return ResultRecord("mnist", "hetero_dir", 0.5, 5, "1", method, 0, 0, accuracy, 10.0)


def test_insert_and_filter_by_run(db):
    db.insert_results([make_record("fedavg", 0.6), make_record("ams_top1", 0.9)], "run-a")
    db.insert_result(make_record("ensemble_uniform", 0.7), "run-b")
    assert [r["method"] for r in db.get_results("run-a")] == ["fedavg", "ams_top1"]
    assert len(db.get_results()) == 3
    row = db.get_results("run-b")[0]
    assert row["partition"] == "hetero_dir" and row["depth"] == "1" and row["accuracy"] == 0.7


def test_ids_continue_after_reopen(tmp_path):
    path = str(tmp_path / "results.duckdb")
    first = DBManager(path)
    first.insert_result(make_record(), "r1")
    first.close()
    second = DBManager(path)
    assert second.result_id_counter == 2
    assert second.insert_result(make_record(), "r2") == 2
    second.close()


def test_demo_results(db):
    db.insert_demo_result(DemoRecord(7, 0.8, 0.79, 0.98, "success"), "demo")
    assert db.get_demo_results("demo") == [
        {"seed": 7, "acc_left": 0.8, "acc_right": 0.79, "acc_global": 0.98, "outcome": "success"}]


def test_error_manager_persists(db):
    manager = ErrorManager(db_manager=db)
    manager.create_error(ErrorCode.CHECKSUM_MISMATCH, "models changed", ErrorSeverity.CRITICAL, "harness",
                         record_id="run:0", details={"method": "fedavg"})
    (row,) = db.get_errors()
    assert row[1] == "CHECKSUM_MISMATCH" and row[4] == "harness" and row[5] == "run:0"
    assert manager.has_critical_errors()
    assert manager.summary()["by_component"] == {"harness": 1}


def test_download_log(db):
    now = datetime.now()
    assert db.log_download("https://example.org/a.gz", now, now, 200)
    count = db.execute_query("SELECT COUNT(*) FROM download_log").fetchone()[0]
    assert count == 1


def test_bad_query_raises(db):
    with pytest.raises(FuseLabException) as exc:
        db.execute_query("SELECT * FROM no_such_table")
    assert exc.value.code == ErrorCode.DB_QUERY_ERROR


def test_templates_parse(db):
    for name in dir(sql_templates):
        if name.isupper():
            assert db._load_sql_template(name)
