# === CREATE TABLES ===

CREATE_EXPERIMENT_RESULTS_TABLE = """
    CREATE TABLE IF NOT EXISTS experiment_results (
        id INTEGER PRIMARY KEY,
        run_id VARCHAR,
        dataset VARCHAR,
        partition_strategy VARCHAR,
        alpha DOUBLE,
        clients INTEGER,
        depth VARCHAR,
        method VARCHAR,
        trial INTEGER,
        seed BIGINT,
        accuracy DOUBLE,
        wall_ms DOUBLE,
        recorded_at TIMESTAMP
    )
"""

CREATE_DEMO_RESULTS_TABLE = """
    CREATE TABLE IF NOT EXISTS demo_results (
        id INTEGER PRIMARY KEY,
        run_id VARCHAR,
        seed BIGINT,
        acc_left DOUBLE,
        acc_right DOUBLE,
        acc_global DOUBLE,
        outcome VARCHAR,
        recorded_at TIMESTAMP
    )
"""

CREATE_RUN_ERRORS_TABLE = """
    CREATE TABLE IF NOT EXISTS run_errors (
        id VARCHAR PRIMARY KEY,
        error_code INTEGER,
        error_type VARCHAR,
        message VARCHAR,
        timestamp TIMESTAMP,
        severity VARCHAR,
        component VARCHAR,
        source_file VARCHAR,
        record_id VARCHAR,
        details VARCHAR
    )
"""

CREATE_DOWNLOAD_LOG_TABLE = """
    CREATE TABLE IF NOT EXISTS download_log (
        id INTEGER PRIMARY KEY,
        url VARCHAR,
        start_time TIMESTAMP,
        end_time TIMESTAMP,
        code_response INTEGER,
        error_message VARCHAR
    )
"""

# === INSERT DATA ===

INSERT_EXPERIMENT_RESULT = """
    INSERT INTO experiment_results
    (id, run_id, dataset, partition_strategy, alpha, clients, depth, method, trial, seed, accuracy, wall_ms, recorded_at)
    VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
"""

INSERT_DEMO_RESULT = """
    INSERT INTO demo_results
    (id, run_id, seed, acc_left, acc_right, acc_global, outcome, recorded_at)
    VALUES (?, ?, ?, ?, ?, ?, ?, ?)
"""

INSERT_RUN_ERROR = """
    INSERT INTO run_errors
    VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
"""

INSERT_DOWNLOAD_LOG = """
    INSERT INTO download_log
    (id, url, start_time, end_time, code_response, error_message)
    VALUES (?, ?, ?, ?, ?, ?)
"""

# === SELECT QUERIES ===

GET_MAX_RESULT_ID = """
    SELECT COALESCE(MAX(id), 0) FROM experiment_results
"""

GET_MAX_DEMO_ID = """
    SELECT COALESCE(MAX(id), 0) FROM demo_results
"""

GET_MAX_DOWNLOAD_ID = """
    SELECT COALESCE(MAX(id), 0) FROM download_log
"""

GET_RESULTS = """
    SELECT dataset, partition_strategy, alpha, clients, depth, method, trial, seed, accuracy, wall_ms
    FROM experiment_results
    ORDER BY id
"""

GET_RESULTS_BY_RUN = """
    SELECT dataset, partition_strategy, alpha, clients, depth, method, trial, seed, accuracy, wall_ms
    FROM experiment_results
    WHERE run_id = ?
    ORDER BY id
"""

GET_DEMO_RESULTS_BY_RUN = """
    SELECT seed, acc_left, acc_right, acc_global, outcome
    FROM demo_results
    WHERE run_id = ?
    ORDER BY id
"""

GET_RUN_ERRORS = """
    SELECT id, error_type, message, severity, component, record_id
    FROM run_errors
    ORDER BY timestamp
"""
