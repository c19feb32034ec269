from datetime import datetime
import duckdb
import logging
from sqlglot import parse_one, transpile
from sqlglot.errors import ParseError

from src.db import sql_templates
from src.error_handling.error_handling import ErrorCode, FuseLabException
from src.util.config import Config

RESULT_COLUMNS = ["dataset", "partition", "alpha", "clients", "depth", "method", "trial", "seed", "accuracy", "wall_ms"]
DEMO_COLUMNS = ["seed", "acc_left", "acc_right", "acc_global", "outcome"]


class DBManager:
    def __init__(self, db_path=None, logger=None):
        self.db_path = db_path or Config.DB_PATH
        self.logger = logger or logging.getLogger('fuselab')
        self.conn = None
        self.result_id_counter = 1
        self.demo_id_counter = 1
        self.download_id_counter = 1
        if not self.connect():
            raise FuseLabException(f"Failed to open results store at {self.db_path}",
                                   code=ErrorCode.DB_CONNECTION_ERROR)
        self._initialize_tables()

    def connect(self):
        try:
            self.logger.info(f"Connecting to DuckDB at {self.db_path}")
            self.conn = duckdb.connect(self.db_path)
            return True
        except Exception as e:
            self.logger.error(f"Failed to connect to database: {str(e)}")
            return False

    def execute_query(self, sql: str, params=None):
        try:
            transpiled_sql = transpile(sql, read='duckdb', write='duckdb')[0]
            if params:
                return self.conn.execute(transpiled_sql, params)
            return self.conn.execute(transpiled_sql)
        except Exception as e:
            self.logger.error(f"Error executing query: {e}")
            raise FuseLabException(f"Query failed: {e}", code=ErrorCode.DB_QUERY_ERROR)

    def _load_sql_template(self, template_name):
        try:
            sql = getattr(sql_templates, template_name)
            parse_one(sql, read='duckdb')
            return sql
        except AttributeError as e:
            self.logger.error(f"Error loading SQL template {template_name}: {e}")
            raise
        except ParseError as e:
            self.logger.error(f"SQL syntax error in {template_name}: {e}")
            raise

    def _initialize_tables(self):
        self.logger.info("Initializing results tables...")
        table_templates = [
            "CREATE_EXPERIMENT_RESULTS_TABLE",
            "CREATE_DEMO_RESULTS_TABLE",
            "CREATE_RUN_ERRORS_TABLE",
            "CREATE_DOWNLOAD_LOG_TABLE"
        ]
        for template_name in table_templates:
            self.execute_query(self._load_sql_template(template_name))

        self.result_id_counter = self._max_id(sql_templates.GET_MAX_RESULT_ID) + 1
        self.demo_id_counter = self._max_id(sql_templates.GET_MAX_DEMO_ID) + 1
        self.download_id_counter = self._max_id(sql_templates.GET_MAX_DOWNLOAD_ID) + 1
        self.conn.commit()

    def _max_id(self, sql):
        return self.execute_query(sql).fetchone()[0]

    def insert_result(self, record, run_id):
        current_id = self.result_id_counter
        self.result_id_counter += 1
        self.execute_query(sql_templates.INSERT_EXPERIMENT_RESULT, [
            current_id,
            run_id,
            record.dataset,
            record.partition,
            record.alpha,
            record.clients,
            record.depth,
            record.method,
            record.trial,
            record.seed,
            record.accuracy,
            record.wall_ms,
            datetime.now().isoformat()
        ])
        self.conn.commit()
        return current_id

    def insert_results(self, records, run_id):
        return [self.insert_result(record, run_id) for record in records]

    def insert_demo_result(self, record, run_id):
        current_id = self.demo_id_counter
        self.demo_id_counter += 1
        self.execute_query(sql_templates.INSERT_DEMO_RESULT, [
            current_id,
            run_id,
            record.seed,
            record.acc_left,
            record.acc_right,
            record.acc_global,
            record.outcome,
            datetime.now().isoformat()
        ])
        self.conn.commit()
        return current_id

    def log_error(self, error):
        error_dict = error.to_dict()
        self.execute_query(sql_templates.INSERT_RUN_ERROR, [
            error.id,
            error_dict["error_code"],
            error_dict["error_type"],
            error_dict["message"],
            error_dict["timestamp"],
            error_dict["severity"],
            error_dict["component"],
            error_dict["source_file"],
            error_dict["record_id"],
            str(error_dict["details"]) if error_dict["details"] else None
        ])
        self.conn.commit()
        return True

    def log_download(self, url, start_time, end_time, code_response, error_message=None):
        try:
            current_id = self.download_id_counter
            self.download_id_counter += 1
            self.execute_query(sql_templates.INSERT_DOWNLOAD_LOG, [
                current_id,
                url,
                start_time.isoformat(),
                end_time.isoformat(),
                code_response,
                error_message
            ])
            self.conn.commit()
            return True
        except Exception as e:
            self.logger.error(f"Error logging download: {str(e)}")
            return False

    def get_results(self, run_id=None):
        if run_id is None:
            rows = self.execute_query(sql_templates.GET_RESULTS).fetchall()
        else:
            rows = self.execute_query(sql_templates.GET_RESULTS_BY_RUN, [run_id]).fetchall()
        return [dict(zip(RESULT_COLUMNS, row)) for row in rows]

    def get_demo_results(self, run_id):
        rows = self.execute_query(sql_templates.GET_DEMO_RESULTS_BY_RUN, [run_id]).fetchall()
        return [dict(zip(DEMO_COLUMNS, row)) for row in rows]

    def get_errors(self):
        return self.execute_query(sql_templates.GET_RUN_ERRORS).fetchall()

    def close(self):
        if self.conn:
            self.conn.close()
            self.conn = None
            self.logger.info("Database connection closed")
