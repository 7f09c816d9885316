"""
Results store for simulation runs
Keeps run logs and per-slot metrics in DuckDB for later querying and summaries
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import duckdb
import pandas as pd

from .. import config

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ['scenario', 'defender', 'seed', 'slot', 'R', 'uD']


class ResultsStore:
    """DuckDB-backed store of run logs and slot metrics"""

    def __init__(self, db_path: str = config.DB_PATH):
        """
        Initialize results store

        Args:
            db_path: Path to DuckDB database file (':memory:' for a scratch store)
        """
        self.db_path = db_path if db_path == ':memory:' else Path(db_path)
        self.conn = None
        self._initialize_database()

    def _initialize_database(self):
        """Open the connection and create the tables"""
        try:
            self.conn = duckdb.connect(str(self.db_path))
            self._create_schema()
            logger.info(f"Results store initialized at {self.db_path}")
        except Exception as e:
            logger.error(f"Failed to initialize results store: {e}")
            raise

    def _create_schema(self):
        schemas = {
            'run_log': """
            CREATE TABLE IF NOT EXISTS run_log (
                id INTEGER PRIMARY KEY,
                scenario TEXT NOT NULL,
                defender TEXT NOT NULL,
                seed INTEGER,
                status TEXT NOT NULL CHECK (status IN ('SUCCESS', 'FAILED')),
                error_message TEXT,
                slots INTEGER DEFAULT 0,
                logged_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
            );
            """,
            'slot_metrics': """
            CREATE TABLE IF NOT EXISTS slot_metrics (
                scenario TEXT NOT NULL,
                defender TEXT NOT NULL,
                seed INTEGER NOT NULL,
                slot INTEGER NOT NULL,
                R DOUBLE NOT NULL,
                uD DOUBLE NOT NULL
            );
            """,
        }
        try:
            for table_name, schema_sql in schemas.items():
                logger.debug(f"Ensuring table: {table_name}")
                self.conn.execute(schema_sql)
        except Exception as e:
            logger.error(f"Failed to create schema: {e}")
            raise

    def insert_series(self, scenario: str, defender: str, seed: int, series: pd.DataFrame) -> int:
        """
        Replace the stored slot metrics of one (scenario, defender, seed) run

        Args:
            series: DataFrame with columns slot, R, uD

        Returns:
            Number of rows inserted
        """
        try:
            metrics = series.reset_index(drop=True).assign(scenario=scenario, defender=defender, seed=seed)
            metrics = metrics[METRIC_COLUMNS]
            self.conn.execute(
                "DELETE FROM slot_metrics WHERE scenario = ? AND defender = ? AND seed = ?",
                [scenario, defender, int(seed)],
            )
            if not metrics.empty:
                self.conn.execute("INSERT INTO slot_metrics SELECT * FROM metrics")
            return len(metrics)
        except Exception as e:
            logger.error(f"Failed to insert metrics for {scenario}/{defender}/seed {seed}: {e}")
            raise

    def store_report(self, report) -> int:
        """Store every seed of a MetricsReport and log each run"""
        total = 0
        for seed in report.seeds:
            series = report.per_seed[seed]
            total += self.insert_series(report.scenario, report.defender, seed, series)
            self.log_run(report.scenario, report.defender, seed, 'SUCCESS', slots=len(series))
        logger.info(f"Stored {total} slot rows for {report.scenario} ({len(report.seeds)} seeds)")
        return total

    def log_run(self, scenario: str, defender: str, seed: Optional[int], status: str,
                error_message: Optional[str] = None, slots: int = 0):
        """
        Log a simulation run

        Args:
            status: SUCCESS or FAILED
            error_message: Error message if failed
            slots: Number of slots played
        """
        try:
            next_id = self.conn.execute("SELECT COALESCE(MAX(id), 0) + 1 FROM run_log").fetchone()[0]
            self.conn.execute(
                """
                INSERT INTO run_log (id, scenario, defender, seed, status, error_message, slots)
                VALUES (?, ?, ?, ?, ?, ?, ?)
                """,
                [next_id, scenario, defender, seed, status, error_message, slots],
            )
        except Exception as e:
            logger.error(f"Failed to log run: {e}")

    def query(self, sql: str, params: Optional[List[Any]] = None) -> pd.DataFrame:
        """
        Execute SQL query and return results as DataFrame

        Args:
            sql: SQL query string
            params: Optional parameters for query
        """
        try:
            if params:
                result = self.conn.execute(sql, params).fetchdf()
            else:
                result = self.conn.execute(sql).fetchdf()
            logger.info(f"Query executed successfully, returned {len(result)} rows")
            return result
        except Exception as e:
            logger.error(f"Failed to execute query: {e}")
            raise

    def get_stats(self) -> Dict[str, Any]:
        """Tables with their row counts, and the scenarios stored"""
        try:
            tables = [t[0] for t in self.conn.execute(
                "SELECT table_name FROM information_schema.tables WHERE table_schema = 'main'"
            ).fetchall()]
            counts = {t: self.conn.execute(f"SELECT COUNT(*) FROM {t}").fetchone()[0] for t in tables}
            scenarios = [r[0] for r in self.conn.execute(
                "SELECT DISTINCT scenario FROM slot_metrics ORDER BY scenario"
            ).fetchall()]
            return {'tables': tables, 'record_counts': counts, 'scenarios': scenarios}
        except Exception as e:
            logger.error(f"Failed to get results store stats: {e}")
            return {}

    def close(self):
        """Close database connection"""
        if self.conn:
            self.conn.close()
            self.conn = None
            logger.info("Results store connection closed")

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()
