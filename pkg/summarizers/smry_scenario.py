"""
Scenario summary table creation script.

Creates the smry_scenario table with one row per (scenario, defender):
- seeds and slots stored
- mean protection level and defender utility over the whole run
- the same means over the last `window` slots
- the spread of per-seed mean protection levels
"""

import logging

import duckdb

from blotto_defense import config

logger = logging.getLogger(__name__)


def create_smry_scenario_table(db_path: str, window: int = config.MOVING_AVERAGE_WINDOW):
    """Create the smry_scenario table."""

    logger.info("Creating smry_scenario table...")

    drop_table_sql = "DROP TABLE IF EXISTS smry_scenario;"

    create_table_sql = f"""
    CREATE TABLE smry_scenario AS
    WITH bounds AS (
        SELECT scenario, defender, MAX(slot) AS last_slot
        FROM slot_metrics
        GROUP BY scenario, defender
    ),
    per_seed AS (
        SELECT
            m.scenario,
            m.defender,
            m.seed,
            COUNT(*) AS slots,
            AVG(m.R) AS mean_R,
            AVG(m.uD) AS mean_uD,
            AVG(CASE WHEN m.slot > b.last_slot - {int(window)} THEN m.R END) AS tail_mean_R,
            AVG(CASE WHEN m.slot > b.last_slot - {int(window)} THEN m.uD END) AS tail_mean_uD
        FROM slot_metrics m
        JOIN bounds b ON m.scenario = b.scenario AND m.defender = b.defender
        GROUP BY m.scenario, m.defender, m.seed
    )
    SELECT
        scenario,
        defender,
        COUNT(*) AS seeds,
        MAX(slots) AS slots,
        AVG(mean_R) AS mean_R,
        AVG(mean_uD) AS mean_uD,
        AVG(tail_mean_R) AS tail_mean_R,
        AVG(tail_mean_uD) AS tail_mean_uD,
        COALESCE(STDDEV_SAMP(mean_R), 0.0) AS seed_std_R
    FROM per_seed
    GROUP BY scenario, defender
    ORDER BY scenario, defender;
    """

    with duckdb.connect(db_path) as conn:
        conn.execute(drop_table_sql)
        conn.execute(create_table_sql)

        result = conn.execute("SELECT COUNT(*) FROM smry_scenario").fetchone()
        logger.info(f"Created smry_scenario table with {result[0]} rows")

        sample = conn.execute("""
            SELECT scenario, defender, seeds, slots, mean_R, tail_mean_R
            FROM smry_scenario
            ORDER BY tail_mean_R DESC
            LIMIT 5
        """).fetchall()
        for row in sample:
            logger.info(f"  {row}")


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    create_smry_scenario_table(config.DB_PATH)
