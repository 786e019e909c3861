from dataclasses import dataclass
from datetime import datetime
from typing import Optional


@dataclass
class StoredReport:
    label: str
    metric: str
    anonymized: bool
    debiased_resources: bool
    augmented: bool
    t1_pro: Optional[float]
    t1_anti: Optional[float]
    t1_avg: Optional[float]
    t1_diff: Optional[float]
    t2_pro: Optional[float]
    t2_anti: Optional[float]
    t2_avg: Optional[float]
    t2_diff: Optional[float]
    p_t1: Optional[float]
    p_t2: Optional[float]
    conll_avg: Optional[float]
    report_json: str
    id: Optional[int] = None
    created_at: Optional[datetime] = None


class AuditSchema:
    CREATE_TABLE = """
    CREATE SEQUENCE IF NOT EXISTS bias_report_id_seq;
    CREATE TABLE IF NOT EXISTS bias_reports (
        id INTEGER PRIMARY KEY DEFAULT nextval('bias_report_id_seq'),
        label VARCHAR NOT NULL,
        metric VARCHAR NOT NULL,
        anonymized BOOLEAN NOT NULL DEFAULT FALSE,
        debiased_resources BOOLEAN NOT NULL DEFAULT FALSE,
        augmented BOOLEAN NOT NULL DEFAULT FALSE,
        t1_pro DOUBLE,
        t1_anti DOUBLE,
        t1_avg DOUBLE,
        t1_diff DOUBLE,
        t2_pro DOUBLE,
        t2_anti DOUBLE,
        t2_avg DOUBLE,
        t2_diff DOUBLE,
        p_t1 DOUBLE,
        p_t2 DOUBLE,
        conll_avg DOUBLE,
        report_json VARCHAR NOT NULL,
        created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
    )
    """

    INSERT_REPORT = """
    INSERT INTO bias_reports (label, metric, anonymized, debiased_resources, augmented,
        t1_pro, t1_anti, t1_avg, t1_diff, t2_pro, t2_anti, t2_avg, t2_diff, p_t1, p_t2, conll_avg, report_json)
    VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
    RETURNING id
    """

    SELECT_ALL = "SELECT * FROM bias_reports ORDER BY created_at DESC, id DESC"

    SELECT_BY_ID = "SELECT * FROM bias_reports WHERE id = ?"

    SELECT_BY_LABEL = """
    SELECT * FROM bias_reports
    WHERE label ILIKE ?
    ORDER BY created_at DESC, id DESC
    """

    GET_SUMMARY_STATS = """
    SELECT
        COUNT(*) as total_runs,
        AVG(t1_diff) as avg_t1_diff,
        AVG(t2_diff) as avg_t2_diff,
        MIN(created_at) as first_run,
        MAX(created_at) as latest_run
    FROM bias_reports
    """
