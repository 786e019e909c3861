import json
import logging
from dataclasses import fields
from typing import Dict, Optional

import polars as pl

from app.database import Database
from app.models.audit import AuditSchema, StoredReport
from app.models.scores import BiasReport, round_half_up

logger = logging.getLogger(__name__)

# columns written by INSERT_REPORT, in order
_INSERT_FIELDS = [f.name for f in fields(StoredReport) if f.name not in ("id", "created_at")]


def _rounded(value: Optional[float]) -> Optional[float]:
    return None if value is None else round_half_up(value)


class ReportStore:
    """Keeps bias reports of scoring runs in DuckDB, one row per run.

    Headline numbers get their own columns for the dashboard; the complete
    report is kept as JSON.
    """

    def __init__(self, database: Optional[Database] = None):
        self.db = database or Database()
        self._ready = False

    def _ensure_schema(self):
        if not self._ready:
            self.db.execute(AuditSchema.CREATE_TABLE)
            self._ready = True

    def to_record(self, report: BiasReport, label: str, anonymized: bool = False,
                  debiased_resources: bool = False, augmented: bool = False,
                  extra: Optional[Dict] = None) -> StoredReport:
        payload = report.to_report()
        if extra:
            payload.update(extra)
        return StoredReport(
            label=label,
            metric=report.metric,
            anonymized=anonymized,
            debiased_resources=debiased_resources,
            augmented=augmented,
            t1_pro=_rounded(report.t1.pro),
            t1_anti=_rounded(report.t1.anti),
            t1_avg=_rounded(report.t1_avg),
            t1_diff=_rounded(report.t1_diff),
            t2_pro=_rounded(report.t2.pro),
            t2_anti=_rounded(report.t2.anti),
            t2_avg=_rounded(report.t2_avg),
            t2_diff=_rounded(report.t2_diff),
            p_t1=report.p_t1,
            p_t2=report.p_t2,
            conll_avg=payload.get("conll_avg"),
            report_json=json.dumps(payload, sort_keys=True),
        )

    def save(self, report: BiasReport, label: str, anonymized: bool = False, debiased_resources: bool = False,
             augmented: bool = False, extra: Optional[Dict] = None) -> int:
        """Store a report under a run label with its training conditions; returns the row id."""
        self._ensure_schema()
        record = self.to_record(report, label, anonymized, debiased_resources, augmented, extra)
        values = [getattr(record, name) for name in _INSERT_FIELDS]
        (report_id,) = self.db.fetchone(AuditSchema.INSERT_REPORT, values)
        logger.info("Stored bias report %d (%s)", report_id, label)
        return report_id

    def list_reports(self, label: Optional[str] = None) -> pl.DataFrame:
        """Stored runs, newest first, without the JSON payload."""
        self._ensure_schema()
        if label:
            cursor = self.db.execute(AuditSchema.SELECT_BY_LABEL, [f"%{label}%"])
        else:
            cursor = self.db.execute(AuditSchema.SELECT_ALL)
        columns = [column[0] for column in cursor.description]
        df = pl.DataFrame(cursor.fetchall(), schema=columns, orient="row")
        return df.drop("report_json") if "report_json" in df.columns else df

    def get(self, report_id: int) -> Optional[Dict]:
        self._ensure_schema()
        row = self.db.fetchone(AuditSchema.SELECT_BY_ID, [report_id])
        if row is None:
            return None
        record = StoredReport(**dict(zip([f.name for f in fields(StoredReport)], _reorder(row))))
        return json.loads(record.report_json)

    def summary(self) -> Dict:
        self._ensure_schema()
        cursor = self.db.execute(AuditSchema.GET_SUMMARY_STATS)
        columns = [column[0] for column in cursor.description]
        return dict(zip(columns, cursor.fetchone()))


def _reorder(row) -> tuple:
    """Table column order (id first, created_at last) to StoredReport field order."""
    return (*row[1:-1], row[0], row[-1])
