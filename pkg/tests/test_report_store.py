from datetime import datetime

import polars as pl

from app.models.scores import BiasReport, ConditionScores, ScoreTriple


def make_report(t1_diff=26.55, p_t1=0.001):
    triple = ScoreTriple(0.7, 0.6, 0.646)
    return BiasReport(
        t1=ConditionScores(76.0, 76.0 - t1_diff, 76.0 - t1_diff / 2, t1_diff, p_t1),
        t2=ConditionScores(88.7, 75.2, 81.95, 13.5, 0.02),
        metric="conll",
        metrics={"muc": triple, "bcub": triple, "ceafe": triple},
        conll_avg=0.646,
    )


def test_save_and_get(report_store):
    report = make_report()
    report_id = report_store.save(report, "baseline")
    assert report_store.get(report_id) == report.to_report()
    assert report_store.get(report_id + 100) is None


def test_record_rounds_headline_numbers(report_store):
    record = report_store.to_record(make_report(), "baseline", augmented=True, extra={"passes": False})
    assert record.t1_diff == 26.6
    assert record.t2_avg == 82.0
    assert record.conll_avg == 64.6
    assert record.augmented and not record.anonymized
    assert '"passes": false' in record.report_json


def test_list_reports(report_store):
    report_store.save(make_report(), "baseline")
    report_store.save(make_report(t1_diff=1.1, p_t1=0.4), "anonymized+augmented", anonymized=True, augmented=True)
    df = report_store.list_reports()
    assert isinstance(df, pl.DataFrame)
    assert df.height == 2
    assert "report_json" not in df.columns
    assert set(df.get_column("label").to_list()) == {"baseline", "anonymized+augmented"}

    filtered = report_store.list_reports("AUGMENTED")
    assert filtered.height == 1
    assert filtered.get_column("t1_diff").to_list() == [1.1]
    assert filtered.get_column("anonymized").to_list() == [True]


def test_empty_store(report_store):
    assert report_store.list_reports().height == 0
    assert report_store.summary()["total_runs"] == 0


def test_summary(report_store):
    report_store.save(make_report(t1_diff=20.0), "a")
    report_store.save(make_report(t1_diff=10.0), "b")
    summary = report_store.summary()
    assert summary["total_runs"] == 2
    assert summary["avg_t1_diff"] == 15.0
    assert summary["avg_t2_diff"] == 13.5
    assert isinstance(summary["latest_run"], datetime)
    assert summary["first_run"] <= summary["latest_run"]
