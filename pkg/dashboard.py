import json
from datetime import datetime

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go
import streamlit as st

from app.database import Database
from app.services.report_store import ReportStore

# Page configuration
st.set_page_config(
    page_title="Coreference Bias Reports",
    page_icon="⚖️",
    layout="wide",
    initial_sidebar_state="expanded"
)

ALPHA = 0.05
CONDITIONS = ["anonymized", "debiased_resources", "augmented"]


def load_data():
    """Load stored bias reports from the report database."""
    store = ReportStore(Database())
    try:
        reports = store.list_reports()
        if reports.is_empty():
            return pd.DataFrame()
        df = pd.DataFrame(reports.to_dicts())
        df['created_at'] = pd.to_datetime(df['created_at'])
        for column in ['t1_pro', 't1_anti', 't1_avg', 't1_diff', 't2_pro', 't2_anti', 't2_avg', 't2_diff',
                       'p_t1', 'p_t2', 'conll_avg']:
            df[column] = pd.to_numeric(df[column], errors='coerce')
        df['run'] = df['id'].astype(str) + " · " + df['label']
        df['setting'] = df[CONDITIONS].apply(
            lambda row: "+".join(c.replace("_", " ") for c in CONDITIONS if row[c]) or "baseline", axis=1)
        return df
    except Exception as e:
        st.error(f"Error loading reports: {e}")
        return pd.DataFrame()
    finally:
        store.db.close()


def load_report(report_id: int):
    store = ReportStore(Database())
    try:
        return store.get(report_id)
    finally:
        store.db.close()


def load_summary():
    store = ReportStore(Database())
    try:
        return store.summary()
    finally:
        store.db.close()


def significance_marker(p):
    if pd.isna(p):
        return ""
    return "*" if p < ALPHA else ""


def create_summary_table(df):
    """Pro/anti table per run, laid out like a results table."""
    rows = []
    for _, run in df.iterrows():
        rows.append({
            "Run": run['run'],
            "Setting": run['setting'],
            "Metric": run['metric'],
            "T1-p": run['t1_pro'],
            "T1-a": run['t1_anti'],
            "T1 Avg": run['t1_avg'],
            "T1 |Diff|": f"{run['t1_diff']:.1f}{significance_marker(run['p_t1'])}",
            "T2-p": run['t2_pro'],
            "T2-a": run['t2_anti'],
            "T2 Avg": run['t2_avg'],
            "T2 |Diff|": f"{run['t2_diff']:.1f}{significance_marker(run['p_t2'])}",
            "CoNLL": run['conll_avg'],
        })
    return pd.DataFrame(rows)


def pro_anti_chart(run):
    fig = go.Figure()
    for condition, color in (("pro", "#1f77b4"), ("anti", "#ff7f0e")):
        fig.add_trace(go.Bar(
            name=condition,
            x=["Type 1", "Type 2"],
            y=[run[f't1_{condition}'], run[f't2_{condition}']],
            marker_color=color,
        ))
    fig.update_layout(barmode='group', yaxis_title="Score", title=f"Pro vs anti: {run['run']}")
    return fig


def dashboard_page():
    """Overview of every stored run."""
    st.header("📊 Bias Overview")

    df = load_data()

    if df.empty:
        st.warning("No bias reports stored yet.")
        st.markdown("To store one, use: `python main.py score KEY RESPONSE --challenge dev.jsonl --store baseline`")
        return

    summary = load_summary()
    st.caption(
        f"{summary['total_runs']} runs stored, {summary['first_run']:%Y-%m-%d} to {summary['latest_run']:%Y-%m-%d}. "
        f"Mean |Diff| over all metrics: T1 {summary['avg_t1_diff']:.1f}, T2 {summary['avg_t2_diff']:.1f}"
    )

    # Sidebar filters
    st.sidebar.header("📊 Filters")
    metrics = sorted(df['metric'].unique())
    metric = st.sidebar.selectbox("Metric", metrics, index=0)
    search_term = st.sidebar.text_input("Search Labels", "")

    filtered_df = df[df['metric'] == metric]
    if search_term:
        filtered_df = filtered_df[filtered_df['label'].str.contains(search_term, case=False, na=False)]

    if filtered_df.empty:
        st.info("No runs match the filters.")
        return

    col1, col2, col3 = st.columns(3)
    with col1:
        st.metric("Runs", len(filtered_df))
    with col2:
        passing = ((filtered_df['p_t1'] >= ALPHA) & (filtered_df['p_t2'] >= ALPHA)).sum()
        st.metric("Without significant gap", int(passing))
    with col3:
        best = filtered_df.loc[(filtered_df['t1_diff'] + filtered_df['t2_diff']).idxmin()]
        st.metric("Smallest total |Diff|", f"{best['t1_diff'] + best['t2_diff']:.1f}", help=best['run'])

    st.markdown("---")

    st.subheader("📈 Results")
    st.dataframe(create_summary_table(filtered_df), use_container_width=True, hide_index=True)
    st.caption(f"* pro/anti difference significant at p < {ALPHA}")

    col1, col2 = st.columns(2)

    with col1:
        st.subheader("⚖️ |Diff| Across Runs")
        diffs = filtered_df.sort_values('created_at').melt(
            id_vars=['run'], value_vars=['t1_diff', 't2_diff'], var_name='type', value_name='diff')
        diffs['type'] = diffs['type'].map({'t1_diff': "Type 1", 't2_diff': "Type 2"})
        fig = px.bar(diffs, x='run', y='diff', color='type', barmode='group',
                     title="Pro/anti gap per run")
        fig.update_layout(xaxis_title="", yaxis_title="|Diff|")
        st.plotly_chart(fig, use_container_width=True)

    with col2:
        st.subheader("🎯 Avg vs |Diff|")
        fig = px.scatter(filtered_df, x='t1_avg', y='t1_diff', color='setting', hover_name='run',
                         title="Type 1 score against its gap")
        fig.update_layout(xaxis_title="Avg", yaxis_title="|Diff|")
        st.plotly_chart(fig, use_container_width=True)


def run_view_page():
    """Single run details with its full JSON report."""
    st.header("🔍 Run Details")

    df = load_data()

    if df.empty:
        st.warning("No bias reports stored yet.")
        return

    run_label = st.sidebar.selectbox("Run", df['run'].tolist(), index=0)
    run = df[df['run'] == run_label].iloc[0]

    col1, col2, col3, col4 = st.columns(4)
    with col1:
        st.metric("T1 Avg", f"{run['t1_avg']:.1f}")
    with col2:
        st.metric("T1 |Diff|", f"{run['t1_diff']:.1f}",
                  help=f"p = {run['p_t1']:.4f}" if not pd.isna(run['p_t1']) else None)
    with col3:
        st.metric("T2 Avg", f"{run['t2_avg']:.1f}")
    with col4:
        st.metric("T2 |Diff|", f"{run['t2_diff']:.1f}",
                  help=f"p = {run['p_t2']:.4f}" if not pd.isna(run['p_t2']) else None)

    st.plotly_chart(pro_anti_chart(run), use_container_width=True)

    report = load_report(int(run['id']))
    st.subheader("📋 Stored Report")
    st.json(report)
    st.download_button(
        label="📥 Download JSON",
        data=json.dumps(report, indent=2, sort_keys=True),
        file_name=f"bias_report_{run['id']}_{datetime.now().strftime('%Y%m%d_%H%M%S')}.json",
        mime="application/json"
    )


def main():
    st.title("⚖️ Coreference Bias Reports")

    # Sidebar navigation
    st.sidebar.title("🧭 Navigation")
    page = st.sidebar.radio(
        "Select Page",
        ["📊 Overview", "🔍 Run Details"],
        index=0
    )

    if page == "📊 Overview":
        dashboard_page()
    elif page == "🔍 Run Details":
        run_view_page()

    st.sidebar.markdown("---")
    st.sidebar.markdown("### 📊 App Info")
    st.sidebar.info("Coreference Bias Kit\nBuilt with Streamlit, DuckDB & Polars")


if __name__ == "__main__":
    main()
