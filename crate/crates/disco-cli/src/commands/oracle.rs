use std::collections::BTreeMap;
use std::str::FromStr;

use disco_core::oracle::{label_corpus, MetricKind};
use disco_core::FORMAT_VERSION;

use crate::cli::OracleArgs;
use crate::error::CliError;
use crate::formats::{
    read_documents, read_jsonl, write_json_pretty, write_jsonl, LabelRecord, StatsReport,
    SummaryRecord,
};

use super::load_graphs;

pub fn run(args: &OracleArgs) -> Result<(), CliError> {
    let metric = MetricKind::from_str(&args.metric).map_err(CliError::validation)?;
    let mut documents = read_documents(&args.input)?;
    if let Some(path) = &args.summaries {
        let sidecar: BTreeMap<String, String> = read_jsonl::<SummaryRecord>(path)?
            .into_iter()
            .map(|r| (r.doc_id, r.summary))
            .collect();
        documents = documents
            .into_iter()
            .map(|d| match sidecar.get(d.doc_id()) {
                Some(s) => d.with_reference_summary(Some(s.clone())),
                None => d,
            })
            .collect();
    }
    documents.sort_by(|a, b| a.doc_id().cmp(b.doc_id()));

    let graphs = match &args.graphs {
        Some(path) => load_graphs(path)?,
        None => BTreeMap::new(),
    };

    let items = documents
        .iter()
        .map(|d| (d, graphs.get(d.doc_id()).map(|(rst, _)| rst)));
    let (labeled, stats) = label_corpus(items, args.budget, metric);

    let records: Vec<LabelRecord> = labeled
        .into_iter()
        .map(|l| LabelRecord {
            version: FORMAT_VERSION.to_string(),
            doc_id: l.doc_id,
            labels: l.labels.labels.iter().map(|&b| b as u8).collect(),
            selected: l.labels.selected_order,
            score: l.labels.final_score,
        })
        .collect();
    write_jsonl(&args.output, &records)?;

    if let Some(path) = &args.stats {
        write_json_pretty(
            path,
            &StatsReport {
                version: FORMAT_VERSION.to_string(),
                total_records: stats.total_records,
                average_edus: stats.average_edus,
                average_summary_words: stats.average_summary_words,
                empty_rst_graph: stats.empty_rst_graphs,
                empty_oracle_label: stats.empty_oracle_labels,
                both_empty: stats.both_empty,
                skipped_missing_reference: stats.skipped_missing_reference,
            },
        )?;
    }
    log::info!(
        "labeled {} of {} documents (budget {}, metric {})",
        records.len(),
        stats.total_records,
        args.budget,
        metric
    );
    Ok(())
}
