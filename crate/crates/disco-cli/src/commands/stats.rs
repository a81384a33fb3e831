use std::collections::BTreeMap;

use disco_core::FORMAT_VERSION;

use crate::cli::StatsArgs;
use crate::error::CliError;
use crate::formats::{
    read_documents, read_versioned_jsonl, write_json_pretty, GraphRecord, LabelRecord, StatsReport,
};

/// Recompute the corpus statistics table from pipeline artifacts (the
/// oracle stage can emit the same table as a by-product of labeling).
pub fn run(args: &StatsArgs) -> Result<(), CliError> {
    let documents = read_documents(&args.input)?;
    let graphs: BTreeMap<String, GraphRecord> = match &args.graphs {
        Some(path) => read_versioned_jsonl(path, |g: &GraphRecord| g.version.as_str())?
            .into_iter()
            .map(|g| (g.doc_id.clone(), g))
            .collect(),
        None => BTreeMap::new(),
    };
    let labels: BTreeMap<String, LabelRecord> = match &args.labels {
        Some(path) => read_versioned_jsonl(path, |l: &LabelRecord| l.version.as_str())?
            .into_iter()
            .map(|l| (l.doc_id.clone(), l))
            .collect(),
        None => BTreeMap::new(),
    };

    let total_records = documents.len();
    let mut edu_total = 0usize;
    let mut summary_words = 0usize;
    let mut summarized = 0usize;
    let mut empty_rst = 0usize;
    let mut empty_labels = 0usize;
    let mut both_empty = 0usize;
    let mut unlabeled = 0usize;
    for doc in &documents {
        edu_total += doc.num_edus();
        if let Some(summary) = doc.reference_summary() {
            summarized += 1;
            summary_words += summary.split_whitespace().count();
        }
        let rst_empty = graphs
            .get(doc.doc_id())
            .is_none_or(|g| g.rst_edges.is_empty());
        if rst_empty {
            empty_rst += 1;
        }
        match labels.get(doc.doc_id()) {
            Some(l) => {
                if l.labels.iter().all(|&b| b == 0) {
                    empty_labels += 1;
                    if rst_empty {
                        both_empty += 1;
                    }
                }
            }
            None => unlabeled += 1,
        }
    }

    let report = StatsReport {
        version: FORMAT_VERSION.to_string(),
        total_records,
        average_edus: if total_records > 0 {
            edu_total as f64 / total_records as f64
        } else {
            0.0
        },
        average_summary_words: if summarized > 0 {
            summary_words as f64 / summarized as f64
        } else {
            0.0
        },
        empty_rst_graph: empty_rst,
        empty_oracle_label: empty_labels,
        both_empty,
        skipped_missing_reference: unlabeled,
    };
    write_json_pretty(&args.output, &report)?;
    log::info!("statistics over {total_records} records written");
    Ok(())
}
