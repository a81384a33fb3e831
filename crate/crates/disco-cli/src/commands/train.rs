use std::collections::BTreeMap;
use std::fs;
use std::io::Write;

use disco_core::train::{train, TrainItem};

use crate::checkpoint;
use crate::cli::TrainArgs;
use crate::error::CliError;
use crate::formats::{read_documents, read_versioned_jsonl, LabelRecord, PipelineConfig};

use super::load_graphs;

pub fn run(args: &TrainArgs) -> Result<(), CliError> {
    let mut config = PipelineConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.train.seed = seed;
    }
    let provider = config.provider.build()?;

    let mut documents = read_documents(&args.input)?;
    documents.sort_by(|a, b| a.doc_id().cmp(b.doc_id()));
    let graphs = load_graphs(&args.graphs)?;
    let labels: BTreeMap<String, LabelRecord> =
        read_versioned_jsonl(&args.labels, |l: &LabelRecord| l.version.as_str())?
            .into_iter()
            .map(|l| (l.doc_id.clone(), l))
            .collect();

    let mut corpus: Vec<TrainItem> = Vec::new();
    for doc in documents {
        let Some(label) = labels.get(doc.doc_id()) else {
            log::warn!("{}: no oracle labels, excluded from training", doc.doc_id());
            continue;
        };
        let (rst, coref) = match graphs.get(doc.doc_id()) {
            Some((rst, coref)) => (Some(rst.clone()), Some(coref.clone())),
            None => (None, None),
        };
        corpus.push(TrainItem {
            labels: label.labels.iter().map(|&b| b != 0).collect(),
            doc,
            rst,
            coref,
        });
    }

    let outcome = train(&corpus, &provider, &config.model, &config.train)
        .map_err(|e| CliError::validation(e.to_string()))?;

    checkpoint::save(&args.output, &outcome.model, &config.provider)?;

    let mut csv = fs::File::create(&args.metrics).map_err(|e| CliError::io_at(&args.metrics, e))?;
    let mut emit = |line: String| -> Result<(), CliError> {
        writeln!(csv, "{line}").map_err(|e| CliError::io_at(&args.metrics, e))
    };
    emit("epoch,split,precision,recall,f1,loss".to_string())?;
    for m in &outcome.history {
        emit(format!(
            "{},train,{},{},{},{}",
            m.epoch, m.train.precision, m.train.recall, m.train.f1, m.train.loss
        ))?;
        emit(format!(
            "{},validation,{},{},{},{}",
            m.epoch,
            m.validation.precision,
            m.validation.recall,
            m.validation.f1,
            m.validation.loss
        ))?;
    }

    if let Some(last) = outcome.history.last() {
        log::info!(
            "trained {} docs for {} epochs; final validation F1 {:.3}",
            corpus.len(),
            last.epoch,
            last.validation.f1
        );
    }
    Ok(())
}
