use disco_core::train::{predict_and_extract, Selection};
use disco_core::FORMAT_VERSION;

use crate::checkpoint;
use crate::cli::ExtractArgs;
use crate::error::CliError;
use crate::formats::{read_documents, write_jsonl, ExtractionRecord};

use super::load_graphs;

pub fn run(args: &ExtractArgs) -> Result<(), CliError> {
    let selection = match (args.top_k, args.threshold) {
        (Some(k), None) => Selection::TopK(k),
        (None, Some(t)) => Selection::Threshold(t),
        (None, None) => {
            return Err(CliError::validation(
                "pass exactly one of --top-k or --threshold".to_string(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects conflicting flags"),
    };

    let (model, provider_config) = checkpoint::load(&args.checkpoint)?;
    let provider = provider_config.build()?;
    let mut documents = read_documents(&args.input)?;
    documents.sort_by(|a, b| a.doc_id().cmp(b.doc_id()));
    let graphs = load_graphs(&args.graphs)?;

    let mut records = Vec::with_capacity(documents.len());
    for doc in &documents {
        let (rst, coref) = match graphs.get(doc.doc_id()) {
            Some((rst, coref)) => (Some(rst), Some(coref)),
            None => (None, None),
        };
        let extraction = predict_and_extract(&model, &provider, doc, rst, coref, selection)
            .map_err(|e| CliError::validation(format!("{}: {e}", doc.doc_id())))?;
        records.push(ExtractionRecord {
            version: FORMAT_VERSION.to_string(),
            doc_id: doc.doc_id().to_string(),
            selected: extraction.selected,
            probabilities: extraction.probabilities,
            text: extraction.text,
        });
    }

    write_jsonl(&args.output, &records)?;
    log::info!("extracted from {} documents", records.len());
    Ok(())
}
