use std::fs;

use disco_core::features::encode_document;
use disco_core::FORMAT_VERSION;

use crate::binfeat;
use crate::cli::FeaturesArgs;
use crate::error::CliError;
use crate::formats::{read_versioned_jsonl, write_jsonl, FeatureRecord, GraphRecord};

use super::graphs_from_record;

pub fn run(args: &FeaturesArgs) -> Result<(), CliError> {
    let mut graphs: Vec<GraphRecord> =
        read_versioned_jsonl(&args.input, |g: &GraphRecord| g.version.as_str())?;
    graphs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

    let mut records = Vec::new();
    for g in &graphs {
        let (rst, coref) = graphs_from_record(g)
            .map_err(|e| CliError::validation(format!("{}: {e}", g.doc_id)))?;
        let matrix = encode_document(&rst, Some(&coref))
            .map_err(|e| CliError::validation(format!("{}: {e}", g.doc_id)))?;
        records.push((g.doc_id.clone(), matrix));
    }

    match args.format.as_str() {
        "jsonl" => {
            let out: Vec<FeatureRecord> = records
                .into_iter()
                .map(|(doc_id, m)| FeatureRecord {
                    version: FORMAT_VERSION.to_string(),
                    doc_id,
                    num_edus: m.num_edus(),
                    dim: m.dim(),
                    rows: (0..m.num_edus()).map(|e| m.row(e).to_vec()).collect(),
                })
                .collect();
            write_jsonl(&args.output, &out)?;
        }
        "binary" => {
            fs::create_dir_all(&args.output).map_err(|e| CliError::io_at(&args.output, e))?;
            for (doc_id, m) in &records {
                binfeat::write_block(&args.output.join(format!("{doc_id}.feat")), m)?;
            }
        }
        other => {
            return Err(CliError::validation(format!(
                "unknown feature format `{other}` (expected jsonl or binary)"
            )))
        }
    }
    log::info!("encoded features for {} documents", graphs.len());
    Ok(())
}
