use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use disco_core::corpus::{parse_bracket, parse_conll, parse_merge, Document};
use disco_core::FORMAT_VERSION;

use crate::cli::ParseArgs;
use crate::error::CliError;
use crate::formats::{
    read_jsonl, write_documents, write_jsonl, SummaryRecord, TreeNodeRecord, TreeRecord,
};

/// Per-file parse errors are logged and the file skipped; only an
/// unreadable input directory or unwritable output is fatal.
pub fn run(args: &ParseArgs) -> Result<(), CliError> {
    let entries = fs::read_dir(&args.input).map_err(|e| CliError::io_at(&args.input, e))?;

    // stem -> available extensions
    let mut stems: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io_at(&args.input, e))?;
        let path = entry.path();
        let (Some(stem), Some(ext)) = (
            path.file_stem().and_then(|s| s.to_str()),
            path.extension().and_then(|s| s.to_str()),
        ) else {
            continue;
        };
        if matches!(ext, "merge" | "conll" | "bracket") {
            stems
                .entry(stem.to_string())
                .or_default()
                .push(ext.to_string());
        }
    }

    let summaries: BTreeMap<String, String> = match &args.summaries {
        Some(path) => read_jsonl::<SummaryRecord>(path)?
            .into_iter()
            .map(|r| (r.doc_id, r.summary))
            .collect(),
        None => BTreeMap::new(),
    };

    let mut documents: Vec<Document> = Vec::new();
    let mut trees: Vec<TreeRecord> = Vec::new();
    for (stem, exts) in &stems {
        if exts.iter().any(|e| e == "merge" || e == "conll") {
            match load_document(&args.input, stem, exts) {
                Ok(doc) => {
                    let doc = doc.with_reference_summary(summaries.get(stem).cloned());
                    documents.push(doc);
                }
                Err(e) => log::error!("{stem}: skipping document: {e}"),
            }
        }
        if exts.iter().any(|e| e == "bracket") {
            let path = args.input.join(format!("{stem}.bracket"));
            match fs::read_to_string(&path)
                .map_err(|e| CliError::io_at(&path, e).to_string())
                .and_then(|raw| parse_bracket(&raw).map_err(|e| e.to_string()))
            {
                Ok(nodes) => trees.push(TreeRecord {
                    version: FORMAT_VERSION.to_string(),
                    doc_id: stem.clone(),
                    nodes: nodes
                        .into_iter()
                        .map(|n| TreeNodeRecord {
                            first: n.span.0,
                            last: n.span.1,
                            nuclearity: n.nuclearity.to_string(),
                            relation: n.relation,
                        })
                        .collect(),
                }),
                Err(e) => log::error!("{stem}: skipping tree: {e}"),
            }
        }
    }

    fs::create_dir_all(&args.output).map_err(|e| CliError::io_at(&args.output, e))?;
    write_documents(&args.output.join("documents.jsonl"), &documents)?;
    write_jsonl(&args.output.join("trees.jsonl"), &trees)?;
    log::info!(
        "parsed {} documents and {} trees from {} stems",
        documents.len(),
        trees.len(),
        stems.len()
    );
    Ok(())
}

fn load_document(dir: &Path, stem: &str, exts: &[String]) -> Result<Document, String> {
    if exts.iter().any(|e| e == "merge") {
        let path = dir.join(format!("{stem}.merge"));
        let raw = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        return parse_merge(&raw)
            .map(|d| d.with_doc_id(stem))
            .map_err(|e| format!("{}: {e}", path.display()));
    }
    let path = dir.join(format!("{stem}.conll"));
    let raw = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let tokens = parse_conll(&raw).map_err(|e| format!("{}: {e}", path.display()))?;
    Document::new(stem, tokens, None).map_err(|e| format!("{}: {e}", path.display()))
}
