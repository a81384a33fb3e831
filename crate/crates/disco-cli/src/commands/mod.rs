//! One module per subcommand; each is a thin, deterministic wrapper
//! over a core operation (outputs sorted by doc id, seeds explicit).

mod evaluate;
mod extract;
mod features;
mod graph;
mod oracle;
mod parse;
mod stats;
mod train;

use std::collections::BTreeMap;
use std::path::Path;

use disco_core::graph::{CorefGraph, RstEdge, RstGraph};

use crate::cli::Command;
use crate::error::CliError;
use crate::formats::{read_versioned_jsonl, GraphRecord};

pub fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Parse(args) => parse::run(args),
        Command::Graph(args) => graph::run(args),
        Command::OracleLabel(args) => oracle::run(args),
        Command::Features(args) => features::run(args),
        Command::Train(args) => train::run(args),
        Command::Extract(args) => extract::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::Stats(args) => stats::run(args),
    }
}

/// Rebuild typed graphs from one serialized record.
pub(crate) fn graphs_from_record(record: &GraphRecord) -> Result<(RstGraph, CorefGraph), String> {
    let edges = record
        .rst_edges
        .iter()
        .map(|&[source, target, relation]| RstEdge {
            source,
            target,
            relation,
        })
        .collect();
    let rst = RstGraph::from_edges(record.num_edus, edges).map_err(|e| e.to_string())?;
    let coref = CorefGraph::from_pairs(
        record.num_edus,
        record.coref_pairs.iter().map(|&[a, b]| (a, b)),
    )
    .map_err(|e| e.to_string())?;
    Ok((rst, coref))
}

/// Load a graphs.jsonl file into typed graphs keyed by doc id.
pub(crate) fn load_graphs(
    path: &Path,
) -> Result<BTreeMap<String, (RstGraph, CorefGraph)>, CliError> {
    let records: Vec<GraphRecord> =
        read_versioned_jsonl(path, |g: &GraphRecord| g.version.as_str())?;
    let mut out = BTreeMap::new();
    for record in &records {
        let pair = graphs_from_record(record)
            .map_err(|e| CliError::validation(format!("{}: {e}", record.doc_id)))?;
        out.insert(record.doc_id.clone(), pair);
    }
    Ok(out)
}
