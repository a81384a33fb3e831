use std::collections::BTreeMap;

use disco_core::corpus::{Nuclearity, RstTreeNode};
use disco_core::graph::{build_coref_graph, tree_to_graph_with_warnings};
use disco_core::FORMAT_VERSION;

use crate::cli::GraphArgs;
use crate::error::CliError;
use crate::formats::{
    read_documents, read_jsonl, read_versioned_jsonl, write_jsonl, ClusterRecord, GraphRecord,
    TreeRecord,
};

/// Documents whose trees or clusters fail to convert get empty graphs
/// and a log line; short or oddly annotated documents genuinely produce
/// empty RST graphs downstream, so the pipeline treats that as data,
/// not failure.
pub fn run(args: &GraphArgs) -> Result<(), CliError> {
    let documents = read_documents(&args.input)?;
    let trees: BTreeMap<String, TreeRecord> =
        read_versioned_jsonl(&args.trees, |t: &TreeRecord| t.version.as_str())?
            .into_iter()
            .map(|t| (t.doc_id.clone(), t))
            .collect();
    let clusters: BTreeMap<String, ClusterRecord> = match &args.coref {
        Some(path) => read_jsonl::<ClusterRecord>(path)?
            .into_iter()
            .map(|c| (c.doc_id.clone(), c))
            .collect(),
        None => BTreeMap::new(),
    };

    let mut records: Vec<GraphRecord> = Vec::new();
    for doc in &documents {
        let num_edus = doc.num_edus();
        let rst_edges = match trees.get(doc.doc_id()) {
            Some(tree) => {
                let nodes: Result<Vec<RstTreeNode>, String> = tree
                    .nodes
                    .iter()
                    .map(|n| {
                        let nuclearity = match n.nuclearity.as_str() {
                            "Nucleus" => Nuclearity::Nucleus,
                            "Satellite" => Nuclearity::Satellite,
                            "Root" => Nuclearity::Root,
                            other => return Err(format!("unknown nuclearity `{other}`")),
                        };
                        Ok(RstTreeNode::new(n.first, n.last, nuclearity, &n.relation))
                    })
                    .collect();
                match nodes.and_then(|nodes| {
                    tree_to_graph_with_warnings(&nodes, num_edus).map_err(|e| e.to_string())
                }) {
                    Ok((graph, warnings)) => {
                        for name in warnings {
                            log::warn!(
                                "{}: relation `{name}` not in the vocabulary, using the \
                                 unknown slot",
                                doc.doc_id()
                            );
                        }
                        graph
                            .edges()
                            .iter()
                            .map(|e| [e.source, e.target, e.relation])
                            .collect()
                    }
                    Err(e) => {
                        log::warn!(
                            "{}: tree rejected ({e}); emitting an empty graph",
                            doc.doc_id()
                        );
                        Vec::new()
                    }
                }
            }
            None => Vec::new(),
        };

        let coref_pairs = match clusters.get(doc.doc_id()) {
            Some(c) => match build_coref_graph(num_edus, &c.clusters) {
                Ok(graph) => graph.pairs().map(|(a, b)| [a, b]).collect(),
                Err(e) => {
                    log::warn!(
                        "{}: clusters rejected ({e}); emitting no coref edges",
                        doc.doc_id()
                    );
                    Vec::new()
                }
            },
            None => Vec::new(),
        };

        records.push(GraphRecord {
            version: FORMAT_VERSION.to_string(),
            doc_id: doc.doc_id().to_string(),
            num_edus,
            rst_edges,
            coref_pairs,
        });
    }

    records.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    write_jsonl(&args.output, &records)?;
    log::info!("built graphs for {} documents", records.len());
    Ok(())
}
