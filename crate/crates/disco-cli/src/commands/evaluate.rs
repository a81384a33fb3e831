use std::collections::BTreeMap;

use disco_core::bootstrap::{bootstrap_ci, BootstrapResult};
use disco_core::rouge::{novel_ngram_proportion, rouge_l, rouge_n, tokenize};
use disco_core::FORMAT_VERSION;

use crate::cli::EvaluateArgs;
use crate::error::CliError;
use crate::formats::{
    read_documents, read_jsonl, write_json_pretty, EvalReport, ExtractionRecord, MetricBlock,
    NovelNgramBlock, SummaryRecord,
};

pub fn run(args: &EvaluateArgs) -> Result<(), CliError> {
    let candidates: BTreeMap<String, Vec<String>> =
        read_jsonl::<ExtractionRecord>(&args.candidates)?
            .into_iter()
            .map(|r| (r.doc_id, tokenize(&r.text)))
            .collect();
    let references: BTreeMap<String, Vec<String>> = read_jsonl::<SummaryRecord>(&args.references)?
        .into_iter()
        .map(|r| (r.doc_id, tokenize(&r.summary)))
        .collect();
    let sources: BTreeMap<String, Vec<String>> = match &args.documents {
        Some(path) => read_documents(path)?
            .into_iter()
            .map(|d| {
                let tokens = d
                    .tokens()
                    .iter()
                    .flat_map(|t| tokenize(&t.surface))
                    .collect();
                (d.doc_id().to_string(), tokens)
            })
            .collect(),
        None => BTreeMap::new(),
    };

    // Paired by doc id; unpaired records are logged and dropped.
    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    let mut rl = Vec::new();
    let mut novel = [Vec::new(), Vec::new(), Vec::new()];
    for (doc_id, cand) in &candidates {
        let Some(reference) = references.get(doc_id) else {
            log::warn!("{doc_id}: candidate without a reference, skipped");
            continue;
        };
        r1.push(rouge_n(cand, reference, 1).expect("n >= 1").f1);
        r2.push(rouge_n(cand, reference, 2).expect("n >= 1").f1);
        rl.push(rouge_l(cand, reference).f1);
        if let Some(source) = sources.get(doc_id) {
            for (slot, n) in [(0usize, 1usize), (1, 2), (2, 3)] {
                novel[slot].push(novel_ngram_proportion(cand, source, n));
            }
        }
    }
    if r1.is_empty() {
        return Err(CliError::validation(
            "no candidate/reference pairs share a doc_id".to_string(),
        ));
    }

    let ci = |scores: &[f64], lane: u64| -> Result<MetricBlock, CliError> {
        let r: BootstrapResult =
            bootstrap_ci(scores, args.replicates, args.confidence, args.seed ^ lane)
                .map_err(|e| CliError::validation(e.to_string()))?;
        Ok(MetricBlock {
            point: r.point_estimate,
            lower: r.lower,
            upper: r.upper,
            margin_of_error: r.margin_of_error,
            width: r.width(),
        })
    };

    let novel_ngrams = if novel[0].is_empty() {
        None
    } else {
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        Some(NovelNgramBlock {
            unigram: mean(&novel[0]),
            bigram: mean(&novel[1]),
            trigram: mean(&novel[2]),
        })
    };

    let report = EvalReport {
        version: FORMAT_VERSION.to_string(),
        documents: r1.len(),
        replicates: args.replicates,
        confidence: args.confidence,
        seed: args.seed,
        rouge1: ci(&r1, 1)?,
        rouge2: ci(&r2, 2)?,
        rouge_l: ci(&rl, 3)?,
        novel_ngrams,
    };
    write_json_pretty(&args.output, &report)?;
    log::info!(
        "evaluated {} pairs: R-1 {:.4} ± {:.4}",
        report.documents,
        report.rouge1.point,
        report.rouge1.margin_of_error
    );
    Ok(())
}
