//! Precision/recall scoring and dataset-level aggregation.
//!
//! Every indexed image is treated as a query against the full index (the
//! query itself stays in and ranks first). Per-query scores are averaged
//! within each category, and the dataset totals are the unweighted means
//! of the category averages. Total recall is the average retrieval rate.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::descriptors::DescriptorKind;
use crate::error::Error;
use crate::retrieval::{FeatureIndex, RetrievalResult};
use crate::similarity::DistanceMetric;

/// Precision and recall of one query at one retrieval count.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryScore {
    pub query_id: String,
    pub n_retrieved: usize,
    pub relevant_retrieved: usize,
    pub relevant_total: usize,
    pub precision: f64,
    pub recall: f64,
}

/// Counts ranked hits in the first `n` that share `query_category`.
/// Precision divides by `n`, recall by `relevant_total` (the number of
/// database images in the query's category).
pub fn score_query(
    result: &RetrievalResult,
    query_category: &str,
    relevant_total: usize,
    n: usize,
) -> Result<QueryScore, Error> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".to_owned()));
    }
    if n > result.ranked.len() {
        return Err(Error::InvalidArgument(format!(
            "n = {n} exceeds the {} ranked results",
            result.ranked.len()
        )));
    }
    if relevant_total == 0 {
        return Err(Error::InvalidArgument(
            "relevant_total must be at least 1".to_owned(),
        ));
    }
    let relevant_retrieved = result.ranked[..n]
        .iter()
        .filter(|hit| hit.category == query_category)
        .count();
    Ok(QueryScore {
        query_id: result.query_id.clone(),
        n_retrieved: n,
        relevant_retrieved,
        relevant_total,
        precision: relevant_retrieved as f64 / n as f64,
        recall: relevant_retrieved as f64 / relevant_total as f64,
    })
}

/// Mean precision and recall over one category's queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryAverage {
    pub avg_precision: f64,
    pub avg_recall: f64,
}

/// Aggregated scores for one (kind, metric, n) configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub kind: DescriptorKind,
    pub metric: DistanceMetric,
    pub n_retrieved: usize,
    pub per_category: BTreeMap<String, CategoryAverage>,
    pub p_total: f64,
    pub r_total: f64,
}

/// Runs every index entry as a query and aggregates scores for each `n`
/// in `n_values` (order preserved; one report per n).
///
/// Queries run in parallel; aggregation order is fixed, so the reports
/// are identical regardless of thread count.
pub fn evaluate(
    index: &FeatureIndex,
    metric: DistanceMetric,
    n_values: &[usize],
    normalize: bool,
) -> Result<Vec<EvalReport>, Error> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    for &n in n_values {
        if n == 0 || n > index.len() {
            return Err(Error::InvalidArgument(format!(
                "n = {n} outside 1..={}",
                index.len()
            )));
        }
    }
    let Some(&max_n) = n_values.iter().max() else {
        return Ok(Vec::new());
    };

    let entries = index.entries();
    let categories: Vec<&str> = {
        let mut names: Vec<&str> = entries.iter().map(|e| e.category.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        names
    };
    let cat_of: Vec<usize> = entries
        .iter()
        .map(|e| {
            categories
                .binary_search(&e.category.as_str())
                .expect("every entry category was collected")
        })
        .collect();
    let mut cat_size = vec![0usize; categories.len()];
    for &c in &cat_of {
        cat_size[c] += 1;
    }

    let values: Vec<Vec<f64>> = entries
        .iter()
        .map(|e| e.feature.values(normalize))
        .collect();

    // For each query: relevant hits among the first n, per requested n.
    let relevant_counts: Vec<Vec<usize>> = (0..entries.len())
        .into_par_iter()
        .map(|qi| {
            let mut order: Vec<(usize, f64)> = values
                .iter()
                .enumerate()
                .map(|(j, v)| (j, metric.eval(&values[qi], v)))
                .collect();
            order.sort_by(|a, b| a.1.total_cmp(&b.1));
            order.truncate(max_n);
            n_values
                .iter()
                .map(|&n| {
                    order[..n]
                        .iter()
                        .filter(|(j, _)| cat_of[*j] == cat_of[qi])
                        .count()
                })
                .collect()
        })
        .collect();

    let reports = n_values
        .iter()
        .enumerate()
        .map(|(ni, &n)| {
            let mut precision_sum = vec![0.0f64; categories.len()];
            let mut recall_sum = vec![0.0f64; categories.len()];
            for (qi, counts) in relevant_counts.iter().enumerate() {
                let c = cat_of[qi];
                let relevant = counts[ni] as f64;
                precision_sum[c] += relevant / n as f64;
                recall_sum[c] += relevant / cat_size[c] as f64;
            }
            let mut per_category = BTreeMap::new();
            let mut p_total = 0.0;
            let mut r_total = 0.0;
            for (ci, &name) in categories.iter().enumerate() {
                let avg = CategoryAverage {
                    avg_precision: precision_sum[ci] / cat_size[ci] as f64,
                    avg_recall: recall_sum[ci] / cat_size[ci] as f64,
                };
                per_category.insert(name.to_owned(), avg);
                p_total += avg.avg_precision;
                r_total += avg.avg_recall;
            }
            EvalReport {
                kind: index.kind(),
                metric,
                n_retrieved: n,
                per_category,
                p_total: p_total / categories.len() as f64,
                r_total: r_total / categories.len() as f64,
            }
        })
        .collect();
    Ok(reports)
}

fn csv_field(s: &str) -> Cow<'_, str> {
    if s.contains([',', '"', '\n']) {
        Cow::Owned(format!("\"{}\"", s.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(s)
    }
}

fn sorted(reports: &[EvalReport]) -> Vec<&EvalReport> {
    let mut ordered: Vec<&EvalReport> = reports.iter().collect();
    ordered.sort_by_key(|r| (r.kind.to_string(), r.metric.to_string(), r.n_retrieved));
    ordered
}

/// Writes per-category rows plus a TOTAL row per report, sorted by
/// (kind, metric, n) with categories in lexicographic order.
pub fn emit_report(reports: &[EvalReport], path: &Path) -> Result<(), Error> {
    let mut out = String::from("kind,metric,n_retrieved,category,avg_precision,avg_recall\n");
    for r in sorted(reports) {
        for (category, avg) in &r.per_category {
            out.push_str(&format!(
                "{},{},{},{},{:.6},{:.6}\n",
                r.kind,
                r.metric,
                r.n_retrieved,
                csv_field(category),
                avg.avg_precision,
                avg.avg_recall
            ));
        }
        out.push_str(&format!(
            "{},{},{},TOTAL,{:.6},{:.6}\n",
            r.kind, r.metric, r.n_retrieved, r.p_total, r.r_total
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes one (p_total, r_total) row per report, for external plotting.
pub fn emit_curves(reports: &[EvalReport], path: &Path) -> Result<(), Error> {
    let mut out = String::from("kind,metric,n_retrieved,p_total,r_total\n");
    for r in sorted(reports) {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6}\n",
            r.kind, r.metric, r.n_retrieved, r.p_total, r.r_total
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
