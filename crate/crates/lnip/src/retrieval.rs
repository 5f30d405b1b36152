//! Feature index construction, persistence, and ranked querying.
//!
//! The index is an ordered list of (id, category, feature) records sharing
//! one descriptor kind. Queries scan it exhaustively and sort by distance;
//! equal distances keep insertion order so rankings are reproducible.

use std::collections::HashSet;
use std::fs;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::descriptors::{extract_feature, DescriptorKind, FeatureVector};
use crate::error::Error;
use crate::imaging::DatasetItem;
use crate::similarity::DistanceMetric;

/// One indexed image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub id: String,
    pub category: String,
    pub feature: FeatureVector,
}

/// An ordered collection of equally shaped features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureIndex {
    kind: DescriptorKind,
    entries: Vec<IndexEntry>,
}

impl FeatureIndex {
    /// Wraps entries that must all carry `kind` features and unique ids.
    pub fn new(kind: DescriptorKind, entries: Vec<IndexEntry>) -> Result<Self, Error> {
        let mut seen = HashSet::new();
        for entry in &entries {
            if entry.feature.kind() != kind {
                return Err(Error::KindMismatch {
                    left: kind,
                    right: entry.feature.kind(),
                });
            }
            if !seen.insert(entry.id.as_str()) {
                return Err(Error::DuplicateId {
                    id: entry.id.clone(),
                });
            }
        }
        Ok(Self { kind, entries })
    }

    pub fn kind(&self) -> DescriptorKind {
        self.kind
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Extracts a feature per item, preserving dataset order. Extraction runs
/// in parallel; the assembled index is independent of thread count.
pub fn build_index(items: &[DatasetItem], kind: DescriptorKind) -> Result<FeatureIndex, Error> {
    if items.is_empty() {
        return Err(Error::NoItems);
    }
    let entries = items
        .par_iter()
        .map(|item| {
            extract_feature(&item.image, kind)
                .map(|feature| IndexEntry {
                    id: item.id.clone(),
                    category: item.category.clone(),
                    feature,
                })
                .map_err(|source| Error::Item {
                    id: item.id.clone(),
                    source: Box::new(source),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    FeatureIndex::new(kind, entries)
}

/// One ranked match.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedHit {
    pub id: String,
    pub category: String,
    pub distance: f64,
}

/// Ranking produced by [`query`], best match first.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    pub query_id: String,
    pub ranked: Vec<RankedHit>,
}

/// Ranks every index entry by distance to `q` and keeps the closest
/// `top_n` (fewer if the index is smaller). With `normalize`, features
/// are L1-normalized before the distance is computed.
pub fn query(
    index: &FeatureIndex,
    query_id: impl Into<String>,
    q: &FeatureVector,
    metric: DistanceMetric,
    top_n: usize,
    normalize: bool,
) -> Result<RetrievalResult, Error> {
    if top_n == 0 {
        return Err(Error::InvalidArgument(
            "top_n must be at least 1".to_owned(),
        ));
    }
    if q.kind() != index.kind {
        return Err(Error::KindMismatch {
            left: q.kind(),
            right: index.kind,
        });
    }
    let q_vals = q.values(normalize);
    let mut order: Vec<(usize, f64)> = index
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| (i, metric.eval(&q_vals, &e.feature.values(normalize))))
        .collect();
    // Stable sort over ascending entry positions: ties keep index order.
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    order.truncate(top_n.min(index.entries.len()));
    Ok(RetrievalResult {
        query_id: query_id.into(),
        ranked: order
            .into_iter()
            .map(|(i, distance)| {
                let e = &index.entries[i];
                RankedHit {
                    id: e.id.clone(),
                    category: e.category.clone(),
                    distance,
                }
            })
            .collect(),
    })
}

const STORE_MAGIC: &str = "LNIPSTORE";
const STORE_VERSION: &str = "v1";

fn write_store(index: &FeatureIndex, w: &mut impl Write) -> io::Result<()> {
    writeln!(
        w,
        "{STORE_MAGIC} {STORE_VERSION} {} {}",
        index.kind.store_name(),
        index.kind.feature_len()
    )?;
    for e in &index.entries {
        write!(w, "{}\t{}\t", e.id, e.category)?;
        let mut first = true;
        for b in e.feature.bins() {
            if first {
                first = false;
            } else {
                w.write_all(b",")?;
            }
            write!(w, "{b}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Writes the index as a line-delimited UTF-8 text file:
///
/// ```text
/// LNIPSTORE v1 <kind> <bins>
/// <id><TAB><category><TAB><b0>,<b1>,...
/// ```
pub fn save_index(index: &FeatureIndex, path: &Path) -> Result<(), Error> {
    for e in &index.entries {
        for (what, s) in [("id", &e.id), ("category", &e.category)] {
            if s.is_empty() || s.contains(['\t', '\n', '\r']) {
                return Err(Error::InvalidArgument(format!(
                    "{what} {s:?} cannot be stored: empty or contains tab/newline"
                )));
            }
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_store(index, &mut BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`save_index`]. Parse failures name the
/// offending line.
pub fn load_index(path: &Path) -> Result<FeatureIndex, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let store_err = |line: usize, msg: String| Error::Store {
        path: path.to_owned(),
        line,
        msg,
    };

    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(store_err(1, "missing header".to_owned()));
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != STORE_MAGIC || fields[1] != STORE_VERSION {
        return Err(store_err(1, format!("malformed header {header:?}")));
    }
    let kind = DescriptorKind::ALL
        .into_iter()
        .find(|k| k.store_name() == fields[2])
        .ok_or_else(|| store_err(1, format!("unknown descriptor kind {:?}", fields[2])))?;
    let bins: usize = fields[3]
        .parse()
        .map_err(|_| store_err(1, format!("invalid bin count {:?}", fields[3])))?;
    if bins != kind.feature_len() {
        return Err(store_err(
            1,
            format!(
                "kind {} requires {} bins, header declares {bins}",
                fields[2],
                kind.feature_len()
            ),
        ));
    }

    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let mut parts = line.splitn(3, '\t');
        let (Some(id), Some(category), Some(values)) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(store_err(
                lineno,
                "expected <id><TAB><category><TAB><bins>".to_owned(),
            ));
        };
        if id.is_empty() || category.is_empty() {
            return Err(store_err(lineno, "empty id or category".to_owned()));
        }
        if !seen.insert(id.to_owned()) {
            return Err(store_err(lineno, format!("duplicate id {id:?}")));
        }
        let mut parsed = Vec::with_capacity(bins);
        for v in values.split(',') {
            let b = v
                .parse::<u64>()
                .map_err(|_| store_err(lineno, format!("invalid bin value {v:?}")))?;
            parsed.push(b);
        }
        if parsed.len() != bins {
            return Err(store_err(
                lineno,
                format!("expected {bins} bins, found {}", parsed.len()),
            ));
        }
        entries.push(IndexEntry {
            id: id.to_owned(),
            category: category.to_owned(),
            feature: FeatureVector::new(kind, parsed).expect("bin count checked against kind"),
        });
    }
    Ok(FeatureIndex { kind, entries })
}
