//! Histogram distance measures used to rank database images.

use std::fmt;
use std::str::FromStr;

use crate::descriptors::FeatureVector;
use crate::error::Error;

/// The five supported distance measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistanceMetric {
    D1,
    Euclidean,
    Manhattan,
    Canberra,
    ChiSquare,
}

impl DistanceMetric {
    pub const ALL: [DistanceMetric; 5] = [
        DistanceMetric::D1,
        DistanceMetric::Euclidean,
        DistanceMetric::Manhattan,
        DistanceMetric::Canberra,
        DistanceMetric::ChiSquare,
    ];

    /// Distance between two equal-length vectors.
    ///
    /// Terms accumulate in ascending index order so results are identical
    /// across runs. Canberra and chi-square terms whose denominator is
    /// zero contribute nothing.
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        assert_eq!(a.len(), b.len(), "distance inputs must have equal length");
        self.eval_pairs(a.iter().zip(b).map(|(&x, &y)| (x, y)))
    }

    fn eval_pairs(self, pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
        match self {
            DistanceMetric::D1 => pairs.map(|(x, y)| (x - y).abs() / (1.0 + x + y)).sum(),
            DistanceMetric::Euclidean => pairs.map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            DistanceMetric::Manhattan => pairs.map(|(x, y)| (x - y).abs()).sum(),
            DistanceMetric::Canberra => pairs
                .map(|(x, y)| {
                    let den = x.abs() + y.abs();
                    if den == 0.0 {
                        0.0
                    } else {
                        (x - y).abs() / den
                    }
                })
                .sum(),
            DistanceMetric::ChiSquare => {
                0.5 * pairs
                    .map(|(x, y)| {
                        let den = x + y;
                        if den == 0.0 {
                            0.0
                        } else {
                            (x - y) * (x - y) / den
                        }
                    })
                    .sum::<f64>()
            }
        }
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DistanceMetric::D1 => "d1",
            DistanceMetric::Euclidean => "euclidean",
            DistanceMetric::Manhattan => "manhattan",
            DistanceMetric::Canberra => "canberra",
            DistanceMetric::ChiSquare => "chi-square",
        };
        f.write_str(name)
    }
}

impl FromStr for DistanceMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(DistanceMetric::D1),
            "euclidean" => Ok(DistanceMetric::Euclidean),
            "manhattan" => Ok(DistanceMetric::Manhattan),
            "canberra" => Ok(DistanceMetric::Canberra),
            "chi-square" | "chi_square" => Ok(DistanceMetric::ChiSquare),
            _ => Err(Error::UnknownMetric(s.to_owned())),
        }
    }
}

/// Distance between two feature vectors of the same kind, over raw bin
/// counts.
pub fn distance(
    metric: DistanceMetric,
    a: &FeatureVector,
    b: &FeatureVector,
) -> Result<f64, Error> {
    if a.kind() != b.kind() {
        return Err(Error::KindMismatch {
            left: a.kind(),
            right: b.kind(),
        });
    }
    if a.bins().len() != b.bins().len() {
        return Err(Error::LengthMismatch {
            left: a.bins().len(),
            right: b.bins().len(),
        });
    }
    Ok(metric.eval_pairs(
        a.bins()
            .iter()
            .zip(b.bins())
            .map(|(&x, &y)| (x as f64, y as f64)),
    ))
}
