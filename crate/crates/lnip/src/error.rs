use std::path::PathBuf;

use thiserror::Error;

use crate::descriptors::DescriptorKind;

/// Error type shared by every module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("image has no pixels")]
    EmptyImage,

    #[error("pixel buffer holds {actual} values, expected {expected}")]
    PixelBufferMismatch { expected: usize, actual: usize },

    #[error("image is {width}x{height}; descriptor extraction needs at least 3x3")]
    ImageTooSmall { width: usize, height: usize },

    #[error(
        "tile size {tile_w}x{tile_h} is invalid for a {width}x{height} image \
         (tiles must be at least 3x3 and no larger than the image)"
    )]
    InvalidTileSize {
        tile_w: usize,
        tile_h: usize,
        width: usize,
        height: usize,
    },

    #[error("no images found under {}", .root.display())]
    EmptyDataset { root: PathBuf },

    #[error("cannot build an index from an empty item list")]
    NoItems,

    #[error("index has no entries")]
    EmptyIndex,

    #[error("failed to decode image {}: {source}", .path.display())]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("failed to write image {}: {source}", .path.display())]
    Encode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("neighbor index {0} is outside 1..=8")]
    NeighborIndex(u8),

    #[error("feature vector of kind {kind} must have {expected} bins, got {actual}")]
    FeatureLength {
        kind: DescriptorKind,
        expected: usize,
        actual: usize,
    },

    #[error("feature kinds differ: {left} vs {right}")]
    KindMismatch {
        left: DescriptorKind,
        right: DescriptorKind,
    },

    #[error("feature lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("duplicate id `{id}`")]
    DuplicateId { id: String },

    #[error("item `{id}`: {source}")]
    Item {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}:{line}: {msg}", .path.display())]
    Store {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("unknown descriptor kind `{0}` (expected lbp, lnip-s, lnip-m, or lnip)")]
    UnknownKind(String),

    #[error("unknown distance metric `{0}` (expected d1, euclidean, manhattan, canberra, or chi-square)")]
    UnknownMetric(String),

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
