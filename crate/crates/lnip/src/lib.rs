//! Local neighborhood intensity patterns for texture-based image
//! retrieval.
//!
//! The crate computes sign and magnitude pattern codes over 3x3
//! neighborhoods, turns their histograms into feature vectors, and ships
//! the surrounding machinery: dataset loading and tiling, five histogram
//! distance measures, an exhaustively scanned feature index with a text
//! store format, and a precision/recall evaluation harness.
//!
//! ```
//! use lnip::descriptors::{extract_feature, DescriptorKind};
//! use lnip::imaging::GrayImage;
//!
//! let img = GrayImage::from_fn(16, 16, |x, y| (x * 16 + y) as u8);
//! let feature = extract_feature(&img, DescriptorKind::Lnip).unwrap();
//! assert_eq!(feature.bins().len(), 512);
//! assert_eq!(feature.total(), 2 * 14 * 14);
//! ```

pub mod descriptors;
pub mod error;
pub mod evaluation;
pub mod imaging;
pub mod retrieval;
pub mod similarity;

pub use error::Error;
