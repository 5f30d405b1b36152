//! Texture descriptors over 3x3 neighborhoods.
//!
//! Three per-pixel codes are supported:
//!
//! * `Lbp`: each neighbor is thresholded against the window center.
//! * `LnipSign`: for each neighbor, the pixels adjacent to it within the
//!   window are thresholded once against that neighbor and once against
//!   the center; the neighbor's bit is set when the two threshold strings
//!   disagree in at least half the positions.
//! * `LnipMagnitude`: the neighbor's bit is set when the mean absolute
//!   deviation of its adjacent pixels from it reaches the mean absolute
//!   deviation of all eight neighbors from the center.
//!
//! A descriptor is the 256-bin code histogram, or for the combined kind
//! the sign histogram followed by the magnitude histogram (512 bins).

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::imaging::GrayImage;

/// Offsets `(dx, dy)` of neighbors 1..=8 relative to the window center.
///
/// Neighbor 1 is directly above the center and indices advance clockwise,
/// so 3 is to the right, 5 below, and 7 to the left.
pub const NEIGHBOR_OFFSETS: [(isize, isize); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

/// A 3x3 pixel neighborhood. `neighbors[i - 1]` holds neighbor `i` as
/// laid out in [`NEIGHBOR_OFFSETS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window3x3 {
    pub center: u8,
    pub neighbors: [u8; 8],
}

impl Window3x3 {
    pub fn new(center: u8, neighbors: [u8; 8]) -> Self {
        Self { center, neighbors }
    }

    /// Reads the window centered at `(x, y)`. The center must be an
    /// interior pixel.
    pub fn at(img: &GrayImage, x: usize, y: usize) -> Self {
        assert!(
            x >= 1 && y >= 1 && x + 1 < img.width() && y + 1 < img.height(),
            "window center must be interior"
        );
        let mut neighbors = [0u8; 8];
        for (slot, (dx, dy)) in neighbors.iter_mut().zip(NEIGHBOR_OFFSETS) {
            *slot = img.pixel((x as isize + dx) as usize, (y as isize + dy) as usize);
        }
        Self {
            center: img.pixel(x, y),
            neighbors,
        }
    }

    /// Neighbor `i` for `i` in 1..=8.
    #[inline]
    pub fn neighbor(&self, i: u8) -> u8 {
        self.neighbors[usize::from(i) - 1]
    }
}

/// The neighbors adjacent to one neighbor within the 3x3 window.
///
/// Corner neighbors (even index) touch two others; edge-midpoint
/// neighbors (odd index) touch four.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdjacencySet {
    owner: u8,
    members: [u8; 4],
    len: u8,
}

impl AdjacencySet {
    /// The neighbor index this set belongs to.
    pub fn owner(&self) -> u8 {
        self.owner
    }

    /// Indices of the adjacent neighbors, in construction order.
    pub fn members(&self) -> &[u8] {
        &self.members[..usize::from(self.len)]
    }

    pub fn len(&self) -> usize {
        usize::from(self.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Maps an index into 1..=8, folding a modulus result of 0 onto 8.
const fn wrap(v: u8) -> u8 {
    if v == 0 {
        8
    } else {
        v
    }
}

const fn build_adjacency(i: u8) -> AdjacencySet {
    if i % 2 == 1 {
        AdjacencySet {
            owner: i,
            members: [
                wrap(1 + (i + 5) % 7),
                wrap(1 + (i + 6) % 9),
                wrap(i + 1),
                wrap((i + 2) % 8),
            ],
            len: 4,
        }
    } else {
        AdjacencySet {
            owner: i,
            members: [i - 1, wrap((i + 1) % 8), 0, 0],
            len: 2,
        }
    }
}

const ADJACENCY: [AdjacencySet; 8] = {
    let mut table = [build_adjacency(1); 8];
    let mut i = 1;
    while i <= 8 {
        table[(i - 1) as usize] = build_adjacency(i);
        i += 1;
    }
    table
};

/// The adjacency set of neighbor `i`, for `i` in 1..=8.
pub fn adjacency_set(i: u8) -> Result<AdjacencySet, Error> {
    if (1..=8).contains(&i) {
        Ok(ADJACENCY[usize::from(i) - 1])
    } else {
        Err(Error::NeighborIndex(i))
    }
}

/// Classic local binary pattern: bit `i` is set when neighbor `i` is at
/// least the center.
pub fn lbp_code(w: &Window3x3) -> u8 {
    let mut code = 0u8;
    for i in 0..8 {
        if w.neighbors[i] >= w.center {
            code |= 1 << i;
        }
    }
    code
}

fn sign_bit(w: &Window3x3, set: &AdjacencySet) -> bool {
    let own = w.neighbor(set.owner);
    let mut differing = 0usize;
    for &j in set.members() {
        let v = w.neighbor(j);
        if (v >= own) != (v >= w.center) {
            differing += 1;
        }
    }
    // At least half the adjacent pixels must flip between the two
    // thresholds; for corner neighbors that means one of two.
    differing * 2 >= set.len()
}

/// Bit `i` of the sign code, for `i` in 1..=8.
pub fn lnip_s_bit(w: &Window3x3, i: u8) -> Result<bool, Error> {
    Ok(sign_bit(w, &adjacency_set(i)?))
}

/// Sign component code of the window.
pub fn lnip_s_code(w: &Window3x3) -> u8 {
    let mut code = 0u8;
    for (i, set) in ADJACENCY.iter().enumerate() {
        if sign_bit(w, set) {
            code |= 1 << i;
        }
    }
    code
}

fn mean_abs_deviation(w: &Window3x3, set: &AdjacencySet) -> f64 {
    let own = i32::from(w.neighbor(set.owner));
    let sum: i32 = set
        .members()
        .iter()
        .map(|&j| (i32::from(w.neighbor(j)) - own).abs())
        .sum();
    // Set sizes are 2 and 4, so the division is exact in f64.
    f64::from(sum) / set.len() as f64
}

/// Mean absolute deviation of neighbor `i`'s adjacent pixels from
/// neighbor `i`, for `i` in 1..=8.
pub fn neighbor_mean_deviation(w: &Window3x3, i: u8) -> Result<f64, Error> {
    Ok(mean_abs_deviation(w, &adjacency_set(i)?))
}

/// Mean absolute deviation of the eight neighbors from the center.
pub fn center_mean_deviation(w: &Window3x3) -> f64 {
    let c = i32::from(w.center);
    let sum: i32 = w.neighbors.iter().map(|&n| (i32::from(n) - c).abs()).sum();
    f64::from(sum) / 8.0
}

/// Bit `i` of the magnitude code, for `i` in 1..=8.
pub fn lnip_m_bit(w: &Window3x3, i: u8) -> Result<bool, Error> {
    Ok(neighbor_mean_deviation(w, i)? >= center_mean_deviation(w))
}

/// Magnitude component code of the window.
pub fn lnip_m_code(w: &Window3x3) -> u8 {
    let threshold = center_mean_deviation(w);
    let mut code = 0u8;
    for (i, set) in ADJACENCY.iter().enumerate() {
        if mean_abs_deviation(w, set) >= threshold {
            code |= 1 << i;
        }
    }
    code
}

/// One per-pixel coding rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternKernel {
    Lbp,
    LnipSign,
    LnipMagnitude,
}

impl PatternKernel {
    pub fn code(self, w: &Window3x3) -> u8 {
        match self {
            PatternKernel::Lbp => lbp_code(w),
            PatternKernel::LnipSign => lnip_s_code(w),
            PatternKernel::LnipMagnitude => lnip_m_code(w),
        }
    }

    /// The single-histogram descriptor kind this kernel produces.
    pub fn descriptor_kind(self) -> DescriptorKind {
        match self {
            PatternKernel::Lbp => DescriptorKind::Lbp,
            PatternKernel::LnipSign => DescriptorKind::LnipS,
            PatternKernel::LnipMagnitude => DescriptorKind::LnipM,
        }
    }
}

/// Per-pixel codes for the interior of an image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMap {
    kernel: PatternKernel,
    width: usize,
    height: usize,
    codes: Vec<u8>,
}

impl PatternMap {
    pub fn kernel(&self) -> PatternKernel {
        self.kernel
    }

    /// Interior width, two less than the source image.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Interior height, two less than the source image.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }
}

/// Applies `kernel` at every interior pixel. The image must be at least
/// 3x3; border pixels produce no code.
pub fn pattern_map(img: &GrayImage, kernel: PatternKernel) -> Result<PatternMap, Error> {
    if img.width() < 3 || img.height() < 3 {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
        });
    }
    let width = img.width() - 2;
    let height = img.height() - 2;
    let mut codes = Vec::with_capacity(width * height);
    for y in 1..img.height() - 1 {
        for x in 1..img.width() - 1 {
            codes.push(kernel.code(&Window3x3::at(img, x, y)));
        }
    }
    Ok(PatternMap {
        kernel,
        width,
        height,
        codes,
    })
}

fn histogram_bins(map: &PatternMap) -> Vec<u64> {
    let mut bins = vec![0u64; 256];
    for &code in &map.codes {
        bins[usize::from(code)] += 1;
    }
    bins
}

/// 256-bin code histogram of a pattern map.
pub fn histogram(map: &PatternMap) -> FeatureVector {
    FeatureVector {
        kind: map.kernel.descriptor_kind(),
        bins: histogram_bins(map),
    }
}

/// Descriptor family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DescriptorKind {
    Lbp,
    LnipS,
    LnipM,
    Lnip,
}

impl DescriptorKind {
    pub const ALL: [DescriptorKind; 4] = [
        DescriptorKind::Lbp,
        DescriptorKind::LnipS,
        DescriptorKind::LnipM,
        DescriptorKind::Lnip,
    ];

    /// Number of histogram bins in a feature of this kind.
    pub fn feature_len(self) -> usize {
        match self {
            DescriptorKind::Lnip => 512,
            _ => 256,
        }
    }

    /// Kernels whose histograms are concatenated, in order.
    pub fn kernels(self) -> &'static [PatternKernel] {
        match self {
            DescriptorKind::Lbp => &[PatternKernel::Lbp],
            DescriptorKind::LnipS => &[PatternKernel::LnipSign],
            DescriptorKind::LnipM => &[PatternKernel::LnipMagnitude],
            DescriptorKind::Lnip => &[PatternKernel::LnipSign, PatternKernel::LnipMagnitude],
        }
    }

    /// Identifier written to feature store headers.
    pub fn store_name(self) -> &'static str {
        match self {
            DescriptorKind::Lbp => "LBP",
            DescriptorKind::LnipS => "LNIP_S",
            DescriptorKind::LnipM => "LNIP_M",
            DescriptorKind::Lnip => "LNIP",
        }
    }
}

impl fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DescriptorKind::Lbp => "lbp",
            DescriptorKind::LnipS => "lnip-s",
            DescriptorKind::LnipM => "lnip-m",
            DescriptorKind::Lnip => "lnip",
        };
        f.write_str(name)
    }
}

impl FromStr for DescriptorKind {
    type Err = Error;

    /// Accepts both the command-line form (`lnip-s`) and the store-header
    /// form (`LNIP_S`), case-insensitively.
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "lbp" => Ok(DescriptorKind::Lbp),
            "lnip-s" | "lnip_s" => Ok(DescriptorKind::LnipS),
            "lnip-m" | "lnip_m" => Ok(DescriptorKind::LnipM),
            "lnip" => Ok(DescriptorKind::Lnip),
            _ => Err(Error::UnknownKind(s.to_owned())),
        }
    }
}

/// A histogram descriptor: raw bin counts plus the kind that shaped them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    kind: DescriptorKind,
    bins: Vec<u64>,
}

impl FeatureVector {
    pub fn new(kind: DescriptorKind, bins: Vec<u64>) -> Result<Self, Error> {
        if bins.len() != kind.feature_len() {
            return Err(Error::FeatureLength {
                kind,
                expected: kind.feature_len(),
                actual: bins.len(),
            });
        }
        Ok(Self { kind, bins })
    }

    pub fn kind(&self) -> DescriptorKind {
        self.kind
    }

    pub fn bins(&self) -> &[u64] {
        &self.bins
    }

    /// Sum of all bins; the number of coded pixels per kernel times the
    /// number of kernels.
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    /// Bin values as floats, optionally L1-normalized. An all-zero
    /// vector normalizes to all zeros.
    pub fn values(&self, normalize: bool) -> Vec<f64> {
        let total = self.total();
        if normalize && total > 0 {
            let t = total as f64;
            self.bins.iter().map(|&b| b as f64 / t).collect()
        } else {
            self.bins.iter().map(|&b| b as f64).collect()
        }
    }
}

/// Computes the descriptor of `kind` for one image.
pub fn extract_feature(img: &GrayImage, kind: DescriptorKind) -> Result<FeatureVector, Error> {
    let mut bins = Vec::with_capacity(kind.feature_len());
    for &kernel in kind.kernels() {
        bins.extend_from_slice(&histogram_bins(&pattern_map(img, kernel)?));
    }
    Ok(FeatureVector { kind, bins })
}
