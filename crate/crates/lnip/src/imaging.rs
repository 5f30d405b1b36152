//! Image decoding, grayscale conversion, and dataset preparation.
//!
//! Datasets are directories with one subdirectory per category, or a
//! `manifest.tsv` at the root mapping relative paths to categories
//! (one `<path><TAB><category>` line per image). Images may optionally
//! be split into non-overlapping tiles while loading.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Error;

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    /// Wraps a row-major pixel buffer. The buffer length must equal
    /// `width * height` and both dimensions must be positive.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, Error> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if pixels.len() != width * height {
            return Err(Error::PixelBufferMismatch {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image by evaluating `f` at every `(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }
}

/// One labeled image of a dataset.
#[derive(Debug, Clone)]
pub struct DatasetItem {
    pub id: String,
    pub category: String,
    pub image: GrayImage,
}

/// BT.601 luminance of an RGB triple, rounded to the nearest integer.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

/// Converts an interleaved RGB buffer (`3 * width * height` bytes) to
/// grayscale. Gray inputs (R = G = B) pass through unchanged.
pub fn to_grayscale(width: usize, height: usize, rgb: &[u8]) -> Result<GrayImage, Error> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage);
    }
    if rgb.len() != width * height * 3 {
        return Err(Error::PixelBufferMismatch {
            expected: width * height * 3,
            actual: rgb.len(),
        });
    }
    let pixels = rgb
        .chunks_exact(3)
        .map(|p| luma(p[0], p[1], p[2]))
        .collect();
    Ok(GrayImage {
        width,
        height,
        pixels,
    })
}

/// Decodes an image file (PNG, JPEG, PGM, ...) and converts it to grayscale.
///
/// Single-channel sources are used as-is; color sources go through
/// [`to_grayscale`].
pub fn load_image(path: &Path) -> Result<GrayImage, Error> {
    let decoded = image::open(path).map_err(|source| Error::Decode {
        path: path.to_owned(),
        source,
    })?;
    Ok(gray_from_decoded(decoded))
}

fn gray_from_decoded(img: image::DynamicImage) -> GrayImage {
    use image::DynamicImage;
    match img {
        DynamicImage::ImageLuma8(g) => {
            let (w, h) = g.dimensions();
            GrayImage {
                width: w as usize,
                height: h as usize,
                pixels: g.into_raw(),
            }
        }
        DynamicImage::ImageLumaA8(g) => {
            let (w, h) = g.dimensions();
            let pixels = g.into_raw().chunks_exact(2).map(|p| p[0]).collect();
            GrayImage {
                width: w as usize,
                height: h as usize,
                pixels,
            }
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = rgb.dimensions();
            to_grayscale(w as usize, h as usize, rgb.as_raw())
                .expect("decoded image has a consistent pixel buffer")
        }
    }
}

/// Writes the image as an 8-bit grayscale PNG.
pub fn save_png(img: &GrayImage, path: &Path) -> Result<(), Error> {
    let buf = image::GrayImage::from_raw(img.width as u32, img.height as u32, img.pixels.clone())
        .expect("buffer length matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| match source {
            image::ImageError::IoError(e) => Error::io(path, e),
            other => Error::Encode {
                path: path.to_owned(),
                source: other,
            },
        })
}

/// Splits an image into non-overlapping `tile_w` x `tile_h` tiles in
/// row-major order. Trailing pixels that do not fill a whole tile are
/// discarded.
pub fn tile(img: &GrayImage, tile_w: usize, tile_h: usize) -> Result<Vec<GrayImage>, Error> {
    if tile_w < 3 || tile_h < 3 || tile_w > img.width || tile_h > img.height {
        return Err(Error::InvalidTileSize {
            tile_w,
            tile_h,
            width: img.width,
            height: img.height,
        });
    }
    let across = img.width / tile_w;
    let down = img.height / tile_h;
    let mut tiles = Vec::with_capacity(across * down);
    for ty in 0..down {
        for tx in 0..across {
            let mut pixels = Vec::with_capacity(tile_w * tile_h);
            for row in 0..tile_h {
                let y = ty * tile_h + row;
                let start = y * img.width + tx * tile_w;
                pixels.extend_from_slice(&img.pixels[start..start + tile_w]);
            }
            tiles.push(GrayImage {
                width: tile_w,
                height: tile_h,
                pixels,
            });
        }
    }
    Ok(tiles)
}

/// Manifest file looked for at the dataset root before falling back to
/// one-subdirectory-per-category discovery.
pub const MANIFEST_FILE: &str = "manifest.tsv";

const IMAGE_EXTENSIONS: [&str; 5] = ["png", "jpg", "jpeg", "pgm", "pnm"];

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

struct SourceFile {
    /// Path relative to the dataset root, used as the sort key.
    sort_key: String,
    category: String,
    /// Name part of the item id (file name, or the manifest's relative path).
    name: String,
    path: PathBuf,
}

/// Loads every image under `root`, in lexicographic path order.
///
/// Item ids are `<category>/<name>`, with `#<tile-index>` appended when
/// `tiling` is set. Files that fail to decode are skipped with a warning;
/// a dataset that yields no items at all is an error.
pub fn load_dataset(
    root: &Path,
    tiling: Option<(usize, usize)>,
) -> Result<Vec<DatasetItem>, Error> {
    let manifest = root.join(MANIFEST_FILE);
    let sources = if manifest.is_file() {
        manifest_sources(root, &manifest)?
    } else {
        directory_sources(root)?
    };

    let mut items = Vec::new();
    for src in sources {
        let image = match load_image(&src.path) {
            Ok(img) => img,
            Err(err) => {
                log::warn!("skipping {}: {err}", src.path.display());
                continue;
            }
        };
        let id_base = format!("{}/{}", src.category, src.name);
        match tiling {
            None => items.push(DatasetItem {
                id: id_base,
                category: src.category,
                image,
            }),
            Some((tw, th)) => {
                for (k, t) in tile(&image, tw, th)?.into_iter().enumerate() {
                    items.push(DatasetItem {
                        id: format!("{id_base}#{k}"),
                        category: src.category.clone(),
                        image: t,
                    });
                }
            }
        }
    }

    if items.is_empty() {
        return Err(Error::EmptyDataset {
            root: root.to_owned(),
        });
    }
    Ok(items)
}

fn directory_sources(root: &Path) -> Result<Vec<SourceFile>, Error> {
    let mut sources = Vec::new();
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let dir = entry.path();
        if !dir.is_dir() {
            continue;
        }
        let category = match dir.file_name().and_then(|n| n.to_str()) {
            Some(name) => name.to_owned(),
            None => continue,
        };
        let files = fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
        for file in files {
            let file = file.map_err(|e| Error::io(&dir, e))?;
            let path = file.path();
            if !path.is_file() || !has_image_extension(&path) {
                continue;
            }
            let name = match path.file_name().and_then(|n| n.to_str()) {
                Some(name) => name.to_owned(),
                None => continue,
            };
            sources.push(SourceFile {
                sort_key: format!("{category}/{name}"),
                category: category.clone(),
                name,
                path,
            });
        }
    }
    sources.sort_by(|a, b| a.sort_key.cmp(&b.sort_key));
    Ok(sources)
}

fn manifest_sources(root: &Path, manifest: &Path) -> Result<Vec<SourceFile>, Error> {
    let text = fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let mut seen = std::collections::HashSet::new();
    let mut sources = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((rel, category)) = line.split_once('\t') else {
            log::warn!(
                "{}:{}: expected `<path><TAB><category>`, skipping",
                manifest.display(),
                lineno + 1
            );
            continue;
        };
        let (rel, category) = (rel.trim(), category.trim());
        if rel.is_empty() || category.is_empty() {
            log::warn!(
                "{}:{}: empty path or category, skipping",
                manifest.display(),
                lineno + 1
            );
            continue;
        }
        if !seen.insert(rel.to_owned()) {
            log::warn!(
                "{}:{}: duplicate entry for {rel}, skipping",
                manifest.display(),
                lineno + 1
            );
            continue;
        }
        sources.push(SourceFile {
            sort_key: rel.to_owned(),
            category: category.to_owned(),
            name: rel.to_owned(),
            path: root.join(rel),
        });
    }
    sources.sort_by(|a, b| a.sort_key.cmp(&b.sort_key));
    Ok(sources)
}
