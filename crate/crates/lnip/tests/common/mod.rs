//! Shared helpers for integration tests: a reference implementation of
//! the pattern codes written directly from their defining formulas, and
//! a deterministic synthetic texture corpus.

use lnip::imaging::{tile, DatasetItem, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Neighbor intensity at 1-based position `i`, clockwise from directly
/// above the center.
pub fn neighbor(img: &GrayImage, x: usize, y: usize, i: u8) -> u8 {
    let (dx, dy): (isize, isize) = match i {
        1 => (0, -1),
        2 => (1, -1),
        3 => (1, 0),
        4 => (1, 1),
        5 => (0, 1),
        6 => (-1, 1),
        7 => (-1, 0),
        8 => (-1, -1),
        _ => unreachable!("neighbor index {i}"),
    };
    img.pixel((x as isize + dx) as usize, (y as isize + dy) as usize)
}

fn wrap8(v: u8) -> u8 {
    if v == 0 {
        8
    } else {
        v
    }
}

/// Adjacent neighbor indices, straight from the defining formulas for
/// odd (edge-midpoint) and even (corner) positions.
pub fn naive_adjacency(i: u8) -> Vec<u8> {
    if i % 2 == 1 {
        vec![1 + (i + 5) % 7, 1 + (i + 6) % 9, i + 1, wrap8((i + 2) % 8)]
    } else {
        vec![i - 1, wrap8((i + 1) % 8)]
    }
}

pub fn naive_lbp(img: &GrayImage, x: usize, y: usize) -> u8 {
    let c = img.pixel(x, y);
    let mut code = 0u16;
    for i in 1..=8u8 {
        if neighbor(img, x, y, i) >= c {
            code += 1 << (i - 1);
        }
    }
    code as u8
}

pub fn naive_sign(img: &GrayImage, x: usize, y: usize) -> u8 {
    let c = f64::from(img.pixel(x, y));
    let mut code = 0u16;
    for i in 1..=8u8 {
        let own = f64::from(neighbor(img, x, y, i));
        let set = naive_adjacency(i);
        let b1: Vec<bool> = set
            .iter()
            .map(|&k| f64::from(neighbor(img, x, y, k)) >= own)
            .collect();
        let b2: Vec<bool> = set
            .iter()
            .map(|&k| f64::from(neighbor(img, x, y, k)) >= c)
            .collect();
        let differing = b1.iter().zip(&b2).filter(|(p, q)| *p != *q).count();
        if differing as f64 >= set.len() as f64 / 2.0 {
            code += 1 << (i - 1);
        }
    }
    code as u8
}

pub fn naive_magnitude(img: &GrayImage, x: usize, y: usize) -> u8 {
    let c = f64::from(img.pixel(x, y));
    let t_c = (1..=8u8)
        .map(|i| (f64::from(neighbor(img, x, y, i)) - c).abs())
        .sum::<f64>()
        / 8.0;
    let mut code = 0u16;
    for i in 1..=8u8 {
        let own = f64::from(neighbor(img, x, y, i));
        let set = naive_adjacency(i);
        let m = set
            .iter()
            .map(|&k| (f64::from(neighbor(img, x, y, k)) - own).abs())
            .sum::<f64>()
            / set.len() as f64;
        if m >= t_c {
            code += 1 << (i - 1);
        }
    }
    code as u8
}

pub fn random_image(rng: &mut impl Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.random::<u8>())
}

pub const SOURCE_SIDE: usize = 640;
pub const TILE_SIDE: usize = 128;
pub const CATEGORY_COUNT: usize = 10;
pub const TILES_PER_CATEGORY: usize = 25;

/// Procedural 640x640 texture for one category.
///
/// The classes are periodic fields with deliberately confusable
/// pairs: a ladder of stripe periods (0/1 horizontal, 2/3/6
/// vertical), amplitude twins on the rising diagonal (4/5) and the
/// period-14 vertical stripes (6/7), and a monotone knee-curve twin on the
/// falling diagonal (8/9). The knee curve preserves every order
/// comparison but distorts absolute-deviation ratios inside a window.
/// Every pixel carries uniform noise; the salt-and-pepper rate ramps
/// from zero to its peak across the image width, so tiles of one
/// class span the whole corruption range and a histogram that drifts
/// with the rate pays for it at retrieval time. A slow amplitude
/// swell adds further intra-class spread.
fn texture(cat: usize) -> GrayImage {
    use std::f64::consts::TAU;
    let (w, h) = (SOURCE_SIDE, SOURCE_SIDE);
    let mut rng = ChaCha8Rng::seed_from_u64(0xBA5E + cat as u64);
    let field = |x: usize, y: usize| -> f64 {
        let (xf, yf) = (x as f64, y as f64);
        match cat {
            0 => (TAU * yf / 12.0).sin(),
            1 => (TAU * yf / 16.0).sin(),
            2 => (TAU * xf / 12.0).sin(),
            3 => (TAU * xf / 16.0).sin(),
            4 => (TAU * (xf + yf) / 14.0).sin(),
            // Amplitude twin of category 4: same layout, doubled
            // contrast.
            5 => 2.0 * (TAU * (xf + yf) / 14.0).sin(),
            6 => (TAU * xf / 14.0).sin(),
            // Amplitude twin of category 6.
            7 => 2.0 * (TAU * xf / 14.0).sin(),
            8 => (TAU * (xf - yf) / 14.0).sin(),
            // Knee twin of category 8: the tone curve below is applied
            // on top of the same field.
            9 => (TAU * (xf - yf) / 14.0).sin(),
            _ => unreachable!("category {cat}"),
        }
    };
    let knee = cat == 9;
    GrayImage::from_fn(w, h, |x, y| {
        let swell = 1.0 + 0.25 * (TAU * x as f64 / 640.0).sin() * (TAU * y as f64 / 640.0).sin();
        let mut clean = 128.0 + 45.0 * swell * field(x, y);
        if knee && clean < 128.0 {
            clean = 128.0 - 0.35 * (128.0 - clean);
        }
        let noisy = clean + rng.random_range(-10.0..=10.0);
        if rng.random::<f64>() < 0.12 * x as f64 / 640.0 {
            if rng.random::<bool>() {
                255
            } else {
                0
            }
        } else {
            noisy.round().clamp(0.0, 255.0) as u8
        }
    })
}

/// Ten categories of 25 tiles each, cut from one procedural source per
/// category. Deterministic across runs.
pub fn texture_corpus() -> Vec<DatasetItem> {
    let mut items = Vec::new();
    for cat in 0..CATEGORY_COUNT {
        let category = format!("tex{cat:02}");
        let tiles = tile(&texture(cat), TILE_SIDE, TILE_SIDE).unwrap();
        assert_eq!(tiles.len(), TILES_PER_CATEGORY);
        for (k, image) in tiles.into_iter().enumerate() {
            items.push(DatasetItem {
                id: format!("{category}/src#{k}"),
                category: category.clone(),
                image,
            });
        }
    }
    items
}
