//! Deterministic synthetic stand-in corpora in the IDX layout.
//!
//! Real MNIST/FashionMNIST archives are user-supplied; these generators
//! produce seeded 28×28 glyph images with jitter, brightness variation,
//! blur and noise so the full ingest → downscale → train → attribute
//! pipeline runs hermetically when no archive is available.

use std::path::{Path, PathBuf};

use rand::Rng;

use super::{write_idx_images, write_idx_labels, DataError};
use crate::rng::{derive_seed, seeded_rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    Digits,
    Fashion,
}

const DIGIT_GLYPHS: [[&str; 8]; 10] = [
    [
        "..####..", ".#....#.", ".#....#.", ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        "..####..",
    ],
    [
        "...##...", "..###...", "...##...", "...##...", "...##...", "...##...", "...##...",
        "..####..",
    ],
    [
        "..####..", ".#....#.", "......#.", ".....#..", "....#...", "...#....", "..#.....",
        ".######.",
    ],
    [
        "..####..", ".#....#.", "......#.", "...###..", "......#.", "......#.", ".#....#.",
        "..####..",
    ],
    [
        "....##..", "...#.#..", "..#..#..", ".#...#..", ".######.", ".....#..", ".....#..",
        ".....#..",
    ],
    [
        ".######.", ".#......", ".#......", ".#####..", "......#.", "......#.", ".#....#.",
        "..####..",
    ],
    [
        "..####..", ".#......", ".#......", ".#####..", ".#....#.", ".#....#.", ".#....#.",
        "..####..",
    ],
    [
        ".######.", "......#.", ".....#..", ".....#..", "....#...", "....#...", "...#....",
        "...#....",
    ],
    [
        "..####..", ".#....#.", ".#....#.", "..####..", ".#....#.", ".#....#.", ".#....#.",
        "..####..",
    ],
    [
        "..####..", ".#....#.", ".#....#.", "..#####.", "......#.", "......#.", "......#.",
        "..####..",
    ],
];

const FASHION_GLYPHS: [[&str; 8]; 10] = [
    // tshirt
    [
        ".##..##.", "########", "########", "..####..", "..####..", "..####..", "..####..",
        "..####..",
    ],
    // trouser
    [
        ".######.", ".######.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.",
        ".##..##.",
    ],
    // pullover
    [
        "##....##", "########", "########", ".######.", ".######.", ".######.", ".######.",
        ".######.",
    ],
    // dress
    [
        "...##...", "..####..", "..####..", "..####..", ".######.", ".######.", "########",
        "########",
    ],
    // coat
    [
        "##....##", "########", "##.##.##", "##.##.##", "##.##.##", "##.##.##", "##.##.##",
        "########",
    ],
    // sandal
    [
        "........", "......##", "....##..", "..##..#.", ".#..##..", "#..#....", ".##.....",
        "##......",
    ],
    // shirt
    [
        ".##..##.", "########", "##.##.##", "..####..", "..#..#..", "..####..", "..#..#..",
        "..####..",
    ],
    // sneaker
    [
        "........", "........", ".....###", "....##.#", ".###...#", "#...#..#", "#.......",
        "########",
    ],
    // bag
    [
        "..####..", ".#....#.", ".#....#.", "########", "##....##", "##....##", "##....##",
        "########",
    ],
    // boot
    [
        "..###...", "..###...", "..###...", "..###...", "..#####.", "..######", ".#######",
        "########",
    ],
];

/// Render one 28×28 image of the glyph: 3× upscale with jittered placement,
/// per-image brightness, a box blur and mild pixel noise.
fn render_glyph(glyph: &[&str; 8], rng: &mut impl Rng) -> Vec<u8> {
    const SIDE: usize = 28;
    let dx = rng.random_range(-2i32..=2);
    let dy = rng.random_range(-2i32..=2);
    let brightness = 0.75 + 0.25 * rng.random::<f64>();
    let mut canvas = vec![0.0f64; SIDE * SIDE];
    for (gr, row) in glyph.iter().enumerate() {
        for (gc, cell) in row.bytes().enumerate() {
            if cell != b'#' {
                continue;
            }
            for sub_r in 0..3 {
                for sub_c in 0..3 {
                    let r = 2 + 3 * gr as i32 + sub_r + dy;
                    let c = 2 + 3 * gc as i32 + sub_c + dx;
                    if (0..SIDE as i32).contains(&r) && (0..SIDE as i32).contains(&c) {
                        canvas[r as usize * SIDE + c as usize] = brightness;
                    }
                }
            }
        }
    }
    // 3×3 box blur for soft edges like scanned handwriting.
    let mut blurred = vec![0.0f64; SIDE * SIDE];
    for r in 0..SIDE as i32 {
        for c in 0..SIDE as i32 {
            let mut acc = 0.0;
            let mut count = 0.0;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (rr, cc) = (r + dr, c + dc);
                    if (0..SIDE as i32).contains(&rr) && (0..SIDE as i32).contains(&cc) {
                        acc += canvas[rr as usize * SIDE + cc as usize];
                        count += 1.0;
                    }
                }
            }
            blurred[(r * SIDE as i32 + c) as usize] = acc / count;
        }
    }
    blurred
        .iter()
        .map(|&v| {
            let noisy = v + 0.04 * (rng.random::<f64>() - 0.5);
            (noisy.clamp(0.0, 1.0) * 255.0).round() as u8
        })
        .collect()
}

/// Generate `per_class` 28×28 images for each of the ten classes.
/// Deterministic: sample `i` of class `c` depends only on `(seed, c, i)`.
pub fn synthetic_images(kind: SynthKind, per_class: usize, seed: u64) -> Vec<(Vec<u8>, u8)> {
    let glyphs = match kind {
        SynthKind::Digits => &DIGIT_GLYPHS,
        SynthKind::Fashion => &FASHION_GLYPHS,
    };
    let mut out = Vec::with_capacity(10 * per_class);
    for (class, glyph) in glyphs.iter().enumerate() {
        for i in 0..per_class {
            let mut rng = seeded_rng(derive_seed(seed, &[class as u64, i as u64]));
            out.push((render_glyph(glyph, &mut rng), class as u8));
        }
    }
    out
}

/// Write a synthetic corpus as an IDX image/label pair; returns the paths.
pub fn write_synthetic_idx(
    dir: &Path,
    kind: SynthKind,
    per_class: usize,
    seed: u64,
) -> Result<(PathBuf, PathBuf), DataError> {
    let stem = match kind {
        SynthKind::Digits => "synthetic-digits",
        SynthKind::Fashion => "synthetic-fashion",
    };
    let images_path = dir.join(format!("{stem}-images-idx3-ubyte"));
    let labels_path = dir.join(format!("{stem}-labels-idx1-ubyte"));
    let data = synthetic_images(kind, per_class, seed);
    let images: Vec<Vec<u8>> = data.iter().map(|(img, _)| img.clone()).collect();
    let labels: Vec<u8> = data.iter().map(|(_, label)| *label).collect();
    write_idx_images(&images_path, &images, 28, 28)?;
    write_idx_labels(&labels_path, &labels)?;
    Ok((images_path, labels_path))
}
