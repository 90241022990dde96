//! Heatmap rendering to binary portable pixmaps (P6): zero-dependency,
//! lossless, trivially diffable.

use std::io::Write;
use std::path::Path;

use crate::error::CliError;

/// Normalized score → RGB. The endpoint mapping is bit-exact:
/// −1 → (255,0,0), 0 → (255,255,255), +1 → (0,0,255), linear in between.
pub fn score_color(score: f64) -> [u8; 3] {
    let s = score.clamp(-1.0, 1.0);
    if s >= 0.0 {
        let fade = ((1.0 - s) * 255.0).round() as u8;
        [fade, fade, 255]
    } else {
        let fade = ((1.0 + s) * 255.0).round() as u8;
        [255, fade, fade]
    }
}

fn gray_color(value: f64) -> [u8; 3] {
    let g = (value.clamp(0.0, 1.0) * 255.0).round() as u8;
    [g, g, g]
}

/// Geometry for rendering a feature vector: square images render as a
/// side×side grid, anything else as a single row.
pub fn grid_shape(len: usize) -> (usize, usize) {
    let side = (len as f64).sqrt().round() as usize;
    if side * side == len {
        (side, side)
    } else {
        (len, 1)
    }
}

pub fn write_p6(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<(), CliError> {
    assert_eq!(rgb.len(), width * height * 3);
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    let header = format!("P6\n{width} {height}\n255\n");
    file.write_all(header.as_bytes())
        .and_then(|_| file.write_all(rgb))
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Side-by-side panel: the raw sample in grayscale, a one-pixel black
/// separator column, and the normalized attribution heatmap.
pub fn render_sample_with_heatmap(
    path: &Path,
    sample: &[f64],
    normalized_scores: &[f64],
) -> Result<(), CliError> {
    let (w, h) = grid_shape(normalized_scores.len());
    let width = 2 * w + 1;
    let mut rgb = vec![0u8; width * h * 3];
    for row in 0..h {
        for col in 0..w {
            let idx = row * w + col;
            let left = gray_color(sample.get(idx).copied().unwrap_or(0.0));
            let right = score_color(normalized_scores[idx]);
            let lpos = (row * width + col) * 3;
            rgb[lpos..lpos + 3].copy_from_slice(&left);
            let rpos = (row * width + w + 1 + col) * 3;
            rgb[rpos..rpos + 3].copy_from_slice(&right);
        }
    }
    write_p6(path, width, h, &rgb)
}
