//! Dataset generation, ingestion, preprocessing and deterministic
//! train/test splitting for the binary classification tasks.

mod idx;
pub mod synth;

pub use idx::{load_idx_images, write_idx_images, write_idx_labels};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{derive_seed, seeded_rng};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("bars-and-stripes needs side >= 2, got {0}")]
    SideTooSmall(usize),
    #[error("expected a {expected}-pixel image, got {actual}")]
    WrongShape { expected: usize, actual: usize },
    #[error("bad IDX magic: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("IDX file is truncated")]
    Truncated,
    #[error("image file has {images} items but label file has {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("no samples found for class {0:?}")]
    EmptyClass(String),
    #[error("unknown class name {0:?}")]
    UnknownClass(String),
    #[error("train fraction {0} outside (0, 1)")]
    BadTrainFraction(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One image with its task label. `label` is ±1 once a class map has been
/// applied; loaders emit 0 until [`make_task`] assigns sides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub id: u64,
    pub pixels: Vec<f64>,
    pub label: i8,
    pub source_class: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetName {
    BarsAndStripes,
    Nist8x8,
    Mnist,
    FashionMnist,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: DatasetName,
    pub class_pair: (String, String),
    pub image_side: usize,
    pub split: SplitSpec,
    pub subsample_per_class: Option<usize>,
}

/// A binary classification task: disjoint train/test splits with ±1 labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Task {
    pub spec: DatasetSpec,
    pub train: Vec<LabeledSample>,
    pub test: Vec<LabeledSample>,
}

/// On-disk sample collection (the internal JSON sample format).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplesFile {
    pub name: String,
    pub image_side: usize,
    pub samples: Vec<LabeledSample>,
}

/// All bars-and-stripes images of the given side: one "bars" image per
/// nonempty proper subset of columns (selected columns all on), one
/// "stripes" image per row subset. The ambiguous all-on/all-off patterns
/// belong to both classes and are excluded. Bars are labeled +1.
pub fn generate_bars_and_stripes(side: usize) -> Result<Vec<LabeledSample>, DataError> {
    if side < 2 {
        return Err(DataError::SideTooSmall(side));
    }
    let mut samples = Vec::new();
    let mut id = 0u64;
    for mask in 1..((1u32 << side) - 1) {
        let mut bars = vec![0.0; side * side];
        let mut stripes = vec![0.0; side * side];
        for r in 0..side {
            for c in 0..side {
                if mask & (1 << c) != 0 {
                    bars[r * side + c] = 1.0;
                }
                if mask & (1 << r) != 0 {
                    stripes[r * side + c] = 1.0;
                }
            }
        }
        samples.push(LabeledSample {
            id,
            pixels: bars,
            label: 1,
            source_class: "bars".into(),
        });
        samples.push(LabeledSample {
            id: id + 1,
            pixels: stripes,
            label: -1,
            source_class: "stripes".into(),
        });
        id += 2;
    }
    Ok(samples)
}

/// Draw `count` bars-and-stripes instances i.i.d. (with repetition) from
/// the pattern universe of the given side. This matches the sampled-dataset
/// protocol of the benchmark corpus: a held-out split then shares patterns
/// with training, unlike a split of the deduplicated pattern list.
pub fn sample_bars_and_stripes(
    side: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<LabeledSample>, DataError> {
    let patterns = generate_bars_and_stripes(side)?;
    let mut rng = seeded_rng(seed);
    Ok((0..count)
        .map(|id| {
            let pick = rng.random_range(0..patterns.len());
            LabeledSample {
                id: id as u64,
                ..patterns[pick].clone()
            }
        })
        .collect())
}

/// Block-mean pooling of a 28×28 image onto an 8×8 grid with area-weighted
/// bins (28 is not divisible by 8), rescaled to [0, 1] by the maximum.
pub fn downscale_to_8x8(pixels: &[f64]) -> Result<Vec<f64>, DataError> {
    const IN: usize = 28;
    const OUT: usize = 8;
    if pixels.len() != IN * IN {
        return Err(DataError::WrongShape {
            expected: IN * IN,
            actual: pixels.len(),
        });
    }
    let ratio = IN as f64 / OUT as f64; // 3.5
    let overlap = |lo: f64, hi: f64, cell: usize| -> f64 {
        let a = lo.max(cell as f64);
        let b = hi.min(cell as f64 + 1.0);
        (b - a).max(0.0)
    };
    let mut out = vec![0.0; OUT * OUT];
    for br in 0..OUT {
        let (rlo, rhi) = (br as f64 * ratio, (br + 1) as f64 * ratio);
        for bc in 0..OUT {
            let (clo, chi) = (bc as f64 * ratio, (bc + 1) as f64 * ratio);
            let mut acc = 0.0;
            for r in rlo.floor() as usize..(rhi.ceil() as usize).min(IN) {
                let wr = overlap(rlo, rhi, r);
                if wr == 0.0 {
                    continue;
                }
                for c in clo.floor() as usize..(chi.ceil() as usize).min(IN) {
                    let wc = overlap(clo, chi, c);
                    if wc > 0.0 {
                        acc += wr * wc * pixels[r * IN + c];
                    }
                }
            }
            out[br * OUT + bc] = acc / (ratio * ratio);
        }
    }
    let max = out.iter().cloned().fold(0.0f64, f64::max);
    if max > 0.0 {
        for v in &mut out {
            *v /= max;
        }
    }
    Ok(out)
}

/// Row means followed by column means: the 2·side feature map used for
/// angle-encoded bars-and-stripes models.
pub fn row_col_mean_features(pixels: &[f64], side: usize) -> Result<Vec<f64>, DataError> {
    if pixels.len() != side * side {
        return Err(DataError::WrongShape {
            expected: side * side,
            actual: pixels.len(),
        });
    }
    let mut features = Vec::with_capacity(2 * side);
    for r in 0..side {
        features.push(pixels[r * side..(r + 1) * side].iter().sum::<f64>() / side as f64);
    }
    for c in 0..side {
        features.push((0..side).map(|r| pixels[r * side + c]).sum::<f64>() / side as f64);
    }
    Ok(features)
}

/// Pixels ranked by absolute class-mean difference over ±1-labeled samples,
/// most discriminative first. The leading 10% are the task's "key feature"
/// pixels used by trained-vs-null concentration comparisons.
pub fn class_contrast_ranking(samples: &[LabeledSample]) -> Result<Vec<usize>, DataError> {
    let dim = samples.first().map(|s| s.pixels.len()).unwrap_or(0);
    if dim == 0 {
        return Err(DataError::EmptyClass("(no samples)".into()));
    }
    let mut mean_pos = vec![0.0; dim];
    let mut mean_neg = vec![0.0; dim];
    let (mut n_pos, mut n_neg) = (0.0f64, 0.0f64);
    for sample in samples {
        let (mean, count) = if sample.label >= 0 {
            (&mut mean_pos, &mut n_pos)
        } else {
            (&mut mean_neg, &mut n_neg)
        };
        for (m, p) in mean.iter_mut().zip(&sample.pixels) {
            *m += p;
        }
        *count += 1.0;
    }
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(DataError::EmptyClass("(one-sided batch)".into()));
    }
    let contrast: Vec<f64> = mean_pos
        .iter()
        .zip(&mean_neg)
        .map(|(p, n)| (p / n_pos - n / n_neg).abs())
        .collect();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        contrast[b]
            .partial_cmp(&contrast[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(order)
}

/// Canonical FashionMNIST class order; class-pair entries may use these
/// names instead of label digits.
const FASHION_CLASSES: [&str; 10] = [
    "tshirt", "trouser", "pullover", "dress", "coat", "sandal", "shirt", "sneaker", "bag",
    "boot",
];

fn resolve_class(name: DatasetName, class: &str) -> Result<String, DataError> {
    match name {
        DatasetName::BarsAndStripes => match class {
            "bars" | "stripes" => Ok(class.to_string()),
            _ => Err(DataError::UnknownClass(class.to_string())),
        },
        DatasetName::Nist8x8 | DatasetName::Mnist => {
            if class.len() == 1 && class.chars().all(|c| c.is_ascii_digit()) {
                Ok(class.to_string())
            } else {
                Err(DataError::UnknownClass(class.to_string()))
            }
        }
        DatasetName::FashionMnist => {
            if class.len() == 1 && class.chars().all(|c| c.is_ascii_digit()) {
                return Ok(class.to_string());
            }
            let wanted = class.to_ascii_lowercase().replace(['-', '_', ' ', '/'], "");
            FASHION_CLASSES
                .iter()
                .position(|c| {
                    *c == wanted
                        || (wanted == "tshirttop" && *c == "tshirt")
                        || (wanted == "ankleboot" && *c == "boot")
                })
                .map(|i| i.to_string())
                .ok_or_else(|| DataError::UnknownClass(class.to_string()))
        }
    }
}

/// Filter to the configured class pair, map labels (first class → −1,
/// second → +1), and split deterministically. The split is stratified per
/// class; the optional per-class cap is applied to both sides.
pub fn make_task(spec: &DatasetSpec, samples: &[LabeledSample]) -> Result<Task, DataError> {
    if !(spec.split.train_fraction > 0.0 && spec.split.train_fraction < 1.0) {
        return Err(DataError::BadTrainFraction(spec.split.train_fraction));
    }
    let negative = resolve_class(spec.name, &spec.class_pair.0)?;
    let positive = resolve_class(spec.name, &spec.class_pair.1)?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class_tag, class, label) in [(0u64, &negative, -1i8), (1u64, &positive, 1i8)] {
        let mut members: Vec<LabeledSample> = samples
            .iter()
            .filter(|s| s.source_class == *class)
            .map(|s| LabeledSample {
                label,
                ..s.clone()
            })
            .collect();
        if members.is_empty() {
            return Err(DataError::EmptyClass(class.clone()));
        }
        let mut rng = seeded_rng(derive_seed(spec.split.seed, &[class_tag]));
        members.shuffle(&mut rng);
        let n_train = ((members.len() as f64 * spec.split.train_fraction).round() as usize)
            .clamp(1, members.len() - 1);
        let mut class_test = members.split_off(n_train);
        if let Some(cap) = spec.subsample_per_class {
            members.truncate(cap);
            class_test.truncate(cap);
        }
        train.extend(members);
        test.extend(class_test);
    }
    // Interleave classes in a seeded order.
    train.shuffle(&mut seeded_rng(derive_seed(spec.split.seed, &[2])));
    test.shuffle(&mut seeded_rng(derive_seed(spec.split.seed, &[3])));
    Ok(Task {
        spec: spec.clone(),
        train,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bars_and_stripes_counts() {
        assert_eq!(generate_bars_and_stripes(2).unwrap().len(), 4);
        assert_eq!(generate_bars_and_stripes(4).unwrap().len(), 28);
        assert!(matches!(
            generate_bars_and_stripes(1),
            Err(DataError::SideTooSmall(1))
        ));
    }

    #[test]
    fn bars_transpose_to_stripes() {
        let side = 3;
        let samples = generate_bars_and_stripes(side).unwrap();
        let stripes: Vec<&LabeledSample> = samples
            .iter()
            .filter(|s| s.source_class == "stripes")
            .collect();
        for bars in samples.iter().filter(|s| s.source_class == "bars") {
            let mut transposed = vec![0.0; side * side];
            for r in 0..side {
                for c in 0..side {
                    transposed[c * side + r] = bars.pixels[r * side + c];
                }
            }
            assert!(
                stripes.iter().any(|s| s.pixels == transposed),
                "missing transpose"
            );
        }
        let bars_count = samples.iter().filter(|s| s.label == 1).count();
        assert_eq!(bars_count * 2, samples.len());
    }

    #[test]
    fn all_pixels_in_unit_interval() {
        for s in generate_bars_and_stripes(4).unwrap() {
            assert!(s.pixels.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }

    #[test]
    fn downscale_constant_image_rescales_to_one() {
        let constant = vec![0.4; 784];
        let out = downscale_to_8x8(&constant).unwrap();
        for &v in &out {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let blank = vec![0.0; 784];
        assert_eq!(downscale_to_8x8(&blank).unwrap(), vec![0.0; 64]);
        assert!(downscale_to_8x8(&[0.0; 100]).is_err());
    }

    #[test]
    fn downscale_matches_supersampling_oracle() {
        // Oracle: upsample 28×28 to 56×56 (2×2 blocks), then exact 7×7
        // block means; lcm(28, 8) = 56 makes the area weighting exact.
        let mut image = vec![0.0; 784];
        for r in 0..28 {
            for c in 0..28 {
                image[r * 28 + c] = if (r + c) % 2 == 0 { 1.0 } else { 0.0 };
            }
        }
        let mut fine = vec![0.0; 56 * 56];
        for r in 0..56 {
            for c in 0..56 {
                fine[r * 56 + c] = image[(r / 2) * 28 + c / 2];
            }
        }
        let mut expected = vec![0.0; 64];
        for br in 0..8 {
            for bc in 0..8 {
                let mut acc = 0.0;
                for r in 0..7 {
                    for c in 0..7 {
                        acc += fine[(br * 7 + r) * 56 + bc * 7 + c];
                    }
                }
                expected[br * 8 + bc] = acc / 49.0;
            }
        }
        let max = expected.iter().cloned().fold(0.0f64, f64::max);
        for v in &mut expected {
            *v /= max;
        }
        let got = downscale_to_8x8(&image).unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-12, "{g} vs {e}");
        }
        // Interior checkerboard bins hover near the 0.5 mean.
        assert!((got[3 * 8 + 3] - expected[3 * 8 + 3]).abs() < 1e-12);
    }

    #[test]
    fn row_col_means_separate_bars_from_stripes() {
        let samples = generate_bars_and_stripes(4).unwrap();
        for s in &samples {
            let f = row_col_mean_features(&s.pixels, 4).unwrap();
            assert_eq!(f.len(), 8);
            if s.source_class == "bars" {
                // Rows all equal; columns are 0/1 indicators.
                assert!(f[..4].windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12));
                assert!(f[4..].iter().all(|&v| v == 0.0 || v == 1.0));
            }
        }
    }

    fn toy_samples(per_class: usize) -> Vec<LabeledSample> {
        let mut samples = Vec::new();
        for i in 0..per_class {
            samples.push(LabeledSample {
                id: i as u64,
                pixels: vec![0.0, 1.0],
                label: 0,
                source_class: "0".into(),
            });
            samples.push(LabeledSample {
                id: (per_class + i) as u64,
                pixels: vec![1.0, 0.0],
                label: 0,
                source_class: "1".into(),
            });
        }
        samples
    }

    fn toy_spec() -> DatasetSpec {
        DatasetSpec {
            name: DatasetName::Nist8x8,
            class_pair: ("0".into(), "1".into()),
            image_side: 8,
            split: SplitSpec {
                train_fraction: 0.8,
                seed: 5,
            },
            subsample_per_class: None,
        }
    }

    #[test]
    fn split_is_a_stable_partition() {
        let samples = toy_samples(50);
        let spec = toy_spec();
        let a = make_task(&spec, &samples).unwrap();
        let b = make_task(&spec, &samples).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        assert_eq!(a.train.len(), 80);
        assert_eq!(a.test.len(), 20);
        let mut ids: Vec<u64> = a.train.iter().chain(&a.test).map(|s| s.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 100);
    }

    #[test]
    fn label_map_assigns_minus_one_to_first_class() {
        let samples = toy_samples(10);
        let mut spec = toy_spec();
        spec.class_pair = ("0".into(), "1".into());
        let task = make_task(&spec, &samples).unwrap();
        for s in task.train.iter().chain(&task.test) {
            let expected = if s.source_class == "0" { -1 } else { 1 };
            assert_eq!(s.label, expected);
        }
    }

    #[test]
    fn subsample_caps_each_class() {
        let samples = toy_samples(100);
        let mut spec = toy_spec();
        spec.subsample_per_class = Some(50);
        let task = make_task(&spec, &samples).unwrap();
        assert!(task.train.len() <= 100);
        for class in ["0", "1"] {
            assert!(task.train.iter().filter(|s| s.source_class == class).count() <= 50);
        }
    }

    #[test]
    fn missing_class_is_an_error() {
        let samples = toy_samples(5);
        let mut spec = toy_spec();
        spec.class_pair = ("0".into(), "7".into());
        assert!(matches!(
            make_task(&spec, &samples),
            Err(DataError::EmptyClass(_))
        ));
    }

    #[test]
    fn fashion_class_names_resolve() {
        assert_eq!(
            resolve_class(DatasetName::FashionMnist, "dress").unwrap(),
            "3"
        );
        assert_eq!(
            resolve_class(DatasetName::FashionMnist, "Ankle boot").unwrap(),
            "9"
        );
        assert!(resolve_class(DatasetName::FashionMnist, "cape").is_err());
    }
}
