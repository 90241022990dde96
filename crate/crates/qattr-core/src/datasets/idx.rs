//! IDX file format (the MNIST/FashionMNIST distribution format):
//! big-endian headers, magic 0x00000803 for images and 0x00000801 for
//! labels.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt, WriteBytesExt};

use super::{DataError, LabeledSample};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_exact_or_truncated(reader: &mut impl Read, buf: &mut [u8]) -> Result<(), DataError> {
    reader.read_exact(buf).map_err(|_| DataError::Truncated)
}

fn read_u32(reader: &mut impl Read) -> Result<u32, DataError> {
    reader.read_u32::<BigEndian>().map_err(|_| DataError::Truncated)
}

/// Parse an IDX image file into raw byte images.
pub fn read_idx_images(path: &Path) -> Result<(Vec<Vec<u8>>, usize, usize), DataError> {
    let mut reader = BufReader::new(File::open(path)?);
    let magic = read_u32(&mut reader)?;
    if magic != IMAGES_MAGIC {
        return Err(DataError::BadMagic {
            expected: IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = read_u32(&mut reader)? as usize;
    let rows = read_u32(&mut reader)? as usize;
    let cols = read_u32(&mut reader)? as usize;
    let mut images = Vec::with_capacity(count);
    for _ in 0..count {
        let mut pixels = vec![0u8; rows * cols];
        read_exact_or_truncated(&mut reader, &mut pixels)?;
        images.push(pixels);
    }
    Ok((images, rows, cols))
}

/// Parse an IDX label file.
pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>, DataError> {
    let mut reader = BufReader::new(File::open(path)?);
    let magic = read_u32(&mut reader)?;
    if magic != LABELS_MAGIC {
        return Err(DataError::BadMagic {
            expected: LABELS_MAGIC,
            found: magic,
        });
    }
    let count = read_u32(&mut reader)? as usize;
    let mut labels = vec![0u8; count];
    read_exact_or_truncated(&mut reader, &mut labels)?;
    Ok(labels)
}

/// Load an IDX image/label pair into samples, pixels scaled to [0, 1] by
/// 1/255. Labels are left unmapped (0) until a task assigns ±1 sides.
pub fn load_idx_images(
    images_path: &Path,
    labels_path: &Path,
) -> Result<Vec<LabeledSample>, DataError> {
    let (images, _rows, _cols) = read_idx_images(images_path)?;
    let labels = read_idx_labels(labels_path)?;
    if images.len() != labels.len() {
        return Err(DataError::CountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    Ok(images
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(id, (bytes, label))| LabeledSample {
            id: id as u64,
            pixels: bytes.iter().map(|&b| b as f64 / 255.0).collect(),
            label: 0,
            source_class: label.to_string(),
        })
        .collect())
}

pub fn write_idx_images(
    path: &Path,
    images: &[Vec<u8>],
    rows: usize,
    cols: usize,
) -> Result<(), DataError> {
    let mut writer = BufWriter::new(File::create(path)?);
    writer.write_u32::<BigEndian>(IMAGES_MAGIC)?;
    writer.write_u32::<BigEndian>(images.len() as u32)?;
    writer.write_u32::<BigEndian>(rows as u32)?;
    writer.write_u32::<BigEndian>(cols as u32)?;
    for image in images {
        writer.write_all(image)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<(), DataError> {
    let mut writer = BufWriter::new(File::create(path)?);
    writer.write_u32::<BigEndian>(LABELS_MAGIC)?;
    writer.write_u32::<BigEndian>(labels.len() as u32)?;
    writer.write_all(labels)?;
    writer.flush()?;
    Ok(())
}
