//! Big-endian IDX containers as used by MNIST and Fashion-MNIST.
//!
//! Images: magic `0x00000803`, then `u32` count, rows and columns, then one
//! unsigned byte per pixel in row-major order. Labels: magic `0x00000801`,
//! then `u32` count and one byte per label. File lengths must match the
//! header exactly.

use std::fs;
use std::path::Path;

use byteorder::{BigEndian, ByteOrder};

use super::RawDataset;
use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

fn header(bytes: &[u8], words: usize, what: &str) -> Result<Vec<u32>> {
    if bytes.len() < 4 * words {
        return Err(Error::Truncated(format!("{what} header")));
    }
    Ok((0..words).map(|i| BigEndian::read_u32(&bytes[4 * i..])).collect())
}

fn check_length(actual: usize, expected: usize, what: &str) -> Result<()> {
    if actual < expected {
        return Err(Error::Truncated(format!("{what}: {actual} bytes, header implies {expected}")));
    }
    if actual > expected {
        return Err(Error::Corrupt(format!("{what}: {} trailing bytes", actual - expected)));
    }
    Ok(())
}

/// Parses in-memory image and label files.
pub fn parse_idx(name: &str, images: &[u8], labels: &[u8]) -> Result<RawDataset> {
    let h = header(images, 4, "image file")?;
    if h[0] != IMAGES_MAGIC {
        return Err(Error::BadMagic { expected: IMAGES_MAGIC, found: h[0] });
    }
    let (count, rows, cols) = (h[1] as usize, h[2] as usize, h[3] as usize);
    if rows == 0 || cols == 0 {
        return Err(Error::Corrupt(format!("image shape {rows}×{cols}")));
    }
    let pixels_per_image = rows * cols;
    check_length(images.len(), 16 + count * pixels_per_image, "image file")?;

    let l = header(labels, 2, "label file")?;
    if l[0] != LABELS_MAGIC {
        return Err(Error::BadMagic { expected: LABELS_MAGIC, found: l[0] });
    }
    let label_count = l[1] as usize;
    check_length(labels.len(), 8 + label_count, "label file")?;
    if label_count != count {
        return Err(Error::CountMismatch { images: count, labels: label_count });
    }

    let images = images[16..]
        .chunks_exact(pixels_per_image)
        .map(|chunk| chunk.iter().map(|&p| f64::from(p)).collect())
        .collect();
    let labels = labels[8..].iter().map(|&l| l as usize).collect();
    Ok(RawDataset { name: name.to_string(), height: rows, width: cols, channels: 1, images, labels })
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<RawDataset> {
    let images_path = images_path.as_ref();
    let name = images_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    parse_idx(&name, &fs::read(images_path)?, &fs::read(labels_path)?)
}
