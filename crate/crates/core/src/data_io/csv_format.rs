//! Headerless CSV export format: each row holds an integer class label
//! followed by `height·width·channels` pixel values in channel-last,
//! row-major order.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::RawDataset;
use crate::error::{Error, Result};

/// Largest accepted class label.
const MAX_LABEL: usize = u16::MAX as usize;

pub(crate) fn parse_csv<R: Read>(
    name: &str,
    reader: R,
    height: usize,
    width: usize,
    channels: usize,
) -> Result<RawDataset> {
    let n_pixels = height * width * channels;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        // tolerate one trailing comma
        let fields: Vec<&str> = match record.iter().last() {
            Some("") => record.iter().take(record.len() - 1).collect(),
            _ => record.iter().collect(),
        };
        if fields.len() != n_pixels + 1 {
            return Err(Error::RaggedRow { row, expected: n_pixels + 1, found: fields.len() });
        }
        let label = fields[0]
            .parse::<usize>()
            .ok()
            .filter(|&l| l <= MAX_LABEL)
            .ok_or_else(|| Error::BadLabel { row, label: fields[0].to_string() })?;
        let pixels = fields[1..]
            .iter()
            .enumerate()
            .map(|(i, text)| {
                text.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::NonNumeric { row, field: i + 1, text: text.to_string() })
            })
            .collect::<Result<Vec<f64>>>()?;
        images.push(pixels);
        labels.push(label);
    }
    Ok(RawDataset { name: name.to_string(), height, width, channels, images, labels })
}

pub fn load_csv(path: impl AsRef<Path>, height: usize, width: usize, channels: usize) -> Result<RawDataset> {
    let path = path.as_ref();
    let name = path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    parse_csv(&name, File::open(path)?, height, width, channels)
}
