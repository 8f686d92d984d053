//! IDX image/label files (the MNIST family container format).
//!
//! Layout: 4-byte big-endian magic, one big-endian `u32` per dimension, then
//! raw unsigned bytes. Images use magic `0x00000803` (count, rows, cols);
//! labels use `0x00000801` (count).

use std::path::Path;

use super::data::Dataset;
use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// `count * rows * cols` bytes, image-major.
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn count(&self) -> usize {
        self.pixels.len().checked_div(self.rows * self.cols).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxLabels {
    pub labels: Vec<u8>,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u32(&mut self, field: &'static str) -> Result<u32> {
        let chunk = self.take(4, field)?;
        Ok(u32::from_be_bytes(chunk.try_into().expect("4 bytes")))
    }

    fn take(&mut self, n: usize, field: &'static str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let out = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(Error::Format {
                field,
                detail: format!(
                    "truncated file: need {n} bytes at offset {}, have {}",
                    self.pos,
                    self.bytes.len() - self.pos
                ),
            }),
        }
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Format {
                field: "length",
                detail: format!("{} trailing bytes", self.bytes.len() - self.pos),
            });
        }
        Ok(())
    }
}

fn check_magic(found: u32, expected: u32) -> Result<()> {
    if found != expected {
        return Err(Error::Format {
            field: "magic",
            detail: format!("bad magic 0x{found:08x}, expected 0x{expected:08x}"),
        });
    }
    Ok(())
}

pub fn decode_images(bytes: &[u8]) -> Result<IdxImages> {
    let mut r = Reader { bytes, pos: 0 };
    check_magic(r.u32("magic")?, IMAGES_MAGIC)?;
    let count = r.u32("image count")? as usize;
    let rows = r.u32("rows")? as usize;
    let cols = r.u32("cols")? as usize;
    let total = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::Format {
            field: "dimensions",
            detail: "image dimensions overflow".into(),
        })?;
    let pixels = r.take(total, "pixel data")?.to_vec();
    r.finish()?;
    Ok(IdxImages { rows, cols, pixels })
}

pub fn decode_labels(bytes: &[u8]) -> Result<IdxLabels> {
    let mut r = Reader { bytes, pos: 0 };
    check_magic(r.u32("magic")?, LABELS_MAGIC)?;
    let count = r.u32("label count")? as usize;
    let labels = r.take(count, "label data")?.to_vec();
    r.finish()?;
    Ok(IdxLabels { labels })
}

pub fn encode_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [
        IMAGES_MAGIC,
        images.count() as u32,
        images.rows as u32,
        images.cols as u32,
    ] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_labels(labels: &IdxLabels) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.labels.len() as u32).to_be_bytes());
    out.extend_from_slice(&labels.labels);
    out
}

/// Pairs decoded images and labels into a [`Dataset`] with pixels in `[0, 1]`.
/// The class count is the largest label plus one (at least two).
pub fn dataset_from_idx(images: &IdxImages, labels: &IdxLabels) -> Result<Dataset> {
    if images.count() != labels.labels.len() {
        return Err(Error::Format {
            field: "count",
            detail: format!(
                "count mismatch: {} images but {} labels",
                images.count(),
                labels.labels.len()
            ),
        });
    }
    let width = images.rows * images.cols;
    let features = images.pixels.iter().map(|&b| b as f64 / 255.0).collect();
    let ys: Vec<usize> = labels.labels.iter().map(|&y| y as usize).collect();
    let classes = ys.iter().max().map_or(2, |&m| (m + 1).max(2));
    Dataset::new(features, ys, width, classes)
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let read = |p: &Path| std::fs::read(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())));
    let images = decode_images(&read(images_path)?)?;
    let labels = decode_labels(&read(labels_path)?)?;
    dataset_from_idx(&images, &labels)
}
