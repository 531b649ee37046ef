use std::fs::File;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use ndarray::Array2;

use crate::{Error, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Idx(format!("header truncated at byte {at}")))
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let magic = be_u32(bytes, 0)?;
    if magic != expected {
        return Err(Error::Idx(format!("magic {magic:#010x}, expected {expected:#010x}")));
    }
    Ok(())
}

fn payload(bytes: &[u8], offset: usize, len: usize) -> Result<&[u8]> {
    let have = bytes.len().saturating_sub(offset);
    if have != len {
        return Err(Error::Idx(format!("payload has {have} bytes, expected {len}")));
    }
    Ok(&bytes[offset..])
}

/// Parses an IDX image file into a `(rows·cols) × count` matrix with pixel
/// values scaled to `[0, 1]`, one column per image.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Array2<f64>> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let pixels = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Idx(format!("{rows}x{cols} images overflow")))?;
    let total = pixels
        .checked_mul(count)
        .ok_or_else(|| Error::Idx(format!("{count} images of {pixels} pixels overflow")))?;
    let data = payload(bytes, 16, total)?;
    Ok(Array2::from_shape_fn((pixels, count), |(p, i)| {
        f64::from(data[i * pixels + p]) / 255.0
    }))
}

/// Parses an IDX label file; every label must be a digit.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let data = payload(bytes, 8, count)?;
    if let Some(i) = data.iter().position(|&l| l > 9) {
        return Err(Error::Idx(format!("label {} at index {i} is not a digit", data[i])));
    }
    Ok(data.to_vec())
}

/// Reads a file, inflating it first if it starts with the gzip magic.
pub fn read_idx_file(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    File::open(path.as_ref())?.read_to_end(&mut raw)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        return Ok(out);
    }
    Ok(raw)
}

/// Serialises a `pixels × count` matrix of values in `[0, 1]` as an IDX
/// image file with the given image shape.
pub fn encode_idx_images(images: &Array2<f64>, rows: usize, cols: usize) -> Result<Vec<u8>> {
    if rows * cols != images.nrows() {
        return Err(Error::Shape(format!(
            "{rows}x{cols} images but {} pixels per column",
            images.nrows()
        )));
    }
    let mut out = Vec::with_capacity(16 + images.len());
    for v in [IMAGE_MAGIC, images.ncols() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for col in images.columns() {
        out.extend(col.iter().map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
    }
    Ok(out)
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Images as columns with their digit labels.
#[derive(Debug, Clone)]
pub struct ImageSet {
    pub images: Array2<f64>,
    pub labels: Vec<u8>,
}

impl ImageSet {
    pub fn new(images: Array2<f64>, labels: Vec<u8>) -> Result<Self> {
        if images.ncols() != labels.len() {
            return Err(Error::Shape(format!(
                "{} images but {} labels",
                images.ncols(),
                labels.len()
            )));
        }
        if labels.iter().any(|&l| l > 9) {
            return Err(Error::InvalidArgument("labels must be digits".into()));
        }
        Ok(Self { images, labels })
    }

    pub fn from_idx(image_bytes: &[u8], label_bytes: &[u8]) -> Result<Self> {
        Self::new(parse_idx_images(image_bytes)?, parse_idx_labels(label_bytes)?)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Keeps the first `n` images.
    pub fn truncate(&mut self, n: usize) {
        if n < self.len() {
            self.images = self.images.slice(ndarray::s![.., ..n]).to_owned();
            self.labels.truncate(n);
        }
    }

    /// `10 × n` one-hot label matrix.
    pub fn onehot(&self) -> Array2<f64> {
        let mut m = Array2::zeros((10, self.len()));
        for (i, &l) in self.labels.iter().enumerate() {
            m[[l as usize, i]] = 1.0;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image_bytes(count: u32, rows: u32, cols: u32, payload: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        for v in [IMAGE_MAGIC, count, rows, cols] {
            b.extend_from_slice(&v.to_be_bytes());
        }
        b.extend_from_slice(payload);
        b
    }

    #[test]
    fn two_mnist_images() {
        let payload: Vec<u8> = (0..1568).map(|i| (i % 256) as u8).collect();
        let m = parse_idx_images(&image_bytes(2, 28, 28, &payload)).unwrap();
        assert_eq!(m.dim(), (784, 2));
        assert_eq!(m[[5, 0]], 5.0 / 255.0);
        assert_eq!(m[[0, 1]], f64::from((784 % 256) as u8) / 255.0);
    }

    #[test]
    fn zero_payload() {
        let m = parse_idx_images(&image_bytes(3, 2, 2, &[0; 12])).unwrap();
        assert!(m.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn malformed_images() {
        assert!(matches!(parse_idx_images(&image_bytes(2, 28, 28, &[0; 1567])), Err(Error::Idx(_))));
        assert!(parse_idx_images(&image_bytes(1, 2, 2, &[0; 5])).is_err());
        let mut bad = image_bytes(1, 1, 1, &[0]);
        bad[3] = 0x01;
        assert!(parse_idx_images(&bad).is_err());
        assert!(parse_idx_images(&bad[..6]).is_err());
        let huge = image_bytes(u32::MAX, u32::MAX, u32::MAX, &[]);
        assert!(parse_idx_images(&huge).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(parse_idx_labels(&encode_idx_labels(&[7, 0, 9])).unwrap(), vec![7, 0, 9]);
        assert!(parse_idx_labels(&encode_idx_labels(&[12])).is_err());
        assert!(parse_idx_labels(&encode_idx_labels(&[])).unwrap().is_empty());
        let mut short = encode_idx_labels(&[1, 2]);
        short.pop();
        assert!(parse_idx_labels(&short).is_err());
    }

    #[test]
    fn onehot_columns() {
        let set = ImageSet::new(Array2::zeros((4, 3)), vec![2, 0, 9]).unwrap();
        let h = set.onehot();
        assert_eq!(h.dim(), (10, 3));
        assert_eq!(h[[2, 0]], 1.0);
        assert_eq!(h[[9, 2]], 1.0);
        assert_eq!(h.sum(), 3.0);
    }
}
