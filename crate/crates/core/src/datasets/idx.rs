use std::path::Path;

use super::LabelledDataset;
use crate::autoencoder::DataKind;
use crate::error::{AresError, Result};
use crate::math::DenseMatrix;

pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABEL_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| AresError::Data(format!("{what}: truncated header")))
}

/// Reads an IDX image file and its label file. Pixels are flattened row-major
/// and scaled to `[0, 1]`.
pub fn load_idx_images(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<LabelledDataset> {
    let images = std::fs::read(images_path.as_ref())?;
    let labels = std::fs::read(labels_path.as_ref())?;
    parse_idx(&images, &labels)
}

pub(crate) fn parse_idx(images: &[u8], labels: &[u8]) -> Result<LabelledDataset> {
    let magic = be_u32(images, 0, "images")?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(AresError::Data(format!(
            "images: magic {magic:#010x}, expected {IDX_IMAGE_MAGIC:#010x}"
        )));
    }
    let count = be_u32(images, 4, "images")? as usize;
    let rows = be_u32(images, 8, "images")? as usize;
    let cols = be_u32(images, 12, "images")? as usize;
    let pixels = rows * cols;
    let payload = &images[16..];
    if payload.len() != count * pixels {
        return Err(AresError::Data(format!(
            "images: header declares {count} images of {rows}x{cols} ({} bytes) but payload has {} bytes",
            count * pixels,
            payload.len()
        )));
    }

    let lmagic = be_u32(labels, 0, "labels")?;
    if lmagic != IDX_LABEL_MAGIC {
        return Err(AresError::Data(format!(
            "labels: magic {lmagic:#010x}, expected {IDX_LABEL_MAGIC:#010x}"
        )));
    }
    let lcount = be_u32(labels, 4, "labels")? as usize;
    let lpayload = &labels[8..];
    if lpayload.len() != lcount {
        return Err(AresError::Data(format!(
            "labels: header declares {lcount} labels but payload has {} bytes",
            lpayload.len()
        )));
    }
    if lcount != count {
        return Err(AresError::Data(format!(
            "{count} images but {lcount} labels"
        )));
    }

    let data = payload.iter().map(|&b| f64::from(b) / 255.0).collect();
    let features = DenseMatrix::new(count, pixels, data)?;
    let class_ids = lpayload.iter().map(|&b| u32::from(b)).collect();
    LabelledDataset::new(features, class_ids, DataKind::Image)
}

/// Writes 8-bit images in IDX format (`images` holds `count * rows * cols` bytes).
pub fn write_idx_images(path: impl AsRef<Path>, rows: usize, cols: usize, images: &[u8]) -> Result<()> {
    let pixels = rows * cols;
    if pixels == 0 || !images.len().is_multiple_of(pixels) {
        return Err(AresError::InvalidArgument("image bytes are not a whole number of images".into()));
    }
    let mut out = Vec::with_capacity(16 + images.len());
    out.extend_from_slice(&IDX_IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&((images.len() / pixels) as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    out.extend_from_slice(images);
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(magic: u32, dims: &[u32]) -> Vec<u8> {
        let mut v = magic.to_be_bytes().to_vec();
        for d in dims {
            v.extend_from_slice(&d.to_be_bytes());
        }
        v
    }

    #[test]
    fn white_image_is_all_ones() {
        let mut img = header(IDX_IMAGE_MAGIC, &[1, 28, 28]);
        img.extend(std::iter::repeat_n(255u8, 784));
        let mut lab = header(IDX_LABEL_MAGIC, &[1]);
        lab.push(7);
        let ds = parse_idx(&img, &lab).unwrap();
        assert_eq!(ds.dim(), 784);
        assert!(ds.features.data().iter().all(|&v| v == 1.0));
        assert_eq!(ds.class_ids, vec![7]);
        assert_eq!(ds.kind, DataKind::Image);
    }

    #[test]
    fn declared_count_must_match_payload() {
        let mut img = header(IDX_IMAGE_MAGIC, &[2, 28, 28]);
        img.extend(std::iter::repeat_n(0u8, 784));
        let mut lab = header(IDX_LABEL_MAGIC, &[2]);
        lab.extend([1, 2]);
        assert!(parse_idx(&img, &lab).is_err());
    }

    #[test]
    fn magic_and_count_mismatch() {
        let mut img = header(IDX_LABEL_MAGIC, &[1, 2, 2]);
        img.extend([0u8; 4]);
        let mut lab = header(IDX_LABEL_MAGIC, &[1]);
        lab.push(0);
        assert!(parse_idx(&img, &lab).is_err());
        let mut img = header(IDX_IMAGE_MAGIC, &[1, 2, 2]);
        img.extend([0u8; 4]);
        let mut lab = header(IDX_LABEL_MAGIC, &[2]);
        lab.extend([0, 1]);
        assert!(parse_idx(&img, &lab).is_err());
    }
}
