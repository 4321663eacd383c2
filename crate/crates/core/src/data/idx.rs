//! IDX binary format reader (big-endian header + raw payload bytes).

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt};
use ndarray::Array2;

use super::{LabeledDataset, Split};
use crate::error::{FfaError, Result};
use crate::{real, Real};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Flattened image tensor read from an IDX3 file.
#[derive(Debug, Clone)]
pub struct IdxImages<F> {
    /// `num_images × (rows·cols)`, pixels scaled to `[0, 1]`.
    pub data: Array2<F>,
    pub rows: usize,
    pub cols: usize,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| FfaError::io(path.display().to_string(), e))
}

fn read_u32(reader: &mut impl Read, path: &Path, what: &str) -> Result<u32> {
    reader.read_u32::<BigEndian>().map_err(|_| FfaError::TruncatedFile {
        path: path.display().to_string(),
        detail: format!("file ended while reading {what}"),
    })
}

/// Load an IDX3 image file: magic `0x00000803`, then `n`, `rows`, `cols`,
/// then `n·rows·cols` pixel bytes. Bytes are scaled to `[0, 1]`.
pub fn load_idx_images<F: Real>(path: impl AsRef<Path>) -> Result<IdxImages<F>> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    let magic = read_u32(&mut reader, path, "magic")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(FfaError::BadMagic {
            path: path.display().to_string(),
            found: magic,
            expected: IDX_IMAGES_MAGIC,
        });
    }
    let n = read_u32(&mut reader, path, "image count")? as usize;
    let rows = read_u32(&mut reader, path, "row count")? as usize;
    let cols = read_u32(&mut reader, path, "column count")? as usize;
    let d = rows.checked_mul(cols).ok_or_else(|| {
        FfaError::DimensionMismatch(format!("image dims {rows}x{cols} overflow"))
    })?;
    let mut bytes = vec![0u8; n * d];
    reader.read_exact(&mut bytes).map_err(|_| FfaError::TruncatedFile {
        path: path.display().to_string(),
        detail: format!("expected {} pixel bytes", n * d),
    })?;
    let scale = real::<F>(1.0 / 255.0);
    let pixels: Vec<F> = bytes.iter().map(|&b| real::<F>(b as f64) * scale).collect();
    let data = Array2::from_shape_vec((n, d), pixels)
        .map_err(|e| FfaError::DimensionMismatch(e.to_string()))?;
    Ok(IdxImages { data, rows, cols })
}

/// Load an IDX1 label file: magic `0x00000801`, then `n`, then `n` bytes.
pub fn load_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    let mut reader = open(path)?;
    let magic = read_u32(&mut reader, path, "magic")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(FfaError::BadMagic {
            path: path.display().to_string(),
            found: magic,
            expected: IDX_LABELS_MAGIC,
        });
    }
    let n = read_u32(&mut reader, path, "label count")? as usize;
    let mut labels = vec![0u8; n];
    reader.read_exact(&mut labels).map_err(|_| FfaError::TruncatedFile {
        path: path.display().to_string(),
        detail: format!("expected {n} label bytes"),
    })?;
    Ok(labels)
}

fn find_file(dir: &Path, candidates: &[&str]) -> Result<std::path::PathBuf> {
    for name in candidates {
        let p = dir.join(name);
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(FfaError::io(
        dir.join(candidates[0]).display().to_string(),
        std::io::Error::new(std::io::ErrorKind::NotFound, "dataset file not found"),
    ))
}

/// Load an MNIST-layout dataset directory (`train-images-idx3-ubyte` etc.,
/// the dotted `train-images.idx3-ubyte` spelling is also accepted).
pub fn load_mnist_like<F: Real>(
    dir: impl AsRef<Path>,
    num_classes: usize,
) -> Result<(LabeledDataset<F>, LabeledDataset<F>)> {
    let dir = dir.as_ref();
    let load_split = |img_names: &[&str], lbl_names: &[&str], split: Split| -> Result<LabeledDataset<F>> {
        let images = load_idx_images::<F>(find_file(dir, img_names)?)?;
        let lbl_path = find_file(dir, lbl_names)?;
        let labels = load_idx_labels(&lbl_path)?;
        if images.data.nrows() != labels.len() {
            return Err(FfaError::DimensionMismatch(format!(
                "{} images vs {} labels in {}",
                images.data.nrows(),
                labels.len(),
                dir.display()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| (l as usize) >= num_classes) {
            return Err(FfaError::LabelOutOfRange {
                path: lbl_path.display().to_string(),
                label: bad as u32,
                num_classes,
            });
        }
        LabeledDataset::new(images.data, labels, num_classes, split)
    };
    let train = load_split(
        &["train-images-idx3-ubyte", "train-images.idx3-ubyte"],
        &["train-labels-idx1-ubyte", "train-labels.idx1-ubyte"],
        Split::Train,
    )?;
    let test = load_split(
        &["t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"],
        &["t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"],
        Split::Test,
    )?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use byteorder::{BigEndian, WriteBytesExt};
    use std::io::Write;

    fn write_images(path: &Path, n: u32, rows: u32, cols: u32, pixels: &[u8]) {
        let mut f = File::create(path).unwrap();
        f.write_u32::<BigEndian>(IDX_IMAGES_MAGIC).unwrap();
        f.write_u32::<BigEndian>(n).unwrap();
        f.write_u32::<BigEndian>(rows).unwrap();
        f.write_u32::<BigEndian>(cols).unwrap();
        f.write_all(pixels).unwrap();
    }

    fn write_labels(path: &Path, labels: &[u8]) {
        let mut f = File::create(path).unwrap();
        f.write_u32::<BigEndian>(IDX_LABELS_MAGIC).unwrap();
        f.write_u32::<BigEndian>(labels.len() as u32).unwrap();
        f.write_all(labels).unwrap();
    }

    #[test]
    fn images_load_flattened_and_scaled() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("imgs");
        write_images(&p, 2, 2, 2, &[0, 255, 51, 102, 255, 0, 0, 255]);
        let imgs = load_idx_images::<f64>(&p).unwrap();
        assert_eq!(imgs.data.shape(), &[2, 4]);
        assert_eq!(imgs.rows, 2);
        assert_eq!(imgs.data[[0, 1]], 1.0);
        assert!((imgs.data[[0, 2]] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn labels_under_class_count_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lbls");
        write_labels(&p, &[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
        let labels = load_idx_labels(&p).unwrap();
        assert_eq!(labels.len(), 10);
        assert!(labels.iter().all(|&l| l < 10));
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad");
        let mut f = File::create(&p).unwrap();
        f.write_u32::<BigEndian>(0xDEADBEEF).unwrap();
        f.write_u32::<BigEndian>(1).unwrap();
        drop(f);
        let err = load_idx_labels(&p).unwrap_err();
        assert!(matches!(err, FfaError::BadMagic { found: 0xDEADBEEF, .. }));
    }

    #[test]
    fn truncated_payload_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("short");
        write_images(&p, 2, 2, 2, &[1, 2, 3]); // needs 8 bytes
        let err = load_idx_images::<f64>(&p).unwrap_err();
        assert!(matches!(err, FfaError::TruncatedFile { .. }));
    }
}
