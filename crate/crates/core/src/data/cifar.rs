//! CIFAR-10 binary batch reader (1 label byte + 3072 pixel bytes per record).

use std::fs::File;
use std::io::Read;
use std::path::Path;

use ndarray::Array2;

use super::{LabeledDataset, Split};
use crate::error::{FfaError, Result};
use crate::{real, Real};

const RECORD_BYTES: usize = 3073;
const IMAGE_BYTES: usize = 3072;
const NUM_CLASSES: usize = 10;

const TRAIN_FILES: [&str; 5] = [
    "data_batch_1.bin",
    "data_batch_2.bin",
    "data_batch_3.bin",
    "data_batch_4.bin",
    "data_batch_5.bin",
];
const TEST_FILE: &str = "test_batch.bin";

fn read_batch<F: Real>(path: &Path, labels: &mut Vec<u8>, pixels: &mut Vec<F>) -> Result<usize> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| FfaError::io(path.display().to_string(), e))?;
    if bytes.is_empty() || bytes.len() % RECORD_BYTES != 0 {
        return Err(FfaError::TruncatedFile {
            path: path.display().to_string(),
            detail: format!(
                "{} bytes is not a whole number of {RECORD_BYTES}-byte records",
                bytes.len()
            ),
        });
    }
    let n = bytes.len() / RECORD_BYTES;
    let scale = real::<F>(1.0 / 255.0);
    for record in bytes.chunks_exact(RECORD_BYTES) {
        let label = record[0];
        if (label as usize) >= NUM_CLASSES {
            return Err(FfaError::LabelOutOfRange {
                path: path.display().to_string(),
                label: label as u32,
                num_classes: NUM_CLASSES,
            });
        }
        labels.push(label);
        pixels.extend(record[1..].iter().map(|&b| real::<F>(b as f64) * scale));
    }
    Ok(n)
}

fn load_files<F: Real>(dir: &Path, files: &[&str], split: Split) -> Result<LabeledDataset<F>> {
    let mut labels = Vec::new();
    let mut pixels = Vec::new();
    let mut total = 0;
    for name in files {
        total += read_batch(&dir.join(name), &mut labels, &mut pixels)?;
    }
    let images = Array2::from_shape_vec((total, IMAGE_BYTES), pixels)
        .map_err(|e| FfaError::DimensionMismatch(e.to_string()))?;
    LabeledDataset::new(images, labels, NUM_CLASSES, split)
}

/// Load the five train batches and the test batch from a CIFAR-10 binary
/// directory. Images are flattened to length 3072 and scaled to `[0, 1]`.
pub fn load_cifar10<F: Real>(
    dir: impl AsRef<Path>,
) -> Result<(LabeledDataset<F>, LabeledDataset<F>)> {
    let dir = dir.as_ref();
    let train = load_files(dir, &TRAIN_FILES, Split::Train)?;
    let test = load_files(dir, &[TEST_FILE], Split::Test)?;
    Ok((train, test))
}
