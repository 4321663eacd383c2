//! Dataset ingestion and positive/negative sample synthesis.
//!
//! Images are loaded from the IDX or CIFAR-10 binary formats, scaled to
//! `[0, 1]`, standardized with a single global mean/std fitted on the train
//! split, and extended with a fixed per-class label pattern. A positive
//! sample embeds the true label; a negative sample embeds a uniformly drawn
//! wrong one.

mod batch;
mod cifar;
mod idx;
mod patterns;

pub use batch::{batches, EmbeddedBatch};
pub use cifar::load_cifar10;
pub use idx::{load_idx_images, load_idx_labels, load_mnist_like, IdxImages};
pub use patterns::{embed_label, embed_label_into, make_label_patterns, make_negative, LabelPatternSet};

use ndarray::Array2;

use crate::error::{FfaError, Result};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Flattened image matrix with class labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset<F> {
    /// `num_samples × d`, row per image.
    pub images: Array2<F>,
    /// One label per row, each `< num_classes`.
    pub labels: Vec<u8>,
    pub num_classes: usize,
    pub split: Split,
}

impl<F: Real> LabeledDataset<F> {
    pub fn new(images: Array2<F>, labels: Vec<u8>, num_classes: usize, split: Split) -> Result<Self> {
        if images.nrows() != labels.len() {
            return Err(FfaError::DimensionMismatch(format!(
                "{} images but {} labels",
                images.nrows(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| (l as usize) >= num_classes) {
            return Err(FfaError::LabelOutOfRange {
                path: "<in-memory>".into(),
                label: bad as u32,
                num_classes,
            });
        }
        Ok(LabeledDataset {
            images,
            labels,
            num_classes,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.images.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Image dimensionality before label embedding.
    pub fn dim(&self) -> usize {
        self.images.ncols()
    }
}

/// Global scalar mean/std fitted on a train split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardization {
    pub mean: f64,
    pub std: f64,
}

impl Standardization {
    /// Fit on every pixel of the dataset. Uses the population standard
    /// deviation so a two-point dataset maps exactly onto `{-1, 1}`.
    pub fn fit<F: Real>(ds: &LabeledDataset<F>) -> Result<Self> {
        if ds.is_empty() || ds.dim() == 0 {
            return Err(FfaError::EmptyInput("standardization"));
        }
        let n = (ds.len() * ds.dim()) as f64;
        let mut sum = 0.0;
        for &v in ds.images.iter() {
            sum += v.to_f64().unwrap();
        }
        let mean = sum / n;
        let mut sq = 0.0;
        for &v in ds.images.iter() {
            let d = v.to_f64().unwrap() - mean;
            sq += d * d;
        }
        let std = (sq / n).sqrt();
        if std < 1e-8 {
            return Err(FfaError::DegenerateVariance { sigma: std });
        }
        Ok(Standardization { mean, std })
    }

    /// Apply `(x − μ)/σ` elementwise.
    pub fn apply<F: Real>(&self, ds: &mut LabeledDataset<F>) {
        let mean = crate::real::<F>(self.mean);
        let inv = crate::real::<F>(1.0 / self.std);
        ds.images.mapv_inplace(|v| (v - mean) * inv);
    }
}

/// Standardize train and test with statistics fitted on the train split.
pub fn standardize_pair<F: Real>(
    train: &mut LabeledDataset<F>,
    test: &mut LabeledDataset<F>,
) -> Result<Standardization> {
    let stats = Standardization::fit(train)?;
    stats.apply(train);
    stats.apply(test);
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn tiny(images: Array2<f64>, labels: Vec<u8>) -> LabeledDataset<f64> {
        LabeledDataset::new(images, labels, 10, Split::Train).unwrap()
    }

    #[test]
    fn two_point_standardization_hits_plus_minus_one() {
        let mut ds = tiny(arr2(&[[0.0], [2.0]]), vec![0, 1]);
        let stats = Standardization::fit(&ds).unwrap();
        stats.apply(&mut ds);
        assert_eq!(ds.images, arr2(&[[-1.0], [1.0]]));
    }

    #[test]
    fn constant_dataset_rejected() {
        let ds = tiny(arr2(&[[0.5], [0.5]]), vec![0, 1]);
        let err = Standardization::fit(&ds).unwrap_err();
        assert!(matches!(err, FfaError::DegenerateVariance { .. }));
    }

    #[test]
    fn test_split_uses_train_statistics() {
        let mut train = tiny(arr2(&[[0.0], [2.0]]), vec![0, 1]);
        let mut test = LabeledDataset::new(arr2(&[[1.0]]), vec![3], 10, Split::Test).unwrap();
        let stats = standardize_pair(&mut train, &mut test).unwrap();
        assert_eq!(stats.mean, 1.0);
        assert_eq!(stats.std, 1.0);
        assert_eq!(test.images[[0, 0]], 0.0);
    }

    #[test]
    fn label_out_of_range_rejected() {
        let err = LabeledDataset::new(arr2(&[[0.0]]), vec![10], 10, Split::Train).unwrap_err();
        assert!(matches!(err, FfaError::LabelOutOfRange { .. }));
    }
}
