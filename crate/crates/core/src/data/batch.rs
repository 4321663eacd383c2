//! Epoch batching: every positive sample is paired with one freshly drawn
//! negative in the same batch, so polarity classes stay balanced.

use ndarray::Array2;
use rand::seq::SliceRandom;

use super::patterns::{draw_wrong_label, LabelPatternSet};
use super::LabeledDataset;
use crate::error::{FfaError, Result};
use crate::rng::Rng;
use crate::Real;

/// One training batch of embedded rows. The first `len/2` rows are the
/// positive embeddings of the selected samples, the second half their
/// negative counterparts in the same order.
#[derive(Debug, Clone)]
pub struct EmbeddedBatch<F> {
    /// `(2·k) × (d + pattern_len)`.
    pub inputs: Array2<F>,
    /// 1 for positive rows, 0 for negative rows.
    pub polarity: Vec<u8>,
    /// True class of the underlying image, per row.
    pub source_labels: Vec<u8>,
}

impl<F> EmbeddedBatch<F> {
    pub fn len(&self) -> usize {
        self.polarity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polarity.is_empty()
    }
}

/// Materialize one epoch of batches in seeded-shuffled order.
///
/// Every sample is visited exactly once as a positive row and contributes
/// exactly one negative row with a freshly drawn wrong label, so a batch of
/// `k` samples holds `2k` rows.
pub fn batches<F: Real>(
    dataset: &LabeledDataset<F>,
    patterns: &LabelPatternSet,
    batch_size: usize,
    shuffle_rng: &mut Rng,
    negative_rng: &mut Rng,
) -> Result<Vec<EmbeddedBatch<F>>> {
    if batch_size == 0 {
        return Err(FfaError::InvalidArgument("batch size must be >= 1".into()));
    }
    if dataset.is_empty() {
        return Err(FfaError::EmptyInput("batches"));
    }
    let d = dataset.dim();
    let width = d + patterns.pattern_len();
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(shuffle_rng);

    let mut out = Vec::with_capacity(dataset.len().div_ceil(batch_size));
    for chunk in order.chunks(batch_size) {
        let k = chunk.len();
        let mut inputs = Array2::<F>::zeros((2 * k, width));
        let mut polarity = Vec::with_capacity(2 * k);
        let mut source_labels = Vec::with_capacity(2 * k);
        for (i, &sample) in chunk.iter().enumerate() {
            let image = dataset.images.row(sample);
            let image = image.to_slice().expect("images are row-major");
            let label = dataset.labels[sample];
            let wrong = draw_wrong_label(label, patterns.num_classes(), negative_rng)?;

            fill_row(
                inputs.row_mut(i).into_slice().expect("row-major"),
                image,
                patterns.pattern(label as usize),
            );
            fill_row(
                inputs.row_mut(k + i).into_slice().expect("row-major"),
                image,
                patterns.pattern(wrong as usize),
            );
            source_labels.push(label);
        }
        let labels_copy = source_labels.clone();
        polarity.extend(std::iter::repeat(1u8).take(k));
        polarity.extend(std::iter::repeat(0u8).take(k));
        source_labels.extend(labels_copy);
        out.push(EmbeddedBatch {
            inputs,
            polarity,
            source_labels,
        });
    }
    Ok(out)
}

fn fill_row<F: Real>(row: &mut [F], image: &[F], pattern: &[u8]) {
    let d = image.len();
    row[..d].copy_from_slice(image);
    for (slot, &b) in row[d..].iter_mut().zip(pattern) {
        *slot = crate::real::<F>(b as f64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_label_patterns, Split};
    use crate::rng::stream;
    use ndarray::Array2;

    fn dataset(n: usize, d: usize) -> LabeledDataset<f64> {
        let images = Array2::from_shape_fn((n, d), |(i, j)| (i * d + j) as f64 / 100.0);
        let labels = (0..n).map(|i| (i % 10) as u8).collect();
        LabeledDataset::new(images, labels, 10, Split::Train).unwrap()
    }

    #[test]
    fn epoch_covers_every_sample_once() {
        let ds = dataset(1000, 8);
        let patterns = make_label_patterns(10, 100, 0.1, 7).unwrap();
        let batches = batches(
            &ds,
            &patterns,
            512,
            &mut stream(1, "shuffle"),
            &mut stream(1, "negatives"),
        )
        .unwrap();
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0].len(), 1024);
        assert_eq!(batches[1].len(), 976);
        let total: usize = batches.iter().map(|b| b.len()).sum();
        assert_eq!(total, 2000);
    }

    #[test]
    fn batch_count_is_ceil_division() {
        // 60000 samples at batch 512 → 118 batches, the last one partial.
        assert_eq!(60000usize.div_ceil(512), 118);
    }

    #[test]
    fn per_batch_polarity_is_balanced() {
        let ds = dataset(100, 4);
        let patterns = make_label_patterns(10, 100, 0.1, 7).unwrap();
        for batch in batches(
            &ds,
            &patterns,
            32,
            &mut stream(2, "shuffle"),
            &mut stream(2, "negatives"),
        )
        .unwrap()
        {
            let positives = batch.polarity.iter().filter(|&&p| p == 1).count();
            let negatives = batch.polarity.iter().filter(|&&p| p == 0).count();
            assert_eq!(positives, negatives);
        }
    }

    #[test]
    fn same_seed_gives_identical_batches() {
        let ds = dataset(64, 4);
        let patterns = make_label_patterns(10, 100, 0.1, 7).unwrap();
        let a = batches(
            &ds,
            &patterns,
            16,
            &mut stream(3, "shuffle"),
            &mut stream(3, "negatives"),
        )
        .unwrap();
        let b = batches(
            &ds,
            &patterns,
            16,
            &mut stream(3, "shuffle"),
            &mut stream(3, "negatives"),
        )
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.inputs, y.inputs);
            assert_eq!(x.polarity, y.polarity);
            assert_eq!(x.source_labels, y.source_labels);
        }
    }

    #[test]
    fn negative_rows_embed_a_wrong_pattern() {
        let ds = dataset(50, 6);
        let patterns = make_label_patterns(10, 100, 0.1, 7).unwrap();
        let all = batches(
            &ds,
            &patterns,
            25,
            &mut stream(4, "shuffle"),
            &mut stream(4, "negatives"),
        )
        .unwrap();
        for batch in all {
            let k = batch.len() / 2;
            for i in 0..k {
                let true_label = batch.source_labels[i] as usize;
                assert_eq!(batch.source_labels[i], batch.source_labels[k + i]);
                assert_eq!(batch.polarity[i], 1);
                assert_eq!(batch.polarity[k + i], 0);
                let neg_tail: Vec<f64> = batch.inputs.row(k + i).iter().skip(6).cloned().collect();
                let true_pattern: Vec<f64> = patterns
                    .pattern(true_label)
                    .iter()
                    .map(|&b| b as f64)
                    .collect();
                assert_ne!(neg_tail, true_pattern, "negative embedded the true label");
            }
        }
    }
}
