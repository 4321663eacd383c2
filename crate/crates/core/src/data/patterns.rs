//! Per-class label patterns and their embedding into images.
//!
//! Each class gets a fixed binary pattern drawn once per experiment from
//! Bernoulli(p); embedding appends the raw 0/1 pattern to the (already
//! standardized) image. Negatives embed a uniformly drawn wrong label.

use ndarray::Array2;
use rand::Rng as _;

use crate::error::{FfaError, Result};
use crate::rng::{stream, Rng};
use crate::{real, Real};

pub const DEFAULT_PATTERN_LEN: usize = 100;
pub const DEFAULT_PATTERN_DENSITY: f64 = 0.1;

/// Fixed binary label patterns, one row per class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelPatternSet {
    patterns: Array2<u8>,
    pub seed: u64,
}

impl LabelPatternSet {
    pub fn num_classes(&self) -> usize {
        self.patterns.nrows()
    }

    pub fn pattern_len(&self) -> usize {
        self.patterns.ncols()
    }

    pub fn pattern(&self, class: usize) -> &[u8] {
        self.patterns
            .row(class)
            .to_slice()
            .expect("patterns are row-major")
    }
}

/// Draw the per-class patterns from the `"patterns"` stream of `seed`.
/// Identical `(num_classes, len, p, seed)` always reproduce the same set.
pub fn make_label_patterns(
    num_classes: usize,
    len: usize,
    p: f64,
    seed: u64,
) -> Result<LabelPatternSet> {
    if num_classes < 2 {
        return Err(FfaError::InvalidArgument(format!(
            "label patterns need at least 2 classes, got {num_classes}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(FfaError::InvalidArgument(format!(
            "pattern density must be in [0, 1], got {p}"
        )));
    }
    let mut rng = stream(seed, "patterns");
    let mut patterns = Array2::<u8>::zeros((num_classes, len));
    for v in patterns.iter_mut() {
        *v = u8::from(rng.gen_bool(p));
    }
    Ok(LabelPatternSet { patterns, seed })
}

/// Concatenate `[image ‖ pattern]`, pattern bits inserted as 0/1 scalars.
pub fn embed_label<F: Real>(image: &[F], pattern: &[u8]) -> Vec<F> {
    let mut out = Vec::with_capacity(image.len() + pattern.len());
    out.extend_from_slice(image);
    out.extend(pattern.iter().map(|&b| real::<F>(b as f64)));
    out
}

/// Write `[image ‖ pattern]` into a preallocated row of width
/// `image.len() + pattern.len()`.
pub fn embed_label_into<F: Real>(image: &[F], pattern: &[u8], out: &mut [F]) -> Result<()> {
    let d = image.len();
    if out.len() != d + pattern.len() {
        return Err(FfaError::DimensionMismatch(format!(
            "embedding row has width {}, expected {}",
            out.len(),
            d + pattern.len()
        )));
    }
    out[..d].copy_from_slice(image);
    for (slot, &b) in out[d..].iter_mut().zip(pattern) {
        *slot = real::<F>(b as f64);
    }
    Ok(())
}

/// Embed a label drawn uniformly from the wrong classes. Returns the
/// embedded vector, the drawn label, and polarity 0.
pub fn make_negative<F: Real>(
    image: &[F],
    true_label: u8,
    patterns: &LabelPatternSet,
    rng: &mut Rng,
) -> Result<(Vec<F>, u8, u8)> {
    let wrong = draw_wrong_label(true_label, patterns.num_classes(), rng)?;
    Ok((
        embed_label(image, patterns.pattern(wrong as usize)),
        wrong,
        0,
    ))
}

/// Uniform draw over the `C − 1` classes different from `true_label`.
pub fn draw_wrong_label(true_label: u8, num_classes: usize, rng: &mut Rng) -> Result<u8> {
    if num_classes < 2 {
        return Err(FfaError::InvalidArgument(
            "negative samples need at least 2 classes".into(),
        ));
    }
    let draw = rng.gen_range(0..num_classes - 1) as u8;
    Ok(if draw >= true_label { draw + 1 } else { draw })
}
