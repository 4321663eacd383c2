//! Inference and the quantitative surface of a trained run: accuracy,
//! convergence area, Hoyer sparsity, neural usage and geometric
//! separability, plus the latent dump consumed by external projection tools.
//!
//! Inference scores a candidate class by embedding its label pattern,
//! forwarding, and summing the per-layer probability over all layers; the
//! probability lives on a common `[0, 1]` scale for every probability kind,
//! which makes the sum comparable across configurations. Alternative scorers
//! can be added behind a config switch without invalidating stored results.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::{LabelPatternSet, LabeledDataset};
use crate::error::{FfaError, Result};
use crate::functions::probability;
use crate::model::{network_forward, Network};
use crate::rng::stream;
use crate::Real;

/// Images forwarded per evaluation chunk (each image contributes one row per
/// candidate class).
const EVAL_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

/// One latent vector extracted from a layer, tagged for the metric suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatentSample {
    pub layer_index: usize,
    pub class_label: u8,
    pub polarity: Polarity,
    pub vector: Vec<f64>,
}

/// Which label the separability index compares between neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparabilityKey {
    Polarity,
    Class,
}

impl std::str::FromStr for SeparabilityKey {
    type Err = FfaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "polarity" => Ok(SeparabilityKey::Polarity),
            "class" => Ok(SeparabilityKey::Class),
            other => Err(FfaError::Parse(format!(
                "unknown separability key '{other}' (expected class or polarity)"
            ))),
        }
    }
}

/// Per-class scores for a chunk of images: embed each candidate label,
/// forward once, and sum the per-layer probabilities.
fn score_chunk<F: Real>(
    net: &Network<F>,
    images: &[&[F]],
    patterns: &LabelPatternSet,
) -> Result<Vec<Vec<f64>>> {
    let classes = patterns.num_classes();
    let width = images[0].len() + patterns.pattern_len();
    if width != net.input_dim {
        return Err(FfaError::DimensionMismatch(format!(
            "embedded width {width} but network expects {}",
            net.input_dim
        )));
    }
    let mut rows = Array2::<F>::zeros((images.len() * classes, width));
    for (i, image) in images.iter().enumerate() {
        for c in 0..classes {
            let mut row = rows.row_mut(i * classes + c);
            let row = row.as_slice_mut().expect("row-major");
            crate::data::embed_label_into(image, patterns.pattern(c), row)?;
        }
    }
    let traces = network_forward(net, rows.view())?;
    let mut scores = vec![vec![0.0f64; classes]; images.len()];
    for (layer, trace) in net.layers.iter().zip(&traces) {
        for (row, (&gp, &gn)) in trace.g_pos.iter().zip(&trace.g_neg).enumerate() {
            let p = probability(&layer.probability, gp, gn).to_f64().unwrap();
            scores[row / classes][row % classes] += p;
        }
    }
    Ok(scores)
}

fn argmax_lowest_tie(scores: &[f64]) -> usize {
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = c;
        }
    }
    best
}

/// Predict the class of one image: argmax over candidate labels of the
/// summed per-layer probability; ties break to the lowest class index.
pub fn predict<F: Real>(
    net: &Network<F>,
    image: &[F],
    patterns: &LabelPatternSet,
) -> Result<usize> {
    let scores = score_chunk(net, &[image], patterns)?;
    Ok(argmax_lowest_tie(&scores[0]))
}

/// Fraction of correctly predicted samples over a test set.
pub fn accuracy<F: Real>(
    net: &Network<F>,
    dataset: &LabeledDataset<F>,
    patterns: &LabelPatternSet,
) -> Result<f64> {
    if dataset.is_empty() {
        return Err(FfaError::EmptyInput("accuracy"));
    }
    let mut correct = 0usize;
    let indices: Vec<usize> = (0..dataset.len()).collect();
    for chunk in indices.chunks(EVAL_CHUNK) {
        let images: Vec<&[F]> = chunk
            .iter()
            .map(|&i| dataset.images.row(i).to_slice().expect("row-major"))
            .collect();
        let scores = score_chunk(net, &images, patterns)?;
        for (&i, s) in chunk.iter().zip(&scores) {
            if argmax_lowest_tie(s) == dataset.labels[i] as usize {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

/// Normalized area between the accuracy curve and its maximum:
/// `CA = Σ_t (max − acc_t) / (T · max)`. Lower is faster convergence.
pub fn convergence_area(acc: &[f64]) -> Result<f64> {
    if acc.is_empty() {
        return Err(FfaError::EmptyInput("convergence_area"));
    }
    let max = acc.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return Err(FfaError::InvalidArgument(
            "convergence area needs a positive maximum accuracy".into(),
        ));
    }
    let deficit: f64 = acc.iter().map(|&a| max - a).sum();
    Ok(deficit / (acc.len() as f64 * max))
}

/// Hoyer sparsity index in `[0, 1]`: 0 for a uniform vector, 1 for one-hot.
///
/// Computed on absolute values, which leaves the underlying norm ratio
/// unchanged but makes the intent explicit for sign-carrying latents.
pub fn hoyer<F: Real>(v: &[F]) -> Result<f64> {
    if v.len() < 2 {
        return Err(FfaError::InvalidArgument(format!(
            "hoyer index needs dimension >= 2, got {}",
            v.len()
        )));
    }
    let mut l1 = 0.0f64;
    let mut l2sq = 0.0f64;
    for x in v {
        let a = x.to_f64().unwrap().abs();
        l1 += a;
        l2sq += a * a;
    }
    if l2sq == 0.0 {
        return Err(FfaError::InvalidArgument(
            "hoyer index of the zero vector is undefined".into(),
        ));
    }
    let n = v.len() as f64;
    Ok((n.sqrt() - l1 / l2sq.sqrt()) / (n.sqrt() - 1.0))
}

/// Hoyer index of the coordinate-wise mean latent: high values mean few
/// neurons carry the layer's output.
pub fn neural_usage(latents: &[LatentSample]) -> Result<f64> {
    let first = latents.first().ok_or(FfaError::EmptyInput("neural_usage"))?;
    let dim = first.vector.len();
    let mut mean = vec![0.0f64; dim];
    for sample in latents {
        if sample.vector.len() != dim {
            return Err(FfaError::DimensionMismatch(format!(
                "latent of length {} in a set of width {dim}",
                sample.vector.len()
            )));
        }
        for (acc, &v) in mean.iter_mut().zip(&sample.vector) {
            *acc += v;
        }
    }
    for acc in mean.iter_mut() {
        *acc /= latents.len() as f64;
    }
    hoyer(&mean)
}

/// Geometric separability: the fraction of the `j` nearest neighbors (self
/// excluded, exhaustive Euclidean search) sharing the sample's key.
pub fn separability(latents: &[LatentSample], j: usize, key: SeparabilityKey) -> Result<f64> {
    if j == 0 {
        return Err(FfaError::InvalidArgument("separability needs j >= 1".into()));
    }
    if latents.len() <= j {
        return Err(FfaError::InvalidArgument(format!(
            "separability with j = {j} needs more than {j} samples, got {}",
            latents.len()
        )));
    }
    let key_of = |s: &LatentSample| -> u32 {
        match key {
            SeparabilityKey::Polarity => matches!(s.polarity, Polarity::Positive) as u32,
            SeparabilityKey::Class => s.class_label as u32,
        }
    };
    let mut matches = 0usize;
    for (k, anchor) in latents.iter().enumerate() {
        let mut dists: Vec<(f64, usize)> = latents
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(i, other)| {
                let d2: f64 = anchor
                    .vector
                    .iter()
                    .zip(&other.vector)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d2, i)
            })
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite latents").then(a.1.cmp(&b.1)));
        matches += dists
            .iter()
            .take(j)
            .filter(|&&(_, i)| key_of(&latents[i]) == key_of(anchor))
            .count();
    }
    Ok(matches as f64 / (latents.len() * j) as f64)
}

/// Extract tagged latents for a seeded sample of a dataset: every sampled
/// image contributes, per layer, one positively and one negatively embedded
/// latent vector.
pub fn collect_latents<F: Real>(
    net: &Network<F>,
    dataset: &LabeledDataset<F>,
    patterns: &LabelPatternSet,
    sample_size: usize,
    seed: u64,
) -> Result<Vec<LatentSample>> {
    if dataset.is_empty() {
        return Err(FfaError::EmptyInput("collect_latents"));
    }
    let count = sample_size.min(dataset.len());
    let mut sample_rng = stream(seed, "latent-sample");
    let chosen = rand::seq::index::sample(&mut sample_rng, dataset.len(), count).into_vec();
    let mut negative_rng = stream(seed, "latent-negatives");

    let width = dataset.dim() + patterns.pattern_len();
    let mut rows = Array2::<F>::zeros((2 * count, width));
    let mut tags = Vec::with_capacity(2 * count);
    for (i, &idx) in chosen.iter().enumerate() {
        let image = dataset.images.row(idx);
        let image = image.to_slice().expect("row-major");
        let label = dataset.labels[idx];
        let wrong = crate::data::make_negative(image, label, patterns, &mut negative_rng)?.1;
        crate::data::embed_label_into(
            image,
            patterns.pattern(label as usize),
            rows.row_mut(2 * i).as_slice_mut().expect("row-major"),
        )?;
        crate::data::embed_label_into(
            image,
            patterns.pattern(wrong as usize),
            rows.row_mut(2 * i + 1).as_slice_mut().expect("row-major"),
        )?;
        tags.push((label, Polarity::Positive));
        tags.push((label, Polarity::Negative));
    }

    let traces = network_forward(net, rows.view())?;
    let mut out = Vec::with_capacity(traces.len() * 2 * count);
    for (layer_index, trace) in traces.iter().enumerate() {
        for (row, &(class_label, polarity)) in tags.iter().enumerate() {
            let vector = trace
                .latents
                .row(row)
                .iter()
                .map(|v| v.to_f64().unwrap())
                .collect();
            out.push(LatentSample {
                layer_index,
                class_label,
                polarity,
                vector,
            });
        }
    }
    Ok(out)
}

/// Dump latents as line-delimited JSON records. Same inputs and seed produce
/// identical bytes; the 64-bit values round-trip losslessly.
pub fn export_latents<F: Real>(
    net: &Network<F>,
    dataset: &LabeledDataset<F>,
    patterns: &LabelPatternSet,
    sample_size: usize,
    seed: u64,
    out_path: impl AsRef<Path>,
) -> Result<usize> {
    let out_path = out_path.as_ref();
    let samples = collect_latents(net, dataset, patterns, sample_size, seed)?;
    let file =
        File::create(out_path).map_err(|e| FfaError::io(out_path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    for sample in &samples {
        serde_json::to_writer(&mut w, sample)
            .map_err(|e| FfaError::Parse(format!("latent record serialization: {e}")))?;
        w.write_all(b"\n")
            .map_err(|e| FfaError::io(out_path.display().to_string(), e))?;
    }
    w.flush()
        .map_err(|e| FfaError::io(out_path.display().to_string(), e))?;
    Ok(samples.len())
}

/// Mean and standard error of the mean (sample standard deviation over √n).
pub fn sem(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(FfaError::InvalidArgument(format!(
            "standard error needs >= 2 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt() / n.sqrt()))
}
