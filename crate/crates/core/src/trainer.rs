//! Layer-local binary cross-entropy training with Adam.
//!
//! Each batch is forwarded through the whole stack once with the current
//! weights; every layer then computes its own gradient from its own trace
//! and takes one Adam step. Updates are simultaneous in effect: no layer
//! sees another layer's post-update output within a batch, because
//! gradients only read the traces collected before any update.

use std::time::Instant;

use ndarray::{Array2, ArrayView2};

use crate::data::{batches, EmbeddedBatch, LabelPatternSet, LabeledDataset};
use crate::error::{FfaError, Result};
use crate::functions::{goodness_gradient, probability, probability_partials};
use crate::metrics;
use crate::model::{network_forward, LayerTraceBatch, Network, PolarLayer};
use crate::rng::indexed_stream;
use crate::{real, Real};

/// Probabilities are clamped to `[CLAMP, 1 − CLAMP]` before logarithms and
/// the `1/P`-style loss scales; the cross-entropy is undefined at 0 and 1.
pub const PROBABILITY_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    /// Stop when test accuracy has not improved for this many epochs.
    pub early_stop_patience: Option<usize>,
    pub seed: u64,
    /// Identifies the run in diagnostics (e.g. the config hash).
    pub run_label: String,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            batch_size: 512,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            early_stop_patience: None,
            seed: 0,
            run_label: String::new(),
        }
    }
}

/// One row of the per-epoch progress record.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EpochStats {
    /// 1-based epoch index.
    pub epoch: usize,
    /// Mean local loss per sample per layer over the epoch.
    pub mean_loss: f64,
    pub test_accuracy: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub history: Vec<EpochStats>,
    pub best_accuracy: f64,
    /// 1-based epoch at which the best accuracy was first reached.
    pub best_epoch: usize,
    pub epochs_run: usize,
}

impl TrainOutcome {
    pub fn accuracy_history(&self) -> Vec<f64> {
        self.history.iter().map(|s| s.test_accuracy).collect()
    }
}

#[inline]
fn clamp_probability<F: Real>(p: F) -> F {
    let lo = real::<F>(PROBABILITY_CLAMP);
    let hi = F::one() - lo;
    p.max(lo).min(hi)
}

/// Binary cross-entropy of one sample: `−[ρ ln P + (1 − ρ) ln(1 − P)]`,
/// with `P` clamped away from 0 and 1.
pub fn local_loss<F: Real>(p: F, rho: u8) -> F {
    let p = clamp_probability(p);
    if rho == 1 {
        -p.ln()
    } else {
        -(F::one() - p).ln()
    }
}

/// Batch-averaged gradient of the layer's local loss with respect to its
/// weights, assembled from the chain rule:
/// `dL/dw_ji = mean_k s_k · (∂P/∂G_block) · (∂G_block/∂ℓ_j) · f'(a_j) · x_i`,
/// where `s_k` is the loss scale `−1/P` for positive rows and `1/(1 − P)`
/// for negative rows, and the block is the polarity block neuron `j`
/// belongs to.
pub fn layer_gradient<F: Real>(
    layer: &PolarLayer<F>,
    input: ArrayView2<'_, F>,
    trace: &LayerTraceBatch<F>,
    polarity: &[u8],
) -> Result<Array2<F>> {
    let rows = trace.batch_len();
    if input.nrows() != rows || polarity.len() != rows {
        return Err(FfaError::DimensionMismatch(format!(
            "gradient over {} trace rows but {} input rows / {} polarities",
            rows,
            input.nrows(),
            polarity.len()
        )));
    }
    let n = layer.size();
    let n_pos = layer.n_pos;
    let mut delta = Array2::<F>::zeros((rows, n));
    for k in 0..rows {
        let g_pos = trace.g_pos[k];
        let g_neg = trace.g_neg[k];
        let p = clamp_probability(probability(&layer.probability, g_pos, g_neg));
        let loss_scale = if polarity[k] == 1 {
            -(F::one() / p)
        } else {
            F::one() / (F::one() - p)
        };
        let (dp_dgpos, dp_dgneg) = probability_partials(&layer.probability, g_pos, g_neg);

        let latent = trace.latents.row(k);
        let latent = latent.to_slice().expect("row-major");
        let pre = trace.preactivations.row(k);
        let pre = pre.to_slice().expect("row-major");
        let delta_row = delta.row_mut(k).into_slice().expect("row-major");

        let ggrad_pos = goodness_gradient(&layer.goodness, &latent[..n_pos])?;
        for j in 0..n_pos {
            delta_row[j] =
                loss_scale * dp_dgpos * ggrad_pos[j] * layer.activation.derivative_scalar(pre[j]);
        }
        if n_pos < n {
            let ggrad_neg = goodness_gradient(&layer.goodness, &latent[n_pos..])?;
            for j in n_pos..n {
                delta_row[j] = loss_scale
                    * dp_dgneg
                    * ggrad_neg[j - n_pos]
                    * layer.activation.derivative_scalar(pre[j]);
            }
        }
    }
    let mut grad = delta.t().dot(&input);
    let inv_rows = real::<F>(1.0 / rows as f64);
    grad.mapv_inplace(|g| g * inv_rows);
    Ok(grad)
}

/// One bias-corrected Adam step on a layer's weights.
pub fn adam_step<F: Real>(
    layer: &mut PolarLayer<F>,
    grad: &Array2<F>,
    config: &TrainConfig,
    layer_index: usize,
) -> Result<()> {
    if grad.dim() != layer.weights.dim() {
        return Err(FfaError::DimensionMismatch(format!(
            "gradient shape {:?} but weights are {:?}",
            grad.dim(),
            layer.weights.dim()
        )));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(FfaError::NonFiniteGradient {
            layer: layer_index,
            context: config.run_label.clone(),
        });
    }
    layer.adam.step += 1;
    let t = layer.adam.step;
    let beta1 = real::<F>(config.beta1);
    let beta2 = real::<F>(config.beta2);
    let one = F::one();
    let bias1 = one - real::<F>(config.beta1.powi(t as i32));
    let bias2 = one - real::<F>(config.beta2.powi(t as i32));
    let lr = real::<F>(config.lr);
    let eps = real::<F>(config.adam_epsilon);

    let w = layer.weights.as_slice_mut().expect("row-major");
    let m = layer.adam.m.as_slice_mut().expect("row-major");
    let v = layer.adam.v.as_slice_mut().expect("row-major");
    let g = grad.as_slice().expect("row-major");
    for i in 0..w.len() {
        m[i] = beta1 * m[i] + (one - beta1) * g[i];
        v[i] = beta2 * v[i] + (one - beta2) * g[i] * g[i];
        let m_hat = m[i] / bias1;
        let v_hat = v[i] / bias2;
        w[i] = w[i] - lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// Mean local loss of a batch over all rows and layers, computed from the
/// traces; used for epoch reporting and NaN detection.
fn batch_loss<F: Real>(
    net: &Network<F>,
    traces: &[LayerTraceBatch<F>],
    polarity: &[u8],
) -> f64 {
    let mut sum = 0.0f64;
    for (layer, trace) in net.layers.iter().zip(traces) {
        for (k, &rho) in polarity.iter().enumerate() {
            let p = probability(&layer.probability, trace.g_pos[k], trace.g_neg[k]);
            sum += local_loss(p, rho).to_f64().unwrap();
        }
    }
    sum / (polarity.len() * net.layers.len()) as f64
}

/// One forward + simultaneous layer-local update over a single batch.
/// Returns the mean local loss of the batch (from the pre-update traces).
pub fn train_batch<F: Real>(
    net: &mut Network<F>,
    batch: &EmbeddedBatch<F>,
    config: &TrainConfig,
) -> Result<f64> {
    let traces = network_forward(net, batch.inputs.view())?;
    let loss = batch_loss(net, &traces, &batch.polarity);
    for li in 0..net.layers.len() {
        let input = if li == 0 {
            batch.inputs.view()
        } else {
            traces[li - 1].normalized.view()
        };
        let grad = layer_gradient(&net.layers[li], input, &traces[li], &batch.polarity)?;
        adam_step(&mut net.layers[li], &grad, config, li)?;
    }
    Ok(loss)
}

/// Full training loop: per epoch, a seeded shuffle with fresh negatives,
/// batch-wise simultaneous updates, and a test-accuracy measurement.
///
/// `on_epoch` receives every completed epoch's stats, in order; callers wire
/// it to stdout and the run's results file.
pub fn train<F: Real>(
    net: &mut Network<F>,
    train_ds: &LabeledDataset<F>,
    test_ds: &LabeledDataset<F>,
    patterns: &LabelPatternSet,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainOutcome> {
    if config.epochs == 0 {
        return Err(FfaError::InvalidArgument("epochs must be >= 1".into()));
    }
    if config.lr <= 0.0 {
        return Err(FfaError::InvalidArgument(format!(
            "learning rate must be > 0, got {}",
            config.lr
        )));
    }
    let width = train_ds.dim() + patterns.pattern_len();
    if width != net.input_dim {
        return Err(FfaError::DimensionMismatch(format!(
            "embedded width {width} but network expects {}",
            net.input_dim
        )));
    }

    let mut history: Vec<EpochStats> = Vec::with_capacity(config.epochs);
    let mut best_accuracy = f64::NEG_INFINITY;
    let mut best_epoch = 0usize;
    for epoch in 1..=config.epochs {
        let started = Instant::now();
        let mut shuffle_rng = indexed_stream(config.seed, "shuffle", epoch as u64);
        let mut negative_rng = indexed_stream(config.seed, "negatives", epoch as u64);
        let epoch_batches = batches(
            train_ds,
            patterns,
            config.batch_size,
            &mut shuffle_rng,
            &mut negative_rng,
        )?;
        let mut loss_sum = 0.0f64;
        let mut row_count = 0usize;
        for (bi, batch) in epoch_batches.iter().enumerate() {
            let loss = train_batch(net, batch, config)?;
            if !loss.is_finite() {
                return Err(FfaError::NonFiniteLoss {
                    epoch,
                    batch: bi,
                    context: config.run_label.clone(),
                });
            }
            loss_sum += loss * batch.len() as f64;
            row_count += batch.len();
        }
        let test_accuracy = metrics::accuracy(net, test_ds, patterns)?;
        let stats = EpochStats {
            epoch,
            mean_loss: loss_sum / row_count as f64,
            test_accuracy,
            wall_time_s: started.elapsed().as_secs_f64(),
        };
        on_epoch(&stats);
        history.push(stats);
        if test_accuracy > best_accuracy {
            best_accuracy = test_accuracy;
            best_epoch = epoch;
        }
        if let Some(patience) = config.early_stop_patience {
            if epoch - best_epoch >= patience {
                break;
            }
        }
    }
    let epochs_run = history.len();
    Ok(TrainOutcome {
        history,
        best_accuracy,
        best_epoch,
        epochs_run,
    })
}
