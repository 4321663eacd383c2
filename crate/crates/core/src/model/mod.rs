//! Polarized layers and the network forward pass.
//!
//! A layer owns a dense weight matrix split into a positive block (rows
//! `0..n_pos`) and a negative block (`n_pos..n`). Goodness is scored per
//! block; plain FFA is the degenerate split `n_pos = n`, where the negative
//! score is reported as 0 and ignored. Between layers the full latent is
//! divided per block by an absolutely homogeneous goodness value so the next
//! layer sees unit-goodness inputs.

mod checkpoint;

pub use checkpoint::{load_checkpoint, save_checkpoint};

use ndarray::{Array2, ArrayView2};
use rand_distr::{Distribution, Normal};

use crate::error::{FfaError, Result};
use crate::functions::{goodness, ActivationKind, GoodnessSpec, ProbabilitySpec};
use crate::rng::Rng;
use crate::{real, Real};

/// Guard for normalization divisors; a block with goodness below this is
/// treated as dead and scaled by `1/NORM_EPSILON` toward zero instead of
/// dividing by zero.
pub const NORM_EPSILON: f64 = 1e-8;

/// Adam moment accumulators for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<F> {
    pub m: Array2<F>,
    pub v: Array2<F>,
    pub step: u64,
}

impl<F: Real> AdamState<F> {
    pub(crate) fn zeros(n: usize, m: usize) -> Self {
        AdamState {
            m: Array2::zeros((n, m)),
            v: Array2::zeros((n, m)),
            step: 0,
        }
    }
}

/// One dense layer with a polarity split.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarLayer<F> {
    /// `n × m`: row per neuron, column per input coordinate.
    pub weights: Array2<F>,
    /// Rows `0..n_pos` are positive neurons, the rest negative.
    pub n_pos: usize,
    pub activation: ActivationKind,
    pub goodness: GoodnessSpec,
    pub probability: ProbabilitySpec,
    pub adam: AdamState<F>,
}

impl<F: Real> PolarLayer<F> {
    /// Number of neurons.
    pub fn size(&self) -> usize {
        self.weights.nrows()
    }

    /// Input width.
    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Whether the layer runs in plain (non-polarized) mode.
    pub fn is_ffa_mode(&self) -> bool {
        self.n_pos == self.size()
    }
}

/// Initialize a layer with i.i.d. normal weights of standard deviation
/// `1/√m` and zeroed Adam state.
pub fn init_layer<F: Real>(
    input_dim: usize,
    size: usize,
    n_pos: usize,
    activation: ActivationKind,
    goodness: GoodnessSpec,
    probability: ProbabilitySpec,
    rng: &mut Rng,
) -> Result<PolarLayer<F>> {
    if input_dim == 0 || size == 0 {
        return Err(FfaError::InvalidArgument(format!(
            "layer dims must be >= 1, got {size}x{input_dim}"
        )));
    }
    if n_pos == 0 || n_pos > size {
        return Err(FfaError::InvalidArgument(format!(
            "polarity split {n_pos} outside [1, {size}]"
        )));
    }
    let sd = 1.0 / (input_dim as f64).sqrt();
    let normal = Normal::new(0.0, sd).expect("positive sd");
    let weights = Array2::from_shape_simple_fn((size, input_dim), || real::<F>(normal.sample(rng)));
    Ok(PolarLayer {
        weights,
        n_pos,
        activation,
        goodness,
        probability,
        adam: AdamState::zeros(size, input_dim),
    })
}

/// Per-batch record of everything a layer computed on its input.
#[derive(Debug, Clone)]
pub struct LayerTraceBatch<F> {
    /// `B × n` preactivations `a = x Wᵀ`.
    pub preactivations: Array2<F>,
    /// `B × n` latents `ℓ = f(a)`.
    pub latents: Array2<F>,
    /// Per-row goodness of the positive block (inhibition applied).
    pub g_pos: Vec<F>,
    /// Per-row goodness of the negative block; 0 in FFA mode.
    pub g_neg: Vec<F>,
    /// `B × n` goodness-normalized latents forwarded to the next layer.
    pub normalized: Array2<F>,
}

impl<F> LayerTraceBatch<F> {
    pub fn batch_len(&self) -> usize {
        self.g_pos.len()
    }
}

/// Forward one batch through a layer and score both polarity blocks.
pub fn layer_forward<F: Real>(
    layer: &PolarLayer<F>,
    input: ArrayView2<'_, F>,
) -> Result<LayerTraceBatch<F>> {
    if input.ncols() != layer.input_dim() {
        return Err(FfaError::DimensionMismatch(format!(
            "input width {} but layer expects {}",
            input.ncols(),
            layer.input_dim()
        )));
    }
    let preactivations = input.dot(&layer.weights.t());
    let latents = preactivations.mapv(|a| layer.activation.apply_scalar(a));

    let rows = latents.nrows();
    let mut g_pos = Vec::with_capacity(rows);
    let mut g_neg = Vec::with_capacity(rows);
    for row in latents.rows() {
        let row = row.to_slice().expect("latents are row-major");
        g_pos.push(goodness(&layer.goodness, &row[..layer.n_pos])?);
        g_neg.push(if layer.is_ffa_mode() {
            F::zero()
        } else {
            goodness(&layer.goodness, &row[layer.n_pos..])?
        });
    }

    let mut trace = LayerTraceBatch {
        preactivations,
        latents,
        g_pos,
        g_neg,
        normalized: Array2::zeros((0, 0)),
    };
    trace.normalized = normalize_latent(layer, &trace)?;
    Ok(trace)
}

/// Divide each polarity block of every latent row by its goodness so the
/// recomputed goodness becomes 1.
///
/// The divisor is always the uninhibited, absolutely homogeneous variant of
/// the layer's goodness spec (squared L2 falls back to plain L2); blocks
/// whose divisor falls below [`NORM_EPSILON`] divide by the guard instead,
/// which keeps dead (all-zero) latents at zero rather than producing NaN.
pub fn normalize_latent<F: Real>(
    layer: &PolarLayer<F>,
    trace: &LayerTraceBatch<F>,
) -> Result<Array2<F>> {
    let divisor_spec = layer.goodness.normalization_divisor_spec();
    let eps = real::<F>(NORM_EPSILON);
    let mut normalized = trace.latents.clone();
    for mut row in normalized.rows_mut() {
        let row = row.as_slice_mut().expect("latents are row-major");
        let split = if layer.is_ffa_mode() {
            row.len()
        } else {
            layer.n_pos
        };
        let (pos, neg) = row.split_at_mut(split);
        for block in [pos, neg] {
            if block.is_empty() {
                continue;
            }
            let divisor = goodness(&divisor_spec, block)?.max(eps);
            for v in block.iter_mut() {
                *v = *v / divisor;
            }
        }
    }
    Ok(normalized)
}

/// Stack of polarized layers trained layer-locally.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<F> {
    pub layers: Vec<PolarLayer<F>>,
    pub input_dim: usize,
}

impl<F: Real> Network<F> {
    /// Build a homogeneous stack: every layer shares the activation,
    /// goodness and probability specs. In polar mode the split is
    /// `round(fraction · n)` clamped to `[1, n − 1]`; plain mode assigns
    /// every neuron to the positive block.
    #[allow(clippy::too_many_arguments)]
    pub fn with_uniform_layers(
        input_dim: usize,
        layer_sizes: &[usize],
        polarity_fraction: Option<f64>,
        activation: ActivationKind,
        goodness: GoodnessSpec,
        probability: ProbabilitySpec,
        rng: &mut Rng,
    ) -> Result<Self> {
        if layer_sizes.is_empty() {
            return Err(FfaError::InvalidArgument("network needs >= 1 layer".into()));
        }
        if let Some(f) = polarity_fraction {
            if !(0.0 < f && f < 1.0) {
                return Err(FfaError::InvalidArgument(format!(
                    "polarity fraction must lie in (0, 1), got {f}"
                )));
            }
        }
        let mut layers = Vec::with_capacity(layer_sizes.len());
        let mut width = input_dim;
        for &n in layer_sizes {
            let n_pos = match polarity_fraction {
                None => n,
                Some(f) => (((n as f64) * f).round() as usize).clamp(1, n - 1),
            };
            layers.push(init_layer(
                width,
                n,
                n_pos,
                activation,
                goodness,
                probability,
                rng,
            )?);
            width = n;
        }
        Ok(Network { layers, input_dim })
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }
}

/// Forward a batch through every layer. Layer 0 consumes the embedded input
/// directly; layer `i` consumes the normalized latent of layer `i − 1`.
pub fn network_forward<F: Real>(
    net: &Network<F>,
    input: ArrayView2<'_, F>,
) -> Result<Vec<LayerTraceBatch<F>>> {
    if input.ncols() != net.input_dim {
        return Err(FfaError::DimensionMismatch(format!(
            "input width {} but network expects {}",
            input.ncols(),
            net.input_dim
        )));
    }
    let mut traces = Vec::with_capacity(net.layers.len());
    for (i, layer) in net.layers.iter().enumerate() {
        let trace = if i == 0 {
            layer_forward(layer, input)?
        } else {
            let prev: &LayerTraceBatch<F> = &traces[i - 1];
            layer_forward(layer, prev.normalized.view())?
        };
        traces.push(trace);
    }
    Ok(traces)
}
