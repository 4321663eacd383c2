//! Versioned binary network checkpoints.
//!
//! Weights and Adam moments are stored as little-endian `f64`, so a
//! save/load cycle is bit-exact for both `f32` and `f64` networks.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array2;

use super::{AdamState, Network, PolarLayer};
use crate::error::{FfaError, Result};
use crate::functions::{ActivationKind, Aggregation, GoodnessSpec, Inhibition, NormKind, ProbabilitySpec};
use crate::Real;

const MAGIC: &[u8; 4] = b"PFCK";
const VERSION: u32 = 1;

fn format_err(path: &Path, detail: impl Into<String>) -> FfaError {
    FfaError::CheckpointFormat {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

pub fn save_checkpoint<F: Real>(net: &Network<F>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| FfaError::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| FfaError::io(path.display().to_string(), e);

    w.write_all(MAGIC).map_err(io_err)?;
    w.write_u32::<LittleEndian>(VERSION).map_err(io_err)?;
    w.write_u64::<LittleEndian>(net.input_dim as u64).map_err(io_err)?;
    w.write_u64::<LittleEndian>(net.layers.len() as u64).map_err(io_err)?;
    for layer in &net.layers {
        w.write_u64::<LittleEndian>(layer.size() as u64).map_err(io_err)?;
        w.write_u64::<LittleEndian>(layer.input_dim() as u64).map_err(io_err)?;
        w.write_u64::<LittleEndian>(layer.n_pos as u64).map_err(io_err)?;
        w.write_u8(activation_code(layer.activation)).map_err(io_err)?;
        w.write_u8(norm_code(layer.goodness.norm)).map_err(io_err)?;
        w.write_u8(aggregation_code(layer.goodness.aggregation)).map_err(io_err)?;
        let (inh, k) = match layer.goodness.inhibition {
            Inhibition::None => (0u8, 0u64),
            Inhibition::Wta(k) => (1u8, k as u64),
        };
        w.write_u8(inh).map_err(io_err)?;
        w.write_u64::<LittleEndian>(k).map_err(io_err)?;
        let (kind, p1, p2) = match layer.probability {
            ProbabilitySpec::FfaSigmoid { theta, alpha } => (0u8, theta, alpha),
            ProbabilitySpec::PolarSigmoid { theta, alpha } => (1u8, theta, alpha),
            ProbabilitySpec::Symmetric { epsilon } => (2u8, epsilon, 0.0),
        };
        w.write_u8(kind).map_err(io_err)?;
        w.write_f64::<LittleEndian>(p1).map_err(io_err)?;
        w.write_f64::<LittleEndian>(p2).map_err(io_err)?;
        w.write_u64::<LittleEndian>(layer.adam.step).map_err(io_err)?;
        for matrix in [&layer.weights, &layer.adam.m, &layer.adam.v] {
            for &v in matrix.iter() {
                w.write_f64::<LittleEndian>(v.to_f64().unwrap()).map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(io_err)
}

pub fn load_checkpoint<F: Real>(path: impl AsRef<Path>) -> Result<Network<F>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| FfaError::io(path.display().to_string(), e))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| format_err(path, "file shorter than header"))?;
    if &magic != MAGIC {
        return Err(format_err(path, format!("bad magic {magic:?}")));
    }
    let version = r
        .read_u32::<LittleEndian>()
        .map_err(|_| format_err(path, "missing version"))?;
    if version != VERSION {
        return Err(format_err(path, format!("unsupported version {version}")));
    }
    let read_u64 = |r: &mut BufReader<File>, what: &str| {
        r.read_u64::<LittleEndian>()
            .map_err(|_| format_err(path, format!("file ended while reading {what}")))
    };
    let input_dim = read_u64(&mut r, "input_dim")? as usize;
    let num_layers = read_u64(&mut r, "layer count")? as usize;
    let mut layers = Vec::with_capacity(num_layers);
    for i in 0..num_layers {
        let n = read_u64(&mut r, "layer size")? as usize;
        let m = read_u64(&mut r, "layer input dim")? as usize;
        let n_pos = read_u64(&mut r, "polarity split")? as usize;
        if n == 0 || m == 0 || n_pos == 0 || n_pos > n {
            return Err(format_err(path, format!("invalid layer {i} geometry")));
        }
        let activation = decode_activation(r.read_u8().map_err(|_| format_err(path, "activation"))?)
            .ok_or_else(|| format_err(path, "unknown activation code"))?;
        let norm = decode_norm(r.read_u8().map_err(|_| format_err(path, "norm"))?)
            .ok_or_else(|| format_err(path, "unknown norm code"))?;
        let aggregation = decode_aggregation(r.read_u8().map_err(|_| format_err(path, "aggregation"))?)
            .ok_or_else(|| format_err(path, "unknown aggregation code"))?;
        let inh_code = r.read_u8().map_err(|_| format_err(path, "inhibition"))?;
        let k = read_u64(&mut r, "inhibition k")? as usize;
        let inhibition = match inh_code {
            0 => Inhibition::None,
            1 if k >= 1 => Inhibition::Wta(k),
            _ => return Err(format_err(path, "invalid inhibition")),
        };
        let prob_code = r.read_u8().map_err(|_| format_err(path, "probability"))?;
        let p1 = r
            .read_f64::<LittleEndian>()
            .map_err(|_| format_err(path, "probability parameter"))?;
        let p2 = r
            .read_f64::<LittleEndian>()
            .map_err(|_| format_err(path, "probability parameter"))?;
        let probability = match prob_code {
            0 => ProbabilitySpec::FfaSigmoid { theta: p1, alpha: p2 },
            1 => ProbabilitySpec::PolarSigmoid { theta: p1, alpha: p2 },
            2 => ProbabilitySpec::Symmetric { epsilon: p1 },
            _ => return Err(format_err(path, "unknown probability code")),
        };
        let step = read_u64(&mut r, "adam step")?;
        let mut read_matrix = |what: &str| -> Result<Array2<F>> {
            let mut values = Vec::with_capacity(n * m);
            for _ in 0..n * m {
                let v = r
                    .read_f64::<LittleEndian>()
                    .map_err(|_| format_err(path, format!("file ended while reading {what}")))?;
                values.push(F::from_f64(v).ok_or_else(|| {
                    format_err(path, format!("value {v} not representable in scalar type"))
                })?);
            }
            Array2::from_shape_vec((n, m), values).map_err(|e| format_err(path, e.to_string()))
        };
        let weights = read_matrix("weights")?;
        let adam_m = read_matrix("adam first moment")?;
        let adam_v = read_matrix("adam second moment")?;
        layers.push(PolarLayer {
            weights,
            n_pos,
            activation,
            goodness: GoodnessSpec::new(norm, aggregation, inhibition),
            probability,
            adam: AdamState {
                m: adam_m,
                v: adam_v,
                step,
            },
        });
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(|e| FfaError::io(path.display().to_string(), e))? != 0 {
        return Err(format_err(path, "trailing bytes after last layer"));
    }
    let net = Network { layers, input_dim };
    for (i, pair) in net.layers.windows(2).enumerate() {
        if pair[1].input_dim() != pair[0].size() {
            return Err(format_err(path, format!("layer {} input dim mismatch", i + 1)));
        }
    }
    if let Some(first) = net.layers.first() {
        if first.input_dim() != input_dim {
            return Err(format_err(path, "first layer input dim mismatch"));
        }
    }
    Ok(net)
}

fn activation_code(a: ActivationKind) -> u8 {
    match a {
        ActivationKind::ReLU => 0,
        ActivationKind::Sigmoid => 1,
        ActivationKind::Tanh => 2,
    }
}

fn decode_activation(code: u8) -> Option<ActivationKind> {
    match code {
        0 => Some(ActivationKind::ReLU),
        1 => Some(ActivationKind::Sigmoid),
        2 => Some(ActivationKind::Tanh),
        _ => None,
    }
}

fn norm_code(n: NormKind) -> u8 {
    match n {
        NormKind::L1 => 0,
        NormKind::L2 => 1,
        NormKind::L2Squared => 2,
    }
}

fn decode_norm(code: u8) -> Option<NormKind> {
    match code {
        0 => Some(NormKind::L1),
        1 => Some(NormKind::L2),
        2 => Some(NormKind::L2Squared),
        _ => None,
    }
}

fn aggregation_code(a: Aggregation) -> u8 {
    match a {
        Aggregation::Sum => 0,
        Aggregation::Mean => 1,
    }
}

fn decode_aggregation(code: u8) -> Option<Aggregation> {
    match code {
        0 => Some(Aggregation::Sum),
        1 => Some(Aggregation::Mean),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn sample_network() -> Network<f64> {
        Network::with_uniform_layers(
            12,
            &[8, 8],
            Some(0.5),
            ActivationKind::Tanh,
            GoodnessSpec::new(NormKind::L2Squared, Aggregation::Mean, Inhibition::Wta(3)),
            ProbabilitySpec::Symmetric { epsilon: 1e-6 },
            &mut stream(21, "weights"),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let mut net = sample_network();
        net.layers[0].adam.step = 17;
        net.layers[0].adam.m.fill(0.125);
        save_checkpoint(&net, &path).unwrap();
        let loaded: Network<f64> = load_checkpoint(&path).unwrap();
        assert_eq!(net, loaded);

        // Saving the loaded network reproduces the file byte for byte.
        let path2 = dir.path().join("net2.ckpt");
        save_checkpoint(&loaded, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn f32_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net32.ckpt");
        let net: Network<f32> = Network::with_uniform_layers(
            4,
            &[6],
            Some(0.5),
            ActivationKind::ReLU,
            GoodnessSpec::new(NormKind::L2, Aggregation::Sum, Inhibition::None),
            ProbabilitySpec::polar_sigmoid_default(),
            &mut stream(3, "weights"),
        )
        .unwrap();
        save_checkpoint(&net, &path).unwrap();
        let loaded: Network<f32> = load_checkpoint(&path).unwrap();
        assert_eq!(net, loaded);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(&path, b"not a checkpoint at all").unwrap();
        let err = load_checkpoint::<f64>(&path).unwrap_err();
        assert!(matches!(err, FfaError::CheckpointFormat { .. }));

        let truncated = dir.path().join("short.ckpt");
        let net = sample_network();
        save_checkpoint(&net, &truncated).unwrap();
        let bytes = std::fs::read(&truncated).unwrap();
        std::fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
        let err = load_checkpoint::<f64>(&truncated).unwrap_err();
        assert!(matches!(err, FfaError::CheckpointFormat { .. }));
    }
}
