//! Binary model checkpoints.
//!
//! All values little-endian:
//!
//! ```text
//! magic "HQNC", u16 version
//! u32 name length, UTF-8 dataset name
//! u64 N_f, u64 N_c, u64 N_q, f64 t, u64 N_S, u64 seed
//! f64 J
//! f64 learning rate, beta1, beta2, epsilon, u8 schedule (0 constant, 1 cosine)
//! u64 batch size, pairs per epoch, epochs
//! f64 same-class fraction, u64 swap-test shots, f64 output-layer init gain,
//! u8 pairs resampled
//! u32 layer count, then per layer u64 outputs, u64 inputs
//! per layer: weights (row-major), bias, Adam first-moment weights and bias,
//!   Adam second-moment weights and bias, all f64
//! u64 Adam step
//! u64 observable count (0 or N_c), then N_S states per class, each as
//!   2^N_q interleaved (re, im) f64 pairs
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::encoder::{AdamState, DenseLayer, EncoderParams, LrSchedule, TrainConfig};
use crate::error::{Error, Result};
use crate::pipeline::{ClassObservable, ModelMetadata, TrainedModel};
use crate::quantum::{FieldVector, IsingSpec, StateVector, MAX_QUBITS};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"HQNC";
pub const CHECKPOINT_VERSION: u16 = 1;

/// Upper bound on any single length field, to reject corrupt headers before
/// allocating.
const MAX_LEN: u64 = 1 << 32;

fn write_f64s<W: Write>(w: &mut W, values: impl IntoIterator<Item = f64>) -> io::Result<()> {
    for v in values {
        w.write_f64::<LE>(v)?;
    }
    Ok(())
}

fn write_layer_values<W: Write>(w: &mut W, layer: &DenseLayer) -> io::Result<()> {
    write_f64s(w, layer.weights.transpose().iter().copied())?;
    write_f64s(w, layer.bias.iter().copied())
}

pub fn write_model<W: Write>(model: &TrainedModel, w: &mut W) -> Result<()> {
    let meta = &model.metadata;
    let config = &meta.config;
    let spec = &model.spec_template;
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_u16::<LE>(CHECKPOINT_VERSION)?;
    w.write_u32::<LE>(meta.dataset.len() as u32)?;
    w.write_all(meta.dataset.as_bytes())?;
    for v in [meta.n_features, meta.n_classes, spec.n_qubits()] {
        w.write_u64::<LE>(v as u64)?;
    }
    w.write_f64::<LE>(spec.time())?;
    w.write_u64::<LE>(meta.n_samples as u64)?;
    w.write_u64::<LE>(meta.seed)?;
    w.write_f64::<LE>(spec.coupling())?;
    write_f64s(w, [config.learning_rate, config.beta1, config.beta2, config.epsilon])?;
    w.write_u8(config.lr_schedule as u8)?;
    for v in [config.batch_size, config.n_pairs, config.epochs] {
        w.write_u64::<LE>(v as u64)?;
    }
    w.write_f64::<LE>(config.same_class_fraction)?;
    w.write_u64::<LE>(config.swap_shots)?;
    w.write_f64::<LE>(config.output_gain)?;
    w.write_u8(meta.resampled_pairs as u8)?;

    let enc = &model.encoder;
    w.write_u32::<LE>(enc.layers.len() as u32)?;
    for layer in &enc.layers {
        w.write_u64::<LE>(layer.outputs() as u64)?;
        w.write_u64::<LE>(layer.inputs() as u64)?;
    }
    for k in 0..enc.layers.len() {
        write_layer_values(w, &enc.layers[k])?;
        write_layer_values(w, &enc.adam.first[k])?;
        write_layer_values(w, &enc.adam.second[k])?;
    }
    w.write_u64::<LE>(enc.adam.step)?;

    w.write_u64::<LE>(model.observables.len() as u64)?;
    for obs in &model.observables {
        if obs.reference_states.len() != meta.n_samples {
            return Err(Error::InvalidArgument(format!(
                "class {} has {} reference states, metadata says {}",
                obs.class_id,
                obs.reference_states.len(),
                meta.n_samples
            )));
        }
        for psi in &obs.reference_states {
            write_f64s(w, psi.amplitudes().iter().flat_map(|a| [a.re, a.im]))?;
        }
    }
    Ok(())
}

/// Maps an unexpected end of input to a short-read error.
fn short<T>(r: io::Result<T>, what: &str) -> Result<T> {
    r.map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            Error::Truncated(format!("checkpoint ended inside {what}"))
        } else {
            Error::Io(e)
        }
    })
}

fn read_len<R: Read>(r: &mut R, what: &str) -> Result<usize> {
    let v = short(r.read_u64::<LE>(), what)?;
    if v > MAX_LEN {
        return Err(Error::Corrupt(format!("{what} = {v}")));
    }
    Ok(v as usize)
}

fn read_f64s<R: Read>(r: &mut R, n: usize, what: &str) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; n * 8];
    short(r.read_exact(&mut bytes), what)?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

fn read_layer_values<R: Read>(r: &mut R, outputs: usize, inputs: usize) -> Result<DenseLayer> {
    let weights = DMatrix::from_row_slice(outputs, inputs, &read_f64s(r, outputs * inputs, "layer weights")?);
    let bias = DVector::from_vec(read_f64s(r, outputs, "layer bias")?);
    Ok(DenseLayer { weights, bias })
}

pub fn read_model<R: Read>(r: &mut R) -> Result<TrainedModel> {
    let mut magic = [0u8; 4];
    short(r.read_exact(&mut magic), "magic")?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic {
            expected: u32::from_le_bytes(*CHECKPOINT_MAGIC),
            found: u32::from_le_bytes(magic),
        });
    }
    let version = short(r.read_u16::<LE>(), "version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let name_len = short(r.read_u32::<LE>(), "name length")? as usize;
    if name_len as u64 > MAX_LEN / 16 {
        return Err(Error::Corrupt(format!("name length {name_len}")));
    }
    let mut name = vec![0u8; name_len];
    short(r.read_exact(&mut name), "dataset name")?;
    let dataset = String::from_utf8(name).map_err(|_| Error::Corrupt("dataset name is not UTF-8".into()))?;
    let n_features = read_len(r, "N_f")?;
    let n_classes = read_len(r, "N_c")?;
    let n_qubits = read_len(r, "N_q")?;
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Corrupt(format!("N_q = {n_qubits}")));
    }
    let time = short(r.read_f64::<LE>(), "time")?;
    let n_samples = read_len(r, "N_S")?;
    let seed = short(r.read_u64::<LE>(), "seed")?;
    let coupling = short(r.read_f64::<LE>(), "coupling")?;
    let opt = read_f64s(r, 4, "optimizer settings")?;
    let schedule = short(r.read_u8(), "schedule")?;
    let lr_schedule = LrSchedule::from_byte(schedule).ok_or_else(|| Error::Corrupt(format!("schedule {schedule}")))?;
    let batch_size = read_len(r, "batch size")?;
    let n_pairs = read_len(r, "pair count")?;
    let epochs = read_len(r, "epochs")?;
    let same_class_fraction = short(r.read_f64::<LE>(), "same-class fraction")?;
    let swap_shots = short(r.read_u64::<LE>(), "swap shots")?;
    let output_gain = short(r.read_f64::<LE>(), "output gain")?;
    let resampled_pairs = match short(r.read_u8(), "resampling flag")? {
        0 => false,
        1 => true,
        other => return Err(Error::Corrupt(format!("resampling flag {other}"))),
    };

    let n_layers = short(r.read_u32::<LE>(), "layer count")? as usize;
    if n_layers == 0 || n_layers > 5 {
        return Err(Error::Corrupt(format!("{n_layers} layers")));
    }
    let mut shapes = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        shapes.push((read_len(r, "layer outputs")?, read_len(r, "layer inputs")?));
    }
    let chained = shapes.windows(2).all(|w| w[0].0 == w[1].1);
    if !chained || shapes[0].1 != n_features || shapes[n_layers - 1].0 != n_qubits {
        return Err(Error::Corrupt(format!("layer shapes {shapes:?}")));
    }
    let (mut layers, mut first, mut second) = (Vec::new(), Vec::new(), Vec::new());
    for &(outputs, inputs) in &shapes {
        layers.push(read_layer_values(r, outputs, inputs)?);
        first.push(read_layer_values(r, outputs, inputs)?);
        second.push(read_layer_values(r, outputs, inputs)?);
    }
    let step = short(r.read_u64::<LE>(), "Adam step")?;
    let hidden = shapes[..n_layers - 1].iter().map(|s| s.0).collect();
    let encoder = EncoderParams { layers, adam: AdamState { first, second, step } };

    let n_observables = read_len(r, "observable count")?;
    if n_observables != 0 && n_observables != n_classes {
        return Err(Error::Corrupt(format!("{n_observables} observables for {n_classes} classes")));
    }
    let dim = 1usize << n_qubits;
    let mut observables = Vec::with_capacity(n_observables);
    for class_id in 0..n_observables {
        let mut reference_states = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            let raw = read_f64s(r, 2 * dim, "reference state")?;
            let amps = raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
            reference_states.push(StateVector::new(amps)?);
        }
        observables.push(ClassObservable { class_id, reference_states });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Corrupt("trailing bytes after checkpoint".into()));
    }

    let spec_template = IsingSpec::new(coupling, FieldVector::zeros(n_qubits), time)
        .map_err(|e| Error::Corrupt(format!("Hamiltonian settings: {e}")))?;
    let config = TrainConfig {
        learning_rate: opt[0],
        lr_schedule,
        beta1: opt[1],
        beta2: opt[2],
        epsilon: opt[3],
        batch_size,
        n_pairs,
        epochs,
        seed,
        hidden,
        same_class_fraction,
        swap_shots,
        output_gain,
    };
    let metadata = ModelMetadata { dataset, n_features, n_classes, n_samples, seed, config, resampled_pairs };
    Ok(TrainedModel { encoder, spec_template, observables, metadata })
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_model(model, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    read_model(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::init_encoder_with;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(with_observables: bool) -> TrainedModel {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut encoder = init_encoder_with(5, &[3], 2, 9);
        encoder.adam.step = 17;
        encoder.adam.first[0].weights[(1, 2)] = -0.25;
        encoder.adam.second[1].bias[0] = 1e-300;
        let observables = if with_observables {
            (0..3)
                .map(|class_id| ClassObservable {
                    class_id,
                    reference_states: (0..2).map(|_| StateVector::random(2, &mut rng).unwrap()).collect(),
                })
                .collect()
        } else {
            Vec::new()
        };
        let config = TrainConfig { seed: 11, hidden: vec![3], swap_shots: 7, ..TrainConfig::default() };
        TrainedModel {
            encoder,
            spec_template: IsingSpec::new(1.0, FieldVector::zeros(2), 4.0).unwrap(),
            observables,
            metadata: ModelMetadata {
                dataset: "mnist-é".into(),
                n_features: 5,
                n_classes: 3,
                n_samples: if with_observables { 2 } else { 0 },
                seed: 11,
                config,
                resampled_pairs: true,
            },
        }
    }

    fn bytes(m: &TrainedModel) -> Vec<u8> {
        let mut out = Vec::new();
        write_model(m, &mut out).unwrap();
        out
    }

    #[test]
    fn round_trip_is_exact() {
        for with_obs in [false, true] {
            let m = model(with_obs);
            let b = bytes(&m);
            let back = read_model(&mut b.as_slice()).unwrap();
            assert_eq!(back, m);
            assert_eq!(bytes(&back), b);
        }
    }

    #[test]
    fn rejects_damage() {
        let b = bytes(&model(true));
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(matches!(read_model(&mut bad.as_slice()), Err(Error::BadMagic { .. })));
        let mut bad = b.clone();
        bad[4] = 9;
        assert!(matches!(read_model(&mut bad.as_slice()), Err(Error::UnsupportedVersion(9))));
        for cut in [3, 20, b.len() / 2, b.len() - 1] {
            assert!(matches!(read_model(&mut &b[..cut]), Err(Error::Truncated(_))), "cut at {cut}");
        }
        let mut long = b.clone();
        long.push(0);
        assert!(matches!(read_model(&mut long.as_slice()), Err(Error::Corrupt(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.hqnc");
        let m = model(true);
        save_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
    }
}
