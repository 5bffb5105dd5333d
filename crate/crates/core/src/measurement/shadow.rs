//! Classical shadows from randomized single-qubit Pauli measurements.
//!
//! Each snapshot picks an independent basis per qubit, rotates the state so
//! that the chosen Pauli becomes `σz`, and reads out all qubits in the
//! computational basis. Inverting the measurement channel gives the unbiased
//! single-shot estimator
//!
//! ```text
//! ρ̂ = ⊗_n (3 U_n† |b_n⟩⟨b_n| U_n − 𝟙)
//! ```
//!
//! with `U_X = H`, `U_Y = H S†` and `U_Z = 𝟙`.
//!
//! # Binary format
//!
//! Little-endian: the magic bytes `SHDW`, a `u16` version (1), a `u16` qubit
//! count and a `u64` snapshot count, followed by each snapshot as one basis
//! byte per qubit (`0 = X`, `1 = Y`, `2 = Z`) and `ceil(n/8)` outcome bytes.
//! Qubit `i`'s outcome is bit `i % 8` of outcome byte `i / 8`.

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{self, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quantum::{site_mask, StateVector};

type Mat2 = [[C64; 2]; 2];

const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ROTATE_X: Mat2 = [[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]];
const ROTATE_Y: Mat2 = [[c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)], [c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]];
const ROTATE_Z: Mat2 = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];

const SHADOW_MAGIC: &[u8; 4] = b"SHDW";
const SHADOW_VERSION: u16 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum PauliBasis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl PauliBasis {
    pub const ALL: [PauliBasis; 3] = [PauliBasis::X, PauliBasis::Y, PauliBasis::Z];

    /// Unitary applied before a computational-basis readout.
    pub fn rotation(self) -> Mat2 {
        match self {
            PauliBasis::X => ROTATE_X,
            PauliBasis::Y => ROTATE_Y,
            PauliBasis::Z => ROTATE_Z,
        }
    }

    fn from_byte(b: u8) -> Option<Self> {
        Self::ALL.get(b as usize).copied()
    }
}

/// One randomized measurement: a basis and an outcome bit per qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShadowSnapshot {
    pub bases: Vec<PauliBasis>,
    pub outcomes: Vec<bool>,
}

impl ShadowSnapshot {
    fn key(&self) -> (usize, usize) {
        let n = self.bases.len();
        let config = self.bases.iter().fold(0usize, |acc, &b| acc * 3 + b as usize);
        let outcome = (0..n).filter(|&i| self.outcomes[i]).map(|i| site_mask(n, i)).sum();
        (config, outcome)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowSet {
    snapshots: Vec<ShadowSnapshot>,
    n_qubits: usize,
}

impl ShadowSet {
    pub fn new(n_qubits: usize, snapshots: Vec<ShadowSnapshot>) -> Result<Self> {
        if let Some(bad) = snapshots.iter().find(|s| s.bases.len() != n_qubits || s.outcomes.len() != n_qubits) {
            return Err(Error::DimensionMismatch { expected: n_qubits, found: bad.bases.len().max(bad.outcomes.len()) });
        }
        Ok(Self { snapshots, n_qubits })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Snapshot count `M`.
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[ShadowSnapshot] {
        &self.snapshots
    }

    /// Multiplicity of every distinct (bases, outcomes) pair.
    fn histogram(&self) -> Vec<(&ShadowSnapshot, usize)> {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut out: Vec<(&ShadowSnapshot, usize)> = Vec::new();
        for s in &self.snapshots {
            let slot = *index.entry(s.key()).or_insert_with(|| {
                out.push((s, 0));
                out.len() - 1
            });
            out[slot].1 += 1;
        }
        out
    }

    /// `(1/M) Σ_m ρ̂^{(m)}`, the averaged snapshot density matrix.
    pub fn density_estimate(&self) -> Result<DMatrix<C64>> {
        if self.is_empty() {
            return Err(Error::Empty("shadow set"));
        }
        let dim = 1 << self.n_qubits;
        let mut rho = DMatrix::zeros(dim, dim);
        let weight = 1.0 / self.len() as f64;
        for (snapshot, count) in self.histogram() {
            rho += snapshot_matrix(snapshot) * c(weight * count as f64, 0.0);
        }
        Ok(rho)
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(SHADOW_MAGIC)?;
        w.write_u16::<LittleEndian>(SHADOW_VERSION)?;
        w.write_u16::<LittleEndian>(self.n_qubits as u16)?;
        w.write_u64::<LittleEndian>(self.len() as u64)?;
        let n_bytes = self.n_qubits.div_ceil(8);
        for s in &self.snapshots {
            let bases: Vec<u8> = s.bases.iter().map(|&b| b as u8).collect();
            w.write_all(&bases)?;
            let mut bits = vec![0u8; n_bytes];
            for (i, &o) in s.outcomes.iter().enumerate() {
                if o {
                    bits[i / 8] |= 1 << (i % 8);
                }
            }
            w.write_all(&bits)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let truncated = |e: io::Error| match e.kind() {
            io::ErrorKind::UnexpectedEof => Error::Truncated("shadow set".into()),
            _ => Error::Io(e),
        };
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != SHADOW_MAGIC {
            return Err(Error::BadMagic { expected: u32::from_be_bytes(*SHADOW_MAGIC), found: u32::from_be_bytes(magic) });
        }
        let version = r.read_u16::<LittleEndian>().map_err(truncated)?;
        if version != SHADOW_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let n_qubits = r.read_u16::<LittleEndian>().map_err(truncated)? as usize;
        if n_qubits == 0 || n_qubits > crate::quantum::MAX_QUBITS {
            return Err(Error::Corrupt(format!("qubit count {n_qubits}")));
        }
        let m = r.read_u64::<LittleEndian>().map_err(truncated)?;
        let n_bytes = n_qubits.div_ceil(8);
        let mut snapshots = Vec::with_capacity(m.min(1 << 20) as usize);
        let mut bases_buf = vec![0u8; n_qubits];
        let mut bits_buf = vec![0u8; n_bytes];
        for _ in 0..m {
            r.read_exact(&mut bases_buf).map_err(truncated)?;
            r.read_exact(&mut bits_buf).map_err(truncated)?;
            let bases = bases_buf
                .iter()
                .map(|&b| PauliBasis::from_byte(b).ok_or_else(|| Error::Corrupt(format!("basis byte {b}"))))
                .collect::<Result<Vec<_>>>()?;
            let outcomes = (0..n_qubits).map(|i| bits_buf[i / 8] & (1 << (i % 8)) != 0).collect();
            snapshots.push(ShadowSnapshot { bases, outcomes });
        }
        Ok(Self { snapshots, n_qubits })
    }
}

/// Applies a 2×2 operator to qubit `site` of `amps` in place.
fn apply_site(amps: &mut [C64], n_qubits: usize, site: usize, m: &Mat2) {
    let mask = site_mask(n_qubits, site);
    for i0 in (0..amps.len()).filter(|i| i & mask == 0) {
        let i1 = i0 | mask;
        let (a0, a1) = (amps[i0], amps[i1]);
        amps[i0] = m[0][0] * a0 + m[0][1] * a1;
        amps[i1] = m[1][0] * a0 + m[1][1] * a1;
    }
}

/// `3 U†|b⟩⟨b|U − 𝟙` for one qubit.
pub fn snapshot_factor(basis: PauliBasis, outcome: bool) -> Mat2 {
    let u = basis.rotation();
    let b = outcome as usize;
    // U†|b⟩ is the conjugated row b of U
    let v = [u[b][0].conj(), u[b][1].conj()];
    let mut f = [[c(0.0, 0.0); 2]; 2];
    for (r, row) in f.iter_mut().enumerate() {
        for (col, entry) in row.iter_mut().enumerate() {
            *entry = v[r] * v[col].conj() * 3.0 - if r == col { c(1.0, 0.0) } else { c(0.0, 0.0) };
        }
    }
    f
}

/// Dense `ρ̂` of one snapshot (site 0 is the leftmost tensor factor).
pub fn snapshot_matrix(snapshot: &ShadowSnapshot) -> DMatrix<C64> {
    snapshot
        .bases
        .iter()
        .zip(&snapshot.outcomes)
        .map(|(&b, &o)| {
            let f = snapshot_factor(b, o);
            DMatrix::from_row_slice(2, 2, &[f[0][0], f[0][1], f[1][0], f[1][1]])
        })
        .reduce(|acc, f| acc.kronecker(&f))
        .expect("at least one qubit")
}

/// Readout distribution of `psi` after rotating each qubit into `bases`.
fn outcome_probabilities(psi: &StateVector, bases: &[PauliBasis]) -> Vec<f64> {
    let n = psi.n_qubits();
    let mut amps: Vec<C64> = psi.amplitudes().iter().copied().collect();
    for (site, &b) in bases.iter().enumerate() {
        if b != PauliBasis::Z {
            apply_site(&mut amps, n, site, &b.rotation());
        }
    }
    amps.iter().map(|a| a.norm_sqr()).collect()
}

fn bases_from_config(n: usize, mut config: usize) -> Vec<PauliBasis> {
    let mut bases = vec![PauliBasis::Z; n];
    for slot in bases.iter_mut().rev() {
        *slot = PauliBasis::ALL[config % 3];
        config /= 3;
    }
    bases
}

/// Draws `m` snapshots of `psi`.
///
/// A key drawn from `rng` seeds a counter-based generator; snapshot `k` uses
/// stream `k` of that generator, so results do not depend on evaluation order.
pub fn sample_shadow<R: Rng + ?Sized>(psi: &StateVector, m: usize, rng: &mut R) -> Result<ShadowSet> {
    if (psi.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(psi.norm().powi(2)));
    }
    let n = psi.n_qubits();
    let key: [u8; 32] = rng.random();
    let mut cdf_cache: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut snapshots = Vec::with_capacity(m);
    for k in 0..m {
        let mut stream = ChaCha8Rng::from_seed(key);
        stream.set_stream(k as u64);
        let bases: Vec<PauliBasis> = (0..n).map(|_| PauliBasis::ALL[stream.random_range(0..3)]).collect();
        let config = bases.iter().fold(0usize, |acc, &b| acc * 3 + b as usize);
        let cdf = cdf_cache.entry(config).or_insert_with(|| {
            let mut acc = 0.0;
            outcome_probabilities(psi, &bases)
                .into_iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect()
        });
        let u: f64 = stream.random::<f64>() * cdf[cdf.len() - 1];
        let index = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        let outcomes = (0..n).map(|site| index & site_mask(n, site) != 0).collect();
        snapshots.push(ShadowSnapshot { bases, outcomes });
    }
    Ok(ShadowSet { snapshots, n_qubits: n })
}

/// Exact average of the snapshot estimator over every basis choice and
/// outcome, weighted by the Born rule. Equals `|ψ⟩⟨ψ|` when the channel
/// inversion is correct.
pub fn channel_average(psi: &StateVector) -> DMatrix<C64> {
    let n = psi.n_qubits();
    let dim = psi.dim();
    let configs = 3usize.pow(n as u32);
    let mut total = DMatrix::zeros(dim, dim);
    for config in 0..configs {
        let bases = bases_from_config(n, config);
        for (index, p) in outcome_probabilities(psi, &bases).into_iter().enumerate() {
            let outcomes = (0..n).map(|site| index & site_mask(n, site) != 0).collect();
            let snapshot = ShadowSnapshot { bases: bases.clone(), outcomes };
            total += snapshot_matrix(&snapshot) * c(p / configs as f64, 0.0);
        }
    }
    total
}

fn check_references(shadows: &ShadowSet, references: &[StateVector]) -> Result<()> {
    if shadows.is_empty() {
        return Err(Error::Empty("shadow set"));
    }
    if references.is_empty() {
        return Err(Error::Empty("reference states"));
    }
    let dim = 1usize << shadows.n_qubits;
    if let Some(bad) = references.iter().find(|r| r.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.dim() });
    }
    Ok(())
}

/// `(1/N_S) Σ_k ⟨Ψ_k| ρ̂ |Ψ_k⟩` for one snapshot, applying the 2×2 factors
/// to each reference state.
fn snapshot_value(snapshot: &ShadowSnapshot, references: &[StateVector]) -> f64 {
    let factors: Vec<Mat2> = snapshot.bases.iter().zip(&snapshot.outcomes).map(|(&b, &o)| snapshot_factor(b, o)).collect();
    let mut total = 0.0;
    for psi in references {
        let n = psi.n_qubits();
        let mut amps: Vec<C64> = psi.amplitudes().iter().copied().collect();
        for (site, f) in factors.iter().enumerate() {
            apply_site(&mut amps, n, site, f);
        }
        total += psi.amplitudes().iter().zip(&amps).map(|(a, b)| a.conj() * b).sum::<C64>().re;
    }
    total / references.len() as f64
}

/// Mean of `Tr(ρ̂^{(m)} O)` over snapshots with `O` the mean projector onto
/// `references`, evaluated snapshot by snapshot.
pub fn estimate_observable_direct(shadows: &ShadowSet, references: &[StateVector]) -> Result<f64> {
    check_references(shadows, references)?;
    let total: f64 = shadows
        .histogram()
        .into_iter()
        .map(|(s, count)| count as f64 * snapshot_value(s, references))
        .sum();
    Ok(total / shadows.len() as f64)
}

/// `(1/M) Σ_m Tr(ρ̂^{(m)} O)` with `O = (1/N_S) Σ_k |Ψ_k⟩⟨Ψ_k|`.
///
/// The raw mean is returned; finite-`M` estimates may fall outside `[0, 1]`.
/// Dispatches between per-snapshot evaluation and contraction with the
/// averaged density matrix, whichever is cheaper; both compute the same sum.
pub fn estimate_observable(shadows: &ShadowSet, references: &[StateVector]) -> Result<f64> {
    check_references(shadows, references)?;
    let n = shadows.n_qubits;
    let dim = 1usize << n;
    let distinct = shadows.histogram().len();
    let direct_cost = distinct * references.len() * n * dim;
    let dense_cost = (distinct * n + references.len()) * dim * dim;
    if direct_cost <= dense_cost {
        return estimate_observable_direct(shadows, references);
    }
    let rho = shadows.density_estimate()?;
    let total: f64 = references
        .iter()
        .map(|psi| {
            let v = psi.amplitudes();
            (v.adjoint() * &rho * v)[(0, 0)].re
        })
        .sum();
    Ok(total / references.len() as f64)
}

/// Shadow estimate with the standard error implied by the spread of the
/// single-snapshot values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShadowEstimate {
    pub mean: f64,
    pub std_error: f64,
}

pub fn estimate_with_error(shadows: &ShadowSet, references: &[StateVector]) -> Result<ShadowEstimate> {
    check_references(shadows, references)?;
    let m = shadows.len() as f64;
    let values: Vec<(f64, f64)> = shadows
        .histogram()
        .into_iter()
        .map(|(s, count)| (snapshot_value(s, references), count as f64))
        .collect();
    let mean = values.iter().map(|(v, w)| v * w).sum::<f64>() / m;
    let var = if m > 1.0 {
        values.iter().map(|(v, w)| w * (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Ok(ShadowEstimate { mean, std_error: (var / m).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::max_abs;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn projector(psi: &StateVector) -> DMatrix<C64> {
        psi.amplitudes() * psi.amplitudes().adjoint()
    }

    fn one_qubit(bases: PauliBasis, psi: &StateVector, draws: usize) -> f64 {
        // fraction of outcome 0 when measuring only in `bases`
        let probs = outcome_probabilities(psi, &[bases]);
        let mut r = rng(7);
        (0..draws).filter(|_| r.random::<f64>() < probs[0]).count() as f64 / draws as f64
    }

    #[test]
    fn z_readout_of_zero_is_deterministic() {
        let zero = StateVector::basis(1, 0).unwrap();
        assert_eq!(outcome_probabilities(&zero, &[PauliBasis::Z]), vec![1.0, 0.0]);
        assert_eq!(one_qubit(PauliBasis::Z, &zero, 100), 1.0);
    }

    #[test]
    fn x_readout_of_zero_is_uniform() {
        let zero = StateVector::basis(1, 0).unwrap();
        let p = outcome_probabilities(&zero, &[PauliBasis::X]);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let y = outcome_probabilities(&zero, &[PauliBasis::Y]);
        assert!((y[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn plus_state_in_x_basis_reads_zero() {
        let plus = StateVector::normalized(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let p = outcome_probabilities(&plus, &[PauliBasis::X]);
        assert!((p[0] - 1.0).abs() < 1e-15);
        let plus_i = StateVector::normalized(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!((outcome_probabilities(&plus_i, &[PauliBasis::Y])[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn factors_have_unit_trace_and_spectrum_two_minus_one() {
        for b in PauliBasis::ALL {
            for o in [false, true] {
                let f = snapshot_factor(b, o);
                let tr = f[0][0] + f[1][1];
                assert!((tr - c(1.0, 0.0)).norm() < 1e-15);
                // eigenvalues of a 2×2 Hermitian from trace and determinant
                let det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
                assert!((det - c(-2.0, 0.0)).norm() < 1e-14);
                assert!((f[0][1] - f[1][0].conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn exhaustive_channel_zero_state() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let avg = channel_average(&zero);
        assert!(max_abs(&(&avg - projector(&zero))) < 1e-15);
        let on_zero = (zero.amplitudes().adjoint() * &avg * zero.amplitudes())[(0, 0)].re;
        let on_one = (one.amplitudes().adjoint() * &avg * one.amplitudes())[(0, 0)].re;
        assert!((on_zero - 1.0).abs() < 1e-15);
        assert!(on_one.abs() < 1e-15);
    }

    #[test]
    fn exhaustive_channel_reproduces_random_states() {
        let mut r = rng(31);
        for n in 1..=3 {
            for _ in 0..5 {
                let psi = StateVector::random(n, &mut r).unwrap();
                assert!(max_abs(&(channel_average(&psi) - projector(&psi))) < 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_reproducible_and_well_formed() {
        let psi = StateVector::random(3, &mut rng(1)).unwrap();
        let a = sample_shadow(&psi, 200, &mut rng(5)).unwrap();
        let b = sample_shadow(&psi, 200, &mut rng(5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
        assert!(a.snapshots().iter().all(|s| s.bases.len() == 3 && s.outcomes.len() == 3));
        // prefix property of per-snapshot streams
        let short = sample_shadow(&psi, 50, &mut rng(5)).unwrap();
        assert_eq!(short.snapshots(), &a.snapshots()[..50]);
    }

    #[test]
    fn routes_agree() {
        let mut r = rng(77);
        let psi = StateVector::random(2, &mut r).unwrap();
        let refs: Vec<StateVector> = (0..4).map(|_| StateVector::random(2, &mut r).unwrap()).collect();
        let shadows = sample_shadow(&psi, 3000, &mut r).unwrap();
        let direct = estimate_observable_direct(&shadows, &refs).unwrap();
        let rho = shadows.density_estimate().unwrap();
        let dense: f64 = refs
            .iter()
            .map(|v| (v.amplitudes().adjoint() * &rho * v.amplitudes())[(0, 0)].re)
            .sum::<f64>()
            / 4.0;
        assert!((direct - dense).abs() < 1e-12);
        assert!((estimate_observable(&shadows, &refs).unwrap() - direct).abs() < 1e-12);
        let with_err = estimate_with_error(&shadows, &refs).unwrap();
        assert!((with_err.mean - direct).abs() < 1e-12);
    }

    #[test]
    fn own_projector_estimate_is_near_one() {
        let mut r = rng(2024);
        let psi = StateVector::random(2, &mut r).unwrap();
        let shadows = sample_shadow(&psi, 5000, &mut r).unwrap();
        let est = estimate_with_error(&shadows, std::slice::from_ref(&psi)).unwrap();
        assert!((est.mean - 1.0).abs() < 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn estimation_errors() {
        let psi = StateVector::basis(2, 0).unwrap();
        let shadows = sample_shadow(&psi, 10, &mut rng(0)).unwrap();
        assert!(matches!(estimate_observable(&shadows, &[]), Err(Error::Empty(_))));
        let wrong = StateVector::basis(3, 0).unwrap();
        assert!(matches!(estimate_observable(&shadows, &[wrong]), Err(Error::DimensionMismatch { .. })));
        let empty = ShadowSet::new(2, vec![]).unwrap();
        assert!(matches!(estimate_observable(&empty, &[psi]), Err(Error::Empty(_))));
    }

    #[test]
    fn binary_round_trip_and_rejections() {
        let psi = StateVector::random(9, &mut rng(4)).unwrap();
        let shadows = sample_shadow(&psi, 64, &mut rng(8)).unwrap();
        let mut bytes = Vec::new();
        shadows.write_to(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 4 + 2 + 2 + 8 + 64 * (9 + 2));
        assert_eq!(&bytes[..4], b"SHDW");
        let back = ShadowSet::read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, shadows);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(ShadowSet::read_from(&mut bad.as_slice()), Err(Error::BadMagic { .. })));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(ShadowSet::read_from(&mut bad.as_slice()), Err(Error::UnsupportedVersion(9))));
        let mut bad = bytes.clone();
        bad[16] = 3;
        assert!(matches!(ShadowSet::read_from(&mut bad.as_slice()), Err(Error::Corrupt(_))));
        assert!(matches!(ShadowSet::read_from(&mut &bytes[..bytes.len() - 1]), Err(Error::Truncated(_))));
    }
}
