//! Reference implementations built from dense Kronecker products, kept
//! independent of the library's sparse constructions.

#![allow(dead_code)]

use hqnc_core::quantum::{IsingSpec, StateVector};
use hqnc_core::C64;
use nalgebra::{DMatrix, DVector};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// `⊗_k factors[k]` with factor 0 acting on the most significant bit.
pub fn kron_all(factors: &[DMatrix<C64>]) -> DMatrix<C64> {
    factors.iter().skip(1).fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

fn site_operator(n: usize, ops: &[(usize, DMatrix<C64>)]) -> DMatrix<C64> {
    let factors: Vec<DMatrix<C64>> = (0..n)
        .map(|k| ops.iter().find(|(s, _)| *s == k).map(|(_, m)| m.clone()).unwrap_or_else(|| DMatrix::identity(2, 2)))
        .collect();
    kron_all(&factors)
}

/// `J Σ σx_k σx_{k+1} + Σ h_k σz_k` from explicit tensor products.
pub fn dense_hamiltonian(coupling: f64, fields: &[f64]) -> DMatrix<C64> {
    let n = fields.len();
    let dim = 1 << n;
    let mut h = DMatrix::zeros(dim, dim);
    for k in 0..n.saturating_sub(1) {
        h += site_operator(n, &[(k, pauli_x()), (k + 1, pauli_x())]) * c(coupling, 0.0);
    }
    for (k, &hk) in fields.iter().enumerate() {
        h += site_operator(n, &[(k, pauli_z())]) * c(hk, 0.0);
    }
    h
}

/// `e^{A}` by scaling, a 30-term Taylor series and repeated squaring.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let norm: f64 = a.iter().map(|z| z.norm()).sum();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / c(2f64.powi(squarings), 0.0);
    let n = a.nrows();
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled / c(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `e^{-iHt}|0…0⟩` from the dense matrix exponential.
pub fn reference_evolve(coupling: f64, fields: &[f64], t: f64) -> DVector<C64> {
    let h = dense_hamiltonian(coupling, fields);
    let u = expm(&(h * c(0.0, -t)));
    u.column(0).into_owned()
}

pub fn reference_fidelity(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.dotc(b).norm_sqr()
}

/// Central finite-difference gradient of `|⟨ψ(h1)|ψ(h2)⟩|²` with respect
/// to `h1`, using the dense reference evolution.
pub fn fd_fidelity_gradient(h1: &[f64], h2: &[f64], t: f64, step: f64) -> Vec<f64> {
    let target = reference_evolve(1.0, h2, t);
    (0..h1.len())
        .map(|j| {
            let mut plus = h1.to_vec();
            let mut minus = h1.to_vec();
            plus[j] += step;
            minus[j] -= step;
            let fp = reference_fidelity(&reference_evolve(1.0, &plus, t), &target);
            let fm = reference_fidelity(&reference_evolve(1.0, &minus, t), &target);
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

pub fn spec(fields: &[f64], t: f64) -> IsingSpec {
    IsingSpec::with_unit_coupling(fields.to_vec(), t).unwrap()
}

pub fn as_vector(psi: &StateVector) -> DVector<C64> {
    psi.amplitudes().clone()
}

/// `max |a − b| / max(|b|_∞, floor)`.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.abs()).fold(floor, f64::max);
    diff / scale
}

pub fn max_abs_diff<R: nalgebra::Dim, C: nalgebra::Dim, S1, S2>(
    a: &nalgebra::Matrix<C64, R, C, S1>,
    b: &nalgebra::Matrix<C64, R, C, S2>,
) -> f64
where
    S1: nalgebra::RawStorage<C64, R, C>,
    S2: nalgebra::RawStorage<C64, R, C>,
{
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Readout rotations written out independently: Hadamard for x, `H·S†` for y.
pub fn rotation(basis: usize) -> DMatrix<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match basis {
        0 => DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
        1 => DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, -s), c(s, 0.0), c(0.0, s)]),
        _ => DMatrix::identity(2, 2),
    }
}

pub fn projector(bit: usize) -> DMatrix<C64> {
    let mut p = DMatrix::zeros(2, 2);
    p[(bit, bit)] = c(1.0, 0.0);
    p
}

/// `Σ_{bases, outcomes} 3^{-n} Pr(b) ⊗_k (3 U_k†|b_k⟩⟨b_k|U_k − 𝟙)`.
pub fn enumerated_channel(psi: &StateVector) -> DMatrix<C64> {
    let n = psi.n_qubits();
    let amps = psi.amplitudes().clone();
    let dim = 1 << n;
    let mut total = DMatrix::zeros(dim, dim);
    for bases in 0..3usize.pow(n as u32) {
        let choice: Vec<usize> = (0..n).map(|k| bases / 3usize.pow(k as u32) % 3).collect();
        let u = kron_all(&choice.iter().map(|&b| rotation(b)).collect::<Vec<_>>());
        let rotated = &u * &amps;
        for outcome in 0..dim {
            let p = rotated[outcome].norm_sqr();
            let factors: Vec<DMatrix<C64>> = (0..n)
                .map(|k| {
                    let bit = (outcome >> (n - 1 - k)) & 1;
                    let uk = rotation(choice[k]);
                    uk.adjoint() * projector(bit) * &uk * c(3.0, 0.0) - DMatrix::identity(2, 2)
                })
                .collect();
            total += kron_all(&factors) * c(p / 3f64.powi(n as i32), 0.0);
        }
    }
    total
}

pub fn density(psi: &StateVector) -> DMatrix<C64> {
    let a = psi.amplitudes();
    a * a.adjoint()
}

