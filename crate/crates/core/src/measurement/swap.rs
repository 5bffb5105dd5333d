use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::quantum::{fidelity, StateVector};

/// Ancilla statistics of a swap test. `shots == 0` marks exact probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwapTestResult {
    pub p_plus: f64,
    pub p_minus: f64,
    pub fidelity_estimate: f64,
    pub shots: u64,
}

impl SwapTestResult {
    fn from_p_plus(p_plus: f64, shots: u64) -> Self {
        Self {
            p_plus,
            p_minus: 1.0 - p_plus,
            fidelity_estimate: (2.0 * p_plus - 1.0).clamp(0.0, 1.0),
            shots,
        }
    }

    /// `2 p₊ − 1` before clamping; unbiased for sampled results.
    pub fn raw_estimate(&self) -> f64 {
        2.0 * self.p_plus - 1.0
    }
}

/// `p± = (1 ± F)/2` for an ancilla prepared in `|+⟩` and read out in the x basis.
pub fn swap_test_probabilities(fidelity: f64) -> Result<SwapTestResult> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::OutOfRange { value: fidelity, lo: 0.0, hi: 1.0 });
    }
    Ok(SwapTestResult::from_p_plus(0.5 * (1.0 + fidelity), 0))
}

/// Draws `shots` ancilla outcomes and reports the empirical frequencies.
pub fn sample_swap_test<R: Rng + ?Sized>(
    psi1: &StateVector,
    psi2: &StateVector,
    shots: u64,
    rng: &mut R,
) -> Result<SwapTestResult> {
    if shots == 0 {
        return Err(Error::InvalidArgument("swap test needs at least one shot".into()));
    }
    let exact = swap_test_probabilities(fidelity(psi1, psi2)?)?;
    let plus = Binomial::new(shots, exact.p_plus)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?
        .sample(rng);
    Ok(SwapTestResult::from_p_plus(plus as f64 / shots as f64, shots))
}

/// `⟨ψ1|⟨ψ2| S |ψ1⟩|ψ2⟩` where `S` exchanges the two registers.
///
/// The joint amplitude of `|i⟩|j⟩` is `ψ1_i ψ2_j`; after the swap it is
/// `ψ1_j ψ2_i`. The sum runs over the joint basis without materializing it.
pub fn swap_operator_expectation(psi1: &StateVector, psi2: &StateVector) -> Result<f64> {
    if psi1.dim() != psi2.dim() {
        return Err(Error::DimensionMismatch { expected: psi1.dim(), found: psi2.dim() });
    }
    let a = psi1.amplitudes();
    let b = psi2.amplitudes();
    let mut total = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..a.len() {
        let row_bra = a[i].conj();
        let swapped_first = b[i];
        for j in 0..b.len() {
            total += row_bra * b[j].conj() * (a[j] * swapped_first);
        }
    }
    Ok(total.re)
}
