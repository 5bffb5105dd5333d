//! Derivatives of the evolved state and of pair fidelities with respect to the
//! field vector.
//!
//! With `H = V Λ Vᵀ` and `U = e^{-iHt}`, the derivative along a perturbation
//! `P` is `∂U = V (Γ ∘ (Vᵀ P V)) Vᵀ` where `Γ_ab` is the divided difference of
//! `λ ↦ e^{-iλt}` between `λ_a` and `λ_b`. For `∂/∂h_j` the perturbation is
//! `σz_j`, which is diagonal in the computational basis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quantum::{parity_sectors, site_mask, FieldVector, IsingSpec, Propagator, StateVector};

/// Evolved state together with its derivative with respect to each field.
#[derive(Clone, Debug)]
pub struct StateJacobian {
    pub state: StateVector,
    /// Column `j` is `∂ψ(t)/∂h_j`.
    pub jacobian: DMatrix<C64>,
}

/// Relative eigenvalue gap below which two levels are treated as degenerate.
const DEGENERATE_GAP: f64 = 1e-9;

/// Divided difference `(e^{-iλ_a t} − e^{-iλ_b t}) / (λ_a − λ_b)`.
///
/// Written as `−i t e^{-iλ̄t} sinc(Δt/2)` which stays accurate for small gaps;
/// below the degeneracy threshold the confluent value `−i t e^{-iλ̄t}` is used.
pub fn phase_divided_difference(lambda_a: f64, lambda_b: f64, t: f64) -> C64 {
    let gap = lambda_a - lambda_b;
    let mean = 0.5 * (lambda_a + lambda_b);
    let confluent = C64::new(0.0, -t) * C64::from_polar(1.0, -mean * t);
    if gap.abs() <= DEGENERATE_GAP * f64::max(1.0, lambda_a.abs() + lambda_b.abs()) {
        return confluent;
    }
    let x = 0.5 * gap * t;
    if x == 0.0 {
        confluent
    } else {
        confluent * (x.sin() / x)
    }
}

impl Propagator {
    /// Evolved state and exact Jacobian with respect to the fields.
    ///
    /// `σz_j` preserves parity, so `Vᵀσz_jV` only couples eigenvectors of the
    /// same sector, and eigenvectors with zero overlap on `ψ0` drop out.
    pub fn jacobian(&self, psi0: &StateVector) -> Result<StateJacobian> {
        self.check_dim(psi0)?;
        let spec = self.spec();
        let n = spec.n_qubits();
        let dim = spec.dim();
        let t = spec.time();
        let v = &self.eigenvectors;
        let lambda = &self.eigenvalues;

        let coeffs = self.to_eigenbasis(psi0.amplitudes());
        let evolved: DVector<C64> = DVector::from_iterator(
            dim,
            coeffs.iter().zip(lambda.iter()).map(|(&c, &l)| c * C64::from_polar(1.0, -l * t)),
        );
        let state = StateVector::from_dvector_unchecked(self.from_eigenbasis(&evolved), n);

        // With u_a the sector-local part of eigenvector a,
        // (Vᵀσz_jV)_ab = Σ_k s_j(k) u_a[k] u_b[k], so the b-sum can be taken
        // once per a: z_a[k] = u_a[k] Σ_b Γ_ab c_b u_b[k].
        let rows = parity_sectors(dim);
        let local = |a: usize| -> Vec<f64> { rows[self.sectors[a]].iter().map(|&r| v[(r, a)]).collect() };
        let active: Vec<usize> = (0..dim).filter(|&b| coeffs[b] != C64::new(0.0, 0.0)).collect();
        let active_local: Vec<Vec<f64>> = active.iter().map(|&b| local(b)).collect();
        let mut weighted = Vec::new();
        for a in 0..dim {
            let sector = self.sectors[a];
            if !active.iter().any(|&b| self.sectors[b] == sector) {
                continue;
            }
            let mut w = vec![C64::new(0.0, 0.0); rows[sector].len()];
            for (&b, u_b) in active.iter().zip(&active_local) {
                if self.sectors[b] != sector {
                    continue;
                }
                let g = phase_divided_difference(lambda[a], lambda[b], t) * coeffs[b];
                for (wk, &ub) in w.iter_mut().zip(u_b) {
                    *wk += g * ub;
                }
            }
            for (wk, ua) in w.iter_mut().zip(local(a)) {
                *wk *= ua;
            }
            weighted.push((a, sector, w));
        }
        let mut jacobian = DMatrix::zeros(dim, n);
        for site in 0..n {
            let mask = site_mask(n, site);
            let mut mixed = DVector::<C64>::zeros(dim);
            for (a, sector, z) in &weighted {
                mixed[*a] = rows[*sector]
                    .iter()
                    .zip(z)
                    .map(|(&r, &zk)| if r & mask == 0 { zk } else { -zk })
                    .sum();
            }
            jacobian.set_column(site, &self.from_eigenbasis(&mixed));
        }
        Ok(StateJacobian { state, jacobian })
    }
}

/// Exact Jacobian of `e^{-iH(h)t} ψ0` with respect to `h`.
pub fn evolution_jacobian(spec: &IsingSpec, psi0: &StateVector) -> Result<StateJacobian> {
    Propagator::new(spec)?.jacobian(psi0)
}

/// Central finite-difference Jacobian, one pair of evolutions per field.
pub fn fd_jacobian(spec: &IsingSpec, psi0: &StateVector, step: f64) -> Result<StateJacobian> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step {step} must be > 0")));
    }
    let state = Propagator::new(spec)?.evolve(psi0)?;
    let n = spec.n_qubits();
    let mut jacobian = DMatrix::zeros(spec.dim(), n);
    for site in 0..n {
        let shifted = |delta: f64| -> Result<StateVector> {
            let mut h = spec.fields().as_slice().to_vec();
            h[site] += delta;
            Propagator::new(&spec.with_fields(FieldVector::new(h)?)?)?.evolve(psi0)
        };
        let plus = shifted(step)?;
        let minus = shifted(-step)?;
        let column = (plus.amplitudes() - minus.amplitudes()) / C64::new(2.0 * step, 0.0);
        jacobian.set_column(site, &column);
    }
    Ok(StateJacobian { state, jacobian })
}

/// Fidelity of two evolved states and its gradients with respect to both
/// field vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct PairGradient {
    pub fidelity: f64,
    pub d_first: FieldVector,
    pub d_second: FieldVector,
}

/// `∂F/∂h_j = 2 Re(⟨ψ2|ψ1⟩ ⟨∂_jψ1|ψ2⟩)` for the first state and the mirror
/// expression for the second, both from already-computed Jacobians.
pub fn pair_gradient_from_jacobians(first: &StateJacobian, second: &StateJacobian) -> Result<PairGradient> {
    let overlap = first.state.inner(&second.state)?; // ⟨ψ1|ψ2⟩
    let psi1 = first.state.amplitudes();
    let psi2 = second.state.amplitudes();
    let grad = |jac: &DMatrix<C64>, other: &DVector<C64>, overlap_conj: C64| -> Result<FieldVector> {
        FieldVector::new(
            jac.column_iter()
                .map(|col| 2.0 * (overlap_conj * col.dotc(other)).re)
                .collect(),
        )
    };
    Ok(PairGradient {
        fidelity: overlap.norm_sqr().clamp(0.0, 1.0),
        d_first: grad(&first.jacobian, psi2, overlap.conj())?,
        d_second: grad(&second.jacobian, psi1, overlap)?,
    })
}

pub fn fidelity_pair_gradient(spec1: &IsingSpec, spec2: &IsingSpec, psi0: &StateVector) -> Result<PairGradient> {
    if spec1.n_qubits() != spec2.n_qubits() {
        return Err(Error::DimensionMismatch { expected: spec1.n_qubits(), found: spec2.n_qubits() });
    }
    let first = evolution_jacobian(spec1, psi0)?;
    let second = evolution_jacobian(spec2, psi0)?;
    pair_gradient_from_jacobians(&first, &second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{evolve, fidelity, initial_state};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(fields: Vec<f64>, t: f64) -> IsingSpec {
        IsingSpec::with_unit_coupling(fields, t).unwrap()
    }

    fn random_spec<R: Rng>(n: usize, rng: &mut R) -> IsingSpec {
        let h = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        spec(h, rng.random_range(0.0..(2 * n) as f64))
    }

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_qubit_closed_form() {
        let (h1, t) = (0.6, 1.3);
        let jac = evolution_jacobian(&spec(vec![h1], t), &initial_state(1).unwrap()).unwrap();
        let want = C64::new(0.0, -t) * C64::from_polar(1.0, -h1 * t);
        assert!((jac.jacobian[(0, 0)] - want).norm() < 1e-14);
        assert!(jac.jacobian[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn zero_time_has_zero_jacobian() {
        let jac = evolution_jacobian(&spec(vec![0.4, -0.2, 1.0], 0.0), &initial_state(3).unwrap()).unwrap();
        assert_eq!(max_abs(&jac.jacobian), 0.0);
        let fd = fd_jacobian(&spec(vec![0.4, -0.2, 1.0], 0.0), &initial_state(3).unwrap(), 1e-4).unwrap();
        assert!(max_abs(&fd.jacobian) < 1e-10);
        assert!(fd_jacobian(&spec(vec![0.0], 1.0), &initial_state(1).unwrap(), 0.0).is_err());
    }

    #[test]
    fn matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let s = random_spec(3, &mut rng);
            let psi0 = StateVector::random(3, &mut rng).unwrap();
            let exact = evolution_jacobian(&s, &psi0).unwrap();
            let fd = fd_jacobian(&s, &psi0, 1e-4).unwrap();
            let scale = max_abs(&exact.jacobian).max(1e-12);
            assert!(max_abs(&(&exact.jacobian - &fd.jacobian)) / scale < 1e-5);
        }
    }

    #[test]
    fn small_time_is_first_order() {
        // ∂ψ/∂h_j ≈ −i t σz_j ψ0 as t → 0
        let t = 1e-4;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi0 = StateVector::random(2, &mut rng).unwrap();
        let fd = fd_jacobian(&spec(vec![0.3, -0.7], t), &psi0, 1e-3).unwrap();
        for site in 0..2 {
            for idx in 0..4 {
                let sign = if idx & site_mask(2, site) == 0 { 1.0 } else { -1.0 };
                let linear = C64::new(0.0, -t) * psi0.amplitudes()[idx] * sign;
                assert!((fd.jacobian[(idx, site)] - linear).norm() < 10.0 * t * t);
            }
        }
    }

    #[test]
    fn jacobian_is_tangent_to_the_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 1..=4 {
            let s = random_spec(n, &mut rng);
            let jac = evolution_jacobian(&s, &initial_state(n).unwrap()).unwrap();
            for col in jac.jacobian.column_iter() {
                assert!(jac.state.amplitudes().dotc(&col).re.abs() < 1e-8);
            }
            let plain = evolve(&s, &initial_state(n).unwrap()).unwrap();
            assert!((plain.amplitudes() - jac.state.amplitudes()).norm() < 1e-12);
        }
    }

    #[test]
    fn identical_specs_have_unit_fidelity_and_flat_gradient() {
        let s = spec(vec![0.5, -1.1, 0.2], 3.0);
        let g = fidelity_pair_gradient(&s, &s, &initial_state(3).unwrap()).unwrap();
        assert!((g.fidelity - 1.0).abs() < 1e-12);
        assert!(g.d_first.as_slice().iter().chain(g.d_second.as_slice()).all(|d| d.abs() < 1e-10));
    }

    #[test]
    fn single_qubit_pairs_are_indistinguishable() {
        let g = fidelity_pair_gradient(&spec(vec![0.3], 2.0), &spec(vec![-1.4], 2.0), &initial_state(1).unwrap())
            .unwrap();
        assert!((g.fidelity - 1.0).abs() < 1e-12);
        assert!(g.d_first.as_slice()[0].abs() < 1e-12 && g.d_second.as_slice()[0].abs() < 1e-12);
    }

    #[test]
    fn pair_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let psi0 = initial_state(3).unwrap();
        let f = |h1: &[f64], h2: &[f64], t: f64| {
            let a = evolve(&spec(h1.to_vec(), t), &psi0).unwrap();
            let b = evolve(&spec(h2.to_vec(), t), &psi0).unwrap();
            fidelity(&a, &b).unwrap()
        };
        for _ in 0..10 {
            let s1 = random_spec(3, &mut rng);
            let t = s1.time();
            let s2 = spec((0..3).map(|_| rng.random_range(-2.0..2.0)).collect(), t);
            let g = fidelity_pair_gradient(&s1, &s2, &psi0).unwrap();
            let (h1, h2) = (s1.fields().as_slice().to_vec(), s2.fields().as_slice().to_vec());
            let step = 1e-5;
            for j in 0..3 {
                let (mut p, mut m) = (h1.clone(), h1.clone());
                p[j] += step;
                m[j] -= step;
                let fd = (f(&p, &h2, t) - f(&m, &h2, t)) / (2.0 * step);
                assert!((fd - g.d_first.as_slice()[j]).abs() < 1e-6);
                let (mut p, mut m) = (h2.clone(), h2.clone());
                p[j] += step;
                m[j] -= step;
                let fd = (f(&h1, &p, t) - f(&h1, &m, t)) / (2.0 * step);
                assert!((fd - g.d_second.as_slice()[j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn swapping_specs_swaps_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi0 = initial_state(4).unwrap();
        let s1 = random_spec(4, &mut rng);
        let s2 = s1.with_fields(FieldVector::new(vec![0.1, 0.9, -0.4, 1.7]).unwrap()).unwrap();
        let ab = fidelity_pair_gradient(&s1, &s2, &psi0).unwrap();
        let ba = fidelity_pair_gradient(&s2, &s1, &psi0).unwrap();
        assert_eq!(ab.fidelity, ba.fidelity);
        assert_eq!(ab.d_first, ba.d_second);
        assert_eq!(ab.d_second, ba.d_first);
    }

    #[test]
    fn degenerate_spectrum_is_continuous() {
        // zero fields: σxσx chains have exactly degenerate levels
        let psi0 = initial_state(3).unwrap();
        let base = evolution_jacobian(&spec(vec![0.0; 3], 1.5), &psi0).unwrap();
        let nudged = evolution_jacobian(&spec(vec![1e-9, -1e-9, 1e-9], 1.5), &psi0).unwrap();
        assert!(max_abs(&(&base.jacobian - &nudged.jacobian)) < 1e-5);
        let fd = fd_jacobian(&spec(vec![0.0; 3], 1.5), &psi0, 1e-5).unwrap();
        assert!(max_abs(&(&base.jacobian - &fd.jacobian)) < 1e-6);
    }

    #[test]
    fn divided_difference_limits() {
        let t = 2.0;
        let exact = |a: f64, b: f64| {
            (C64::from_polar(1.0, -a * t) - C64::from_polar(1.0, -b * t)) / (a - b)
        };
        assert!((phase_divided_difference(0.3, -0.5, t) - exact(0.3, -0.5)).norm() < 1e-14);
        let same = phase_divided_difference(0.7, 0.7, t);
        assert!((same - C64::new(0.0, -t) * C64::from_polar(1.0, -0.7 * t)).norm() < 1e-15);
        let close = phase_divided_difference(0.7 + 1e-7, 0.7, t);
        assert!((close - same).norm() < 1e-6);
    }
}
