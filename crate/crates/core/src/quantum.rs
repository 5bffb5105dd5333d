//! Exact state-vector simulation of the transverse-field Ising chain.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest chain handled by the dense simulator.
pub const MAX_QUBITS: usize = 14;

const NORM_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("at least one qubit is required".into()));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits { n_qubits, max: MAX_QUBITS });
    }
    Ok(())
}

/// Bit of `index` that stores qubit `site` (site 0 is the most significant).
#[inline]
pub fn site_mask(n_qubits: usize, site: usize) -> usize {
    1 << (n_qubits - 1 - site)
}

/// Normalized pure state of `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
    n_qubits: usize,
}

impl StateVector {
    /// Wraps `amplitudes`, which must have power-of-two length and unit norm.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {dim} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let amplitudes = DVector::from_vec(amplitudes);
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self { amplitudes, n_qubits })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub(crate) fn from_dvector_unchecked(amplitudes: DVector<C64>, n_qubits: usize) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        Self { amplitudes, n_qubits }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} ≥ {dim}")));
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes, n_qubits })
    }

    /// Tensor product of single-qubit states, site 0 first.
    pub fn product(sites: &[[C64; 2]]) -> Result<Self> {
        check_qubits(sites.len())?;
        let mut amps = vec![C64::new(1.0, 0.0)];
        for site in sites {
            amps = amps
                .iter()
                .flat_map(|&a| [a * site[0], a * site[1]])
                .collect();
        }
        Self::normalized(amps)
    }

    /// Random state with independent Gaussian amplitudes (Haar distributed).
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        check_qubits(n_qubits)?;
        let amps = (0..1usize << n_qubits)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Multiplies every amplitude by `e^{iθ}`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let phase = C64::from_polar(1.0, theta);
        Self { amplitudes: self.amplitudes.map(|a| a * phase), n_qubits: self.n_qubits }
    }
}

/// The ferromagnetic product state `|0…0⟩`.
pub fn initial_state(n_qubits: usize) -> Result<StateVector> {
    StateVector::basis(n_qubits, 0)
}

/// `|⟨ψ1|ψ2⟩|²`, clamped to `[0, 1]`.
pub fn fidelity(psi1: &StateVector, psi2: &StateVector) -> Result<f64> {
    Ok(psi1.inner(psi2)?.norm_sqr().clamp(0.0, 1.0))
}

/// Site-dependent longitudinal fields, in units of the coupling.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldVector(Vec<f64>);

impl FieldVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite field value {bad}")));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Parameters of one Ising evolution: chain length, coupling, fields and time.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingSpec {
    n_qubits: usize,
    coupling: f64,
    fields: FieldVector,
    time: f64,
}

impl IsingSpec {
    pub fn new(coupling: f64, fields: FieldVector, time: f64) -> Result<Self> {
        let n_qubits = fields.len();
        check_qubits(n_qubits)?;
        if !coupling.is_finite() {
            return Err(Error::InvalidArgument(format!("coupling {coupling} is not finite")));
        }
        if !(time >= 0.0) || !time.is_finite() {
            return Err(Error::InvalidArgument(format!("evolution time {time} must be ≥ 0")));
        }
        Ok(Self { n_qubits, coupling, fields, time })
    }

    /// Coupling `J = 1`, as used throughout the classifier.
    pub fn with_unit_coupling(fields: Vec<f64>, time: f64) -> Result<Self> {
        Self::new(1.0, FieldVector::new(fields)?, time)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn fields(&self) -> &FieldVector {
        &self.fields
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Same chain and time, different fields.
    pub fn with_fields(&self, fields: FieldVector) -> Result<Self> {
        if fields.len() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: fields.len() });
        }
        Ok(Self { fields, ..self.clone() })
    }

    pub fn with_time(&self, time: f64) -> Result<Self> {
        Self::new(self.coupling, self.fields.clone(), time)
    }

    /// Dense real symmetric Hamiltonian.
    pub(crate) fn real_hamiltonian(&self) -> DMatrix<f64> {
        let n = self.n_qubits;
        let dim = self.dim();
        let h = self.fields.as_slice();
        let mut m = DMatrix::zeros(dim, dim);
        for index in 0..dim {
            let diag: f64 = (0..n)
                .map(|site| if index & site_mask(n, site) == 0 { h[site] } else { -h[site] })
                .sum();
            m[(index, index)] = diag;
            for site in 0..n.saturating_sub(1) {
                let flipped = index ^ site_mask(n, site) ^ site_mask(n, site + 1);
                m[(flipped, index)] += self.coupling;
            }
        }
        m
    }
}

/// Complex square matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        let dev = max_abs(&(&entries - entries.adjoint()));
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `J Σ σx_j σx_{j+1} + Σ h_j σz_j` in the computational basis.
pub fn build_hamiltonian(spec: &IsingSpec) -> Result<HermitianMatrix> {
    check_qubits(spec.n_qubits)?;
    Ok(HermitianMatrix(spec.real_hamiltonian().map(|x| C64::new(x, 0.0))))
}

/// Eigenvalues in ascending order with the matching unitary of eigenvectors
/// (one eigenvector per column).
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<C64>,
}

impl SpectralDecomposition {
    /// `V·diag(λ)·V†`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let v = &self.eigenvectors;
        let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * self.eigenvalues[c]);
        scaled * v.adjoint()
    }
}

fn ascending_order(values: &DVector<f64>) -> Option<Vec<usize>> {
    if values.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Some(order)
}

fn real_eigen(m: DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let dim = m.nrows();
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0).ok_or(Error::EigenConvergence)?;
    let order = ascending_order(&eig.eigenvalues).ok_or(Error::EigenConvergence)?;
    let values = DVector::from_iterator(dim, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

pub fn spectral_decompose(h: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let dim = h.dim();
    if h.is_real() {
        let (eigenvalues, vectors) = real_eigen(h.0.map(|z| z.re))?;
        return Ok(SpectralDecomposition {
            eigenvalues,
            eigenvectors: vectors.map(|x| C64::new(x, 0.0)),
        });
    }
    let eig = SymmetricEigen::try_new(h.0.clone(), f64::EPSILON, 0).ok_or(Error::EigenConvergence)?;
    let order = ascending_order(&eig.eigenvalues).ok_or(Error::EigenConvergence)?;
    Ok(SpectralDecomposition {
        eigenvalues: DVector::from_iterator(dim, order.iter().map(|&i| eig.eigenvalues[i])),
        eigenvectors: DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]),
    })
}

/// Basis indices of even (`[0]`) and odd (`[1]`) popcount.
pub(crate) fn parity_sectors(dim: usize) -> [Vec<usize>; 2] {
    let mut sectors = [Vec::new(), Vec::new()];
    for index in 0..dim {
        sectors[(index.count_ones() % 2) as usize].push(index);
    }
    sectors
}

/// Cached eigendecomposition of one [`IsingSpec`], reused for evolution and
/// for differentiation with respect to the fields.
///
/// The Ising Hamiltonian is real symmetric, so the eigenvectors are real.
/// It also commutes with the parity `∏σz`, so each parity block is
/// diagonalized on its own and every eigenvector lies in one sector.
#[derive(Clone, Debug)]
pub struct Propagator {
    spec: IsingSpec,
    pub(crate) eigenvalues: DVector<f64>,
    pub(crate) eigenvectors: DMatrix<f64>,
    /// Parity sector of each eigenvector column.
    pub(crate) sectors: Vec<usize>,
}

impl Propagator {
    pub fn new(spec: &IsingSpec) -> Result<Self> {
        check_qubits(spec.n_qubits)?;
        let h = spec.real_hamiltonian();
        let dim = spec.dim();
        let sectors = parity_sectors(dim);
        let mut columns = Vec::with_capacity(dim);
        for (parity, rows) in sectors.iter().enumerate() {
            let block = DMatrix::from_fn(rows.len(), rows.len(), |r, c| h[(rows[r], rows[c])]);
            let (values, vectors) = real_eigen(block)?;
            for (k, &value) in values.iter().enumerate() {
                columns.push((value, parity, rows, vectors.column(k).into_owned()));
            }
        }
        columns.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut eigenvectors = DMatrix::zeros(dim, dim);
        for (col, (_, _, rows, local)) in columns.iter().enumerate() {
            for (&r, &x) in rows.iter().zip(local.iter()) {
                eigenvectors[(r, col)] = x;
            }
        }
        Ok(Self {
            spec: spec.clone(),
            eigenvalues: DVector::from_iterator(dim, columns.iter().map(|c| c.0)),
            eigenvectors,
            sectors: columns.iter().map(|c| c.1).collect(),
        })
    }

    pub fn spec(&self) -> &IsingSpec {
        &self.spec
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub(crate) fn check_dim(&self, psi: &StateVector) -> Result<()> {
        if psi.dim() != self.spec.dim() {
            return Err(Error::DimensionMismatch { expected: self.spec.dim(), found: psi.dim() });
        }
        Ok(())
    }

    /// Eigenbasis coefficients `Vᵀψ`.
    pub(crate) fn to_eigenbasis(&self, psi: &DVector<C64>) -> DVector<C64> {
        real_t_mul(&self.eigenvectors, psi)
    }

    /// Computational-basis vector `V c`.
    pub(crate) fn from_eigenbasis(&self, coeffs: &DVector<C64>) -> DVector<C64> {
        real_mul(&self.eigenvectors, coeffs)
    }

    /// `e^{-iHt} ψ0`.
    pub fn evolve(&self, psi0: &StateVector) -> Result<StateVector> {
        self.evolve_for(psi0, self.spec.time)
    }

    /// `e^{-iHt} ψ0` for a time other than the spec's, reusing the
    /// decomposition.
    pub fn evolve_for(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        self.check_dim(psi0)?;
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("time {t} is not finite")));
        }
        let mut coeffs = self.to_eigenbasis(psi0.amplitudes());
        for (c, &lambda) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= C64::from_polar(1.0, -lambda * t);
        }
        Ok(StateVector::from_dvector_unchecked(self.from_eigenbasis(&coeffs), psi0.n_qubits()))
    }
}

/// `M x` for real `M` and complex `x`. Zero entries of `x` are skipped.
pub(crate) fn real_mul(m: &DMatrix<f64>, x: &DVector<C64>) -> DVector<C64> {
    let rows = m.nrows();
    let mut out = vec![C64::new(0.0, 0.0); rows];
    for (col, &xc) in m.as_slice().chunks_exact(rows).zip(x.iter()) {
        if xc.re == 0.0 && xc.im == 0.0 {
            continue;
        }
        for (o, &mv) in out.iter_mut().zip(col) {
            o.re += xc.re * mv;
            o.im += xc.im * mv;
        }
    }
    DVector::from_vec(out)
}

/// `Mᵀ x` for real `M` and complex `x`.
pub(crate) fn real_t_mul(m: &DMatrix<f64>, x: &DVector<C64>) -> DVector<C64> {
    let rows = m.nrows();
    let x = x.as_slice();
    DVector::from_iterator(
        m.ncols(),
        m.as_slice().chunks_exact(rows).map(|col| {
            let (mut re, mut im) = (0.0, 0.0);
            for (&mv, xv) in col.iter().zip(x) {
                re += mv * xv.re;
                im += mv * xv.im;
            }
            C64::new(re, im)
        }),
    )
}

/// Evolves `psi0` for `spec.time()` under `H(spec)`.
pub fn evolve(spec: &IsingSpec, psi0: &StateVector) -> Result<StateVector> {
    Propagator::new(spec)?.evolve(psi0)
}
