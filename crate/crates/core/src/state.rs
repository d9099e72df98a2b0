//! State carriers: density matrices, state vectors, pure ensembles and diagonal Hamiltonians.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, CqecError, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::tolerances as tol;

/// Trace-one positive semidefinite complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validated constructor: square, Hermitian, unit trace and PSD up to slack.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(invalid_arg(format!("density matrix must be square and non-empty, got {}x{}", m.nrows(), m.ncols())));
        }
        let herm = linalg::hermiticity_defect(&m);
        if herm > tol::HERMITICITY {
            return Err(CqecError::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = linalg::trace(&m);
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(CqecError::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = linalg::hermitian_eigenvalues(&m)[0];
        if min < -tol::PSD_SLACK {
            return Err(CqecError::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { m })
    }

    /// Wraps a matrix produced by a trusted channel without re-validating it.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self { m }
    }

    /// Builds a state from an arbitrary Hermitian-ish matrix by clamping negative
    /// eigenvalues and renormalising. Returns whether anything was clamped.
    pub fn project_psd(m: &CMatrix) -> Result<(Self, bool)> {
        let (vals, vecs) = linalg::hermitian_eigen(m);
        let clamped = vals.iter().any(|&l| l < -tol::PSD_SLACK);
        let total: f64 = vals.iter().map(|l| l.max(0.0)).sum();
        if total <= 0.0 {
            return Err(CqecError::InvalidState("projection left no positive weight".into()));
        }
        let n = vals.len();
        let mut scaled = vecs.clone();
        for (j, &l) in vals.iter().enumerate() {
            let s = l.max(0.0) / total;
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        let out = linalg::hermitian_part(&(&scaled * vecs.adjoint()));
        Ok((Self { m: out }, clamped))
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        Self { m: linalg::outer(&psi.amps) }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { m: CMatrix::identity(d, d).scale(1.0 / d as f64) }
    }

    /// Computational basis projector `|k⟩⟨k|`.
    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(invalid_arg(format!("basis index {k} out of range for dim {d}")));
        }
        let mut m = CMatrix::zeros(d, d);
        m[(k, k)] = linalg::ONE;
        Ok(Self { m })
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let m = CMatrix::from_diagonal(&DVector::from_iterator(probs.len(), probs.iter().map(|&p| Complex64::new(p, 0.0))));
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn diagonal_probs(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.m)
    }

    /// Splits the state into its eigen-ensemble, dropping weights below the cutoff.
    pub fn to_ensemble(&self) -> PureEnsemble {
        let (vals, vecs) = linalg::hermitian_eigen(&self.m);
        let mut weights = Vec::new();
        let mut members = Vec::new();
        for (j, &l) in vals.iter().enumerate().rev() {
            if l > tol::ENSEMBLE_CUTOFF {
                weights.push(l);
                members.push(StateVector { amps: vecs.column(j).into_owned() });
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        PureEnsemble { weights, members }
    }
}

/// Unit-norm complex amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: CVector,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(invalid_arg("empty state vector"));
        }
        let v = CVector::from_vec(amps);
        let norm = v.norm();
        if (norm - 1.0).abs() > tol::NORM {
            return Err(CqecError::InvalidState(format!("state vector norm {norm} is not 1")));
        }
        Ok(Self { amps: v })
    }

    /// Normalises the given amplitudes.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let v = CVector::from_vec(amps);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(invalid_arg("cannot normalise a zero or non-finite vector"));
        }
        Ok(Self { amps: v.unscale(norm) })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::normalized(amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn basis(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(invalid_arg(format!("basis index {k} out of range for dim {d}")));
        }
        let mut v = vec![linalg::ZERO; d];
        v[k] = linalg::ONE;
        Ok(Self { amps: CVector::from_vec(v) })
    }

    /// Uniform superposition over all `d` basis states.
    pub fn maximally_coherent(d: usize) -> Self {
        let a = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        Self { amps: CVector::from_element(d, a) }
    }

    pub(crate) fn from_cvector_unchecked(amps: CVector) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap_sq(&self, other: &StateVector) -> f64 {
        self.amps.dotc(&other.amps).norm_sqr()
    }
}

/// Weighted mixture of pure states, the fast path for large joint spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct PureEnsemble {
    pub(crate) weights: Vec<f64>,
    pub(crate) members: Vec<StateVector>,
}

impl PureEnsemble {
    pub fn new(weights: Vec<f64>, members: Vec<StateVector>) -> Result<Self> {
        if weights.len() != members.len() || members.is_empty() {
            return Err(invalid_arg("ensemble needs matching, non-empty weights and members"));
        }
        let d = members[0].dim();
        if members.iter().any(|m| m.dim() != d) {
            return Err(invalid_arg("ensemble members differ in dimension"));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(invalid_arg("ensemble weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol::TRACE {
            return Err(invalid_arg(format!("ensemble weights sum to {total}")));
        }
        Ok(Self { weights, members })
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn members(&self) -> &[StateVector] {
        &self.members
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (w, s) in self.weights.iter().zip(&self.members) {
            m += linalg::outer(&s.amps).scale(*w);
        }
        DensityMatrix::from_matrix_unchecked(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// `E_k = n − 2·popcount(k)` on `n` qubits.
    QubitSumZ,
    /// `E_k = k` on `d` levels.
    LinearLadder,
    /// `E_k = Σ_q w_q b_q(k)` with explicit integer weights per qubit.
    QubitWeighted,
}

/// Diagonal Hamiltonian with an integer spectrum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    energies: Vec<i64>,
    convention: Convention,
}

impl HamiltonianSpec {
    pub fn qubit_sum_z(n: usize) -> Self {
        let d = 1usize << n;
        let energies = (0..d).map(|k| n as i64 - 2 * k.count_ones() as i64).collect();
        Self { energies, convention: Convention::QubitSumZ }
    }

    pub fn linear_ladder(d: usize) -> Self {
        Self { energies: (0..d as i64).collect(), convention: Convention::LinearLadder }
    }

    /// Weighted qubit register: bit `q` of the basis index contributes `weights[q]`.
    pub fn from_qubit_weights(weights: &[i64]) -> Self {
        let d = 1usize << weights.len();
        let energies = (0..d)
            .map(|k| weights.iter().enumerate().filter(|(q, _)| (k >> q) & 1 == 1).map(|(_, w)| *w).sum())
            .collect();
        Self { energies, convention: Convention::QubitWeighted }
    }

    /// Rebuilds a spec from explicit energies, checking them against the convention.
    pub fn with_energies(energies: Vec<i64>, convention: Convention) -> Result<Self> {
        let d = energies.len();
        if d == 0 {
            return Err(invalid_arg("empty spectrum"));
        }
        let expected = match convention {
            Convention::QubitSumZ => {
                if !d.is_power_of_two() {
                    return Err(invalid_arg(format!("QubitSumZ needs a power-of-two dimension, got {d}")));
                }
                Self::qubit_sum_z(d.trailing_zeros() as usize)
            }
            Convention::LinearLadder => Self::linear_ladder(d),
            Convention::QubitWeighted => {
                if !d.is_power_of_two() {
                    return Err(invalid_arg(format!("QubitWeighted needs a power-of-two dimension, got {d}")));
                }
                let n = d.trailing_zeros() as usize;
                let w: Vec<i64> = (0..n).map(|q| energies[1 << q] - energies[0]).collect();
                let mut s = Self::from_qubit_weights(&w);
                s.energies.iter_mut().for_each(|e| *e += energies[0]);
                s
            }
        };
        if expected.energies != energies {
            return Err(invalid_arg(format!("energies do not follow the {convention:?} convention")));
        }
        Ok(Self { energies, convention })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[i64] {
        &self.energies
    }

    pub fn energy(&self, k: usize) -> i64 {
        self.energies[k]
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn n_qubits(&self) -> Option<usize> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }

    /// Per-qubit energy change when that qubit flips from 0 to 1, if the spectrum is additive.
    pub fn qubit_weights(&self) -> Option<Vec<i64>> {
        let n = self.n_qubits()?;
        let w: Vec<i64> = (0..n).map(|q| self.energies[1 << q] - self.energies[0]).collect();
        let additive = (0..self.dim()).all(|k| {
            let e: i64 = (0..n).filter(|q| (k >> q) & 1 == 1).map(|q| w[q]).sum();
            self.energies[0] + e == self.energies[k]
        });
        additive.then_some(w)
    }

    pub fn matrix(&self) -> CMatrix {
        let d = self.dim();
        CMatrix::from_diagonal(&DVector::from_iterator(d, self.energies.iter().map(|&e| Complex64::new(e as f64, 0.0))))
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(invalid_arg(format!("Hamiltonian dim {} does not match state dim {d}", self.dim())));
        }
        Ok(())
    }
}
