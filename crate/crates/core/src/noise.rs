//! Decoherence channels and the analytic pre-correction fidelity predictor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};
use crate::linalg::{self, CMatrix};
use crate::state::{DensityMatrix, HamiltonianSpec, StateVector};
use crate::tolerances as tol;

pub const COMBINED_GAMMA: f64 = 1.0;
pub const COMBINED_P: f64 = 0.15;
pub const COMBINED_GAMMA_AD: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Dephasing { gamma: f64 },
    Depolarizing { p: f64 },
    AmplitudeDamping { gamma_ad: f64 },
    /// Dephasing γ=1.0, then depolarizing p=0.15, then amplitude damping γ_AD=0.1.
    Combined,
    SelectiveDephasing { gap: i64 },
    /// Replaces every off-diagonal of a pure target by magnitude ε, keeping phases.
    EpsilonFamily { epsilon: f64 },
    /// Dephasing followed by depolarizing, used by the durability loop.
    DephasingDepolarizing { gamma: f64, p: f64 },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseSpec::Dephasing { gamma } => gamma >= 0.0 && gamma.is_finite(),
            NoiseSpec::Depolarizing { p } => (0.0..=1.0).contains(&p),
            NoiseSpec::AmplitudeDamping { gamma_ad } => (0.0..=1.0).contains(&gamma_ad),
            NoiseSpec::Combined | NoiseSpec::SelectiveDephasing { .. } => true,
            NoiseSpec::EpsilonFamily { epsilon } => epsilon >= 0.0 && epsilon.is_finite(),
            NoiseSpec::DephasingDepolarizing { gamma, p } => gamma >= 0.0 && gamma.is_finite() && (0.0..=1.0).contains(&p),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid_arg(format!("noise parameters out of range: {self:?}")))
        }
    }

    /// Whether the channel wipes every coherence (used to short-circuit verdicts).
    pub fn is_complete_dephasing(&self) -> bool {
        matches!(*self, NoiseSpec::Dephasing { gamma } if gamma.is_infinite())
    }
}

/// Result of applying a channel; `reprojected` records a positivity repair.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyState {
    pub state: DensityMatrix,
    pub reprojected: bool,
}

/// Applies `spec` to a pure target.
pub fn apply_noise(target: &StateVector, h: &HamiltonianSpec, spec: &NoiseSpec) -> Result<NoisyState> {
    spec.validate()?;
    h.check_dim(target.dim())?;
    let rho = target.to_density();
    let plain = |state| Ok(NoisyState { state, reprojected: false });
    match *spec {
        NoiseSpec::Dephasing { gamma } => plain(dephase(&rho, h, gamma)?),
        NoiseSpec::Depolarizing { p } => plain(depolarize(&rho, p)?),
        NoiseSpec::AmplitudeDamping { gamma_ad } => plain(amplitude_damp(&rho, gamma_ad)?),
        NoiseSpec::Combined => plain(combined(&rho, h)?),
        NoiseSpec::SelectiveDephasing { gap } => selective_dephase(&rho, h, gap),
        NoiseSpec::EpsilonFamily { epsilon } => plain(epsilon_family(target, epsilon)?),
        NoiseSpec::DephasingDepolarizing { gamma, p } => plain(depolarize(&dephase(&rho, h, gamma)?, p)?),
    }
}

/// `ρ_ij → ρ_ij·e^{−γ|E_i−E_j|}`.
pub fn dephase(rho: &DensityMatrix, h: &HamiltonianSpec, gamma: f64) -> Result<DensityMatrix> {
    h.check_dim(rho.dim())?;
    if gamma < 0.0 || gamma.is_nan() {
        return Err(invalid_arg(format!("dephasing rate {gamma} must be nonnegative")));
    }
    let d = rho.dim();
    let mut m = rho.matrix().clone();
    for i in 0..d {
        for j in 0..d {
            let gap = (h.energy(i) - h.energy(j)).unsigned_abs();
            if gap != 0 {
                m[(i, j)] *= (-gamma * gap as f64).exp();
            }
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// `(1−p)ρ + p·I/d`.
pub fn depolarize(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid_arg(format!("depolarizing probability {p} outside [0, 1]")));
    }
    let d = rho.dim();
    let m = rho.matrix().scale(1.0 - p) + CMatrix::identity(d, d).scale(p / d as f64);
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Independent amplitude damping on every qubit (bit `q` of the index is qubit `q`).
pub fn amplitude_damp(rho: &DensityMatrix, gamma_ad: f64) -> Result<DensityMatrix> {
    let d = rho.dim();
    if !d.is_power_of_two() {
        return Err(invalid_arg(format!("amplitude damping needs a qubit register, got dim {d}")));
    }
    if !(0.0..=1.0).contains(&gamma_ad) {
        return Err(invalid_arg(format!("damping rate {gamma_ad} outside [0, 1]")));
    }
    let keep = (1.0 - gamma_ad).sqrt();
    let mut m = rho.matrix().clone();
    for q in 0..d.trailing_zeros() {
        let bit = 1usize << q;
        let mut next = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let (bi, bj) = (i & bit != 0, j & bit != 0);
                let mut v = m[(i, j)] * keep.powi(bi as i32 + bj as i32);
                if !bi && !bj {
                    v += m[(i | bit, j | bit)] * gamma_ad;
                }
                next[(i, j)] = v;
            }
        }
        m = next;
    }
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Dephasing, depolarizing, then amplitude damping at the fixed combined-model rates.
pub fn combined(rho: &DensityMatrix, h: &HamiltonianSpec) -> Result<DensityMatrix> {
    let r = dephase(rho, h, COMBINED_GAMMA)?;
    let r = depolarize(&r, COMBINED_P)?;
    amplitude_damp(&r, COMBINED_GAMMA_AD)
}

/// Keeps the target's populations and sets every off-diagonal to magnitude `ε`
/// with the target's phase.
pub fn epsilon_family(target: &StateVector, epsilon: f64) -> Result<DensityMatrix> {
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(invalid_arg(format!("epsilon {epsilon} must be a nonnegative number")));
    }
    let v = target.amplitudes();
    let d = target.dim();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = if i == j {
                Complex64::new(v[i].norm_sqr(), 0.0)
            } else {
                let z = v[i] * v[j].conj();
                if z.norm() > 0.0 {
                    z.unscale(z.norm()) * epsilon
                } else {
                    linalg::ZERO
                }
            };
        }
    }
    let min = linalg::hermitian_eigenvalues(&m)[0];
    if min < -tol::PSD_SLACK {
        return Err(invalid_arg(format!("epsilon {epsilon} breaks positivity (eigenvalue {min:e})")));
    }
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Zeroes every coherence whose gap magnitude equals `gap`, then restores positivity
/// without reintroducing the removed gap.
pub fn selective_dephase(rho: &DensityMatrix, h: &HamiltonianSpec, gap: i64) -> Result<NoisyState> {
    h.check_dim(rho.dim())?;
    let d = rho.dim();
    let gap = gap.unsigned_abs();
    let zero_gap = |m: &mut CMatrix| {
        for i in 0..d {
            for j in 0..d {
                if (h.energy(i) - h.energy(j)).unsigned_abs() == gap && i != j {
                    m[(i, j)] = linalg::ZERO;
                }
            }
        }
    };
    let mut m = rho.matrix().clone();
    zero_gap(&mut m);
    let mut reprojected = false;
    // Alternate between the PSD cone and the gap-free subspace.
    for _ in 0..500 {
        if linalg::hermitian_eigenvalues(&m)[0] >= -tol::FULL_RANK {
            break;
        }
        reprojected = true;
        m = DensityMatrix::project_psd(&m)?.0.into_matrix();
        zero_gap(&mut m);
    }
    // Any residual negativity is removed by mixing with I/d, which keeps zeros at zero.
    let min = linalg::hermitian_eigenvalues(&m)[0];
    if min < 0.0 {
        reprojected = true;
        m += CMatrix::identity(d, d).scale(-min);
        let tr = linalg::trace(&m).re;
        m.unscale_mut(tr);
    }
    Ok(NoisyState { state: DensityMatrix::from_matrix_unchecked(m), reprojected })
}

/// `Tr + e^{−γ}(1 − Tr)`, where `Tr = Σ_i ρ_ii²` of the pure target.
pub fn predicted_dephased_fidelity(tr_diag_sq: f64, gamma: f64) -> f64 {
    tr_diag_sq + (-gamma).exp() * (1.0 - tr_diag_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{fidelity_with_pure, l1_coherence};
    use crate::modes::mode_set;

    #[test]
    fn dephasing_examples() {
        let plus = StateVector::maximally_coherent(2).to_density();
        let h = HamiltonianSpec::qubit_sum_z(1);
        let r = dephase(&plus, &h, 2.0).unwrap();
        assert!((r.entry(0, 1).re - 0.5 * (-4.0f64).exp()).abs() < 1e-15);
        assert_eq!(dephase(&plus, &h, 0.0).unwrap(), plus);
        assert!(dephase(&plus, &h, 1e6).unwrap().entry(0, 1).norm() == 0.0);
    }

    #[test]
    fn depolarizing_fidelity() {
        let psi = StateVector::maximally_coherent(16);
        let r = depolarize(&psi.to_density(), 0.1).unwrap();
        assert!((fidelity_with_pure(&psi, &r).unwrap() - 0.90625).abs() < 1e-12);
        let full = depolarize(&psi.to_density(), 1.0).unwrap();
        assert!(linalg::max_abs_diff(full.matrix(), DensityMatrix::maximally_mixed(16).matrix()) < 1e-15);
    }

    #[test]
    fn damping_examples() {
        let one = DensityMatrix::basis(2, 1).unwrap();
        let r = amplitude_damp(&one, 0.1).unwrap();
        assert!((r.entry(0, 0).re - 0.1).abs() < 1e-15 && (r.entry(1, 1).re - 0.9).abs() < 1e-15);
        let ground = DensityMatrix::basis(8, 0).unwrap();
        assert_eq!(amplitude_damp(&ground, 0.3).unwrap(), ground);
        assert!(amplitude_damp(&DensityMatrix::maximally_mixed(3), 0.1).is_err());
    }

    #[test]
    fn epsilon_family_anchor() {
        let psi = StateVector::maximally_coherent(4);
        let r = epsilon_family(&psi, 1e-10).unwrap();
        assert!((l1_coherence(&r) - 1.2e-9).abs() < 1e-22);
        let back = epsilon_family(&psi, 0.25).unwrap();
        assert!(linalg::max_abs_diff(back.matrix(), psi.to_density().matrix()) < 1e-15);
        assert!(epsilon_family(&psi, 0.3).is_err());
    }

    #[test]
    fn selective_dephasing_removes_gap() {
        let h = HamiltonianSpec::linear_ladder(4);
        let rho = StateVector::maximally_coherent(4).to_density();
        let out = selective_dephase(&rho, &h, 1).unwrap();
        assert!(out.reprojected);
        assert!(out.state.eigenvalues()[0] >= -tol::PSD_SLACK);
        let m = mode_set(&out.state, &h, tol::MODE_THRESHOLD).unwrap();
        assert_eq!(m.gaps, [-3, -2, 2, 3].into_iter().collect());
    }

    #[test]
    fn predicted_fidelity() {
        assert_eq!(predicted_dephased_fidelity(0.25, 0.0), 1.0);
        assert!((predicted_dephased_fidelity(0.25, 2.0) - 0.351501).abs() < 1e-6);
    }
}
