//! Composite-system operations and the fidelity and coherence measures.

use num_complex::Complex64;

use crate::error::{invalid_arg, CqecError, Result};
use crate::linalg::{self, CMatrix};
use crate::state::{DensityMatrix, HamiltonianSpec, StateVector};
use crate::tolerances as tol;

/// `a ⊗ b`, with `a` as the most significant factor.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked(linalg::kron(a.matrix(), b.matrix()))
}

/// Traces out every subsystem not listed in `keep`.
///
/// `dims` lists subsystem dimensions in tensor order (first = most significant).
/// Kept subsystems appear in the output in their original order.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let total: usize = dims.iter().product();
    if total != rho.dim() || dims.contains(&0) {
        return Err(invalid_arg(format!("subsystem dims {dims:?} do not multiply to {}", rho.dim())));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= dims.len()) {
        return Err(invalid_arg(format!("invalid keep set {keep:?} for {} subsystems", dims.len())));
    }
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let traced: Vec<usize> = (0..n).filter(|k| !keep_sorted.contains(k)).collect();
    let kept_dim: usize = keep_sorted.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    let offset = |sel: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for &k in sel.iter().rev() {
            off += (idx % dims[k]) * strides[k];
            idx /= dims[k];
        }
        off
    };
    let kept_off: Vec<usize> = (0..kept_dim).map(|i| offset(&keep_sorted, i)).collect();
    let traced_off: Vec<usize> = (0..traced_dim).map(|i| offset(&traced, i)).collect();

    let m = rho.matrix();
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for (i, &oi) in kept_off.iter().enumerate() {
        for (j, &oj) in kept_off.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &traced_off {
                acc += m[(oi + t, oj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(invalid_arg(format!("fidelity of dims {} and {}", rho.dim(), sigma.dim())));
    }
    for s in [rho, sigma] {
        let min = s.eigenvalues()[0];
        if min < -tol::PSD_SLACK {
            return Err(CqecError::InvalidState(format!("fidelity input has eigenvalue {min:e}")));
        }
    }
    Ok(uhlmann_unchecked(rho.matrix(), sigma.matrix()))
}

pub(crate) fn uhlmann_unchecked(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    // Eigenvalues this small are rounding noise; their square roots would not be.
    const ZERO_EIG: f64 = 1e-14;
    let sqrt_clamped = |m: &CMatrix| linalg::hermitian_map(m, |l| if l > ZERO_EIG { l.sqrt() } else { 0.0 });
    let prod = sqrt_clamped(rho) * sqrt_clamped(sigma);
    let nuclear: f64 = prod.singular_values().iter().sum();
    (nuclear * nuclear).clamp(0.0, 1.0)
}

/// `⟨ψ|ρ|ψ⟩`, the fidelity against a pure state.
pub fn fidelity_with_pure(psi: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(invalid_arg(format!("fidelity of dims {} and {}", psi.dim(), rho.dim())));
    }
    Ok(pure_overlap(psi, rho.matrix()))
}

pub(crate) fn pure_overlap(psi: &StateVector, m: &CMatrix) -> f64 {
    let v = psi.amplitudes();
    (v.adjoint() * m * v)[(0, 0)].re.clamp(0.0, 1.0)
}

/// Sum of off-diagonal magnitudes.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let d = rho.dim();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += m[(i, j)].norm();
            }
        }
    }
    s
}

/// Quantum Fisher information `2 Σ (λi−λj)²/(λi+λj) |⟨i|H|j⟩|²`.
pub fn qfi(rho: &DensityMatrix, h: &HamiltonianSpec) -> Result<f64> {
    h.check_dim(rho.dim())?;
    let (vals, vecs) = linalg::hermitian_eigen(rho.matrix());
    let hv = h.matrix() * &vecs;
    let hij = vecs.adjoint() * hv;
    let d = vals.len();
    let mut f = 0.0;
    for i in 0..d {
        for j in 0..d {
            let s = vals[i] + vals[j];
            if s > 1e-14 {
                let diff = vals[i] - vals[j];
                f += 2.0 * diff * diff / s * hij[(i, j)].norm_sqr();
            }
        }
    }
    Ok(f)
}

/// `½ ‖a − b‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(invalid_arg(format!("trace distance of dims {} and {}", a.dim(), b.dim())));
    }
    let diff = a.matrix() - b.matrix();
    Ok(0.5 * linalg::hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>())
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_real(&[s, 0.0, 0.0, s]).unwrap().to_density()
    }

    #[test]
    fn tensor_of_mixed_is_mixed() {
        let t = tensor(&DensityMatrix::maximally_mixed(2), &DensityMatrix::maximally_mixed(2));
        assert!(linalg::max_abs_diff(t.matrix(), DensityMatrix::maximally_mixed(4).matrix()) < 1e-15);
        let t = tensor(&DensityMatrix::basis(2, 0).unwrap(), &DensityMatrix::basis(2, 1).unwrap());
        assert_eq!(t.entry(1, 1).re, 1.0);
    }

    #[test]
    fn bell_marginal_is_mixed() {
        let r = partial_trace(&bell(), &[2, 2], &[0]).unwrap();
        assert!(linalg::max_abs_diff(r.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
        let same = partial_trace(&bell(), &[2, 2], &[0, 1]).unwrap();
        assert_eq!(same, bell());
        assert!(partial_trace(&bell(), &[2, 3], &[0]).is_err());
    }

    #[test]
    fn product_marginals() {
        let a = StateVector::from_real(&[0.6, 0.8]).unwrap().to_density();
        let b = DensityMatrix::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        let ab = tensor(&a, &b);
        let ra = partial_trace(&ab, &[2, 3], &[0]).unwrap();
        let rb = partial_trace(&ab, &[2, 3], &[1]).unwrap();
        assert!(linalg::max_abs_diff(ra.matrix(), a.matrix()) < 1e-12);
        assert!(linalg::max_abs_diff(rb.matrix(), b.matrix()) < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let psi = StateVector::maximally_coherent(16);
        let rho = psi.to_density();
        assert!((uhlmann_fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        let mixed = DensityMatrix::maximally_mixed(16);
        assert!((uhlmann_fidelity(&rho, &mixed).unwrap() - 1.0 / 16.0).abs() < 1e-10);
        let noisy = DensityMatrix::from_matrix_unchecked(rho.matrix().scale(0.7) + mixed.matrix().scale(0.3));
        assert!((uhlmann_fidelity(&rho, &noisy).unwrap() - 0.71875).abs() < 1e-10);
        assert!((fidelity_with_pure(&psi, &noisy).unwrap() - 0.71875).abs() < 1e-12);
    }

    #[test]
    fn coherence_of_maximally_coherent() {
        let rho = StateVector::maximally_coherent(4).to_density();
        assert!((l1_coherence(&rho) - 3.0).abs() < 1e-12);
        assert_eq!(l1_coherence(&DensityMatrix::maximally_mixed(4)), 0.0);
    }

    #[test]
    fn qfi_of_plus_state() {
        let plus = StateVector::maximally_coherent(2).to_density();
        let h = HamiltonianSpec::qubit_sum_z(1);
        assert!((qfi(&plus, &h).unwrap() - 4.0).abs() < 1e-12);
        let diag = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        assert_eq!(qfi(&diag, &h).unwrap(), 0.0);
    }

    #[test]
    fn distance_and_purity() {
        let r = bell();
        assert!(trace_distance(&r, &r).unwrap() < 1e-15);
        assert!((purity(&DensityMatrix::maximally_mixed(8)) - 0.125).abs() < 1e-15);
        assert!((purity(&r) - 1.0).abs() < 1e-12);
    }
}
