//! Analytic QEC baselines, finite-copy bounds and the bound-constant power-law fit.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, CqecError, Result};
use crate::measures::l1_coherence;
use crate::state::DensityMatrix;

/// Surface-code threshold used by the logical-error model.
pub const SURFACE_THRESHOLD: f64 = 0.01;

/// Per-qubit error rate equivalent to a register-level error probability `p`.
pub fn per_qubit_rate(p: f64, n_q: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || n_q == 0 {
        return Err(invalid_arg(format!("per-qubit rate needs p in [0, 1] and n_q ≥ 1, got ({p}, {n_q})")));
    }
    Ok(1.0 - (1.0 - p).powf(1.0 / n_q as f64))
}

/// Probability that at most one of seven qubits errs.
pub fn steane_fidelity(p_eff: f64) -> f64 {
    let q = 1.0 - p_eff;
    q.powi(7) + 7.0 * p_eff * q.powi(6)
}

/// `(p/p_th)^{(distance+1)/2}` clipped to `[0, 1]`.
pub fn surface_logical_error(p_eff: f64, distance: u32) -> Result<f64> {
    if distance < 3 || distance.is_multiple_of(2) {
        return Err(invalid_arg(format!("surface code distance must be odd and ≥ 3, got {distance}")));
    }
    let exp = (distance as f64 + 1.0) / 2.0;
    Ok((p_eff / SURFACE_THRESHOLD).powf(exp).clamp(0.0, 1.0))
}

/// Upper bound `C²/(4n) + C/√n` on the infidelity after `n` copies.
pub fn finite_copy_infidelity(c: f64, n: f64) -> f64 {
    c * c / (4.0 * n) + c / n.sqrt()
}

/// Smallest `n` with `finite_copy_infidelity(c, n) ≤ ε`.
pub fn copies_for_target(c: f64, eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) || !(c > 0.0) || !c.is_finite() {
        return Err(invalid_arg(format!("copy count needs C > 0 and ε in (0, 1), got ({c}, {eps})")));
    }
    // With x = C/√n the bound is x²/4 + x = ε, so x = 2(√(1+ε) − 1).
    let x = 2.0 * ((1.0 + eps).sqrt() - 1.0);
    let mut n = ((c / x).powi(2)).ceil().max(1.0) as u64;
    while n > 1 && finite_copy_infidelity(c, (n - 1) as f64) <= eps {
        n -= 1;
    }
    while finite_copy_infidelity(c, n as f64) > eps {
        n += 1;
    }
    Ok(n)
}

/// `d·C_ℓ1(ρ0)/min|ρ_ij|` over off-diagonals above `threshold`.
pub fn bound_constant(rho0: &DensityMatrix, threshold: f64) -> Result<f64> {
    let d = rho0.dim();
    let mut min = f64::INFINITY;
    for i in 0..d {
        for j in 0..d {
            let v = rho0.entry(i, j).norm();
            if i != j && v > threshold {
                min = min.min(v);
            }
        }
    }
    if !min.is_finite() {
        return Err(CqecError::UndefinedBound("state has no coherence above threshold".into()));
    }
    Ok(d as f64 * l1_coherence(rho0) / min)
}

/// `1/|ρ_ij,min|²`.
pub fn copy_mu(rho_min_offdiag: f64) -> Result<f64> {
    if !(rho_min_offdiag > 0.0) {
        return Err(CqecError::UndefinedBound(format!("copy rate undefined for coherence {rho_min_offdiag}")));
    }
    Ok(1.0 / (rho_min_offdiag * rho_min_offdiag))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub r_squared: f64,
}

/// Least squares of `ln C` against `ln d`.
pub fn power_law_fit(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 2 {
        return Err(CqecError::Fit("need at least two points".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(CqecError::Fit("points must be positive".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-24 {
        return Err(CqecError::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(PowerLawFit { coefficient: intercept.exp(), exponent: slope, r_squared })
}
