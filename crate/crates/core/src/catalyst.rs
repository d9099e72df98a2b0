//! Variational catalyst preparation and its quality metrics.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, CqecError, Result};
use crate::linalg::{self, CVector};
use crate::measures::l1_coherence;
use crate::modes::{mode_set, ModeSet};
use crate::optim::{lbfgs, LbfgsOptions, Minimum};
use crate::seeds::{substream, Purpose};
use crate::state::{DensityMatrix, HamiltonianSpec, StateVector};
use crate::tolerances as tol;

/// Largest dimension the variational catalyst is attempted for.
pub const MAX_VARIATIONAL_DIM: usize = 16;
const LOG_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub coherence: f64,
    pub missing: f64,
    pub rho_min: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { coherence: 1.0, missing: 10.0, rho_min: 5.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub coherence_term: f64,
    pub missing_term: f64,
    pub rho_min_term: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalystBudget {
    pub layers: usize,
    pub restarts: u32,
    pub max_iter: usize,
}

impl Default for CatalystBudget {
    fn default() -> Self {
        Self { layers: 3, restarts: 5, max_iter: 200 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalystReport {
    pub state: DensityMatrix,
    pub l1: f64,
    pub mode_coverage: f64,
    pub rho_min: f64,
    pub cost: f64,
    pub params: Vec<f64>,
    pub restart: u32,
    /// Accepted-step cost trace of every restart.
    pub traces: Vec<Vec<f64>>,
}

pub fn param_count(d: usize, layers: usize) -> usize {
    layers * d * (d - 1)
}

/// Amplitudes of `U(θ, φ)|0⟩`; parameters come as `(θ, φ)` per pair `i < j`, layer by layer.
pub fn ansatz_amplitudes(d: usize, layers: usize, params: &[f64]) -> Result<CVector> {
    if d < 2 {
        return Err(invalid_arg("ansatz needs d ≥ 2"));
    }
    if params.len() != param_count(d, layers) {
        return Err(invalid_arg(format!("ansatz with d={d}, L={layers} takes {} parameters, got {}", param_count(d, layers), params.len())));
    }
    let mut v = CVector::zeros(d);
    v[0] = linalg::ONE;
    let mut k = 0;
    for _ in 0..layers {
        for i in 0..d {
            for j in i + 1..d {
                let (theta, phi) = (params[k], params[k + 1]);
                k += 2;
                let (s, c) = theta.sin_cos();
                let e = Complex64::from_polar(1.0, phi);
                let (x, y) = (v[i], v[j]);
                v[i] = x * c - e * s * y;
                v[j] = e.conj() * s * x + y * c;
            }
        }
    }
    Ok(v)
}

pub fn ansatz_state(d: usize, layers: usize, params: &[f64]) -> Result<DensityMatrix> {
    let v = ansatz_amplitudes(d, layers, params)?;
    Ok(StateVector::from_cvector_unchecked(v).to_density())
}

/// Fraction of `target` gaps present in `state`; 1 for an empty target.
pub fn mode_coverage(state: &DensityMatrix, target: &ModeSet, h: &HamiltonianSpec) -> Result<f64> {
    if target.is_empty() {
        return Ok(1.0);
    }
    let have = mode_set(state, h, target.threshold)?;
    let covered = target.gaps.iter().filter(|g| have.contains(**g)).count();
    Ok(covered as f64 / target.len() as f64)
}

pub fn catalyst_cost_breakdown(state: &DensityMatrix, target: &ModeSet, h: &HamiltonianSpec, w: &CostWeights) -> Result<CostBreakdown> {
    let d = state.dim();
    let coherence_term = -w.coherence * l1_coherence(state) / (d as f64 - 1.0);
    let missing_term = w.missing * (1.0 - mode_coverage(state, target, h)?);
    let rho_min = state.diagonal_probs().into_iter().fold(f64::INFINITY, f64::min);
    let rho_min_term = -w.rho_min * rho_min.max(LOG_FLOOR).ln();
    let total = if rho_min <= 0.0 && w.rho_min > 0.0 {
        f64::INFINITY
    } else {
        coherence_term + missing_term + rho_min_term
    };
    Ok(CostBreakdown { coherence_term, missing_term, rho_min_term, total })
}

/// `−w1·C_ℓ1/(d−1) + w2·missing fraction − w3·ln ρ_min`; `+∞` for a vanishing population.
pub fn catalyst_cost(state: &DensityMatrix, target: &ModeSet, h: &HamiltonianSpec, w: &CostWeights) -> Result<f64> {
    Ok(catalyst_cost_breakdown(state, target, h, w)?.total)
}

/// Budgeted quasi-Newton search over the ansatz with seeded restarts.
pub fn optimize_catalyst(
    h: &HamiltonianSpec,
    target_modes: &ModeSet,
    weights: &CostWeights,
    budget: &CatalystBudget,
    seed: u64,
) -> Result<CatalystReport> {
    let d = h.dim();
    if d > MAX_VARIATIONAL_DIM {
        return Err(CqecError::UnsupportedDimension {
            dim: d,
            reason: format!("variational catalysts are limited to d ≤ {MAX_VARIATIONAL_DIM}; use the purification pipeline"),
        });
    }
    if budget.restarts == 0 || budget.layers == 0 {
        return Err(invalid_arg("catalyst budget needs at least one layer and one restart"));
    }
    let np = param_count(d, budget.layers);
    let cost = |p: &[f64]| -> f64 {
        ansatz_state(d, budget.layers, p)
            .and_then(|s| catalyst_cost(&s, target_modes, h, weights))
            .unwrap_or(f64::INFINITY)
    };
    let opts = LbfgsOptions { max_iter: budget.max_iter, ..Default::default() };
    let runs: Vec<Minimum> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, Purpose::CatalystRestart, r);
            let x0: Vec<f64> = (0..np).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
            lbfgs(cost, &x0, &opts)
        })
        .collect();
    let (best_idx, best) = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .expect("at least one restart");
    let state = ansatz_state(d, budget.layers, &best.x)?;
    let rho_min = state.diagonal_probs().into_iter().fold(f64::INFINITY, f64::min).max(0.0);
    Ok(CatalystReport {
        l1: l1_coherence(&state),
        mode_coverage: mode_coverage(&state, target_modes, h)?,
        rho_min,
        cost: best.value,
        params: best.x.clone(),
        restart: best_idx as u32,
        traces: runs.iter().map(|m| m.trace.clone()).collect(),
        state,
    })
}

/// Modes a catalyst must cover to serve `target`.
pub fn target_modes(target: &DensityMatrix, h: &HamiltonianSpec) -> Result<ModeSet> {
    mode_set(target, h, tol::MODE_THRESHOLD)
}
