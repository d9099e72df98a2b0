//! Swap-test purification, its covariant variant, CPMG and twirl models, and the
//! three-stage catalyst pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};
use crate::linalg::{self, CMatrix};
use crate::state::{DensityMatrix, HamiltonianSpec, StateVector};

/// `a·|ψ⟩⟨ψ| + b·I/d`, closed under the swap gadget.
#[derive(Clone, Debug, PartialEq)]
pub struct DepolForm {
    pub a: f64,
    pub b: f64,
    pub target: StateVector,
}

impl DepolForm {
    pub fn new(a: f64, b: f64, target: StateVector) -> Result<Self> {
        if a < 0.0 || b < 0.0 || (a + b - 1.0).abs() > 1e-12 {
            return Err(invalid_arg(format!("depolarized form needs a, b ≥ 0 with a + b = 1, got ({a}, {b})")));
        }
        Ok(Self { a, b, target })
    }

    /// Depolarized target with mixing probability `p`.
    pub fn depolarized(target: StateVector, p: f64) -> Result<Self> {
        Self::new(1.0 - p, p, target)
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    pub fn purity(&self) -> f64 {
        let d = self.dim() as f64;
        self.a * self.a + 2.0 * self.a * self.b / d + self.b * self.b / d
    }

    /// `⟨ψ|ρ|ψ⟩ = a + b/d`.
    pub fn fidelity(&self) -> f64 {
        self.a + self.b / self.dim() as f64
    }

    /// One swap-gadget round in closed form.
    pub fn swap_step(&self) -> Self {
        let d = self.dim() as f64;
        let norm = 1.0 + self.purity();
        let a = (self.a + self.a * self.a + 2.0 * self.a * self.b / d) / norm;
        let b = (self.b + self.b * self.b / d) / norm;
        Self { a, b, target: self.target.clone() }
    }

    pub fn purify(&self, rounds: u32) -> Self {
        (0..rounds).fold(self.clone(), |f, _| f.swap_step())
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let m = self.target.to_density().into_matrix().scale(self.a) + CMatrix::identity(d, d).scale(self.b / d as f64);
        DensityMatrix::from_matrix_unchecked(m)
    }
}

fn gadget(m: &CMatrix) -> CMatrix {
    let sq = m * m;
    let norm = 1.0 + linalg::trace(&sq).re;
    (m + sq).unscale(norm)
}

/// `ω = (ρ + ρ²)/(1 + Tr ρ²)`, the output of a successful swap test on two copies.
pub fn swap_gadget(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_matrix_unchecked(linalg::hermitian_part(&gadget(rho.matrix())))
}

/// `k` nested gadget rounds, consuming `2^k` copies.
pub fn recursive_purify(rho: &DensityMatrix, rounds: u32) -> DensityMatrix {
    (0..rounds).fold(rho.clone(), |r, _| swap_gadget(&r))
}

/// Sector-wise gadget: each degenerate-energy block `B` with weight `t` becomes
/// `t·g(B/t)`; blocks between different sectors keep their input values.
///
/// One concrete reading of the sector-wise symmetrization; it never creates coherence
/// between sectors. Positivity is restored by eigenvalue clamping if it breaks.
pub fn covariant_swap_gadget(rho: &DensityMatrix, h: &HamiltonianSpec) -> Result<DensityMatrix> {
    h.check_dim(rho.dim())?;
    let mut energies: Vec<i64> = h.energies().to_vec();
    energies.sort_unstable();
    energies.dedup();
    let mut out = rho.matrix().clone();
    for e in energies {
        let idx: Vec<usize> = (0..rho.dim()).filter(|&i| h.energy(i) == e).collect();
        let m = idx.len();
        let mut block = CMatrix::zeros(m, m);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                block[(a, b)] = rho.entry(i, j);
            }
        }
        let t = linalg::trace(&block).re;
        if t <= 0.0 {
            continue;
        }
        let new = gadget(&block.unscale(t)).scale(t);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(i, j)] = new[(a, b)];
            }
        }
    }
    let out = linalg::hermitian_part(&out);
    if linalg::hermitian_eigenvalues(&out)[0] < -crate::tolerances::PSD_SLACK {
        return Ok(DensityMatrix::project_psd(&out)?.0);
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

pub fn recursive_covariant_purify(rho: &DensityMatrix, h: &HamiltonianSpec, rounds: u32) -> Result<DensityMatrix> {
    (0..rounds).try_fold(rho.clone(), |r, _| covariant_swap_gadget(&r, h))
}

/// Effective dephasing rate after `n_pulses` equally spaced π-pulses.
pub fn cpmg_gamma(gamma: f64, n_pulses: u32) -> f64 {
    gamma / (n_pulses as f64 + 1.0)
}

/// Average gate fidelity of ladder dephasing, `d⁻² Σ_ij e^{−γ|i−j|}`.
pub fn dephasing_average_fidelity(gamma_eff: f64, d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += (-gamma_eff * i.abs_diff(j) as f64).exp();
        }
    }
    s / (d * d) as f64
}

/// Depolarizing parameter of the exactly twirled dephasing channel.
pub fn twirl_p_eff(gamma_eff: f64, d: usize) -> f64 {
    let f = dephasing_average_fidelity(gamma_eff, d);
    1.0 - (d as f64 * f - 1.0) / (d as f64 - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Twirl {
    AnalyticExact,
    Off,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub cpmg_n: u32,
    pub swap_rounds: u32,
    pub twirl: Twirl,
    pub p_eff_override: Option<f64>,
}

impl PipelineConfig {
    pub fn copies(&self) -> u64 {
        1u64 << self.swap_rounds
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub gamma_eff: f64,
    pub p_eff_formula: f64,
    /// The value actually fed to purification (override if given); `None` with the twirl off.
    pub p_eff: Option<f64>,
    pub f_before_purification: f64,
    pub f_cat: f64,
    pub copies: u64,
}

/// CPMG, twirl, then `k` closed-form swap rounds on the depolarized target.
///
/// With the twirl off there is no depolarized form to purify, so the stage-2 state is
/// the dephased target and purification runs on the dense path.
pub fn pipeline(target: &StateVector, gamma: f64, cfg: &PipelineConfig) -> Result<PipelineReport> {
    if gamma < 0.0 || gamma.is_nan() {
        return Err(invalid_arg(format!("dephasing rate {gamma} must be nonnegative")));
    }
    if cfg.swap_rounds > 40 {
        return Err(invalid_arg("at most 40 swap rounds are supported"));
    }
    let d = target.dim();
    let gamma_eff = cpmg_gamma(gamma, cfg.cpmg_n);
    let p_eff_formula = twirl_p_eff(gamma_eff, d);
    let depolarized = cfg.twirl == Twirl::AnalyticExact || cfg.p_eff_override.is_some();
    let (p_eff, f_before, f_cat) = if depolarized {
        let p = cfg.p_eff_override.unwrap_or(p_eff_formula);
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid_arg(format!("p_eff {p} outside [0, 1]")));
        }
        let form = DepolForm::depolarized(target.clone(), p)?;
        (Some(p), form.fidelity(), form.purify(cfg.swap_rounds).fidelity())
    } else {
        let h = HamiltonianSpec::linear_ladder(d);
        let noisy = crate::noise::dephase(&target.to_density(), &h, gamma_eff)?;
        let out = recursive_purify(&noisy, cfg.swap_rounds);
        (
            None,
            crate::measures::fidelity_with_pure(target, &noisy)?,
            crate::measures::fidelity_with_pure(target, &out)?,
        )
    };
    Ok(PipelineReport { gamma_eff, p_eff_formula, p_eff, f_before_purification: f_before, f_cat, copies: cfg.copies() })
}
