//! Recovery objective, the sample-then-refine optimizer and the protocol driver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalyst::{optimize_catalyst, target_modes, CatalystBudget, CostWeights};
use crate::circuit::{joint_ensemble, reduce_ensemble, CircuitShape};
use crate::error::{invalid_arg, Result};
use crate::measures::{self, l1_coherence, pure_overlap, qfi, uhlmann_unchecked};
use crate::modes::{check_recoverable, RecoverabilityDecision};
use crate::noise::{apply_noise, NoiseSpec, NoisyState};
use crate::optim::{latin_hypercube, lbfgs, nelder_mead, LbfgsOptions, Minimum, NmOptions};
use crate::purification::{cpmg_gamma, twirl_p_eff, DepolForm, PipelineConfig, Twirl};
use crate::seeds::{derived_seed, substream, Purpose};
use crate::state::{DensityMatrix, HamiltonianSpec, PureEnsemble, StateVector};

pub const DEFAULT_ALPHA: f64 = 0.7;
/// Catalyst-term multiplier that stands in for exact catalyst preservation.
pub const HARD_CATALYST_PENALTY: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryWeights {
    pub alpha: f64,
    /// Multiplier on the catalyst term; 1 is the plain objective.
    pub catalyst_penalty: f64,
}

impl Default for RecoveryWeights {
    fn default() -> Self {
        Self { alpha: DEFAULT_ALPHA, catalyst_penalty: 1.0 }
    }
}

impl RecoveryWeights {
    pub fn hard_catalyst() -> Self {
        Self { catalyst_penalty: HARD_CATALYST_PENALTY, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) || !(self.catalyst_penalty > 0.0) {
            return Err(invalid_arg(format!("invalid recovery weights {self:?}")));
        }
        Ok(())
    }
}

/// `α·F_S + (1−α)·F_C`.
pub fn objective(f_system: f64, f_catalyst: f64, weights: &RecoveryWeights) -> f64 {
    weights.alpha * f_system + (1.0 - weights.alpha) * weights.catalyst_penalty * f_catalyst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryBudget {
    pub lhs_samples: usize,
    pub refinements: usize,
    pub max_iter: usize,
    pub initial_step: f64,
    /// Quasi-Newton iterations applied after each simplex run; 0 disables.
    pub polish_iter: usize,
}

impl Default for RecoveryBudget {
    fn default() -> Self {
        Self { lhs_samples: 100, refinements: 5, max_iter: 120, initial_step: 0.5, polish_iter: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub f_before: f64,
    pub f_after: f64,
    pub f_catalyst: f64,
    pub objective: f64,
    pub theta: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub recoverable: bool,
    pub seed: u64,
}

/// A fixed recovery instance: noisy input, catalyst, target and circuit shape.
#[derive(Clone, Debug)]
pub struct RecoveryProblem {
    pub target: StateVector,
    pub noisy: DensityMatrix,
    pub catalyst: DensityMatrix,
    pub shape: CircuitShape,
    joint: PureEnsemble,
    catalyst_pure: Option<StateVector>,
}

/// System and catalyst marginals after one circuit application.
#[derive(Clone, Debug)]
pub struct Marginals {
    pub system: DensityMatrix,
    pub catalyst: DensityMatrix,
}

impl RecoveryProblem {
    pub fn new(target: StateVector, noisy: DensityMatrix, catalyst: DensityMatrix, shape: CircuitShape) -> Result<Self> {
        let ds = 1usize << shape.n_system;
        let dc = 1usize << shape.n_catalyst;
        if target.dim() != ds || noisy.dim() != ds {
            return Err(invalid_arg(format!("system register holds dim {ds}, target/noisy have {}/{}", target.dim(), noisy.dim())));
        }
        if catalyst.dim() != dc {
            return Err(invalid_arg(format!("catalyst register holds dim {dc}, catalyst has {}", catalyst.dim())));
        }
        let cat_ens = catalyst.to_ensemble();
        let catalyst_pure = (cat_ens.len() == 1).then(|| cat_ens.members()[0].clone());
        let joint = joint_ensemble(&noisy.to_ensemble(), &cat_ens, shape.n_ancilla);
        Ok(Self { target, noisy, catalyst, shape, joint, catalyst_pure })
    }

    pub fn param_count(&self) -> usize {
        self.shape.param_count()
    }

    pub fn joint(&self) -> &PureEnsemble {
        &self.joint
    }

    pub fn marginals(&self, theta: &[f64]) -> Result<Marginals> {
        let circuit = self.shape.build(theta)?;
        let n = self.shape.n_total();
        let mut weights = Vec::with_capacity(self.joint.len());
        let mut members = Vec::with_capacity(self.joint.len());
        for (w, m) in self.joint.weights().iter().zip(self.joint.members()) {
            let mut v = m.amplitudes().clone();
            circuit.apply_statevector(&mut v);
            weights.push(*w);
            members.push(StateVector::from_cvector_unchecked(v));
        }
        let out = PureEnsemble { weights, members };
        Ok(Marginals {
            system: reduce_ensemble(&out, n, 0, self.shape.n_system),
            catalyst: reduce_ensemble(&out, n, self.shape.n_system, self.shape.n_catalyst),
        })
    }

    /// `(F_S, F_C)` for the given angles.
    pub fn fidelities(&self, theta: &[f64]) -> Result<(f64, f64)> {
        let m = self.marginals(theta)?;
        let fs = pure_overlap(&self.target, m.system.matrix());
        let fc = match &self.catalyst_pure {
            Some(c) => pure_overlap(c, m.catalyst.matrix()),
            None => uhlmann_unchecked(m.catalyst.matrix(), self.catalyst.matrix()),
        };
        Ok((fs, fc))
    }

    pub fn f_before(&self) -> f64 {
        pure_overlap(&self.target, self.noisy.matrix())
    }
}

/// Latin-hypercube sampling over `[0, 2π)`, then simplex refinement of the best
/// samples and of the identity circuit.
pub fn optimize_parameters(
    problem: &RecoveryProblem,
    weights: &RecoveryWeights,
    budget: &RecoveryBudget,
    seed: u64,
) -> Result<RecoveryResult> {
    weights.validate()?;
    let np = problem.param_count();
    let score = |theta: &[f64]| -> f64 {
        problem.fidelities(theta).map(|(fs, fc)| objective(fs, fc, weights)).unwrap_or(f64::NEG_INFINITY)
    };
    let mut rng = substream(seed, Purpose::RecoverySampling, 0);
    let candidates = latin_hypercube(&mut rng, budget.lhs_samples, np, 0.0, std::f64::consts::TAU);
    let scores: Vec<f64> = candidates.par_iter().map(|c| score(c)).collect();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let opts = NmOptions { max_iter: budget.max_iter, f_tol: 1e-10, initial_step: budget.initial_step };
    let mut starts: Vec<Vec<f64>> = order.iter().take(budget.refinements.max(1)).map(|&i| candidates[i].clone()).collect();
    // one extra simplex starts from the identity circuit
    starts.push(vec![0.0; np]);
    let polish = LbfgsOptions { max_iter: budget.polish_iter, ..Default::default() };
    let refined: Vec<Minimum> = starts
        .par_iter()
        .map(|x0| {
            let m = nelder_mead(|x| -score(x), x0, &opts);
            if budget.polish_iter == 0 {
                return m;
            }
            let p = lbfgs(|x| -score(x), &m.x, &polish);
            if p.value < m.value {
                Minimum {
                    iterations: m.iterations + p.iterations,
                    evaluations: m.evaluations + p.evaluations,
                    converged: m.converged || p.converged,
                    trace: m.trace.into_iter().chain(p.trace).collect(),
                    ..p
                }
            } else {
                m
            }
        })
        .collect();
    let evaluations = candidates.len() + refined.iter().map(|m| m.evaluations).sum::<usize>();
    let iterations = refined.iter().map(|m| m.iterations).sum();
    let best = refined
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .map(|(_, m)| m)
        .expect("at least one refinement");
    let theta: Vec<f64> = best.x.iter().map(|t| t.rem_euclid(std::f64::consts::TAU)).collect();
    let (fs, fc) = problem.fidelities(&theta)?;
    Ok(RecoveryResult {
        f_before: problem.f_before(),
        f_after: fs,
        f_catalyst: fc,
        objective: objective(fs, fc, weights),
        theta,
        iterations,
        evaluations,
        converged: refined.iter().all(|m| m.converged),
        recoverable: true,
        seed,
    })
}

/// Dense-path marginals, used to validate the ensemble path.
pub fn dense_marginals(problem: &RecoveryProblem, theta: &[f64]) -> Result<Marginals> {
    let circuit = problem.shape.build(theta)?;
    let joint = crate::circuit::joint_dense(&problem.noisy, &problem.catalyst, problem.shape.n_ancilla);
    let out = circuit.apply_dense(&joint)?;
    let da = 1usize << problem.shape.n_ancilla;
    let dims = [da, problem.catalyst.dim(), problem.noisy.dim()];
    Ok(Marginals {
        system: measures::partial_trace(&out, &dims, &[2])?,
        catalyst: measures::partial_trace(&out, &dims, &[1])?,
    })
}

/// Where the protocol gets its catalyst.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalystSource {
    /// Ansatz state from catalyst-prep covering the target's modes.
    Variational,
    /// The infinite-copy limit of the pipeline: a fresh copy of the target.
    Asymptotic,
    /// Depolarized target after the CPMG/twirl/swap pipeline.
    Pipeline,
}

impl std::str::FromStr for CatalystSource {
    type Err = crate::CqecError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variational" => Ok(Self::Variational),
            "asymptotic" => Ok(Self::Asymptotic),
            "pipeline" => Ok(Self::Pipeline),
            _ => Err(invalid_arg(format!("unknown catalyst source '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub catalyst: CatalystSource,
    pub depth: usize,
    pub n_ancilla: usize,
    pub weights: RecoveryWeights,
    /// Use the hard catalyst penalty when the noisy state lacks target modes.
    pub hard_when_modes_missing: bool,
    pub budget: RecoveryBudget,
    pub catalyst_budget: CatalystBudget,
    /// Dephasing rate and settings for the pipeline catalyst.
    pub pipeline_gamma: f64,
    pub pipeline: PipelineConfig,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            catalyst: CatalystSource::Variational,
            depth: 2,
            n_ancilla: 2,
            weights: RecoveryWeights::default(),
            hard_when_modes_missing: true,
            budget: RecoveryBudget::default(),
            catalyst_budget: CatalystBudget::default(),
            pipeline_gamma: 2.0,
            pipeline: PipelineConfig { cpmg_n: 8, swap_rounds: 3, twirl: Twirl::AnalyticExact, p_eff_override: None },
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolOutcome {
    pub result: RecoveryResult,
    pub decision: RecoverabilityDecision,
    pub weights: RecoveryWeights,
    pub catalyst: DensityMatrix,
    pub catalyst_l1: f64,
    pub noisy: NoisyState,
    pub shape: CircuitShape,
}

/// Circuit shape for a target register under `h`: resonant pairs on additive spectra.
pub fn protocol_shape(h: &HamiltonianSpec, depth: usize, n_ancilla: usize) -> Result<CircuitShape> {
    let w = h
        .qubit_weights()
        .ok_or_else(|| invalid_arg("the protocol needs a qubit-additive spectrum"))?;
    CircuitShape::resonant(w.len(), n_ancilla, depth, &w)
}

pub fn acquire_catalyst(target: &StateVector, h: &HamiltonianSpec, cfg: &ProtocolConfig) -> Result<DensityMatrix> {
    match cfg.catalyst {
        CatalystSource::Asymptotic => Ok(target.to_density()),
        CatalystSource::Variational => {
            let modes = target_modes(&target.to_density(), h)?;
            let seed = derived_seed(cfg.seed, Purpose::CatalystRestart, u32::MAX);
            Ok(optimize_catalyst(h, &modes, &CostWeights::default(), &cfg.catalyst_budget, seed)?.state)
        }
        CatalystSource::Pipeline => {
            let p = match cfg.pipeline.p_eff_override {
                Some(p) => p,
                None => twirl_p_eff(cpmg_gamma(cfg.pipeline_gamma, cfg.pipeline.cpmg_n), target.dim()),
            };
            Ok(DepolForm::depolarized(target.clone(), p)?.purify(cfg.pipeline.swap_rounds).to_density())
        }
    }
}

/// Mode check, catalyst acquisition, optimization and catalyst restitution.
pub fn run_protocol(target: &StateVector, h: &HamiltonianSpec, noise: &NoiseSpec, cfg: &ProtocolConfig) -> Result<ProtocolOutcome> {
    let catalyst = acquire_catalyst(target, h, cfg)?;
    run_protocol_with_catalyst(target, h, noise, catalyst, cfg)
}

/// [`run_protocol`] with an already acquired catalyst, for sweeps that share one.
pub fn run_protocol_with_catalyst(
    target: &StateVector,
    h: &HamiltonianSpec,
    noise: &NoiseSpec,
    catalyst: DensityMatrix,
    cfg: &ProtocolConfig,
) -> Result<ProtocolOutcome> {
    let noisy = apply_noise(target, h, noise)?;
    let decision = check_recoverable(&target.to_density(), &noisy.state, h)?;
    // rank deficiency alone (e.g. dephasing on a degenerate spectrum) keeps the soft objective
    let modes_missing = !decision.span_included || !decision.missing_gaps.is_empty();
    let weights = if modes_missing && cfg.hard_when_modes_missing {
        RecoveryWeights { catalyst_penalty: HARD_CATALYST_PENALTY, ..cfg.weights }
    } else {
        cfg.weights
    };
    let shape = protocol_shape(h, cfg.depth, cfg.n_ancilla)?;
    let problem = RecoveryProblem::new(target.clone(), noisy.state.clone(), catalyst.clone(), shape.clone())?;
    let mut result = optimize_parameters(&problem, &weights, &cfg.budget, cfg.seed)?;
    result.recoverable = decision.recoverable;
    Ok(ProtocolOutcome { result, decision, weights, catalyst_l1: l1_coherence(&catalyst), catalyst, noisy, shape })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub epsilon: f64,
    pub l1: f64,
    pub qfi: f64,
    pub result: RecoveryResult,
}

/// `ε = 0` followed by `n` log-spaced values on `[lo, hi]`.
pub fn threshold_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut g = vec![0.0];
    let (a, b) = (lo.ln(), hi.ln());
    g.extend((0..n).map(|k| match k {
        0 => lo,
        k if k == n - 1 => hi,
        k => (a + (b - a) * k as f64 / (n - 1) as f64).exp(),
    }));
    g
}

/// One ε-family row on the maximally coherent `d`-level ladder state; `index`
/// picks the row's seed substream.
pub fn threshold_row(d: usize, epsilon: f64, index: u32, cfg: &ProtocolConfig) -> Result<ThresholdRow> {
    let target = StateVector::maximally_coherent(d);
    let h = HamiltonianSpec::linear_ladder(d);
    let row_cfg = ProtocolConfig { seed: derived_seed(cfg.seed, Purpose::ExperimentRow, index), ..cfg.clone() };
    let out = run_protocol(&target, &h, &NoiseSpec::EpsilonFamily { epsilon }, &row_cfg)?;
    Ok(ThresholdRow {
        epsilon,
        l1: l1_coherence(&out.noisy.state),
        qfi: qfi(&out.noisy.state, &h)?,
        result: out.result,
    })
}

pub fn threshold_sweep(d: usize, grid: &[f64], cfg: &ProtocolConfig) -> Result<Vec<ThresholdRow>> {
    grid.par_iter().enumerate().map(|(k, &eps)| threshold_row(d, eps, k as u32, cfg)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    pub f_rec: f64,
    pub f_catalyst: f64,
    /// Trace distance between this cycle's output catalyst and the initial one.
    pub deviation: f64,
}

/// Repeats the fixed circuit on fresh noisy inputs, feeding each cycle's output
/// catalyst into the next.
pub fn durability_loop(
    target: &StateVector,
    noisy: &DensityMatrix,
    catalyst: &DensityMatrix,
    shape: &CircuitShape,
    theta: &[f64],
    cycles: usize,
) -> Result<Vec<CycleRecord>> {
    let mut current = catalyst.clone();
    let mut records = Vec::with_capacity(cycles);
    for cycle in 0..cycles {
        let problem = RecoveryProblem::new(target.clone(), noisy.clone(), current.clone(), shape.clone())?;
        let m = problem.marginals(theta)?;
        let f_rec = pure_overlap(target, m.system.matrix());
        let f_catalyst = uhlmann_unchecked(m.catalyst.matrix(), catalyst.matrix());
        let deviation = measures::trace_distance(&m.catalyst, catalyst)?;
        records.push(CycleRecord { cycle, f_rec, f_catalyst, deviation });
        current = m.catalyst;
    }
    Ok(records)
}
