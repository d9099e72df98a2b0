//! Modes of asymmetry, their integer span and the recoverability verdict.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::state::{DensityMatrix, HamiltonianSpec};
use crate::tolerances as tol;

/// Energy gaps `E_i − E_j` carried by nonzero off-diagonal entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    pub gaps: BTreeSet<i64>,
    pub threshold: f64,
}

impl ModeSet {
    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn contains(&self, gap: i64) -> bool {
        self.gaps.contains(&gap)
    }

    pub fn is_subset(&self, other: &ModeSet) -> bool {
        self.gaps.is_subset(&other.gaps)
    }
}

/// The lattice `gℤ`; `generator == 0` is the trivial group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResonantSpan {
    pub generator: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoverabilityDecision {
    pub recoverable: bool,
    /// Target gaps absent from the noisy state's mode set.
    pub missing_gaps: BTreeSet<i64>,
    pub full_rank: bool,
    pub span_included: bool,
    pub target_span: ResonantSpan,
    pub source_span: ResonantSpan,
}

pub fn mode_set(rho: &DensityMatrix, h: &HamiltonianSpec, threshold: f64) -> Result<ModeSet> {
    h.check_dim(rho.dim())?;
    let d = rho.dim();
    let mut gaps = BTreeSet::new();
    for i in 0..d {
        for j in 0..d {
            let gap = h.energy(i) - h.energy(j);
            if i != j && gap != 0 && rho.entry(i, j).norm() > threshold {
                gaps.insert(gap);
            }
        }
    }
    Ok(ModeSet { gaps, threshold })
}

/// Number of ordered off-diagonal pairs `(i, j)` with `|ρ_ij|` above threshold.
pub fn mode_support_size(rho: &DensityMatrix, threshold: f64) -> usize {
    let d = rho.dim();
    (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && rho.entry(i, j).norm() > threshold)
        .count()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn resonant_span(m: &ModeSet) -> ResonantSpan {
    let generator = m.gaps.iter().fold(0u64, |g, &x| gcd(g, x.unsigned_abs()));
    ResonantSpan { generator }
}

/// Whether `target`'s lattice is contained in `source`'s.
pub fn span_included(target: ResonantSpan, source: ResonantSpan) -> bool {
    match (target.generator, source.generator) {
        (0, _) => true,
        (_, 0) => false,
        (t, s) => t % s == 0,
    }
}

pub fn check_recoverable(target: &DensityMatrix, noisy: &DensityMatrix, h: &HamiltonianSpec) -> Result<RecoverabilityDecision> {
    let tm = mode_set(target, h, tol::MODE_THRESHOLD)?;
    let sm = mode_set(noisy, h, tol::MODE_THRESHOLD)?;
    let target_span = resonant_span(&tm);
    let source_span = resonant_span(&sm);
    let included = span_included(target_span, source_span);
    let full_rank = noisy.eigenvalues()[0] > tol::FULL_RANK;
    Ok(RecoverabilityDecision {
        recoverable: included && full_rank,
        missing_gaps: tm.gaps.difference(&sm.gaps).copied().collect(),
        full_rank,
        span_included: included,
        target_span,
        source_span,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::StateVector;

    fn set(gaps: &[i64]) -> ModeSet {
        ModeSet { gaps: gaps.iter().copied().collect(), threshold: tol::MODE_THRESHOLD }
    }

    #[test]
    fn gaps_of_maximally_coherent_ladder() {
        let rho = StateVector::maximally_coherent(4).to_density();
        let m = mode_set(&rho, &HamiltonianSpec::linear_ladder(4), tol::MODE_THRESHOLD).unwrap();
        assert_eq!(m.gaps, [-3, -2, -1, 1, 2, 3].into_iter().collect());
        let diag = DensityMatrix::maximally_mixed(4);
        assert!(mode_set(&diag, &HamiltonianSpec::linear_ladder(4), tol::MODE_THRESHOLD).unwrap().is_empty());
    }

    #[test]
    fn span_generators() {
        assert_eq!(resonant_span(&set(&[-4, -2, 2, 4])).generator, 2);
        assert_eq!(resonant_span(&set(&[-3, -2, 2, 3])).generator, 1);
        assert_eq!(resonant_span(&set(&[])).generator, 0);
    }

    #[test]
    fn inclusion() {
        let g = |generator| ResonantSpan { generator };
        assert!(span_included(g(2), g(1)));
        assert!(!span_included(g(1), g(2)));
        assert!(!span_included(g(1), g(0)));
        assert!(span_included(g(0), g(0)));
    }

    #[test]
    fn fully_dephased_is_unrecoverable() {
        let h = HamiltonianSpec::linear_ladder(4);
        let target = StateVector::maximally_coherent(4).to_density();
        let d = check_recoverable(&target, &DensityMatrix::maximally_mixed(4), &h).unwrap();
        assert!(!d.recoverable);
        assert_eq!(d.missing_gaps.len(), 6);
    }
}
