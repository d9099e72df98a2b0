//! Energy-conserving two-qubit gates, the layered recovery circuit and its simulation.
//!
//! Joint register layout is `S, C, A` with little-endian bits: global qubit `q` is bit
//! `q` of the joint basis index, system qubits come first. In tensor-product order the
//! joint space is therefore `A ⊗ C ⊗ S`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::state::{DensityMatrix, HamiltonianSpec, PureEnsemble, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layer {
    L1,
    L2,
    L3,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ECGate {
    pub qubit_a: usize,
    pub qubit_b: usize,
    pub theta: f64,
    pub layer: Layer,
}

impl ECGate {
    pub fn new(qubit_a: usize, qubit_b: usize, theta: f64, layer: Layer) -> Result<Self> {
        if qubit_a == qubit_b {
            return Err(invalid_arg(format!("gate acts twice on qubit {qubit_a}")));
        }
        if !theta.is_finite() {
            return Err(invalid_arg("gate angle must be finite"));
        }
        Ok(Self { qubit_a, qubit_b, theta: theta.rem_euclid(TAU), layer })
    }
}

/// `[[1,0,0,0],[0,c,−is,0],[0,−is,c,0],[0,0,0,1]]`; iSWAP-like at θ = π/2.
pub fn ec_gate_matrix(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    let mis = Complex64::new(0.0, -s);
    let cc = Complex64::new(c, 0.0);
    let (o, z) = (linalg::ONE, linalg::ZERO);
    CMatrix::from_row_slice(4, 4, &[o, z, z, z, z, cc, mis, z, z, mis, cc, z, z, z, z, o])
}

/// Which qubit pairs of each layer receive a gate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pairing {
    /// Every pair of the layer product.
    Full,
    /// Only pairs whose qubits carry equal energy weight, listed per global qubit.
    Resonant(Vec<i64>),
}

/// Register sizes, block repetition and pairing rule of a layered circuit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitShape {
    pub n_system: usize,
    pub n_catalyst: usize,
    pub n_ancilla: usize,
    pub depth: usize,
    pub pairing: Pairing,
}

impl CircuitShape {
    pub fn new(n_system: usize, n_catalyst: usize, n_ancilla: usize, depth: usize) -> Self {
        Self { n_system, n_catalyst, n_ancilla, depth, pairing: Pairing::Full }
    }

    /// Gates only between qubits of equal weight. Catalyst qubits take the system
    /// weights, ancillas the leading system weights (cyclically).
    pub fn resonant(n_system: usize, n_ancilla: usize, depth: usize, system_weights: &[i64]) -> Result<Self> {
        if system_weights.len() != n_system || n_system == 0 {
            return Err(invalid_arg("one weight per system qubit required"));
        }
        let mut w = system_weights.to_vec();
        w.extend_from_slice(system_weights);
        w.extend((0..n_ancilla).map(|k| system_weights[k % n_system]));
        Ok(Self { n_system, n_catalyst: n_system, n_ancilla, depth, pairing: Pairing::Resonant(w) })
    }

    pub fn n_total(&self) -> usize {
        self.n_system + self.n_catalyst + self.n_ancilla
    }

    /// Gate slots `(a, b, layer)` of one block.
    pub fn block_slots(&self) -> Vec<(usize, usize, Layer)> {
        let s: Vec<usize> = (0..self.n_system).collect();
        let c: Vec<usize> = (self.n_system..self.n_system + self.n_catalyst).collect();
        let a: Vec<usize> = (self.n_system + self.n_catalyst..self.n_total()).collect();
        let mut slots = Vec::new();
        for (first, second, layer) in [(&s, &c, Layer::L1), (&c, &a, Layer::L2), (&s, &a, Layer::L3)] {
            for &x in first {
                for &y in second {
                    let keep = match &self.pairing {
                        Pairing::Full => true,
                        Pairing::Resonant(w) => w[x] == w[y],
                    };
                    if keep {
                        slots.push((x, y, layer));
                    }
                }
            }
        }
        slots
    }

    pub fn param_count(&self) -> usize {
        self.block_slots().len() * self.depth
    }

    pub fn build(&self, theta: &[f64]) -> Result<ECCircuit> {
        if self.depth == 0 || self.depth > 3 {
            return Err(invalid_arg(format!("ansatz depth {} outside 1..=3", self.depth)));
        }
        let slots = self.block_slots();
        if theta.len() != slots.len() * self.depth {
            return Err(invalid_arg(format!("expected {} angles, got {}", slots.len() * self.depth, theta.len())));
        }
        let mut gates = Vec::with_capacity(theta.len());
        for (k, &t) in theta.iter().enumerate() {
            let (a, b, layer) = slots[k % slots.len()];
            gates.push(ECGate::new(a, b, t, layer)?);
        }
        ECCircuit::new(self.n_system, self.n_catalyst, self.n_ancilla, gates)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ECCircuit {
    pub n_system: usize,
    pub n_catalyst: usize,
    pub n_ancilla: usize,
    pub gates: Vec<ECGate>,
}

impl ECCircuit {
    pub fn new(n_system: usize, n_catalyst: usize, n_ancilla: usize, gates: Vec<ECGate>) -> Result<Self> {
        let n = n_system + n_catalyst + n_ancilla;
        if n == 0 || n > 24 {
            return Err(invalid_arg(format!("register of {n} qubits is not supported")));
        }
        let rank = |l: Layer| l as u8;
        for (k, g) in gates.iter().enumerate() {
            if g.qubit_a >= n || g.qubit_b >= n || g.qubit_a == g.qubit_b {
                return Err(invalid_arg(format!("gate {k} acts on invalid qubits ({}, {})", g.qubit_a, g.qubit_b)));
            }
        }
        // A new block may restart at L1, but a layer never goes backwards otherwise.
        for w in gates.windows(2) {
            if rank(w[1].layer) < rank(w[0].layer) && w[1].layer != Layer::L1 {
                return Err(invalid_arg("gate layers out of L1, L2, L3 order"));
            }
        }
        Ok(Self { n_system, n_catalyst, n_ancilla, gates })
    }

    pub fn n_total(&self) -> usize {
        self.n_system + self.n_catalyst + self.n_ancilla
    }

    pub fn dim(&self) -> usize {
        1 << self.n_total()
    }

    /// Full joint unitary, built from definitionally embedded gate matrices.
    pub fn unitary(&self) -> CMatrix {
        let d = self.dim();
        let mut u = CMatrix::identity(d, d);
        for g in &self.gates {
            u = embed_two_qubit(&ec_gate_matrix(g.theta), g.qubit_a, g.qubit_b, self.n_total()) * u;
        }
        u
    }

    pub fn apply_dense(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(invalid_arg(format!("circuit acts on dim {}, state has dim {}", self.dim(), rho.dim())));
        }
        let u = self.unitary();
        let out = &u * rho.matrix() * u.adjoint();
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    pub fn apply_statevector(&self, psi: &mut CVector) {
        for g in &self.gates {
            apply_gate_in_place(psi.as_mut_slice(), g.qubit_a, g.qubit_b, g.theta);
        }
    }

    pub fn apply_ensemble(&self, ens: &PureEnsemble) -> Result<PureEnsemble> {
        if ens.dim() != self.dim() {
            return Err(invalid_arg(format!("circuit acts on dim {}, ensemble has dim {}", self.dim(), ens.dim())));
        }
        let members = ens
            .members()
            .par_iter()
            .map(|m| {
                let mut v = m.amplitudes().clone();
                self.apply_statevector(&mut v);
                StateVector::from_cvector_unchecked(v)
            })
            .collect();
        Ok(PureEnsemble { weights: ens.weights().to_vec(), members })
    }
}

/// In-place EC rotation on qubits `a`, `b` of a little-endian statevector.
pub fn apply_gate_in_place(psi: &mut [Complex64], a: usize, b: usize, theta: f64) {
    let (s, c) = theta.sin_cos();
    let (ma, mb) = (1usize << a, 1usize << b);
    for i in 0..psi.len() {
        if i & ma != 0 && i & mb == 0 {
            let j = i ^ ma ^ mb;
            let (x, y) = (psi[i], psi[j]);
            psi[i] = x * c + Complex64::new(y.im * s, -y.re * s);
            psi[j] = y * c + Complex64::new(x.im * s, -x.re * s);
        }
    }
}

/// Embeds a 4×4 gate (basis `|b_a b_b⟩`, `b_a` most significant) on qubits `a`, `b` of `n`.
pub fn embed_two_qubit(g: &CMatrix, a: usize, b: usize, n: usize) -> CMatrix {
    let d = 1usize << n;
    let mask = (1usize << a) | (1usize << b);
    let loc = |i: usize| ((i >> a) & 1) * 2 + ((i >> b) & 1);
    let mut e = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if i & !mask == j & !mask {
                e[(i, j)] = g[(loc(i), loc(j))];
            }
        }
    }
    e
}

/// Embeds a 2×2 gate on qubit `q` of `n`.
pub fn embed_single_qubit(g: &CMatrix, q: usize, n: usize) -> CMatrix {
    let d = 1usize << n;
    let bit = 1usize << q;
    let mut e = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if i & !bit == j & !bit {
                e[(i, j)] = g[((i >> q) & 1, (j >> q) & 1)];
            }
        }
    }
    e
}

/// Frobenius norm of `[U, H]`.
pub fn commutator_defect(u: &CMatrix, h: &HamiltonianSpec) -> Result<f64> {
    h.check_dim(u.nrows())?;
    let hm = h.matrix();
    Ok(linalg::frobenius(&(u * &hm - &hm * u)))
}

pub fn covariance_defect(c: &ECCircuit, h: &HamiltonianSpec) -> Result<f64> {
    commutator_defect(&c.unitary(), h)
}

/// The five-gate circuit on one system, one catalyst and two ancilla qubits.
pub fn build_minimal(theta: &[f64]) -> Result<ECCircuit> {
    if theta.len() != 5 {
        return Err(invalid_arg(format!("minimal circuit takes 5 angles, got {}", theta.len())));
    }
    build_layered(1, 1, 2, theta)
}

/// One L1 → L2 → L3 block over the full register products.
pub fn build_layered(n_s: usize, n_c: usize, n_a: usize, theta: &[f64]) -> Result<ECCircuit> {
    CircuitShape::new(n_s, n_c, n_a, 1).build(theta)
}

/// `ancilla ⊗ catalyst ⊗ noisy` as a dense joint state, ancillas in `|0…0⟩`.
pub fn joint_dense(noisy: &DensityMatrix, catalyst: &DensityMatrix, n_ancilla: usize) -> DensityMatrix {
    let anc = DensityMatrix::basis(1 << n_ancilla, 0).expect("index 0 always valid");
    let ac = crate::measures::tensor(&anc, catalyst);
    crate::measures::tensor(&ac, noisy)
}

/// Joint ensemble from the eigen-ensembles of the noisy state and the catalyst.
pub fn joint_ensemble(noisy: &PureEnsemble, catalyst: &PureEnsemble, n_ancilla: usize) -> PureEnsemble {
    let (ds, dc) = (noisy.dim(), catalyst.dim());
    let d = (ds * dc) << n_ancilla;
    let mut weights = Vec::with_capacity(noisy.len() * catalyst.len());
    let mut members = Vec::with_capacity(noisy.len() * catalyst.len());
    for (wn, sn) in noisy.weights().iter().zip(noisy.members()) {
        for (wc, sc) in catalyst.weights().iter().zip(catalyst.members()) {
            let mut v = CVector::zeros(d);
            for c in 0..dc {
                for s in 0..ds {
                    v[s + ds * c] = sn.amplitudes()[s] * sc.amplitudes()[c];
                }
            }
            weights.push(wn * wc);
            members.push(StateVector::from_cvector_unchecked(v));
        }
    }
    PureEnsemble { weights, members }
}

/// Reduced density matrix of qubits `start..start+n` of an ensemble on `n_total` qubits.
pub fn reduce_ensemble(ens: &PureEnsemble, n_total: usize, start: usize, n: usize) -> DensityMatrix {
    let dl = 1usize << n;
    let low = (1usize << start) - 1;
    let rest_count = 1usize << (n_total - n);
    let mut out = CMatrix::zeros(dl, dl);
    let mut block = vec![linalg::ZERO; dl];
    for (w, m) in ens.weights().iter().zip(ens.members()) {
        let amps = m.amplitudes();
        for r in 0..rest_count {
            let base = ((r >> start) << (start + n)) | (r & low);
            for (l, slot) in block.iter_mut().enumerate() {
                *slot = amps[base | (l << start)];
            }
            if block.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
                continue;
            }
            for i in 0..dl {
                let bi = block[i] * *w;
                for j in 0..dl {
                    out[(i, j)] += bi * block[j].conj();
                }
            }
        }
    }
    DensityMatrix::from_matrix_unchecked(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn gate_examples() {
        assert_eq!(ec_gate_matrix(0.0), CMatrix::identity(4, 4));
        let g = ec_gate_matrix(FRAC_PI_2);
        assert!(g[(1, 1)].norm() < 1e-16);
        assert!((g[(1, 2)] - Complex64::new(0.0, -1.0)).norm() < 1e-16);
        let zz = HamiltonianSpec::qubit_sum_z(2);
        assert!(commutator_defect(&g, &zz).unwrap() < 1e-15);
    }

    #[test]
    fn minimal_layout() {
        let c = build_minimal(&[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let pairs: Vec<_> = c.gates.iter().map(|g| (g.qubit_a, g.qubit_b, g.layer)).collect();
        assert_eq!(
            pairs,
            vec![(0, 1, Layer::L1), (1, 2, Layer::L2), (1, 3, Layer::L2), (0, 2, Layer::L3), (0, 3, Layer::L3)]
        );
        assert!(build_minimal(&[0.0; 4]).is_err());
        assert_eq!(CircuitShape::new(2, 2, 2, 1).param_count(), 12);
    }

    #[test]
    fn zero_angles_are_identity() {
        let c = build_layered(2, 2, 2, &[0.0; 12]).unwrap();
        assert!(linalg::max_abs_diff(&c.unitary(), &CMatrix::identity(64, 64)) < 1e-15);
        let empty = ECCircuit::new(1, 1, 1, vec![]).unwrap();
        assert_eq!(covariance_defect(&empty, &HamiltonianSpec::qubit_sum_z(3)).unwrap(), 0.0);
    }

    #[test]
    fn hadamard_breaks_covariance() {
        let c = build_minimal(&[0.3, 1.1, 0.2, 2.0, 0.9]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let had = CMatrix::from_row_slice(2, 2, &[s, s, s, -s].map(|x| Complex64::new(x, 0.0)));
        let u = embed_single_qubit(&had, 2, 4) * c.unitary();
        assert!(commutator_defect(&u, &HamiltonianSpec::qubit_sum_z(4)).unwrap() > 0.1);
    }

    #[test]
    fn stride_update_matches_embedding() {
        let mut v = CVector::from_iterator(8, (0..8).map(|k| Complex64::new(k as f64, 1.0 - k as f64)));
        let dense = embed_two_qubit(&ec_gate_matrix(0.7), 2, 0, 3) * &v;
        apply_gate_in_place(v.as_mut_slice(), 2, 0, 0.7);
        assert!((dense - v).norm() < 1e-13);
    }

    #[test]
    fn resonant_shape_pairs_equal_weights() {
        let shape = CircuitShape::resonant(2, 2, 2, &[1, 2]).unwrap();
        assert!(shape.block_slots().iter().all(|&(a, b, _)| a % 2 == b % 2));
        assert_eq!(shape.param_count(), 12 / 2 * 2);
    }
}
