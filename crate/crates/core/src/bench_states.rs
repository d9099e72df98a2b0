//! Deterministic generators for the benchmark target states.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::embed_single_qubit;
use crate::error::{invalid_arg, CqecError, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::state::{HamiltonianSpec, StateVector};

pub const QDRIFT_GATES: usize = 80;
pub const QDRIFT_J: f64 = 1.0;
pub const QDRIFT_H: f64 = 0.5;
pub const QDRIFT_TIME: f64 = 1.0;
pub const HUBBARD_HOPPING: f64 = 1.0;
pub const HUBBARD_U: f64 = 2.0;
pub const CFQPE_DT: f64 = 0.4;
pub const REGEV_WIDTH: f64 = 2.0;
pub const REGEV_GRID: usize = 8;
pub const REGEV_MODULUS: u64 = 15;
pub const REGEV_BASES: (u64, u64) = (2, 7);
pub const REGEV_RESIDUE: u64 = 1;
pub const TTN_LAYERS: usize = 2;
pub const TTN_LENGTHS: [u32; 6] = [5, 10, 15, 20, 25, 30];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "qkan")]
    Qkan,
    #[serde(rename = "qdrift")]
    QDrift,
    #[serde(rename = "cfqpe")]
    CfQpe,
    #[serde(rename = "regev")]
    Regev,
    #[serde(rename = "ttn")]
    TtnCrypto,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Qkan, Algorithm::QDrift, Algorithm::CfQpe, Algorithm::Regev, Algorithm::TtnCrypto];

    pub fn dim(self) -> usize {
        match self {
            Algorithm::Qkan => 4,
            Algorithm::QDrift | Algorithm::TtnCrypto => 8,
            Algorithm::CfQpe => 16,
            Algorithm::Regev => 64,
        }
    }

    pub fn n_qubits(self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn hamiltonian(self) -> HamiltonianSpec {
        HamiltonianSpec::qubit_sum_z(self.n_qubits())
    }

    /// The target state used by the experiments.
    pub fn target(self, seed: u64) -> Result<StateVector> {
        match self {
            Algorithm::Qkan => qkan_state(false),
            Algorithm::QDrift => qdrift_state(seed, false),
            Algorithm::CfQpe => cfqpe_state(&CfQpeParams::default()),
            Algorithm::Regev => regev_state(REGEV_GRID),
            Algorithm::TtnCrypto => ttn_state(TTN_LENGTHS[0], seed),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Qkan => "qkan",
            Algorithm::QDrift => "qdrift",
            Algorithm::CfQpe => "cfqpe",
            Algorithm::Regev => "regev",
            Algorithm::TtnCrypto => "ttn",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = CqecError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "qkan" => Ok(Algorithm::Qkan),
            "qdrift" => Ok(Algorithm::QDrift),
            "cfqpe" => Ok(Algorithm::CfQpe),
            "regev" => Ok(Algorithm::Regev),
            "ttn" | "ttncrypto" => Ok(Algorithm::TtnCrypto),
            _ => Err(CqecError::Config(format!("unknown algorithm '{s}'"))),
        }
    }
}

/// Chebyshev coefficients `(1, 0.5, −0.5, −1)`, optionally truncated after degree 2.
pub fn qkan_state(truncated: bool) -> Result<StateVector> {
    let last = if truncated { 0.0 } else { -1.0 };
    StateVector::from_real(&[1.0, 0.5, -0.5, last])
}

fn pauli(name: char) -> CMatrix {
    let (o, z, i) = (linalg::ONE, linalg::ZERO, Complex64::new(0.0, 1.0));
    let e = match name {
        'X' => [z, o, o, z],
        'Y' => [z, -i, i, z],
        'Z' => [o, z, z, -o],
        _ => [o, z, z, o],
    };
    CMatrix::from_row_slice(2, 2, &e)
}

/// Coefficient and operator of each term of the 3-qubit open-chain Heisenberg model.
fn heisenberg_terms() -> Vec<(f64, CMatrix)> {
    let n = 3;
    let mut terms = Vec::new();
    for q in 0..n - 1 {
        for p in ['X', 'Y', 'Z'] {
            let op = embed_single_qubit(&pauli(p), q, n) * embed_single_qubit(&pauli(p), q + 1, n);
            terms.push((QDRIFT_J, op));
        }
    }
    for q in 0..n {
        terms.push((QDRIFT_H, embed_single_qubit(&pauli('Z'), q, n)));
    }
    terms
}

/// Heisenberg-chain evolution of `|+++⟩`, exactly or by qDRIFT sampling.
pub fn qdrift_state(seed: u64, exact: bool) -> Result<StateVector> {
    let terms = heisenberg_terms();
    let init = StateVector::maximally_coherent(8);
    let mut v = init.amplitudes().clone();
    if exact {
        let h = terms.iter().fold(CMatrix::zeros(8, 8), |acc, (c, p)| acc + p.scale(*c));
        v = linalg::unitary_evolution(&h, QDRIFT_TIME) * v;
    } else {
        let lambda: f64 = terms.iter().map(|t| t.0.abs()).sum();
        let tau = lambda * QDRIFT_TIME / QDRIFT_GATES as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let id = CMatrix::identity(8, 8);
        for _ in 0..QDRIFT_GATES {
            let mut r = rng.random::<f64>() * lambda;
            let mut k = terms.len() - 1;
            for (j, t) in terms.iter().enumerate() {
                if r < t.0.abs() {
                    k = j;
                    break;
                }
                r -= t.0.abs();
            }
            let (c, p) = &terms[k];
            let angle = tau * c.signum();
            let gate = id.scale(angle.cos()) - p * Complex64::new(0.0, angle.sin());
            v = gate * v;
        }
    }
    StateVector::normalized(v.iter().copied().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CfQpeParams {
    pub hopping: f64,
    pub interaction: f64,
    pub dt: f64,
}

impl Default for CfQpeParams {
    fn default() -> Self {
        Self { hopping: HUBBARD_HOPPING, interaction: HUBBARD_U, dt: CFQPE_DT }
    }
}

/// Two-site Hubbard Hamiltonian on modes `0↑, 0↓, 1↑, 1↓` (Jordan–Wigner, bit set = occupied).
pub fn hubbard_hamiltonian(hopping: f64, interaction: f64) -> CMatrix {
    let n = 4;
    let lower = CMatrix::from_row_slice(2, 2, &[linalg::ZERO, linalg::ONE, linalg::ZERO, linalg::ZERO]);
    let annihilate = |j: usize| {
        let mut m = embed_single_qubit(&lower, j, n);
        for k in 0..j {
            m = embed_single_qubit(&pauli('Z'), k, n) * m;
        }
        m
    };
    let a: Vec<CMatrix> = (0..n).map(annihilate).collect();
    let num: Vec<CMatrix> = a.iter().map(|x| x.adjoint() * x).collect();
    let mut h = CMatrix::zeros(16, 16);
    for spin in 0..2 {
        let (i, j) = (spin, 2 + spin);
        h -= (a[i].adjoint() * &a[j] + a[j].adjoint() * &a[i]).scale(hopping);
    }
    for site in 0..2 {
        h += (&num[2 * site] * &num[2 * site + 1]).scale(interaction);
    }
    h
}

/// Normalised time series `f_j = ⟨ψ|e^{−iHjΔt}|ψ⟩`, `j = 0..15`, with `ψ` uniform.
pub fn cfqpe_series(params: &CfQpeParams) -> Vec<Complex64> {
    let h = hubbard_hamiltonian(params.hopping, params.interaction);
    let psi = StateVector::maximally_coherent(16);
    let v = psi.amplitudes();
    (0..16)
        .map(|j| {
            let u = linalg::unitary_evolution(&h, j as f64 * params.dt);
            v.dotc(&(u * v))
        })
        .collect()
}

pub fn cfqpe_state(params: &CfQpeParams) -> Result<StateVector> {
    StateVector::normalized(cfqpe_series(params))
}

fn grid_coord(k: usize, size: usize) -> f64 {
    k as f64 - (size as f64 - 1.0) / 2.0
}

/// Centred Gaussian `exp(−π‖x‖²/s²)` on the `size × size` grid, index `x1 + size·x2`.
pub fn regev_envelope(size: usize) -> Vec<f64> {
    let mut amps = vec![0.0; size * size];
    for x2 in 0..size {
        for x1 in 0..size {
            let r2 = grid_coord(x1, size).powi(2) + grid_coord(x2, size).powi(2);
            amps[x1 + size * x2] = (-PI * r2 / (REGEV_WIDTH * REGEV_WIDTH)).exp();
        }
    }
    amps
}

fn mod_pow(base: u64, exp: usize, m: u64) -> u64 {
    (0..exp).fold(1 % m, |acc, _| acc * base % m)
}

/// Gaussian envelope projected onto `2^{x1}·7^{x2} ≡ 1 (mod 15)`, then a 2D Fourier transform.
pub fn regev_state(size: usize) -> Result<StateVector> {
    if size != REGEV_GRID {
        return Err(invalid_arg(format!("only a {REGEV_GRID}-point grid is supported, got {size}")));
    }
    let env = regev_envelope(size);
    let mut pre = vec![linalg::ZERO; size * size];
    for x2 in 0..size {
        for x1 in 0..size {
            let v = mod_pow(REGEV_BASES.0, x1, REGEV_MODULUS) * mod_pow(REGEV_BASES.1, x2, REGEV_MODULUS) % REGEV_MODULUS;
            if v == REGEV_RESIDUE {
                pre[x1 + size * x2] = Complex64::new(env[x1 + size * x2], 0.0);
            }
        }
    }
    let mut out = vec![linalg::ZERO; size * size];
    for k2 in 0..size {
        for k1 in 0..size {
            let mut acc = linalg::ZERO;
            for x2 in 0..size {
                for x1 in 0..size {
                    let phase = TAU * ((k1 * x1 + k2 * x2) % size) as f64 / size as f64;
                    acc += pre[x1 + size * x2] * Complex64::from_polar(1.0, phase);
                }
            }
            out[k1 + size * k2] = acc;
        }
    }
    StateVector::normalized(out)
}

/// `2π·frac(sin(seed + 31ℓ + 7q)·len/30)`; slots `q = 0..2` are RY, `3..5` are RZ.
pub fn ttn_angle(seed: u64, layer: usize, slot: usize, plaintext_len: u32) -> f64 {
    let x = (seed as f64 + 31.0 * layer as f64 + 7.0 * slot as f64).sin() * plaintext_len as f64 / 30.0;
    TAU * x.rem_euclid(1.0)
}

/// Layered RY, CNOT chain, RZ circuit on three qubits starting from `|000⟩`.
pub fn ttn_state(plaintext_len: u32, seed: u64) -> Result<StateVector> {
    if !TTN_LENGTHS.contains(&plaintext_len) {
        return Err(invalid_arg(format!("plaintext length {plaintext_len} not in {TTN_LENGTHS:?}")));
    }
    let n = 3;
    let mut v = CVector::zeros(8);
    v[0] = linalg::ONE;
    for layer in 0..TTN_LAYERS {
        for q in 0..n {
            let t = ttn_angle(seed, layer, q, plaintext_len) / 2.0;
            let (s, c) = t.sin_cos();
            let ry = CMatrix::from_row_slice(2, 2, &[c, -s, s, c].map(|x| Complex64::new(x, 0.0)));
            v = embed_single_qubit(&ry, q, n) * v;
        }
        for q in 0..n - 1 {
            let mut next = v.clone();
            for i in 0..8 {
                if (i >> q) & 1 == 1 {
                    next[i ^ (1 << (q + 1))] = v[i];
                }
            }
            v = next;
        }
        for q in 0..n {
            let t = ttn_angle(seed, layer, n + q, plaintext_len) / 2.0;
            let rz = CMatrix::from_row_slice(
                2,
                2,
                &[Complex64::from_polar(1.0, -t), linalg::ZERO, linalg::ZERO, Complex64::from_polar(1.0, t)],
            );
            v = embed_single_qubit(&rz, q, n) * v;
        }
    }
    StateVector::normalized(v.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::mode_support_size;

    #[test]
    fn qkan_amplitudes() {
        let full = qkan_state(false).unwrap();
        assert!((full.amplitudes()[3].re + 1.0 / 2.5f64.sqrt()).abs() < 1e-15);
        let t = qkan_state(true).unwrap();
        assert!((t.amplitudes()[0].re - 1.0 / 1.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.amplitudes()[3].norm(), 0.0);
    }

    #[test]
    fn qdrift_is_seeded() {
        let a = qdrift_state(1, false).unwrap();
        assert_eq!(a, qdrift_state(1, false).unwrap());
        assert_ne!(a, qdrift_state(2, false).unwrap());
        assert_eq!(qdrift_state(1, true).unwrap(), qdrift_state(9, true).unwrap());
    }

    #[test]
    fn cfqpe_series_starts_at_one() {
        let f = cfqpe_series(&CfQpeParams::default());
        assert!((f[0] - linalg::ONE).norm() < 1e-12);
        assert_eq!(cfqpe_state(&CfQpeParams::default()).unwrap().dim(), 16);
        let h = hubbard_hamiltonian(1.0, 2.0);
        assert!(linalg::hermiticity_defect(&h) < 1e-15);
    }

    #[test]
    fn regev_envelope_decays() {
        let env = regev_envelope(8);
        let mut pts: Vec<(f64, f64)> = (0..64)
            .map(|k| (grid_coord(k % 8, 8).powi(2) + grid_coord(k / 8, 8).powi(2), env[k]))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pts.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-15));
        assert_eq!(regev_state(8).unwrap().dim(), 64);
    }

    #[test]
    fn ttn_mode_support() {
        for len in TTN_LENGTHS {
            let s = ttn_state(len, 0).unwrap();
            assert_eq!(mode_support_size(&s.to_density(), 1e-14), 56, "length {len}");
        }
        assert!(ttn_state(7, 0).is_err());
    }
}
