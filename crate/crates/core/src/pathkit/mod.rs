//! Goldilocks sequences, pre-paths and paths, the explicit path formulas and
//! the parity decision procedure.

mod paths;
mod phi;
mod psi;

pub use paths::{
    eval_parity_sentence, find_eta_path, length_eta, length_eta_prepath, parity_of_length, pre_path,
    pre_path_exists, verify_witness, LengthResult, ParityEval, PathKind, PathWitness, Starts,
};
pub use phi::{PhiError, PhiFormula, PhiTriple};
pub use psi::{build_psi, build_psi_prime, PhiAtoms, PSI_PRIME_MAX_M};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("need 0 < alpha1 < alpha2, got alpha1 = {0}, alpha2 = {1}")]
    InvalidAlphas(f64, f64),
    #[error("eta entries must be 1 or 2, found {0}")]
    InvalidEntry(u8),
    #[error("indices out of range: need m1 <= m2 <= {len}, got m1 = {m1}, m2 = {m2}")]
    IndexOutOfRange { m1: usize, m2: usize, len: usize },
    #[error("node {node} outside 1..={n}")]
    NodeOutOfRange { node: u32, n: u32 },
    #[error("psi' materialization is capped at m <= {cap}, got {m}")]
    PsiTooLarge { m: usize, cap: usize },
}

/// A sequence over `{1, 2}` with its exact running balance
/// `gamma_n = #{i < n : eta(i) = 2} * alpha2 - #{i < n : eta(i) = 1} * alpha1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaSequence {
    pub entries: Vec<u8>,
    pub alpha1: f64,
    pub alpha2: f64,
    /// `gammas[n]` for `n` in `0..=len`.
    pub gammas: Vec<f64>,
}

fn gamma(twos: u64, ones: u64, alpha1: f64, alpha2: f64) -> f64 {
    twos as f64 * alpha2 - ones as f64 * alpha1
}

impl EtaSequence {
    pub fn explicit(entries: Vec<u8>, alpha1: f64, alpha2: f64) -> Result<Self, PathError> {
        if let Some(&bad) = entries.iter().find(|&&e| e != 1 && e != 2) {
            return Err(PathError::InvalidEntry(bad));
        }
        let (mut ones, mut twos) = (0u64, 0u64);
        let mut gammas = Vec::with_capacity(entries.len() + 1);
        gammas.push(0.0);
        for &e in &entries {
            if e == 2 {
                twos += 1;
            } else {
                ones += 1;
            }
            gammas.push(gamma(twos, ones, alpha1, alpha2));
        }
        Ok(EtaSequence {
            entries,
            alpha1,
            alpha2,
            gammas,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `eta(i)`, 0-indexed.
    pub fn at(&self, i: usize) -> u8 {
        self.entries[i]
    }

    /// The closed band `[alpha2 - alpha1, 2 alpha2]`.
    pub fn band(&self) -> (f64, f64) {
        (self.alpha2 - self.alpha1, 2.0 * self.alpha2)
    }

    /// First `n >= 1` with `gamma_n` outside the band.
    pub fn first_band_violation(&self) -> Option<usize> {
        let (lo, hi) = self.band();
        (1..self.gammas.len()).find(|&i| !(lo..=hi).contains(&self.gammas[i]))
    }
}

/// Greedy rule: `eta(n) = 2` iff `gamma_n <= alpha2`.
pub fn goldilocks_eta(alpha1: f64, alpha2: f64, length: usize) -> Result<EtaSequence, PathError> {
    if !(0.0 < alpha1 && alpha1 < alpha2) {
        return Err(PathError::InvalidAlphas(alpha1, alpha2));
    }
    let (mut ones, mut twos) = (0u64, 0u64);
    let mut entries = Vec::with_capacity(length);
    let mut gammas = Vec::with_capacity(length + 1);
    gammas.push(0.0);
    for _ in 0..length {
        if *gammas.last().unwrap() <= alpha2 {
            entries.push(2);
            twos += 1;
        } else {
            entries.push(1);
            ones += 1;
        }
        gammas.push(gamma(twos, ones, alpha1, alpha2));
    }
    Ok(EtaSequence {
        entries,
        alpha1,
        alpha2,
        gammas,
    })
}

/// Iterated binary logarithm: 0 below 2, else `log_star(log2 x) + 1`.
pub fn log_star(x: f64) -> u32 {
    let mut x = x;
    let mut k = 0;
    while x >= 2.0 {
        x = x.log2();
        k += 1;
    }
    k
}
