//! Seeded samplers for the two sparse random models and degree statistics.
//!
//! Case A is `G(n, n^-alpha)` on unordered pairs. Case B draws two
//! irreflexive relations on ordered pairs: `R2` with probability
//! `n^-(1-alpha2)` and `R1` with probability `n^-(1+alpha1)`.
//!
//! Edges are drawn by geometric skipping over the linearized pair index, so
//! the cost is proportional to the number of edges. Each relation has its
//! own ChaCha stream keyed by `(seed, n, trial, symbol)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::relstruct::{Node, RelationalStructure, Vocabulary};

pub const DEFAULT_ALPHA1: f64 = std::f64::consts::SQRT_2 / 10.0;
/// `sqrt(3) / 8`
pub const DEFAULT_ALPHA2: f64 = 0.216_506_350_946_109_66;
pub const DEFAULT_ALPHA_A: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    A,
    B,
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Case::A => "a",
            Case::B => "b",
        })
    }
}

impl std::str::FromStr for Case {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "a" | "A" => Ok(Case::A),
            "b" | "B" => Ok(Case::B),
            _ => Err(format!("unknown case `{s}` (expected a or b)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("n must be at least 1")]
    EmptyUniverse,
    #[error("alpha = {0} must lie in (0, 1)")]
    AlphaOutOfRange(f64),
    #[error("need 0 < alpha1 < alpha2 < {bound}, got alpha1 = {alpha1}, alpha2 = {alpha2}")]
    AlphaPairOutOfRange { alpha1: f64, alpha2: f64, bound: f64 },
    #[error("sampler configured for case {0:?}")]
    WrongCase(Case),
    #[error("relation `{0}` is not a binary relation of this structure")]
    UnknownRelation(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SamplerConfig {
    pub case: Case,
    pub n: u32,
    pub alpha: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub seed: u64,
    pub trial: u64,
    /// Lifts the `alpha2 < 1/4` bound to `alpha2 < 1` for mechanism runs.
    #[serde(default)]
    pub nonpaper_regime: bool,
}

impl SamplerConfig {
    pub fn case_a(n: u32, alpha: f64, seed: u64, trial: u64) -> Self {
        SamplerConfig {
            case: Case::A,
            n,
            alpha,
            alpha1: DEFAULT_ALPHA1,
            alpha2: DEFAULT_ALPHA2,
            seed,
            trial,
            nonpaper_regime: false,
        }
    }

    pub fn case_b(n: u32, alpha1: f64, alpha2: f64, seed: u64, trial: u64) -> Self {
        SamplerConfig {
            case: Case::B,
            n,
            alpha: DEFAULT_ALPHA_A,
            alpha1,
            alpha2,
            seed,
            trial,
            nonpaper_regime: false,
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.n == 0 {
            return Err(SamplerError::EmptyUniverse);
        }
        match self.case {
            Case::A if !(self.alpha > 0.0 && self.alpha < 1.0) => Err(SamplerError::AlphaOutOfRange(self.alpha)),
            Case::B => {
                let bound = if self.nonpaper_regime { 1.0 } else { 0.25 };
                if 0.0 < self.alpha1 && self.alpha1 < self.alpha2 && self.alpha2 < bound {
                    Ok(())
                } else {
                    Err(SamplerError::AlphaPairOutOfRange {
                        alpha1: self.alpha1,
                        alpha2: self.alpha2,
                        bound,
                    })
                }
            }
            _ => Ok(()),
        }
    }
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for one `(seed, n, trial, label)` cell.
pub fn stream_rng(seed: u64, n: u32, trial: u64, label: &str) -> ChaCha8Rng {
    // FNV-1a of the label, then SplitMix over all inputs to fill the key.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    let mut state = seed;
    let mut key = [0u8; 32];
    let words = [seed, n as u64, trial, h];
    for (chunk, w) in key.chunks_mut(8).zip(words) {
        state ^= w;
        chunk.copy_from_slice(&splitmix(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Indices in `0..total` chosen independently with probability `p`.
fn bernoulli_indices(rng: &mut ChaCha8Rng, total: u64, p: f64, mut emit: impl FnMut(u64)) {
    if total == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(emit);
        return;
    }
    let gap = Geometric::new(p).expect("p in (0,1)");
    let mut t = gap.sample(rng);
    while t < total {
        emit(t);
        t = match t.checked_add(1 + gap.sample(rng)) {
            Some(next) => next,
            None => break,
        };
    }
}

pub fn edge_probability_a(n: u32, alpha: f64) -> f64 {
    (n as f64).powf(-alpha)
}

pub fn r2_probability(n: u32, alpha2: f64) -> f64 {
    (n as f64).powf(-(1.0 - alpha2))
}

pub fn r1_probability(n: u32, alpha1: f64) -> f64 {
    (n as f64).powf(-(1.0 + alpha1))
}

/// Mean and standard deviation of `Binomial(trials, p)`.
pub fn binomial_moments(trials: f64, p: f64) -> (f64, f64) {
    (trials * p, (trials * p * (1.0 - p)).sqrt())
}

pub fn sample_case_a(config: &SamplerConfig) -> Result<RelationalStructure, SamplerError> {
    config.validate()?;
    if config.case != Case::A {
        return Err(SamplerError::WrongCase(config.case));
    }
    let n = config.n;
    let p = edge_probability_a(n, config.alpha);
    let total = n as u64 * (n as u64 - 1) / 2;
    let mut rng = stream_rng(config.seed, n, config.trial, "R");
    let mut pairs = Vec::new();
    // Row `a` holds pairs (a, b) for b in a+1..=n; rows are walked forwards
    // since indices arrive in increasing order.
    let (mut row, mut row_start) = (1u32, 0u64);
    bernoulli_indices(&mut rng, total, p, |t| {
        while t >= row_start + (n - row) as u64 {
            row_start += (n - row) as u64;
            row += 1;
        }
        pairs.push((row, row + 1 + (t - row_start) as u32));
    });
    Ok(RelationalStructure::from_sorted_binary(Vocabulary::graph(), n, vec![pairs]))
}

fn ordered_pairs(rng: &mut ChaCha8Rng, n: u32, p: f64) -> Vec<(Node, Node)> {
    let span = n as u64 - 1;
    let mut pairs = Vec::new();
    bernoulli_indices(rng, n as u64 * span, p, |t| {
        let a = (t / span) as u32;
        let r = (t % span) as u32;
        let b = if r < a { r } else { r + 1 };
        pairs.push((a + 1, b + 1));
    });
    pairs
}

pub fn sample_case_b(config: &SamplerConfig) -> Result<RelationalStructure, SamplerError> {
    config.validate()?;
    if config.case != Case::B {
        return Err(SamplerError::WrongCase(config.case));
    }
    let n = config.n;
    let r1 = ordered_pairs(
        &mut stream_rng(config.seed, n, config.trial, "R1"),
        n,
        r1_probability(n, config.alpha1),
    );
    let r2 = ordered_pairs(
        &mut stream_rng(config.seed, n, config.trial, "R2"),
        n,
        r2_probability(n, config.alpha2),
    );
    Ok(RelationalStructure::from_sorted_binary(Vocabulary::digraph_pair(), n, vec![r1, r2]))
}

pub fn sample(config: &SamplerConfig) -> Result<RelationalStructure, SamplerError> {
    match config.case {
        Case::A => sample_case_a(config),
        Case::B => sample_case_b(config),
    }
}

/// Out-degree statistics of one binary relation. For a symmetric relation
/// both orientations count, so `edges` is twice the number of undirected
/// edges and `mean * n == edges` still holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeProfile {
    pub symbol: String,
    /// `degrees[i]` is the out-degree of node `i + 1`.
    pub degrees: Vec<u32>,
    pub mean: f64,
    pub max: u32,
    pub min: u32,
    pub edges: u64,
}

pub fn degree_profile(m: &RelationalStructure, symbol: &str) -> Result<DegreeProfile, SamplerError> {
    let rel = m
        .relation(symbol)
        .filter(|r| r.arity() == 2)
        .ok_or_else(|| SamplerError::UnknownRelation(symbol.to_string()))?;
    let degrees: Vec<u32> = m.nodes().map(|a| rel.out(a).len() as u32).collect();
    let edges = rel.len() as u64;
    Ok(DegreeProfile {
        symbol: symbol.to_string(),
        mean: edges as f64 / m.n().max(1) as f64,
        max: degrees.iter().copied().max().unwrap_or(0),
        min: degrees.iter().copied().min().unwrap_or(0),
        degrees,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relstruct::write_structure;

    #[test]
    fn single_node_is_edgeless() {
        let a = sample_case_a(&SamplerConfig::case_a(1, 0.5, 3, 0)).unwrap();
        assert_eq!(a.relation("R").unwrap().len(), 0);
        let b = sample_case_b(&SamplerConfig::case_b(1, DEFAULT_ALPHA1, DEFAULT_ALPHA2, 3, 0)).unwrap();
        assert!(b.relations().all(|(_, r)| r.is_empty()));
    }

    #[test]
    fn deterministic_and_trial_sensitive() {
        let c = SamplerConfig::case_b(300, DEFAULT_ALPHA1, DEFAULT_ALPHA2, 11, 2);
        let s1 = write_structure(&sample(&c).unwrap());
        assert_eq!(s1, write_structure(&sample(&c).unwrap()));
        let other = SamplerConfig { trial: 3, ..c };
        assert_ne!(s1, write_structure(&sample(&other).unwrap()));
    }

    #[test]
    fn dense_limit_covers_every_pair() {
        let mut rng = stream_rng(0, 5, 0, "x");
        let mut seen = Vec::new();
        bernoulli_indices(&mut rng, 7, 1.0, |t| seen.push(t));
        assert_eq!(seen, (0..7).collect::<Vec<_>>());
        let pairs = ordered_pairs(&mut rng, 4, 1.0);
        assert_eq!(pairs.len(), 12);
        assert!(pairs.iter().all(|&(a, b)| a != b));
    }

    #[test]
    fn config_validation() {
        assert_eq!(
            sample_case_a(&SamplerConfig::case_a(0, 0.5, 0, 0)),
            Err(SamplerError::EmptyUniverse)
        );
        assert!(sample_case_a(&SamplerConfig::case_a(5, 1.0, 0, 0)).is_err());
        assert!(sample_case_b(&SamplerConfig::case_b(5, 0.2, 0.1, 0, 0)).is_err());
        let mech = SamplerConfig {
            nonpaper_regime: true,
            ..SamplerConfig::case_b(5, 0.1, 0.8, 0, 0)
        };
        assert!(sample_case_b(&mech).is_ok());
        assert!(sample_case_b(&SamplerConfig { nonpaper_regime: false, ..mech }).is_err());
    }

    #[test]
    fn degree_profile_hand_counts() {
        let g = RelationalStructure::digraph(3, &[], &[(1, 2), (2, 3), (3, 1)]).unwrap();
        let d = degree_profile(&g, "R2").unwrap();
        assert_eq!((d.mean, d.max, d.min, d.edges), (1.0, 1, 1, 3));
        let e = degree_profile(&g, "R1").unwrap();
        assert!(e.degrees.iter().all(|&x| x == 0));
        assert!(degree_profile(&g, "R").is_err());
    }

    #[test]
    fn closed_form_examples() {
        let n = 65536;
        let out = (n as f64 - 1.0) * r2_probability(n, DEFAULT_ALPHA2);
        assert!((out - 11.04).abs() < 0.01, "{out}");
        let r1 = n as f64 * (n as f64 - 1.0) * r1_probability(n, DEFAULT_ALPHA1);
        assert!((r1 - 13655.9).abs() < 0.5, "{r1}");
        let (mean, _) = binomial_moments(499_500.0, edge_probability_a(1000, 0.5));
        assert!((mean - 15795.58).abs() < 0.01, "{mean}");
    }
}
