//! Linear order from `R2`-fingerprints along an anchor chain.
//!
//! `d1 < d2` iff at the first chain node `c` where `R2(d1, c)` and
//! `R2(d2, c)` differ, `R2(d2, c)` holds. Fingerprints are packed
//! most-significant-bit first, so this is lexicographic order on the words.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use super::LevelDecomposition;
use crate::randmodel::stream_rng;
use crate::relstruct::{Node, Relation, RelationalStructure};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("decomposition was built without the unique-predecessor filter")]
    NotUnique,
    #[error("no unique chain: the decomposition from {0} has height 0")]
    NoChain(Node),
    #[error("structure has no relation `{0}`")]
    MissingRelation(String),
}

/// Chain from the start to the smallest node of the last level, following
/// the unique predecessors backwards.
pub fn unique_chain(decomp: &LevelDecomposition) -> Result<Vec<Node>, OrderError> {
    if !decomp.unique_predecessor {
        return Err(OrderError::NotUnique);
    }
    if decomp.k_ga == 0 {
        return Err(OrderError::NoChain(decomp.start));
    }
    let mut chain = Vec::with_capacity(decomp.k_ga + 1);
    let mut j = decomp.k_ga;
    let mut idx = 0;
    loop {
        let v = decomp.levels[j][idx];
        chain.push(v);
        if j == 0 {
            break;
        }
        let p = decomp.parents[j - 1][idx];
        j -= 1;
        idx = decomp.levels[j].binary_search(&p).expect("parent lies in the previous level");
    }
    chain.reverse();
    Ok(chain)
}

/// Greedy simple walk along `R2`: from the current node step to its
/// smallest out-neighbour not yet on the walk. Stops early when stuck.
pub fn walk_chain(g: &RelationalStructure, start: Node, nodes: usize) -> Result<Vec<Node>, OrderError> {
    let rel = fingerprint_relation(g)?;
    let mut on = vec![false; g.n() as usize + 1];
    let mut chain = vec![start];
    on[start as usize] = true;
    while chain.len() < nodes {
        let Some(&next) = rel.out(*chain.last().unwrap()).iter().find(|&&v| !on[v as usize]) else {
            break;
        };
        on[next as usize] = true;
        chain.push(next);
    }
    Ok(chain)
}

fn fingerprint_relation(g: &RelationalStructure) -> Result<&Relation, OrderError> {
    g.relation("R2")
        .or_else(|| g.relation("R"))
        .filter(|r| r.arity() == 2)
        .ok_or_else(|| OrderError::MissingRelation("R2".into()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FingerprintOrder {
    pub chain: Vec<Node>,
    words: usize,
    /// Packed fingerprints of every node, `words` u64s per node, node 1 first.
    prints: Vec<u64>,
}

pub fn fingerprint_order(g: &RelationalStructure, chain: &[Node]) -> Result<FingerprintOrder, OrderError> {
    let rel = fingerprint_relation(g)?;
    let words = chain.len().div_ceil(64).max(1);
    let mut prints = vec![0u64; words * g.n() as usize];
    for (i, &c) in chain.iter().enumerate() {
        let bit = 1u64 << (63 - i % 64);
        for &d in rel.inn(c) {
            prints[(d as usize - 1) * words + i / 64] |= bit;
        }
    }
    Ok(FingerprintOrder {
        chain: chain.to_vec(),
        words,
        prints,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationStats {
    pub domain_size: usize,
    /// Number of distinct fingerprints on the domain.
    pub classes: usize,
    pub separated_pairs: u64,
    pub total_pairs: u64,
    pub rate: f64,
    pub total: bool,
}

impl FingerprintOrder {
    fn print(&self, d: Node) -> &[u64] {
        let i = (d as usize - 1) * self.words;
        &self.prints[i..i + self.words]
    }

    /// `R2(d, chain[i])` for every chain position.
    pub fn fingerprint(&self, d: Node) -> Vec<bool> {
        let p = self.print(d);
        (0..self.chain.len()).map(|i| p[i / 64] >> (63 - i % 64) & 1 == 1).collect()
    }

    /// `None` when the fingerprints coincide.
    pub fn compare(&self, d1: Node, d2: Node) -> Option<Ordering> {
        match self.print(d1).cmp(self.print(d2)) {
            Ordering::Equal => None,
            o => Some(o),
        }
    }

    pub fn separated(&self, d1: Node, d2: Node) -> bool {
        self.compare(d1, d2).is_some()
    }

    /// Exact pair statistics by grouping equal fingerprints.
    pub fn separation(&self, domain: &[Node]) -> SeparationStats {
        let mut groups: HashMap<&[u64], u64> = HashMap::new();
        for &d in domain {
            *groups.entry(self.print(d)).or_default() += 1;
        }
        let n = domain.len() as u64;
        let total_pairs = n * n.saturating_sub(1) / 2;
        let tied: u64 = groups.values().map(|&c| c * (c - 1) / 2).sum();
        SeparationStats {
            domain_size: domain.len(),
            classes: groups.len(),
            separated_pairs: total_pairs - tied,
            total_pairs,
            rate: if total_pairs == 0 { 1.0 } else { (total_pairs - tied) as f64 / total_pairs as f64 },
            total: tied == 0,
        }
    }

    /// Fraction of separated pairs among `samples` uniformly drawn pairs of
    /// distinct domain elements.
    pub fn sampled_separation(&self, domain: &[Node], samples: usize, seed: u64) -> f64 {
        if domain.len() < 2 || samples == 0 {
            return 1.0;
        }
        let mut rng = stream_rng(seed, domain.len() as u32, samples as u64, "pairs");
        let mut hits = 0;
        for _ in 0..samples {
            let i = rng.random_range(0..domain.len());
            let mut j = rng.random_range(0..domain.len() - 1);
            if j >= i {
                j += 1;
            }
            hits += usize::from(self.separated(domain[i], domain[j]));
        }
        hits as f64 / samples as f64
    }

    /// Irreflexivity, antisymmetry and transitivity of the strict order on
    /// the pairwise-separated members of `sample`, by explicit scan.
    pub fn strict_order_scan(&self, sample: &[Node]) -> bool {
        let less = |a: Node, b: Node| self.compare(a, b) == Some(Ordering::Less);
        let s: Vec<Node> = sample
            .iter()
            .copied()
            .filter(|&a| sample.iter().all(|&b| a == b || self.separated(a, b)))
            .collect();
        for &a in &s {
            if less(a, a) {
                return false;
            }
            for &b in &s {
                if a != b && less(a, b) == less(b, a) {
                    return false;
                }
                for &c in &s {
                    if less(a, b) && less(b, c) && !less(a, c) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// `|domain| mod 2` when the order is total on the domain.
pub fn order_parity(order: &FingerprintOrder, domain: &[Node]) -> Parity {
    if !order.separation(domain).total {
        Parity::Undefined
    } else if domain.len().is_multiple_of(2) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Nodes outside every level of the decomposition.
pub fn outside_domain(n: u32, decomp: &LevelDecomposition) -> Vec<Node> {
    let mut inside = vec![false; n as usize + 1];
    decomp.levels.iter().flatten().for_each(|&v| inside[v as usize] = true);
    (1..=n).filter(|&v| !inside[v as usize]).collect()
}

/// `alpha2` implied by the mean `R2` out-degree, solving
/// `mean = (n - 1) n^(alpha2 - 1)`.
pub fn estimate_alpha2(g: &RelationalStructure) -> Option<f64> {
    let rel = g.relation("R2")?;
    let n = g.n() as f64;
    if g.n() < 2 || rel.is_empty() {
        return None;
    }
    let mean = rel.len() as f64 / n;
    Some(1.0 + (mean / (n - 1.0)).ln() / n.ln())
}
