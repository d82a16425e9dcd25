//! The k-pebble back-and-forth game as a greatest fixpoint.
//!
//! Positions are partial isomorphisms with at most `k` pairs. The family of
//! all such maps is pruned until every survivor is closed under restriction
//! and has the forth/back extension property whenever fewer than `k` pebbles
//! are on the board. The two structures are equivalent iff the empty map
//! survives. `k` counts pebbles (the maximal domain size), so the strict
//! `|dom| < k'` family bound corresponds to `k = k' - 1`.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::relstruct::{Node, RelationalStructure};

pub type PartialMap = Vec<(Node, Node)>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PebbleError {
    #[error("structures have different vocabularies")]
    VocabularyMismatch,
    #[error("pebble count must be at least 1")]
    ZeroPebbles,
    #[error("game too large: about {estimate} positions exceeds cap {cap}")]
    TooLarge { estimate: u64, cap: u64 },
}

/// Surviving positions; every map is a partial isomorphism with `len() <= k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PebbleFamily {
    pub k: usize,
    pub maps: Vec<PartialMap>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PebbleOutcome {
    pub equivalent: bool,
    /// The greatest family when equivalent.
    pub witness: Option<PebbleFamily>,
    /// Pruning round at which the empty map was removed.
    pub distinguishing_round: Option<usize>,
}

pub const DEFAULT_POSITION_CAP: u64 = 20_000_000;

pub fn pebble_equivalent(m1: &RelationalStructure, m2: &RelationalStructure, k: usize) -> Result<PebbleOutcome, PebbleError> {
    pebble_equivalent_capped(m1, m2, k, DEFAULT_POSITION_CAP)
}

pub fn pebble_equivalent_capped(
    m1: &RelationalStructure,
    m2: &RelationalStructure,
    k: usize,
    cap: u64,
) -> Result<PebbleOutcome, PebbleError> {
    if m1.vocab() != m2.vocab() {
        return Err(PebbleError::VocabularyMismatch);
    }
    if k == 0 {
        return Err(PebbleError::ZeroPebbles);
    }
    let pairs = m1.n() as u64 * m2.n() as u64;
    let estimate = (0..=k as u32).try_fold(0u64, |acc, j| acc.checked_add(pairs.checked_pow(j)?));
    match estimate {
        Some(e) if e <= cap => {}
        _ => {
            return Err(PebbleError::TooLarge {
                estimate: estimate.unwrap_or(u64::MAX),
                cap,
            })
        }
    }

    let maps = enumerate_partial_isos(m1, m2, k);
    let index: HashMap<&PartialMap, usize> = maps.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut alive = vec![true; maps.len()];
    let lookup = |f: &PartialMap, alive: &[bool]| index.get(f).is_some_and(|&i| alive[i]);

    let mut round = 0;
    loop {
        round += 1;
        let mut changed = false;
        for (i, f) in maps.iter().enumerate() {
            if !alive[i] {
                continue;
            }
            let ok = restrictions_alive(f, &|g| lookup(g, &alive))
                && (f.len() >= k || extensions_ok(m1, m2, f, &|g| lookup(g, &alive)));
            if !ok {
                alive[i] = false;
                changed = true;
                if f.is_empty() {
                    return Ok(PebbleOutcome {
                        equivalent: false,
                        witness: None,
                        distinguishing_round: Some(round),
                    });
                }
            }
        }
        if !changed {
            break;
        }
    }
    let survivors = maps.into_iter().zip(alive).filter_map(|(f, a)| a.then_some(f)).collect();
    Ok(PebbleOutcome {
        equivalent: true,
        witness: Some(PebbleFamily { k, maps: survivors }),
        distinguishing_round: None,
    })
}

fn restrictions_alive(f: &PartialMap, alive: &dyn Fn(&PartialMap) -> bool) -> bool {
    (0..f.len()).all(|skip| {
        let g: PartialMap = f.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &p)| p).collect();
        alive(&g)
    })
}

fn insert_pair(f: &PartialMap, a: Node, b: Node) -> PartialMap {
    let mut g = f.clone();
    let at = g.partition_point(|&(x, _)| x < a);
    g.insert(at, (a, b));
    g
}

fn extensions_ok(
    m1: &RelationalStructure,
    m2: &RelationalStructure,
    f: &PartialMap,
    alive: &dyn Fn(&PartialMap) -> bool,
) -> bool {
    let in_dom = |a: Node| f.iter().any(|&(x, _)| x == a);
    let in_rng = |b: Node| f.iter().any(|&(_, y)| y == b);
    let forth = m1
        .nodes()
        .filter(|&a| !in_dom(a))
        .all(|a| m2.nodes().filter(|&b| !in_rng(b)).any(|b| alive(&insert_pair(f, a, b))));
    forth
        && m2
            .nodes()
            .filter(|&b| !in_rng(b))
            .all(|b| m1.nodes().filter(|&a| !in_dom(a)).any(|a| alive(&insert_pair(f, a, b))))
}

/// All partial isomorphisms with at most `k` pairs, sorted by domain element.
pub fn enumerate_partial_isos(m1: &RelationalStructure, m2: &RelationalStructure, k: usize) -> Vec<PartialMap> {
    let mut all: Vec<PartialMap> = vec![Vec::new()];
    let mut frontier = 0;
    for _ in 0..k {
        let end = all.len();
        for i in frontier..end {
            let f = all[i].clone();
            let start = f.last().map_or(1, |&(a, _)| a + 1);
            for a in start..=m1.n() {
                for b in m2.nodes() {
                    if f.iter().any(|&(_, y)| y == b) {
                        continue;
                    }
                    let mut g = f.clone();
                    g.push((a, b));
                    if extends_partial_iso(m1, m2, &g) {
                        all.push(g);
                    }
                }
            }
        }
        frontier = end;
    }
    all
}

/// Checks the tuples involving the last pair of `g`, assuming the rest of
/// `g` is already a partial isomorphism.
fn extends_partial_iso(m1: &RelationalStructure, m2: &RelationalStructure, g: &PartialMap) -> bool {
    let last = g.len() - 1;
    let d = g.len();
    for ((_, r1), (_, r2)) in m1.relations().zip(m2.relations()) {
        let r = r1.arity() as u32;
        let mut t1 = vec![0; r as usize];
        let mut t2 = vec![0; r as usize];
        for code in 0..d.pow(r) {
            let mut c = code;
            let mut uses_last = false;
            for pos in 0..r as usize {
                let i = c % d;
                c /= d;
                uses_last |= i == last;
                t1[pos] = g[i].0;
                t2[pos] = g[i].1;
            }
            if uses_last && r1.contains(&t1) != r2.contains(&t2) {
                return false;
            }
        }
    }
    true
}

/// Full partial-isomorphism test: injective, and every relation preserved
/// and reflected on all tuples over the domain.
pub fn is_partial_iso(m1: &RelationalStructure, m2: &RelationalStructure, f: &PartialMap) -> bool {
    for (i, &(a, b)) in f.iter().enumerate() {
        if f[..i].iter().any(|&(x, y)| x == a || y == b) {
            return false;
        }
        if a == 0 || a > m1.n() || b == 0 || b > m2.n() {
            return false;
        }
    }
    (1..=f.len()).all(|len| extends_partial_iso(m1, m2, &f[..len].to_vec()))
}

/// Checks a family literally against the witness conditions: nonempty, every
/// member a partial isomorphism with at most `k` pairs, and for every member
/// `f`, every `A ⊆ dom(f)` with `|A| < k` and every element on either side,
/// some member extends `f|A` and covers that element.
pub fn verify_family(m1: &RelationalStructure, m2: &RelationalStructure, family: &PebbleFamily) -> Result<(), String> {
    if family.maps.is_empty() {
        return Err("empty family".into());
    }
    for f in &family.maps {
        if f.len() > family.k {
            return Err(format!("map {f:?} has more than {} pairs", family.k));
        }
        if !is_partial_iso(m1, m2, f) {
            return Err(format!("map {f:?} is not a partial isomorphism"));
        }
        for mask in 0u32..(1 << f.len()) {
            let sub: PartialMap = f.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
            if sub.len() + 1 > family.k {
                continue;
            }
            let extends = |g: &PartialMap| sub.iter().all(|p| g.contains(p));
            for a in m1.nodes() {
                if !family.maps.iter().any(|g| extends(g) && g.iter().any(|&(x, _)| x == a)) {
                    return Err(format!("no forth extension of {sub:?} covering {a}"));
                }
            }
            for b in m2.nodes() {
                if !family.maps.iter().any(|g| extends(g) && g.iter().any(|&(_, y)| y == b)) {
                    return Err(format!("no back extension of {sub:?} covering {b}"));
                }
            }
        }
    }
    Ok(())
}
