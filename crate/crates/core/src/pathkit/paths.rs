//! Pre-paths, paths and the path-length invariant.
//!
//! A path from `a` to `b` exists iff the pre-path from `a` to `b` is unique
//! and its nodes are distinct. The search counts pre-paths per layer (capped
//! at 2) and keeps parent pointers for the count-1 entries.

use std::collections::HashMap;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use super::{log_star, EtaSequence, PathError, PhiTriple};
use crate::randmodel::stream_rng;
use crate::relstruct::Node;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    PrePath,
    Path,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathWitness {
    /// `a_{m1}, ..., a_{m2}`.
    pub nodes: Vec<Node>,
    /// `eta(m1), ..., eta(m2 - 1)`.
    pub eta: Vec<u8>,
    pub m1: usize,
    pub m2: usize,
    pub kind: PathKind,
}

fn check_range(eta: &EtaSequence, m1: usize, m2: usize) -> Result<(), PathError> {
    if m1 <= m2 && m2 <= eta.len() {
        Ok(())
    } else {
        Err(PathError::IndexOutOfRange { m1, m2, len: eta.len() })
    }
}

fn check_node(phi: &PhiTriple<'_>, node: Node) -> Result<(), PathError> {
    if node >= 1 && node <= phi.n() {
        Ok(())
    } else {
        Err(PathError::NodeOutOfRange { node, n: phi.n() })
    }
}

fn step(eta: &EtaSequence, l: usize) -> usize {
    eta.at(l) as usize
}

/// Layered forward search; revisits are allowed.
pub fn pre_path(
    phi: &PhiTriple<'_>,
    eta: &EtaSequence,
    m1: usize,
    m2: usize,
    a: Node,
    b: Node,
) -> Result<Option<PathWitness>, PathError> {
    check_range(eta, m1, m2)?;
    check_node(phi, a)?;
    check_node(phi, b)?;
    let n = phi.n() as usize;
    // layers[i] holds (node, index of parent in layers[i-1]).
    let mut layers: Vec<Vec<(Node, usize)>> = vec![vec![(a, 0)]];
    let mut stamp = vec![usize::MAX; n + 1];
    for l in m1..m2 {
        let prev = layers.last().unwrap();
        let mut next = Vec::new();
        for (i, &(u, _)) in prev.iter().enumerate() {
            for &v in phi.out(step(eta, l), u) {
                if stamp[v as usize] != l {
                    stamp[v as usize] = l;
                    next.push((v, i));
                }
            }
        }
        if next.is_empty() {
            return Ok(None);
        }
        layers.push(next);
    }
    let Some(mut idx) = layers.last().unwrap().iter().position(|&(v, _)| v == b) else {
        return Ok(None);
    };
    let mut nodes = Vec::with_capacity(layers.len());
    for layer in layers.iter().rev() {
        nodes.push(layer[idx].0);
        idx = layer[idx].1;
    }
    nodes.reverse();
    Ok(Some(PathWitness {
        nodes,
        eta: eta.entries[m1..m2].to_vec(),
        m1,
        m2,
        kind: PathKind::PrePath,
    }))
}

pub fn pre_path_exists(
    phi: &PhiTriple<'_>,
    eta: &EtaSequence,
    m1: usize,
    m2: usize,
    a: Node,
    b: Node,
) -> Result<bool, PathError> {
    pre_path(phi, eta, m1, m2, a, b).map(|w| w.is_some())
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Entry {
    node: Node,
    /// Number of pre-paths from the start, capped at 2.
    count: u8,
    /// Arena id when the unique pre-path to this entry is a path.
    ok: u32,
}

/// Count-layered search from one start. Only layers with at least one path
/// endpoint are kept, so `layers.len() - 1` is the longest path from the start.
struct PathSearch {
    layers: Vec<Vec<Entry>>,
    node: Vec<Node>,
    parent: Vec<u32>,
    depth: Vec<u32>,
}

impl PathSearch {
    fn run(phi: &PhiTriple<'_>, eta: &EtaSequence, m1: usize, a: Node, max_depth: usize) -> Self {
        let mut s = PathSearch {
            layers: vec![vec![Entry { node: a, count: 1, ok: 0 }]],
            node: vec![a],
            parent: vec![NONE],
            depth: vec![0],
        };
        let mut first_depth: HashMap<Node, u32> = HashMap::from([(a, 0)]);
        let mut slot = vec![NONE; phi.n() as usize + 1];
        for d in 0..max_depth {
            let prev = s.layers.last().unwrap();
            let l = step(eta, m1 + d);
            let mut next: Vec<(Node, u8, u32)> = Vec::new();
            for (i, e) in prev.iter().enumerate() {
                for &v in phi.out(l, e.node) {
                    match slot[v as usize] {
                        NONE => {
                            slot[v as usize] = next.len() as u32;
                            next.push((v, e.count, i as u32));
                        }
                        j => {
                            let c = &mut next[j as usize].1;
                            *c = (*c + e.count).min(2);
                        }
                    }
                }
            }
            for &(v, _, _) in &next {
                slot[v as usize] = NONE;
            }
            next.sort_unstable_by_key(|&(v, _, _)| v);
            let mut layer = Vec::with_capacity(next.len());
            let mut any_ok = false;
            for (v, count, from) in next {
                let mut ok = NONE;
                let pid = prev[from as usize].ok;
                if count == 1 && pid != NONE && !s.on_trace(v, pid, &first_depth) {
                    ok = s.node.len() as u32;
                    s.node.push(v);
                    s.parent.push(pid);
                    s.depth.push(d as u32 + 1);
                    first_depth.entry(v).or_insert(d as u32 + 1);
                    any_ok = true;
                }
                layer.push(Entry { node: v, count, ok });
            }
            if !any_ok {
                break;
            }
            s.layers.push(layer);
        }
        s
    }

    fn on_trace(&self, v: Node, mut id: u32, first_depth: &HashMap<Node, u32>) -> bool {
        let Some(&floor) = first_depth.get(&v) else {
            return false;
        };
        while id != NONE && self.depth[id as usize] >= floor {
            if self.node[id as usize] == v {
                return true;
            }
            id = self.parent[id as usize];
        }
        false
    }

    fn longest(&self) -> usize {
        self.layers.len() - 1
    }

    fn trace(&self, mut id: u32) -> Vec<Node> {
        let mut out = Vec::new();
        while id != NONE {
            out.push(self.node[id as usize]);
            id = self.parent[id as usize];
        }
        out.reverse();
        out
    }

    /// Path endpoint at depth `m`, preferring `to`, else the smallest node.
    fn endpoint(&self, m: usize, to: Option<Node>) -> Option<u32> {
        let layer = self.layers.get(m)?;
        match to {
            Some(b) => layer.iter().find(|e| e.node == b && e.ok != NONE).map(|e| e.ok),
            None => layer.iter().find(|e| e.ok != NONE).map(|e| e.ok),
        }
    }
}

/// An `(eta, m)`-path, optionally with fixed endpoints. Starts are tried in
/// increasing order when `from` is absent.
pub fn find_eta_path(
    phi: &PhiTriple<'_>,
    eta: &EtaSequence,
    m: usize,
    from: Option<Node>,
    to: Option<Node>,
) -> Result<Option<PathWitness>, PathError> {
    check_range(eta, 0, m)?;
    for node in from.iter().chain(to.iter()) {
        check_node(phi, *node)?;
    }
    let starts: Vec<Node> = match from {
        Some(a) => vec![a],
        None => phi.graph().nodes().collect(),
    };
    for a in starts {
        let search = PathSearch::run(phi, eta, 0, a, m);
        if let Some(id) = search.endpoint(m, to) {
            let nodes = search.trace(id);
            let mut sorted = nodes.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), nodes.len(), "path nodes must be distinct");
            return Ok(Some(PathWitness {
                nodes,
                eta: eta.entries[..m].to_vec(),
                m1: 0,
                m2: m,
                kind: PathKind::Path,
            }));
        }
    }
    Ok(None)
}

/// Checks a witness against the definition: consecutive steps follow
/// `phi_eta(l)`; for paths, nodes are distinct and for every `l1 < l2`
/// the level-`l1` nodes on pre-paths from `a_{m1}` to `a_{l2}` are exactly
/// `{a_{l1}}`.
pub fn verify_witness(phi: &PhiTriple<'_>, eta: &EtaSequence, w: &PathWitness) -> Result<(), String> {
    check_range(eta, w.m1, w.m2).map_err(|e| e.to_string())?;
    if w.nodes.len() != w.m2 - w.m1 + 1 {
        return Err(format!("expected {} nodes, got {}", w.m2 - w.m1 + 1, w.nodes.len()));
    }
    if let Some(&bad) = w.nodes.iter().find(|&&v| v == 0 || v > phi.n()) {
        return Err(format!("node {bad} out of range"));
    }
    for l in w.m1..w.m2 {
        let (u, v) = (w.nodes[l - w.m1], w.nodes[l + 1 - w.m1]);
        if !phi.holds(step(eta, l), u, v) {
            return Err(format!("step {l}: phi_{} fails on ({u},{v})", eta.at(l)));
        }
    }
    if w.kind == PathKind::PrePath {
        return Ok(());
    }
    let mut sorted = w.nodes.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != w.nodes.len() {
        return Err("repeated node".into());
    }
    let n = phi.n() as usize;
    let mut forward = vec![vec![false; n + 1]];
    forward[0][w.nodes[0] as usize] = true;
    for l in w.m1..w.m2 {
        let mut next = vec![false; n + 1];
        for u in phi.graph().nodes().filter(|&u| forward[l - w.m1][u as usize]) {
            phi.out(step(eta, l), u).iter().for_each(|&v| next[v as usize] = true);
        }
        forward.push(next);
    }
    for l2 in w.m1 + 1..=w.m2 {
        let mut back = vec![false; n + 1];
        back[w.nodes[l2 - w.m1] as usize] = true;
        for l1 in (w.m1..l2).rev() {
            let mut prev = vec![false; n + 1];
            for v in phi.graph().nodes().filter(|&v| back[v as usize]) {
                phi.inn(step(eta, l1), v).iter().for_each(|&u| prev[u as usize] = true);
            }
            back = prev;
            let ancestors: Vec<Node> = phi
                .graph()
                .nodes()
                .filter(|&u| back[u as usize] && forward[l1 - w.m1][u as usize])
                .collect();
            if ancestors != [w.nodes[l1 - w.m1]] {
                return Err(format!("level {l1} ancestors of a_{l2} are {ancestors:?}"));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Starts {
    All,
    Sample { count: usize, seed: u64 },
    List(Vec<Node>),
}

impl Starts {
    pub fn resolve(&self, n: u32) -> Vec<Node> {
        match self {
            Starts::All => (1..=n).collect(),
            Starts::List(v) => v.iter().copied().filter(|&a| a >= 1 && a <= n).collect(),
            Starts::Sample { count, seed } => {
                let mut rng = stream_rng(*seed, n, 0, "starts");
                let mut v: Vec<Node> = sample(&mut rng, n as usize, (*count).min(n as usize))
                    .into_iter()
                    .map(|i| i as Node + 1)
                    .collect();
                v.sort_unstable();
                v
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthResult {
    /// Largest `m` with an `(eta, m)`-path from one of the examined starts.
    pub length: usize,
    pub start: Option<Node>,
    pub end: Option<Node>,
    pub starts_examined: usize,
    /// True when every node was tried as a start.
    pub exact: bool,
    /// `min(len(eta), n - 1)`; a result equal to it may be cut short.
    pub cap: usize,
}

/// `length_eta` for the path variant. Ties go to the smallest start.
pub fn length_eta(phi: &PhiTriple<'_>, eta: &EtaSequence, starts: &Starts) -> LengthResult {
    let n = phi.n();
    let cap = eta.len().min(n.saturating_sub(1) as usize);
    let list = starts.resolve(n);
    let best = list
        .par_iter()
        .map(|&a| {
            let s = PathSearch::run(phi, eta, 0, a, cap);
            let m = s.longest();
            let end = s.endpoint(m, None).map(|id| s.node[id as usize]);
            (m, a, end)
        })
        .reduce_with(|x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x });
    let exact = list.len() == n as usize;
    match best {
        Some((length, a, end)) => LengthResult {
            length,
            start: Some(a),
            end,
            starts_examined: list.len(),
            exact,
            cap,
        },
        None => LengthResult {
            length: 0,
            start: None,
            end: None,
            starts_examined: 0,
            exact,
            cap,
        },
    }
}

/// Largest `m <= len(eta)` with a pre-`(eta, m)`-path anywhere.
pub fn length_eta_prepath(phi: &PhiTriple<'_>, eta: &EtaSequence) -> usize {
    let n = phi.n() as usize;
    let mut current: Vec<Node> = phi.graph().nodes().collect();
    let mut mark = vec![usize::MAX; n + 1];
    for l in 0..eta.len() {
        let mut next = Vec::new();
        for &u in &current {
            for &v in phi.out(step(eta, l), u) {
                if mark[v as usize] != l {
                    mark[v as usize] = l;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            return l;
        }
        current = next;
    }
    eta.len()
}

/// Truth value of the parity sentence at a given path length.
pub fn parity_of_length(m: usize) -> bool {
    m >= 10 && log_star(m as f64).is_multiple_of(2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityEval {
    pub length: usize,
    pub log_star: u32,
    pub holds: bool,
    /// The length hit `min(len(eta), n - 1)`.
    pub saturated: bool,
}

pub fn eval_parity_sentence(phi: &PhiTriple<'_>, eta: &EtaSequence, starts: &Starts) -> ParityEval {
    let r = length_eta(phi, eta, starts);
    ParityEval {
        length: r.length,
        log_star: log_star(r.length as f64),
        holds: parity_of_length(r.length),
        saturated: r.length == r.cap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relstruct::RelationalStructure;

    fn eta(entries: &[u8]) -> EtaSequence {
        EtaSequence::explicit(entries.to_vec(), 0.1, 0.2).unwrap()
    }

    #[test]
    fn zero_length_pre_path() {
        let g = RelationalStructure::digraph(3, &[], &[(1, 2)]).unwrap();
        let phi = PhiTriple::case_b(&g).unwrap();
        let e = eta(&[2, 2]);
        assert!(pre_path_exists(&phi, &e, 1, 1, 2, 2).unwrap());
        assert!(!pre_path_exists(&phi, &e, 1, 1, 2, 3).unwrap());
    }

    #[test]
    fn mixed_steps() {
        let g = RelationalStructure::digraph(3, &[(2, 3)], &[(1, 2)]).unwrap();
        let phi = PhiTriple::case_b(&g).unwrap();
        let e = eta(&[2, 1]);
        assert!(pre_path_exists(&phi, &e, 0, 2, 1, 3).unwrap());
        assert!(!pre_path_exists(&phi, &e, 0, 2, 1, 2).unwrap());
        let w = find_eta_path(&phi, &e, 2, None, None).unwrap().unwrap();
        assert_eq!(w.nodes, vec![1, 2, 3]);
        verify_witness(&phi, &e, &w).unwrap();
        assert_eq!(length_eta(&phi, &e, &Starts::All).length, 2);
    }

    #[test]
    fn revisits_allowed_for_pre_paths_only() {
        let g = RelationalStructure::digraph(2, &[], &[(1, 2), (2, 1)]).unwrap();
        let phi = PhiTriple::case_b(&g).unwrap();
        let e = eta(&[2, 2]);
        let w = pre_path(&phi, &e, 0, 2, 1, 1).unwrap().unwrap();
        assert_eq!(w.nodes, vec![1, 2, 1]);
        assert!(find_eta_path(&phi, &e, 2, Some(1), Some(1)).unwrap().is_none());
        assert_eq!(length_eta(&phi, &e, &Starts::All).length, 1);
    }

    #[test]
    fn diamond_has_pre_path_but_no_path() {
        let g = RelationalStructure::digraph(4, &[], &[(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        let phi = PhiTriple::case_b(&g).unwrap();
        let e = eta(&[2, 2]);
        assert!(pre_path_exists(&phi, &e, 0, 2, 1, 4).unwrap());
        assert!(find_eta_path(&phi, &e, 2, Some(1), Some(4)).unwrap().is_none());
        let fake = PathWitness {
            nodes: vec![1, 2, 4],
            eta: vec![2, 2],
            m1: 0,
            m2: 2,
            kind: PathKind::Path,
        };
        assert!(verify_witness(&phi, &e, &fake).is_err());
    }

    #[test]
    fn edgeless_graph() {
        let g = RelationalStructure::digraph(3, &[], &[]).unwrap();
        let phi = PhiTriple::case_b(&g).unwrap();
        let e = eta(&[2, 1, 2]);
        assert_eq!(length_eta(&phi, &e, &Starts::All).length, 0);
        assert_eq!(length_eta_prepath(&phi, &e), 0);
        let w = find_eta_path(&phi, &e, 0, None, None).unwrap().unwrap();
        assert_eq!(w.nodes, vec![1]);
    }

    #[test]
    fn range_errors() {
        let g = RelationalStructure::digraph(3, &[], &[]).unwrap();
        let phi = PhiTriple::case_b(&g).unwrap();
        let e = eta(&[2]);
        assert!(pre_path(&phi, &e, 0, 2, 1, 1).is_err());
        assert!(pre_path(&phi, &e, 1, 0, 1, 1).is_err());
        assert!(pre_path(&phi, &e, 0, 1, 4, 1).is_err());
    }

    #[test]
    fn parity_table() {
        assert!(!parity_of_length(5));
        assert!(!parity_of_length(16));
        assert!(parity_of_length(65536));
        assert!(!parity_of_length(4));
    }
}
