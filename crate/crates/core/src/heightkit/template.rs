//! Witness templates for Case A: a small graph `H` on `[n*]` with `m*`
//! edges avoiding `{1, 2}`; `phi(a, b)` holds when `H` embeds injectively
//! with `1 -> a` and `2 -> b`.

use std::collections::HashSet;

use rand::seq::index::sample;
use serde::Serialize;
use thiserror::Error;

use crate::logic::{atom, eq, exists, neq, Formula};
use crate::randmodel::stream_rng;
use crate::relstruct::{Node, Relation, RelationalStructure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TemplateError {
    #[error("no (n*, m*) with n* <= {max_nstar} puts (n*-1) - alpha m* in ({lo}, {hi}); alpha may be too close to a rational at this scale")]
    NotFound { max_nstar: usize, lo: f64, hi: f64 },
    #[error("m* = {mstar} exceeds C({nstar},2) - 1")]
    TooManyEdges { nstar: usize, mstar: usize },
    #[error("alpha = {0} must lie in (0, 1)")]
    AlphaOutOfRange(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessTemplate {
    pub nstar: usize,
    pub mstar: usize,
    /// Sorted pairs `(i, j)` with `1 <= i < j <= n*`, never `(1, 2)`.
    pub edges: Vec<(u32, u32)>,
    pub alpha: f64,
    /// `|(n* - 1) - alpha m*|`.
    pub alpha_star: f64,
    pub sign: Sign,
    pub seed: u64,
}

pub fn template_value(alpha: f64, nstar: usize, mstar: usize) -> f64 {
    (nstar as f64 - 1.0) - alpha * mstar as f64
}

/// Search limits. Without a window, positive values must lie in
/// `(0, 1/12)` and negative values anywhere below 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemplateBounds {
    pub max_nstar: usize,
    pub window: Option<(f64, f64)>,
}

impl Default for TemplateBounds {
    fn default() -> Self {
        TemplateBounds {
            max_nstar: 40,
            window: None,
        }
    }
}

/// Lexicographically smallest `(n*, m*)` with `m* <= C(n*,2) - 1` whose
/// value `(n*-1) - alpha m*` lies in the open window for the sign.
pub fn find_template_params(alpha: f64, sign: Sign, bounds: TemplateBounds) -> Result<(usize, usize), TemplateError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(TemplateError::AlphaOutOfRange(alpha));
    }
    let (lo, hi) = match (sign, bounds.window) {
        (_, Some(w)) => w,
        (Sign::Positive, None) => (0.0, 1.0 / 12.0),
        (Sign::Negative, None) => (f64::NEG_INFINITY, 0.0),
    };
    let (lo, hi) = match sign {
        Sign::Positive => (lo.max(0.0), hi),
        Sign::Negative => (lo, hi.min(0.0)),
    };
    for nstar in 2..=bounds.max_nstar {
        let max_m = nstar * (nstar - 1) / 2 - 1;
        for mstar in 0..=max_m {
            let v = template_value(alpha, nstar, mstar);
            if lo < v && v < hi {
                return Ok((nstar, mstar));
            }
        }
    }
    Err(TemplateError::NotFound {
        max_nstar: bounds.max_nstar,
        lo,
        hi,
    })
}

/// Uniform `m*`-edge graph on `[n*]` avoiding the pair `{1, 2}`.
pub fn make_template(alpha: f64, nstar: usize, mstar: usize, seed: u64) -> Result<WitnessTemplate, TemplateError> {
    let slots = (nstar * nstar.saturating_sub(1) / 2).saturating_sub(1);
    if nstar < 2 || mstar > slots {
        return Err(TemplateError::TooManyEdges { nstar, mstar });
    }
    // Pair index 0 is (1,2); the rest enumerate (i,j), i<j, row by row.
    let all: Vec<(u32, u32)> = (1..=nstar as u32)
        .flat_map(|i| (i + 1..=nstar as u32).map(move |j| (i, j)))
        .skip(1)
        .collect();
    let mut rng = stream_rng(seed, nstar as u32, mstar as u64, "template");
    let mut edges: Vec<(u32, u32)> = sample(&mut rng, slots, mstar).into_iter().map(|i| all[i]).collect();
    edges.sort_unstable();
    let v = template_value(alpha, nstar, mstar);
    Ok(WitnessTemplate {
        nstar,
        mstar,
        edges,
        alpha,
        alpha_star: v.abs(),
        sign: if v > 0.0 { Sign::Positive } else { Sign::Negative },
        seed,
    })
}

/// The three templates used for Case A: `phi_2` positive in `(0, 1/12)`,
/// `phi_1` negative in `(-2 a2 / 3, 0)` and `phi_0` negative in
/// `(-a2, -a1)`, where `a_l` is the template's `alpha_star`.
pub fn default_case_a_templates(alpha: f64, seed: u64) -> Result<[WitnessTemplate; 3], TemplateError> {
    let b = TemplateBounds::default();
    let (n2, m2) = find_template_params(alpha, Sign::Positive, b)?;
    let a2 = template_value(alpha, n2, m2);
    let w1 = TemplateBounds {
        window: Some((-2.0 * a2 / 3.0, 0.0)),
        ..b
    };
    let (n1, m1) = find_template_params(alpha, Sign::Negative, w1)?;
    let a1 = -template_value(alpha, n1, m1);
    let w0 = TemplateBounds {
        window: Some((-a2, -a1)),
        ..b
    };
    let (n0, m0) = find_template_params(alpha, Sign::Negative, w0)?;
    Ok([
        make_template(alpha, n0, m0, seed)?,
        make_template(alpha, n1, m1, seed.wrapping_add(1))?,
        make_template(alpha, n2, m2, seed.wrapping_add(2))?,
    ])
}

impl WitnessTemplate {
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nstar];
        for &(i, j) in &self.edges {
            adj[i as usize - 1].push(j as usize - 1);
            adj[j as usize - 1].push(i as usize - 1);
        }
        adj
    }

    /// Vertex order (0-based) beginning with `seed_vertices`, then greedily
    /// the vertex with most edges into the placed set, ties by degree and
    /// then index.
    pub fn connectivity_order(&self, seed_vertices: &[usize]) -> Vec<usize> {
        let adj = self.adjacency();
        let mut order = seed_vertices.to_vec();
        let mut placed = vec![false; self.nstar];
        seed_vertices.iter().for_each(|&v| placed[v] = true);
        while order.len() < self.nstar {
            let best = (0..self.nstar)
                .filter(|&v| !placed[v])
                .max_by_key(|&v| {
                    let links = adj[v].iter().filter(|&&u| placed[u]).count();
                    (links, adj[v].len(), std::cmp::Reverse(v))
                })
                .unwrap();
            placed[best] = true;
            order.push(best);
        }
        order
    }
}

/// `exists t1..tn*. x = t1 & y = t2 & edges & pairwise inequalities`, with
/// the quantifier prefix in connectivity order.
pub fn phi_formula(t: &WitnessTemplate) -> Formula {
    let name = |i: usize| format!("t{}", i + 1);
    let mut conj = vec![eq("x", name(0)), eq("y", name(1))];
    for &(i, j) in &t.edges {
        conj.push(atom("R", [name(i as usize - 1), name(j as usize - 1)]));
    }
    for i in 0..t.nstar {
        for j in i + 1..t.nstar {
            conj.push(neq(name(i), name(j)));
        }
    }
    let order = t.connectivity_order(&[0, 1]);
    order
        .iter()
        .rev()
        .fold(Formula::And(conj), |body, &v| exists(name(v), body))
}

struct Embedder<'a> {
    rel: &'a Relation,
    n: u32,
    order: Vec<usize>,
    /// For each position, the earlier positions adjacent in the template.
    back: Vec<Vec<usize>>,
}

impl<'a> Embedder<'a> {
    fn new(g: &'a RelationalStructure, t: &WitnessTemplate, order: Vec<usize>) -> Self {
        let adj = t.adjacency();
        let pos: Vec<usize> = {
            let mut p = vec![0; t.nstar];
            order.iter().enumerate().for_each(|(i, &v)| p[v] = i);
            p
        };
        let back = order
            .iter()
            .enumerate()
            .map(|(i, &v)| adj[v].iter().map(|&u| pos[u]).filter(|&p| p < i).collect())
            .collect();
        Embedder {
            rel: g.relation("R").expect("graph vocabulary"),
            n: g.n(),
            order,
            back,
        }
    }

    fn candidates(&self, pos: usize, assign: &[Node]) -> Vec<Node> {
        let back = &self.back[pos];
        let fits = |c: Node| !assign.contains(&c) && back.iter().all(|&p| self.rel.has_edge(assign[p], c));
        match back.iter().min_by_key(|&&p| self.rel.out(assign[p]).len()) {
            Some(&p) => self.rel.out(assign[p]).iter().copied().filter(|&c| fits(c)).collect(),
            None => (1..=self.n).filter(|&c| fits(c)).collect(),
        }
    }

    fn extend(&self, assign: &mut Vec<Node>) -> bool {
        let pos = assign.len();
        if pos == self.order.len() {
            return true;
        }
        for c in self.candidates(pos, assign) {
            assign.push(c);
            if self.extend(assign) {
                assign.pop();
                return true;
            }
            assign.pop();
        }
        false
    }

    /// Images of the vertex at position `target` over all embeddings
    /// extending `assign`.
    fn collect(&self, assign: &mut Vec<Node>, target: usize, found: &mut HashSet<Node>) {
        let pos = assign.len();
        if pos == self.order.len() {
            found.insert(assign[target]);
            return;
        }
        for c in self.candidates(pos, assign) {
            if pos == target && found.contains(&c) {
                continue;
            }
            assign.push(c);
            if pos >= target {
                if self.extend(assign) {
                    found.insert(assign[target]);
                }
            } else {
                self.collect(assign, target, found);
            }
            assign.pop();
        }
    }
}

/// Whether `t` embeds injectively into `g` with `1 -> a`, `2 -> b`.
pub fn eval_phi_witness(g: &RelationalStructure, t: &WitnessTemplate, a: Node, b: Node) -> bool {
    if a == b || t.nstar as u32 > g.n() {
        return false;
    }
    let e = Embedder::new(g, t, t.connectivity_order(&[0, 1]));
    let mut assign = vec![a, b];
    e.extend(&mut assign)
}

fn anchored(g: &RelationalStructure, t: &WitnessTemplate, anchor: usize, node: Node) -> Vec<Node> {
    if t.nstar as u32 > g.n() {
        return Vec::new();
    }
    let order = t.connectivity_order(&[anchor]);
    let target = order.iter().position(|&v| v == 1 - anchor).unwrap();
    let e = Embedder::new(g, t, order);
    let mut found = HashSet::new();
    e.collect(&mut vec![node], target, &mut found);
    let mut out: Vec<Node> = found.into_iter().collect();
    out.sort_unstable();
    out
}

/// `{b : phi(a, b)}`, sorted.
pub fn phi_successors(g: &RelationalStructure, t: &WitnessTemplate, a: Node) -> Vec<Node> {
    anchored(g, t, 0, a)
}

/// `{a : phi(a, b)}`, sorted.
pub fn phi_predecessors(g: &RelationalStructure, t: &WitnessTemplate, b: Node) -> Vec<Node> {
    anchored(g, t, 1, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{eval_fo, Assignment};

    fn hand(nstar: usize, edges: &[(u32, u32)]) -> WitnessTemplate {
        WitnessTemplate {
            nstar,
            mstar: edges.len(),
            edges: edges.to_vec(),
            alpha: 0.5,
            alpha_star: 0.0,
            sign: Sign::Positive,
            seed: 0,
        }
    }

    #[test]
    fn params_for_sqrt_half() {
        let a = DEFAULT_ALPHA;
        let b = TemplateBounds {
            max_nstar: 20,
            window: None,
        };
        assert_eq!(find_template_params(a, Sign::Positive, b), Ok((6, 7)));
        assert!((template_value(a, 6, 7) - 0.05025).abs() < 1e-5);
        let w = TemplateBounds {
            window: Some((-0.033, 0.0)),
            ..b
        };
        assert_eq!(find_template_params(a, Sign::Negative, w), Ok((13, 17)));
        assert!((template_value(a, 13, 17) + 0.02082).abs() < 1e-5);
    }

    const DEFAULT_ALPHA: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn rational_alpha_has_no_positive_template() {
        let b = TemplateBounds {
            max_nstar: 30,
            window: None,
        };
        assert!(matches!(
            find_template_params(0.5, Sign::Positive, b),
            Err(TemplateError::NotFound { .. })
        ));
    }

    #[test]
    fn default_triple_ordering() {
        let [t0, t1, t2] = default_case_a_templates(DEFAULT_ALPHA, 1).unwrap();
        assert_eq!((t0.nstar, t0.mstar), (25, 34));
        assert!(t1.alpha_star < t0.alpha_star && t0.alpha_star < t2.alpha_star);
        assert_eq!(t2.sign, Sign::Positive);
    }

    #[test]
    fn make_template_avoids_anchor_pair() {
        for seed in 0..20 {
            let t = make_template(0.7, 6, 14, seed).unwrap();
            assert_eq!(t.edges.len(), 14);
            assert!(!t.edges.contains(&(1, 2)));
            assert!(t.edges.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(make_template(0.7, 6, 15, 0).is_err());
    }

    #[test]
    fn common_neighbour_template() {
        let t = hand(3, &[(1, 3), (2, 3)]);
        let tri = RelationalStructure::graph(3, &[(1, 2), (2, 3), (1, 3)]).unwrap();
        assert!(eval_phi_witness(&tri, &t, 1, 2));
        let path = RelationalStructure::graph(3, &[(1, 3), (3, 2)]).unwrap();
        assert!(eval_phi_witness(&path, &t, 1, 2));
        assert!(!eval_phi_witness(&path, &t, 1, 3));
        let empty = RelationalStructure::graph(3, &[]).unwrap();
        assert!(!eval_phi_witness(&empty, &t, 1, 2));
        assert_eq!(phi_successors(&path, &t, 1), vec![2]);
        assert_eq!(phi_predecessors(&path, &t, 1), vec![2]);
        assert!(phi_successors(&path, &t, 3).is_empty());
    }

    #[test]
    fn formula_matches_backtracking() {
        let t = hand(4, &[(1, 3), (2, 3), (3, 4)]);
        let f = phi_formula(&t);
        let g = RelationalStructure::graph(5, &[(1, 3), (2, 3), (3, 4), (4, 5), (1, 4)]).unwrap();
        for a in 1..=5 {
            for b in 1..=5 {
                let asg = Assignment::from([("x".to_string(), a), ("y".to_string(), b)]);
                assert_eq!(eval_fo(&g, &f, &asg).unwrap(), eval_phi_witness(&g, &t, a, b), "({a},{b})");
                let succ = phi_successors(&g, &t, a);
                assert_eq!(succ.contains(&b), eval_phi_witness(&g, &t, a, b));
            }
        }
    }
}
