//! Finite relational structures over a declared vocabulary.
//!
//! The universe of a structure of size `n` is `{1..n}`. Every relation is
//! stored as a sorted, deduplicated flat tuple array; binary relations also
//! carry out/in adjacency indexes so that sparse neighborhoods can be walked
//! without scanning `n^2` slots.

mod interp;
mod text;

pub use interp::{apply_interpretation, InterpretationError, InterpretationScheme, Quotient};
pub use text::{read_structure, write_structure};

use std::fmt;

use thiserror::Error;

/// Node identifier; valid ids of a structure of size `n` are `1..=n`.
pub type Node = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("predicate symbol `{0}` declared twice")]
    DuplicatePredicate(String),
    #[error("predicate `{0}` must have arity >= 1")]
    ZeroArity(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("arity mismatch for `{pred}`: expected {expected}, got {got}")]
    ArityMismatch {
        pred: String,
        expected: usize,
        got: usize,
    },
    #[error("node {node} out of range 1..={n} in `{pred}`")]
    NodeOutOfRange { pred: String, node: Node, n: u32 },
    #[error("irreflexivity violated: `{pred}` contains loop at {node}")]
    Irreflexive { pred: String, node: Node },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSymbol {
    pub name: String,
    pub arity: usize,
    /// No tuple may repeat an entry (for binary relations: no loops).
    pub irreflexive: bool,
    /// Binary relation closed under swapping; enforced by symmetrizing input.
    pub symmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    name: String,
    predicates: Vec<PredicateSymbol>,
}

pub const GRAPH_VOCAB: &str = "graph";
pub const DIGRAPH_VOCAB: &str = "digraph";
pub const NAT_VOCAB: &str = "nat";

impl Vocabulary {
    /// A vocabulary of plain predicates (no irreflexivity or symmetry).
    pub fn new(name: &str, preds: &[(&str, usize)]) -> Result<Self, StructureError> {
        Self::with_symbols(
            name,
            preds
                .iter()
                .map(|&(p, a)| PredicateSymbol {
                    name: p.to_string(),
                    arity: a,
                    irreflexive: false,
                    symmetric: false,
                })
                .collect(),
        )
    }

    pub fn with_symbols(name: &str, predicates: Vec<PredicateSymbol>) -> Result<Self, StructureError> {
        for (i, p) in predicates.iter().enumerate() {
            if p.arity == 0 {
                return Err(StructureError::ZeroArity(p.name.clone()));
            }
            if predicates[..i].iter().any(|q| q.name == p.name) {
                return Err(StructureError::DuplicatePredicate(p.name.clone()));
            }
        }
        Ok(Vocabulary {
            name: name.to_string(),
            predicates,
        })
    }

    /// `{R/2}`, symmetric and irreflexive.
    pub fn graph() -> Self {
        Vocabulary {
            name: GRAPH_VOCAB.into(),
            predicates: vec![PredicateSymbol {
                name: "R".into(),
                arity: 2,
                irreflexive: true,
                symmetric: true,
            }],
        }
    }

    /// `{R1/2, R2/2}`, both irreflexive; antiparallel pairs allowed.
    pub fn digraph_pair() -> Self {
        let sym = |name: &str| PredicateSymbol {
            name: name.into(),
            arity: 2,
            irreflexive: true,
            symmetric: false,
        };
        Vocabulary {
            name: DIGRAPH_VOCAB.into(),
            predicates: vec![sym("R1"), sym("R2")],
        }
    }

    /// `{P0/1, P1/1, Plus/3, Times/3, Less/2}`; `+` and `×` as graphs of functions.
    pub fn number_theory() -> Self {
        let sym = |name: &str, arity| PredicateSymbol {
            name: String::from(name),
            arity,
            irreflexive: false,
            symmetric: false,
        };
        Vocabulary {
            name: NAT_VOCAB.into(),
            predicates: vec![
                sym("P0", 1),
                sym("P1", 1),
                sym("Plus", 3),
                sym("Times", 3),
                PredicateSymbol {
                    irreflexive: true,
                    ..sym("Less", 2)
                },
            ],
        }
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            GRAPH_VOCAB => Some(Self::graph()),
            DIGRAPH_VOCAB => Some(Self::digraph_pair()),
            NAT_VOCAB => Some(Self::number_theory()),
            _ => None,
        }
    }

    pub fn is_builtin(&self) -> bool {
        Self::builtin(&self.name).as_ref() == Some(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn predicates(&self) -> &[PredicateSymbol] {
        &self.predicates
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p.name == symbol)
    }

    pub fn arity(&self, symbol: &str) -> Option<usize> {
        self.index_of(symbol).map(|i| self.predicates[i].arity)
    }
}

/// One relation of a structure: sorted flat tuples plus adjacency for arity 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    arity: usize,
    /// Tuples concatenated, sorted lexicographically, no duplicates.
    flat: Vec<Node>,
    adjacency: Option<Adjacency>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Adjacency {
    out_offsets: Vec<usize>,
    out_targets: Vec<Node>,
    in_offsets: Vec<usize>,
    in_sources: Vec<Node>,
}

impl Adjacency {
    fn build(n: u32, flat: &[Node]) -> Self {
        let n = n as usize;
        let mut out_offsets = vec![0usize; n + 2];
        let mut in_offsets = vec![0usize; n + 2];
        for pair in flat.chunks_exact(2) {
            out_offsets[pair[0] as usize + 1] += 1;
            in_offsets[pair[1] as usize + 1] += 1;
        }
        for i in 1..out_offsets.len() {
            out_offsets[i] += out_offsets[i - 1];
            in_offsets[i] += in_offsets[i - 1];
        }
        // Tuples are sorted by source, so out_targets is the flat second column.
        let out_targets: Vec<Node> = flat.chunks_exact(2).map(|p| p[1]).collect();
        let mut in_sources = vec![0; out_targets.len()];
        let mut cursor = in_offsets.clone();
        for pair in flat.chunks_exact(2) {
            let slot = &mut cursor[pair[1] as usize];
            in_sources[*slot] = pair[0];
            *slot += 1;
        }
        Adjacency {
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
        }
    }
}

impl Relation {
    fn new(n: u32, arity: usize, mut tuples: Vec<Vec<Node>>) -> Self {
        tuples.sort_unstable();
        tuples.dedup();
        let flat: Vec<Node> = tuples.into_iter().flatten().collect();
        let adjacency = (arity == 2).then(|| Adjacency::build(n, &flat));
        Relation {
            arity,
            flat,
            adjacency,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    /// Tuples in lexicographic order.
    pub fn tuples(&self) -> impl Iterator<Item = &[Node]> + '_ {
        self.flat.chunks_exact(self.arity)
    }

    pub fn contains(&self, tuple: &[Node]) -> bool {
        if tuple.len() != self.arity {
            return false;
        }
        if self.arity == 2 {
            return self.has_edge(tuple[0], tuple[1]);
        }
        let count = self.len();
        let (mut lo, mut hi) = (0usize, count);
        while lo < hi {
            let mid = (lo + hi) / 2;
            let row = &self.flat[mid * self.arity..(mid + 1) * self.arity];
            match row.cmp(tuple) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    fn adj(&self) -> &Adjacency {
        self.adjacency
            .as_ref()
            .expect("adjacency queries need a binary relation")
    }

    /// Sorted successors of `a`. Panics for non-binary relations.
    pub fn out(&self, a: Node) -> &[Node] {
        let adj = self.adj();
        let a = a as usize;
        if a + 1 >= adj.out_offsets.len() {
            return &[];
        }
        &adj.out_targets[adj.out_offsets[a]..adj.out_offsets[a + 1]]
    }

    /// Sorted predecessors of `b`. Panics for non-binary relations.
    pub fn inn(&self, b: Node) -> &[Node] {
        let adj = self.adj();
        let b = b as usize;
        if b + 1 >= adj.in_offsets.len() {
            return &[];
        }
        &adj.in_sources[adj.in_offsets[b]..adj.in_offsets[b + 1]]
    }

    pub fn has_edge(&self, a: Node, b: Node) -> bool {
        self.out(a).binary_search(&b).is_ok()
    }
}

/// A validated finite structure. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationalStructure {
    vocab: Vocabulary,
    n: u32,
    relations: Vec<Relation>,
}

impl RelationalStructure {
    /// Validates and indexes the given tuple sets. Predicates absent from
    /// `relations` are empty. Symmetric predicates are closed under swapping.
    pub fn new<S: AsRef<str>>(
        vocab: Vocabulary,
        n: u32,
        relations: impl IntoIterator<Item = (S, Vec<Vec<Node>>)>,
    ) -> Result<Self, StructureError> {
        let mut per_pred: Vec<Vec<Vec<Node>>> = vec![Vec::new(); vocab.predicates.len()];
        for (sym, tuples) in relations {
            let sym = sym.as_ref();
            let idx = vocab
                .index_of(sym)
                .ok_or_else(|| StructureError::UnknownPredicate(sym.to_string()))?;
            per_pred[idx].extend(tuples);
        }
        let mut rels = Vec::with_capacity(per_pred.len());
        for (decl, mut tuples) in vocab.predicates.iter().zip(per_pred) {
            for t in &tuples {
                validate_tuple(decl, n, t)?;
            }
            if decl.symmetric {
                let swapped: Vec<Vec<Node>> = tuples.iter().map(|t| vec![t[1], t[0]]).collect();
                tuples.extend(swapped);
            }
            rels.push(Relation::new(n, decl.arity, tuples));
        }
        Ok(RelationalStructure {
            vocab,
            n,
            relations: rels,
        })
    }

    /// Builds a structure from binary edge lists already known to be valid
    /// and sorted; used by the samplers to skip re-validation cost.
    pub(crate) fn from_sorted_binary(
        vocab: Vocabulary,
        n: u32,
        edges: Vec<Vec<(Node, Node)>>,
    ) -> Self {
        let relations = vocab
            .predicates
            .iter()
            .zip(edges)
            .map(|(decl, mut pairs)| {
                debug_assert_eq!(decl.arity, 2);
                if decl.symmetric {
                    let swapped: Vec<(Node, Node)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
                    pairs.extend(swapped);
                    pairs.sort_unstable();
                }
                debug_assert!(pairs.windows(2).all(|w| w[0] < w[1]));
                let flat: Vec<Node> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
                let adjacency = Some(Adjacency::build(n, &flat));
                Relation {
                    arity: 2,
                    flat,
                    adjacency,
                }
            })
            .collect();
        RelationalStructure {
            vocab,
            n,
            relations,
        }
    }

    /// Undirected graph from an edge list.
    pub fn graph(n: u32, edges: &[(Node, Node)]) -> Result<Self, StructureError> {
        Self::new(Vocabulary::graph(), n, [("R", pairs(edges))])
    }

    /// Two-relation digraph from edge lists.
    pub fn digraph(n: u32, r1: &[(Node, Node)], r2: &[(Node, Node)]) -> Result<Self, StructureError> {
        Self::new(
            Vocabulary::digraph_pair(),
            n,
            [("R1", pairs(r1)), ("R2", pairs(r2))],
        )
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn nodes(&self) -> std::ops::RangeInclusive<Node> {
        1..=self.n
    }

    pub fn relation(&self, symbol: &str) -> Option<&Relation> {
        self.vocab.index_of(symbol).map(|i| &self.relations[i])
    }

    pub fn relation_at(&self, idx: usize) -> &Relation {
        &self.relations[idx]
    }

    pub fn relations(&self) -> impl Iterator<Item = (&PredicateSymbol, &Relation)> {
        self.vocab.predicates.iter().zip(&self.relations)
    }

    /// Same-named, same-arity relation changed to `tuples`; used for edge-addition tests.
    pub fn with_relation(&self, symbol: &str, tuples: Vec<Vec<Node>>) -> Result<Self, StructureError> {
        let mut rels: Vec<(String, Vec<Vec<Node>>)> = self
            .relations()
            .filter(|(d, _)| d.name != symbol)
            .map(|(d, r)| (d.name.clone(), r.tuples().map(<[Node]>::to_vec).collect()))
            .collect();
        rels.push((symbol.to_string(), tuples));
        Self::new(self.vocab.clone(), self.n, rels)
    }
}

fn pairs(edges: &[(Node, Node)]) -> Vec<Vec<Node>> {
    edges.iter().map(|&(a, b)| vec![a, b]).collect()
}

fn validate_tuple(decl: &PredicateSymbol, n: u32, t: &[Node]) -> Result<(), StructureError> {
    if t.len() != decl.arity {
        return Err(StructureError::ArityMismatch {
            pred: decl.name.clone(),
            expected: decl.arity,
            got: t.len(),
        });
    }
    if let Some(&node) = t.iter().find(|&&v| v == 0 || v > n) {
        return Err(StructureError::NodeOutOfRange {
            pred: decl.name.clone(),
            node,
            n,
        });
    }
    if decl.irreflexive {
        for (i, &v) in t.iter().enumerate() {
            if t[..i].contains(&v) {
                return Err(StructureError::Irreflexive {
                    pred: decl.name.clone(),
                    node: v,
                });
            }
        }
    }
    Ok(())
}

/// Alias matching the operation name used by the CLI and bindings.
pub fn make_structure<S: AsRef<str>>(
    vocab: Vocabulary,
    n: u32,
    relations: impl IntoIterator<Item = (S, Vec<Vec<Node>>)>,
) -> Result<RelationalStructure, StructureError> {
    RelationalStructure::new(vocab, n, relations)
}

/// Brute-force isomorphism test over all `n!` bijections; for `n <= 8`.
pub fn isomorphic_small(a: &RelationalStructure, b: &RelationalStructure) -> Option<bool> {
    if a.vocab != b.vocab || a.n != b.n {
        return Some(false);
    }
    if a.n > 8 {
        return None;
    }
    if a.relations.iter().zip(&b.relations).any(|(x, y)| x.len() != y.len()) {
        return Some(false);
    }
    let n = a.n as usize;
    let mut perm: Vec<Node> = (1..=a.n).collect();
    let mut image = vec![0; n + 1];
    let maps = |perm: &[Node], image: &mut [Node]| {
        for (i, &p) in perm.iter().enumerate() {
            image[i + 1] = p;
        }
        a.relations.iter().zip(&b.relations).all(|(ra, rb)| {
            ra.tuples().all(|t| {
                let mapped: Vec<Node> = t.iter().map(|&v| image[v as usize]).collect();
                rb.contains(&mapped)
            })
        })
    };
    // Heap's algorithm, iterative.
    let mut c = vec![0usize; n];
    if maps(&perm, &mut image) {
        return Some(true);
    }
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            if maps(&perm, &mut image) {
                return Some(true);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Some(false)
}

impl fmt::Display for RelationalStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_structure(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_undirected_edge() {
        let g = RelationalStructure::graph(3, &[(1, 2)]).unwrap();
        let r = g.relation("R").unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.has_edge(1, 2) && r.has_edge(2, 1));
        assert!(!r.has_edge(1, 3));
        assert_eq!(r.out(3), &[] as &[Node]);
    }

    #[test]
    fn digraph_loop_rejected() {
        let err = RelationalStructure::digraph(2, &[(1, 1)], &[]).unwrap_err();
        assert!(matches!(err, StructureError::Irreflexive { .. }));
        assert!(err.to_string().contains("irreflexivity violated"));
    }

    #[test]
    fn antiparallel_pairs_accepted() {
        let g = RelationalStructure::digraph(2, &[(1, 2), (2, 1)], &[]).unwrap();
        assert_eq!(g.relation("R1").unwrap().len(), 2);
        assert!(g.relation("R2").unwrap().is_empty());
    }

    #[test]
    fn range_and_arity_errors() {
        assert!(matches!(
            RelationalStructure::graph(2, &[(1, 3)]),
            Err(StructureError::NodeOutOfRange { node: 3, .. })
        ));
        assert!(matches!(
            RelationalStructure::graph(2, &[(0, 1)]),
            Err(StructureError::NodeOutOfRange { node: 0, .. })
        ));
        let bad = RelationalStructure::new(Vocabulary::graph(), 3, [("R", vec![vec![1, 2, 3]])]);
        assert!(matches!(bad, Err(StructureError::ArityMismatch { expected: 2, got: 3, .. })));
        let unknown = RelationalStructure::new(Vocabulary::graph(), 3, [("Q", vec![vec![1, 2]])]);
        assert!(matches!(unknown, Err(StructureError::UnknownPredicate(_))));
    }

    #[test]
    fn vocabulary_invariants() {
        assert!(matches!(
            Vocabulary::new("v", &[("A", 1), ("A", 2)]),
            Err(StructureError::DuplicatePredicate(_))
        ));
        assert!(matches!(Vocabulary::new("v", &[("A", 0)]), Err(StructureError::ZeroArity(_))));
        let nat = Vocabulary::number_theory();
        assert_eq!(nat.arity("Plus"), Some(3));
        assert_eq!(nat.arity("Less"), Some(2));
        assert!(nat.is_builtin());
        assert!(!Vocabulary::new("graph", &[("R", 2)]).unwrap().is_builtin());
    }

    #[test]
    fn ternary_membership() {
        let nat = Vocabulary::number_theory();
        let m = RelationalStructure::new(nat, 3, [("Plus", vec![vec![1, 2, 3], vec![1, 1, 1]])]).unwrap();
        let plus = m.relation("Plus").unwrap();
        assert!(plus.contains(&[1, 2, 3]));
        assert!(plus.contains(&[1, 1, 1]));
        assert!(!plus.contains(&[2, 1, 3]));
    }

    #[test]
    fn in_adjacency_matches_tuples() {
        let g = RelationalStructure::digraph(4, &[], &[(1, 3), (2, 3), (4, 3), (3, 1)]).unwrap();
        let r2 = g.relation("R2").unwrap();
        assert_eq!(r2.inn(3), &[1, 2, 4]);
        assert_eq!(r2.inn(1), &[3]);
        assert_eq!(r2.out(3), &[1]);
    }

    #[test]
    fn small_isomorphism() {
        let p1 = RelationalStructure::graph(3, &[(1, 2), (2, 3)]).unwrap();
        let p2 = RelationalStructure::graph(3, &[(1, 3), (3, 2)]).unwrap();
        let k = RelationalStructure::graph(3, &[(1, 2), (2, 3), (1, 3)]).unwrap();
        assert_eq!(isomorphic_small(&p1, &p2), Some(true));
        assert_eq!(isomorphic_small(&p1, &k), Some(false));
    }
}
