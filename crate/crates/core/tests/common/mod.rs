//! Reference implementations used as test oracles. Each one follows the
//! textbook definition directly and shares no code with the library beyond
//! the structure type.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparselaw::logic::Formula;
use sparselaw::relstruct::{Node, RelationalStructure, Vocabulary};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_digraph(n: u32, p1: f64, p2: f64, rng: &mut ChaCha8Rng) -> RelationalStructure {
    let (mut r1, mut r2) = (Vec::new(), Vec::new());
    for a in 1..=n {
        for b in 1..=n {
            if a != b {
                if rng.random_bool(p1) {
                    r1.push((a, b));
                }
                if rng.random_bool(p2) {
                    r2.push((a, b));
                }
            }
        }
    }
    RelationalStructure::digraph(n, &r1, &r2).unwrap()
}

/// `R1`, `R2` without the irreflexivity constraint.
pub fn loop_vocab() -> Vocabulary {
    Vocabulary::new("loops", &[("R1", 2), ("R2", 2)]).unwrap()
}

/// Two binary relations, loops allowed, for evaluator tests.
pub fn random_digraph_loops(n: u32, p: f64, rng: &mut ChaCha8Rng) -> RelationalStructure {
    let (mut r1, mut r2) = (Vec::new(), Vec::new());
    for a in 1..=n {
        for b in 1..=n {
            if rng.random_bool(p) {
                r1.push(vec![a, b]);
            }
            if rng.random_bool(p) {
                r2.push(vec![a, b]);
            }
        }
    }
    RelationalStructure::new(loop_vocab(), n, [("R1", r1), ("R2", r2)]).unwrap()
}

pub fn random_graph(n: u32, p: f64, rng: &mut ChaCha8Rng) -> RelationalStructure {
    let mut e = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            if rng.random_bool(p) {
                e.push((a, b));
            }
        }
    }
    RelationalStructure::graph(n, &e).unwrap()
}

pub fn complete_graph(n: u32) -> RelationalStructure {
    let e: Vec<(Node, Node)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
    RelationalStructure::graph(n, &e).unwrap()
}

pub type RelVars = BTreeMap<String, BTreeSet<Vec<Node>>>;

fn tuples(n: u32, arity: usize) -> Vec<Vec<Node>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=n).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Direct Tarskian recursion; least fixed points by stage iteration from
/// the empty relation.
pub fn naive_eval(m: &RelationalStructure, f: &Formula, asg: &BTreeMap<String, Node>, rels: &RelVars) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom { pred, args } => {
            let t: Vec<Node> = args.iter().map(|v| asg[v]).collect();
            match rels.get(pred) {
                Some(r) => r.contains(&t),
                None => m.relation(pred).unwrap().contains(&t),
            }
        }
        Formula::Eq(a, b) => asg[a] == asg[b],
        Formula::Not(g) => !naive_eval(m, g, asg, rels),
        Formula::And(gs) => gs.iter().all(|g| naive_eval(m, g, asg, rels)),
        Formula::Or(gs) => gs.iter().any(|g| naive_eval(m, g, asg, rels)),
        Formula::Exists(v, g) => (1..=m.n()).any(|d| {
            let mut a = asg.clone();
            a.insert(v.clone(), d);
            naive_eval(m, g, &a, rels)
        }),
        Formula::Forall(v, g) => (1..=m.n()).all(|d| {
            let mut a = asg.clone();
            a.insert(v.clone(), d);
            naive_eval(m, g, &a, rels)
        }),
        Formula::Lfp(l) => {
            let mut cur: BTreeSet<Vec<Node>> = BTreeSet::new();
            loop {
                let mut r = rels.clone();
                r.insert(l.rel.clone(), cur.clone());
                let next: BTreeSet<Vec<Node>> = tuples(m.n(), l.params.len())
                    .into_iter()
                    .filter(|t| {
                        let mut a = asg.clone();
                        for (p, &v) in l.params.iter().zip(t) {
                            a.insert(p.clone(), v);
                        }
                        naive_eval(m, &l.body, &a, &r)
                    })
                    .collect();
                if next == cur {
                    break;
                }
                cur = next;
            }
            let t: Vec<Node> = l.args.iter().map(|v| asg[v]).collect();
            cur.contains(&t)
        }
    }
}

/// Reachability by a path of one or more `rel`-edges.
pub fn bfs_reachable(m: &RelationalStructure, rel: &str, a: Node, b: Node) -> bool {
    let r = m.relation(rel).unwrap();
    let mut seen = vec![false; m.n() as usize + 1];
    let mut queue: Vec<Node> = r.out(a).to_vec();
    while let Some(u) = queue.pop() {
        if u == b {
            return true;
        }
        if !seen[u as usize] {
            seen[u as usize] = true;
            queue.extend_from_slice(r.out(u));
        }
    }
    false
}

type Position = Vec<(Node, Node)>;

fn is_partial_iso(m1: &RelationalStructure, m2: &RelationalStructure, p: &Position) -> bool {
    for (i, &(a, b)) in p.iter().enumerate() {
        for &(c, d) in &p[i + 1..] {
            if (a == c) != (b == d) {
                return false;
            }
        }
    }
    for (sym, r1) in m1.relations() {
        let r2 = m2.relation(&sym.name).unwrap();
        let k = sym.arity;
        if p.is_empty() {
            continue;
        }
        let mut idx = vec![0usize; k];
        loop {
            let t1: Vec<Node> = idx.iter().map(|&i| p[i].0).collect();
            let t2: Vec<Node> = idx.iter().map(|&i| p[i].1).collect();
            if r1.contains(&t1) != r2.contains(&t2) {
                return false;
            }
            let mut j = 0;
            while j < k {
                idx[j] += 1;
                if idx[j] < p.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == k {
                break;
            }
        }
    }
    true
}

fn with(p: &Position, a: Node, b: Node) -> Position {
    let mut q = p.clone();
    if !q.contains(&(a, b)) {
        q.push((a, b));
        q.sort_unstable();
    }
    q
}

/// Duplicator wins the k-pebble game (at most `k` pebble pairs on the
/// board) iff Duplicator survives `r` rounds for every `r`. `W_r` is computed
/// round by round over all positions until it stops changing. A round:
/// Spoiler optionally lifts one pair, then places a pebble on any element
/// of either structure; Duplicator answers in the other.
pub fn game_equivalent(m1: &RelationalStructure, m2: &RelationalStructure, k: usize) -> bool {
    let mut positions: Vec<Position> = vec![Vec::new()];
    let mut frontier = positions.clone();
    for _ in 0..k {
        let mut next = BTreeSet::new();
        for p in &frontier {
            for a in m1.nodes() {
                for b in m2.nodes() {
                    let q = with(p, a, b);
                    if q.len() == p.len() + 1 && is_partial_iso(m1, m2, &q) {
                        next.insert(q);
                    }
                }
            }
        }
        frontier = next.into_iter().collect();
        positions.extend(frontier.iter().cloned());
    }
    let mut win: HashMap<Position, bool> = positions
        .iter()
        .map(|p| (p.clone(), is_partial_iso(m1, m2, p)))
        .collect();
    loop {
        let mut next = win.clone();
        for p in &positions {
            if !win[p] {
                continue;
            }
            let mut bases: Vec<Position> = Vec::new();
            if p.len() < k {
                bases.push(p.clone());
            }
            for i in 0..p.len() {
                let mut q = p.clone();
                q.remove(i);
                bases.push(q);
            }
            let alive = |q: &Position| win.get(q).copied().unwrap_or(false);
            let survives = bases.iter().all(|q| {
                m1.nodes().all(|a| m2.nodes().any(|b| alive(&with(q, a, b))))
                    && m2.nodes().all(|b| m1.nodes().any(|a| alive(&with(q, a, b))))
            });
            if !survives {
                next.insert(p.clone(), false);
            }
        }
        if next == win {
            break;
        }
        win = next;
    }
    win[&Vec::new()]
}

fn step_relation(g: &RelationalStructure, e: u8) -> &sparselaw::relstruct::Relation {
    g.relation(if e == 2 { "R2" } else { "R1" }).unwrap()
}

/// Every pre-path `a = a_0, ..., a_m` with `R_{eta(l)}(a_l, a_{l+1})`, where
/// entries 0 and 1 both mean `R1`.
pub fn all_pre_paths(g: &RelationalStructure, eta: &[u8], a: Node) -> Vec<Vec<Node>> {
    let mut out = Vec::new();
    let mut cur = vec![a];
    fn go(g: &RelationalStructure, eta: &[u8], cur: &mut Vec<Node>, out: &mut Vec<Vec<Node>>) {
        let l = cur.len() - 1;
        if l == eta.len() {
            out.push(cur.clone());
            return;
        }
        for &v in step_relation(g, eta[l]).out(*cur.last().unwrap()) {
            cur.push(v);
            go(g, eta, cur, out);
            cur.pop();
        }
    }
    go(g, eta, &mut cur, &mut out);
    out
}

fn distinct(p: &[Node]) -> bool {
    let s: BTreeSet<&Node> = p.iter().collect();
    s.len() == p.len()
}

/// Pre-paths from `a` to `b` along `eta[..m]`.
pub fn pre_paths_between(g: &RelationalStructure, eta: &[u8], m: usize, a: Node, b: Node) -> Vec<Vec<Node>> {
    all_pre_paths(g, &eta[..m], a)
        .into_iter()
        .filter(|p| p[m] == b)
        .collect()
}

/// Path by the ancestor definition: a pre-path with distinct nodes such that
/// for all `l1 < l2 <= m`, the level-`l1` nodes of pre-paths from `a` to
/// `p[l2]` are exactly `{p[l1]}`.
pub fn is_path_literal(g: &RelationalStructure, eta: &[u8], p: &[Node]) -> bool {
    let m = p.len() - 1;
    if !distinct(p) {
        return false;
    }
    for l2 in 1..=m {
        let ending: Vec<Vec<Node>> = pre_paths_between(g, eta, l2, p[0], p[l2]);
        for l1 in 0..l2 {
            let at: BTreeSet<Node> = ending.iter().map(|q| q[l1]).collect();
            if at != BTreeSet::from([p[l1]]) {
                return false;
            }
        }
    }
    true
}

/// An `(eta, m)`-path from `a` to `b` exists iff exactly one pre-path joins
/// them and its nodes are distinct.
pub fn path_exists_oracle(g: &RelationalStructure, eta: &[u8], m: usize, a: Node, b: Node) -> bool {
    let ps = pre_paths_between(g, eta, m, a, b);
    ps.len() == 1 && distinct(&ps[0])
}

/// Largest `m` with a path anywhere, by brute force.
pub fn length_oracle(g: &RelationalStructure, eta: &[u8]) -> usize {
    let mut best = 0;
    for m in 1..=eta.len() {
        let found = g.nodes().any(|a| g.nodes().any(|b| path_exists_oracle(g, eta, m, a, b)));
        if found {
            best = m;
        }
    }
    best
}

/// Level construction by direct set manipulation over all node pairs.
pub fn levels_oracle(g: &RelationalStructure, a: Node, cap: usize, unique: bool) -> (Vec<Vec<Node>>, Vec<u8>) {
    let r1 = g.relation("R1").unwrap();
    let r2 = g.relation("R2").unwrap();
    let mut seen: BTreeSet<Node> = BTreeSet::from([a]);
    let mut levels: Vec<BTreeSet<Node>> = vec![BTreeSet::from([a])];
    let mut eta = Vec::new();
    while levels.len() - 1 < cap {
        let top = levels.last().unwrap().clone();
        let leaves = |r: &sparselaw::relstruct::Relation| {
            top.iter().any(|&u| g.nodes().any(|v| !seen.contains(&v) && r.has_edge(u, v)))
        };
        let (choice, rel) = if leaves(r1) {
            (1, r1)
        } else if leaves(r2) {
            (2, r2)
        } else {
            break;
        };
        let next: BTreeSet<Node> = g
            .nodes()
            .filter(|v| !seen.contains(v))
            .filter(|&v| {
                let c = top.iter().filter(|&&u| rel.has_edge(u, v)).count();
                if unique {
                    c == 1
                } else {
                    c >= 1
                }
            })
            .collect();
        if next.is_empty() {
            break;
        }
        seen.extend(next.iter().copied());
        levels.push(next);
        eta.push(choice);
    }
    (levels.into_iter().map(|s| s.into_iter().collect()).collect(), eta)
}

/// The first-order battery over the digraph vocabulary, free variables
/// among `x`, `y`.
pub const BATTERY: [&str; 12] = [
    "R2(x,y)",
    "exists z. R2(x,z) & R2(z,y)",
    "forall z. R2(x,z) | x = z",
    "!(exists z. R1(z,x))",
    "(exists z. R1(x,z) & !R2(z,y)) | x = y",
    "forall z. (exists w. R2(z,w)) | R1(z,z)",
    "exists z. exists w. z != w & R2(x,z) & R2(x,w)",
    "forall z. !R2(z,x) | (exists w. R1(w,z))",
    "exists z. forall w. R1(z,w) | !R2(w,z) | w = y",
    "forall z. exists w. (R2(z,w) & R1(w,x)) | z = x",
    "!(x = y) & (forall z. R1(x,z) | R1(y,z) | !R2(z,z))",
    "exists z. R2(z,z) & (exists w. R1(w,z) & (forall u. R2(u,w) | R1(u,x)))",
];

/// Formulas with fixed points.
pub const LFP_BATTERY: [&str; 4] = [
    "[lfp T(u,v). R2(u,v) | exists w. (R2(u,w) & T(w,v))](x,y)",
    "[lfp S(u). R1(u,u) | exists w. (R2(u,w) & S(w))](x)",
    "exists z. [lfp T(u,v). R1(u,v) | R2(u,v) | exists w. (T(u,w) & T(w,v))](x,z) & !(z = y)",
    "forall z. !([lfp T(u,v). R2(u,v) | exists w. (R2(u,w) & T(w,v))](z,z)) | R1(z,x)",
];

/// Transitive closure of `R2`.
pub const TC: &str = "[lfp T(u,v). R2(u,v) | exists w. (R2(u,w) & T(w,v))](x,y)";
