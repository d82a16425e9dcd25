use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::pathkit::{PhiTriple, Starts};
use crate::relstruct::Node;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelDecomposition {
    pub start: Node,
    /// `levels[j]` is `S_j`, sorted.
    pub levels: Vec<Vec<Node>>,
    /// `parents[j][i]` is the smallest predecessor in `S_j` of `levels[j+1][i]`.
    pub parents: Vec<Vec<Node>>,
    /// `eta_ga[j]` is the choice made at stage `j`.
    pub eta_ga: Vec<u8>,
    pub k_ga: usize,
    pub cap: usize,
    pub truncated: bool,
    /// Stopped because the unique-predecessor filter left the next level empty.
    pub stalled: bool,
    pub unique_predecessor: bool,
}

pub fn default_cap(n: u32) -> usize {
    (n as f64).sqrt().ceil() as usize
}

/// Level construction from `a`. At stage `j` the choice is 1 when some
/// `phi_0`-edge leaves `S_j` for a fresh node, else 2 when some `phi_2`-edge
/// does, else the construction stops with `k = j`. The next level is every
/// fresh node reached by `phi_choice` (with `unique_predecessor`, only those
/// with exactly one predecessor in `S_j`).
pub fn build_levels(phi: &PhiTriple<'_>, a: Node, cap: Option<usize>, unique_predecessor: bool) -> LevelDecomposition {
    let cap = cap.unwrap_or_else(|| default_cap(phi.n()));
    let mut seen: HashMap<Node, usize> = HashMap::from([(a, 0)]);
    let mut d = LevelDecomposition {
        start: a,
        levels: vec![vec![a]],
        parents: Vec::new(),
        eta_ga: Vec::new(),
        k_ga: 0,
        cap,
        truncated: false,
        stalled: false,
        unique_predecessor,
    };
    loop {
        let j = d.levels.len() - 1;
        if j >= cap {
            d.truncated = true;
            break;
        }
        let top = &d.levels[j];
        let leaves = |l: usize| top.iter().any(|&u| phi.out(l, u).iter().any(|v| !seen.contains_key(v)));
        let choice = if leaves(0) {
            1
        } else if leaves(2) {
            2
        } else {
            break;
        };
        let mut preds: HashMap<Node, (u32, Node)> = HashMap::new();
        for &u in top {
            for &v in phi.out(choice, u) {
                if !seen.contains_key(&v) {
                    let e = preds.entry(v).or_insert((0, u));
                    e.0 += 1;
                    e.1 = e.1.min(u);
                }
            }
        }
        let mut next: Vec<(Node, Node)> = preds
            .into_iter()
            .filter(|&(_, (c, _))| !unique_predecessor || c == 1)
            .map(|(v, (_, p))| (v, p))
            .collect();
        d.eta_ga.push(choice as u8);
        if next.is_empty() {
            // Only reachable with the unique-predecessor filter.
            d.eta_ga.pop();
            d.stalled = true;
            break;
        }
        next.sort_unstable();
        next.iter().for_each(|&(v, _)| {
            seen.insert(v, j + 1);
        });
        d.levels.push(next.iter().map(|&(v, _)| v).collect());
        d.parents.push(next.iter().map(|&(_, p)| p).collect());
    }
    d.k_ga = d.levels.len() - 1;
    debug_assert_eq!(d.validate(phi), Ok(()));
    d
}

impl LevelDecomposition {
    pub fn height(&self) -> usize {
        self.k_ga
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Re-checks the structural invariants with a second scan.
    pub fn validate(&self, phi: &PhiTriple<'_>) -> Result<(), String> {
        if self.levels.first().map(Vec::as_slice) != Some(&[self.start][..]) {
            return Err("S_0 must be {a}".into());
        }
        if self.eta_ga.len() != self.levels.len() - 1 || self.parents.len() != self.eta_ga.len() {
            return Err("eta and parent lengths must match the level count".into());
        }
        let mut level_of: HashMap<Node, usize> = HashMap::new();
        for (j, s) in self.levels.iter().enumerate() {
            for &v in s {
                if let Some(i) = level_of.insert(v, j) {
                    return Err(format!("node {v} in levels {i} and {j}"));
                }
            }
        }
        for (j, &c) in self.eta_ga.iter().enumerate() {
            let top = &self.levels[j];
            let choice = c as usize;
            for (&v, &p) in self.levels[j + 1].iter().zip(&self.parents[j]) {
                let preds: Vec<Node> = top.iter().copied().filter(|&u| phi.holds(choice, u, v)).collect();
                if preds.first() != Some(&p) {
                    return Err(format!("node {v} at level {}: predecessors {preds:?}, recorded {p}", j + 1));
                }
                if self.unique_predecessor && preds.len() != 1 {
                    return Err(format!("node {v} at level {} has {} predecessors", j + 1, preds.len()));
                }
            }
            let fresh = |v: &Node| level_of.get(v).is_none_or(|&i| i > j);
            if c == 2 && top.iter().any(|&u| phi.out(0, u).iter().any(fresh)) {
                return Err(format!("stage {j} chose 2 although a phi_0-edge leaves S_{j}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeightResult {
    pub height: usize,
    pub argmax: Node,
    pub starts_examined: usize,
    /// False in sampled mode; the height is then a lower bound.
    pub exact: bool,
    pub truncated: bool,
}

/// Maximum of `k_{G,a}` over the given starts; ties go to the smallest node.
/// `cap = None` means no cap beyond `n`.
pub fn height_of(phi: &PhiTriple<'_>, starts: &Starts, cap: Option<usize>) -> HeightResult {
    let n = phi.n();
    let cap = cap.unwrap_or(n as usize);
    let list = starts.resolve(n);
    let best = list
        .par_iter()
        .map(|&a| {
            let d = build_levels(phi, a, Some(cap), false);
            (d.k_ga, a, d.truncated)
        })
        .reduce_with(|x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x })
        .unwrap_or((0, 1, false));
    HeightResult {
        height: best.0,
        argmax: best.1,
        starts_examined: list.len(),
        exact: list.len() == n as usize,
        truncated: best.2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relstruct::RelationalStructure;

    #[test]
    fn five_node_example() {
        let g = RelationalStructure::digraph(5, &[], &[(1, 2), (1, 3), (2, 4)]).unwrap();
        let phi = PhiTriple::case_b(&g).unwrap();
        let d = build_levels(&phi, 1, None, false);
        assert_eq!(d.levels, vec![vec![1], vec![2, 3], vec![4]]);
        assert_eq!(d.eta_ga, vec![2, 2]);
        assert_eq!(d.k_ga, 2);
        assert!(!d.truncated);
        d.validate(&phi).unwrap();
        let h = height_of(&phi, &Starts::All, None);
        assert_eq!((h.height, h.argmax, h.exact), (2, 1, true));
    }

    #[test]
    fn sparse_step_wins() {
        let g = RelationalStructure::digraph(4, &[(1, 2)], &[(1, 3), (1, 4)]).unwrap();
        let phi = PhiTriple::case_b(&g).unwrap();
        let d = build_levels(&phi, 1, None, false);
        assert_eq!(d.eta_ga[0], 1);
        assert_eq!(d.levels[1], vec![2]);
    }

    #[test]
    fn isolated_start() {
        let g = RelationalStructure::digraph(3, &[], &[(2, 3)]).unwrap();
        let phi = PhiTriple::case_b(&g).unwrap();
        let d = build_levels(&phi, 1, None, false);
        assert_eq!((d.k_ga, d.levels.len()), (0, 1));
        let empty = RelationalStructure::digraph(4, &[], &[]).unwrap();
        let phi = PhiTriple::case_b(&empty).unwrap();
        assert_eq!(height_of(&phi, &Starts::All, None).height, 0);
    }

    #[test]
    fn directed_path_height() {
        let r2: Vec<(Node, Node)> = (1..10).map(|i| (i, i + 1)).collect();
        let g = RelationalStructure::digraph(10, &[], &r2).unwrap();
        let phi = PhiTriple::case_b(&g).unwrap();
        let h = height_of(&phi, &Starts::All, None);
        assert_eq!((h.height, h.argmax), (9, 1));
        let d = build_levels(&phi, 1, None, false);
        assert_eq!((d.k_ga, d.truncated), (4, true));
    }

    #[test]
    fn unique_predecessor_filter() {
        // 4 is reached from both 2 and 3; 5 only from 3.
        let g = RelationalStructure::digraph(5, &[], &[(1, 2), (1, 3), (2, 4), (3, 4), (3, 5)]).unwrap();
        let phi = PhiTriple::case_b(&g).unwrap();
        let d = build_levels(&phi, 1, None, true);
        assert_eq!(d.levels, vec![vec![1], vec![2, 3], vec![5]]);
        assert_eq!(d.parents[1], vec![3]);
        let plain = build_levels(&phi, 1, None, false);
        assert_eq!(plain.levels[2], vec![4, 5]);
    }
}
