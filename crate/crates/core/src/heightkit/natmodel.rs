use super::LevelDecomposition;
use crate::relstruct::{Node, RelationalStructure, Vocabulary};

/// Arithmetic tables on `{0..k}` as sorted tuples over nodes `1..=k+1`
/// (element `i` is node `i + 1`).
fn tables(k: usize) -> [(&'static str, Vec<Vec<Node>>); 5] {
    let node = |i: usize| i as Node + 1;
    let mut plus = Vec::new();
    let mut times = Vec::new();
    let mut less = Vec::new();
    for i in 0..=k {
        for j in 0..=k {
            if i + j <= k {
                plus.push(vec![node(i), node(j), node(i + j)]);
            }
            if i * j <= k {
                times.push(vec![node(i), node(j), node(i * j)]);
            }
            if i < j {
                less.push(vec![node(i), node(j)]);
            }
        }
    }
    let p1 = if k >= 1 { vec![vec![node(1)]] } else { Vec::new() };
    [
        ("P0", vec![vec![node(0)]]),
        ("P1", p1),
        ("Plus", plus),
        ("Times", times),
        ("Less", less),
    ]
}

/// One element per level; `P0`, `P1`, `Plus`, `Times`, `Less` follow the
/// arithmetic of `{0..k}` restricted to results `<= k`.
pub fn nat_model(decomp: &LevelDecomposition) -> RelationalStructure {
    nat_model_of_height(decomp.height())
}

pub fn nat_model_of_height(k: usize) -> RelationalStructure {
    RelationalStructure::new(Vocabulary::number_theory(), k as u32 + 1, tables(k))
        .expect("arithmetic tables are well formed")
}

/// Checks `m` against machine arithmetic on `{0..k}` under the numbering
/// node `i + 1` = element `i`: every tuple satisfies its defining equation
/// and each relation has exactly as many tuples as the equation has
/// solutions.
pub fn iso_check(m: &RelationalStructure, k: usize) -> bool {
    if m.vocab() != &Vocabulary::number_theory() || m.n() as usize != k + 1 {
        return false;
    }
    let rel = |s: &str| m.relation(s).expect("number-theory symbol");
    let el = |t: &[Node]| -> Vec<usize> { t.iter().map(|&v| v as usize - 1).collect() };
    let all = |s: &str, pred: &dyn Fn(&[usize]) -> bool| rel(s).tuples().all(|t| pred(&el(t)));
    let times_count = (0..=k).map(|i| k.checked_div(i).map_or(k + 1, |q| q + 1)).sum::<usize>();
    all("P0", &|t| t[0] == 0)
        && rel("P0").len() == 1
        && all("P1", &|t| t[0] == 1)
        && rel("P1").len() == usize::from(k >= 1)
        && all("Plus", &|t| t[0] + t[1] == t[2])
        && rel("Plus").len() == (k + 1) * (k + 2) / 2
        && all("Times", &|t| t[0] * t[1] == t[2])
        && rel("Times").len() == times_count
        && all("Less", &|t| t[0] < t[1])
        && rel("Less").len() == k * (k + 1) / 2
}
