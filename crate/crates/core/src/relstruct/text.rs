//! Line-oriented text format.
//!
//! ```text
//! vocab digraph
//! n 3
//! R1 1 2
//! R2 2 3
//! ```
//!
//! Non-builtin vocabularies declare their symbols with `pred <Sym> <arity>`
//! lines before any tuple. Symmetric relations are written once per
//! unordered pair (smaller endpoint first).

use std::fmt::Write as _;

use super::{Node, PredicateSymbol, RelationalStructure, StructureError, Vocabulary};

pub fn write_structure(m: &RelationalStructure) -> String {
    let mut out = String::new();
    let vocab = m.vocab();
    writeln!(out, "vocab {}", vocab.name()).unwrap();
    if !vocab.is_builtin() {
        for p in vocab.predicates() {
            writeln!(out, "pred {} {}", p.name, p.arity).unwrap();
        }
    }
    writeln!(out, "n {}", m.n()).unwrap();
    for (decl, rel) in m.relations() {
        for t in rel.tuples() {
            if decl.symmetric && t[0] > t[1] {
                continue;
            }
            out.push_str(&decl.name);
            for v in t {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn read_structure(text: &str) -> Result<RelationalStructure, StructureError> {
    let err = |line: usize, msg: &str| StructureError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut vocab_name: Option<(usize, String)> = None;
    let mut declared: Vec<PredicateSymbol> = Vec::new();
    let mut n: Option<u32> = None;
    let mut tuples: Vec<(String, Vec<Node>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap();
        match head {
            "vocab" => {
                if vocab_name.is_some() {
                    return Err(err(line_no, "duplicate `vocab` line"));
                }
                let name = words.next().ok_or_else(|| err(line_no, "missing vocabulary name"))?;
                vocab_name = Some((line_no, name.to_string()));
            }
            "pred" => {
                let sym = words.next().ok_or_else(|| err(line_no, "missing predicate name"))?;
                let arity = words
                    .next()
                    .and_then(|a| a.parse::<usize>().ok())
                    .ok_or_else(|| err(line_no, "missing or invalid arity"))?;
                declared.push(PredicateSymbol {
                    name: sym.to_string(),
                    arity,
                    irreflexive: false,
                    symmetric: false,
                });
            }
            "n" => {
                if n.is_some() {
                    return Err(err(line_no, "duplicate `n` line"));
                }
                let size = words
                    .next()
                    .and_then(|s| s.parse::<u32>().ok())
                    .ok_or_else(|| err(line_no, "invalid universe size"))?;
                n = Some(size);
            }
            pred => {
                if n.is_none() {
                    return Err(err(line_no, "tuple before `n` line"));
                }
                let mut t = Vec::new();
                for w in words {
                    let v = w
                        .parse::<Node>()
                        .map_err(|_| err(line_no, &format!("invalid node id `{w}`")))?;
                    t.push(v);
                }
                tuples.push((pred.to_string(), t));
            }
        }
        if words_left(line, head) {
            // Trailing tokens after fixed-width header lines.
            return Err(err(line_no, "unexpected trailing tokens"));
        }
    }

    let (vline, vname) = vocab_name.ok_or_else(|| err(1, "missing `vocab` line"))?;
    let vocab = match Vocabulary::builtin(&vname) {
        Some(v) if declared.is_empty() => v,
        Some(_) => return Err(err(vline, "builtin vocabulary cannot redeclare predicates")),
        None if declared.is_empty() => {
            return Err(err(vline, &format!("unknown vocabulary `{vname}` with no `pred` lines")))
        }
        None => Vocabulary::with_symbols(&vname, declared)?,
    };
    let n = n.ok_or_else(|| err(1, "missing `n` line"))?;
    let mut grouped: Vec<(String, Vec<Vec<Node>>)> = Vec::new();
    for (p, t) in tuples {
        match grouped.iter_mut().find(|(q, _)| *q == p) {
            Some((_, ts)) => ts.push(t),
            None => grouped.push((p, vec![t])),
        }
    }
    RelationalStructure::new(vocab, n, grouped)
}

fn words_left(line: &str, head: &str) -> bool {
    let count = line.split_whitespace().count();
    match head {
        "vocab" | "n" => count > 2,
        "pred" => count > 3,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_commented_file() {
        let text = "# two edges\nvocab digraph\nn 3\nR1 1 2 # sparse\n\nR2 2 3\n";
        let m = read_structure(text).unwrap();
        assert_eq!(m.n(), 3);
        assert!(m.relation("R1").unwrap().has_edge(1, 2));
        assert!(m.relation("R2").unwrap().has_edge(2, 3));
        assert_eq!(write_structure(&m), "vocab digraph\nn 3\nR1 1 2\nR2 2 3\n");
    }

    #[test]
    fn graph_written_once_per_pair() {
        let m = read_structure("vocab graph\nn 3\nR 2 1\nR 3 2\n").unwrap();
        assert_eq!(write_structure(&m), "vocab graph\nn 3\nR 1 2\nR 2 3\n");
    }

    #[test]
    fn custom_vocabulary() {
        let text = "vocab colors\npred Red 1\npred E 2\nn 2\nRed 1\nE 1 2\n";
        let m = read_structure(text).unwrap();
        assert_eq!(write_structure(&m), text);
    }

    #[test]
    fn error_lines() {
        assert!(matches!(
            read_structure("vocab graph\nR 1 2\n"),
            Err(StructureError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_structure("vocab graph\nn x\n"),
            Err(StructureError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_structure("vocab mystery\nn 2\n"),
            Err(StructureError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_structure("vocab digraph\nn 2\nR1 1 1\n"),
            Err(StructureError::Irreflexive { .. })
        ));
    }

    proptest! {
        #[test]
        fn write_read_write_is_stable(n in 1u32..12, raw in prop::collection::vec((1u32..12, 1u32..12, any::<bool>()), 0..40)) {
            let mut r1 = Vec::new();
            let mut r2 = Vec::new();
            for (a, b, which) in raw {
                let (a, b) = (1 + (a - 1) % n, 1 + (b - 1) % n);
                if a == b { continue; }
                if which { r1.push((a, b)) } else { r2.push((a, b)) }
            }
            let m = RelationalStructure::digraph(n, &r1, &r2).unwrap();
            let text = write_structure(&m);
            let back = read_structure(&text).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(write_structure(&back), text);
        }
    }
}
