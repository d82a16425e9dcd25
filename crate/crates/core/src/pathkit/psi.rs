//! Explicit formulas for pre-path and path existence.

use std::collections::HashMap;

use super::{EtaSequence, PathError, PhiFormula, PhiTriple};
use crate::logic::{eq, exists, neq, Formula, LfpNode, Var};

pub const PSI_PRIME_MAX_M: usize = 32;

/// The formulas substituted for `phi_0, phi_1, phi_2`.
#[derive(Debug, Clone)]
pub struct PhiAtoms(pub [PhiFormula; 3]);

impl PhiAtoms {
    pub fn case_b() -> Self {
        PhiAtoms([
            PhiFormula::relation("R1"),
            PhiFormula::relation("R1"),
            PhiFormula::relation("R2"),
        ])
    }

    pub fn from_triple(phi: &PhiTriple<'_>) -> Self {
        PhiAtoms([phi.formula(0), phi.formula(1), phi.formula(2)])
    }
}

struct Fresh(usize);

impl Fresh {
    fn next(&mut self) -> Var {
        self.0 += 1;
        format!("v{}", self.0)
    }
}

/// Copy of `f` with free variables renamed by `env` and every bound
/// variable replaced by a fresh name.
fn rename(f: &Formula, env: &mut HashMap<Var, Var>, fresh: &mut Fresh) -> Formula {
    let look = |v: &Var, env: &HashMap<Var, Var>| env.get(v).cloned().unwrap_or_else(|| v.clone());
    let bind = |v: &Var, body: &Formula, env: &mut HashMap<Var, Var>, fresh: &mut Fresh| {
        let new = fresh.next();
        let old = env.insert(v.clone(), new.clone());
        let body = rename(body, env, fresh);
        match old {
            Some(o) => env.insert(v.clone(), o),
            None => env.remove(v),
        };
        (new, body)
    };
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom { pred, args } => Formula::Atom {
            pred: pred.clone(),
            args: args.iter().map(|v| look(v, env)).collect(),
        },
        Formula::Eq(a, b) => Formula::Eq(look(a, env), look(b, env)),
        Formula::Not(g) => Formula::Not(Box::new(rename(g, env, fresh))),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| rename(g, env, fresh)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| rename(g, env, fresh)).collect()),
        Formula::Exists(v, g) => {
            let (v, g) = bind(v, g, env, fresh);
            Formula::Exists(v, Box::new(g))
        }
        Formula::Forall(v, g) => {
            let (v, g) = bind(v, g, env, fresh);
            Formula::Forall(v, Box::new(g))
        }
        Formula::Lfp(l) => {
            let args = l.args.iter().map(|v| look(v, env)).collect();
            let saved: Vec<(Var, Option<Var>)> = l.params.iter().map(|p| (p.clone(), env.get(p).cloned())).collect();
            let params: Vec<Var> = l
                .params
                .iter()
                .map(|p| {
                    let new = fresh.next();
                    env.insert(p.clone(), new.clone());
                    new
                })
                .collect();
            let body = rename(&l.body, env, fresh);
            for (p, old) in saved {
                match old {
                    Some(o) => env.insert(p, o),
                    None => env.remove(&p),
                };
            }
            Formula::Lfp(Box::new(LfpNode {
                rel: l.rel.clone(),
                params,
                body,
                args,
            }))
        }
    }
}

fn instantiate(phi: &PhiFormula, a: &str, b: &str, fresh: &mut Fresh) -> Formula {
    let mut env = HashMap::from([(phi.x.clone(), a.to_string()), (phi.y.clone(), b.to_string())]);
    rename(&phi.formula, &mut env, fresh)
}

fn psi_between(eta: &EtaSequence, m1: usize, m2: usize, x: &str, y: &str, atoms: &PhiAtoms, fresh: &mut Fresh) -> Formula {
    if m1 == m2 {
        return eq(x, y);
    }
    let x1 = fresh.next();
    let step = instantiate(&atoms.0[eta.at(m1) as usize], x, &x1, fresh);
    let rest = psi_between(eta, m1 + 1, m2, &x1, y, atoms, fresh);
    exists(x1, Formula::And(vec![step, rest]))
}

/// `exists .. end. pre-path(x, end) & cont`, with `end` bound by the last
/// step so every variable is guarded by an atom or an equality.
#[allow(clippy::too_many_arguments)]
fn chain(eta: &EtaSequence, m1: usize, m2: usize, x: &str, end: &str, cont: Formula, atoms: &PhiAtoms, fresh: &mut Fresh) -> Formula {
    if m1 == m2 {
        return exists(end, Formula::And(vec![eq(end, x), cont]));
    }
    let next = if m1 + 1 == m2 { end.to_string() } else { fresh.next() };
    let step = instantiate(&atoms.0[eta.at(m1) as usize], x, &next, fresh);
    let rest = if m1 + 1 == m2 { cont } else { chain(eta, m1 + 1, m2, &next, end, cont, atoms, fresh) };
    exists(next, Formula::And(vec![step, rest]))
}

/// `psi_{m1,m2}(x, y)`: `x = y` when `m1 = m2`, else
/// `exists x1. phi_eta(m1)(x, x1) & psi_{m1+1,m2}(x1, y)`.
pub fn build_psi(eta: &EtaSequence, m1: usize, m2: usize, atoms: &PhiAtoms) -> Result<Formula, PathError> {
    if !(m1 <= m2 && m2 <= eta.len()) {
        return Err(PathError::IndexOutOfRange { m1, m2, len: eta.len() });
    }
    Ok(psi_between(eta, m1, m2, "x", "y", atoms, &mut Fresh(0)))
}

/// `psi'_m(x, y)`: a pre-path of length `m` from `x` to `y` whose level-`l1`
/// nodes are determined by `x` and the level-`l2` node, for all
/// `l1 < l2 <= m`, and whose nodes at `l1` and `l2` differ.
pub fn build_psi_prime(eta: &EtaSequence, m: usize, atoms: &PhiAtoms) -> Result<Formula, PathError> {
    if m > eta.len() {
        return Err(PathError::IndexOutOfRange { m1: 0, m2: m, len: eta.len() });
    }
    if m > PSI_PRIME_MAX_M {
        return Err(PathError::PsiTooLarge { m, cap: PSI_PRIME_MAX_M });
    }
    let fresh = &mut Fresh(0);
    let mut parts = vec![psi_between(eta, 0, m, "x", "y", atoms, fresh)];
    for l2 in 1..=m {
        for l1 in 0..l2 {
            let (z1, z1b, z2, w, v) = (fresh.next(), fresh.next(), fresh.next(), fresh.next(), fresh.next());
            let tail = Formula::And(vec![
                chain(eta, l1, l2, &z1b, &w, eq(w.clone(), z2.clone()), atoms, fresh),
                chain(eta, l2, m, &z2, &v, eq(v.clone(), "y"), atoms, fresh),
            ]);
            let inner = Formula::And(vec![neq(z1.clone(), z1b.clone()), chain(eta, l1, l2, &z1, &z2, tail, atoms, fresh)]);
            let inner = chain(eta, 0, l1, "x", &z1b, inner, atoms, fresh);
            parts.push(chain(eta, 0, l1, "x", &z1, inner, atoms, fresh).negate());
            let (z, w, v) = (fresh.next(), fresh.next(), fresh.next());
            let repeat = Formula::And(vec![
                chain(eta, l1, l2, &z, &w, eq(w.clone(), z.clone()), atoms, fresh),
                chain(eta, l2, m, &z, &v, eq(v.clone(), "y"), atoms, fresh),
            ]);
            parts.push(chain(eta, 0, l1, "x", &z, repeat, atoms, fresh).negate());
        }
    }
    Ok(Formula::And(parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{eval_fo, parse, Assignment};
    use crate::relstruct::{RelationalStructure, Vocabulary};

    fn eta(entries: &[u8]) -> EtaSequence {
        EtaSequence::explicit(entries.to_vec(), 0.1, 0.2).unwrap()
    }

    fn holds(g: &RelationalStructure, f: &Formula, a: u32, b: u32) -> bool {
        let asg = Assignment::from([("x".to_string(), a), ("y".to_string(), b)]);
        eval_fo(g, f, &asg).unwrap()
    }

    #[test]
    fn base_case_is_equality() {
        let f = build_psi(&eta(&[2, 1, 2]), 2, 2, &PhiAtoms::case_b()).unwrap();
        assert_eq!(f, eq("x", "y"));
        assert!(build_psi(&eta(&[2]), 0, 2, &PhiAtoms::case_b()).is_err());
    }

    #[test]
    fn printed_formula_reparses() {
        let e = eta(&[2, 1, 2]);
        let f = build_psi_prime(&e, 3, &PhiAtoms::case_b()).unwrap();
        let back = parse(&f.to_string(), &Vocabulary::digraph_pair()).unwrap();
        assert_eq!(back.free_vars(), f.free_vars());
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), vec!["x", "y"]);
    }

    #[test]
    fn diamond_separates_psi_and_psi_prime() {
        let g = RelationalStructure::digraph(4, &[], &[(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        let e = eta(&[2, 2]);
        let atoms = PhiAtoms::case_b();
        assert!(holds(&g, &build_psi(&e, 0, 2, &atoms).unwrap(), 1, 4));
        assert!(!holds(&g, &build_psi_prime(&e, 2, &atoms).unwrap(), 1, 4));
    }

    #[test]
    fn two_cycle_repeat_is_not_a_path() {
        let g = RelationalStructure::digraph(2, &[], &[(1, 2), (2, 1)]).unwrap();
        let e = eta(&[2, 2]);
        let atoms = PhiAtoms::case_b();
        assert!(holds(&g, &build_psi(&e, 0, 2, &atoms).unwrap(), 1, 1));
        assert!(!holds(&g, &build_psi_prime(&e, 2, &atoms).unwrap(), 1, 1));
        assert!(holds(&g, &build_psi_prime(&e, 1, &atoms).unwrap(), 1, 2));
    }

    #[test]
    fn psi_prime_cap() {
        let e = eta(&[2; 40]);
        assert!(matches!(
            build_psi_prime(&e, 33, &PhiAtoms::case_b()),
            Err(PathError::PsiTooLarge { .. })
        ));
    }

    #[test]
    fn renaming_avoids_capture() {
        let phi = PhiFormula {
            formula: exists("x", Formula::And(vec![eq("x", "y"), eq("y", "y")])),
            x: "y".into(),
            y: "z".into(),
        };
        let f = instantiate(&phi, "x", "v9", &mut Fresh(0));
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), vec!["x"]);
    }
}
