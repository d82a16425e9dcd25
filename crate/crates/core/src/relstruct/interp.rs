//! Interpretation schemes: a target structure defined inside a source
//! structure by one formula per target predicate plus an equality formula.

use thiserror::Error;

use super::{Node, RelationalStructure, StructureError, Vocabulary};
use crate::logic::{EvalError, Evaluator, Formula, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InterpretationError {
    #[error("scheme source vocabulary `{scheme}` differs from structure vocabulary `{structure}`")]
    VocabularyMismatch { scheme: String, structure: String },
    #[error("no formula for target predicate `{0}`")]
    MissingPredicate(String),
    #[error("formula for `{pred}` has free variables {found:?}, expected a subset of {declared:?}")]
    FreeVariables {
        pred: String,
        declared: Vec<Var>,
        found: Vec<Var>,
    },
    #[error("equality formula is not an equivalence relation on its field: {0}")]
    NotEquivalence(String),
    #[error("interpreted universe is empty")]
    EmptyUniverse,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Debug, Clone)]
pub struct InterpretationScheme {
    pub source: Vocabulary,
    pub target: Vocabulary,
    /// Per target predicate: its variables (one per argument place) and formula.
    pub formulas: Vec<(String, Vec<Var>, Formula)>,
    /// `phi_=(x, y)`; `None` means plain equality.
    pub equality: Option<(Var, Var, Formula)>,
}

/// Result of applying a scheme.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub structure: RelationalStructure,
    /// `class_of[a]` for source node `a` (index 0 unused): target node or
    /// `None` when `a` lies outside the field of `phi_=`.
    pub class_of: Vec<Option<Node>>,
}

impl InterpretationScheme {
    /// Each target predicate interpreted by the same-named source atom.
    pub fn identity(vocab: &Vocabulary) -> Self {
        let formulas = vocab
            .predicates()
            .iter()
            .map(|p| {
                let vars: Vec<Var> = (1..=p.arity).map(|i| format!("x{i}")).collect();
                let f = Formula::Atom {
                    pred: p.name.clone(),
                    args: vars.clone(),
                };
                (p.name.clone(), vars, f)
            })
            .collect();
        InterpretationScheme {
            source: vocab.clone(),
            target: vocab.clone(),
            formulas,
            equality: None,
        }
    }

    fn validate(&self) -> Result<(), InterpretationError> {
        for p in self.target.predicates() {
            let (_, vars, f) = self
                .formulas
                .iter()
                .find(|(name, _, _)| *name == p.name)
                .ok_or_else(|| InterpretationError::MissingPredicate(p.name.clone()))?;
            let found: Vec<Var> = f.free_vars().into_iter().collect();
            if vars.len() != p.arity || found.iter().any(|v| !vars.contains(v)) {
                return Err(InterpretationError::FreeVariables {
                    pred: p.name.clone(),
                    declared: vars.clone(),
                    found,
                });
            }
        }
        if let Some((x, y, f)) = &self.equality {
            let found: Vec<Var> = f.free_vars().into_iter().collect();
            if x == y || found.iter().any(|v| v != x && v != y) {
                return Err(InterpretationError::FreeVariables {
                    pred: "=".into(),
                    declared: vec![x.clone(), y.clone()],
                    found,
                });
            }
        }
        Ok(())
    }
}

/// Universe: classes of `{a : M |= phi_=(a,a)}` numbered `1..` by smallest
/// member. A class tuple is in `R` iff `phi_R` holds on some choice of
/// representatives.
pub fn apply_interpretation(scheme: &InterpretationScheme, m: &RelationalStructure) -> Result<Quotient, InterpretationError> {
    if &scheme.source != m.vocab() {
        return Err(InterpretationError::VocabularyMismatch {
            scheme: scheme.source.name().to_string(),
            structure: m.vocab().name().to_string(),
        });
    }
    scheme.validate()?;
    let n = m.n() as usize;

    let mut same = vec![vec![false; n + 1]; n + 1];
    match &scheme.equality {
        None => (1..=n).for_each(|a| same[a][a] = true),
        Some((x, y, f)) => {
            let ev = Evaluator::new(m.vocab(), f, &[x.clone(), y.clone()])?;
            for a in 1..=n {
                for b in 1..=n {
                    same[a][b] = ev.eval(m, &[a as Node, b as Node])?;
                }
            }
        }
    }
    for a in 1..=n {
        for b in 1..=n {
            if !same[a][b] {
                continue;
            }
            if !same[b][a] {
                return Err(InterpretationError::NotEquivalence(format!("not symmetric at ({a},{b})")));
            }
            if !same[a][a] {
                return Err(InterpretationError::NotEquivalence(format!("not reflexive at {a}")));
            }
            if let Some(c) = (1..=n).find(|&c| same[b][c] && !same[a][c]) {
                return Err(InterpretationError::NotEquivalence(format!("not transitive at ({a},{b},{c})")));
            }
        }
    }

    let mut class_of: Vec<Option<Node>> = vec![None; n + 1];
    let mut classes: Node = 0;
    for a in 1..=n {
        if !same[a][a] || class_of[a].is_some() {
            continue;
        }
        classes += 1;
        for b in a..=n {
            if same[a][b] {
                class_of[b] = Some(classes);
            }
        }
    }
    if classes == 0 {
        return Err(InterpretationError::EmptyUniverse);
    }

    let mut relations = Vec::new();
    for p in scheme.target.predicates() {
        let (_, vars, f) = scheme.formulas.iter().find(|(name, _, _)| *name == p.name).unwrap();
        let ev = Evaluator::new(m.vocab(), f, vars)?;
        let tuples: Vec<Vec<Node>> = ev
            .satisfying(m, &[])?
            .into_iter()
            .filter_map(|t| t.iter().map(|&a| class_of[a as usize]).collect::<Option<Vec<Node>>>())
            .collect();
        relations.push((p.name.clone(), tuples));
    }
    let structure = RelationalStructure::new(scheme.target.clone(), classes, relations)?;
    Ok(Quotient { structure, class_of })
}
