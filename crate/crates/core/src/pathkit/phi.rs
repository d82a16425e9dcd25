use std::sync::OnceLock;

use thiserror::Error;

use crate::heightkit::{eval_phi_witness, phi_formula, phi_predecessors, phi_successors, WitnessTemplate};
use crate::logic::{atom, Formula, Var};
use crate::relstruct::{Node, Relation, RelationalStructure};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhiError {
    #[error("structure has no binary relation `{0}`")]
    MissingRelation(String),
    #[error("template interpretation needs the graph vocabulary, got `{0}`")]
    NotAGraph(String),
}

/// A binary formula with named free variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiFormula {
    pub formula: Formula,
    pub x: Var,
    pub y: Var,
}

impl PhiFormula {
    pub fn relation(symbol: &str) -> Self {
        PhiFormula {
            formula: atom(symbol, ["x", "y"]),
            x: "x".into(),
            y: "y".into(),
        }
    }
}

enum Source<'g> {
    Relation { symbol: String, rel: &'g Relation },
    Template {
        template: WitnessTemplate,
        out: Vec<OnceLock<Vec<Node>>>,
        inn: Vec<OnceLock<Vec<Node>>>,
    },
}

/// Interpretations of `phi_0, phi_1, phi_2` over a fixed structure: either
/// plain relations or template formulas whose successor sets are computed
/// on demand and cached.
pub struct PhiTriple<'g> {
    graph: &'g RelationalStructure,
    sources: [Source<'g>; 3],
}

impl<'g> PhiTriple<'g> {
    /// `phi_0 = phi_1 = R1`, `phi_2 = R2`.
    pub fn case_b(g: &'g RelationalStructure) -> Result<Self, PhiError> {
        Self::from_symbols(g, ["R1", "R1", "R2"])
    }

    pub fn from_symbols(g: &'g RelationalStructure, symbols: [&str; 3]) -> Result<Self, PhiError> {
        let mk = |s: &str| -> Result<Source<'g>, PhiError> {
            let rel = g
                .relation(s)
                .filter(|r| r.arity() == 2)
                .ok_or_else(|| PhiError::MissingRelation(s.to_string()))?;
            Ok(Source::Relation {
                symbol: s.to_string(),
                rel,
            })
        };
        Ok(PhiTriple {
            graph: g,
            sources: [mk(symbols[0])?, mk(symbols[1])?, mk(symbols[2])?],
        })
    }

    pub fn case_a(g: &'g RelationalStructure, templates: [WitnessTemplate; 3]) -> Result<Self, PhiError> {
        if g.relation("R").is_none_or(|r| r.arity() != 2) {
            return Err(PhiError::NotAGraph(g.vocab().name().to_string()));
        }
        let n = g.n() as usize + 1;
        let sources = templates.map(|template| Source::Template {
            template,
            out: (0..n).map(|_| OnceLock::new()).collect(),
            inn: (0..n).map(|_| OnceLock::new()).collect(),
        });
        Ok(PhiTriple { graph: g, sources })
    }

    pub fn graph(&self) -> &'g RelationalStructure {
        self.graph
    }

    pub fn n(&self) -> u32 {
        self.graph.n()
    }

    /// `{b : phi_l(a, b)}`, sorted.
    pub fn out(&self, l: usize, a: Node) -> &[Node] {
        match &self.sources[l] {
            Source::Relation { rel, .. } => rel.out(a),
            Source::Template { template, out, .. } => {
                out[a as usize].get_or_init(|| phi_successors(self.graph, template, a))
            }
        }
    }

    /// `{a : phi_l(a, b)}`, sorted.
    pub fn inn(&self, l: usize, b: Node) -> &[Node] {
        match &self.sources[l] {
            Source::Relation { rel, .. } => rel.inn(b),
            Source::Template { template, inn, .. } => {
                inn[b as usize].get_or_init(|| phi_predecessors(self.graph, template, b))
            }
        }
    }

    pub fn holds(&self, l: usize, a: Node, b: Node) -> bool {
        match &self.sources[l] {
            Source::Relation { rel, .. } => rel.has_edge(a, b),
            Source::Template { template, out, .. } => match out[a as usize].get() {
                Some(succ) => succ.binary_search(&b).is_ok(),
                None => eval_phi_witness(self.graph, template, a, b),
            },
        }
    }

    pub fn formula(&self, l: usize) -> PhiFormula {
        match &self.sources[l] {
            Source::Relation { symbol, .. } => PhiFormula::relation(symbol),
            Source::Template { template, .. } => PhiFormula {
                formula: phi_formula(template),
                x: "x".into(),
                y: "y".into(),
            },
        }
    }

    pub fn template(&self, l: usize) -> Option<&WitnessTemplate> {
        match &self.sources[l] {
            Source::Template { template, .. } => Some(template),
            Source::Relation { .. } => None,
        }
    }
}
