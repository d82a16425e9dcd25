use std::collections::BTreeSet;
use std::fmt;

pub type Var = String;

/// First-order formulas extended with a least-fixed-point operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    /// `P(x, y, ..)`; `P` is a vocabulary symbol or a relation variable bound
    /// by an enclosing [`LfpNode`].
    Atom { pred: String, args: Vec<Var> },
    Eq(Var, Var),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
    Lfp(Box<LfpNode>),
}

/// `[lfp R(params). body](args)`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfpNode {
    pub rel: String,
    pub params: Vec<Var>,
    pub body: Formula,
    pub args: Vec<Var>,
}

pub fn atom<S: Into<String>>(pred: &str, args: impl IntoIterator<Item = S>) -> Formula {
    Formula::Atom {
        pred: pred.to_string(),
        args: args.into_iter().map(Into::into).collect(),
    }
}

pub fn eq(a: impl Into<String>, b: impl Into<String>) -> Formula {
    Formula::Eq(a.into(), b.into())
}

pub fn neq(a: impl Into<String>, b: impl Into<String>) -> Formula {
    Formula::Not(Box::new(eq(a, b)))
}

pub fn exists(v: impl Into<String>, body: Formula) -> Formula {
    Formula::Exists(v.into(), Box::new(body))
}

pub fn forall(v: impl Into<String>, body: Formula) -> Formula {
    Formula::Forall(v.into(), Box::new(body))
}

impl Formula {
    pub fn negate(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    /// Free variables, sorted by name.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    /// Number of distinct free variables.
    pub fn free_count(&self) -> usize {
        self.free_vars().len()
    }

    /// Largest number of free variables over all subformulas.
    pub fn max_free_width(&self) -> usize {
        let here = self.free_count();
        let below = match self {
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.max_free_width(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::max_free_width).max().unwrap_or(0),
            Formula::Lfp(l) => l.body.max_free_width(),
            _ => 0,
        };
        here.max(below)
    }

    /// Total node count; used to bound materialized formulas.
    pub fn size(&self) -> usize {
        1 + match self {
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.size(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::size).sum(),
            Formula::Lfp(l) => l.body.size(),
            _ => 0,
        }
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    let mut note = |v: &Var, bound: &Vec<Var>| {
        if !bound.contains(v) {
            out.insert(v.clone());
        }
    };
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom { args, .. } => args.iter().for_each(|v| note(v, bound)),
        Formula::Eq(a, b) => {
            note(a, bound);
            note(b, bound);
        }
        Formula::Not(g) => collect_free(g, bound, out),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| collect_free(g, bound, out)),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            bound.push(v.clone());
            collect_free(g, bound, out);
            bound.pop();
        }
        Formula::Lfp(l) => {
            l.args.iter().for_each(|v| note(v, bound));
            let depth = bound.len();
            bound.extend(l.params.iter().cloned());
            collect_free(&l.body, bound, out);
            bound.truncate(depth);
        }
    }
}

/// True iff every occurrence of relation symbol `rel` in `f` lies under an
/// even number of negations. Occurrences shadowed by an inner lfp binding
/// the same name are not occurrences of `rel`.
pub fn check_positive(f: &Formula, rel: &str) -> bool {
    fn walk(f: &Formula, rel: &str, negated: bool) -> bool {
        match f {
            Formula::True | Formula::False | Formula::Eq(..) => true,
            Formula::Atom { pred, .. } => !(negated && pred == rel),
            Formula::Not(g) => walk(g, rel, !negated),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().all(|g| walk(g, rel, negated)),
            Formula::Exists(_, g) | Formula::Forall(_, g) => walk(g, rel, negated),
            Formula::Lfp(l) => l.rel == rel || walk(&l.body, rel, negated),
        }
    }
    walk(f, rel, false)
}

// Precedence levels for printing: | < & < unary.
const P_OR: u8 = 1;
const P_AND: u8 = 2;
const P_UNARY: u8 = 3;

fn write_vars(f: &mut fmt::Formatter<'_>, vars: &[Var]) -> fmt::Result {
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        f.write_str(v)?;
    }
    Ok(())
}

fn write_prec(f: &mut fmt::Formatter<'_>, phi: &Formula, ctx: u8) -> fmt::Result {
    match phi {
        Formula::True => f.write_str("true"),
        Formula::False => f.write_str("false"),
        Formula::Atom { pred, args } => {
            write!(f, "{pred}(")?;
            write_vars(f, args)?;
            f.write_str(")")
        }
        Formula::Eq(a, b) => write!(f, "{a} = {b}"),
        Formula::Not(g) => match g.as_ref() {
            Formula::Eq(a, b) => write!(f, "{a} != {b}"),
            g => {
                f.write_str("!")?;
                match g {
                    Formula::Atom { .. } | Formula::True | Formula::False | Formula::Lfp(_) | Formula::Not(_) => {
                        write_prec(f, g, P_UNARY)
                    }
                    _ => {
                        f.write_str("(")?;
                        write_prec(f, g, 0)?;
                        f.write_str(")")
                    }
                }
            }
        },
        Formula::And(gs) | Formula::Or(gs) => {
            let (level, op, empty) = if matches!(phi, Formula::And(_)) {
                (P_AND, " & ", "true")
            } else {
                (P_OR, " | ", "false")
            };
            match gs.len() {
                0 => return f.write_str(empty),
                1 => return write_prec(f, &gs[0], ctx),
                _ => {}
            }
            let wrap = ctx > level;
            if wrap {
                f.write_str("(")?;
            }
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    f.write_str(op)?;
                }
                write_prec(f, g, level + 1)?;
            }
            if wrap {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let q = if matches!(phi, Formula::Exists(..)) { "exists" } else { "forall" };
            // A quantifier body extends rightwards as far as possible.
            let wrap = ctx > 0;
            if wrap {
                f.write_str("(")?;
            }
            write!(f, "{q} {v}. ")?;
            write_prec(f, g, 0)?;
            if wrap {
                f.write_str(")")?;
            }
            Ok(())
        }
        Formula::Lfp(l) => {
            write!(f, "[lfp {}(", l.rel)?;
            write_vars(f, &l.params)?;
            f.write_str("). ")?;
            write_prec(f, &l.body, 0)?;
            f.write_str("](")?;
            write_vars(f, &l.args)?;
            f.write_str(")")
        }
    }
}

/// Concrete syntax accepted by [`crate::logic::parse`].
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(f, self, 0)
    }
}
