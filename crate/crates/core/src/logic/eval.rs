//! Tarskian evaluation of FO + LFP formulas over a [`RelationalStructure`].
//!
//! Formulas are compiled once into a slot-addressed tree. Two rewrites make
//! the existential path formulas cheap on sparse structures:
//!
//! * miniscoping: `exists v. (A & B)` with `v` not free in `A` becomes
//!   `A & exists v. B` (dually for `forall` over `|`);
//! * guarded quantifiers: `exists v` whose body has a conjunct `P(u, v)`,
//!   `P(v, u)` or `v = u` with `u` already bound only ranges over the
//!   matching adjacency list.
//!
//! Least fixed points are computed by plain stage iteration from the empty
//! relation, with the stage inclusion asserted every round.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use thiserror::Error;

use super::ast::{Formula, LfpNode, Var};
use crate::relstruct::{Node, RelationalStructure, Vocabulary};

pub type Assignment = BTreeMap<Var, Node>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unassigned free variable `{0}`")]
    UnassignedVariable(Var),
    #[error("predicate `{0}` not in the structure's vocabulary")]
    UnknownPredicate(String),
    #[error("arity mismatch for `{pred}`: expected {expected}, got {got}")]
    ArityMismatch {
        pred: String,
        expected: usize,
        got: usize,
    },
    #[error("node {node} assigned to `{var}` is outside 1..={n}")]
    NodeOutOfRange { var: Var, node: Node, n: u32 },
    #[error("fixpoint relation of arity {arity} over {n} nodes is too large to enumerate")]
    FixpointTooLarge { n: u32, arity: usize },
}

/// Largest tuple space an lfp stage may enumerate.
const MAX_LFP_TUPLES: u64 = 1 << 36;

#[derive(Debug, Clone, Copy)]
enum Guard {
    All,
    Out { rel: usize, from: usize },
    In { rel: usize, from: usize },
    Equal(usize),
}

#[derive(Debug)]
enum Node_ {
    Const(bool),
    Atom { rel: usize, args: Vec<usize> },
    RelVar { id: usize, args: Vec<usize> },
    Eq(usize, usize),
    Not(Box<Node_>),
    And(Vec<Node_>),
    Or(Vec<Node_>),
    Exists { slot: usize, guard: Guard, body: Box<Node_> },
    Forall { slot: usize, guard: Guard, body: Box<Node_> },
    Lfp(Box<LfpC>),
}

#[derive(Debug)]
struct LfpC {
    id: usize,
    params: Vec<usize>,
    ctx: Vec<usize>,
    body: Node_,
    args: Vec<usize>,
}

#[derive(Debug, Default, Clone)]
struct LfpInfo {
    arity: usize,
    /// Lfp ids nested (transitively) inside this one's body.
    inner: Vec<usize>,
}

/// A formula compiled against a vocabulary with a fixed free-variable order.
#[derive(Debug)]
pub struct Evaluator {
    root: Node_,
    slots: usize,
    free: Vec<Var>,
    lfps: Vec<LfpInfo>,
    vocab: Vocabulary,
}

struct Compiler<'v> {
    vocab: &'v Vocabulary,
    scope: Vec<(Var, usize)>,
    next_slot: usize,
    relscope: Vec<(String, usize)>,
    lfps: Vec<LfpInfo>,
    lfp_stack: Vec<usize>,
}

impl Compiler<'_> {
    fn lookup(&self, v: &str) -> Result<usize, EvalError> {
        self.scope
            .iter()
            .rev()
            .find(|(name, _)| name == v)
            .map(|&(_, s)| s)
            .ok_or_else(|| EvalError::UnassignedVariable(v.to_string()))
    }

    fn bind(&mut self, v: &str) -> usize {
        let s = self.next_slot;
        self.next_slot += 1;
        self.scope.push((v.to_string(), s));
        s
    }

    fn compile(&mut self, f: &Formula) -> Result<Node_, EvalError> {
        Ok(match f {
            Formula::True => Node_::Const(true),
            Formula::False => Node_::Const(false),
            Formula::Atom { pred, args } => {
                let slots = args.iter().map(|a| self.lookup(a)).collect::<Result<Vec<_>, _>>()?;
                if let Some(&(_, id)) = self.relscope.iter().rev().find(|(r, _)| r == pred) {
                    let expected = self.lfps[id].arity;
                    if expected != slots.len() {
                        return Err(EvalError::ArityMismatch {
                            pred: pred.clone(),
                            expected,
                            got: slots.len(),
                        });
                    }
                    Node_::RelVar { id, args: slots }
                } else {
                    let rel = self
                        .vocab
                        .index_of(pred)
                        .ok_or_else(|| EvalError::UnknownPredicate(pred.clone()))?;
                    let expected = self.vocab.predicates()[rel].arity;
                    if expected != slots.len() {
                        return Err(EvalError::ArityMismatch {
                            pred: pred.clone(),
                            expected,
                            got: slots.len(),
                        });
                    }
                    Node_::Atom { rel, args: slots }
                }
            }
            Formula::Eq(a, b) => Node_::Eq(self.lookup(a)?, self.lookup(b)?),
            Formula::Not(g) => Node_::Not(Box::new(self.compile(g)?)),
            Formula::And(gs) => Node_::And(self.compile_junction(gs)?),
            Formula::Or(gs) => Node_::Or(self.compile_junction(gs)?),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let slot = self.bind(v);
                let body = self.compile(g);
                self.scope.pop();
                let body = body?;
                if matches!(f, Formula::Exists(..)) {
                    let guard = self.exists_guard(slot, &body);
                    Node_::Exists {
                        slot,
                        guard,
                        body: Box::new(body),
                    }
                } else {
                    let guard = self.forall_guard(slot, &body);
                    Node_::Forall {
                        slot,
                        guard,
                        body: Box::new(body),
                    }
                }
            }
            Formula::Lfp(l) => self.compile_lfp(l)?,
        })
    }

    fn compile_junction(&mut self, gs: &[Formula]) -> Result<Vec<Node_>, EvalError> {
        let mut nodes = gs.iter().map(|g| self.compile(g)).collect::<Result<Vec<_>, _>>()?;
        // Cheap quantifier-free parts first so they short-circuit.
        nodes.sort_by_key(|n| !is_quantifier_free(n));
        Ok(nodes)
    }

    fn compile_lfp(&mut self, l: &LfpNode) -> Result<Node_, EvalError> {
        let args = l.args.iter().map(|a| self.lookup(a)).collect::<Result<Vec<_>, _>>()?;
        let id = self.lfps.len();
        self.lfps.push(LfpInfo {
            arity: l.params.len(),
            inner: Vec::new(),
        });
        for &outer in &self.lfp_stack {
            self.lfps[outer].inner.push(id);
        }
        let base = self.next_slot;
        let depth = self.scope.len();
        let params: Vec<usize> = l.params.iter().map(|p| self.bind(p)).collect();
        self.relscope.push((l.rel.clone(), id));
        self.lfp_stack.push(id);
        let body = self.compile(&miniscope(l.body.clone()));
        self.lfp_stack.pop();
        self.relscope.pop();
        self.scope.truncate(depth);
        let body = body?;
        let mut used = BTreeSet::new();
        collect_slots(&body, &mut used);
        let ctx = used.into_iter().filter(|&s| s < base).collect();
        Ok(Node_::Lfp(Box::new(LfpC {
            id,
            params,
            ctx,
            body,
            args,
        })))
    }

    fn binary_rel(&self, rel: usize) -> bool {
        self.vocab.predicates()[rel].arity == 2
    }

    fn exists_guard(&self, slot: usize, body: &Node_) -> Guard {
        let conjuncts: &[Node_] = match body {
            Node_::And(cs) => cs,
            other => std::slice::from_ref(other),
        };
        self.pick_guard(slot, conjuncts.iter())
    }

    fn forall_guard(&self, slot: usize, body: &Node_) -> Guard {
        // forall v. (!P(u,v) | B): only v with P(u,v) can falsify the body.
        let disjuncts: &[Node_] = match body {
            Node_::Or(ds) => ds,
            other => std::slice::from_ref(other),
        };
        self.pick_guard(
            slot,
            disjuncts.iter().filter_map(|d| match d {
                Node_::Not(inner) => Some(inner.as_ref()),
                _ => None,
            }),
        )
    }

    fn pick_guard<'n>(&self, slot: usize, literals: impl Iterator<Item = &'n Node_>) -> Guard {
        let mut best = Guard::All;
        for lit in literals {
            match lit {
                Node_::Eq(a, b) if *a == slot && *b != slot => return Guard::Equal(*b),
                Node_::Eq(a, b) if *b == slot && *a != slot => return Guard::Equal(*a),
                Node_::Atom { rel, args } if self.binary_rel(*rel) && matches!(best, Guard::All) => {
                    if args[1] == slot && args[0] != slot {
                        best = Guard::Out { rel: *rel, from: args[0] };
                    } else if args[0] == slot && args[1] != slot {
                        best = Guard::In { rel: *rel, from: args[1] };
                    }
                }
                _ => {}
            }
        }
        best
    }
}

fn is_quantifier_free(n: &Node_) -> bool {
    match n {
        Node_::Const(_) | Node_::Atom { .. } | Node_::RelVar { .. } | Node_::Eq(..) => true,
        Node_::Not(g) => is_quantifier_free(g),
        Node_::And(gs) | Node_::Or(gs) => gs.iter().all(is_quantifier_free),
        Node_::Exists { .. } | Node_::Forall { .. } | Node_::Lfp(_) => false,
    }
}

fn collect_slots(n: &Node_, out: &mut BTreeSet<usize>) {
    match n {
        Node_::Const(_) => {}
        Node_::Atom { args, .. } | Node_::RelVar { args, .. } => out.extend(args.iter().copied()),
        Node_::Eq(a, b) => {
            out.insert(*a);
            out.insert(*b);
        }
        Node_::Not(g) => collect_slots(g, out),
        Node_::And(gs) | Node_::Or(gs) => gs.iter().for_each(|g| collect_slots(g, out)),
        Node_::Exists { slot, guard, body } | Node_::Forall { slot, guard, body } => {
            out.insert(*slot);
            match guard {
                Guard::All => {}
                Guard::Out { from, .. } | Guard::In { from, .. } | Guard::Equal(from) => {
                    out.insert(*from);
                }
            }
            collect_slots(body, out);
        }
        Node_::Lfp(l) => {
            out.extend(l.args.iter().copied());
            out.extend(l.params.iter().copied());
            out.extend(l.ctx.iter().copied());
            collect_slots(&l.body, out);
        }
    }
}

fn flatten(f: Formula) -> Formula {
    match f {
        Formula::And(gs) => {
            let mut out = Vec::with_capacity(gs.len());
            for g in gs {
                match flatten(g) {
                    Formula::And(inner) => out.extend(inner),
                    g => out.push(g),
                }
            }
            Formula::And(out)
        }
        Formula::Or(gs) => {
            let mut out = Vec::with_capacity(gs.len());
            for g in gs {
                match flatten(g) {
                    Formula::Or(inner) => out.extend(inner),
                    g => out.push(g),
                }
            }
            Formula::Or(out)
        }
        other => other,
    }
}

/// Pushes quantifiers inward past conjuncts (disjuncts) that do not mention
/// the bound variable. Equivalence-preserving on every universe.
pub(crate) fn miniscope(f: Formula) -> Formula {
    match f {
        Formula::Not(g) => Formula::Not(Box::new(miniscope(*g))),
        Formula::And(gs) => flatten(Formula::And(gs.into_iter().map(miniscope).collect())),
        Formula::Or(gs) => flatten(Formula::Or(gs.into_iter().map(miniscope).collect())),
        Formula::Exists(v, g) => split_scope(v, miniscope(*g), true),
        Formula::Forall(v, g) => split_scope(v, miniscope(*g), false),
        // Lfp bodies are miniscoped when compiled.
        other => other,
    }
}

fn split_scope(v: Var, body: Formula, existential: bool) -> Formula {
    let parts = match (body, existential) {
        (Formula::And(cs), true) | (Formula::Or(cs), false) => cs,
        (body, true) => return Formula::Exists(v, Box::new(body)),
        (body, false) => return Formula::Forall(v, Box::new(body)),
    };
    let (inside, outside): (Vec<Formula>, Vec<Formula>) =
        parts.into_iter().partition(|p| p.free_vars().contains(&v));
    let junction = |fs: Vec<Formula>| {
        if existential {
            Formula::And(fs)
        } else {
            Formula::Or(fs)
        }
    };
    let inner = match inside.len() {
        1 => inside.into_iter().next().unwrap(),
        _ => junction(inside),
    };
    let quantified = if existential {
        Formula::Exists(v, Box::new(inner))
    } else {
        Formula::Forall(v, Box::new(inner))
    };
    if outside.is_empty() {
        quantified
    } else {
        let mut all = outside;
        all.push(quantified);
        junction(all)
    }
}

impl Evaluator {
    /// Compiles `f` with `free` as the ordered list of variables supplied to
    /// [`Evaluator::eval`]. Any other free variable is an error.
    pub fn new(vocab: &Vocabulary, f: &Formula, free: &[Var]) -> Result<Self, EvalError> {
        let mut c = Compiler {
            vocab,
            scope: Vec::new(),
            next_slot: 0,
            relscope: Vec::new(),
            lfps: Vec::new(),
            lfp_stack: Vec::new(),
        };
        for v in free {
            c.bind(v);
        }
        let root = c.compile(&miniscope(f.clone()))?;
        Ok(Evaluator {
            root,
            slots: c.next_slot,
            free: free.to_vec(),
            lfps: c.lfps,
            vocab: vocab.clone(),
        })
    }

    pub fn free_vars(&self) -> &[Var] {
        &self.free
    }

    fn runtime<'a>(&'a self, m: &'a RelationalStructure) -> Result<Runtime<'a>, EvalError> {
        if m.vocab() != &self.vocab {
            // Compiled indexes refer to this vocabulary's symbol order.
            if let Some(p) = self
                .vocab
                .predicates()
                .iter()
                .find(|p| m.vocab().arity(&p.name) != Some(p.arity))
            {
                return Err(EvalError::UnknownPredicate(p.name.clone()));
            }
        }
        for info in &self.lfps {
            let space = (m.n() as u64).checked_pow(info.arity as u32);
            if space.is_none_or(|s| s > MAX_LFP_TUPLES) {
                return Err(EvalError::FixpointTooLarge {
                    n: m.n(),
                    arity: info.arity,
                });
            }
        }
        let rel_map = self
            .vocab
            .predicates()
            .iter()
            .map(|p| m.vocab().index_of(&p.name).unwrap())
            .collect();
        Ok(Runtime {
            m,
            rel_map,
            env: vec![0; self.slots],
            relvals: (0..self.lfps.len()).map(|_| Rc::new(HashSet::new())).collect(),
            cache: HashMap::new(),
            lfps: &self.lfps,
        })
    }

    fn load(&self, rt: &mut Runtime<'_>, values: &[Node]) -> Result<(), EvalError> {
        assert_eq!(values.len(), self.free.len(), "one value per free variable");
        for (i, (&v, name)) in values.iter().zip(&self.free).enumerate() {
            if v == 0 || v > rt.m.n() {
                return Err(EvalError::NodeOutOfRange {
                    var: name.clone(),
                    node: v,
                    n: rt.m.n(),
                });
            }
            rt.env[i] = v;
        }
        Ok(())
    }

    /// Truth value with the free variables bound to `values` (same order as `free`).
    pub fn eval(&self, m: &RelationalStructure, values: &[Node]) -> Result<bool, EvalError> {
        let mut rt = self.runtime(m)?;
        self.load(&mut rt, values)?;
        Ok(rt.eval(&self.root))
    }

    /// All tuples over `1..=n` (in free-variable order) satisfying the formula,
    /// lexicographically sorted. The first `fixed.len()` free variables are
    /// held at `fixed`.
    pub fn satisfying(&self, m: &RelationalStructure, fixed: &[Node]) -> Result<Vec<Vec<Node>>, EvalError> {
        let mut rt = self.runtime(m)?;
        let k = self.free.len() - fixed.len();
        let mut out = Vec::new();
        let n = m.n();
        if n == 0 && k > 0 {
            return Ok(out);
        }
        let mut tuple: Vec<Node> = fixed.to_vec();
        tuple.extend(std::iter::repeat_n(1, k));
        loop {
            self.load(&mut rt, &tuple)?;
            if rt.eval(&self.root) {
                out.push(tuple[fixed.len()..].to_vec());
            }
            // Odometer over the trailing k positions, last position fastest.
            let mut i = tuple.len();
            loop {
                if i == fixed.len() {
                    return Ok(out);
                }
                i -= 1;
                if tuple[i] < n {
                    tuple[i] += 1;
                    break;
                }
                tuple[i] = 1;
            }
        }
    }
}

struct Runtime<'a> {
    m: &'a RelationalStructure,
    /// Compiled relation index -> structure relation index.
    rel_map: Vec<usize>,
    env: Vec<Node>,
    relvals: Vec<Rc<HashSet<u64>>>,
    cache: HashMap<(usize, Vec<Node>), Rc<HashSet<u64>>>,
    lfps: &'a [LfpInfo],
}

impl<'a> Runtime<'a> {
    fn code(&self, slots: &[usize]) -> u64 {
        let n = self.m.n() as u64;
        slots
            .iter()
            .rev()
            .fold(0u64, |acc, &s| acc * n + (self.env[s] as u64 - 1))
    }

    fn candidates(&self, guard: Guard) -> Candidates<'a> {
        match guard {
            Guard::All => Candidates::Range(1..=self.m.n()),
            Guard::Out { rel, from } => {
                Candidates::Slice(self.m.relation_at(self.rel_map[rel]).out(self.env[from]).iter())
            }
            Guard::In { rel, from } => {
                Candidates::Slice(self.m.relation_at(self.rel_map[rel]).inn(self.env[from]).iter())
            }
            Guard::Equal(from) => Candidates::Range(self.env[from]..=self.env[from]),
        }
    }

    fn eval(&mut self, node: &Node_) -> bool {
        match node {
            Node_::Const(b) => *b,
            Node_::Atom { rel, args } => {
                let relation = self.m.relation_at(self.rel_map[*rel]);
                if args.len() == 2 {
                    relation.has_edge(self.env[args[0]], self.env[args[1]])
                } else {
                    let t: Vec<Node> = args.iter().map(|&s| self.env[s]).collect();
                    relation.contains(&t)
                }
            }
            Node_::RelVar { id, args } => {
                let c = self.code(args);
                self.relvals[*id].contains(&c)
            }
            Node_::Eq(a, b) => self.env[*a] == self.env[*b],
            Node_::Not(g) => !self.eval(g),
            Node_::And(gs) => gs.iter().all(|g| self.eval(g)),
            Node_::Or(gs) => gs.iter().any(|g| self.eval(g)),
            Node_::Exists { slot, guard, body } => {
                for v in self.candidates(*guard) {
                    self.env[*slot] = v;
                    if self.eval(body) {
                        return true;
                    }
                }
                false
            }
            Node_::Forall { slot, guard, body } => {
                for v in self.candidates(*guard) {
                    self.env[*slot] = v;
                    if !self.eval(body) {
                        return false;
                    }
                }
                true
            }
            Node_::Lfp(l) => {
                let key: Vec<Node> = l.ctx.iter().map(|&s| self.env[s]).collect();
                let rel = match self.cache.get(&(l.id, key.clone())) {
                    Some(r) => r.clone(),
                    None => {
                        let r = self.fixpoint(l, &mut |_| {});
                        self.cache.insert((l.id, key), r.clone());
                        r
                    }
                };
                rel.contains(&self.code(&l.args))
            }
        }
    }

    fn clear_inner(&mut self, id: usize) {
        let inner = &self.lfps[id].inner;
        if !inner.is_empty() {
            self.cache.retain(|(k, _), _| !inner.contains(k));
        }
    }

    fn fixpoint(&mut self, l: &LfpC, on_stage: &mut dyn FnMut(&HashSet<u64>)) -> Rc<HashSet<u64>> {
        let n = self.m.n();
        let arity = l.params.len();
        let saved_rel = self.relvals[l.id].clone();
        let mut current = Rc::new(HashSet::new());
        on_stage(&current);
        loop {
            self.relvals[l.id] = current.clone();
            self.clear_inner(l.id);
            let mut next = HashSet::new();
            if n > 0 {
                let mut tuple = vec![1 as Node; arity];
                'enumerate: loop {
                    for (&s, &v) in l.params.iter().zip(&tuple) {
                        self.env[s] = v;
                    }
                    if self.eval(&l.body) {
                        next.insert(self.code(&l.params));
                    }
                    for i in (0..arity).rev() {
                        if tuple[i] < n {
                            tuple[i] += 1;
                            continue 'enumerate;
                        }
                        tuple[i] = 1;
                    }
                    break;
                }
            }
            assert!(
                current.iter().all(|c| next.contains(c)),
                "lfp stages must be inclusion-increasing for a positive body"
            );
            on_stage(&next);
            if next.len() == current.len() {
                break;
            }
            current = Rc::new(next);
        }
        self.relvals[l.id] = saved_rel;
        self.clear_inner(l.id);
        current
    }
}

enum Candidates<'a> {
    Range(std::ops::RangeInclusive<Node>),
    Slice(std::slice::Iter<'a, Node>),
}

impl Iterator for Candidates<'_> {
    type Item = Node;
    fn next(&mut self) -> Option<Node> {
        match self {
            Candidates::Range(r) => r.next(),
            Candidates::Slice(s) => s.next().copied(),
        }
    }
}

fn ordered_free(f: &Formula, assignment: &Assignment) -> Result<(Vec<Var>, Vec<Node>), EvalError> {
    let mut vars = Vec::new();
    let mut vals = Vec::new();
    for v in f.free_vars() {
        let node = *assignment
            .get(&v)
            .ok_or_else(|| EvalError::UnassignedVariable(v.clone()))?;
        vars.push(v);
        vals.push(node);
    }
    Ok((vars, vals))
}

/// `M |= f[assignment]`. Extra assigned variables are ignored.
pub fn eval_fo(m: &RelationalStructure, f: &Formula, assignment: &Assignment) -> Result<bool, EvalError> {
    let (vars, vals) = ordered_free(f, assignment)?;
    Evaluator::new(m.vocab(), f, &vars)?.eval(m, &vals)
}

/// `f(M) = { tuples over vars : M |= f }`, sorted. `vars` must cover the free variables.
pub fn eval_set(m: &RelationalStructure, f: &Formula, vars: &[&str]) -> Result<Vec<Vec<Node>>, EvalError> {
    eval_set_with(m, f, vars, &Assignment::new())
}

/// Like [`eval_set`], with some free variables held fixed by `fixed`.
pub fn eval_set_with(
    m: &RelationalStructure,
    f: &Formula,
    vars: &[&str],
    fixed: &Assignment,
) -> Result<Vec<Vec<Node>>, EvalError> {
    let mut order: Vec<Var> = Vec::new();
    let mut held = Vec::new();
    for (v, &node) in fixed {
        if !vars.contains(&v.as_str()) {
            order.push(v.clone());
            held.push(node);
        }
    }
    order.extend(vars.iter().map(|v| v.to_string()));
    Evaluator::new(m.vocab(), f, &order)?.satisfying(m, &held)
}

fn lfp_evaluator(m: &RelationalStructure, node: &LfpNode, assignment: &Assignment) -> Result<(Evaluator, Vec<Node>), EvalError> {
    let f = Formula::Lfp(Box::new(node.clone()));
    let (vars, vals) = ordered_free(&f, assignment)?;
    Ok((Evaluator::new(m.vocab(), &f, &vars)?, vals))
}

/// Membership of the lfp node's argument tuple in its least fixed point.
pub fn eval_lfp(m: &RelationalStructure, node: &LfpNode, assignment: &Assignment) -> Result<bool, EvalError> {
    let (ev, vals) = lfp_evaluator(m, node, assignment)?;
    ev.eval(m, &vals)
}

/// The stage sequence `R^0 = {} ⊆ R^1 ⊆ ...` up to and including the fixpoint
/// (the last stage repeats once). Context variables of the body are read
/// from `assignment`; the node's own arguments are ignored.
pub fn lfp_stages(
    m: &RelationalStructure,
    node: &LfpNode,
    assignment: &Assignment,
) -> Result<Vec<BTreeSet<Vec<Node>>>, EvalError> {
    // Arguments are irrelevant for the stages; rename them to params so the
    // only required assignments are the body's context variables.
    let mut probe = node.clone();
    probe.args = probe.params.clone();
    let mut fixed = assignment.clone();
    for p in &probe.params {
        fixed.entry(p.clone()).or_insert(1);
    }
    if m.n() == 0 {
        return Ok(vec![BTreeSet::new(), BTreeSet::new()]);
    }
    let (ev, vals) = lfp_evaluator(m, &probe, &fixed)?;
    let mut rt = ev.runtime(m)?;
    ev.load(&mut rt, &vals)?;
    let Node_::Lfp(l) = &ev.root else {
        unreachable!("compiled lfp root")
    };
    let n = m.n() as u64;
    let arity = l.params.len();
    let mut stages = Vec::new();
    rt.fixpoint(l, &mut |set| {
        let mut rows: BTreeSet<Vec<Node>> = BTreeSet::new();
        for &code in set {
            let mut c = code;
            let mut t = Vec::with_capacity(arity);
            for _ in 0..arity {
                t.push((c % n) as Node + 1);
                c /= n;
            }
            rows.insert(t);
        }
        stages.push(rows);
    });
    Ok(stages)
}

/// The fixpoint relation of `node` as sorted tuples.
pub fn lfp_relation(
    m: &RelationalStructure,
    node: &LfpNode,
    assignment: &Assignment,
) -> Result<BTreeSet<Vec<Node>>, EvalError> {
    Ok(lfp_stages(m, node, assignment)?.pop().unwrap_or_default())
}
