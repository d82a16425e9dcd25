//! Formula syntax, FO/LFP evaluation and the pebble game.

mod ast;
mod eval;
mod parser;
mod pebble;

pub use ast::{atom, check_positive, eq, exists, forall, neq, Formula, LfpNode, Var};
pub use eval::{
    eval_fo, eval_lfp, eval_set, eval_set_with, lfp_relation, lfp_stages, Assignment, EvalError, Evaluator,
};
pub use parser::{parse, ParseError};
pub use pebble::{
    enumerate_partial_isos, is_partial_iso, pebble_equivalent, pebble_equivalent_capped, verify_family,
    PartialMap, PebbleError, PebbleFamily, PebbleOutcome, DEFAULT_POSITION_CAP,
};
