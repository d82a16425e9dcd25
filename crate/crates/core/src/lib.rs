//! Finite relational structures, sparse random models, FO/LFP evaluation,
//! pebble games and the level/height constructions built on them.

pub mod cli;
pub mod harness;
pub mod heightkit;
pub mod logic;
pub mod pathkit;
pub mod randmodel;
pub mod relstruct;
