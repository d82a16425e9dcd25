//! Level decompositions and height, the arithmetic model on levels, Case A
//! witness templates, and the fingerprint order along a unique chain.

mod levels;
mod natmodel;
mod order;
mod template;

pub use levels::{build_levels, default_cap, height_of, HeightResult, LevelDecomposition};
pub use natmodel::{iso_check, nat_model, nat_model_of_height};
pub use order::{
    estimate_alpha2, fingerprint_order, order_parity, outside_domain, unique_chain, walk_chain, FingerprintOrder,
    OrderError, Parity, SeparationStats,
};
pub use template::{
    default_case_a_templates, eval_phi_witness, find_template_params, make_template, phi_formula, phi_predecessors,
    phi_successors, template_value, Sign, TemplateBounds, TemplateError, WitnessTemplate,
};
