//! Extensions of a base Hamiltonian: profiles, the recursion, first-integral builders,
//! closed forms and checkers for the structural conditions.

mod build;
mod lemma;
mod linear;
mod profile;
mod seed;

use thiserror::Error;

use crate::expr::ExprError;
use crate::poisson::PoissonError;

pub use build::{
    apply_u, apply_w, build_extended_h, build_k, build_modified_h, build_modified_k, closed_form_apply, closed_form_pd, expand_modified_k, lambda,
    u_operator, w_operator, KMeta, ModifiedK, Parity,
};
pub use lemma::{check_lemma_conditions, ConditionCheck, LemmaCondition, LemmaInputs, LemmaReport};
pub use linear::{check_e2_system, gl_residuals, infer_case, solve_linear_seed, E2Report, E2Residual, LinearCase, LinearInputs, LinearSeedFamily};
pub use profile::{make_profile, tagged_symbolic, tagged_trig, Column, Profile, Tagged};
pub use seed::{check_seed, recursion_gn, structural_residual, Seed, SeedCheck};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExtError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid seed: {0}")]
    InvalidSeed(String),
    #[error("seed does not satisfy the structural equation; residual: {residual}")]
    SeedCondition { residual: String },
    #[error("closed form requested for r = {r} > m = {m}")]
    ClosedFormOrder { r: u32, m: u32 },
    #[error("inconsistent case flags: {0}")]
    InconsistentCase(String),
    #[error("singular: {0}")]
    Singular(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
}

#[cfg(test)]
mod tests;
