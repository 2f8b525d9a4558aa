//! Nested models of the other agent and the exact I-DID solve.

mod model;
mod solve;

pub use model::{
    assign_weights, expand_model_space, prior_grid, prior_model_space, prune_behavioral_eq, Frame,
    Level0Model, Model, ModelSpace, Solved, Weighting,
};
pub use solve::{
    augment, augmented_model_space, solve_augmented_idid, solve_idid, solve_model, solve_models, Idid,
    IdidSolution, LearnedPolicy, DEFAULT_TOP_K,
};
