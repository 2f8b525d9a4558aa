//! Exact single-agent planning, joint policy evaluation and the brute-force
//! joint optimum.

mod belief;
mod did;
mod joint;
mod oracle;
mod policy;
mod pomdp;

pub use belief::{belief_update, lookahead, Belief, Lookahead};
pub use did::{evaluate_policy, solve_did, solve_did_from, Behavior, DidSolution, BRANCH_EPS, TIE_TOL};
pub use joint::{
    joint_value, joint_value_flat, joint_value_from, sample_index, sample_sparse, simulate_joint,
    ValueReport, PRUNE_EPS,
};
pub use oracle::{brute_force_oracle, enumerate_best_response, tree_count, OracleResult, TREE_LIMIT};
pub use policy::{FlatPolicy, PolicyTree, END};
pub use pomdp::{PlanningView, Pomdp};
