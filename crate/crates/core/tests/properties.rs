mod common;

use common::*;

#[test]
fn belief_normalization() {
    runner(64).run(&belief_inputs(), belief_stays_normalized).unwrap();
}

#[test]
fn weight_conservation() {
    runner(24).run(&weight_inputs(), weights_are_conserved).unwrap();
}

#[test]
fn policy_tree_completeness() {
    runner(32).run(&tree_inputs(), trees_are_complete).unwrap();
}

#[test]
fn q_update_convexity() {
    runner(256).run(&q_inputs(), q_update_is_convex).unwrap();
}

#[test]
fn projection_soundness() {
    runner(16).run(&projection_inputs(), projection_is_sound).unwrap();
}
