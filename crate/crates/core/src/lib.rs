//! Interactive dynamic influence diagrams for a two-agent team, with
//! level-0 models of the teammate that either plan or learn.
//!
//! - [`domain`]: tabular benchmark domains and single-agent projections.
//! - [`planner`]: exact finite-horizon planning and joint evaluation.
//! - [`idid`]: nested model spaces, behavioral equivalence and the I-DID
//!   solve.
//! - [`mcesp`]: Monte Carlo policy search for level-0 learning models.
//! - [`adhoc`]: ad hoc teamwork episodes against scripted teammates.

pub mod adhoc;
pub mod domain;
pub mod error;
pub mod idid;
pub mod mcesp;
pub mod planner;

pub use error::{Error, Result};
