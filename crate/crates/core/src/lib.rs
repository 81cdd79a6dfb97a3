//! Critical visibilities of noisy three-qutrit states.
//!
//! A state is mixed with white or product noise and the largest admixture
//! that still admits a local-hidden-variable model is found by linear
//! programming over deterministic strategies.

pub mod appendix;
pub mod born;
pub mod cli;
pub mod error;
pub mod lhv;
pub mod lp;
pub mod observables;
pub mod optimizer;
pub mod oracle;
pub mod states;

pub use error::{Error, Result};
