//! Dynamical cores. Each exposes a stepper and the per-term tendency fields
//! that feed the information budget.

pub mod advdiff;
pub mod ks;
pub mod sw;
