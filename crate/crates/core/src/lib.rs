//! Forced porous medium equation `u_t = Delta u^p + R u` coupled to Ricci
//! flow on symmetric model manifolds, together with the differential Harnack
//! quantities of the pressure `v = p/(p-1) u^{p-1}` and the machinery that
//! certifies the global estimates and evolution identities numerically.

// `!(x > 0.0)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod harnack;
pub mod identities;
pub mod pme;
pub mod ricci_flow;
pub mod runner;

pub use error::{Error, Result};
