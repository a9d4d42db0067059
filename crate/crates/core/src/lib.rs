//! Modeling, linearization, controller design and simulation for a
//! single-axis magnetic levitation plant.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod design;
pub mod error;
pub mod lti;
pub mod numkit;
pub mod plant;
pub mod sim;

pub use error::{Error, Result};
