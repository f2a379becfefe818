#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cleaning;
pub mod curve;
pub mod datamodel;
pub mod error;
pub mod exec;
pub mod gapscan;
pub mod io;
pub mod levelanalysis;
pub mod metrics;
pub mod panel;
pub mod series;
pub mod state;

pub use error::{Error, ErrorKind, Result};
